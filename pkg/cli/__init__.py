"""Command-line interface for the GNAR-HARX toolkit."""
