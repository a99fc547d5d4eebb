"""Core data models, errors, storage and services."""
