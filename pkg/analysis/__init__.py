"""Numerical modules: panels, networks, estimation, forecasting and evaluation."""
