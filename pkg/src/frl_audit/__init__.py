"""Severe testing of fair representation learning models."""
