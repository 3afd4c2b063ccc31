"""Integration tests for charlab."""
