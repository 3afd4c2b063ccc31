"""Runtime ceilings for charlab experiments."""
