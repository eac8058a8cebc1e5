"""Core estimation machinery."""
