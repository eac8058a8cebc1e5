"""Command-line command families."""
