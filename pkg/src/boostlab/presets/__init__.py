"""Parameter files for the reference two-boost scenarios."""
