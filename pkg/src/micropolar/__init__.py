"""Pseudo-spectral micropolar fluid simulator with regularity diagnostics."""
