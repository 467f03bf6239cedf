"""Exact linear programming for congestion, metrics and gap certificates."""
