"""Path-consistent multi-commodity flow over time-varying satellite graphs."""
