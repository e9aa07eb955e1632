"""Learned tactic-level proof search over a small equational logic."""
