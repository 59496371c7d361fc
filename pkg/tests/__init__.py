"""Tests for lvq-drift."""
