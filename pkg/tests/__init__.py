"""Tests for rowdil."""
