"""Bundled data files (reference detection-share fixture)."""
