"""Packaged data files: question templates and the default tag schema."""
