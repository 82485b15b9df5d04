"""Command line, configuration and file formats."""
