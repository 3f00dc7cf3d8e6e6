"""Bundled sample inputs used by the CLI examples and the test suite."""

from importlib import resources
from pathlib import Path


def fixture_path(name: str) -> Path:
    """Absolute path of a bundled data file."""
    return Path(resources.files(__package__) / name)
