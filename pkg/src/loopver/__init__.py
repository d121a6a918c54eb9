"""Static verification and classification of loops annotated with iteration contracts."""

from __future__ import annotations

__version__ = "0.1.0"
