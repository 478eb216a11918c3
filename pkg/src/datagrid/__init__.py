"""Threshold partitioning and replica allocation for clustered data grids."""

from .errors import DataGridError
from .share import Scheme, Share, ShareParams, object_digest

__all__ = ["DataGridError", "Scheme", "Share", "ShareParams", "object_digest"]
__version__ = "0.1.0"
