from .export import write_rows
from .log import setup_logging

__all__ = ["write_rows", "setup_logging"]
