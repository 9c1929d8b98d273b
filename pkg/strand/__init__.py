"""strand: string diagrams as structured cospans over flat integer arrays."""

__version__ = "1.0.0"
