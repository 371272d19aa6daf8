"""Circle patterns on closed surfaces: cross ratios, holonomy and symplectic forms."""

__version__ = "0.1.0"
