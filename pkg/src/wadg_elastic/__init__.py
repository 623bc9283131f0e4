"""Weight-adjusted discontinuous Galerkin solver for 2D linear elastic waves."""

__version__ = "0.1.0"
