"""Higher-order logic with equality as the only primitive, plus a finite model checker."""

__version__ = "0.1.0"
