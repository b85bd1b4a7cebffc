"""Exact computations with split semisimple Lie algebras, limiting subalgebras
of unipotent orbits, good-function certificates, and counting of integral
3x3 matrices with a prescribed characteristic polynomial."""

__version__ = "0.1.0"
