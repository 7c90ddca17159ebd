"""2D FDTD electrodynamics engine and nanophotonic-design benchmark harness."""

__version__ = "0.1.0"
