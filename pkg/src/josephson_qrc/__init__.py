"""Reservoir computing with a driven, dissipative two-mode Josephson mixer."""
__version__ = "0.1.0"
