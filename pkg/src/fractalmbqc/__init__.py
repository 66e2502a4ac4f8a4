"""MBQC on fractal-symmetric cluster states (Sierpinski and Fibonacci models)."""

__version__ = "0.1.0"
