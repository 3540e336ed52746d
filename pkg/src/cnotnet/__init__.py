"""Relaxation rates of random CNOT networks via the induced basis-state graph."""

__version__ = "0.1.0"
