"""Open-system simulation of cavity-coupled N-qubit quantum batteries."""
__version__ = "0.1.0"
