"""Path categories, precise factorizations and open-map checking for
finite non-deterministic coalgebras."""

__version__ = "0.1.0"
