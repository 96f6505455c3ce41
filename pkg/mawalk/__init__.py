"""mawalk: simulate moving-average walks with regularly varying memory and verify their limits."""

__version__ = "0.1.0"
