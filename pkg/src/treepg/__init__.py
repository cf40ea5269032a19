"""Self-play Expert Iteration with cross-entropy and tree-search policy-gradient training."""

__version__ = "0.1.0"
