"""Near-field spatial multiplexing of tri-polarized linear arrays."""

__version__ = "0.1.0"
