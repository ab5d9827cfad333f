"""Mining TSL_f specifications over integer-valued execution logs."""

__version__ = "0.1.0"
