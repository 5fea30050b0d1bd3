"""Self-organizing map quantization error as a change indicator for
image time series."""

__version__ = '0.1.0'

from somqe import som, features, imaging, analysis, report
