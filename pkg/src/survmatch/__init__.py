"""survmatch: calibrated time-to-event modeling by survival function matching.

A survival-analysis toolkit built around distribution-based Kaplan-Meier
estimation: classic KM with exponential Greenwood bands, point- and
distribution-based variants for model predictions (PKM/DKM), a smooth
differentiable PKM, and a noise-injected neural generator of event times
trained to match the empirical survival curve while staying temporally
accurate. Includes a synthetic-data oracle, a calibration/concordance/
dispersion evaluation suite, and a CLI.
"""

from ._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"
__all__ = ["kernel_backend", "__version__"]
