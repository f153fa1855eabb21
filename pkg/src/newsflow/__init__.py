"""newsflow: news-diffusion networks, directed Collective Influence and
activity-series causality analysis for tweet-like records."""

from ._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
