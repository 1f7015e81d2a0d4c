"""dermforge: a from-scratch CNN engine for dermoscopic skin-lesion classification."""

__version__ = "0.1.0"
