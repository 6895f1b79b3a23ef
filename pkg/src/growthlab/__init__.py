"""growthlab: dynamic limit growth indices on finite filtered probability spaces."""

__version__ = "0.1.0"
