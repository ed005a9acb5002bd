"""frontlab: pulled-front simulation, critical travelling waves, and expansion fits."""

__version__ = "0.1.0"
