"""Cost-aware placement of multi-service applications on Cloud-Edge infrastructures."""

__version__ = "0.1.0"
