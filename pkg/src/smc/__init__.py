"""Exact algorithms and instance generators for stable matchings with cardinal valuations."""
from .core import (
    FractionalMatching,
    IntegralMatching,
    SmcInstance,
    check_stability,
    is_stable,
    load_instance,
    load_matching,
    utilities,
    welfare,
)
from .errors import CapExceeded, SmcError

__all__ = [
    "FractionalMatching", "IntegralMatching", "SmcInstance", "check_stability", "is_stable",
    "load_instance", "load_matching", "utilities", "welfare", "CapExceeded", "SmcError",
]
__version__ = "0.1.0"
