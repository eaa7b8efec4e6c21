"""Probabilistic frames as discrete measures, with perturbation certificates."""

from .frame import (
    Classification,
    FrameCertificate,
    PairedMeasure,
    canonical_dual,
    canonical_parseval,
    frame_bounds,
    frame_operator,
)
from .measure import DiscreteMeasure, LinearMap, make_measure, pushforward, second_moment

__version__ = "0.1.0"
