"""Unit conversion between MHz (H/2π) and internal rad/ns."""
import math

import numpy as np

MHZ = 2.0 * math.pi * 1e-3  # rad/ns per MHz of H/2π


def mhz(value):
    """H/2π in MHz -> angular frequency in rad/ns."""
    if isinstance(value, (list, tuple, np.ndarray)):
        return np.asarray(value, dtype=float) * MHZ
    return float(value) * MHZ


def to_mhz(value):
    """Angular frequency in rad/ns -> H/2π in MHz."""
    if isinstance(value, (list, tuple, np.ndarray)):
        return np.asarray(value, dtype=float) / MHZ
    return float(value) / MHZ
