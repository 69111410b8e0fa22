"""Winding numbers of sampled loops in the punctured plane."""

from __future__ import annotations

import numpy as np


class WindingError(ValueError):
    pass


def winding_number(samples, zero_tol: float = 1e-300) -> int:
    """Degree of the closed loop through ``samples`` (taken in cyclic order).

    The phase is unwrapped across consecutive samples, including the step
    from the last sample back to the first. Every step must stay below pi,
    otherwise the loop is undersampled and the degree is not determined.
    """
    z = np.asarray(samples, dtype=complex).ravel()
    if z.size == 0:
        raise WindingError("no samples")
    if np.min(np.abs(z)) <= zero_tol:
        raise WindingError("loop passes through zero")
    steps = np.angle(np.roll(z, -1) / z)
    if np.max(np.abs(steps)) >= np.pi - 1e-12:
        raise WindingError("phase jump of pi or more between neighbouring samples")
    total = float(np.sum(steps)) / (2 * np.pi)
    return int(round(total))
