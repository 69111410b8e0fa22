"""Band-limited averaging of ``Ad e^{ith}(u)``.

The default kernel is the normalised square of the Fejer kernel (a Jackson
kernel). With ``b = delta / 2``::

    f(t)      = (3 b / 4 pi) * (sin(b t / 2) / (b t / 2))^4
    f_hat(xi) = 1 - 3/2 s^2 + 3/4 s^3      for s = |xi| / b <= 1
              = (2 - s)^3 / 4                for 1 <= s <= 2
              = 0                            for s >= 2

so ``f >= 0``, ``f_hat(0) = 1`` and ``f_hat`` vanishes outside
``(-delta, delta)``. The first moment is ``int f(t) |t| dt = 12 ln 2 / (pi delta)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..linalg_core import CERT_TOL, Element, NotUnitary, eig_hermitian

KERNELS = ("jackson",)


@dataclass(frozen=True)
class MollifierSpec:
    delta: float
    kernel: str = "jackson"

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}; available: {KERNELS}")

    @property
    def moment(self) -> float:
        """``M_f = int f(t) |t| dt``."""
        return 12.0 * np.log(2.0) / (np.pi * self.delta)

    def f(self, t: np.ndarray) -> np.ndarray:
        b = self.delta / 2
        arg = b * np.asarray(t, dtype=float) / 2
        return 3 * b / (4 * np.pi) * np.sinc(arg / np.pi) ** 4

    def f_hat(self, xi: np.ndarray) -> np.ndarray:
        s = np.abs(np.asarray(xi, dtype=float)) / (self.delta / 2)
        inner = 1 - 1.5 * s**2 + 0.75 * s**3
        outer = (2 - s) ** 3 / 4
        return np.where(s <= 1, inner, np.where(s < 2, outer, 0.0))


def mollify(u: Element, h: Element, spec: MollifierSpec, sd=None) -> Element:
    """``x = int f(t) e^{ith} u e^{-ith} dt`` as a Schur multiplier in h's eigenbasis.

    Entry ``(j, k)`` of ``u`` in the eigenbasis is scaled by
    ``f_hat(mu_j - mu_k)``; no time integration is involved.
    """
    if u.defects()["unitary"] > CERT_TOL:
        raise NotUnitary("mollify expects a unitary")
    sd = sd if sd is not None else eig_hermitian(h)
    u._check(h)
    blocks = []
    for ub, w, v in zip(u.blocks, sd.eigenvalues, sd.eigenvectors):
        ut = v.conj().T @ ub @ v
        mult = spec.f_hat(w[:, None] - w[None, :])
        blocks.append(v @ (mult * ut) @ v.conj().T)
    return Element(u.algebra, tuple(blocks))
