"""Spectral binning of ``h`` and the support-projection surgery ``x -> v``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..linalg_core import Element, SingularInput, SpectralData, polar_unitary


class SurgeryError(RuntimeError):
    """A compression that should be close to a projection is not."""


@dataclass(frozen=True, eq=False)
class BinDecomposition:
    """``e_k = E_h[2k delta, 2(k+1) delta)`` together with the step element."""

    delta: float
    sd: SpectralData
    #: nonempty bin indices, ascending
    indices: tuple[int, ...]
    projections: dict = field(repr=False)
    step: Element = field(repr=False)

    @property
    def count(self) -> int:
        return len(self.indices)

    def e(self, k: int) -> Element:
        return self.projections.get(k, self.sd.algebra.zeros())

    def window(self, lo: float, hi: float) -> Element:
        """``E_h[lo, hi)``; infinite ends are allowed."""
        return self.sd.projection(lambda w: (w >= lo) & (w < hi))

    def tail(self, m: int) -> Element:
        """``E_m = sum_{j >= m} e_j``."""
        return self.window(2 * m * self.delta, math.inf)

    def localization_window(self, k: int) -> Element:
        """``W_k = E_h[(2k-1) delta, (2k+3) delta)``."""
        return self.window((2 * k - 1) * self.delta, (2 * k + 3) * self.delta)


def bin_projections(h: Element, delta: float, sd: SpectralData) -> BinDecomposition:
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    spec = sd.spectrum
    lo = math.floor(spec[0] / (2 * delta)) if spec.size else 0
    hi = math.floor(spec[-1] / (2 * delta)) if spec.size else 0
    projections = {}
    step = sd.algebra.zeros()
    for k in range(lo - 1, hi + 2):
        e = sd.projection(lambda w, k=k: (w >= 2 * k * delta) & (w < 2 * (k + 1) * delta))
        if e.trace().real > 0.5:
            projections[k] = e
            step = step + (2 * k * delta) * e
    return BinDecomposition(delta, sd, tuple(sorted(projections)), projections, step)


@dataclass(frozen=True, eq=False)
class SurgeryResult:
    v: Element
    y: Element
    #: largest distance from the spectrum of a compression to {0, 1}
    near_projection_defect: float
    #: smallest gap between a kept and a discarded eigenvalue of a compression
    selection_gap: float
    smallest_singular_value: float
    f_minus: dict = field(repr=False)
    f_plus: dict = field(repr=False)


def _rank_vec(p: Element) -> np.ndarray:
    return np.array([int(round(np.trace(b).real)) for b in p.blocks])


def _top(a: Element, ranks: np.ndarray) -> tuple[Element, float, float]:
    """Projection onto the top ``ranks[i]`` eigenvectors of each block of ``a``.

    Returns the projection, the distance of the spectrum from {0, 1}, and
    the gap between the smallest kept and the largest dropped eigenvalue.
    """
    blocks = []
    dist = 0.0
    gap = math.inf
    for b, r in zip(a.blocks, ranks):
        w, vec = np.linalg.eigh((b + b.conj().T) / 2)
        n = w.size
        if n:
            dist = max(dist, float(np.max(np.minimum(np.abs(w), np.abs(w - 1)))))
        if 0 < r < n:
            gap = min(gap, float(w[n - r] - w[n - r - 1]))
        sel = vec[:, n - r:] if r else vec[:, :0]
        blocks.append(sel @ sel.conj().T)
    return Element(a.algebra, tuple(blocks)), dist, gap


def surgery(x: Element, bins: BinDecomposition, max_defect: float | None = None) -> SurgeryResult:
    """Replace ``x e_k x*`` by nearby projections living in the right windows.

    ``f_{j-1}^+`` is the support of ``F_j x e_{j-1} x* F_j`` with
    ``F_j = E_h[(2j-1) delta, inf)`` and ``f_j^-`` the support of
    ``L_j x e_j x* L_j`` with ``L_j = E_h(-inf, (2j+1) delta)``. Then
    ``f_j = f_j^- + f_j^+`` and ``g_j`` is the remainder of
    ``E_h[(2j-1) delta, (2j+3) delta)``; the family ``f_{2j}, g_{2j+1}``
    partitions the identity and ``v`` is the unitary part of
    ``y = sum f_{2j} x e_{2j} + sum g_{2j+1} x e_{2j+1}``.

    For the partition to carry each ``e_j`` onto a projection of the same
    rank, the ranks of ``f_j^-`` and ``f_j^+`` are forced by a chain of
    counting identities. Supports are taken as the top eigenvectors of those
    ranks, which agrees with thresholding at 1/2 whenever the compressions
    are near projections and keeps ``v e_k v* <= W_k`` exact otherwise.
    ``max_defect`` optionally enforces the near-projection hypothesis.
    """
    d = bins.delta
    alg = x.algebra
    zero = alg.zeros()
    xs = x.adjoint()
    if not bins.indices:
        raise SurgeryError("no spectral bins")
    lo, hi = bins.indices[0], bins.indices[-1]
    lo -= lo % 2
    hi += 2

    def a_win(j):  # E_h[(2j-1) delta, (2j+1) delta)
        return bins.window((2 * j - 1) * d, (2 * j + 1) * d)

    alpha = {j: _rank_vec(a_win(j)) for j in range(lo - 1, hi + 2)}
    r = {j: _rank_vec(bins.e(j)) for j in range(lo - 1, hi + 2)}
    f_plus: dict[int, Element] = {}
    f_minus: dict[int, Element] = {}
    worst = 0.0
    sel_gap = math.inf
    q_prev = np.zeros(alg.n_blocks, dtype=int)
    for j in range(lo, hi + 1, 2):
        # the odd window j-1 hosts g_{j-1}, f_{j-2}^+ and f_j^-
        p = alpha[j - 1] + alpha[j] - r[j - 1] - q_prev
        q = r[j] - p
        if np.any(p < 0) or np.any(q < 0) or np.any(p > alpha[j]) or np.any(q > alpha[j + 1]):
            raise SurgeryError(f"no rank-consistent partition at bin {j}")
        lj = bins.window(-math.inf, (2 * j + 1) * d)
        f_minus[j], dist, gap = _top(lj @ x @ bins.e(j) @ xs @ lj, p)
        worst, sel_gap = max(worst, dist), min(sel_gap, gap)
        fj = bins.window((2 * j + 1) * d, math.inf)
        f_plus[j], dist, gap = _top(fj @ x @ bins.e(j) @ xs @ fj, q)
        worst, sel_gap = max(worst, dist), min(sel_gap, gap)
        q_prev = q
    if np.any(q_prev != 0):
        raise SurgeryError("rank bookkeeping does not close above the spectrum")
    if max_defect is not None and worst > max_defect:
        raise SurgeryError(f"compression is {worst:.3f} away from a projection (limit {max_defect}); "
                           "shrink ||[h,u]||")
    y = zero
    for j in range(lo - 1, hi + 1):
        e = bins.e(j)
        if not e.trace().real > 0.5:
            continue
        if j % 2 == 0:
            f = f_minus[j] + f_plus[j]
        else:
            f = (a_win(j) - f_plus.get(j - 1, zero) + a_win(j + 1) - f_minus.get(j + 1, zero))
        y = y + f @ x @ e
    smin = min((float(np.linalg.svd(b, compute_uv=False).min()) for b in y.blocks if b.size),
               default=1.0)
    try:
        v = polar_unitary(y)
    except SingularInput as exc:
        raise SurgeryError(f"assembled y is singular: {exc}") from exc
    return SurgeryResult(v, y, worst, sel_gap, smin, f_minus, f_plus)


def localization_defects(v: Element, bins: BinDecomposition) -> tuple[float, float]:
    """``max_k ||(1 - W_k) v e_k v* (1 - W_k)||`` and ``||v k v* - k||``."""
    one = v.algebra.identity()
    vs = v.adjoint()
    worst = 0.0
    for k in bins.indices:
        out = one - bins.localization_window(k)
        worst = max(worst, (out @ v @ bins.e(k) @ vs @ out).norm())
    return worst, (v @ bins.step @ vs - bins.step).norm()
