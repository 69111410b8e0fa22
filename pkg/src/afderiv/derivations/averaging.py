"""Torus-averaged cobounding element for ``delta = ad iH`` on an abelian tower.

For unitaries ``g = g_n ... g_1`` in the product of the unitary groups of
``C_1, ..., C_n`` one has ``delta(g*) g = i(H - g* H g)``. Averaging over the
tori kills every matrix unit ``q_I H q_J`` whose phase does not cancel, which
leaves the pinching ``E_n(H) = sum_I q_I H q_I`` over the joint minimal
projections. Hence ``ih_n = i(H - E_n(H))`` and ``[ih_n, g] = delta(g)``.

The closed form is computed level by level:
``ih_n = sum_k sum_q q (sum_i delta(p_i) p_i) q`` with ``p_i`` the minimal
projections of ``C_k`` and ``q`` those of ``C_1 ... C_{k-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from ..linalg_core import BlockAlgebra, Element

ABELIAN_TOL = 1e-10


class NonAbelianError(ValueError):
    pass


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, Element):
        if x.algebra.n_blocks != 1:
            raise ValueError("the tower lives in a single matrix algebra")
        return x.blocks[0]
    return np.asarray(x, dtype=complex)


@dataclass(frozen=True, eq=False)
class AbelianTower:
    """Minimal projections of ``C_1, C_2, ...`` acting on one Hilbert space.

    ``levels[k]`` lists the minimal projections of ``C_{k+1}``; within a level
    they are orthogonal and sum to 1, and projections of different levels
    commute, so the algebra generated by the first ``n`` levels is abelian.
    """

    levels: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        if not self.levels:
            raise NonAbelianError("empty tower")
        dim = self.levels[0][0].shape[0]
        flat = []
        for k, ps in enumerate(self.levels):
            total = np.zeros((dim, dim), dtype=complex)
            for p in ps:
                if p.shape != (dim, dim):
                    raise NonAbelianError("projections of different sizes")
                if np.max(np.abs(p @ p - p)) > ABELIAN_TOL or np.max(np.abs(p - p.conj().T)) > ABELIAN_TOL:
                    raise NonAbelianError(f"level {k + 1}: not a projection")
                total += p
            if np.max(np.abs(total - np.eye(dim))) > ABELIAN_TOL:
                raise NonAbelianError(f"level {k + 1}: projections do not sum to 1")
            flat.extend(ps)
        for i, p in enumerate(flat):
            for q in flat[i + 1:]:
                if np.max(np.abs(p @ q - q @ p)) > ABELIAN_TOL:
                    raise NonAbelianError("projections do not commute")

    @property
    def dim(self) -> int:
        return self.levels[0][0].shape[0]

    @property
    def depth(self) -> int:
        return len(self.levels)

    def joint(self, n: int) -> list[np.ndarray]:
        """Nonzero minimal projections of ``C_1 ... C_n`` (products across levels)."""
        qs = [np.eye(self.dim, dtype=complex)]
        for ps in self.levels[:n]:
            qs = [q @ p for q in qs for p in ps]
            qs = [q for q in qs if np.linalg.norm(q) > ABELIAN_TOL]
        return qs

    def random_unitary(self, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
        """``g_n ... g_1`` with independent uniform phases on every minimal projection."""
        return self.unitary_from_phases(self.phase_vector(rng, n), n)

    def phase_count(self, n: int | None = None) -> int:
        return sum(len(ps) for ps in self.levels[:n or self.depth])

    def phase_vector(self, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
        return rng.uniform(0, 2 * np.pi, self.phase_count(n))

    def unitary_from_phases(self, phases: np.ndarray, n: int | None = None) -> np.ndarray:
        g = np.eye(self.dim, dtype=complex)
        k = 0
        for ps in self.levels[:n or self.depth]:
            gk = sum(np.exp(1j * phases[k + i]) * p for i, p in enumerate(ps))
            k += len(ps)
            g = gk @ g
        return g


def tensor_tower(dims: Sequence[int], extra: int = 1) -> AbelianTower:
    """Diagonal algebras ``C_k = D_{d_k}`` on the ``k``-th factor of ``C^{d_1} x ... x C^{d_n} x C^{extra}``."""
    dims = [int(d) for d in dims]
    if not dims or min(dims) < 1 or extra < 1:
        raise ValueError("dimensions must be positive")
    factors = dims + [extra]
    levels = []
    for k, d in enumerate(dims):
        ps = []
        for i in range(d):
            e = np.zeros((d, d))
            e[i, i] = 1.0
            mats = [np.eye(f) if j != k else e for j, f in enumerate(factors)]
            ps.append(reduce(np.kron, mats).astype(complex))
        levels.append(tuple(ps))
    return AbelianTower(tuple(levels))


def ad_delta(H: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``delta(x) = i[H, x]``."""
    return 1j * (H @ x - x @ H)


def averaged_cobounding(H, tower: AbelianTower, n: int | None = None) -> Element:
    """Self-adjoint ``h_n`` with ``i h_n = int delta(g_1* ... g_n*) g_n ... g_1``, in closed form."""
    H = _as_matrix(H)
    if np.max(np.abs(H - H.conj().T)) > ABELIAN_TOL * max(1.0, np.abs(H).max()):
        raise ValueError("H must be self-adjoint")
    n = tower.depth if n is None else n
    if not 1 <= n <= tower.depth:
        raise ValueError(f"need 1 <= n <= {tower.depth}")
    ih = np.zeros_like(H, dtype=complex)
    for k in range(n):
        single = sum(ad_delta(H, p) @ p for p in tower.levels[k])
        for q in tower.joint(k):
            ih += q @ single @ q
    h = -1j * ih
    h = (h + h.conj().T) / 2
    return Element(BlockAlgebra((H.shape[0],)), (h,), frozenset({"self_adjoint"}))


def pinching(H, tower: AbelianTower, n: int | None = None) -> np.ndarray:
    """``E_n(H) = sum_I q_I H q_I`` over the joint minimal projections."""
    H = _as_matrix(H)
    return sum(q @ H @ q for q in tower.joint(n or tower.depth))


def cobounding_defect(h: Element, H, g: np.ndarray) -> float:
    """``||[i h, g] - delta(g)||``."""
    hm = _as_matrix(h)
    H = _as_matrix(H)
    return float(np.linalg.norm(1j * (hm @ g - g @ hm) - ad_delta(H, g), 2))


def monte_carlo_cobounding(H, tower: AbelianTower, n: int | None = None, samples: int = 2 ** 14,
                           seed: int = 0) -> np.ndarray:
    """Quasi-Monte-Carlo average of ``delta(g*) g`` over the product torus.

    Uses a scrambled Sobol sequence; ``samples`` is rounded up to a power of 2.
    Returns ``ih`` (not ``h``).
    """
    H = _as_matrix(H)
    n = n or tower.depth
    dim = tower.phase_count(n)
    m = max(0, math.ceil(math.log2(max(samples, 1))))
    pts = qmc.Sobol(d=dim, scramble=True, seed=seed).random_base2(m) * 2 * np.pi
    acc = np.zeros_like(H, dtype=complex)
    for chunk in np.array_split(pts, max(1, len(pts) // 1024)):
        g = np.stack([tower.unitary_from_phases(ph, n) for ph in chunk])
        gs = np.conj(np.swapaxes(g, 1, 2))
        acc += np.sum(1j * (H[None] @ gs - gs @ H[None]) @ g, axis=0)
    return acc / len(pts)
