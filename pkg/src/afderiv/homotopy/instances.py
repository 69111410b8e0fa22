"""Random admissible ``(u, h)`` pairs with ``||[h, u]||`` just below a target."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..linalg_core import BlockAlgebra, Element, commutator, expi

FAMILIES = ("perturbed", "banded")


@dataclass(frozen=True, eq=False)
class Instance:
    u: Element
    h: Element
    family: str
    dim: int
    seed: int
    target: float


def _haar(rng: np.random.Generator, n: int) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _tune(u0: Element, h: Element, b: Element, target: float) -> Element:
    """``u0 e^{isb}`` with ``s`` chosen so that ``||[h, u]|| = target``."""
    f = lambda s: commutator(h, u0 @ expi(b, s)).norm() - target
    if f(0.0) >= 0:
        return u0
    lo, hi = 0.0, 1.0
    while f(hi) < 0:
        lo, hi = hi, 2 * hi
        if hi > 64:
            # target out of reach (narrow spectrum); keep the last checked point
            return u0 @ expi(b, lo)
    # bracket the first crossing so the returned point is just below target
    s = brentq(f, 0.0, hi, xtol=1e-14)
    while f(s) >= 0:
        s = np.nextafter(s, 0.0) if s > 1e-300 else 0.0
        s *= 1 - 1e-12
    return u0 @ expi(b, s)


def random_instance(dim: int, target: float, seed: int, family: str = "perturbed") -> Instance:
    """A pair with ``||[h, u]||`` slightly below ``target``.

    ``perturbed``: ``h`` has uniform spectrum in ``[-1, 1]``, ``u0`` is
    diagonal in h's eigenbasis with random phases, and ``u = u0 e^{isB}``
    for a random self-adjoint ``B``.
    ``banded``: ``h`` has a dense cluster of eigenvalues in ``[0, L]`` and
    ``B`` is a random hopping of bandwidth up to 3 in h's eigenbasis, so
    the perturbation only couples nearby energies.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown instance family {family!r}")
    rng = np.random.default_rng(seed)
    alg = BlockAlgebra((dim,))
    q = _haar(rng, dim)
    phases = np.exp(1j * rng.uniform(-np.pi, np.pi, dim))
    if family == "perturbed":
        lam = rng.uniform(-1, 1, dim)
        b = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        b = (b + b.conj().T) / 2
    else:
        width = rng.choice([0.02, 0.1, 0.5, 2.0])
        lam = np.sort(rng.uniform(0, width, dim))
        bw = min(dim - 1, int(rng.integers(1, 4)))
        t = np.zeros((dim, dim), dtype=complex)
        for k in range(1, bw + 1):
            t += np.diag(rng.normal(size=dim - k) + 1j * rng.normal(size=dim - k), k)
        b = q @ (t + t.conj().T) @ q.conj().T
    h = alg.from_dense(q @ np.diag(lam) @ q.conj().T).hermitian_part()
    u0 = alg.from_dense(q @ np.diag(phases) @ q.conj().T)
    u = _tune(u0, h, alg.from_dense(b).hermitian_part(), target)
    u = Element(alg, u.blocks)
    return Instance(u, h, family, dim, seed, target)
