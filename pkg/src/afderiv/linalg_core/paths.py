"""Piecewise-geodesic unitary paths and the projection-swapping geodesic."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .algebra import CERT_TOL, Element
from .spectral import range_basis, rank


class ProjectionMismatch(ValueError):
    """Projections of different rank, or not contained in the corner."""


@dataclass(frozen=True, eq=False)
class Segment:
    """``s -> exp(s G) base`` for ``s`` in ``[0, 1]`` with ``G`` skew-adjoint.

    Its length is ``||G||``.
    """

    base: Element
    generator: Element
    label: str = ""
    _eig: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.base._check(self.generator)
        eig = []
        for g in self.generator.blocks:
            # G = i A with A self-adjoint
            a = -1j * g
            w, v = np.linalg.eigh((a + a.conj().T) / 2)
            eig.append((w, v))
        object.__setattr__(self, "_eig", tuple(eig))

    @property
    def length(self) -> float:
        return max((float(np.max(np.abs(w))) if w.size else 0.0) for w, _ in self._eig)

    def at(self, s: float) -> Element:
        blocks = []
        for (w, v), b in zip(self._eig, self.base.blocks):
            blocks.append(((v * np.exp(1j * s * w)) @ v.conj().T) @ b)
        return Element(self.base.algebra, tuple(blocks))

    @property
    def end(self) -> Element:
        return self.at(1.0)

    def sample_blocks(self, s: np.ndarray) -> list[np.ndarray]:
        """Path values at every ``s``, as one ``(len(s), d, d)`` array per block."""
        s = np.asarray(s, dtype=float)
        out = []
        for (w, v), b in zip(self._eig, self.base.blocks):
            phase = np.exp(1j * s[:, None] * w[None, :])
            vb = v.conj().T @ b
            out.append((v[None, :, :] * phase[:, None, :]) @ vb)
        return out

    def reversed(self) -> "Segment":
        return Segment(self.end, -self.generator, self.label)


@dataclass(frozen=True, eq=False)
class UnitaryPath:
    """Concatenation of geodesic segments.

    ``anchor`` is the start point, needed to describe the empty (constant)
    path. The global parameter ``t`` in ``[0, 1]`` is split evenly between
    segments.
    """

    anchor: Element
    segments: tuple[Segment, ...] = ()

    @property
    def start(self) -> Element:
        return self.segments[0].base if self.segments else self.anchor

    @property
    def end(self) -> Element:
        return self.segments[-1].end if self.segments else self.anchor

    @property
    def length(self) -> float:
        return float(sum(s.length for s in self.segments))

    @property
    def segment_lengths(self) -> list[float]:
        return [s.length for s in self.segments]

    def at(self, t: float) -> Element:
        if not self.segments:
            return self.anchor
        n = len(self.segments)
        t = min(max(t, 0.0), 1.0)
        k = min(int(t * n), n - 1)
        return self.segments[k].at(t * n - k)

    def __iter__(self) -> Iterator[Segment]:
        return iter(self.segments)

    def then(self, other: "UnitaryPath") -> "UnitaryPath":
        return UnitaryPath(self.anchor, self.segments + other.segments)

    def reversed(self) -> "UnitaryPath":
        return UnitaryPath(self.end, tuple(s.reversed() for s in reversed(self.segments)))

    def joint_errors(self) -> list[float]:
        """Mismatch between the end of each segment and the start of the next."""
        return [(a.end - b.base).norm() for a, b in zip(self.segments, self.segments[1:])]

    def drop_trivial(self, tol: float = 0.0) -> "UnitaryPath":
        keep = tuple(s for s in self.segments if s.length > tol)
        return UnitaryPath(self.anchor, keep)


def rotation_generator(p: Element, q: Element, corner: Element,
                       tol: float = CERT_TOL) -> Element:
    """Skew-adjoint ``G`` with ``e^G q e^{-G} = p``, supported in ``corner``.

    Uses the principal angles between the ranges of ``p`` and ``q``: each pair
    of principal vectors ``b_i -> a_i`` is rotated in its own plane through its
    angle ``theta_i <= pi/2``. The planes are mutually orthogonal, so ``G`` is
    the direct rotation and ``||G|| = max theta_i``.
    """
    for name, e in (("p", p), ("q", q), ("corner", corner)):
        if not e.is_projection(tol):
            raise ProjectionMismatch(f"{name} is not a projection")
    if rank(p) != rank(q):
        raise ProjectionMismatch(f"rank {rank(p)} != rank {rank(q)}")
    for name, e in (("p", p), ("q", q)):
        if (corner @ e - e).norm() > 10 * tol:
            raise ProjectionMismatch(f"{name} is not below the corner")
    blocks = []
    for pb, qb in zip(p.blocks, q.blocks):
        n = pb.shape[0]
        g = np.zeros((n, n), dtype=complex)
        A = range_basis(pb)
        B = range_basis(qb)
        if A.shape[1] != B.shape[1]:
            raise ProjectionMismatch("blockwise ranks differ")
        if A.shape[1]:
            u, cos, vh = np.linalg.svd(A.conj().T @ B)
            a = A @ u
            b = B @ vh.conj().T
            for i in range(a.shape[1]):
                ai, bi = a[:, i], b[:, i]
                c = np.vdot(ai, bi).real
                perp = bi - c * ai
                s = np.linalg.norm(perp)
                theta = np.arctan2(s, c)
                if s < 1e-14:
                    continue
                ci = perp / s
                g += theta * (np.outer(ai, ci.conj()) - np.outer(ci, ai.conj()))
        blocks.append(g)
    return Element(p.algebra, tuple(blocks))


def connect_projections(p: Element, q: Element, corner: Element,
                        tol: float = CERT_TOL) -> UnitaryPath:
    """Geodesic ``w_t`` from 1 with ``w_1 q w_1* = p``, acting trivially off ``corner``.

    The length is the largest principal angle between the ranges, at most
    ``pi/2``.
    """
    g = rotation_generator(p, q, corner, tol)
    one = p.algebra.identity()
    if g.norm() == 0.0:
        return UnitaryPath(one)
    return UnitaryPath(one, (Segment(one, g, "swap"),))
