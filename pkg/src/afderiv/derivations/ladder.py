"""Hamiltonian ladders ``H_n`` over a chain of fibered embeddings.

Levels are numbered from 1. Block and slot indices are 0-based, so the
increment written ``h_{n,11}`` elsewhere is ``increment(n, 0, 0)`` here.
``H_n = H_{n-1} + sum_{i,j} h_{n,ij}``, where ``H_{n-1}`` is carried to
level ``n`` as a constant (``chi(i,j)`` diagonal copies per summand) and each
``h_{n,ij}`` is a diagonal matrix in the multiplicity slots of summand
``(i, j)``, i.e. a scalar on each slot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..fibered import (
    CIRCLE, INTERVAL, EmbeddingSpec, FiberedElement, FiberSpace, canonical_x, canonical_z,
    embed, embed_constant, slot_element,
)
from ..linalg_core import AlgebraMismatch, BlockAlgebra, Element

CONSISTENCY_TOL = 1e-12


class LadderError(ValueError):
    pass


def default_windows(levels: int) -> tuple[float, ...]:
    """``eps_m = 3/5 * 2^{-(m-1)}``."""
    return tuple(0.6 * 2.0 ** -(m - 1) for m in range(1, levels + 1))


def check_windows(windows: Sequence[float]):
    w = list(windows)
    if not w:
        raise LadderError("empty window sequence")
    if w[0] > 0.6 + 1e-15:
        raise LadderError(f"eps_1 = {w[0]} exceeds 3/5")
    if any(x <= 0 for x in w):
        raise LadderError("windows must be positive")
    if any(b >= a for a, b in zip(w, w[1:])):
        raise LadderError("windows must be strictly decreasing")


@dataclass(frozen=True)
class CornerProjections:
    """``P``: unit of the first block. ``Q``: slot 0 of summand (0, 0) inside it."""

    P: Element
    Q: Element

    def __post_init__(self):
        for name, e in (("P", self.P), ("Q", self.Q)):
            if not e.is_projection():
                raise LadderError(f"{name} is not a projection")
        if (self.P @ self.Q - self.Q).norm() > 1e-12:
            raise LadderError("Q is not below P")


@dataclass(frozen=True, eq=False)
class HamiltonianLadder:
    kind: str
    space: FiberSpace
    specs: tuple[EmbeddingSpec, ...]
    algebras: tuple[BlockAlgebra, ...]
    hamiltonians: tuple[Element, ...]
    #: ``increments[n-1][(i, j)]`` holds the slot values of ``h_{n,ij}``; empty at level 1
    increments: tuple[Mapping[tuple[int, int], tuple[float, ...]], ...]
    gap_coefficients: tuple[float | None, ...]
    windows: tuple[float, ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.algebras)
        if n == 0:
            raise LadderError("a ladder needs at least one level")
        if len(self.specs) != n - 1 or len(self.hamiltonians) != n or len(self.increments) != n:
            raise LadderError("levels, specs and increments disagree in length")
        for spec in self.specs:
            if spec.kind != self.kind:
                raise LadderError(f"{spec.kind} spec in a {self.kind} ladder")
        if self.space.kind != self.kind:
            raise LadderError("fiber space kind does not match the ladder")
        for k, spec in enumerate(self.specs):
            spec.check_target(self.algebras[k], self.algebras[k + 1])
        if self.windows is not None:
            check_windows(self.windows)
            if len(self.windows) < n:
                raise LadderError("one window per level is required")
        err = self.consistency_error()
        if err > CONSISTENCY_TOL * max(1.0, max(h.norm() for h in self.hamiltonians)):
            raise LadderError(f"H_n != H_(n-1) + sum h_(n,ij): error {err:.3e}")

    @property
    def levels(self) -> int:
        return len(self.algebras)

    def _lvl(self, n: int) -> int:
        if not 1 <= n <= self.levels:
            raise LadderError(f"level {n} outside 1..{self.levels}")
        return n - 1

    def algebra(self, n: int) -> BlockAlgebra:
        return self.algebras[self._lvl(n)]

    def H(self, n: int) -> Element:
        return self.hamiltonians[self._lvl(n)]

    def xi(self, n: int) -> int:
        """Matrix size of the first block of level ``n``."""
        return self.algebra(n).block_dims[0]

    def epsilon(self, m: int) -> float:
        if self.windows is None:
            raise LadderError("this ladder has no window sequence")
        return self.windows[self._lvl(m)]

    def gap_coefficient(self, n: int) -> float | None:
        return self.gap_coefficients[self._lvl(n)]

    def increment(self, n: int, i: int, j: int) -> Element:
        """``h_{n,ij}`` as an element of level ``n`` (zero if absent)."""
        k = self._lvl(n)
        if k == 0:
            raise LadderError("level 1 has no increments")
        vals = self.increments[k].get((i, j))
        src = self.algebras[k - 1]
        spec = self.specs[k - 1]
        if vals is None:
            return self.algebras[k].zeros()
        return slot_element(src, spec, {(i, j): vals})

    def lift_constant(self, c: Element, frm: int, to: int) -> Element:
        if c.algebra != self.algebra(frm):
            raise AlgebraMismatch("element does not live at the source level")
        for k in range(self._lvl(frm), self._lvl(to)):
            c = embed_constant(c, self.specs[k], self.algebras[k + 1])
        return c

    def lift(self, x: FiberedElement, frm: int, to: int) -> FiberedElement:
        if x.algebra != self.algebra(frm):
            raise AlgebraMismatch("element does not live at the source level")
        for k in range(self._lvl(frm), self._lvl(to)):
            x = embed(x, self.specs[k], self.algebras[k + 1])
        return x

    def canonical(self, n: int, at: int | None = None) -> FiberedElement:
        """``x_n`` (interval) or ``z_n`` (circle), carried to level ``at``."""
        at = n if at is None else at
        key = ("canonical", n, at)
        if key not in self._cache:
            make = canonical_x if self.kind == INTERVAL else canonical_z
            self._cache[key] = self.lift(make(self.space, self.algebra(n)), n, at)
        return self._cache[key]

    def corners(self, n: int) -> CornerProjections:
        k = self._lvl(n)
        if k == 0:
            raise LadderError("corner projections start at level 2")
        alg = self.algebras[k]
        p_blocks = [np.eye(d) if i == 0 else np.zeros((d, d)) for i, d in enumerate(alg.block_dims)]
        q = slot_element(self.algebras[k - 1], self.specs[k - 1],
                         {(0, 0): [1.0] + [0.0] * (self.specs[k - 1].chi(0, 0) - 1)})
        return CornerProjections(Element(alg, tuple(p_blocks)), q)

    def consistency_error(self) -> float:
        worst = 0.0
        for n in range(2, self.levels + 1):
            total = self.lift_constant(self.H(n - 1), n - 1, n)
            for (i, j) in self.increments[n - 1]:
                total = total + self.increment(n, i, j)
            worst = max(worst, (total - self.H(n)).norm())
        return worst


def delta(ladder: HamiltonianLadder, level: int, x: FiberedElement) -> FiberedElement:
    """``delta(x) = i [H_n, x]`` fiberwise, so that ``delta(x*) = delta(x)*``."""
    h = ladder.H(level)
    if x.algebra != h.algebra:
        raise AlgebraMismatch(f"element lives in {x.algebra.block_dims}, level {level} is "
                              f"{h.algebra.block_dims}")
    return 1j * (h @ x - x @ h)


def delta_norm(ladder: HamiltonianLadder, level: int, x: FiberedElement) -> float:
    return float(np.max(delta(ladder, level, x).fiber_norms()))


def gap_coefficient(h_norm: float, side_norms: Sequence[float], xi: int,
                    eps_m: float, eps_next: float) -> float:
    """``(1 + 2||H_m|| + sum_j ||h_{m+1,1j}||) * 4 xi / (eps_m - eps_{m+1}) + 1``."""
    width = eps_m - eps_next
    if not width > 0:
        raise LadderError(f"degenerate window eps_m - eps_(m+1) = {width}")
    return (1.0 + 2.0 * h_norm + float(sum(side_norms))) * 4.0 * xi / width + 1.0


def choose_gap_coefficient(ladder: HamiltonianLadder, m: int) -> float:
    """``a_{m+1}`` forcing ``||Q h (1-Q)|| < (eps_m - eps_{m+1}) / (4 xi_{m+1})`` when ``||delta(h)|| <= 1``."""
    if m + 1 > ladder.levels:
        raise LadderError(f"level {m + 1} is not populated")
    chi_row = ladder.specs[m - 1].n_source
    side = [ladder.increment(m + 1, 0, j).norm() for j in range(1, chi_row)]
    return gap_coefficient(ladder.H(m).norm(), side, ladder.xi(m + 1),
                           ladder.epsilon(m), ladder.epsilon(m + 1))


def build_interval_ladder(specs: Sequence[EmbeddingSpec], base: BlockAlgebra, *,
                          H1: Element | None = None,
                          windows: Sequence[float] | None = None,
                          side_scale: float = 0.5,
                          gap_overrides: Mapping[int, float] | None = None,
                          space: FiberSpace | None = None,
                          seed: int = 0) -> HamiltonianLadder:
    """Ladder whose ``h_{n,11} = a_n + 0 + ... + 0`` uses the chosen gap coefficients.

    All other increments are fixed beforehand as seeded random diagonal
    slot values in ``[-side_scale, side_scale]``. ``gap_overrides`` replaces
    ``a_n`` at the given levels (used for negative controls).
    """
    specs = tuple(specs)
    levels = len(specs) + 1
    windows = tuple(windows) if windows is not None else default_windows(levels)
    check_windows(windows)
    if len(windows) < levels:
        raise LadderError("one window per level is required")
    space = space or FiberSpace.interval()
    overrides = dict(gap_overrides or {})
    rng = np.random.default_rng(seed)
    algebras = [base]
    for spec in specs:
        if spec.kind != INTERVAL:
            raise LadderError("interval ladders need interval specs")
        algebras.append(spec.target_algebra(algebras[-1]))
    hs = [H1 if H1 is not None else base.zeros()]
    if hs[0].algebra != base or not hs[0].is_self_adjoint():
        raise LadderError("H_1 must be a self-adjoint element of the base algebra")
    incs: list[dict] = [{}]
    gaps: list[float | None] = [None]
    for k, spec in enumerate(specs):
        level = k + 2
        inc = {}
        for i in range(spec.n_target):
            for j in range(spec.n_source):
                if (i, j) != (0, 0):
                    inc[(i, j)] = tuple(rng.uniform(-side_scale, side_scale, spec.chi(i, j)))
        side = [slot_element(algebras[k], spec, {(0, j): inc[(0, j)]}).norm()
                for j in range(1, spec.n_source)]
        a = overrides.get(level, gap_coefficient(hs[-1].norm(), side, algebras[k + 1].block_dims[0],
                                                  windows[k], windows[k + 1]))
        if not a > 0:
            raise LadderError(f"gap coefficient at level {level} must be positive")
        inc[(0, 0)] = (float(a),) + (0.0,) * (spec.chi(0, 0) - 1)
        h = embed_constant(hs[-1], spec, algebras[k + 1])
        for key, vals in inc.items():
            h = h + slot_element(algebras[k], spec, {key: vals})
        hs.append(h.hermitian_part())
        incs.append(inc)
        gaps.append(float(a))
    return HamiltonianLadder(INTERVAL, space, specs, tuple(algebras), tuple(hs), tuple(incs),
                             tuple(gaps), windows[:levels])


def _pair_ladder(specs: Sequence[EmbeddingSpec], base: BlockAlgebra, scales: Sequence[float],
                 space: FiberSpace | None) -> HamiltonianLadder:
    specs = tuple(specs)
    if not specs:
        raise LadderError("empty level list")
    space = space or FiberSpace.circle()
    algebras = [base]
    for spec in specs:
        if spec.kind != CIRCLE:
            raise LadderError("periodic ladders need circle specs")
        algebras.append(spec.target_algebra(algebras[-1]))
    hs = [base.zeros()]
    incs: list[dict] = [{}]
    for k, spec in enumerate(specs):
        a = float(scales[k])
        inc = {(i, j): (a, a, -a, -a) + (0.0,) * (spec.chi(i, j) - 4)
               for i in range(spec.n_target) for j in range(spec.n_source)}
        h = embed_constant(hs[-1], spec, algebras[k + 1])
        for key, vals in inc.items():
            h = h + slot_element(algebras[k], spec, {key: vals})
        hs.append(h.hermitian_part())
        incs.append(inc)
    return HamiltonianLadder(CIRCLE, space, specs, tuple(algebras), tuple(hs), tuple(incs),
                             (None,) + tuple(float(s) for s in scales[:len(specs)]))
