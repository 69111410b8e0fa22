"""Grid-sampled elements of ``A (x) C[0,1]`` and ``A (x) C(T)``.

A :class:`FiberedElement` holds one ``(N, d, d)`` array per block of its
algebra, the fiber at each grid point. Interval elements are evaluated off-grid
by piecewise-linear interpolation; circle elements (uniform grid from angle 0)
by trigonometric interpolation, which is exact for trigonometric polynomials
of degree below ``N/2``.

JSON container layout (``format = "afderiv/fibered-element"``, ``version = 1``)::

    {"format": ..., "version": 1,
     "space": {"kind": "interval" | "circle", "grid": [t_0, ..., t_{N-1}]},
     "block_dims": [d_1, ..., d_k],
     "blocks": [{"real": [...], "imag": [...]}, ...]}

Each block's ``real`` / ``imag`` lists are the row-major flattening of the
``(N, d, d)`` sample array.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .linalg_core import AlgebraMismatch, BlockAlgebra, CERT_TOL, Element, NotSelfAdjoint

FORMAT = "afderiv/fibered-element"
FORMAT_VERSION = 1

INTERVAL = "interval"
CIRCLE = "circle"


class EmbeddingError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FiberSpace:
    """Sample points of ``[0, 1]`` or of the circle (angles in ``[0, 2 pi)``).

    Circle grids must be uniform and start at angle 0 so that the endpoint
    ``2 pi`` is identified with the first sample instead of duplicated.
    """

    kind: str
    grid: np.ndarray

    def __post_init__(self):
        g = np.array(self.grid, dtype=float)
        g.setflags(write=False)
        object.__setattr__(self, "grid", g)
        if self.kind not in (INTERVAL, CIRCLE):
            raise ValueError(f"unknown fiber space kind {self.kind!r}")
        if g.ndim != 1 or g.size < 2:
            raise ValueError("grid needs at least two points")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if self.kind == INTERVAL:
            if g[0] < 0 or g[-1] > 1:
                raise ValueError("interval grid must lie in [0, 1]")
        else:
            n = g.size
            if n < 3:
                raise ValueError("circle grid needs at least three points")
            if not np.allclose(g, 2 * np.pi * np.arange(n) / n, atol=1e-12):
                raise ValueError("circle grid must be uniform angles 2 pi k / N")

    @classmethod
    def interval(cls, n: int = 129) -> "FiberSpace":
        return cls(INTERVAL, np.linspace(0.0, 1.0, n))

    @classmethod
    def circle(cls, n: int = 128) -> "FiberSpace":
        return cls(CIRCLE, 2 * np.pi * np.arange(n) / n)

    @property
    def n(self) -> int:
        return self.grid.size

    @property
    def spacing(self) -> float:
        return float(np.max(np.diff(self.grid))) if self.kind == INTERVAL else 2 * np.pi / self.n

    def same_as(self, other: "FiberSpace") -> bool:
        return self.kind == other.kind and self.grid.shape == other.grid.shape and \
            np.array_equal(self.grid, other.grid)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "grid": self.grid.tolist()}


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiberedElement:
    space: FiberSpace
    algebra: BlockAlgebra
    data: tuple[np.ndarray, ...]
    flags: frozenset = field(default=frozenset())

    def __post_init__(self):
        if len(self.data) != self.algebra.n_blocks:
            raise AlgebraMismatch("one sample array per block is required")
        data = []
        for d, arr in zip(self.algebra.block_dims, self.data):
            arr = _freeze(arr)
            if arr.shape != (self.space.n, d, d):
                raise AlgebraMismatch(f"samples of shape {arr.shape}, expected {(self.space.n, d, d)}")
            data.append(arr)
        object.__setattr__(self, "data", tuple(data))
        object.__setattr__(self, "flags", frozenset(self.flags))

    # construction

    @classmethod
    def constant(cls, space: FiberSpace, c: Element) -> "FiberedElement":
        return cls(space, c.algebra, tuple(np.broadcast_to(b, (space.n,) + b.shape) for b in c.blocks),
                   c.flags)

    @classmethod
    def from_samples(cls, space: FiberSpace, samples: Sequence[Element]) -> "FiberedElement":
        if len(samples) != space.n:
            raise AlgebraMismatch(f"{len(samples)} samples for a grid of {space.n}")
        alg = samples[0].algebra
        for s in samples:
            if s.algebra != alg:
                raise AlgebraMismatch("sample algebras differ")
        return cls(space, alg, tuple(np.stack([s.blocks[k] for s in samples])
                                     for k in range(alg.n_blocks)))

    @classmethod
    def from_function(cls, space: FiberSpace, algebra: BlockAlgebra, fn) -> "FiberedElement":
        """``fn(param) -> Element`` evaluated at every grid point."""
        return cls.from_samples(space, [fn(t) for t in space.grid])

    # access

    def sample(self, i: int) -> Element:
        return Element(self.algebra, tuple(arr[i] for arr in self.data))

    @property
    def samples(self) -> list[Element]:
        return [self.sample(i) for i in range(self.space.n)]

    def block(self, k: int) -> "FiberedElement":
        """The ``k``-th block as an element over the single-block algebra."""
        return FiberedElement(self.space, BlockAlgebra((self.algebra.block_dims[k],)), (self.data[k],))

    # arithmetic (fiberwise)

    def _check(self, other: "FiberedElement"):
        if not isinstance(other, FiberedElement):
            raise TypeError(f"expected FiberedElement, got {type(other).__name__}")
        if other.algebra != self.algebra or not self.space.same_as(other.space):
            raise AlgebraMismatch("fibered elements over different spaces or algebras")

    def _zip(self, other, fn) -> "FiberedElement":
        self._check(other)
        return FiberedElement(self.space, self.algebra, tuple(fn(a, b) for a, b in zip(self.data, other.data)))

    def _map(self, fn) -> "FiberedElement":
        return FiberedElement(self.space, self.algebra, tuple(fn(a) for a in self.data))

    def __add__(self, other):
        if isinstance(other, Element):
            other = FiberedElement.constant(self.space, other)
        return self._zip(other, np.add)

    def __sub__(self, other):
        if isinstance(other, Element):
            other = FiberedElement.constant(self.space, other)
        return self._zip(other, np.subtract)

    def __neg__(self):
        return self._map(np.negative)

    def __mul__(self, c):
        return self._map(lambda a: c * a)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Element):
            if other.algebra != self.algebra:
                raise AlgebraMismatch("constant factor from another algebra")
            return self._map_blocks(lambda a, c: a @ c, other)
        return self._zip(other, np.matmul)

    def __rmatmul__(self, other):
        if isinstance(other, Element):
            if other.algebra != self.algebra:
                raise AlgebraMismatch("constant factor from another algebra")
            return self._map_blocks(lambda a, c: c @ a, other)
        return NotImplemented

    def _map_blocks(self, fn, c: Element) -> "FiberedElement":
        return FiberedElement(self.space, self.algebra, tuple(fn(a, b) for a, b in zip(self.data, c.blocks)))

    def adjoint(self) -> "FiberedElement":
        return FiberedElement(self.space, self.algebra,
                              tuple(np.conj(np.swapaxes(a, 1, 2)) for a in self.data), self.flags)

    @property
    def H(self) -> "FiberedElement":
        return self.adjoint()

    def fiber_norms(self) -> np.ndarray:
        """Operator norm of each fiber."""
        out = np.zeros(self.space.n)
        for a in self.data:
            if a.shape[1]:
                out = np.maximum(out, np.linalg.norm(a, ord=2, axis=(1, 2)))
        return out

    def defects(self) -> dict[str, float]:
        sa = un = 0.0
        for a in self.data:
            ah = np.conj(np.swapaxes(a, 1, 2))
            eye = np.eye(a.shape[1])
            sa = max(sa, float(np.max(np.linalg.norm(a - ah, ord=2, axis=(1, 2)))))
            un = max(un, float(np.max(np.linalg.norm(ah @ a - eye, ord=2, axis=(1, 2)))),
                     float(np.max(np.linalg.norm(a @ ah - eye, ord=2, axis=(1, 2)))))
        return {"self_adjoint": sa, "unitary": un}

    def certified(self, *flags: str, tol: float = CERT_TOL) -> "FiberedElement":
        d = self.defects()
        for flag in flags:
            if flag not in d:
                raise ValueError(f"unsupported fiberwise flag {flag!r}")
            if d[flag] > tol:
                raise ValueError(f"{flag} defect {d[flag]:.3e} exceeds {tol:.1e}")
        return FiberedElement(self.space, self.algebra, self.data, self.flags | set(flags))

    # evaluation between grid points

    def evaluate(self, params: np.ndarray) -> tuple[np.ndarray, ...]:
        """Fibers at arbitrary parameters, one ``(len(params), d, d)`` array per block."""
        params = np.asarray(params, dtype=float)
        if self.space.kind == INTERVAL:
            return tuple(_interp_linear(self.space.grid, a, params) for a in self.data)
        return tuple(_interp_trig(a, params) for a in self.data)

    def lipschitz_constant(self) -> float:
        """Largest difference quotient between neighbouring samples."""
        g = self.space.grid
        if self.space.kind == INTERVAL:
            steps = np.diff(g)
            best = 0.0
            for a in self.data:
                diffs = np.linalg.norm(np.diff(a, axis=0), ord=2, axis=(1, 2))
                best = max(best, float(np.max(diffs / steps)))
            return best
        best = 0.0
        for a in self.data:
            nxt = np.roll(a, -1, axis=0)
            diffs = np.linalg.norm(nxt - a, ord=2, axis=(1, 2))
            best = max(best, float(np.max(diffs)) / self.space.spacing)
        return best

    # serialisation

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "space": self.space.to_dict(),
            "block_dims": list(self.algebra.block_dims),
            "blocks": [{"real": a.real.ravel().tolist(), "imag": a.imag.ravel().tolist()}
                       for a in self.data],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FiberedElement":
        if d.get("format") != FORMAT:
            raise ValueError(f"not a fibered element container: {d.get('format')!r}")
        if d.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported container version {d.get('version')}")
        space = FiberSpace(d["space"]["kind"], np.asarray(d["space"]["grid"], dtype=float))
        alg = BlockAlgebra(tuple(d["block_dims"]))
        data = []
        for dim, blk in zip(alg.block_dims, d["blocks"]):
            arr = np.asarray(blk["real"]) + 1j * np.asarray(blk["imag"])
            data.append(arr.reshape(space.n, dim, dim))
        return cls(space, alg, tuple(data))

    def dump(self, path: str | Path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: str | Path) -> "FiberedElement":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _interp_linear(grid: np.ndarray, arr: np.ndarray, s: np.ndarray) -> np.ndarray:
    if np.any(s < grid[0] - 1e-12) or np.any(s > grid[-1] + 1e-12):
        raise ValueError("evaluation point outside the sampled interval")
    idx = np.clip(np.searchsorted(grid, s, side="right") - 1, 0, grid.size - 2)
    w = (s - grid[idx]) / (grid[idx + 1] - grid[idx])
    w = np.clip(w, 0.0, 1.0)[:, None, None]
    return (1 - w) * arr[idx] + w * arr[idx + 1]


def _interp_trig(arr: np.ndarray, phi: np.ndarray) -> np.ndarray:
    n = arr.shape[0]
    coef = np.fft.fft(arr, axis=0) / n
    k = np.fft.fftfreq(n, d=1.0 / n)
    basis = np.exp(1j * phi[:, None] * k[None, :])
    if n % 2 == 0:
        # split the Nyquist mode symmetrically so real-valued data stays real
        basis[:, n // 2] = np.cos(n / 2 * phi)
    return np.einsum("mk,kij->mij", basis, coef)


# canonical elements

def canonical_x(space: FiberSpace, algebra: BlockAlgebra) -> FiberedElement:
    """``t -> t 1``, the identity function on ``[0, 1]``."""
    if space.kind != INTERVAL:
        raise EmbeddingError("canonical_x lives on the interval")
    data = tuple(space.grid[:, None, None] * np.eye(d)[None] for d in algebra.block_dims)
    return FiberedElement(space, algebra, data, frozenset({"self_adjoint"}))


def canonical_z(space: FiberSpace, algebra: BlockAlgebra) -> FiberedElement:
    """``theta -> e^{i theta} 1``, the canonical unitary of ``C(T)``."""
    if space.kind != CIRCLE:
        raise EmbeddingError("canonical_z lives on the circle")
    data = tuple(np.exp(1j * space.grid)[:, None, None] * np.eye(d)[None] for d in algebra.block_dims)
    return FiberedElement(space, algebra, data, frozenset({"unitary"}))


# embeddings

@dataclass(frozen=True)
class EmbeddingSpec:
    """Multiplicity matrix ``chi[i][j]`` (target block ``i``, source block ``j``)."""

    multiplicities: tuple[tuple[int, ...], ...]
    kind: str = INTERVAL

    def __post_init__(self):
        chi = tuple(tuple(int(c) for c in row) for row in self.multiplicities)
        object.__setattr__(self, "multiplicities", chi)
        if not chi or not chi[0]:
            raise EmbeddingError("empty multiplicity matrix")
        if len({len(r) for r in chi}) != 1:
            raise EmbeddingError("ragged multiplicity matrix")
        if self.kind not in (INTERVAL, CIRCLE):
            raise EmbeddingError(f"unknown embedding kind {self.kind!r}")
        floor = 3 if self.kind == INTERVAL else 4
        low = min(min(r) for r in chi)
        if low < floor:
            raise EmbeddingError(f"{self.kind} embeddings need every multiplicity >= {floor}, got {low}")

    @property
    def n_target(self) -> int:
        return len(self.multiplicities)

    @property
    def n_source(self) -> int:
        return len(self.multiplicities[0])

    def chi(self, i: int, j: int) -> int:
        return self.multiplicities[i][j]

    def target_algebra(self, source: BlockAlgebra) -> BlockAlgebra:
        if source.n_blocks != self.n_source:
            raise EmbeddingError(f"source has {source.n_blocks} blocks, spec expects {self.n_source}")
        return BlockAlgebra(tuple(
            sum(c * d for c, d in zip(row, source.block_dims)) for row in self.multiplicities))

    def check_target(self, source: BlockAlgebra, target: BlockAlgebra | None) -> BlockAlgebra:
        expected = self.target_algebra(source)
        if target is not None and target != expected:
            raise EmbeddingError(f"target block dims {target.block_dims} do not match "
                                 f"sum_j chi(i,j) dim_j = {expected.block_dims}")
        return expected

    def slot_offset(self, source: BlockAlgebra, i: int, j: int) -> int:
        """Row offset of the ``(i, j)`` summand inside target block ``i``."""
        return sum(self.multiplicities[i][jj] * source.block_dims[jj] for jj in range(j))

    def slot_slice(self, source: BlockAlgebra, i: int, j: int, s: int) -> slice:
        """Rows of slot ``s`` of the ``(i, j)`` summand inside target block ``i``."""
        if not 0 <= s < self.multiplicities[i][j]:
            raise IndexError(f"slot {s} outside 0..{self.multiplicities[i][j] - 1}")
        d = source.block_dims[j]
        start = self.slot_offset(source, i, j) + s * d
        return slice(start, start + d)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "multiplicities": [list(r) for r in self.multiplicities]}


def embed_constant(c: Element, spec: EmbeddingSpec, target: BlockAlgebra | None = None) -> Element:
    """Image of a constant ``c (x) 1``: ``chi(i, j)`` diagonal copies of ``c_j``.

    This agrees with both the interval and the circle embedding on constants.
    """
    tgt = spec.check_target(c.algebra, target)
    blocks = []
    for i, dim in enumerate(tgt.block_dims):
        m = np.zeros((dim, dim), dtype=complex)
        for j, cj in enumerate(c.blocks):
            for s in range(spec.chi(i, j)):
                sl = spec.slot_slice(c.algebra, i, j, s)
                m[sl, sl] = cj
        blocks.append(m)
    return Element(tgt, tuple(blocks), c.flags)


def slot_element(source: BlockAlgebra, spec: EmbeddingSpec,
                 values: dict[tuple[int, int], Sequence[float]]) -> Element:
    """Element of ``1 (x) M_chi(i,j) (x) 1`` given by diagonal slot values.

    ``values[(i, j)][s]`` multiplies the identity of slot ``s`` of the
    ``(i, j)`` summand; unspecified summands are zero.
    """
    tgt = spec.target_algebra(source)
    blocks = [np.zeros((d, d), dtype=complex) for d in tgt.block_dims]
    for (i, j), vals in values.items():
        vals = np.asarray(vals, dtype=float)
        if vals.shape != (spec.chi(i, j),):
            raise EmbeddingError(f"summand ({i},{j}) needs {spec.chi(i, j)} slot values")
        for s, v in enumerate(vals):
            sl = spec.slot_slice(source, i, j, s)
            blocks[i][sl, sl] += v * np.eye(source.block_dims[j])
    return Element(tgt, tuple(blocks))


def embed_interval(x: FiberedElement, spec: EmbeddingSpec,
                   target: BlockAlgebra | None = None) -> FiberedElement:
    """``x(t) + sum_{l=0}^{chi-2} x((t + l)/(chi - 1))`` per summand, block diagonal."""
    if x.space.kind != INTERVAL or spec.kind != INTERVAL:
        raise EmbeddingError("interval embedding needs interval data and an interval spec")
    tgt = spec.check_target(x.algebra, target)
    t = x.space.grid
    n = x.space.n
    out = [np.zeros((n, d, d), dtype=complex) for d in tgt.block_dims]
    for j, arr in enumerate(x.data):
        cache: dict[int, np.ndarray] = {}
        for i in range(tgt.n_blocks):
            chi = spec.chi(i, j)
            if chi not in cache:
                params = ((t[None, :] + np.arange(chi - 1)[:, None]) / (chi - 1)).ravel()
                cache[chi] = _interp_linear(t, arr, params).reshape(chi - 1, n, *arr.shape[1:])
            shifted = cache[chi]
            sl = spec.slot_slice(x.algebra, i, j, 0)
            out[i][:, sl, sl] = arr
            for ell in range(chi - 1):
                sl = spec.slot_slice(x.algebra, i, j, ell + 1)
                out[i][:, sl, sl] = shifted[ell]
    return FiberedElement(x.space, tgt, tuple(out), x.flags)


def _companion(arr: np.ndarray, theta: np.ndarray, sign: int) -> np.ndarray:
    """``x`` evaluated on the unitary ``[[0, z^sign], [1, 0]]`` at every grid angle.

    The unitary has eigenvalues ``w = +-z^{sign/2}`` with eigenprojections
    ``P_w = [[1, w], [conj(w), 1]] / 2``; the result is
    ``sum_w P_w (x) x(w)`` laid out as a ``2 x 2`` array of ``d x d`` blocks.
    """
    n, d, _ = arr.shape
    half = sign * theta / 2
    res = np.zeros((n, 2 * d, 2 * d), dtype=complex)
    for shift in (0.0, np.pi):
        phi = np.mod(half + shift, 2 * np.pi)
        w = np.exp(1j * phi)
        xv = _interp_trig(arr, phi)
        res[:, :d, :d] += 0.5 * xv
        res[:, :d, d:] += 0.5 * w[:, None, None] * xv
        res[:, d:, :d] += 0.5 * np.conj(w)[:, None, None] * xv
        res[:, d:, d:] += 0.5 * xv
    return res


def embed_circle(x: FiberedElement, spec: EmbeddingSpec,
                 target: BlockAlgebra | None = None) -> FiberedElement:
    """Circle embedding: ``x([[0, z], [1, 0]]) + x([[0, conj z], [1, 0]]) + (chi - 4) x(1)``.

    The two companion unitaries occupy slots 0-1 and 2-3 of each summand and
    enter through functional calculus, so for ``x = z`` they are exactly the
    scalar-amplified companion matrices.
    """
    if x.space.kind != CIRCLE or spec.kind != CIRCLE:
        raise EmbeddingError("circle embedding needs circle data and a circle spec")
    tgt = spec.check_target(x.algebra, target)
    theta = x.space.grid
    n = x.space.n
    out = [np.zeros((n, d, d), dtype=complex) for d in tgt.block_dims]
    for j, arr in enumerate(x.data):
        d = arr.shape[1]
        up = _companion(arr, theta, +1)
        down = _companion(arr, theta, -1)
        at_one = _interp_trig(arr, np.zeros(1))[0]
        for i in range(tgt.n_blocks):
            chi = spec.chi(i, j)
            off = spec.slot_offset(x.algebra, i, j)
            out[i][:, off:off + 2 * d, off:off + 2 * d] = up
            out[i][:, off + 2 * d:off + 4 * d, off + 2 * d:off + 4 * d] = down
            for s in range(4, chi):
                sl = spec.slot_slice(x.algebra, i, j, s)
                out[i][:, sl, sl] = at_one
    return FiberedElement(x.space, tgt, tuple(out), x.flags)


def embed(x: FiberedElement, spec: EmbeddingSpec, target: BlockAlgebra | None = None) -> FiberedElement:
    return embed_interval(x, spec, target) if spec.kind == INTERVAL else embed_circle(x, spec, target)


def embed_chain(x: FiberedElement, specs: Sequence[EmbeddingSpec]) -> FiberedElement:
    for spec in specs:
        x = embed(x, spec)
    return x


def product_defect_bound(x: FiberedElement, y: FiberedElement) -> float:
    """Bound on ``||phi(xy) - phi(x) phi(y)||`` for the interval embedding.

    Between grid points the defect of linear interpolation is
    ``w(1-w)(x_a - x_b)(y_a - y_b)``, hence at most ``L_x L_y h^2 / 4``.
    """
    h = x.space.spacing
    return 0.25 * x.lipschitz_constant() * y.lipschitz_constant() * h * h


# spectrum and norms

@dataclass(frozen=True)
class SpectrumEstimate:
    measure: float
    intervals: list[tuple[float, float]]
    #: per block, the (min, max) range of each ascending eigenvalue branch
    branch_ranges: list[np.ndarray]
    eigenvalues: list[np.ndarray]


def _merge(intervals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(a, b) for a, b in merged]


def fiber_eigenvalues(h: FiberedElement, tol: float = CERT_TOL) -> list[np.ndarray]:
    """Ascending eigenvalues of every fiber, one ``(N, d)`` array per block."""
    out = []
    for a in h.data:
        ah = np.conj(np.swapaxes(a, 1, 2))
        defect = float(np.max(np.linalg.norm(a - ah, ord=2, axis=(1, 2)))) if a.shape[1] else 0.0
        if defect > tol:
            raise NotSelfAdjoint(f"fiber self-adjointness defect {defect:.3e}")
        out.append(np.linalg.eigvalsh((a + ah) / 2))
    return out


def spectrum_measure(h: FiberedElement, tol: float = CERT_TOL) -> SpectrumEstimate:
    """Lebesgue measure of the spectrum, estimated from ascending eigenvalue branches.

    Branch ``k`` is ``t -> lambda_k(t)``; the spectrum is estimated by the
    union over branches of ``[min_t lambda_k, max_t lambda_k]``.
    """
    eigs = fiber_eigenvalues(h, tol)
    ranges = []
    intervals = []
    for w in eigs:
        r = np.stack([w.min(axis=0), w.max(axis=0)], axis=1)
        ranges.append(r)
        intervals.extend((float(lo), float(hi)) for lo, hi in r)
    merged = _merge(intervals)
    return SpectrumEstimate(float(sum(b - a for a, b in merged)), merged, ranges, eigs)


def sup_norm(x: FiberedElement) -> float:
    """Largest fiber norm on the grid (a lower bound for the true sup)."""
    return float(np.max(x.fiber_norms()))
