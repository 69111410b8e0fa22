"""Finite-dimensional C*-algebras as direct sums of full matrix blocks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

#: tolerance used when certifying self-adjoint / unitary / projection flags
CERT_TOL = 1e-8

FLAGS = ("self_adjoint", "unitary", "projection")


class AlgebraMismatch(ValueError):
    """Two elements do not live in the same block algebra."""


class FlagError(ValueError):
    """A requested structural flag could not be certified."""


@dataclass(frozen=True)
class BlockAlgebra:
    """``M_{d_1} + ... + M_{d_k}``, stored as the ordered block dimensions."""

    block_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if not dims:
            raise ValueError("block algebra needs at least one block")
        if any(d < 1 for d in dims):
            raise ValueError(f"block dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "block_dims", dims)

    @property
    def n_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def dimension(self) -> int:
        """Vector-space dimension, the sum of squared block sizes."""
        return sum(d * d for d in self.block_dims)

    @property
    def size(self) -> int:
        """Size of the block-diagonal matrix realisation."""
        return sum(self.block_dims)

    def identity(self) -> "Element":
        return Element(self, tuple(np.eye(d, dtype=complex) for d in self.block_dims),
                       frozenset(FLAGS))

    def zeros(self) -> "Element":
        return Element(self, tuple(np.zeros((d, d), dtype=complex) for d in self.block_dims),
                       frozenset({"self_adjoint", "projection"}))

    def scalar(self, c: complex) -> "Element":
        return Element(self, tuple(c * np.eye(d, dtype=complex) for d in self.block_dims))

    def diag(self, values: Sequence[Sequence[complex]]) -> "Element":
        """Diagonal element from one list of diagonal entries per block."""
        if len(values) != self.n_blocks:
            raise AlgebraMismatch("one value list per block is required")
        blocks = []
        for d, vals in zip(self.block_dims, values):
            vals = np.asarray(vals, dtype=complex)
            if vals.shape != (d,):
                raise AlgebraMismatch(f"expected {d} diagonal entries, got {vals.shape}")
            blocks.append(np.diag(vals))
        return Element(self, tuple(blocks))

    def from_dense(self, matrix: np.ndarray) -> "Element":
        """Cut the diagonal blocks out of a ``size x size`` matrix."""
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (self.size, self.size):
            raise AlgebraMismatch(f"expected a {self.size}x{self.size} matrix")
        blocks, start = [], 0
        for d in self.block_dims:
            blocks.append(matrix[start:start + d, start:start + d].copy())
            start += d
        return Element(self, tuple(blocks))

    # random elements, used by tests, samplers and the CLI sweeps

    def random(self, rng: np.random.Generator) -> "Element":
        return Element(self, tuple(
            rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for d in self.block_dims))

    def random_self_adjoint(self, rng: np.random.Generator, scale: float = 1.0) -> "Element":
        blocks = []
        for d in self.block_dims:
            g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            blocks.append(scale * (g + g.conj().T) / 2)
        return Element(self, tuple(blocks), frozenset({"self_adjoint"}))

    def random_unitary(self, rng: np.random.Generator) -> "Element":
        blocks = []
        for d in self.block_dims:
            g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            q, r = np.linalg.qr(g)
            # Haar measure: fix the phases of R's diagonal
            ph = np.diag(r) / np.abs(np.diag(r))
            blocks.append(q * ph)
        return Element(self, tuple(blocks), frozenset({"unitary"}))


@dataclass(frozen=True, eq=False)
class Element:
    """An element of a :class:`BlockAlgebra`: one dense complex matrix per block.

    Instances are immutable; the block arrays are marked read-only. ``flags``
    records certified structure (``self_adjoint``, ``unitary``, ``projection``)
    and is only set through :meth:`certified` or by constructors that produce
    the structure exactly.
    """

    algebra: BlockAlgebra
    blocks: tuple[np.ndarray, ...]
    flags: frozenset = field(default=frozenset())

    def __post_init__(self):
        dims = self.algebra.block_dims
        if len(self.blocks) != len(dims):
            raise AlgebraMismatch(
                f"{len(self.blocks)} blocks supplied for an algebra with {len(dims)}")
        blocks = []
        for d, b in zip(dims, self.blocks):
            b = np.array(b, dtype=complex)
            if b.shape != (d, d):
                raise AlgebraMismatch(f"block of shape {b.shape} where ({d}, {d}) is required")
            b.setflags(write=False)
            blocks.append(b)
        object.__setattr__(self, "blocks", tuple(blocks))
        unknown = set(self.flags) - set(FLAGS)
        if unknown:
            raise ValueError(f"unknown flags {sorted(unknown)}")
        object.__setattr__(self, "flags", frozenset(self.flags))

    # arithmetic

    def _check(self, other: "Element"):
        if not isinstance(other, Element):
            raise TypeError(f"expected an Element, got {type(other).__name__}")
        if other.algebra != self.algebra:
            raise AlgebraMismatch(f"{self.algebra.block_dims} vs {other.algebra.block_dims}")

    def _map(self, fn) -> "Element":
        return Element(self.algebra, tuple(fn(b) for b in self.blocks))

    def __add__(self, other):
        if isinstance(other, Element):
            self._check(other)
            return Element(self.algebra, tuple(a + b for a, b in zip(self.blocks, other.blocks)))
        if not isinstance(other, numbers.Number):
            return NotImplemented
        return self + self.algebra.scalar(other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Element):
            self._check(other)
            return Element(self.algebra, tuple(a - b for a, b in zip(self.blocks, other.blocks)))
        if not isinstance(other, numbers.Number):
            return NotImplemented
        return self - self.algebra.scalar(other)

    def __rsub__(self, other):
        return self.algebra.scalar(other) - self

    def __neg__(self):
        return self._map(lambda b: -b)

    def __mul__(self, c):
        if isinstance(c, Element):
            raise TypeError("use @ for the algebra product")
        return self._map(lambda b: c * b)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self._map(lambda b: b / c)

    def __matmul__(self, other: "Element") -> "Element":
        if not isinstance(other, Element):
            # lets fibered elements supply the product with a constant
            return NotImplemented
        self._check(other)
        return Element(self.algebra, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def adjoint(self) -> "Element":
        return Element(self.algebra, tuple(b.conj().T for b in self.blocks), self.flags)

    @property
    def H(self) -> "Element":
        return self.adjoint()

    # inspection

    def dense(self) -> np.ndarray:
        """Block-diagonal matrix realisation."""
        n = self.algebra.size
        out = np.zeros((n, n), dtype=complex)
        start = 0
        for b in self.blocks:
            d = b.shape[0]
            out[start:start + d, start:start + d] = b
            start += d
        return out

    def norm(self) -> float:
        return max(float(np.linalg.norm(b, 2)) if b.size else 0.0 for b in self.blocks)

    def allclose(self, other: "Element", tol: float = 1e-10) -> bool:
        self._check(other)
        return (self - other).norm() <= tol

    def trace(self) -> complex:
        return complex(sum(np.trace(b) for b in self.blocks))

    def defects(self) -> dict[str, float]:
        """Distances from being self-adjoint, unitary and a projection."""
        sa = max(float(np.linalg.norm(b - b.conj().T, 2)) for b in self.blocks)
        un = 0.0
        pr = sa
        for b in self.blocks:
            eye = np.eye(b.shape[0])
            bh = b.conj().T
            un = max(un, float(np.linalg.norm(bh @ b - eye, 2)), float(np.linalg.norm(b @ bh - eye, 2)))
            pr = max(pr, float(np.linalg.norm(b @ b - b, 2)))
        return {"self_adjoint": sa, "unitary": un, "projection": pr}

    def is_self_adjoint(self, tol: float = CERT_TOL) -> bool:
        return self.defects()["self_adjoint"] <= tol

    def is_unitary(self, tol: float = CERT_TOL) -> bool:
        return self.defects()["unitary"] <= tol

    def is_projection(self, tol: float = CERT_TOL) -> bool:
        return self.defects()["projection"] <= tol

    def certified(self, *flags: str, tol: float = CERT_TOL) -> "Element":
        """Return a copy carrying ``flags`` after checking each one within ``tol``."""
        d = self.defects()
        for flag in flags:
            if flag not in FLAGS:
                raise ValueError(f"unknown flag {flag!r}")
            if d[flag] > tol:
                raise FlagError(f"{flag} defect {d[flag]:.3e} exceeds {tol:.1e}")
        return Element(self.algebra, self.blocks, self.flags | set(flags))

    def hermitian_part(self) -> "Element":
        return self._map(lambda b: (b + b.conj().T) / 2)

    def __repr__(self):
        return f"Element(dims={self.algebra.block_dims}, flags={sorted(self.flags)})"


def direct_sum(algebras: Iterable[BlockAlgebra]) -> BlockAlgebra:
    dims: list[int] = []
    for a in algebras:
        dims.extend(a.block_dims)
    return BlockAlgebra(tuple(dims))


def operator_norm(x: Element) -> float:
    """Largest singular value over all blocks."""
    return x.norm()


def commutator(a: Element, b: Element) -> Element:
    """``ab - ba``."""
    a._check(b)
    return a @ b - b @ a


def graph_norm(x: Element, dx: Element) -> float:
    """Norm of ``[[x, dx], [0, x]]`` in ``M_2`` tensor the algebra."""
    x._check(dx)
    best = 0.0
    for xb, db in zip(x.blocks, dx.blocks):
        d = xb.shape[0]
        m = np.zeros((2 * d, 2 * d), dtype=complex)
        m[:d, :d] = xb
        m[:d, d:] = db
        m[d:, d:] = xb
        best = max(best, float(np.linalg.norm(m, 2)))
    return best
