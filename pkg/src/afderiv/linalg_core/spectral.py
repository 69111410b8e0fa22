"""Spectral primitives: eigendecomposition, spectral and Riesz projections,
polar decomposition and logarithms of unitaries."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from .algebra import CERT_TOL, BlockAlgebra, Element


class NotSelfAdjoint(ValueError):
    pass


class NotUnitary(ValueError):
    pass


class SingularInput(ValueError):
    """Polar decomposition requested for a (numerically) singular element."""


class BranchCutError(ValueError):
    """An eigenvalue of a unitary sits at or near -1."""


class ContourError(ValueError):
    """An eigenvalue lies too close to the integration contour."""


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues (ascending) and eigenvector matrices, one pair per block."""

    algebra: BlockAlgebra
    eigenvalues: tuple[np.ndarray, ...]
    eigenvectors: tuple[np.ndarray, ...]

    def reconstruct(self) -> Element:
        return Element(self.algebra, tuple(
            (v * w) @ v.conj().T for w, v in zip(self.eigenvalues, self.eigenvectors)))

    @property
    def spectrum(self) -> np.ndarray:
        return np.sort(np.concatenate(self.eigenvalues))

    def projection(self, mask_fn) -> Element:
        """Projection onto eigenvectors whose eigenvalue satisfies ``mask_fn``."""
        blocks = []
        for w, v in zip(self.eigenvalues, self.eigenvectors):
            sel = v[:, mask_fn(w)]
            blocks.append(sel @ sel.conj().T)
        return Element(self.algebra, tuple(blocks), frozenset({"self_adjoint", "projection"}))

    def function(self, fn) -> Element:
        """Functional calculus ``fn(h)`` with ``fn`` acting on eigenvalue arrays."""
        return Element(self.algebra, tuple(
            (v * fn(w)) @ v.conj().T for w, v in zip(self.eigenvalues, self.eigenvectors)))


def eig_hermitian(h: Element, tol: float = CERT_TOL) -> SpectralData:
    defect = h.defects()["self_adjoint"] if "self_adjoint" not in h.flags else 0.0
    if defect > tol:
        raise NotSelfAdjoint(f"||h - h*|| = {defect:.3e} exceeds {tol:.1e}")
    vals, vecs = [], []
    for b in h.blocks:
        w, v = np.linalg.eigh((b + b.conj().T) / 2)
        vals.append(w)
        vecs.append(v)
    return SpectralData(h.algebra, tuple(vals), tuple(vecs))


def spectral_projection(sd: SpectralData, interval: tuple[float, float]) -> Element:
    """``E_h[lo, hi)`` for the half-open interval ``(lo, hi)``."""
    lo, hi = interval
    return sd.projection(lambda w: (w >= lo) & (w < hi))


@dataclass(frozen=True)
class RieszProjection:
    projection: Element
    nodes: int
    #: a-priori bound on the distance to the exact spectral projection
    error_bound: float
    #: ``||P^2 - P||`` of the raw quadrature sum, before purification
    raw_defect: float
    purification_steps: int


def _trapezoid_bound(rho_in: float, rho_out: float, n: int) -> float:
    # N-point trapezoid rule on a circle weights an eigenvalue at relative
    # radius rho by 1/(1 - rho^N); the error is rho^N/(1-rho^N) inside, the
    # mirrored quantity outside
    err = 0.0
    if rho_in > 0:
        r = rho_in ** n
        err = max(err, r / (1 - r))
    if rho_out > 0:
        r = rho_out ** n
        err = max(err, r / (1 - r))
    return err


def riesz_projection(h: Element, center: float, radius: float,
                     quadrature_points: int = 64, margin: float | None = None,
                     purify: bool = True) -> RieszProjection:
    """Contour integral ``(2 pi i)^{-1} \\oint (z - h)^{-1} dz`` over ``|z - center| = radius``.

    The integral is evaluated with the trapezoid rule. With ``purify`` the raw
    sum is then driven to an exact idempotent with McWeeny steps
    ``p -> 3p^2 - 2p^3``; these preserve the eigenvectors and converge
    quadratically once the quadrature error is below 1/2. The returned
    ``error_bound`` follows from the declared contour margin.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if quadrature_points < 4:
        raise ValueError("at least 4 quadrature nodes are required")
    if margin is None:
        margin = 0.1 * radius
    sd = eig_hermitian(h)
    dist = np.abs(np.abs(sd.spectrum - center) - radius)
    if dist.size and dist.min() < margin:
        raise ContourError(
            f"eigenvalue within {dist.min():.3e} of the contour (margin {margin:.3e})")

    n = quadrature_points
    theta = 2 * np.pi * (np.arange(n) + 0.5) / n
    nodes = center + radius * np.exp(1j * theta)
    blocks = []
    for b in h.blocks:
        d = b.shape[0]
        acc = np.zeros((d, d), dtype=complex)
        eye = np.eye(d)
        for z in nodes:
            m = z * eye - b
            if np.linalg.cond(m) > 1e12:
                raise ContourError(f"singular resolvent at node {z:.6g}")
            # dz = i (z - c) dtheta; the 1/(2 pi i) and 2 pi / n combine to (z - c)/n
            acc += np.linalg.solve(m, eye) * (z - center) / n
        blocks.append((acc + acc.conj().T) / 2)
    raw = Element(h.algebra, tuple(blocks))
    raw_defect = max(float(np.linalg.norm(b @ b - b, 2)) for b in raw.blocks)

    rho_in = max(radius - margin, 0.0) / radius
    rho_out = radius / (radius + margin)
    bound = _trapezoid_bound(rho_in, rho_out, n)
    steps = 0
    p = raw
    if purify and bound < 0.25:
        while bound > 1e-15 and steps < 8:
            p = p._map(lambda b: 3 * b @ b - 2 * b @ b @ b)
            bound = 3 * bound ** 2 + 2 * bound ** 3
            steps += 1
        p = p.hermitian_part()
    bound = max(bound, 1e-14 * max(h.algebra.block_dims))
    return RieszProjection(p, n, bound, raw_defect, steps)


def polar_unitary(y: Element, tol: float = 1e-10) -> Element:
    """Unitary factor ``v`` of ``y = v |y|`` for invertible ``y``."""
    blocks = []
    for b in y.blocks:
        w, s, vh = np.linalg.svd(b)
        if s.size and s.min() <= tol * max(1.0, s.max()):
            raise SingularInput(f"smallest singular value {s.min():.3e} below tolerance {tol:.1e}")
        blocks.append(w @ vh)
    return Element(y.algebra, tuple(blocks), frozenset({"unitary"}))


def positive_part(y: Element) -> Element:
    """``|y| = (y* y)^{1/2}``."""
    blocks = []
    for b in y.blocks:
        _, s, vh = np.linalg.svd(b)
        blocks.append((vh.conj().T * s) @ vh)
    return Element(y.algebra, tuple(blocks), frozenset({"self_adjoint"}))


def _unitary_eig(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t, z = schur(b, output="complex")
    return np.diag(t), z


def unitary_log(u: Element, tol: float = CERT_TOL) -> Element:
    """Self-adjoint ``a`` with ``e^{ia} = u`` and spectrum in ``(-pi, pi]``.

    Unlike :func:`principal_log_unitary` no distance from the branch cut is
    required: any log with ``||a|| <= pi`` serves as a geodesic generator.
    """
    d = u.defects()["unitary"] if "unitary" not in u.flags else 0.0
    if d > tol:
        raise NotUnitary(f"unitarity defect {d:.3e} exceeds {tol:.1e}")
    blocks = []
    for b in u.blocks:
        lam, z = _unitary_eig(b)
        theta = np.angle(lam)
        theta[theta <= -np.pi + 1e-15] = np.pi
        blocks.append((z * theta) @ z.conj().T)
    return Element(u.algebra, tuple(blocks)).hermitian_part().certified("self_adjoint")


def principal_log_unitary(u: Element, margin: float = 1e-8, tol: float = CERT_TOL) -> Element:
    """Principal logarithm: self-adjoint ``a`` with ``e^{ia} = u``, ``||a|| < pi``.

    Raises :class:`BranchCutError` if an eigenvalue phase is within ``margin``
    of ``pi``.
    """
    d = u.defects()["unitary"] if "unitary" not in u.flags else 0.0
    if d > tol:
        raise NotUnitary(f"unitarity defect {d:.3e} exceeds {tol:.1e}")
    blocks = []
    for b in u.blocks:
        lam, z = _unitary_eig(b)
        theta = np.angle(lam)
        if theta.size and np.max(np.abs(theta)) > np.pi - margin:
            raise BranchCutError(
                f"eigenvalue phase {np.max(np.abs(theta)):.12f} within {margin:.1e} of pi")
        blocks.append((z * theta) @ z.conj().T)
    return Element(u.algebra, tuple(blocks)).hermitian_part().certified("self_adjoint")


def expi(a: Element, t: float = 1.0) -> Element:
    """``exp(i t a)`` for self-adjoint ``a``."""
    blocks = []
    for b in a.blocks:
        w, v = np.linalg.eigh((b + b.conj().T) / 2)
        blocks.append((v * np.exp(1j * t * w)) @ v.conj().T)
    return Element(a.algebra, tuple(blocks), frozenset({"unitary"}))


def support_projection(a: Element, threshold: float = 0.5) -> tuple[Element, float]:
    """Spectral projection of the self-adjoint ``a`` above ``threshold``.

    Also returns the distance from the spectrum to ``{0, 1}`` (the worst
    eigenvalue), which callers use to decide whether ``a`` was close to a
    projection at all.
    """
    sd = eig_hermitian(a.hermitian_part())
    worst = 0.0
    for w in sd.eigenvalues:
        if w.size:
            worst = max(worst, float(np.max(np.minimum(np.abs(w), np.abs(w - 1)))))
    return sd.projection(lambda w: w > threshold), worst


def rank(p: Element) -> int:
    """Rank of a projection (rounded trace)."""
    return int(round(p.trace().real))


def range_basis(block: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the range of a projection matrix."""
    w, v = np.linalg.eigh((block + block.conj().T) / 2)
    return v[:, w > 0.5]


def branch_margin(u: Element) -> float:
    """Distance of the eigenvalue phases of ``u`` from the branch cut at pi."""
    worst = math.inf
    for b in u.blocks:
        lam, _ = _unitary_eig(b)
        if lam.size:
            worst = min(worst, float(np.pi - np.max(np.abs(np.angle(lam)))))
    return worst
