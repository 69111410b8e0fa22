"""Periodic and scaled ladders over the circle, and the corner winding obstruction.

The increments are ``h_{n,ij} = a_n (1, 1, -1, -1, 0, ..., 0)`` on the
multiplicity slots, with ``H_1 = 0``. For ``a_n = 1`` the spectrum of every
``H_n`` is integral, so ``Ad e^{2 pi i H_n}`` is the identity.

A unitary path ``u_t`` from 1 to ``z`` with ``||[H, u_t]|| < a`` would keep
the corner ``E_1 u_t E_1`` invertible, where ``E_1`` is the top spectral
projection of ``H``. Its determinant, a loop over the circle, then has the
same winding number at both ends. :func:`path_witness` checks this for a
sampled candidate path and reports which hypothesis breaks.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ..fibered import CIRCLE, EmbeddingSpec, FiberedElement, FiberSpace, canonical_z
from ..linalg_core import BlockAlgebra, Element
from ..linalg_core.spectral import _unitary_eig
from .ladder import HamiltonianLadder, LadderError, _pair_ladder
from .winding import WindingError, winding_number

INTEGRALITY_TOL = 1e-10
PERIODICITY_TOL = 1e-9
#: eigenvalues of ``H`` closer than this are treated as one level
LEVEL_TOL = 1e-9
#: a jump of this size between neighbouring circle samples is no grid-scale motion
SEAM_JUMP = 0.5

TARGETS = ("canonical", "embedded")


def build_scaled_ladder(specs: Sequence[EmbeddingSpec], scales: Sequence[float], *,
                        base: BlockAlgebra | None = None,
                        space: FiberSpace | None = None) -> HamiltonianLadder:
    """Ladder with ``h_{n,ij} = a_n (1, 1, -1, -1, 0, ...)``; ``scales[k]`` is ``a_{k+2}``."""
    specs = tuple(specs)
    if not specs:
        raise LadderError("empty level list")
    scales = [float(a) for a in scales]
    if len(scales) < len(specs):
        raise LadderError(f"need {len(specs)} scales, got {len(scales)}")
    if min(scales) <= 0:
        raise LadderError("scales must be positive (inf a_n > 0)")
    for spec in specs:
        if spec.kind != CIRCLE:
            raise LadderError("periodic ladders need circle specs")
    return _pair_ladder(specs, base or BlockAlgebra((1,)), scales, space)


def build_periodic_ladder(specs: Sequence[EmbeddingSpec], *, base: BlockAlgebra | None = None,
                          space: FiberSpace | None = None) -> HamiltonianLadder:
    return build_scaled_ladder(specs, [1.0] * len(tuple(specs)), base=base, space=space)


def ladder_scale(ladder: HamiltonianLadder) -> float:
    """``a = inf a_n`` over the levels of a periodic or scaled ladder."""
    scales = [g for g in ladder.gap_coefficients if g is not None]
    if not scales:
        raise LadderError("a single-level ladder has no scale")
    return float(min(scales))


def _levels(h: Element) -> np.ndarray:
    w = np.concatenate([np.linalg.eigvalsh(b) for b in h.blocks])
    w = np.sort(w)[::-1]
    keep = np.concatenate([[True], np.abs(np.diff(w)) > LEVEL_TOL])
    return w[keep]


def spectral_gap(h: Element) -> float:
    """``lambda_1 - lambda_2`` for the two largest distinct eigenvalues (inf if only one)."""
    lv = _levels(h)
    return float(lv[0] - lv[1]) if lv.size > 1 else float("inf")


@dataclass
class LevelCertificate:
    level: int
    integrality_error: float
    exp_identity_error: float
    conjugation_error: float
    spectral_gap: float
    integral: bool
    periodic: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _exp2pi(h: Element) -> list[np.ndarray]:
    out = []
    for b in h.blocks:
        w, v = np.linalg.eigh(b)
        out.append((v * np.exp(2j * np.pi * w)) @ v.conj().T)
    return out


def periodicity_certificates(ladder: HamiltonianLadder, samples: int = 20,
                             rng: np.random.Generator | None = None) -> list[LevelCertificate]:
    """Integrality of ``Sp(H_n)`` and ``Ad e^{2 pi i H_n} = id`` on random elements, per level."""
    rng = rng or np.random.default_rng(0)
    out = []
    for n in range(1, ladder.levels + 1):
        h = ladder.H(n)
        w = np.concatenate([np.linalg.eigvalsh(b) for b in h.blocks])
        integ = float(np.max(np.abs(w - np.round(w))))
        e = _exp2pi(h)
        ident = max(float(np.linalg.norm(b - np.eye(b.shape[0]), 2)) for b in e)
        conj = 0.0
        for _ in range(samples):
            for b in e:
                d = b.shape[0]
                x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
                x /= np.linalg.norm(x, 2)
                conj = max(conj, float(np.linalg.norm(b @ x @ b.conj().T - x, 2)))
        out.append(LevelCertificate(n, integ, ident, conj, spectral_gap(h),
                                    integ <= INTEGRALITY_TOL, conj <= PERIODICITY_TOL))
    return out


# corner certificate

@dataclass
class CornerCertificate:
    applicable: bool
    reason: str
    commutator: float
    gap: float
    rank: int
    off_corner: float
    #: ``sqrt(1 - ||E_1 u (1 - E_1)||^2)``, the lower bound on the corner's singular values
    singular_lower_bound: float
    min_singular: float
    min_abs_det: float
    certified_invertible: bool
    winding: int | None
    winding_error: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def top_projection_basis(H: Element) -> tuple[list[np.ndarray], float, float]:
    """Orthonormal bases (one per block) of the top eigenspace, with ``lambda_1`` and the gap."""
    lv = _levels(H)
    lam1 = float(lv[0])
    bases = []
    for b in H.blocks:
        w, v = np.linalg.eigh(b)
        bases.append(v[:, w > lam1 - LEVEL_TOL])
    gap = float(lv[0] - lv[1]) if lv.size > 1 else float("inf")
    return bases, lam1, gap


def _corner_data(u_blocks: Sequence[np.ndarray], bases: Sequence[np.ndarray]):
    """Per-fiber ``det``, smallest singular value and off-corner norm of ``E_1 u E_1``."""
    n = u_blocks[0].shape[0]
    det = np.ones(n, dtype=complex)
    smin = np.full(n, np.inf)
    off = np.zeros(n)
    for ub, vb in zip(u_blocks, bases):
        r = vb.shape[1]
        if r == 0:
            continue
        top = np.conj(vb.T)[None] @ ub                      # E_1 u, in E_1 coordinates
        corner = top @ vb[None]
        rest = top - corner @ np.conj(vb.T)[None]           # E_1 u (1 - E_1)
        det *= np.linalg.det(corner)
        smin = np.minimum(smin, np.linalg.svd(corner, compute_uv=False)[:, -1])
        off = np.maximum(off, np.linalg.norm(rest, 2, axis=(1, 2)))
    return det, smin, off


def _commutator_norms(H: Element, u_blocks: Sequence[np.ndarray]) -> np.ndarray:
    out = np.zeros(u_blocks[0].shape[0])
    for hb, ub in zip(H.blocks, u_blocks):
        c = hb[None] @ ub - ub @ hb[None]
        out = np.maximum(out, np.linalg.norm(c, 2, axis=(1, 2)))
    return out


def corner_invertibility_certificate(u: FiberedElement, H: Element, a: float) -> CornerCertificate:
    """Certify that ``E_1 u(theta) E_1`` is invertible for every sampled ``theta``.

    From ``||[H, u]|| < a <= lambda_1 - lambda_2`` one gets
    ``||E_1 u (1 - E_1)|| < 1``, and then
    ``E_1 u E_1 u* E_1 >= (1 - ||E_1 u (1 - E_1)||^2) E_1`` bounds the corner's
    singular values from below. The certificate also reports the winding
    number of ``theta -> det(E_1 u(theta) E_1)``.
    """
    if u.space.kind != CIRCLE:
        raise LadderError("corner certificates are taken over the circle")
    if u.algebra != H.algebra:
        raise LadderError("u and H live in different algebras")
    if not a > 0:
        raise LadderError("a must be positive")
    bases, _, gap = top_projection_basis(H)
    if gap < a - LEVEL_TOL:
        raise LadderError(f"gap hypothesis unverified: lambda_1 - lambda_2 = {gap:.6g} < a = {a:.6g}")
    rank = sum(vb.shape[1] for vb in bases)
    comm = float(_commutator_norms(H, u.data).max())
    det, smin, off = _corner_data(u.data, bases)
    off_max = float(off.max())
    lower = float(np.sqrt(max(0.0, 1.0 - off_max ** 2)))
    applicable = comm < a
    reason = "" if applicable else f"||[H,u]|| = {comm:.6g} is not below a"
    certified = bool(off_max < 1.0 - 1e-12 and float(smin.min()) > 0)
    winding, werr = None, ""
    if certified:
        try:
            winding = winding_number(det)
        except WindingError as exc:
            werr = str(exc)
    else:
        werr = "corner not certified invertible"
    return CornerCertificate(applicable, reason, comm, gap, rank, off_max, lower,
                             float(smin.min()), float(np.abs(det).min()), certified, winding, werr)


# candidate paths

def target_unitary(ladder: HamiltonianLadder, level: int, target: str = "canonical") -> FiberedElement:
    """``z`` at ``level``: the canonical unitary there, or ``z_1`` carried up through the embeddings."""
    if target == "canonical":
        return canonical_z(ladder.space, ladder.algebra(level))
    if target == "embedded":
        return ladder.canonical(1, level)
    raise LadderError(f"unknown target {target!r}; expected one of {TARGETS}")


def _log_branch(blocks: Sequence[np.ndarray], beta: float) -> list[np.ndarray]:
    """Fiberwise self-adjoint logs with spectrum in ``[beta, beta + 2 pi)``."""
    out = []
    for arr in blocks:
        logs = np.empty_like(arr)
        for i, b in enumerate(arr):
            lam, z = _unitary_eig(b)
            th = beta + np.mod(np.angle(lam) - beta, 2 * np.pi)
            logs[i] = (z * th) @ z.conj().T
        out.append((logs + np.conj(np.swapaxes(logs, 1, 2))) / 2)
    return out


def _expi_batch(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    return (v * np.exp(1j * w)[:, None, :]) @ np.conj(np.swapaxes(v, 1, 2))


@dataclass
class CandidatePath:
    """``u_t(theta) = exp(i c sin(pi t) R(theta)) exp(i t L(theta))`` with ``e^{iL} = z``.

    ``L`` is the log of the target with spectrum in ``[beta, beta + 2 pi)``;
    ``R(theta) = R_0 + cos(theta) R_1 + sin(theta) R_2`` is continuous on the
    circle and almost commutes with ``H``.
    """

    times: np.ndarray
    unitaries: list[FiberedElement]
    beta: float
    scale: float
    target: str

    @property
    def start(self) -> FiberedElement:
        return self.unitaries[0]

    @property
    def end(self) -> FiberedElement:
        return self.unitaries[-1]


def _near_commutant(H: Element, rng: np.random.Generator, leak: float) -> list[np.ndarray]:
    out = []
    for hb in H.blocks:
        d = hb.shape[0]
        r = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        r = (r + r.conj().T) / 2
        w, v = np.linalg.eigh(hb)
        same = np.abs(w[:, None] - w[None, :]) < LEVEL_TOL
        rb = v.conj().T @ r @ v
        rb = np.where(same, rb, leak * rb)
        out.append(v @ rb @ v.conj().T)
    return out


def candidate_path(ladder: HamiltonianLadder, level: int, rng: np.random.Generator, *,
                   a: float | None = None, target: str = "canonical", times: int = 33,
                   commutator_fill: float = 0.8) -> CandidatePath:
    """A random small-commutator path from 1 towards the target unitary.

    The perturbation ``R`` is normalised so that
    ``c ||[H, R(theta)]|| <= commutator_fill * a``; since the target part
    commutes with ``H``, the whole path then has ``||[H, u_t]|| < a``.
    """
    H = ladder.H(level)
    a = ladder_scale(ladder) if a is None else a
    z = target_unitary(ladder, level, target)
    theta = ladder.space.grid
    beta = float(rng.uniform(-np.pi, np.pi))
    logs = _log_branch(z.data, beta)
    leak = float(rng.uniform(0.05, 0.3))
    parts = [_near_commutant(H, rng, leak) for _ in range(3)]
    rs = []
    for k in range(len(H.blocks)):
        r0, r1, r2 = parts[0][k], parts[1][k], parts[2][k]
        rs.append(r0[None] + np.cos(theta)[:, None, None] * r1[None]
                  + np.sin(theta)[:, None, None] * r2[None])
    rnorm = max(float(np.linalg.norm(r, 2, axis=(1, 2)).max()) for r in rs) or 1.0
    rs = [np.pi * r / rnorm for r in rs]
    comm = max(float(np.linalg.norm(hb[None] @ r - r @ hb[None], 2, axis=(1, 2)).max())
               for hb, r in zip(H.blocks, rs))
    c = float(rng.uniform(0.3, 1.0))
    if comm > 0:
        c = min(c, commutator_fill * a / comm)
    ts = np.linspace(0.0, 1.0, times)
    us = []
    for t in ts:
        s = c * np.sin(np.pi * t)
        data = tuple(_expi_batch(s * r) @ _expi_batch(t * lg) for r, lg in zip(rs, logs))
        us.append(FiberedElement(ladder.space, H.algebra, data))
    return CandidatePath(ts, us, beta, c, target)


@dataclass
class PathWitness:
    """Outcome of testing one candidate path against the corner obstruction.

    ``contradiction`` means every hypothesis held on the samples (commutator
    below ``a``, corner invertible at every ``(t, theta)``) while the corner
    winding differs between ``t = 0`` and ``t = 1``. For a genuinely
    continuous path this is impossible, and ``discontinuous`` records where
    the candidate fails to be one: a jump across neighbouring circle samples
    at some intermediate ``t``.
    """

    target: str
    rank: int
    gap: float
    a: float
    commutator_sup: float
    applicable: bool
    off_corner_sup: float
    min_singular: float
    min_abs_det: float
    invertible: bool
    winding_start: int | None
    winding_end: int | None
    endpoint_error: float
    seam_jump: float
    discontinuous: bool
    contradiction: bool
    evades: bool
    beta: float = 0.0
    scale: float = 0.0
    per_time: list = field(default_factory=list, repr=False)

    def to_dict(self, trace: bool = False) -> dict:
        d = asdict(self)
        if not trace:
            d.pop("per_time")
        return d


def _seam_jump(u: FiberedElement) -> float:
    worst = 0.0
    for arr in u.data:
        nxt = np.roll(arr, -1, axis=0)
        worst = max(worst, float(np.linalg.norm(nxt - arr, 2, axis=(1, 2)).max()))
    return worst


def path_witness(ladder: HamiltonianLadder, level: int, path: CandidatePath,
                 a: float | None = None) -> PathWitness:
    H = ladder.H(level)
    a = ladder_scale(ladder) if a is None else a
    certs = [corner_invertibility_certificate(u, H, a) for u in path.unitaries]
    z = target_unitary(ladder, level, path.target)
    one = max(float(np.max(np.abs(b - np.eye(b.shape[1])[None]))) for b in path.start.data)
    end = max(float(np.max(np.abs(b - zb))) for b, zb in zip(path.end.data, z.data))
    jumps = [_seam_jump(u) for u in path.unitaries]
    base_jump = max(jumps[0], jumps[-1])
    seam = max(jumps)
    applicable = all(c.applicable for c in certs)
    invertible = all(c.certified_invertible for c in certs)
    w0, w1 = certs[0].winding, certs[-1].winding
    contradiction = bool(applicable and invertible and w0 is not None and w1 is not None and w0 != w1)
    return PathWitness(
        target=path.target, rank=certs[0].rank, gap=certs[0].gap, a=a,
        commutator_sup=max(c.commutator for c in certs), applicable=applicable,
        off_corner_sup=max(c.off_corner for c in certs),
        min_singular=min(c.min_singular for c in certs),
        min_abs_det=min(c.min_abs_det for c in certs), invertible=invertible,
        winding_start=w0, winding_end=w1, endpoint_error=max(one, end),
        seam_jump=seam, discontinuous=bool(seam > max(SEAM_JUMP, 4 * base_jump)),
        contradiction=contradiction, evades=bool(applicable and not contradiction),
        beta=path.beta, scale=path.scale,
        per_time=[dict(t=float(t), **c.to_dict()) for t, c in zip(path.times, certs)],
    )
