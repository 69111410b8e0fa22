"""Finite-level certificate that small-spectrum approximants of ``x_n`` have ``||delta(h)|| > 1``.

``h`` lives in the first block ``B_{m+1,1}`` of level ``m + 1``. When
``0 <= h <= 1``, ``mu(Sp h) < eps_{m+1}`` and ``||h - x_n P_{m+1}|| < 1/5``
hold, the certificate checks ``||delta(h)|| > 1`` and reports every
intermediate quantity of the inequality chain. Norms are grid maxima.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..fibered import FiberedElement, spectrum_measure
from ..linalg_core import AlgebraMismatch, BlockAlgebra
from .ladder import HamiltonianLadder, LadderError

DISTANCE_LIMIT = 0.2
POSITIVITY_TOL = 1e-10

NON_APPLICABLE = "non-applicable"
CERTIFIED = "certified"
VIOLATED = "violated"


def _norms(a: np.ndarray) -> np.ndarray:
    if not a.shape[1]:
        return np.zeros(a.shape[0])
    gram = np.conj(np.swapaxes(a, 1, 2)) @ a
    return np.sqrt(np.maximum(np.linalg.eigvalsh(gram)[:, -1], 0.0))


@dataclass
class ObstructionCertificate:
    m: int
    n: int
    measure: float
    distance: float
    delta_norm: float
    positive: bool
    measure_ok: bool
    distance_ok: bool
    applicable: bool
    verdict: str
    gap_coefficient: float
    off_diagonal: float
    h_minus_htilde: float
    measure_htilde: float
    q_h0_q: float
    q_minus_qh1q: float
    #: ``a_{m+1} ||Qh(1-Q)|| - 2||H_m|| - sum_{j>=2} ||h_{m+1,1j}||``
    chain_lower_bound: float
    #: ``mu(Sp h) + 2 xi ||h - h~||``
    measure_chain_bound: float
    chain_delta_ok: bool
    chain_measure_ok: bool
    htilde_ok: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _corner_samples(ladder: HamiltonianLadder, level: int, h: FiberedElement) -> np.ndarray:
    alg = ladder.algebra(level)
    xi = alg.block_dims[0]
    if h.algebra == BlockAlgebra((xi,)):
        return h.data[0]
    if h.algebra != alg:
        raise AlgebraMismatch("h must live in the first block of level m+1")
    for k in range(1, alg.n_blocks):
        if np.max(np.abs(h.data[k]), initial=0.0) > 1e-12:
            raise AlgebraMismatch("h has weight outside the first block")
    return h.data[0]


def certify_obstruction(ladder: HamiltonianLadder, m: int, h: FiberedElement, n: int,
                        corners=None) -> ObstructionCertificate:
    if not 1 <= n <= m:
        raise LadderError(f"need 1 <= n <= m, got n={n}, m={m}")
    level = m + 1
    arr = _corner_samples(ladder, level, h)
    herm = (arr + np.conj(np.swapaxes(arr, 1, 2))) / 2
    if np.max(np.abs(arr - herm)) > 1e-10:
        raise ValueError("h is not self-adjoint")
    space = h.space
    corners = corners or ladder.corners(level)
    H = ladder.H(level).blocks[0]
    Q = corners.Q.blocks[0]
    one = np.eye(arr.shape[1])
    xnp = ladder.canonical(n, level).data[0]
    a_coef = ladder.gap_coefficient(level)

    eig = np.linalg.eigvalsh(herm)
    positive = bool(eig.min() >= -POSITIVITY_TOL and eig.max() <= 1 + POSITIVITY_TOL)
    corner_alg = BlockAlgebra((arr.shape[1],))
    h_el = FiberedElement(space, corner_alg, (herm,))
    measure = spectrum_measure(h_el).measure
    distance = float(_norms(herm - xnp).max())
    dnorm = float(_norms(H[None] @ herm - herm @ H[None]).max())

    off = float(_norms(Q[None] @ herm @ (one - Q)[None]).max())
    htilde = Q[None] @ herm @ Q[None] + (one - Q)[None] @ herm @ (one - Q)[None]
    h_minus = float(_norms(herm - htilde).max())
    measure_t = spectrum_measure(FiberedElement(space, corner_alg, (htilde,))).measure
    i0 = int(np.argmin(np.abs(space.grid - 0.0)))
    i1 = int(np.argmin(np.abs(space.grid - 1.0)))
    qh0q = float(np.linalg.norm(Q @ herm[i0] @ Q, 2))
    qh1q = float(np.linalg.norm(Q - Q @ herm[i1] @ Q, 2))

    hm = ladder.H(m).norm()
    src = ladder.specs[m - 1]
    side = sum(ladder.increment(level, 0, j).norm() for j in range(1, src.n_source))
    chain = a_coef * off - 2 * hm - side
    xi = ladder.xi(level)
    mchain = measure + 2 * xi * h_minus

    eps_next = ladder.epsilon(level)
    measure_ok = measure < eps_next
    distance_ok = distance < DISTANCE_LIMIT
    applicable = positive and measure_ok and distance_ok
    if not applicable:
        verdict = NON_APPLICABLE
    else:
        verdict = CERTIFIED if dnorm > 1 else VIOLATED
    return ObstructionCertificate(
        m=m, n=n, measure=measure, distance=distance, delta_norm=dnorm, positive=positive,
        measure_ok=measure_ok, distance_ok=distance_ok, applicable=applicable, verdict=verdict,
        gap_coefficient=a_coef, off_diagonal=off, h_minus_htilde=h_minus, measure_htilde=measure_t,
        q_h0_q=qh0q, q_minus_qh1q=qh1q, chain_lower_bound=chain, measure_chain_bound=mchain,
        chain_delta_ok=bool(dnorm >= chain - 1e-8),
        chain_measure_ok=bool(measure_t <= mchain + 1e-12),
        htilde_ok=bool(h_minus <= 2 * off + 1e-12),
    )


@dataclass
class SamplerParams:
    coupling: tuple[float, float] = (0.002, 0.004)
    width: tuple[float, float] = (0.02, 0.04)
    #: spacing of the constant offsets that split repeated branches
    offset: float = 0.012
    #: non-crossing branches closer than this are coupled as if they crossed
    approach: float = 0.03
    #: fraction of the measure budget used by the spread parameter
    measure_fill: float = 0.7
    conjugation: float = 0.02


@dataclass
class SampleInfo:
    accepted: bool
    reason: str = ""
    coupling: float = math.nan
    width: float = math.nan
    spread: float = math.nan
    continuity_margin: float = math.nan
    crossings: int = 0


@dataclass(eq=False)
class ObstructionSampler:
    """Finite-spectrum perturbations of ``x_n P_{m+1}``.

    The diagonal branches of ``x_n P_{m+1}`` cross each other; each crossing
    is resolved by a Gaussian-bump coupling so the sorted eigenvalue branches
    of the perturbed ``y(t)`` stay separated. Each branch is then pulled
    towards the midpoint of its range: with spread ``tau``, eigenvalue
    ``w_k`` becomes ``s_k + tau (w_k - s_k)``, which leaves a spectrum of
    measure ``tau * sum(range lengths)``. Finally ``h`` is conjugated by a
    constant unitary close to 1.

    Repeated branches are handled in one of two ways. If every distinct
    branch has the same multiplicity ``r``, the construction runs on the
    distinct branches and is tensored with ``1_r``. Otherwise repeated
    copies are split by small constant offsets before coupling.

    Samples whose branch separation does not dominate the Lipschitz
    movement between grid points are rejected, so every accepted ``h`` is a
    continuous function with the stated spectrum.
    """

    ladder: HamiltonianLadder
    m: int
    n: int
    params: SamplerParams = field(default_factory=SamplerParams)
    refine: int = 8

    def __post_init__(self):
        if not 1 <= self.n <= self.m < self.ladder.levels:
            raise LadderError("need 1 <= n <= m < number of levels")
        level = self.m + 1
        d = self.ladder.canonical(self.n, level).data[0]
        diag = np.real(np.einsum("tii->ti", d))
        self.grid = self.ladder.space.grid
        self.xi = diag.shape[1]
        cols = np.round(diag.T, 12)
        _, first, inverse = np.unique(cols, axis=0, return_index=True, return_inverse=True)
        inverse = np.asarray(inverse).ravel()
        groups = [np.flatnonzero(inverse == g) for g in range(len(first))]
        sizes = {g.size for g in groups}
        if len(sizes) == 1:
            # D = D_red (x) 1_r after permuting the basis
            self.mult = sizes.pop()
            self.members = np.stack(groups)           # (branches, r)
            self.branches = diag[:, self.members[:, 0]]
        else:
            self.mult = 1
            self.members = np.arange(self.xi)[:, None]
            offsets = np.zeros(self.xi)
            for g in groups:
                if g.size > 1:
                    offsets[g] = self.params.offset * (np.arange(g.size) - (g.size - 1) / 2)
            self.branches = diag + offsets[None, :]
        self.offset_norm = float(np.max(np.abs(self.branches - diag[:, self.members[:, 0]])))
        self.crossings = self._find_crossings()
        self.slope = float(np.max(np.abs(np.diff(self.branches, axis=0))
                                  / np.diff(self.grid)[:, None], initial=0.0))
        self.H = self.ladder.H(level).blocks[0]

    def _find_crossings(self) -> list[tuple[int, int, float]]:
        t = self.grid
        b = self.branches
        diff = b[:, :, None] - b[:, None, :]
        out = []
        iu, ju = np.triu_indices(b.shape[1], 1)
        dd = diff[:, iu, ju]                           # (N, pairs)
        for p in range(dd.shape[1]):
            col = dd[:, p]
            found: list[float] = []
            zero = np.flatnonzero(col == 0.0)
            sign = np.flatnonzero(col[:-1] * col[1:] < 0)
            for i in sign:
                found.append(t[i] + (t[i + 1] - t[i]) * col[i] / (col[i] - col[i + 1]))
            found.extend(t[zero])
            if not found and np.min(np.abs(col)) < self.params.approach:
                # near approach without a sign change, typically at an endpoint
                found.append(t[int(np.argmin(np.abs(col)))])
            found.sort()
            last = None
            for ts in found:
                if last is None or ts - last > 1e-9:
                    out.append((int(iu[p]), int(ju[p]), float(ts)))
                last = ts
        return out

    def _coupling_lipschitz(self, eta: float, width: float) -> float:
        """Bound on ``||C'(t)||`` by the largest row sum of ``|bump'|`` on a fine grid."""
        if not self.crossings:
            return 0.0
        fine = np.linspace(0.0, 1.0, 8 * self.grid.size)
        rows = np.zeros((fine.size, self.branches.shape[1]))
        for a, b, ts in self.crossings:
            z = (fine - ts) / width
            d = eta * 2 * np.abs(z) / width * np.exp(-z * z)
            rows[:, a] += d
            rows[:, b] += d
        return 1.1 * float(rows.max())

    def _coupled(self, t: np.ndarray, eta: float, width: float, phases: np.ndarray) -> np.ndarray:
        nb = self.branches.shape[1]
        y = np.zeros((t.size, nb, nb), dtype=complex)
        idx = np.arange(nb)
        y[:, idx, idx] = np.stack([np.interp(t, self.grid, self.branches[:, k]) for k in idx], axis=1)
        for (a, b, ts), ph in zip(self.crossings, phases):
            bump = eta * np.exp(-((t - ts) / width) ** 2) * np.exp(1j * ph)
            y[:, a, b] += bump
            y[:, b, a] += np.conj(bump)
        return y

    def sample(self, rng: np.random.Generator) -> tuple[FiberedElement | None, SampleInfo]:
        p = self.params
        t = self.grid
        nb = self.branches.shape[1]
        eta = rng.uniform(*p.coupling)
        width = rng.uniform(*p.width)
        phases = rng.uniform(0, 2 * np.pi, size=len(self.crossings))
        info = SampleInfo(False, coupling=eta, width=width, crossings=len(self.crossings))
        y = self._coupled(t, eta, width, phases)
        w, v = np.linalg.eigh(y)
        lo, hi = w.min(axis=0), w.max(axis=0)
        margin = math.inf
        if nb > 1:
            # y(t) is defined for every t. By Weyl each eigenvalue moves by at
            # most lip * dt / 2 away from the nearer grid point; intervals where
            # that is not enough are checked again on a refined grid.
            lip = self.slope + self._coupling_lipschitz(eta, width)
            gap = np.min(np.diff(w, axis=1), axis=1)
            dt = np.diff(t)
            local = np.minimum(gap[:-1], gap[1:]) - lip * dt
            bad = np.flatnonzero(local <= 0)
            margin = float(local.min())
            if bad.size:
                sub = np.arange(1, self.refine) / self.refine
                fine = (t[bad, None] + dt[bad, None] * sub[None, :]).ravel()
                wf = np.linalg.eigvalsh(self._coupled(fine, eta, width, phases))
                gf = np.min(np.diff(wf, axis=1), axis=1).reshape(bad.size, -1)
                ends = np.stack([gap[bad], gap[bad + 1]], axis=1)
                gf = np.concatenate([ends[:, :1], gf, ends[:, 1:]], axis=1)
                fine_margin = np.minimum(gf[:, :-1], gf[:, 1:]) - lip * (dt[bad] / self.refine)[:, None]
                good = np.delete(local, bad)
                margin = float(min(fine_margin.min(), good.min(initial=math.inf)))
                lo, hi = np.minimum(lo, wf.min(axis=0)), np.maximum(hi, wf.max(axis=0))
        info.continuity_margin = margin
        if margin <= 0:
            info.reason = "branches not separated"
            return None, info
        sigma = np.clip((lo + hi) / 2, 0.0, 1.0)
        # squeezed branches sit around different centres, so their lengths add
        total = float(np.sum(hi - lo))
        budget = p.measure_fill * self.ladder.epsilon(self.m + 1)
        tau = rng.uniform(0, min(1.0, budget / total)) if total > 0 else 0.0
        vals = np.clip(sigma[None, :] + tau * (w - sigma[None, :]), 0.0, 1.0)
        h_red = (v * vals[:, None, :]) @ np.conj(np.swapaxes(v, 1, 2))
        h = np.zeros((t.size, self.xi, self.xi), dtype=complex)
        for r in range(self.mult):
            sel = self.members[:, r]
            h[:, sel[:, None], sel[None, :]] = h_red
        # constant conjugation, mostly inside the commutant of H
        xi = self.xi
        r = rng.normal(size=(xi, xi)) + 1j * rng.normal(size=(xi, xi))
        r = (r + r.conj().T) / 2
        hw, hv = np.linalg.eigh(self.H)
        same_level = np.abs(hw[:, None] - hw[None, :]) < 1e-9
        r_basis = hv.conj().T @ r @ hv
        r = hv @ np.where(same_level, r_basis, 1e-3 * r_basis) @ hv.conj().T
        s = rng.uniform(0, p.conjugation) / max(np.linalg.norm(r, 2), 1e-300)
        rw, rv = np.linalg.eigh(r)
        u = (rv * np.exp(1j * s * rw)) @ rv.conj().T
        h = u[None] @ h @ u.conj().T[None]
        h = (h + np.conj(np.swapaxes(h, 1, 2))) / 2
        info.accepted = True
        info.spread = tau
        return FiberedElement(self.ladder.space, BlockAlgebra((xi,)), (h,)), info


@dataclass
class ObstructionSweep:
    certificates: list[ObstructionCertificate]
    rejected: int

    @property
    def applicable(self) -> list[ObstructionCertificate]:
        return [c for c in self.certificates if c.applicable]

    @property
    def violations(self) -> list[ObstructionCertificate]:
        return [c for c in self.certificates if c.verdict == VIOLATED]

    def summary(self) -> dict:
        app = self.applicable
        return {
            "samples": len(self.certificates),
            "rejected": self.rejected,
            "applicable": len(app),
            "violations": len(self.violations),
            "min_delta_norm_applicable": min((c.delta_norm for c in app), default=None),
            "max_distance_applicable": max((c.distance for c in app), default=None),
            "max_measure_applicable": max((c.measure for c in app), default=None),
            "chain_ok": all(c.chain_delta_ok and c.chain_measure_ok and c.htilde_ok for c in app),
        }


def obstruction_sweep(ladder: HamiltonianLadder, m: int, n: int, count: int,
                      rng: np.random.Generator, params: SamplerParams | None = None,
                      max_attempts: int | None = None) -> ObstructionSweep:
    sampler = ObstructionSampler(ladder, m, n, params or SamplerParams())
    certs = []
    rejected = 0
    attempts = 0
    limit = max_attempts if max_attempts is not None else 4 * count + 10
    while len(certs) < count and attempts < limit:
        attempts += 1
        h, info = sampler.sample(rng)
        if h is None:
            rejected += 1
            continue
        certs.append(certify_obstruction(ladder, m, h, n))
    return ObstructionSweep(certs, rejected)
