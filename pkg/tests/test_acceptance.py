"""Acceptance criteria 1-9, each at its stated tolerance.

Every check returns ``(ok, detail)``; the pytest wrappers record a one-line
verdict that the terminal summary prints. Run this file directly to get the
same lines without pytest.
"""

import math
import sys
import time
from functools import lru_cache

import numpy as np
import pytest

from afderiv.derivations import (
    VIOLATED, AbelianTower, averaged_cobounding, build_interval_ladder, build_periodic_ladder,
    build_scaled_ladder, candidate_path, cobounding_defect, ladder_scale, monte_carlo_cobounding,
    obstruction_sweep, path_witness, periodicity_certificates, tensor_tower,
)
from afderiv.fibered import CIRCLE, EmbeddingSpec, FiberSpace
from afderiv.homotopy import (
    FAMILIES, MollifierSpec, mollify, nu_for, random_instance, run_homotopy,
)
from afderiv.linalg_core import (
    BlockAlgebra, commutator, eig_hermitian, riesz_projection, spectral_projection,
)

RESULTS: dict[int, str] = {}


def seed_for(*parts):
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def haar(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# 1 and 3 share the homotopy sweep

DIMS = (2, 4, 8, 16, 32)
EPSILONS = (0.5, 1.0)
PER_CELL = 200


@lru_cache(maxsize=None)
def homotopy_sweep():
    t0 = time.perf_counter()
    rows = []
    for dim in DIMS:
        for ei, eps in enumerate(EPSILONS):
            for k in range(PER_CELL):
                inst = random_instance(dim, 0.999 * nu_for(eps), seed_for(1, dim, ei, k),
                                       FAMILIES[k % len(FAMILIES)])
                try:
                    rep = run_homotopy(inst.u, inst.h, eps).report
                    rows.append((dim, eps, k, rep, None))
                except Exception as exc:  # a stage error is a failed instance here
                    rows.append((dim, eps, k, None, repr(exc)))
    return rows, time.perf_counter() - t0


def check_homotopy_sweep():
    rows, elapsed = homotopy_sweep()
    bad = []
    max_len = max_sup = max_end = 0.0
    for dim, eps, k, rep, err in rows:
        if rep is None:
            bad.append((dim, eps, k, err))
            continue
        end = max(rep.start_error, rep.end_error)
        ok = (rep.passed and end <= 1e-8 and rep.sup_certified < eps
              and rep.total_length <= 3 * math.pi + eps)
        if not ok:
            bad.append((dim, eps, k, rep.failures))
        max_len = max(max_len, rep.total_length / (3 * math.pi + eps))
        max_sup = max(max_sup, rep.sup_certified / eps)
        max_end = max(max_end, end)
    ok = not bad and elapsed < 300
    detail = (f"{len(rows) - len(bad)}/{len(rows)} pass; max sup||[h,u_t]||/eps {max_sup:.3f}; "
              f"max length/(3pi+eps) {max_len:.3f}; max endpoint error {max_end:.1e}; "
              f"{elapsed:.0f}s" + (f"; first failure {bad[0]}" if bad else ""))
    return ok, detail


def check_surgery_localization():
    rows, _ = homotopy_sweep()
    passing = [r[3] for r in rows if r[3] is not None and r[3].passed]
    loc = max(r.localization_defect for r in passing)
    step = max(r.step_conjugation_defect - 2 * r.delta for r in passing)
    ok = bool(passing) and loc <= 1e-10 and step <= 1e-10
    return ok, (f"{len(passing)} passing instances; max ||(1-W_k) v e_k v* (1-W_k)|| {loc:.1e}; "
                f"max ||v k v* - k|| - 2 delta {step:.3f}")


# 2

def check_mollifier_contract(pairs=500):
    rng = np.random.default_rng(seed_for(2))
    worst = dict(norm=0.0, comm=-np.inf, dist=-np.inf, band=0.0)
    for _ in range(pairs):
        d = int(rng.integers(2, 17))
        alg = BlockAlgebra((d,))
        h = alg.random_self_adjoint(rng, scale=float(rng.uniform(0.1, 2.0)))
        if rng.random() < 0.5:
            u = alg.random_unitary(rng)
        else:
            # near-commuting pair, the regime the homotopy works in
            inst = random_instance(d, float(rng.uniform(1e-3, 0.05)), int(rng.integers(2 ** 31)))
            u, h = inst.u, inst.h
        spec = MollifierSpec(float(rng.uniform(0.02, 1.0)))
        sd = eig_hermitian(h)
        x = mollify(u, h, spec, sd)
        c = commutator(h, u).norm()
        worst["norm"] = max(worst["norm"], x.norm() - 1)
        worst["comm"] = max(worst["comm"], commutator(h, x).norm() - c)
        worst["dist"] = max(worst["dist"], (x - u).norm() - spec.moment * c)
        for t in sd.spectrum:
            below = sd.projection(lambda w: w < t)
            above = sd.projection(lambda w: w >= t + spec.delta)
            worst["band"] = max(worst["band"], (below @ x @ above).norm())
    ok = (worst["norm"] <= 1e-12 and worst["comm"] <= 1e-10 and worst["dist"] <= 1e-10
          and worst["band"] <= 1e-12)
    return ok, (f"{pairs} pairs; max ||x||-1 {worst['norm']:.1e}; max ||[h,x]||-||[h,u]|| "
                f"{worst['comm']:.1e}; max ||x-u||-M_f||[h,u]|| {worst['dist']:.2e}; "
                f"max band defect {worst['band']:.1e}")


# 4 and 5 share the obstruction sweep

INTERVAL_GROUPS = {(1, 1): 420, (2, 1): 30, (2, 2): 50}


def interval_ladder(overrides=None):
    specs = [EmbeddingSpec(((8,),)), EmbeddingSpec(((8,),))]
    return build_interval_ladder(specs, BlockAlgebra((1,)), space=FiberSpace.interval(129),
                                 gap_overrides=overrides)


@lru_cache(maxsize=None)
def obstruction_runs():
    t0 = time.perf_counter()
    lad = interval_ladder()
    certs = []
    for (m, n), count in INTERVAL_GROUPS.items():
        sweep = obstruction_sweep(lad, m, n, count, np.random.default_rng(seed_for(4, m, n)))
        certs.extend(sweep.certificates)
    elapsed = time.perf_counter() - t0
    neg = interval_ladder({2: 1.0})
    control = obstruction_sweep(neg, 1, 1, 20, np.random.default_rng(seed_for(4, 0)))
    return lad, certs, elapsed, control


def check_obstruction():
    lad, certs, elapsed, control = obstruction_runs()
    app = [c for c in certs if c.applicable]
    viol = [c for c in app if not c.delta_norm > 1]
    neg = sum(c.verdict == VIOLATED for c in control.certificates)
    ok = len(app) >= 500 and not viol and len(app) >= 100 and neg >= 1 and elapsed < 120
    a = [lad.gap_coefficient(k) for k in (2, 3)]
    return ok, (f"a_2={a[0]:.3f}, a_3={a[1]:.1f}; {len(app)} applicable of {len(certs)}, "
                f"{len(viol)} with ||delta(h)|| <= 1, min ||delta(h)|| "
                f"{min(c.delta_norm for c in app):.3g}; negative control a_2=1: "
                f"{neg}/{len(control.certificates)} violations; {elapsed:.0f}s")


def check_inequality_chain():
    _, certs, _, _ = obstruction_runs()
    app = [c for c in certs if c.applicable]
    grid_slack = 1e-12
    delta_gap = min(c.delta_norm - c.chain_lower_bound for c in app)
    measure_gap = max(c.measure_htilde - c.measure_chain_bound for c in app)
    htilde = max(c.h_minus_htilde - 2 * c.off_diagonal for c in app)
    ok = bool(app) and delta_gap >= -1e-8 and measure_gap <= grid_slack and htilde <= 1e-12
    return ok, (f"{len(app)} applicable; min ||delta(h)|| - chain bound {delta_gap:.3g}; "
                f"max mu(Sp h~) - (mu(Sp h) + 2 xi ||h-h~||) {measure_gap:.3g}; "
                f"max ||h-h~|| - 2||Qh(1-Q)|| {htilde:.1e}")


# 6

def check_periodicity():
    specs = [EmbeddingSpec(((4,),), CIRCLE), EmbeddingSpec(((4,),), CIRCLE)]
    lad = build_periodic_ladder(specs, space=FiberSpace.circle(128))
    certs = periodicity_certificates(lad, 20, np.random.default_rng(seed_for(6)))
    integ = max(c.integrality_error for c in certs)
    conj = max(c.conjugation_error for c in certs)
    ok = len(certs) == 3 and integ <= 1e-10 and conj <= 1e-9
    return ok, f"{len(certs)} levels; max integrality error {integ:.1e}; max conjugation error {conj:.1e}"


# 7

def check_winding_obstruction(candidates=50):
    specs = [EmbeddingSpec(((4,),), CIRCLE), EmbeddingSpec(((4,),), CIRCLE)]
    lad = build_scaled_ladder(specs, [1.0, 1.0], space=FiberSpace.circle(128))
    a = ladder_scale(lad)
    witnesses = 0
    evaded = 0
    worst_comm = 0.0
    min_det = np.inf
    for k in range(candidates):
        level = 2 + k % 2
        path = candidate_path(lad, level, np.random.default_rng(seed_for(7, k)))
        w = path_witness(lad, level, path)
        worst_comm = max(worst_comm, w.commutator_sup)
        min_det = min(min_det, w.min_abs_det)
        if (w.applicable and w.invertible and w.min_abs_det > 0 and w.winding_start == 0
                and w.winding_end == w.rank and w.rank > 0 and w.contradiction):
            witnesses += 1
        evaded += w.evades
    ok = a == 1.0 and witnesses == candidates and evaded == 0
    return ok, (f"a={a}; {witnesses}/{candidates} contradiction witnesses, {evaded} evade; "
                f"max sup||[H,u_t]|| {worst_comm:.3f}; min |det E_1 u E_1| {min_det:.3f}")


# 8

def check_averaging(towers=10, unitaries=50):
    rng = np.random.default_rng(seed_for(8))
    worst = 0.0
    mc_err = 0.0
    for _ in range(towers):
        d1, d2 = (int(v) for v in rng.integers(2, 4, size=2))
        extra = int(rng.integers(1, 3))
        base = tensor_tower([d1, d2], extra)
        q = haar(rng, base.dim)
        tower = AbelianTower(tuple(tuple(q @ p @ q.conj().T for p in ps) for ps in base.levels))
        g = rng.normal(size=(base.dim,) * 2) + 1j * rng.normal(size=(base.dim,) * 2)
        H = (g + g.conj().T) / 2
        H /= np.linalg.norm(H, 2)
        h = averaged_cobounding(H, tower)
        for _ in range(unitaries):
            worst = max(worst, cobounding_defect(h, H, tower.random_unitary(rng)))
        mc = monte_carlo_cobounding(H, tower, samples=10 ** 4, seed=int(rng.integers(2 ** 31)))
        mc_err = max(mc_err, float(np.linalg.norm(mc - 1j * h.blocks[0], 2)))
    ok = worst <= 1e-10 and mc_err <= 1e-2
    return ok, (f"{towers} two-level towers x {unitaries} unitaries; max ||[ih,g]-delta(g)|| "
                f"{worst:.1e}; Monte-Carlo vs closed form {mc_err:.1e}")


# 9

def check_riesz(instances=100):
    rng = np.random.default_rng(seed_for(9))
    worst = 0.0
    done = 0
    while done < instances:
        d = int(rng.integers(3, 13))
        h = BlockAlgebra((d,)).random_self_adjoint(rng)
        sd = eig_hermitian(h)
        w = sd.spectrum
        i = int(rng.integers(0, d))
        j = int(rng.integers(i, min(d, i + 3)))
        center = (w[i] + w[j]) / 2
        inner = (w[j] - w[i]) / 2
        outer = min([abs(v - center) for k, v in enumerate(w) if not i <= k <= j], default=np.inf)
        # radius with every eigenvalue at least 0.1 radius away from the contour
        lo, hi = inner / 0.9, outer / 1.1
        if not lo < hi:
            continue
        radius = float(rng.uniform(max(lo, 1e-3), min(hi, lo + 5.0)))
        r = riesz_projection(h, center, radius, 64, margin=0.1 * radius)
        exact = spectral_projection(sd, (center - radius, center + radius))
        worst = max(worst, (r.projection - exact).norm())
        done += 1
    return worst <= 1e-8, f"{instances} instances, 64 nodes, margin >= 0.1 radius; max deviation {worst:.1e}"


CHECKS = {
    1: ("homotopy sweep", check_homotopy_sweep),
    2: ("mollifier contract", check_mollifier_contract),
    3: ("surgery localization", check_surgery_localization),
    4: ("obstruction certificate", check_obstruction),
    5: ("inequality chain", check_inequality_chain),
    6: ("periodicity", check_periodicity),
    7: ("winding obstruction", check_winding_obstruction),
    8: ("averaging", check_averaging),
    9: ("Riesz projection", check_riesz),
}


def verdict_line(k: int, ok: bool, detail: str) -> str:
    return f"criterion {k} ({CHECKS[k][0]}): {'PASS' if ok else 'FAIL'} - {detail}"


def _run(k):
    ok, detail = CHECKS[k][1]()
    line = verdict_line(k, ok, detail)
    RESULTS[k] = line
    print(line)
    assert ok, line


@pytest.mark.parametrize("k", sorted(CHECKS))
def test_criterion(k):
    _run(k)


if __name__ == "__main__":
    failed = 0
    for k in sorted(CHECKS):
        ok, detail = CHECKS[k][1]()
        print(verdict_line(k, ok, detail), flush=True)
        failed += not ok
    sys.exit(1 if failed else 0)
