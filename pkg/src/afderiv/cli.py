"""Command-line runner for the homotopy sweep and the counterexample certificates.

Exit codes: 0 success, 1 a certificate or instance failed, 2 invalid
configuration or input, 3 vacuous run (too few applicable samples).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import reports
from .config import ConfigError, ExperimentConfig
from .derivations import (
    NON_APPLICABLE, VIOLATED, LadderError, ObstructionSampler, SamplerParams, build_interval_ladder,
    build_scaled_ladder, candidate_path, certify_obstruction, ladder_scale, path_witness,
    periodicity_certificates,
)
from .fibered import CIRCLE, INTERVAL, EmbeddingSpec, FiberedElement, FiberSpace
from .homotopy import (
    HomotopyStageError, HypothesisError, nu_for, random_instance, run_homotopy,
)
from .linalg_core import BlockAlgebra

log = logging.getLogger("afderiv")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_VACUOUS = 0, 1, 2, 3
LOG_ENV = "AFDERIV_LOG_LEVEL"
NEGATIVE_CONTROLS = {"undersized-a2": "cx-interval", "oversized-nu": "homotopy"}
#: replay files keep ``h`` verbatim only up to this matrix size
MAX_INLINE_DIM = 16
MAX_REPLAYS = 5


def _seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


# homotopy

def _homotopy_item(dim: int, eps: float, k: int, seed: int, hc) -> dict:
    family = hc.families[k % len(hc.families)]
    target = hc.target_fraction * hc.nu_factor * nu_for(eps)
    return {"dim": dim, "epsilon": eps, "index": k, "seed": seed, "family": family, "target": target}


def run_homotopy_item(item: dict, samples: int, keep_trace: bool = False, inst=None):
    """Run one sweep item; returns (verdict, report dict, result or None)."""
    inst = inst or random_instance(item["dim"], item["target"], item["seed"], item["family"])
    try:
        res = run_homotopy(inst.u, inst.h, item["epsilon"], samples=samples, keep_trace=keep_trace)
    except HypothesisError as exc:
        return "rejected", {"hypothesis_error": str(exc)}, None, inst
    except HomotopyStageError as exc:
        return "failed", {"stage_error": str(exc), "stage": exc.stage}, None, inst
    verdict = "passed" if res.report.passed else "failed"
    return verdict, res.report.to_dict(), res, inst


def cmd_homotopy(cfg: ExperimentConfig, out: Path) -> int:
    hc = cfg.homotopy
    root = out / "homotopy"
    counts = {"passed": 0, "failed": 0, "rejected": 0}
    max_len = max_sup = max_a = 0.0
    failures = []
    for di, dim in enumerate(hc.dims):
        for ei, eps in enumerate(hc.epsilons):
            for k in range(hc.instances):
                item = _homotopy_item(dim, eps, k, _seed(cfg.seed, dim, ei, k), hc)
                verdict, rep, res, inst = run_homotopy_item(item, hc.samples, hc.trace)
                counts[verdict] += 1
                name = f"d{dim}_e{ei}_k{k:04d}"
                record = reports.envelope("homotopy-instance",
                                          {"item": item, "samples": hc.samples, "verdict": verdict,
                                           "report": rep})
                if verdict == "failed":
                    record["u"] = reports.encode_element(inst.u)
                    record["h"] = reports.encode_element(inst.h)
                    failures.append(name)
                    log.warning("instance %s failed: %s", name, rep.get("failures") or rep.get("stage_error"))
                if res is not None:
                    max_len = max(max_len, res.report.total_length)
                    max_sup = max(max_sup, res.report.sup_certified)
                    max_a = max(max_a, res.report.a_norm if np.isfinite(res.report.a_norm) else 0.0)
                    if hc.trace and res.verification is not None:
                        reports.write_trace(root / "traces" / f"{name}.csv", res.verification.trace)
                reports.write_json(root / "instances" / f"{name}.json", record)
    run = counts["passed"] + counts["failed"]
    summary = reports.envelope("homotopy-summary", {
        "config": asdict(hc), "seed": cfg.seed, "counts": counts,
        "pass_rate": (counts["passed"] / run) if run else None,
        "hypothesis_rejections": counts["rejected"],
        "max_length": max_len, "max_certified_commutator": max_sup, "max_correction_norm": max_a,
        "failures": failures,
        "exit_code": EXIT_FAIL if counts["failed"] else EXIT_OK,
    })
    reports.write_json(root / "summary.json", summary)
    print(f"homotopy: {counts['passed']} passed, {counts['failed']} failed, "
          f"{counts['rejected']} rejected by the hypothesis check; max length {max_len:.4f}, "
          f"max certified commutator {max_sup:.4f}")
    return summary["exit_code"]


# interval counterexample

def interval_ladder(ic):
    specs = [EmbeddingSpec(tuple(tuple(r) for r in mat), INTERVAL) for mat in ic.chi]
    overrides = {int(k): float(v) for k, v in ic.gap_overrides.items()}
    return build_interval_ladder(specs, BlockAlgebra(tuple(ic.base)), windows=ic.windows,
                                 gap_overrides=overrides, space=FiberSpace.interval(ic.grid),
                                 seed=0)


def interval_sample(ladder, m: int, n: int, seed: int, sampler: ObstructionSampler | None = None):
    sampler = sampler or ObstructionSampler(ladder, m, n, SamplerParams())
    h, info = sampler.sample(np.random.default_rng(seed))
    return h, info


def cmd_cx_interval(cfg: ExperimentConfig, out: Path) -> int:
    ic = cfg.interval
    root = out / "cx-interval"
    ladder = interval_ladder(ic)
    gaps = {n: ladder.gap_coefficient(n) for n in range(2, ladder.levels + 1)}
    groups = {}
    applicable = violations = replays = 0
    chain_ok = True
    for key in sorted(ic.samples):
        m, n = (int(v) for v in key.split(","))
        count = ic.samples[key]
        sampler = ObstructionSampler(ladder, m, n, SamplerParams())
        certs, rejected = [], 0
        attempt = 0
        while len(certs) < count and attempt < 4 * count + 10:
            seed = _seed(cfg.seed, m, n, attempt)
            attempt += 1
            h, info = interval_sample(ladder, m, n, seed, sampler)
            if h is None:
                rejected += 1
                continue
            c = certify_obstruction(ladder, m, h, n)
            d = c.to_dict()
            d["seed"] = seed
            d["sampler"] = asdict(info)
            certs.append(d)
            if c.applicable:
                applicable += 1
                chain_ok &= c.chain_delta_ok and c.chain_measure_ok and c.htilde_ok
            if c.verdict == VIOLATED:
                violations += 1
                if replays < MAX_REPLAYS:
                    replays += 1
                    rec = reports.envelope("interval-replay", {
                        "interval": asdict(ic), "m": m, "n": n, "seed": seed,
                        "verdict": c.verdict, "delta_norm": c.delta_norm})
                    if h.algebra.block_dims[0] <= MAX_INLINE_DIM:
                        rec["h"] = h.to_dict()
                    reports.write_json(root / "failures" / f"m{m}_n{n}_{seed}.json", rec)
        app = [c for c in certs if c["applicable"]]
        groups[key] = {
            "samples": len(certs), "rejected": rejected, "applicable": len(app),
            "violations": sum(c["verdict"] == VIOLATED for c in certs),
            "non_applicable": sum(c["verdict"] == NON_APPLICABLE for c in certs),
            "min_delta_norm": min((c["delta_norm"] for c in app), default=None),
            "max_distance": max((c["distance"] for c in app), default=None),
            "max_measure": max((c["measure"] for c in app), default=None),
        }
        reports.write_json(root / f"certificates_m{m}_n{n}.json",
                           reports.envelope("interval-certificates", {"m": m, "n": n, "certificates": certs}))
    vacuous = applicable < ic.min_applicable
    code = EXIT_FAIL if violations else (EXIT_VACUOUS if vacuous else EXIT_OK)
    summary = reports.envelope("interval-summary", {
        "config": asdict(ic), "seed": cfg.seed, "gap_coefficients": gaps,
        "windows": list(ladder.windows), "groups": groups, "applicable": applicable,
        "violations": violations, "chain_ok": chain_ok, "vacuous": vacuous, "exit_code": code,
    })
    reports.write_json(root / "summary.json", summary)
    print(f"cx-interval: gap coefficients {gaps}; {applicable} applicable samples, "
          f"{violations} violations" + ("; VACUOUS" if vacuous else ""))
    return code


# circle counterexample

def circle_ladder(cc):
    specs = [EmbeddingSpec(tuple(tuple(r) for r in mat), CIRCLE) for mat in cc.chi]
    scales = cc.scales if cc.scales is not None else [1.0] * len(specs)
    return build_scaled_ladder(specs, scales, base=BlockAlgebra(tuple(cc.base)),
                               space=FiberSpace.circle(cc.grid))


def circle_candidate(ladder, cc, level: int, seed: int):
    path = candidate_path(ladder, level, np.random.default_rng(seed), target=cc.target, times=cc.times)
    return path_witness(ladder, level, path)


def cmd_cx_circle(cfg: ExperimentConfig, out: Path) -> int:
    cc = cfg.circle
    root = out / "cx-circle"
    ladder = circle_ladder(cc)
    periodic = cc.scales is None or all(float(a).is_integer() for a in cc.scales)
    certs = periodicity_certificates(ladder, cc.periodicity_samples,
                                     np.random.default_rng(_seed(cfg.seed, 0)))
    a = ladder_scale(ladder)
    gap_ok = all(c.spectral_gap >= a - 1e-9 for c in certs[1:])
    period_ok = all(c.integral and c.periodic for c in certs) if periodic else True
    witnesses = []
    evaded = applicable = contradictions = 0
    levels = list(range(2, ladder.levels + 1))
    for k in range(cc.candidates):
        level = levels[k % len(levels)]
        seed = _seed(cfg.seed, level, k)
        w = circle_candidate(ladder, cc, level, seed)
        d = w.to_dict()
        d.update(level=level, seed=seed)
        witnesses.append(d)
        applicable += w.applicable
        contradictions += w.contradiction
        if w.evades:
            evaded += 1
            reports.write_json(root / "failures" / f"candidate_{k:04d}.json",
                               reports.envelope("circle-replay", {
                                   "circle": asdict(cc), "level": level, "seed": seed,
                                   "contradiction": w.contradiction, "evades": w.evades}))
    vacuous = cc.candidates > 0 and applicable == 0
    failed = evaded > 0 or not period_ok or not gap_ok
    code = EXIT_FAIL if failed else (EXIT_VACUOUS if vacuous else EXIT_OK)
    reports.write_json(root / "witnesses.json",
                       reports.envelope("circle-witnesses", {"witnesses": witnesses}))
    summary = reports.envelope("circle-summary", {
        "config": asdict(cc), "seed": cfg.seed, "a": a, "periodic": periodic,
        "level_certificates": [c.to_dict() for c in certs],
        "periodicity_ok": period_ok, "gap_ok": gap_ok, "candidates": cc.candidates,
        "applicable": applicable, "contradictions": contradictions, "evaded": evaded,
        "vacuous": vacuous, "exit_code": code,
    })
    reports.write_json(root / "summary.json", summary)
    print(f"cx-circle: periodicity {'ok' if period_ok else 'FAILED'}, gap >= a: {gap_ok}; "
          f"{contradictions}/{cc.candidates} candidates give a contradiction witness, {evaded} evade")
    return code


# verify

def _verify_homotopy(rec: dict) -> tuple[bool, str]:
    item = rec["item"]
    inst = None
    if "u" in rec and "h" in rec:
        from .homotopy import Instance
        inst = Instance(reports.decode_element(rec["u"]), reports.decode_element(rec["h"]),
                        item["family"], item["dim"], item["seed"], item["target"])
    verdict, _, _, _ = run_homotopy_item(item, rec.get("samples", 200), inst=inst)
    return verdict == rec["verdict"], verdict


def _verify_interval(rec: dict) -> tuple[bool, str]:
    ic = cfgmod._section(cfgmod.IntervalConfig, rec["interval"], "interval")
    ladder = interval_ladder(ic)
    if "h" in rec:
        h = FiberedElement.from_dict(rec["h"])
    else:
        h, _ = interval_sample(ladder, rec["m"], rec["n"], rec["seed"])
    if h is None:
        return False, "sample rejected"
    c = certify_obstruction(ladder, rec["m"], h, rec["n"])
    return c.verdict == rec["verdict"], c.verdict


def _verify_circle(rec: dict) -> tuple[bool, str]:
    cc = cfgmod._section(cfgmod.CircleConfig, rec["circle"], "circle")
    ladder = circle_ladder(cc)
    w = circle_candidate(ladder, cc, rec["level"], rec["seed"])
    same = w.contradiction == rec["contradiction"] and w.evades == rec["evades"]
    return same, "evades" if w.evades else ("contradiction" if w.contradiction else "no witness")


def cmd_verify(path: Path) -> int:
    try:
        rec = reports.read_json(path)
        kind = reports.check_envelope(rec)
    except (OSError, ValueError) as exc:
        print(f"verify: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    runners = {"homotopy-instance": _verify_homotopy, "interval-replay": _verify_interval,
               "circle-replay": _verify_circle}
    if kind in runners:
        same, verdict = runners[kind](rec)
        print(f"verify: {kind} re-ran to '{verdict}' "
              + ("(matches the recorded verdict)" if same else "(DIFFERS from the recorded verdict)"))
        return EXIT_OK if same else EXIT_FAIL
    if kind.endswith("summary"):
        code = rec.get("exit_code")
        print(f"verify: {kind}, recorded exit code {code}")
        return EXIT_OK if code in (EXIT_OK, EXIT_FAIL, EXIT_VACUOUS) else EXIT_CONFIG
    print(f"verify: {kind} records carry no verdict to re-run")
    return EXIT_OK


# entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="afderiv", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in [("homotopy", "randomized sweep of the homotopy construction"),
                        ("cx-interval", "obstruction certificates on the interval ladder"),
                        ("cx-circle", "periodicity and winding witnesses on the circle ladder")]:
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", type=Path, help="TOML configuration file")
        s.add_argument("--seed", type=int, help="override the configured seed")
        s.add_argument("--out", type=Path, help="output directory")
        s.add_argument("--instances", type=int,
                       help="instances per (dim, eps), samples per (m, n), or candidates")
        s.add_argument("--negative-control", choices=sorted(NEGATIVE_CONTROLS),
                       help="run a deliberately broken variant")
    v = sub.add_parser("verify", help="re-run a replay record or check a report")
    v.add_argument("report", type=Path)
    return p


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = str(args.out)
    if args.instances is not None:
        if args.instances < 0:
            raise ConfigError("--instances must be >= 0")
        cfg.homotopy.instances = args.instances
        cfg.interval.samples = {k: args.instances for k in cfg.interval.samples}
        cfg.circle.candidates = args.instances
    nc = args.negative_control
    if nc is not None:
        if NEGATIVE_CONTROLS[nc] != args.command:
            raise ConfigError(f"negative control {nc!r} applies to {NEGATIVE_CONTROLS[nc]}")
        if nc == "undersized-a2":
            cfg.interval.gap_overrides = {**cfg.interval.gap_overrides, "2": 1.0}
        else:
            cfg.homotopy.nu_factor = 10.0
    return cfgmod.validate(cfg)


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get(LOG_ENV, "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args.report)
    try:
        cfg = _apply_overrides(cfgmod.load(args.config), args)
    except ConfigError as exc:
        print(f"afderiv: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.out)
    try:
        if args.command == "homotopy":
            return cmd_homotopy(cfg, out)
        if args.command == "cx-interval":
            return cmd_cx_interval(cfg, out)
        return cmd_cx_circle(cfg, out)
    except (LadderError, ValueError) as exc:
        print(f"afderiv: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
