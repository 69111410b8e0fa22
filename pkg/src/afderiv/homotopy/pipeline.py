"""End-to-end homotopy: mollify, bin, surgery, assemble, verify."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..linalg_core import CERT_TOL, Element, UnitaryPath, commutator, eig_hermitian
from .assemble import AssembledPath, AssemblyError, assemble_path
from .mollifier import MollifierSpec, mollify
from .surgery import BinDecomposition, SurgeryError, bin_projections, localization_defects, surgery

DEFAULT_SAMPLES = 200
ENDPOINT_TOL = 1e-8
JOINT_TOL = 1e-10
UNITARY_TOL = 1e-10


class HypothesisError(ValueError):
    """``||[h, u]||`` is not below the admissible threshold."""


class HomotopyStageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


def nu_for(epsilon: float) -> float:
    return epsilon / 40


def delta_for(epsilon: float) -> float:
    return epsilon / 16


def length_budget(epsilon: float) -> float:
    return 3 * math.pi + epsilon


def _batched_norm(c: np.ndarray) -> np.ndarray:
    """Operator norms of a stack of matrices via the largest eigenvalue of ``c* c``."""
    gram = np.conj(np.swapaxes(c, 1, 2)) @ c
    return np.sqrt(np.maximum(np.linalg.eigvalsh(gram)[:, -1], 0.0))


@dataclass
class SegmentCheck:
    label: str
    length: float
    samples: int
    sup_sampled: float
    lipschitz_slack: float
    unitarity_defect: float


@dataclass
class PathVerification:
    segments: list[SegmentCheck]
    sup_sampled: float
    sup_certified: float
    unitarity_defect: float
    start_error: float
    end_error: float
    joint_errors: list[float]
    trace: list[tuple[float, int, str, float, float]] = field(default_factory=list, repr=False)

    @property
    def lipschitz_slack(self) -> float:
        return max((s.lipschitz_slack for s in self.segments), default=0.0)


def verify_path(path: UnitaryPath, h: Element, start: Element, end: Element, epsilon: float,
                samples: int = DEFAULT_SAMPLES, max_refinements: int = 4,
                keep_trace: bool = False) -> PathVerification:
    """Sample ``||[h, u_t]||`` and certify its supremum on every segment.

    Between samples ``s`` and ``s'`` of a segment with generator ``G``,
    ``||[h, u_s] - [h, u_s']|| <= 2 ||h - c|| ||G|| |s - s'|`` where ``c`` is
    the centre of the spectrum of ``h``. Every parameter is within half a
    grid step of a sample, which gives the slack. Segments whose certified
    bound reaches ``epsilon`` are resampled at doubled density.
    """
    if samples < 2:
        raise ValueError("need at least two samples per segment")
    spec = eig_hermitian(h).spectrum
    radius = float(spec[-1] - spec[0]) / 2 if spec.size else 0.0
    checks: list[SegmentCheck] = []
    trace = []
    n_seg = len(path.segments)
    for idx, seg in enumerate(path.segments):
        m = samples
        for attempt in range(max_refinements + 1):
            s = np.linspace(0.0, 1.0, m)
            vals = seg.sample_blocks(s)
            comm = np.zeros(m)
            unit = np.zeros(m)
            for ub, hb in zip(vals, h.blocks):
                if not ub.shape[1]:
                    continue
                c = hb[None] @ ub - ub @ hb[None]
                comm = np.maximum(comm, _batched_norm(c))
                gram = np.conj(np.swapaxes(ub, 1, 2)) @ ub - np.eye(ub.shape[1])
                unit = np.maximum(unit, np.max(np.abs(np.linalg.eigvalsh(gram)), axis=1))
            slack = 2 * radius * seg.length * (1.0 / (m - 1)) / 2
            sup = float(comm.max())
            if sup + slack < epsilon or attempt == max_refinements:
                break
            m = 2 * m - 1
        checks.append(SegmentCheck(seg.label, seg.length, m, sup, slack, float(unit.max())))
        if keep_trace:
            for si, ci, ui in zip(s, comm, unit):
                trace.append(((idx + si) / n_seg, idx, seg.label, float(ci), float(ui)))
    if checks:
        sup_sampled = max(c.sup_sampled for c in checks)
        sup_cert = max(c.sup_sampled + c.lipschitz_slack for c in checks)
        unit_def = max(c.unitarity_defect for c in checks)
    else:
        sup_sampled = sup_cert = commutator(h, path.anchor).norm()
        unit_def = path.anchor.defects()["unitary"]
    return PathVerification(
        segments=checks,
        sup_sampled=sup_sampled,
        sup_certified=sup_cert,
        unitarity_defect=unit_def,
        start_error=(path.start - start).norm(),
        end_error=(path.end - end).norm(),
        joint_errors=path.joint_errors(),
        trace=trace,
    )


@dataclass
class HomotopyReport:
    epsilon: float
    nu: float
    delta: float
    commutator_norm: float
    moment: float
    passed: bool
    failures: list[str]
    # stage diagnostics
    x_minus_u: float = math.nan
    x_commutator: float = math.nan
    bin_count: int = 0
    near_projection_defect: float = math.nan
    selection_gap: float = math.nan
    smallest_singular_value: float = math.nan
    v_minus_u: float = math.nan
    v_bound: float = math.nan
    localization_defect: float = math.nan
    step_conjugation_defect: float = math.nan
    a_norm: float = math.nan
    commutant_defect: float = math.nan
    segment_lengths: dict = field(default_factory=dict)
    total_length: float = 0.0
    length_budget: float = 0.0
    # verification
    sup_sampled: float = math.nan
    lipschitz_slack: float = math.nan
    sup_certified: float = math.nan
    unitarity_defect: float = math.nan
    start_error: float = math.nan
    end_error: float = math.nan
    max_joint_error: float = 0.0
    samples_per_segment: dict = field(default_factory=dict)
    stage_error: str | None = None
    instance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class HomotopyResult:
    report: HomotopyReport
    path: UnitaryPath | None
    bins: BinDecomposition | None = None
    v: Element | None = None
    verification: PathVerification | None = None


def run_homotopy(u: Element, h: Element, epsilon: float, *, nu: float | None = None,
                 delta: float | None = None, samples: int = DEFAULT_SAMPLES,
                 check_hypothesis: bool = True, keep_trace: bool = False) -> HomotopyResult:
    """Build and verify a path from 1 to ``u`` with ``||[h, u_t]|| < epsilon``.

    Stage failures raise :class:`HomotopyStageError`; a path that is built but
    misses a bound comes back with ``report.passed = False``.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    nu = nu_for(epsilon) if nu is None else nu
    delta = delta_for(epsilon) if delta is None else delta
    if u.defects()["unitary"] > CERT_TOL:
        raise ValueError("u is not unitary")
    sd = eig_hermitian(h)
    c = commutator(h, u).norm()
    if check_hypothesis and not c < nu:
        raise HypothesisError(f"||[h,u]|| = {c:.4e} is not below nu = {nu:.4e}")
    spec = MollifierSpec(delta)
    report = HomotopyReport(epsilon=epsilon, nu=nu, delta=delta, commutator_norm=c,
                            moment=spec.moment, passed=False, failures=[],
                            length_budget=length_budget(epsilon))

    x = mollify(u, h, spec, sd)
    report.x_minus_u = (x - u).norm()
    report.x_commutator = commutator(h, x).norm()

    bins = bin_projections(h, delta, sd)
    report.bin_count = bins.count
    try:
        sres = surgery(x, bins)
    except SurgeryError as exc:
        raise HomotopyStageError("surgery", str(exc)) from exc
    v = sres.v
    mu = report.x_minus_u
    report.near_projection_defect = sres.near_projection_defect
    report.selection_gap = sres.selection_gap
    report.smallest_singular_value = sres.smallest_singular_value
    report.v_minus_u = (v - u).norm()
    report.v_bound = 10 * (mu + math.sqrt(mu))
    report.localization_defect, report.step_conjugation_defect = localization_defects(v, bins)

    try:
        asm: AssembledPath = assemble_path(u, v, bins)
    except AssemblyError as exc:
        raise HomotopyStageError("assemble", str(exc)) from exc
    report.a_norm = asm.a.norm()
    report.commutant_defect = asm.commutant_defect
    path = asm.path.drop_trivial(1e-14)
    report.segment_lengths = {s.label: s.length for s in asm.path.segments}
    report.total_length = path.length

    ver = verify_path(path, h, u.algebra.identity(), u, epsilon, samples, keep_trace=keep_trace)
    report.sup_sampled = ver.sup_sampled
    report.lipschitz_slack = ver.lipschitz_slack
    report.sup_certified = ver.sup_certified
    report.unitarity_defect = ver.unitarity_defect
    report.start_error = ver.start_error
    report.end_error = ver.end_error
    report.max_joint_error = max(ver.joint_errors, default=0.0)
    report.samples_per_segment = {s.label: s.samples for s in ver.segments}

    fails = []
    if report.start_error > ENDPOINT_TOL or report.end_error > ENDPOINT_TOL:
        fails.append(f"endpoint error {max(report.start_error, report.end_error):.2e}")
    if report.max_joint_error > JOINT_TOL:
        fails.append(f"joint error {report.max_joint_error:.2e}")
    if report.unitarity_defect > UNITARY_TOL:
        fails.append(f"unitarity defect {report.unitarity_defect:.2e}")
    if not report.sup_certified < epsilon:
        fails.append(f"certified sup ||[h,u_t]|| = {report.sup_certified:.4f} >= {epsilon}")
    if report.total_length > report.length_budget:
        fails.append(f"length {report.total_length:.4f} exceeds {report.length_budget:.4f}")
    report.failures = fails
    report.passed = not fails
    return HomotopyResult(report, path, bins, v, ver)
