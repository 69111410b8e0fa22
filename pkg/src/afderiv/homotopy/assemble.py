"""Four-piece unitary path from 1 to ``u`` once ``v`` has been localized.

Pieces, in the order they are traversed from 1:

* ``commutant``: ``s -> e^{isA}`` with ``e^{iA} = z_1 w_1 v``, a unitary
  commuting with the step element ``k``; ``A`` is taken blockwise in the bins.
* ``e_swap``: ``s -> e^{-s G_z} z_1 w_1 v``, undoing ``z_1``.
* ``f_swap``: ``s -> e^{-s G_w} w_1 v``, undoing ``w_1``.
* ``correction``: ``s -> e^{-isa} v`` with ``e^{ia} = v u*``, ending at ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..linalg_core import BlockAlgebra, Element, Segment, UnitaryPath, rotation_generator, unitary_log
from .surgery import BinDecomposition


class AssemblyError(RuntimeError):
    def __init__(self, segment: str, message: str):
        super().__init__(f"[{segment}] {message}")
        self.segment = segment


@dataclass(frozen=True, eq=False)
class AssembledPath:
    path: UnitaryPath
    a: Element
    commutant_generator: Element
    #: ``||[z_1 w_1 v, k]||``, zero up to round-off
    commutant_defect: float


def _exp(g: Element) -> Element:
    return Segment(g.algebra.identity(), g).end


def _blockwise_log(w: Element, bins: BinDecomposition) -> Element:
    """Self-adjoint ``A`` with ``e^{iA} = w``, built inside each bin separately."""
    alg = w.algebra
    out = [np.zeros_like(b) for b in w.blocks]
    for k in bins.indices:
        e = bins.e(k)
        for i, (eb, wb) in enumerate(zip(e.blocks, w.blocks)):
            vals, vecs = np.linalg.eigh((eb + eb.conj().T) / 2)
            basis = vecs[:, vals > 0.5]
            if not basis.shape[1]:
                continue
            corner = basis.conj().T @ wb @ basis
            # clean the tiny leakage out of the bin before taking the log
            uu, _, vh = np.linalg.svd(corner)
            local = unitary_log(_single(uu @ vh))
            out[i] += basis @ local.blocks[0] @ basis.conj().T
    return Element(alg, tuple(out)).hermitian_part()


def _single(m: np.ndarray) -> Element:
    return Element(BlockAlgebra((m.shape[0],)), (m,))


def assemble_path(u: Element, v: Element, bins: BinDecomposition) -> AssembledPath:
    alg = u.algebra
    one = alg.identity()
    zero = alg.zeros()
    vs = v.adjoint()
    try:
        a = unitary_log(v @ u.adjoint())
    except ValueError as exc:
        raise AssemblyError("correction", str(exc)) from exc

    lo, hi = bins.indices[0] - 2, bins.indices[-1] + 3
    start = lo - lo % 2
    e_tail = {m: bins.tail(m) for m in range(start, hi + 3)}
    f_tail = {m: v @ e_tail[m] @ vs for m in e_tail}

    g_w = zero
    try:
        for m in range(start, hi + 1, 2):
            p = e_tail[m + 1] - f_tail[m + 2]
            q = f_tail[m + 1] - f_tail[m + 2]
            g_w = g_w + rotation_generator(p, q, one)
    except ValueError as exc:
        raise AssemblyError("f_swap", str(exc)) from exc
    w1 = _exp(g_w)

    g_z = zero
    try:
        for m in range(start, hi + 1, 2):
            p = e_tail[m] - e_tail[m + 1]
            q = f_tail[m] - e_tail[m + 1]
            g_z = g_z + rotation_generator(p, q, one)
    except ValueError as exc:
        raise AssemblyError("e_swap", str(exc)) from exc
    z1 = _exp(g_z)

    w_comm = z1 @ w1 @ v
    k = bins.step
    defect = (w_comm @ k - k @ w_comm).norm()
    big_a = _blockwise_log(w_comm, bins)

    segments = (
        Segment(one, 1j * big_a, "commutant"),
        Segment(w_comm, -g_z, "e_swap"),
        Segment(w1 @ v, -g_w, "f_swap"),
        Segment(v, -1j * a, "correction"),
    )
    return AssembledPath(UnitaryPath(one, segments), a, big_a, defect)
