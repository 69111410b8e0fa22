import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from afderiv.linalg_core import (
    AlgebraMismatch, BlockAlgebra, BranchCutError, ContourError, Element, NotSelfAdjoint,
    ProjectionMismatch, SingularInput, commutator, connect_projections, eig_hermitian, expi,
    graph_norm, operator_norm, polar_unitary, positive_part, principal_log_unitary,
    riesz_projection, spectral_projection,
)

from conftest import haar

M2 = BlockAlgebra((2,))


def faddeev_leverrier(a):
    """Coefficients of det(tI - a), highest degree first, without eigen-solvers."""
    n = a.shape[0]
    coef = [1.0 + 0j]
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ m + coef[-1] * np.eye(n)
        coef.append(-np.trace(a @ m) / k)
    return np.array(coef)


def charpoly_norm(x):
    g = x.conj().T @ x
    coef = faddeev_leverrier(g).real
    t = np.max(np.roots(coef).real)
    # polish the root with Newton steps on the polynomial itself
    dcoef = np.polyder(coef)
    for _ in range(20):
        t -= np.polyval(coef, t) / np.polyval(dcoef, t)
    return np.sqrt(t)


# operator_norm

def test_operator_norm_identity_and_diagonal():
    assert operator_norm(BlockAlgebra((3,)).identity()) == pytest.approx(1.0)
    assert operator_norm(M2.diag([[2, -5]])) == pytest.approx(5.0)


def test_operator_norm_matches_charpoly_oracle(rng):
    alg = BlockAlgebra((8,))
    for _ in range(5):
        x = alg.random(rng) * 0.5
        assert abs(operator_norm(x) - charpoly_norm(x.blocks[0])) <= 1e-10 * max(1, operator_norm(x))


def test_operator_norm_takes_max_over_blocks():
    alg = BlockAlgebra((1, 2))
    x = alg.diag([[3], [1, -2]])
    assert operator_norm(x) == pytest.approx(3.0)


def test_star_and_cstar_identity(rng):
    alg = BlockAlgebra((2, 3, 5))
    for _ in range(10):
        x = alg.random(rng)
        assert abs(x.adjoint().norm() - x.norm()) < 1e-10 * x.norm()
        assert abs((x.adjoint() @ x).norm() - x.norm() ** 2) < 1e-10 * x.norm() ** 2


# commutator

def test_commutator_examples(rng):
    h = M2.diag([[1, 0]])
    u = M2.from_dense(np.array([[0, 1], [1, 0]]))
    c = commutator(h, u)
    assert np.allclose(c.blocks[0], [[0, 1], [-1, 0]])
    assert c.norm() == pytest.approx(1.0)
    assert commutator(h, M2.identity()).norm() == 0.0
    assert commutator(h, M2.diag([[3, -2]])).norm() == 0.0


def test_commutator_algebra_mismatch():
    with pytest.raises(AlgebraMismatch):
        commutator(M2.identity(), BlockAlgebra((3,)).identity())


# graph norm

def test_graph_norm_examples(rng):
    x = M2.random(rng)
    d = M2.random(rng)
    assert graph_norm(x, M2.zeros()) == pytest.approx(x.norm())
    assert graph_norm(M2.zeros(), d) == pytest.approx(d.norm())
    big = np.block([[x.blocks[0], d.blocks[0]], [np.zeros((2, 2)), x.blocks[0]]])
    assert graph_norm(x, d) == pytest.approx(np.linalg.norm(big, 2), rel=1e-12)


@given(st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_graph_norm_properties(dim, seed):
    rng = np.random.default_rng(seed)
    alg = BlockAlgebra((dim, 2))
    x, dx, y, dy = (alg.random(rng) for _ in range(4))
    g = graph_norm(x, dx)
    assert g >= max(x.norm(), dx.norm() / 2) - 1e-12
    # Leibniz rule makes the graph norm submultiplicative
    assert graph_norm(x @ y, x @ dy + dx @ y) <= g * graph_norm(y, dy) * (1 + 1e-12)


# eig_hermitian and spectral projections

def test_eig_hermitian_diagonal():
    sd = eig_hermitian(BlockAlgebra((3,)).diag([[3, 1, 2]]))
    assert np.allclose(sd.eigenvalues[0], [1, 2, 3])
    v = np.abs(sd.eigenvectors[0])
    assert np.allclose(np.sort(v, axis=0)[-1], 1) and np.allclose(v.sum(axis=0), 1)


def test_eig_hermitian_unitary_invariance(rng):
    alg = BlockAlgebra((6,))
    h = alg.random_self_adjoint(rng)
    q = alg.from_dense(haar(rng, 6))
    w1 = eig_hermitian(h).spectrum
    w2 = eig_hermitian((q @ h @ q.adjoint()).hermitian_part()).spectrum
    assert np.max(np.abs(w1 - w2)) < 1e-10


def test_eig_hermitian_scalar_block_and_reconstruction(rng):
    sd = eig_hermitian(BlockAlgebra((1,)).diag([[2.5]]))
    assert sd.eigenvalues[0].tolist() == [2.5]
    h = BlockAlgebra((3, 4)).random_self_adjoint(rng)
    assert (eig_hermitian(h).reconstruct() - h).norm() < 1e-10


def test_eig_hermitian_rejects_non_self_adjoint():
    with pytest.raises(NotSelfAdjoint):
        eig_hermitian(M2.from_dense(np.array([[0, 1], [0, 0]])))


def test_spectral_projection_examples(rng):
    d = 0.1
    sd = eig_hermitian(BlockAlgebra((3,)).diag([[0, 2 * d, 4 * d]]))
    p = spectral_projection(sd, (2 * d, 4 * d))
    assert np.allclose(p.blocks[0], np.diag([0, 1, 0]), atol=1e-12)
    assert p.is_projection()
    assert np.allclose(spectral_projection(sd, (-np.inf, np.inf)).blocks[0], np.eye(3))


def test_spectral_projections_resolve_identity(rng):
    alg = BlockAlgebra((5, 3))
    sd = eig_hermitian(alg.random_self_adjoint(rng))
    cuts = [-np.inf, -1.0, -0.2, 0.0, 0.7, 2.0, np.inf]
    total = alg.zeros()
    for lo, hi in zip(cuts, cuts[1:]):
        total = total + spectral_projection(sd, (lo, hi))
    assert (total - alg.identity()).norm() < 1e-12


# Riesz projection

def test_riesz_examples():
    h = M2.diag([[0, 1]])
    r = riesz_projection(h, 1.0, 0.3, 64)
    assert (r.projection - M2.diag([[0, 1]])).norm() <= 1e-8
    assert r.projection.norm() == pytest.approx(1.0)
    assert riesz_projection(h, 5.0, 0.5).projection.norm() < 1e-8
    assert (riesz_projection(h, 0.5, 3.0).projection - M2.identity()).norm() < 1e-8


def test_riesz_reports_error_bound(rng):
    h = BlockAlgebra((6,)).random_self_adjoint(rng)
    w = eig_hermitian(h).spectrum
    center, radius = w[2], 0.5 * min(w[3] - w[2], w[2] - w[1])
    r = riesz_projection(h, center, radius, 64, margin=0.1 * radius)
    exact = spectral_projection(eig_hermitian(h), (center - radius, center + radius))
    assert (r.projection - exact).norm() <= max(r.error_bound, 1e-12)


def test_riesz_margin_violation():
    with pytest.raises(ContourError):
        riesz_projection(M2.diag([[0, 1]]), 0.0, 1.0)
    with pytest.raises(ValueError):
        riesz_projection(M2.diag([[0, 1]]), 0.0, -1.0)


# polar decomposition

def test_polar_examples(rng):
    u = M2.random_unitary(rng)
    assert (polar_unitary(u) - u).norm() < 1e-12
    assert (polar_unitary(M2.scalar(2.0)) - M2.identity()).norm() < 1e-12
    with pytest.raises(SingularInput):
        polar_unitary(M2.diag([[1, 0]]))


def test_polar_near_unitary_bound(rng):
    alg = BlockAlgebra((6,))
    for _ in range(20):
        u = alg.random_unitary(rng)
        y = u + alg.random(rng) * 0.02
        v = polar_unitary(y)
        assert v.defects()["unitary"] < 1e-10
        assert (v @ positive_part(y) - y).norm() < 1e-10
        gap = (alg.identity() - y @ y.adjoint()).norm()
        assert gap < 1
        assert (v - y).norm() <= 1 / np.sqrt(1 - gap) - 1 + 1e-12


# principal logarithm

def test_principal_log_examples(rng):
    alg = BlockAlgebra((3,))
    assert principal_log_unitary(alg.identity()).norm() < 1e-12
    theta = 2.1
    a = principal_log_unitary(alg.scalar(np.exp(1j * theta)))
    assert (a - alg.scalar(theta)).norm() < 1e-12
    with pytest.raises(BranchCutError):
        principal_log_unitary(alg.scalar(-1.0))


def test_principal_log_exponentiates_back(rng):
    alg = BlockAlgebra((5, 2))
    for _ in range(10):
        b = alg.random_self_adjoint(rng)
        u = expi(b, 0.3 / b.norm())
        a = principal_log_unitary(u)
        assert a.norm() <= np.pi
        assert (expi(a) - u).norm() <= 1e-10


# connecting projections

def test_connect_identical_projections():
    p = M2.diag([[1, 0]])
    path = connect_projections(p, p, M2.identity())
    assert path.length == 0.0


def test_connect_quarter_rotation():
    p, q = M2.diag([[1, 0]]), M2.diag([[0, 1]])
    path = connect_projections(p, q, M2.identity())
    assert path.length == pytest.approx(np.pi / 2)
    w = path.end
    assert (w @ q @ w.adjoint() - p).norm() < 1e-12


def test_connect_random_pair_under_corner(rng):
    alg = BlockAlgebra((7,))
    corner = alg.diag([[1, 1, 1, 1, 1, 0, 0]])
    for _ in range(10):
        basis = np.zeros((7, 7), dtype=complex)
        basis[:5, :5] = haar(rng, 5)
        basis[5:, 5:] = np.eye(2)
        p = alg.from_dense(basis[:, :2] @ basis[:, :2].conj().T)
        basis[:5, :5] = haar(rng, 5)
        q = alg.from_dense(basis[:, :2] @ basis[:, :2].conj().T)
        path = connect_projections(p, q, corner)
        assert path.length <= np.pi + 1e-10
        w = path.end
        assert (w @ q @ w.adjoint() - p).norm() <= 1e-10
        assert (path.start - alg.identity()).norm() <= 1e-10
        for t in np.linspace(0, 1, 7):
            wt = path.at(t)
            assert wt.defects()["unitary"] <= 1e-10
            # acts trivially outside the corner
            off = alg.identity() - corner
            assert (wt @ off - off).norm() <= 1e-10


def test_connect_rejects_rank_mismatch_and_containment():
    alg = BlockAlgebra((3,))
    with pytest.raises(ProjectionMismatch):
        connect_projections(alg.diag([[1, 0, 0]]), alg.diag([[1, 1, 0]]), alg.identity())
    with pytest.raises(ProjectionMismatch):
        connect_projections(alg.diag([[1, 0, 0]]), alg.diag([[0, 0, 1]]), alg.diag([[1, 1, 0]]))


def test_element_rejects_bad_blocks():
    with pytest.raises(AlgebraMismatch):
        Element(M2, (np.eye(3),))
