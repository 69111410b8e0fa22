import numpy as np
import pytest

from afderiv.derivations import (
    CERTIFIED, NON_APPLICABLE, VIOLATED, LadderError, NonAbelianError, AbelianTower,
    ObstructionSampler, SamplerParams, WindingError, averaged_cobounding, build_interval_ladder,
    build_periodic_ladder, build_scaled_ladder, candidate_path, certify_obstruction,
    choose_gap_coefficient, cobounding_defect, corner_invertibility_certificate, delta,
    delta_norm, gap_coefficient, ladder_scale, monte_carlo_cobounding, obstruction_sweep,
    path_witness, periodicity_certificates, pinching, spectral_gap, tensor_tower, winding_number,
)
from afderiv.derivations.averaging import ad_delta
from afderiv.fibered import (
    CIRCLE, EmbeddingSpec, FiberedElement, FiberSpace, canonical_z, sup_norm,
)
from afderiv.linalg_core import BlockAlgebra, Element, expi

from conftest import haar


@pytest.fixture(scope="module")
def small_interval():
    specs = [EmbeddingSpec(((3, 4), (5, 3))), EmbeddingSpec(((3, 3), (4, 3)))]
    return build_interval_ladder(specs, BlockAlgebra((1, 1)), space=FiberSpace.interval(17), seed=1)


@pytest.fixture(scope="module")
def chi8():
    specs = [EmbeddingSpec(((8,),)), EmbeddingSpec(((8,),))]
    return build_interval_ladder(specs, BlockAlgebra((1,)), space=FiberSpace.interval(129))


@pytest.fixture(scope="module")
def circle3():
    specs = [EmbeddingSpec(((4,),), CIRCLE), EmbeddingSpec(((4,),), CIRCLE)]
    return build_periodic_ladder(specs, space=FiberSpace.circle(64))


def random_level_element(ladder, level, rng, self_adjoint=False):
    alg = ladder.algebra(level)
    space = ladder.space
    data = []
    for d in alg.block_dims:
        a = rng.normal(size=(space.n, d, d)) + 1j * rng.normal(size=(space.n, d, d))
        if self_adjoint:
            a = (a + np.conj(np.swapaxes(a, 1, 2))) / 2
        data.append(a)
    return FiberedElement(space, alg, tuple(data))


# delta and ladders

def test_delta_kills_canonical_x(small_interval):
    lad = small_interval
    for n in range(1, lad.levels + 1):
        for at in range(n, lad.levels + 1):
            assert delta_norm(lad, at, lad.canonical(n, at)) < 1e-12


def test_delta_is_star_derivation(small_interval, rng):
    lad = small_interval
    for level in (2, 3):
        x = random_level_element(lad, level, rng)
        y = random_level_element(lad, level, rng)
        leib = delta(lad, level, x @ y) - (delta(lad, level, x) @ y + x @ delta(lad, level, y))
        star = delta(lad, level, x.adjoint()) - delta(lad, level, x).adjoint()
        scale = sup_norm(x) * sup_norm(y) * lad.H(level).norm()
        assert sup_norm(leib) <= 1e-10 * scale
        assert sup_norm(star) <= 1e-10 * scale
        assert sup_norm(delta(lad, level, x)) <= 2 * lad.H(level).norm() * sup_norm(x) + 1e-9


def test_delta_vanishes_on_commutant(small_interval):
    lad = small_interval
    h = FiberedElement.constant(lad.space, lad.H(2))
    assert delta_norm(lad, 2, h) == 0.0


def test_ladder_consistency_of_time_evolution(small_interval, rng):
    lad = small_interval
    for n in (1, 2):
        x = random_level_element(lad, n, rng)
        for t in (0.1, 1.0, np.pi):
            un, um = expi(lad.H(n), t), expi(lad.H(n + 1), t)
            lifted = lad.lift(x, n, n + 1)
            lhs = um @ lifted @ um.adjoint()
            rhs = lad.lift(un @ x @ un.adjoint(), n, n + 1)
            assert sup_norm(lhs - rhs) <= 1e-10 * max(1.0, sup_norm(x))


def test_delta_level_errors(small_interval, rng):
    x = random_level_element(small_interval, 2, rng)
    with pytest.raises(LadderError):
        delta(small_interval, 7, x)
    with pytest.raises(ValueError):
        delta(small_interval, 3, x)


# gap coefficient

def test_gap_coefficient_formula():
    assert gap_coefficient(0.0, [], 3, 0.6, 0.5) == pytest.approx(121.0)
    base = gap_coefficient(1.0, [0.2], 3, 0.6, 0.5)
    doubled = gap_coefficient(2.0, [0.2], 3, 0.6, 0.5)
    assert doubled - base == pytest.approx(8 * 3 / 0.1 * 1.0)
    with pytest.raises(LadderError):
        gap_coefficient(0.0, [], 3, 0.5, 0.5)


def test_chosen_gap_coefficients_match_ladder(small_interval, chi8):
    for lad in (small_interval, chi8):
        for m in (1, 2):
            assert choose_gap_coefficient(lad, m) == pytest.approx(lad.gap_coefficient(m + 1))
    # H_1 = 0 and no side increments: a_2 = 4 xi_2 / (eps_1 - eps_2) + 1
    assert chi8.gap_coefficient(2) == pytest.approx(4 * 8 / 0.3 + 1)


def test_interval_ladder_validation():
    specs = [EmbeddingSpec(((3,),))]
    with pytest.raises(LadderError):
        build_interval_ladder(specs, BlockAlgebra((1,)), windows=[0.7, 0.3])
    with pytest.raises(LadderError):
        build_interval_ladder(specs, BlockAlgebra((1,)), windows=[0.5, 0.5])
    with pytest.raises(LadderError):
        build_interval_ladder(specs, BlockAlgebra((1,)), gap_overrides={2: 0.0})


# obstruction certificate

def test_certificate_declines_canonical_and_zero(chi8):
    lad = chi8
    xnp = FiberedElement(lad.space, BlockAlgebra((8,)), (lad.canonical(1, 2).data[0],))
    c = certify_obstruction(lad, 1, xnp, 1)
    assert c.verdict == NON_APPLICABLE and c.distance == 0.0 and not c.measure_ok
    zero = FiberedElement(lad.space, BlockAlgebra((8,)), (np.zeros((lad.space.n, 8, 8)),))
    c = certify_obstruction(lad, 1, zero, 1)
    assert c.verdict == NON_APPLICABLE and c.distance == pytest.approx(1.0) and not c.distance_ok


def test_certificate_argument_checks(chi8, rng):
    lad = chi8
    with pytest.raises(LadderError):
        certify_obstruction(lad, 1, lad.canonical(1, 2), 2)
    arr = rng.normal(size=(lad.space.n, 8, 8))
    with pytest.raises(ValueError):
        certify_obstruction(lad, 1, FiberedElement(lad.space, BlockAlgebra((8,)), (arr,)), 1)


def test_sampler_produces_applicable_certified_samples(chi8):
    sweep = obstruction_sweep(chi8, 1, 1, 8, np.random.default_rng(4))
    app = sweep.applicable
    assert len(app) >= 6
    for c in app:
        assert c.verdict == CERTIFIED and c.delta_norm > 1
        assert c.chain_delta_ok and c.chain_measure_ok and c.htilde_ok
    s = sweep.summary()
    assert s["violations"] == 0 and s["chain_ok"]


def test_sampler_is_reproducible(chi8):
    sampler = ObstructionSampler(chi8, 1, 1, SamplerParams())
    h1, i1 = sampler.sample(np.random.default_rng(9))
    h2, i2 = sampler.sample(np.random.default_rng(9))
    assert i1 == i2
    if h1 is not None:
        assert np.array_equal(h1.data[0], h2.data[0])


def test_undersized_gap_coefficient_is_caught():
    specs = [EmbeddingSpec(((8,),)), EmbeddingSpec(((8,),))]
    lad = build_interval_ladder(specs, BlockAlgebra((1,)), gap_overrides={2: 1.0})
    sweep = obstruction_sweep(lad, 1, 1, 6, np.random.default_rng(0))
    assert any(c.verdict == VIOLATED for c in sweep.certificates)


# periodic and scaled ladders

def test_periodic_ladder_certificates(circle3):
    lad = circle3
    assert lad.H(1).norm() == 0.0
    for n in (2, 3):
        for key in lad.increments[n - 1]:
            w = np.linalg.eigvalsh(lad.increment(n, *key).blocks[0])
            assert set(np.round(w).astype(int)) <= {-1, 0, 1}
    for c in periodicity_certificates(lad, 20, np.random.default_rng(0)):
        assert c.integral and c.periodic
        assert c.integrality_error <= 1e-10 and c.conjugation_error <= 1e-9
        assert c.exp_identity_error <= 1e-10


def test_scaled_ladder_examples():
    specs = [EmbeddingSpec(((4,),), CIRCLE), EmbeddingSpec(((5,),), CIRCLE)]
    space = FiberSpace.circle(16)
    ones = build_scaled_ladder(specs, [1, 1], space=space)
    per = build_periodic_ladder(specs, space=space)
    for n in (1, 2, 3):
        assert (ones.H(n) - per.H(n)).norm() == 0.0
    two = build_scaled_ladder(specs, [2, 2], space=space)
    assert ladder_scale(two) == 2.0
    for n in (2, 3):
        assert spectral_gap(two.H(n)) >= 2 - 1e-12
    with pytest.raises(LadderError):
        build_scaled_ladder(specs, [1, 0], space=space)
    with pytest.raises(LadderError):
        build_scaled_ladder([], [])


# corner certificate

def test_corner_certificate_examples(circle3):
    lad = circle3
    H = lad.H(2)
    alg = lad.algebra(2)
    one = FiberedElement.constant(lad.space, alg.identity())
    c = corner_invertibility_certificate(one, H, 1.0)
    assert c.applicable and c.certified_invertible and c.winding == 0
    z = canonical_z(lad.space, alg)
    c = corner_invertibility_certificate(z, H, 1.0)
    assert c.applicable and c.certified_invertible and c.winding == c.rank == 2
    assert c.off_corner < 1e-12


def test_corner_certificate_declines_swap(circle3):
    lad = circle3
    H = lad.H(2)
    w, v = np.linalg.eigh(H.blocks[0])
    top, low = v[:, -1], v[:, 0]
    # exchange a top eigenvector with a bottom one
    swap = np.eye(4) - np.outer(top, top.conj()) - np.outer(low, low.conj()) \
        + np.outer(top, low.conj()) + np.outer(low, top.conj())
    u = FiberedElement.constant(lad.space, Element(H.algebra, (swap,)))
    c = corner_invertibility_certificate(u, H, 1.0)
    assert c.off_corner == pytest.approx(1.0)
    assert not c.applicable and not c.certified_invertible and c.winding is None


def test_corner_certificate_gap_hypothesis(circle3):
    with pytest.raises(LadderError):
        corner_invertibility_certificate(canonical_z(circle3.space, circle3.algebra(2)),
                                         circle3.H(2), 3.0)


@pytest.mark.parametrize("target", ["canonical", "embedded"])
def test_candidate_paths_give_contradiction_witnesses(circle3, target):
    for seed in range(3):
        for level in (2, 3):
            path = candidate_path(circle3, level, np.random.default_rng(seed), target=target)
            w = path_witness(circle3, level, path)
            assert w.commutator_sup < 1.0 and w.applicable
            assert w.invertible and w.winding_start == 0
            expected = w.rank if target == "canonical" else 1
            assert w.winding_end == expected
            assert w.contradiction and not w.evades
            assert w.endpoint_error < 1e-10


# winding number

def test_winding_examples():
    th = 2 * np.pi * np.arange(64) / 64
    assert winding_number(np.ones(64)) == 0
    assert winding_number(np.exp(1j * th)) == 1
    assert winding_number(np.exp(2j * th)) == 2
    assert winding_number(3 * np.exp(-1j * th)) == -1


def test_winding_errors():
    th = 2 * np.pi * np.arange(8) / 8
    with pytest.raises(WindingError):
        winding_number(np.array([1, 0, 1j]))
    with pytest.raises(WindingError):
        winding_number(np.exp(4j * th))
    with pytest.raises(WindingError):
        winding_number(np.array([]))


# averaging

def test_averaging_commuting_hamiltonian_is_zero():
    tower = tensor_tower([2, 3])
    H = np.diag(np.arange(6.0))
    assert averaged_cobounding(H, tower).norm() < 1e-14


def test_averaging_two_by_two():
    tower = tensor_tower([2])
    H = np.array([[0, 1], [1, 0]], dtype=complex)
    h = averaged_cobounding(H, tower)
    p1 = tower.levels[0][0]
    ih = 1j * h.blocks[0]
    expected = sum(ad_delta(H, p) @ p for p in tower.levels[0])
    assert np.allclose(ih, expected, atol=1e-14)
    assert np.linalg.norm(ih @ p1 - p1 @ ih - ad_delta(H, p1)) < 1e-12


def test_averaging_random_two_level_tower(rng):
    q = haar(rng, 12)
    tower0 = tensor_tower([3, 2], extra=2)
    tower = AbelianTower(tuple(tuple(q @ p @ q.conj().T for p in ps) for ps in tower0.levels))
    g = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    H = (g + g.conj().T) / 2
    h = averaged_cobounding(H, tower)
    # closed form: h = H - E_n(H) with E_n the pinching onto the joint minimal projections
    assert np.linalg.norm(h.blocks[0] - (H - pinching(H, tower))) < 1e-12
    worst = max(cobounding_defect(h, H, tower.random_unitary(rng)) for _ in range(50))
    assert worst <= 1e-10
    mc = monte_carlo_cobounding(H, tower, samples=2 ** 12, seed=1)
    assert np.linalg.norm(mc - 1j * h.blocks[0], 2) < 5e-2


def test_averaging_rejects_non_abelian(rng):
    q = haar(rng, 2)
    p = np.diag([1.0, 0.0]).astype(complex)
    r = q @ p @ q.conj().T
    with pytest.raises(NonAbelianError):
        AbelianTower(((p, np.eye(2) - p), (r, np.eye(2) - r)))
    with pytest.raises(NonAbelianError):
        AbelianTower(((p,),))
