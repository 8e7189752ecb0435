import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st
from scipy.stats import poisson

from ioncavity.errors import ContractError, SignatureError, TruncationError
from ioncavity.fockalg import (
    Atom,
    Boson,
    OperatorMatrix,
    SpaceSignature,
    StateVector,
    atomic_projector,
    basis_state,
    coherent_state,
    embed,
    hermitian_function,
    identity,
    ladder,
    mean_number,
    number,
    poisson_weights,
    product_state,
    quadrature_variance,
    required_truncation,
    squeezed_quadrature,
    top_population,
    truncation_warnings,
)

FULL = SpaceSignature.of(Boson(5), Boson(4), Atom())


def random_state(space, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
    return StateVector(space, v)


def random_hermitian(space, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(space.dim, space.dim)) + 1j * rng.normal(size=(space.dim, space.dim))
    return OperatorMatrix(space, scale * (A + A.conj().T) / 2)


def test_factor_validation():
    with pytest.raises(ValueError):
        Boson(1)
    with pytest.raises(SignatureError):
        FULL.boson(2)
    with pytest.raises(SignatureError):
        FULL.atom(0)
    assert FULL.dims == (5, 4, 3) and FULL.dim == 60


@pytest.mark.parametrize("n", [2, 5, 17])
def test_truncated_commutator(n):
    space = SpaceSignature.of(Boson(n))
    a = ladder(space, 0)
    comm = (a @ a.dag() - a.dag() @ a).data
    expected = np.eye(n)
    expected[-1, -1] = 1 - n
    assert np.allclose(comm, expected, atol=1e-13)


def test_embedding_acts_on_right_factor():
    psi = basis_state(FULL, (2, 1, "e"))
    moved = ladder(FULL, 1, "raising") @ psi
    target = basis_state(FULL, (2, 2, "e"))
    assert abs(moved.overlap(target) - math.sqrt(2)) < 1e-14
    flipped = atomic_projector(FULL, 2, "i", "e") @ psi
    assert abs(flipped.overlap(basis_state(FULL, (2, 1, "i"))) - 1) < 1e-14


def test_signature_mismatch_is_rejected():
    other = SpaceSignature.of(Boson(5), Boson(4))
    with pytest.raises(SignatureError):
        identity(FULL) + identity(other)
    with pytest.raises(SignatureError):
        identity(other) @ basis_state(FULL, (0, 0, "g"))
    with pytest.raises(SignatureError):
        embed(FULL, 0, np.eye(3))


def test_operator_matrix_is_read_only():
    op = number(FULL, 0)
    with pytest.raises(ValueError):
        op.data[0, 0] = 1.0


@pytest.mark.parametrize("fn,oracle", [("sin", sla.sinm), ("cos", sla.cosm),
                                       ("exp_i", lambda M: sla.expm(1j * M))])
def test_hermitian_function_matches_scipy(fn, oracle):
    X = random_hermitian(SpaceSignature.of(Boson(6), Boson(3)), seed=3, scale=0.4)
    got = hermitian_function(X, fn).data
    assert np.allclose(got, oracle(X.data), atol=1e-12)


def test_hermitian_function_shift_is_phase_offset():
    space = SpaceSignature.of(Boson(8))
    x = ladder(space, 0) + ladder(space, 0).dag()
    X = 0.1 * x
    got = hermitian_function(X, "sin", shift=0.7).data
    expected = sla.sinm(X.data) * math.cos(0.7) + sla.cosm(X.data) * math.sin(0.7)
    assert np.allclose(got, expected, atol=1e-13)


def test_hermitian_function_rejects_non_hermitian():
    space = SpaceSignature.of(Boson(4))
    with pytest.raises(ContractError):
        hermitian_function(ladder(space, 0), "sin")


def test_coherent_state_populations_are_poisson():
    space = SpaceSignature.of(Boson(40))
    psi = coherent_state(space, 0, 2.0 * np.exp(0.3j))
    assert np.allclose(psi.populations(0), poisson.pmf(np.arange(40), 4.0), atol=1e-12)
    assert np.allclose(poisson_weights(2.0, 40), poisson.pmf(np.arange(40), 4.0), atol=1e-15)
    assert abs(mean_number(psi, 0) - 4.0) < 1e-9


def test_coherent_state_truncation_guard_names_required_n():
    with pytest.raises(TruncationError, match=str(required_truncation(5.0))):
        coherent_state(SpaceSignature.of(Boson(30)), 0, 5.0)
    # 64 levels hold |beta|^2 = 25 under the top-10% guard
    coherent_state(SpaceSignature.of(Boson(64)), 0, 5.0)


def test_truncation_warnings_flag_top_population():
    space = SpaceSignature.of(Boson(10), Boson(10))
    psi = basis_state(space, (9, 0))
    assert top_population(psi, 0) == 1.0
    msgs = truncation_warnings(psi, emit=False)
    assert len(msgs) == 1 and "factor 0" in msgs[0]


def test_product_state_orders_factors():
    a = basis_state(SpaceSignature.of(Boson(3)), (1,))
    b = basis_state(SpaceSignature.of(Atom()), ("i",))
    psi = product_state(a, b)
    assert psi.space == SpaceSignature.of(Boson(3), Atom())
    assert abs(psi.overlap(basis_state(psi.space, (1, "i"))) - 1) < 1e-15


def test_vacuum_quadrature_variance():
    psi = basis_state(SpaceSignature.of(Boson(6)), (0,))
    for th in np.linspace(0, np.pi, 7):
        assert abs(quadrature_variance(psi, 0, th) - 0.25) < 1e-15


@given(st.integers(0, 10_000), st.sampled_from([0, 1]))
def test_quadrature_extremes_match_angle_scan(seed, factor):
    space = SpaceSignature.of(Boson(7), Boson(5))
    psi = random_state(space, seed)
    theta, vmin, vmax = squeezed_quadrature(psi, factor)
    grid = np.linspace(0, np.pi, 4001)
    scan = quadrature_variance(psi, factor, grid)
    assert vmin <= scan.min() + 1e-12
    assert vmax >= scan.max() - 1e-12
    assert abs(quadrature_variance(psi, factor, theta) - vmin) < 1e-12
    assert 0 <= theta < np.pi


@given(st.integers(0, 10_000))
def test_random_hermitian_builds_are_hermitian(seed):
    H = random_hermitian(FULL, seed)
    assert H.is_hermitian()
    assert (H @ H).is_hermitian(rtol=1e-12)
