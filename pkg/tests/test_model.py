import math
import warnings

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from ioncavity.errors import RegimeError, RegimeWarning, SignatureError
from ioncavity.fockalg import Atom, Boson, SpaceSignature, atomic_projector, identity, ladder, number
from ioncavity.model import (
    ENGINEERED,
    EffectiveParams,
    SystemParams,
    build_dressed_hamiltonian,
    build_engineered,
    build_full_hamiltonian,
    check_engineered,
    dressed_vectors,
    fock_block_hamiltonian,
    rotating_frame_generator,
    rotation_frequency,
    semiclassical_hamiltonian,
    sin2_factor,
)

FULL = SpaceSignature.of(Boson(6), Boson(5), Atom())
PAIR = SpaceSignature.of(Boson(6), Boson(5))


def generic_params(**kw):
    base = dict(omega=2.0e6, nu=3.0e5, delta=4.0e4, Delta=1.5e6, lambda1=2e5 * np.exp(0.4j),
                lambda2=1.5e5 * np.exp(-1.1j), Omega_abs=2.5e5, phi_drive=0.7, eta=0.12, eta_L=0.05,
                varphi=0.3)
    base.update(kw)
    return SystemParams(**base)


def test_params_validation():
    with pytest.raises(ValueError):
        SystemParams(Delta=-1.0)
    with pytest.raises(RegimeError):
        SystemParams(eta=0.31)
    with pytest.warns(RegimeWarning):
        SystemParams(eta=0.25)
    p = SystemParams(omega=1e6, delta=2e3)
    assert p.omega0 == 2 * (1e6 + 2e3)
    assert isinstance(p.lambda1, complex)


@pytest.mark.parametrize("t", [0.0, 3.7e-7, 2.1e-6])
def test_interaction_frame_is_lab_frame_minus_counter_rotating(t):
    """U^dag (H_lab - H0' - counter-rotating) U equals the rotating-wave Hamiltonian."""
    p = generic_params()
    H_lab = build_full_hamiltonian(p, FULL, t, frame="lab")
    G = rotating_frame_generator(p, FULL)
    a = ladder(FULL, 0)
    x = ladder(FULL, 1) + ladder(FULL, 1).dag()
    S = sla.sinm(p.eta * x.data) * math.cos(p.varphi) + sla.cosm(p.eta * x.data) * math.sin(p.varphi)
    dip = (p.lambda1 * atomic_projector(FULL, 2, "g", "i") + p.lambda2 * atomic_projector(FULL, 2, "i", "e")).data
    cr = dip @ a.data @ S
    cr = cr + cr.conj().T
    U = np.diag(np.exp(-1j * np.real(np.diag(G.data)) * t))
    got = U.conj().T @ (H_lab.data - G.data - cr) @ U
    want = build_full_hamiltonian(p, FULL, t, frame="interaction").data
    assert np.max(np.abs(got - want)) < 1e-9 * np.max(np.abs(want))


@pytest.mark.parametrize("t", [0.0, 1.3e-6])
def test_dressed_form_equals_interaction_frame_without_recoil(t):
    p = generic_params(eta_L=0.0)
    A = build_dressed_hamiltonian(p, FULL, t, basis="bare").data
    B = build_full_hamiltonian(p, FULL, t, frame="interaction").data
    assert np.max(np.abs(A - B)) < 1e-9 * np.max(np.abs(B))


def test_dressed_vectors_are_drive_eigenstates():
    for phi in (0.0, 0.9, 2.5):
        V = dressed_vectors(phi)
        assert np.allclose(V.conj().T @ V, np.eye(3), atol=1e-15)
        drive = np.zeros((3, 3), complex)
        drive[1, 0] = np.exp(-1j * phi)  # |e><g| Omega/|Omega|
        drive = drive + drive.conj().T
        assert np.allclose(drive @ V[:, 0], V[:, 0]) and np.allclose(drive @ V[:, 1], -V[:, 1])
        # shifting the drive phase by pi exchanges the dressed states
        assert np.allclose(dressed_vectors(phi + np.pi)[:, 1], V[:, 0])


@given(st.floats(0, 2 * np.pi), st.floats(0, 2e-6))
def test_drive_phase_enters_the_dressed_form_only_through_lambda1(phi, t):
    p = generic_params(eta_L=0.0, phi_drive=phi)
    q = p.replace(phi_drive=0.0, lambda1=p.lambda1 * np.exp(-1j * phi))
    A = build_dressed_hamiltonian(p, FULL, t).data
    B = build_dressed_hamiltonian(q, FULL, t).data
    assert np.max(np.abs(A - B)) < 1e-9 * np.max(np.abs(A))


def test_dressed_form_needs_small_recoil():
    with pytest.raises(RegimeError):
        build_dressed_hamiltonian(generic_params(eta_L=0.2), FULL)


@given(st.floats(0.01, 0.3), st.floats(0, 2 * np.pi), st.floats(0, 1e-5), st.sampled_from(["lab", "interaction"]))
def test_full_hamiltonian_is_hermitian(eta, varphi, t, frame):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        p = generic_params(eta=eta, varphi=varphi)
    assert build_full_hamiltonian(p, FULL, t, frame=frame).is_hermitian(rtol=1e-12)
    assert build_dressed_hamiltonian(p, FULL, t).is_hermitian(rtol=1e-12)


def test_sin2_expansions():
    vib = SpaceSignature.of(Boson(30))
    anti = SystemParams(eta=0.02, varphi=np.pi / 2)
    node = SystemParams(eta=0.02, varphi=0.0)
    low = slice(0, 5)  # matrix elements between well-represented Fock levels
    for p, order in ((anti, 2), (node, 4)):
        exact = sin2_factor(p, vib, exact=True, index=0).data
        approx = sin2_factor(p, vib, exact=False, index=0).data
        err = np.max(np.abs(exact - approx)[low, low])
        assert err < 200 * p.eta ** order
        # halving eta shrinks the error by 2^order
        half = p.replace(eta=p.eta / 2)
        err_half = np.max(np.abs(sin2_factor(half, vib, index=0).data
                                 - sin2_factor(half, vib, exact=False, index=0).data)[low, low])
        assert 0.8 * 2 ** order < err / err_half < 1.2 * 2 ** order
    space = SpaceSignature.of(Boson(30), Boson(30))
    with pytest.raises(RegimeError):
        sin2_factor(SystemParams(eta=0.1, varphi=0.4), space, exact=False)


def eff_node():
    return EffectiveParams.manual(omega_ii=4e3, xi_ii=1.5e3 * np.exp(0.6j), chi_ii=2e3)


def node_params(**kw):
    base = dict(nu=5e5, eta=0.1, varphi=0.0, delta=1e3)
    base.update(kw)
    return SystemParams(**base)


@pytest.mark.parametrize("which", ENGINEERED)
def test_engineered_hamiltonians_are_hermitian(which):
    p = node_params(varphi=np.pi / 2 if which == "H1" else 0.0)
    H = build_engineered(p, eff_node(), which, PAIR, t=3e-5, check=False)
    assert H.is_hermitian(rtol=1e-12)


def test_h_eq17_equals_h4_without_detuning():
    p = node_params(delta=0.0)
    for t in (0.0, 1e-4):
        A = build_engineered(p, eff_node(), "H4", PAIR, t=t, check=False).data
        B = build_engineered(p, eff_node(), "H_eq17", PAIR, check=False).data
        assert np.allclose(A, B, atol=1e-9)


def test_fock_block_is_the_vibrational_level_slice():
    p = node_params(delta=750.0)
    eff = eff_node()
    H = build_engineered(p, eff, "H_eq17", PAIR, check=False).data.reshape(6, 5, 6, 5)
    for m in range(5):
        Xi = p.eta ** 2 * eff.omega_ii * (2 * m + 1) - p.delta
        Gamma = 2 * p.eta ** 2 * eff.xi_ii * (2 * m + 1)
        assert np.allclose(H[:, m, :, m], fock_block_hamiltonian(Xi, Gamma, 6).data, atol=1e-10)
        for k in range(5):
            if k != m:
                assert np.allclose(H[:, m, :, k], 0.0)


def test_engineered_conservation_laws():
    eff = eff_node()
    n_a, n_b = number(PAIR, 0), number(PAIR, 1)
    laws = {"H2": n_a - n_b, "H3": n_a + n_b, "H5": n_a, "H_eq17": n_b}
    for which, Q in laws.items():
        H = build_engineered(node_params(), eff, which, PAIR, check=False)
        assert np.allclose((H @ Q - Q @ H).data, 0.0, atol=1e-9), which
    H5 = build_engineered(node_params(), eff, "H5", PAIR, check=False)
    assert np.allclose((H5 @ n_b - n_b @ H5).data, 0.0)


def test_h1_on_cavity_only_space_and_preconditions():
    eff = EffectiveParams.manual(6e4, 3e3)
    cav = SpaceSignature.of(Boson(8))
    p = SystemParams(delta=6e4, varphi=np.pi / 2)
    H = build_engineered(p, eff, "H1", cav)
    a = ladder(cav, 0)
    assert np.allclose(H.data, (3e3 * (a.dag() @ a.dag()) + 3e3 * (a @ a)).data)
    with pytest.raises(RegimeError, match="varphi"):
        check_engineered(p.replace(varphi=0.0), eff, "H1")
    with pytest.raises(RegimeError, match="omega_ii"):
        check_engineered(p.replace(delta=5e4), eff, "H1")
    with pytest.raises(SignatureError):
        build_engineered(node_params(), eff, "H2", cav, check=False)


def test_sideband_tunings_are_checked():
    eff = eff_node()
    Phi = rotation_frequency(node_params(), eff)
    assert Phi == 5e5 + 2 * 0.01 * 2e3
    check_engineered(node_params(delta=Phi), eff, "H2")
    check_engineered(node_params(delta=-Phi), eff, "H3")
    with pytest.raises(RegimeError, match="H2 requires delta = Phi"):
        check_engineered(node_params(delta=0.9 * Phi), eff, "H2")
    with pytest.raises(RegimeError, match="Phi >>"):
        check_engineered(node_params(nu=1e4), eff, "H4")
    with pytest.raises(RegimeError, match="node"):
        check_engineered(node_params(varphi=0.2), eff, "H5")
    with pytest.raises(ValueError):
        check_engineered(node_params(), eff, "H9")


def test_semiclassical_hamiltonian_requires_compensating_detuning():
    eff = EffectiveParams.manual(-6e3, -3e4j)
    cav = SpaceSignature.of(Boson(10))
    beta = 3.0
    p = SystemParams(eta=0.1, delta=2 * 0.01 * 9 * -6e3)
    H = semiclassical_hamiltonian(p, eff, beta, cav)
    a = ladder(cav, 0)
    pair = 2 * 0.01 * 9 * (-3e4j) * (a.dag() @ a.dag())
    assert np.allclose(H.data, (pair + pair.dag()).data)
    with pytest.raises(RegimeError):
        semiclassical_hamiltonian(p.replace(delta=0.0), eff, beta, cav)
    with pytest.raises(SignatureError):
        semiclassical_hamiltonian(p, eff, beta, PAIR)
