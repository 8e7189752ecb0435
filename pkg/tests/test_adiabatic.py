import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ioncavity.adiabatic import (
    classify_regime,
    effective_hamiltonian,
    effective_params,
    validate_effective_dynamics,
)
from ioncavity.errors import RegimeError, SignatureError
from ioncavity.fockalg import Atom, Boson, SpaceSignature, basis_state
from ioncavity.model import SystemParams

SMALL = SpaceSignature.of(Boson(10), Boson(4), Atom())


def test_classification_examples(anti_node_params):
    v = classify_regime(anti_node_params)
    assert v.regime == "weak"
    assert v.ratio_plus == pytest.approx(11.0) and v.ratio_minus == pytest.approx(9.0)
    assert classify_regime(SystemParams(Omega_abs=1e6, lambda1=1e4, lambda2=1e4, delta=1e3)).regime == "strong"
    v = classify_regime(SystemParams(Delta=1e6, Omega_abs=1e6, lambda1=1e4))
    assert v.ratio_minus == 0.0 and v.regime == "invalid"


def test_weak_regime_values(anti_node_params):
    eff = effective_params(anti_node_params)
    assert eff.regime == "weak"
    assert eff.omega_ii == pytest.approx(6e4, rel=1e-12)
    assert eff.chi_ii == pytest.approx(3e4, rel=1e-12)
    assert abs(eff.xi_ii) == pytest.approx(3e3, rel=1e-12)
    assert effective_params(anti_node_params.replace(Omega_abs=0.0)).xi_ii == 0


def test_weak_regime_branch_symmetry(anti_node_params):
    eff = effective_params(anti_node_params.replace(lambda1=2e5 * cmath.exp(0.3j)))
    assert eff.omega_mm == eff.omega_pp and eff.chi_mm == eff.chi_pp and eff.xi_mm == -eff.xi_pp


def test_strong_regime_values_and_decoupling(strong_params):
    eff = effective_params(strong_params)
    assert eff.regime == "strong"
    assert eff.omega_ii == pytest.approx(-6e3) and eff.chi_ii == pytest.approx(-3e3)
    assert eff.xi_ii == pytest.approx(-3e4j, abs=1e-9)
    assert eff.omega_pm == eff.chi_pm == eff.xi_pm == 0
    assert eff.omega_mm == -eff.omega_pp and eff.chi_mm == -eff.chi_pp and eff.xi_mm == eff.xi_pp
    # the tabulated xi_pp and its alternative are both reported
    assert eff.xi_pp_alt == pytest.approx(0.5 * 3e4 * np.exp(-1.5j * np.pi))
    assert any("xi_pp_alt" in n for n in eff.notes)


def test_weak_xi_phase_conventions():
    l1, l2, phi = 3e5 * cmath.exp(0.4j), 2e5 * cmath.exp(-0.9j), 1.3
    p = SystemParams(Delta=5e6, lambda1=l1, lambda2=l2, Omega_abs=2e5, phi_drive=phi)
    base = cmath.phase(l1) + cmath.phase(l2) - phi
    derived = effective_params(p).xi_ii
    tabulated = effective_params(p, weak_xi_sign=-1).xi_ii
    assert cmath.isclose(derived / abs(derived), cmath.exp(1j * base), abs_tol=1e-12)
    assert cmath.isclose(tabulated / abs(tabulated), cmath.exp(1j * (base + math.pi)), abs_tol=1e-12)
    assert any("literal" in n for n in effective_params(p, weak_xi_sign=-1).notes)


@given(st.floats(0.1, 10.0), st.sampled_from(["weak", "strong"]))
def test_quadratic_scaling_in_couplings(s, regime):
    if regime == "weak":
        p = SystemParams(Delta=3e7, lambda1=1e5, lambda2=2e5j, Omega_abs=1e5, phi_drive=0.5)
    else:
        p = SystemParams(Delta=1e5, lambda1=1e5, lambda2=2e5j, Omega_abs=3e7, phi_drive=0.5)
    e1 = effective_params(p, regime=regime, override=True)
    e2 = effective_params(p.replace(lambda1=s * p.lambda1, lambda2=s * p.lambda2), regime=regime, override=True)
    assert e2.omega_ii == pytest.approx(s ** 2 * e1.omega_ii, rel=1e-12)
    assert e2.chi_ii == pytest.approx(s ** 2 * e1.chi_ii, rel=1e-12)
    assert abs(e2.xi_ii - s ** 2 * e1.xi_ii) <= 1e-12 * abs(e2.xi_ii)


@given(st.floats(1e4, 1e6), st.floats(1e4, 1e6), st.floats(0, 5e5))
def test_weak_xi_to_omega_ratio(l1, l2, Om):
    p = SystemParams(Delta=1e8, lambda1=l1, lambda2=l2, Omega_abs=Om)
    eff = effective_params(p)
    assert abs(eff.xi_ii) / eff.omega_ii == pytest.approx(l1 * l2 * Om / (1e8 * (l1 ** 2 + l2 ** 2)), rel=1e-12)


def test_invalid_and_mismatched_regimes():
    bad = SystemParams(Delta=1e6, Omega_abs=1e6, lambda1=1e4)
    with pytest.raises(RegimeError, match="invalid"):
        effective_params(bad)
    weak = SystemParams(Delta=3e6, lambda1=3e5, lambda2=3e5, Omega_abs=3e5)
    with pytest.raises(RegimeError, match="classify as weak"):
        effective_params(weak, regime="strong")
    eff = effective_params(weak, regime="strong", override=True)
    assert eff.overridden and "override" in eff.notes[0]


def test_effective_hamiltonian_lives_on_the_i_branch(anti_node_params):
    H = effective_hamiltonian(anti_node_params, effective_params(anti_node_params), SMALL)
    assert H.is_hermitian()
    psi_g = basis_state(SMALL, (3, 1, "g"))
    assert np.allclose((H @ psi_g).amplitudes, 0.0)


def test_no_coupling_means_perfect_fidelity():
    p = SystemParams(Delta=1e6, nu=5e5, eta=0.1, varphi=np.pi / 2)
    eff = effective_params(p)
    res = validate_effective_dynamics(p, eff, SMALL, 1e-4, 10)
    assert np.allclose(res.fidelity, 1.0, atol=1e-12)
    assert np.allclose(res.population_i, 1.0)


def test_validation_rejects_wrong_initial_state(anti_node_params):
    eff = effective_params(anti_node_params)
    with pytest.raises(ValueError):
        validate_effective_dynamics(anti_node_params, eff, SMALL, 1e-5, 2, initial=basis_state(SMALL, (0, 0, "g")))
    with pytest.raises(SignatureError):
        validate_effective_dynamics(anti_node_params, eff, SpaceSignature.of(Boson(4), Boson(4)), 1e-5, 2)


def test_derived_sign_tracks_exact_dynamics_better(anti_node_params):
    # Delta doubled and delta retuned to the new omega_ii = 3e4
    p = anti_node_params.replace(Delta=6e6, delta=3e4)
    space = SpaceSignature.of(Boson(24), Boson(8), Atom())
    derived = validate_effective_dynamics(p, effective_params(p), space, 2e-4, 40).max_infidelity
    tabulated = validate_effective_dynamics(p, effective_params(p, weak_xi_sign=-1), space, 2e-4, 40).max_infidelity
    assert derived == pytest.approx(0.010280235372787883, rel=1e-6)
    assert tabulated == pytest.approx(0.15862611620073763, rel=1e-6)
