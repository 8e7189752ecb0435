"""End-to-end drivers: cavity squeezing, regime maps, the Fock filter and the semiclassical limit."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .adiabatic import effective_params
from .dynamics import REGIME_CODES, RegimeReport, bogoliubov, classify, evolve_static
from .errors import RegimeError, TruncationError, TruncationWarning
from .fockalg import (
    TOP_POPULATION_TOL,
    Boson,
    SpaceSignature,
    StateVector,
    basis_state,
    coherent_state,
    mode_moments,
    poisson_weights,
    quadrature_extremes,
    top_level_count,
    variance_from_moments,
)
from .model import (
    EffectiveParams,
    SystemParams,
    build_engineered,
    check_engineered,
    fock_block_hamiltonian,
    gamma_of_m,
    is_tuned,
    semiclassical_hamiltonian,
    xi_of_m,
)

FILTER_SEPARATION = 10.0


def squeezing_rate(r):
    """Fractional variance reduction ``(1 - e^{-2r}) * 100`` in percent."""
    return (1.0 - np.exp(-2.0 * np.asarray(r))) * 100.0


def _time_grid(t_final: float, samples: int) -> np.ndarray:
    if t_final < 0:
        raise ValueError("t_final must be >= 0")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    return np.array([t_final]) if samples == 1 else np.linspace(0.0, t_final, samples)


# ---------------------------------------------------------------------------
# cavity squeezing under H1

@dataclass(frozen=True)
class SqueezeResult:
    """Time series of cavity squeezing; scalar accessors refer to the last sample.

    ``theta_min`` is the angle minimizing the variance of
    ``(a e^{-i theta} + h.c.)/2``. ``squeeze_angle`` is ``arg(xi_ii)/2``, the
    phase of the squeezing parameter in the ``S(z) = exp[(z* a^2 - z a^dag^2)/2]``
    convention; the two differ by ``pi/4``.
    """

    engine: str
    times: np.ndarray
    r_series: np.ndarray
    R_series: np.ndarray
    theta_min_series: np.ndarray
    var_min_series: np.ndarray
    var_max_series: np.ndarray
    var_theta_0_series: np.ndarray
    n_mean_series: np.ndarray
    squeeze_angle: float
    xi_ii: complex
    warnings: tuple = ()

    @property
    def r(self) -> float:
        return float(self.r_series[-1])

    @property
    def R(self) -> float:
        return float(self.R_series[-1])

    @property
    def theta_min(self) -> float:
        return float(self.theta_min_series[-1])

    @property
    def var_min(self) -> float:
        return float(self.var_min_series[-1])

    @property
    def var_max(self) -> float:
        return float(self.var_max_series[-1])

    @property
    def n_mean(self) -> float:
        return float(self.n_mean_series[-1])

    def series(self) -> dict:
        return {"t_seconds": self.times, "r": self.r_series, "R_percent": self.R_series,
                "theta_min": self.theta_min_series, "var_min": self.var_min_series,
                "var_max": self.var_max_series, "var_theta_0": self.var_theta_0_series,
                "n_mean": self.n_mean_series}


def run_h1_squeezing(p: SystemParams, t_final: float, samples: int, engine: str = "analytic",
                     eff: EffectiveParams | None = None, N_cav: int = 64,
                     alpha: complex = 0.0) -> SqueezeResult:
    """Squeeze the cavity with ``H1 = xi_ii a^dag^2 + h.c.`` (ion in ``|i>``, anti-node).

    The analytic engine uses ``r(t) = 2|xi_ii| t``; the numeric engine propagates
    ``H1`` on ``N_cav`` levels and reads ``r`` back from ``var_min = e^{-2r}/4``.
    ``alpha`` is the initial coherent amplitude of the cavity (vacuum by default).
    """
    if engine not in ("analytic", "numeric"):
        raise ValueError(f"engine must be 'analytic' or 'numeric', got {engine!r}")
    if eff is None:
        eff = effective_params(p)
    check_engineered(p, eff, "H1")
    times = _time_grid(t_final, samples)
    xi = eff.xi_ii
    Theta = float(np.angle(xi)) if xi != 0 else 0.0
    warns: tuple = ()

    if engine == "analytic":
        r = 2.0 * abs(xi) * times
        # a(t) = cosh(r) a - i e^{i Theta} sinh(r) a^dag
        mean_a = alpha * np.cosh(r) - 1j * np.exp(1j * Theta) * np.conj(alpha) * np.sinh(r)
        var_min = 0.25 * np.exp(-2.0 * r)
        var_max = 0.25 * np.exp(2.0 * r)
        theta_min = np.full_like(times, np.mod(0.5 * Theta + 0.25 * np.pi, np.pi))
        c0 = bogoliubov(0.0, 2.0 * xi, times)
        var0 = c0.vacuum_variance(0.0) if xi != 0 else np.full_like(times, 0.25)
        n_mean = np.abs(mean_a) ** 2 + np.sinh(r) ** 2
    else:
        space = SpaceSignature.of(Boson(N_cav))
        H = build_engineered(p, eff, "H1", space, check=False)
        psi0 = coherent_state(space, 0, alpha)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", TruncationWarning)
            states = evolve_static(H, psi0, times)
        warns = tuple(str(w.message) for w in caught if issubclass(w.category, TruncationWarning))
        for msg in warns:
            warnings.warn(msg, TruncationWarning, stacklevel=2)
        moments = [mode_moments(s, 0) for s in states]
        ext = np.array([quadrature_extremes(mo) for mo in moments])
        theta_min, var_min, var_max = ext[:, 0], ext[:, 1], ext[:, 2]
        var0 = np.array([variance_from_moments(mo, 0.0) for mo in moments])
        n_mean = np.array([mo["ada"] for mo in moments])
        r = -0.5 * np.log(np.clip(4.0 * var_min, 1e-300, None))
    return SqueezeResult(engine, times, np.asarray(r, float), squeezing_rate(r), np.asarray(theta_min, float),
                         np.asarray(var_min, float), np.asarray(var_max, float), np.asarray(var0, float),
                         np.asarray(n_mean, float), 0.5 * Theta, complex(xi), warns)


# ---------------------------------------------------------------------------
# F(m) regime maps

@dataclass(frozen=True)
class RegimeMap:
    """Regime classification of levels ``m = 0 .. m_max`` at one detuning."""

    delta: float
    reports: tuple

    @property
    def m(self) -> np.ndarray:
        return np.array([r.m for r in self.reports])

    @property
    def F_abs(self) -> np.ndarray:
        return np.array([r.F_abs for r in self.reports])

    @property
    def codes(self) -> np.ndarray:
        return np.array([r.code for r in self.reports])

    @property
    def resonant_levels(self) -> tuple:
        return tuple(r.m for r in self.reports if r.classification == "resonant")

    def classes_over(self, levels) -> set:
        wanted = set(int(m) for m in levels)
        return {r.classification for r in self.reports if r.m in wanted}

    @property
    def crossings(self) -> int:
        """Number of adjacent level pairs whose classification differs."""
        c = self.codes
        return int(np.count_nonzero(c[1:] != c[:-1]))

    @property
    def shape(self) -> str:
        """``constant``, ``increasing``, ``decreasing``, ``singular`` or ``nonmonotonic`` in ``|F(m)|``."""
        if self.resonant_levels:
            return "singular"
        d = np.diff(self.F_abs)
        scale = max(float(np.max(self.F_abs)), 1e-300)
        tol = 1e-12 * scale
        if np.all(np.abs(d) <= tol):
            return "constant"
        if np.all(d > -tol):
            return "increasing"
        if np.all(d < tol):
            return "decreasing"
        return "nonmonotonic"


def regime_map(p: SystemParams, eff: EffectiveParams, delta_values, m_max: int,
               critical_tol: float = 1e-9) -> list:
    """One :class:`RegimeMap` per detuning in ``delta_values``."""
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    out = []
    for d in delta_values:
        reports = tuple(classify(m, eff, p, float(d), critical_tol) for m in range(m_max + 1))
        out.append(RegimeMap(float(d), reports))
    return out


def significant_levels(beta: complex, weight: float = 1e-3, n_max: int | None = None) -> np.ndarray:
    """Vibrational levels carrying at least ``weight`` Poisson population in ``|beta>``."""
    if n_max is None:
        n_max = int(abs(beta) ** 2 + 12.0 * abs(beta) + 20)
    return np.flatnonzero(poisson_weights(beta, n_max) >= weight)


# ---------------------------------------------------------------------------
# block propagation of the Fock-resolved Hamiltonian

def _propagate_blocks(Xis, Gammas, n_cav: int, times) -> np.ndarray:
    """Cavity states ``S_m(t)|0>`` for every level; shape ``(levels, times, n_cav)``."""
    out = np.empty((len(Xis), len(times), n_cav), dtype=complex)
    for k, (Xi, G) in enumerate(zip(Xis, Gammas)):
        evals, Q = np.linalg.eigh(fock_block_hamiltonian(float(Xi), complex(G), n_cav).data)
        c0 = Q[0].conj()
        out[k] = (np.exp(-1j * np.outer(times, evals)) * c0) @ Q.T
    return out


def _block_moments(P: np.ndarray) -> dict:
    """Truncated-ladder moments of cavity vectors along the last axis."""
    n = np.arange(P.shape[-1])
    s1 = np.sqrt(n[1:])
    s2 = np.sqrt(n[1:-1] * n[2:])
    pop = np.abs(P) ** 2
    return {
        "a": np.sum(P[..., :-1].conj() * s1 * P[..., 1:], axis=-1),
        "aa": np.sum(P[..., :-2].conj() * s2 * P[..., 2:], axis=-1),
        "ada": np.sum(pop * n, axis=-1),
        "aad": np.sum(pop[..., :-1] * (n[:-1] + 1), axis=-1),
    }


def _mix(moments: dict, weights: np.ndarray) -> dict:
    return {k: np.tensordot(weights, v, axes=(0, 0)) for k, v in moments.items()}


def _cavity_top_population(P: np.ndarray, weights: np.ndarray) -> np.ndarray:
    n_cav = P.shape[-1]
    k = top_level_count(n_cav)
    return np.tensordot(weights, np.sum(np.abs(P[..., n_cav - k:]) ** 2, axis=-1), axes=(0, 0))


# ---------------------------------------------------------------------------
# Fock-state filter

@dataclass(frozen=True)
class FilterResult:
    """Outcome of the resonant Fock filter.

    ``n_RS`` is the photon number of the resonant block, ``n_RS_analytic`` the
    closed form ``sinh^2(|Gamma(M)| t)``. ``n_NS`` is the nonresonant photon
    number normalized by ``1 - |C_M|^2``. The conditioned state follows a
    projective photon-number measurement with count ``>= n_threshold``.
    """

    M: int
    beta: complex
    times: np.ndarray
    success_prob: float
    n_RS: np.ndarray
    n_RS_analytic: np.ndarray
    n_NS: np.ndarray
    bound_NS: float
    norm: np.ndarray
    n_threshold: float
    detection_prob: float
    fidelity: float
    conditional_density: np.ndarray
    post_measure_state: StateVector
    delta_resonant: float
    delta_unscaled: float
    notes: tuple = ()
    warnings: tuple = ()

    def series(self) -> dict:
        return {"t_seconds": self.times, "n_RS": self.n_RS, "n_RS_analytic": self.n_RS_analytic,
                "n_NS": self.n_NS, "norm": self.norm}


def run_fock_filter(p: SystemParams, eff: EffectiveParams, M: int, beta: complex, t_final: float,
                    samples: int, n_threshold: float, N_cav: int = 64, N_vib: int = 32,
                    separation: float = FILTER_SEPARATION) -> FilterResult:
    """Resonantly amplify the cavity only when the vibration is in ``|M>``, then measure photons.

    Raises:
        RegimeError: ``delta`` does not make level ``M`` resonant, or
            ``omega_ii < separation |xi_ii|``.
        TruncationError: ``N_vib`` cannot hold ``|beta>``.
    """
    if not 0 <= M < N_vib:
        raise ValueError(f"M must lie in [0, N_vib), got {M}")
    target = p.eta ** 2 * eff.omega_ii * (2 * M + 1)
    if not is_tuned(p.delta, target):
        raise RegimeError(f"filter requires delta = eta^2 omega_ii (2M+1) = {target} for M={M}, got {p.delta}")
    if eff.omega_ii < separation * abs(eff.xi_ii):
        raise RegimeError(
            f"filter requires omega_ii >= {separation:g} |xi_ii| (omega_ii={eff.omega_ii}, |xi_ii|={abs(eff.xi_ii)})")

    vib = coherent_state(SpaceSignature.of(Boson(N_vib)), 0, beta)
    C = vib.amplitudes
    weights = np.abs(C) ** 2
    times = _time_grid(t_final, samples)
    levels = np.arange(N_vib)
    Xis = xi_of_m(p, eff, levels)
    Xis[M] = 0.0  # removes the rounding residue of the tuned detuning
    Gammas = gamma_of_m(p, eff, levels)
    P = _propagate_blocks(Xis, Gammas, N_cav, times)

    n_blocks = _block_moments(P)["ada"].real
    cM = float(weights[M])
    others = weights.copy()
    others[M] = 0.0
    n_RS = n_blocks[M]
    n_NS = (others @ n_blocks) / (1.0 - cM) if cM < 1.0 else np.zeros_like(times)
    n_RS_analytic = bogoliubov(0.0, Gammas[M], times).mean_photons() * np.ones_like(times)
    norm = weights @ np.sum(np.abs(P) ** 2, axis=-1)

    warns = []
    top = _cavity_top_population(P, weights)
    if np.max(top) >= TOP_POPULATION_TOL:
        warns.append(f"cavity (N={N_cav}): top-10% population {np.max(top):.2e} >= {TOP_POPULATION_TOL:g}")
    if np.max(n_RS_analytic) >= N_cav / 4.0:
        warns.append(f"sinh^2(|Gamma(M)| t) = {np.max(n_RS_analytic):.3g} approaches N_cav/4")
    for msg in warns:
        warnings.warn(msg, TruncationWarning, stacklevel=2)

    # conditioning on a photon count >= n_threshold at the final time
    counts = np.arange(N_cav) >= math.ceil(n_threshold)
    final = P[:, -1, :]
    amp = C[:, None] * final
    rho = (amp[:, counts]) @ (amp[:, counts]).conj().T
    detection = float(np.real(np.trace(rho)))
    fidelity = float(np.real(rho[M, M]) / detection) if detection > 0 else 0.0
    if detection > 0:
        rho = rho / detection
        n_star = int(np.flatnonzero(counts)[np.argmax(np.sum(np.abs(amp[:, counts]) ** 2, axis=0))])
        post = StateVector(vib.space, amp[:, n_star])
    else:
        post = vib
        warns.append("photon count never reaches the threshold; conditioned state is the prior")

    return FilterResult(
        M, complex(beta), times, cM, n_RS, n_RS_analytic, n_NS, abs(eff.xi_ii) / eff.omega_ii if eff.omega_ii else 0.0,
        norm, float(n_threshold), detection, fidelity, rho, post, target, eff.omega_ii * (2 * M + 1),
        notes=("resonant photon number uses sinh^2(|Gamma(M)| t); the squared-rate exponent is "
               "dimensionally inconsistent",
               "detuning resonance condition includes eta^2: delta = eta^2 omega_ii (2M+1)"),
        warnings=tuple(warns))


# ---------------------------------------------------------------------------
# semiclassical limit

@dataclass(frozen=True)
class SemiclassicalCurve:
    """Quantum versus semiclassical squeezed-quadrature variance for one ``beta``.

    ``theta_sq = arg(xi_ii)/2 + pi/4`` is the angle squeezed by the semiclassical
    Hamiltonian; for ``xi_ii = -i|xi_ii|`` it is the ``(a + a^dag)/2`` quadrature.
    """

    beta: complex
    delta: float
    theta_sq: float
    times: np.ndarray
    r: np.ndarray
    var_quantum: np.ndarray
    var_semiclassical: np.ndarray
    var_reference: np.ndarray
    n_quantum: np.ndarray
    warnings: tuple = ()

    @property
    def deviation(self) -> np.ndarray:
        return self.var_quantum - self.var_semiclassical

    def deviation_at(self, r: float) -> float:
        return float(np.interp(r, self.r, self.deviation))

    def series(self) -> dict:
        return {"t_seconds": self.times, "r": self.r, "var_quantum": self.var_quantum,
                "var_semiclassical": self.var_semiclassical, "var_reference": self.var_reference,
                "deviation": self.deviation, "n_mean": self.n_quantum}


def run_semiclassical_comparison(p: SystemParams, eff: EffectiveParams, beta_values, r_max: float,
                                 samples: int, N_cav: int = 64, N_vib: int = 64,
                                 cavity_engine: str = "numeric") -> list:
    """Compare the Fock-resolved quantum model with its coherent-vibration limit.

    For each ``beta`` the detuning is set to ``2 eta^2 |beta|^2 omega_ii`` and
    time is mapped from ``r = 4 eta^2 |beta|^2 |xi_ii| t``. The quantum side
    keeps ``(2 b^dag b + 1)`` as an operator and propagates every vibrational
    level; the semiclassical side replaces it by ``2|beta|^2``.

    ``cavity_engine="numeric"`` propagates each level's cavity block on
    ``N_cav`` states. ``"bogoliubov"`` uses the exact closed-form solution of
    each block instead, which needs no cavity truncation; use it when rare
    high-``m`` levels amplify beyond any practical ``N_cav``.

    Raises:
        TruncationError: ``N_vib`` cannot hold ``|beta>`` or the cavity
            population reaches the top of the ``N_cav`` ladder.
    """
    if cavity_engine not in ("numeric", "bogoliubov"):
        raise ValueError(f"cavity_engine must be 'numeric' or 'bogoliubov', got {cavity_engine!r}")
    if eff.xi_ii == 0:
        raise RegimeError("semiclassical comparison needs xi_ii != 0")
    if p.eta == 0:
        raise RegimeError("semiclassical comparison needs eta > 0")
    theta_sq = float(np.mod(0.5 * np.angle(eff.xi_ii) + 0.25 * np.pi, np.pi))
    r = np.linspace(0.0, r_max, samples) if samples > 1 else np.array([r_max])
    curves = []
    for beta in beta_values:
        nb = abs(beta) ** 2
        if nb == 0:
            raise RegimeError("semiclassical comparison needs beta != 0")
        pb = p.replace(delta=2.0 * p.eta ** 2 * nb * eff.omega_ii)
        times = r / (4.0 * p.eta ** 2 * nb * abs(eff.xi_ii))

        vib = coherent_state(SpaceSignature.of(Boson(N_vib)), 0, beta)
        weights = np.abs(vib.amplitudes) ** 2
        levels = np.arange(N_vib)
        Xis, Gammas = xi_of_m(pb, eff, levels), gamma_of_m(pb, eff, levels)
        if cavity_engine == "numeric":
            P = _propagate_blocks(Xis, Gammas, N_cav, times)
            mixed = _mix(_block_moments(P), weights)
            top = _cavity_top_population(P, weights)
            if np.max(top) >= TOP_POPULATION_TOL:
                raise TruncationError(
                    f"beta={beta}: cavity top-10% population {np.max(top):.2e} >= {TOP_POPULATION_TOL:g} "
                    f"at N_cav={N_cav}; increase N_cav")
            var_q = variance_from_moments(mixed, theta_sq)
            n_q = np.real(mixed["ada"])
        else:
            coeffs = [bogoliubov(Xi, G, times) for Xi, G in zip(Xis, Gammas)]
            var_q = weights @ np.array([c.vacuum_variance(theta_sq) for c in coeffs])
            n_q = weights @ np.array([c.mean_photons() for c in coeffs])

        cav = SpaceSignature.of(Boson(N_cav))
        H_sc = semiclassical_hamiltonian(pb, eff, beta, cav)
        with warnings.catch_warnings():
            warnings.simplefilter("error", TruncationWarning)
            try:
                states = evolve_static(H_sc, basis_state(cav, (0,)), times)
            except TruncationWarning as w:
                raise TruncationError(f"beta={beta}: semiclassical run {w}") from None
        var_sc = np.array([variance_from_moments(mode_moments(s, 0), theta_sq) for s in states])
        curves.append(SemiclassicalCurve(complex(beta), pb.delta, theta_sq, times, r, np.asarray(var_q),
                                         var_sc, 0.25 * np.exp(-2.0 * r), n_q))
    return curves


__all__ = [
    "FilterResult", "RegimeMap", "SemiclassicalCurve", "SqueezeResult", "REGIME_CODES", "RegimeReport",
    "regime_map", "run_fock_filter", "run_h1_squeezing", "run_semiclassical_comparison",
    "significant_levels", "squeezing_rate",
]
