"""Time evolution and closed-form parametric-amplification solutions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ContractError, SignatureError, StepGuardError
from .fockalg import HERMITIAN_RTOL, OperatorMatrix, StateVector, TruncationTracker
from .model import EffectiveParams, SystemParams, gamma_of_m, xi_of_m

REGIME_CODES = {"subcritical": 0, "critical": 1, "supercritical": 2, "resonant": 3}
CRITICAL_TOL = 1e-9
RESONANT_RTOL = 1e-12
STEP_GUARD = 0.05


def _spectral(H: OperatorMatrix):
    if H.hermiticity_error() > HERMITIAN_RTOL:
        raise ContractError(f"generator is not Hermitian (relative error {H.hermiticity_error():.3e})")
    return np.linalg.eigh(0.5 * (H.data + H.data.conj().T))


def _guarded(space, amps, tracker: TruncationTracker) -> StateVector:
    st = StateVector(space, amps, normalize=False)
    return st.with_warnings(tracker.observe(st))


def evolve_static(H: OperatorMatrix, psi0: StateVector, times: Sequence[float]) -> list:
    """``exp(-i H t) psi0`` for each ``t``, from one eigendecomposition."""
    if H.space != psi0.space:
        raise SignatureError("Hamiltonian and state live on different spaces")
    evals, Q = _spectral(H)
    c0 = Q.conj().T @ psi0.amplitudes
    tracker = TruncationTracker()
    out = [_guarded(psi0.space, Q @ (np.exp(-1j * evals * t) * c0), tracker) for t in times]
    tracker.emit()
    return out


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: tuple

    def observable(self, fn: Callable[[StateVector], float]) -> np.ndarray:
        return np.array([fn(s) for s in self.states])

    @property
    def final(self) -> StateVector:
        return self.states[-1]


def evolve_timedep(H_builder: Callable[[float], OperatorMatrix], psi0: StateVector,
                   t_max: float, dt: float, guard: float = STEP_GUARD) -> Trajectory:
    """Time-ordered midpoint-exponential propagation.

    Each step applies ``exp(-i H(t_k + dt/2) dt)``, which is unitary and
    second-order accurate. ``dt`` is shrunk so that an integer number of steps
    lands on ``t_max``.

    Raises:
        StepGuardError: ``dt * max|H| > guard`` at some midpoint.
    """
    if dt <= 0 or t_max < 0:
        raise ValueError("need dt > 0 and t_max >= 0")
    n_steps = max(1, math.ceil(t_max / dt - 1e-12)) if t_max > 0 else 0
    h = t_max / n_steps if n_steps else 0.0
    psi = psi0.amplitudes.copy()
    states = [psi0]
    tracker = TruncationTracker()
    for k in range(n_steps):
        H = H_builder((k + 0.5) * h)
        if H.space != psi0.space:
            raise SignatureError("Hamiltonian snapshot lives on a different space")
        if h * H.max_abs() > guard:
            raise StepGuardError(
                f"dt*max|H| = {h * H.max_abs():.3g} exceeds {guard}; use dt <= {guard / H.max_abs():.3g}")
        evals, Q = _spectral(H)
        psi = Q @ (np.exp(-1j * evals * h) * (Q.conj().T @ psi))
        states.append(_guarded(psi0.space, psi, tracker))
    tracker.emit()
    return Trajectory(np.linspace(0.0, t_max, n_steps + 1), tuple(states))


def converge_timedep(H_builder: Callable[[float], OperatorMatrix], psi0: StateVector, t_max: float,
                     dt: float, observable: Callable[[StateVector], float], tol: float = 1e-6,
                     max_halvings: int = 8):
    """Halve ``dt`` until the final-time observable changes by less than ``tol``.

    Returns ``(trajectory, dt_used, last_change)``.
    """
    traj = evolve_timedep(H_builder, psi0, t_max, dt)
    prev = observable(traj.final)
    for _ in range(max_halvings):
        dt /= 2.0
        traj = evolve_timedep(H_builder, psi0, t_max, dt)
        cur = observable(traj.final)
        change = abs(cur - prev)
        if change < tol:
            return traj, dt, change
        prev = cur
    raise StepGuardError(f"no convergence to {tol} after {max_halvings} halvings (last change {change:.3g})")


# ---------------------------------------------------------------------------
# Heisenberg solutions of  H = Xi a^dag a + (Gamma a^dag^2 + h.c.)/2

@dataclass(frozen=True)
class BogoliubovCoefficients:
    """``a(t) = f a - i g a^dag`` for one vibrational level."""

    f: complex
    g: complex
    regime: str
    w: float

    def mean_photons(self):
        """``<a^dag a>`` starting from the cavity vacuum."""
        return np.abs(self.g) ** 2

    def vacuum_variance(self, theta):
        """Variance of ``(a e^{-i theta} + h.c.)/2`` starting from the vacuum."""
        c = self.f * np.exp(-1j * np.asarray(theta)) + 1j * np.conj(self.g) * np.exp(1j * np.asarray(theta))
        return 0.25 * np.abs(c) ** 2

    def vacuum_variance_extremes(self) -> tuple:
        af, ag = np.abs(self.f), np.abs(self.g)
        return 0.25 * (af - ag) ** 2, 0.25 * (af + ag) ** 2


def amplification_regime(Xi: float, Gamma: complex, critical_tol: float = CRITICAL_TOL) -> str:
    scale = max(abs(Xi), abs(Gamma))
    if abs(Xi) <= RESONANT_RTOL * scale or scale == 0.0:
        return "resonant"
    ratio = abs(Gamma) / abs(Xi)
    if abs(ratio - 1.0) <= critical_tol:
        return "critical"
    return "subcritical" if ratio < 1.0 else "supercritical"


def bogoliubov(Xi: float, Gamma: complex, t, critical_tol: float = CRITICAL_TOL) -> BogoliubovCoefficients:
    """Closed-form ``f(t), g(t)`` in the subcritical, critical, supercritical or resonant regime.

    ``t`` may be a scalar or an array. In the critical case ``f = 1 - i Xi t``,
    the choice that keeps ``|f|^2 - |g|^2 = 1``. ``Xi = Gamma = 0`` gives the
    identity.
    """
    t = np.asarray(t, dtype=float)
    Xi = float(Xi)
    Gamma = complex(Gamma)
    regime = amplification_regime(Xi, Gamma, critical_tol)
    if Gamma == 0 and Xi == 0:
        return BogoliubovCoefficients(np.ones_like(t) + 0j, np.zeros_like(t) + 0j, "resonant", 0.0)
    if regime == "resonant":
        G = abs(Gamma)
        return BogoliubovCoefficients(np.cosh(G * t) + 0j, (Gamma / G) * np.sinh(G * t), regime, G)
    if regime == "critical":
        return BogoliubovCoefficients(1.0 - 1j * Xi * t, Gamma * t + 0j, regime, 0.0)
    w = math.sqrt(abs(abs(Gamma) ** 2 - Xi ** 2))
    if regime == "subcritical":
        s, c = np.sin(w * t), np.cos(w * t)
    else:
        s, c = np.sinh(w * t), np.cosh(w * t)
    return BogoliubovCoefficients(c - 1j * (Xi / w) * s, (Gamma / w) * s, regime, w)


@dataclass(frozen=True)
class RegimeReport:
    m: int
    Xi: float
    Gamma: complex
    F: complex | None
    classification: str

    @property
    def F_abs(self) -> float:
        return math.nan if self.F is None else abs(self.F)

    @property
    def code(self) -> int:
        return REGIME_CODES[self.classification]


def classify(m: int, eff: EffectiveParams, p: SystemParams, delta: float | None = None,
             critical_tol: float = CRITICAL_TOL) -> RegimeReport:
    """Amplification regime of vibrational level ``m``.

    ``Xi(m) = eta^2 omega_ii (2m+1) - delta``, ``Gamma(m) = 2 eta^2 xi_ii (2m+1)``,
    ``F = Gamma / Xi``. ``delta`` defaults to ``p.delta``. At ``Xi = 0`` the level
    is resonant and ``F`` is ``None``.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    d = p.delta if delta is None else delta
    Xi = float(xi_of_m(p, eff, m, d))
    Gamma = complex(gamma_of_m(p, eff, m))
    stark = abs(p.eta ** 2 * eff.omega_ii * (2 * m + 1))
    if abs(Xi) <= RESONANT_RTOL * max(stark, abs(d)) or (stark == 0 and d == 0):
        return RegimeReport(m, Xi, Gamma, None, "resonant")
    F = Gamma / Xi
    if abs(abs(F) - 1.0) <= critical_tol:
        cls = "critical"
    else:
        cls = "subcritical" if abs(F) < 1.0 else "supercritical"
    return RegimeReport(m, Xi, Gamma, F, cls)


def resonant_detuning(p: SystemParams, eff: EffectiveParams, M: int) -> float:
    """Detuning that makes level ``M`` resonant: ``delta = eta^2 omega_ii (2M + 1)``."""
    return p.eta ** 2 * eff.omega_ii * (2 * M + 1)
