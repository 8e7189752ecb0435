"""Physical parameters and Hamiltonian builders for the driven ion in a cavity.

Space conventions:

* full model: ``Boson(N_cav) x Boson(N_vib) x Atom()``
* engineered interactions: ``Boson(N_cav) x Boson(N_vib)``; ``H1`` also
  accepts a cavity-only space
* semiclassical Hamiltonian: ``Boson(N_cav)``

All frequencies are angular (rad/s), times in seconds, hbar = 1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import RegimeError, RegimeWarning, SignatureError
from .fockalg import (
    Atom,
    Boson,
    OperatorMatrix,
    SpaceSignature,
    atomic_projector,
    embed,
    hermitian_function,
    identity,
    ladder,
    lowering_matrix,
    number,
)

ETA_MAX = 0.3
ETA_WARN = 0.2
ETA_L_MAX = 0.1
MARGIN = 10.0
TUNING_RTOL = 1e-6
PHASE_ATOL = 1e-9

ENGINEERED = ("H1", "H2", "H3", "H4", "H5", "H_eq14", "H_eq17")


@dataclass(frozen=True)
class SystemParams:
    """Constants of the full ion-cavity Hamiltonian.

    ``delta`` is the two-photon detuning ``omega_0/2 - omega``; the atomic
    transition frequency is derived, never stored. ``varphi`` places the ion in
    the standing wave (0 = node, pi/2 = anti-node). The classical drive is
    ``Omega = Omega_abs * exp(-1j * phi_drive)``.
    """

    omega: float = 0.0
    nu: float = 0.0
    delta: float = 0.0
    Delta: float = 0.0
    lambda1: complex = 0.0
    lambda2: complex = 0.0
    Omega_abs: float = 0.0
    phi_drive: float = 0.0
    eta: float = 0.0
    eta_L: float = 0.0
    varphi: float = 0.0

    def __post_init__(self):
        for name in ("omega", "nu", "delta", "Delta", "Omega_abs", "phi_drive",
                     "eta", "eta_L", "varphi"):
            val = getattr(self, name)
            if isinstance(val, complex) or not np.isfinite(val):
                raise ValueError(f"{name} must be a finite real number, got {val!r}")
            object.__setattr__(self, name, float(val))
        for name in ("lambda1", "lambda2"):
            val = complex(getattr(self, name))
            if not np.isfinite(val):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        for name in ("omega", "nu", "Delta", "Omega_abs", "eta", "eta_L"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.eta > ETA_MAX:
            raise RegimeError(f"Lamb-Dicke limit violated: eta={self.eta} > {ETA_MAX}")
        if self.eta > ETA_WARN:
            warnings.warn(f"eta={self.eta} > {ETA_WARN}: eta^3 corrections may matter",
                          RegimeWarning, stacklevel=3)

    @property
    def omega0(self) -> float:
        """Atomic g-e transition frequency ``2 (omega + delta)``."""
        return 2.0 * (self.omega + self.delta)

    @property
    def Omega(self) -> complex:
        return self.Omega_abs * np.exp(-1j * self.phi_drive)

    def replace(self, **changes) -> "SystemParams":
        kw = {f.name: getattr(self, f.name) for f in fields(self)}
        kw.update(changes)
        return SystemParams(**kw)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_NAN = complex(np.nan, np.nan)


@dataclass(frozen=True)
class EffectiveParams:
    """Effective parameters after adiabatic elimination of the ``|+->`` <-> ``|i>`` transitions.

    ``regime`` is ``"weak"``, ``"strong"`` or ``"manual"`` (values supplied
    directly, branch parameters undefined). ``xi_pp_alt`` holds the strong-regime
    alternative ``xi_s / 2`` for ``xi_pp``; ``notes`` records caveats.
    """

    regime: str
    omega_ii: float
    chi_ii: float
    xi_ii: complex
    omega_pp: float = math.nan
    chi_pp: float = math.nan
    xi_pp: complex = _NAN
    omega_mm: float = math.nan
    chi_mm: float = math.nan
    xi_mm: complex = _NAN
    omega_pm: float = math.nan
    chi_pm: float = math.nan
    xi_pm: complex = _NAN
    xi_pp_alt: complex | None = None
    overridden: bool = False
    notes: tuple = field(default=())

    @classmethod
    def manual(cls, omega_ii: float, xi_ii: complex, chi_ii: float = 0.0) -> "EffectiveParams":
        """Effective parameters given directly, e.g. for regime maps."""
        return cls("manual", float(omega_ii), float(chi_ii), complex(xi_ii),
                   notes=("values supplied directly; branch parameters undefined",))

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# ---------------------------------------------------------------------------
# helpers

def _require_full_space(space: SpaceSignature):
    f = space.factors
    if not (len(f) == 3 and isinstance(f[0], Boson) and isinstance(f[1], Boson)
            and isinstance(f[2], Atom)):
        raise SignatureError(f"expected Boson x Boson x Atom, got {space}")


def _require_modes(space: SpaceSignature, allow_cavity_only: bool = False):
    f = space.factors
    ok = len(f) == 2 and all(isinstance(x, Boson) for x in f)
    if allow_cavity_only:
        ok = ok or (len(f) == 1 and isinstance(f[0], Boson))
    if not ok:
        want = "Boson x Boson" + (" or Boson" if allow_cavity_only else "")
        raise SignatureError(f"expected {want}, got {space}")


def is_tuned(actual: float, target: float) -> bool:
    scale = max(abs(actual), abs(target))
    return scale == 0.0 or abs(actual - target) <= TUNING_RTOL * scale


def _position(space: SpaceSignature, index: int) -> OperatorMatrix:
    """``b + b^dag`` of the given mode."""
    b = ladder(space, index)
    return b + b.dag()


def free_rotation(space: SpaceSignature, index: int, angle: float) -> OperatorMatrix:
    """``exp(-i angle n)`` on one mode (diagonal)."""
    n = space.boson(index).n
    return embed(space, index, np.diag(np.exp(-1j * angle * np.arange(n))))


def rotating_frame_generator(p: SystemParams, space: SpaceSignature) -> OperatorMatrix:
    """``H0 - Delta sigma_ii``: the generator of the combined interaction and Delta frames."""
    _require_full_space(space)
    return (p.omega * number(space, 0) + p.nu * number(space, 1)
            + (p.omega + p.delta) * (atomic_projector(space, 2, "e", "e")
                                     - atomic_projector(space, 2, "g", "g")))


def sin2_factor(p: SystemParams, space: SpaceSignature, exact: bool = True,
                index: int = 1) -> OperatorMatrix:
    """``sin^2[eta (b + b^dag) + varphi]`` on the vibrational mode.

    ``exact=False`` returns the node/anti-node expansion (identity at
    ``varphi = pi/2``, ``eta^2 (b + b^dag)^2`` at ``varphi = 0``).
    """
    if exact:
        s = hermitian_function(p.eta * _position(space, index), "sin", shift=p.varphi)
        return s @ s
    if abs(p.varphi - np.pi / 2) <= PHASE_ATOL:
        return identity(space)
    if abs(p.varphi) <= PHASE_ATOL:
        x = _position(space, index)
        return p.eta ** 2 * (x @ x)
    raise RegimeError("the sin^2 expansion exists only at varphi=0 (node) or varphi=pi/2 (anti-node)")


# ---------------------------------------------------------------------------
# full model

def _motional_functions(p: SystemParams, space: SpaceSignature, t: float):
    """Rotated ``sin[eta x + varphi]`` and ``exp(i eta_L x)`` on the vibrational mode."""
    x = _position(space, 1)
    S = hermitian_function(p.eta * x, "sin", shift=p.varphi)
    E = hermitian_function(p.eta_L * x, "exp_i")
    if t != 0.0 and p.nu != 0.0:
        # U0^dag f(b, b^dag) U0 = e^{+i nu n t} f e^{-i nu n t}
        R = free_rotation(space, 1, -p.nu * t)
        S = R @ S @ R.dag()
        E = R @ E @ R.dag()
    return S, E


def build_full_hamiltonian(p: SystemParams, space: SpaceSignature, t: float = 0.0,
                           frame: str = "interaction") -> OperatorMatrix:
    """Full ion-cavity Hamiltonian at time ``t``.

    ``frame="lab"`` gives ``H0 + V(t)`` including counter-rotating terms;
    ``frame="interaction"`` gives the rotating-wave Hamiltonian in the frame of
    ``H0 - Delta sigma_ii``, where the motional functions carry the free trap
    rotation and the coupling term carries ``exp(-i delta t)``.
    """
    _require_full_space(space)
    a = ladder(space, 0)
    P = lambda r, s: atomic_projector(space, 2, r, s)  # noqa: E731
    dipole = p.lambda1 * P("g", "i") + p.lambda2 * P("i", "e")
    if frame == "lab":
        x = _position(space, 1)
        S = hermitian_function(p.eta * x, "sin", shift=p.varphi)
        E = hermitian_function(p.eta_L * x, "exp_i")
        drive = p.Omega * np.exp(-2j * (p.omega + p.delta) * t) * (P("e", "g") @ E)
        coupling = dipole @ (a + a.dag()) @ S + drive
        H0 = rotating_frame_generator(p, space) + p.Delta * P("i", "i")
        return H0 + coupling + coupling.dag()
    if frame == "interaction":
        S, E = _motional_functions(p, space, t)
        coupling = np.exp(-1j * p.delta * t) * (dipole @ a.dag() @ S) + p.Omega * (P("e", "g") @ E)
        return coupling + coupling.dag() + p.Delta * P("i", "i")
    raise ValueError(f"frame must be 'lab' or 'interaction', got {frame!r}")


def dressed_vectors(phi_drive: float) -> np.ndarray:
    """Columns ``|+>, |->, |i>`` in the bare ``(g, e, i)`` basis."""
    ph = np.exp(1j * phi_drive)
    s = 1.0 / math.sqrt(2.0)
    return np.array([[s * ph, -s * ph, 0.0],
                     [s, s, 0.0],
                     [0.0, 0.0, 1.0]], dtype=complex)


def dressed_rotation(p: SystemParams, space: SpaceSignature) -> OperatorMatrix:
    """Unitary taking dressed-basis coordinates ``(+, -, i)`` to bare ``(g, e, i)``."""
    _require_full_space(space)
    return embed(space, 2, dressed_vectors(p.phi_drive))


def build_dressed_hamiltonian(p: SystemParams, space: SpaceSignature, t: float = 0.0,
                              basis: str = "dressed") -> OperatorMatrix:
    """Interaction-frame Hamiltonian written on the dressed atomic states, with ``Sigma -> 1``.

    With ``basis="dressed"`` the atomic index map is ``+ -> 0, - -> 1, i -> 2``;
    ``basis="bare"`` returns the same operator in the ``g, e, i`` basis.
    """
    _require_full_space(space)
    if p.eta_L > ETA_L_MAX:
        raise RegimeError(f"Sigma ~ 1 needs eta_L <= {ETA_L_MAX}, got {p.eta_L}")
    S, _ = _motional_functions(p, space, t)
    a = ladder(space, 0)
    Lam = np.exp(-1j * p.delta * t) * S
    up = a.dag() @ Lam
    down = a @ Lam.dag()
    V = dressed_vectors(p.phi_drive)
    plus, minus, ket_i = V[:, 0], V[:, 1], V[:, 2]

    def proj(u, v):
        return embed(space, 2, np.outer(u, v.conj()))

    e = np.exp(-1j * p.phi_drive)
    coupling = (
        (p.lambda1 * e * up + np.conj(p.lambda2) * down) @ proj(plus, ket_i)
        - (p.lambda1 * e * up - np.conj(p.lambda2) * down) @ proj(minus, ket_i)
    ) / math.sqrt(2.0)
    H = (coupling + coupling.dag() + p.Delta * proj(ket_i, ket_i)
         + p.Omega_abs * (proj(plus, plus) - proj(minus, minus)))
    if basis == "bare":
        return H
    if basis == "dressed":
        W = dressed_rotation(p, space)
        return W.dag() @ H @ W
    raise ValueError(f"basis must be 'dressed' or 'bare', got {basis!r}")


# ---------------------------------------------------------------------------
# engineered interactions

def rotation_frequency(p: SystemParams, eff: EffectiveParams) -> float:
    """Dressed trap frequency ``Phi = nu + 2 eta^2 chi_ii``."""
    return p.nu + 2.0 * p.eta ** 2 * eff.chi_ii


def xi_of_m(p: SystemParams, eff: EffectiveParams, m, delta: float | None = None):
    """Diagonal coefficient ``eta^2 omega_ii (2m + 1) - delta`` of the Fock-resolved Hamiltonian."""
    d = p.delta if delta is None else delta
    return p.eta ** 2 * eff.omega_ii * (2 * np.asarray(m) + 1) - d


def gamma_of_m(p: SystemParams, eff: EffectiveParams, m):
    """Two-photon coefficient ``2 eta^2 xi_ii (2m + 1)``."""
    return 2.0 * p.eta ** 2 * eff.xi_ii * (2 * np.asarray(m) + 1)


def check_engineered(p: SystemParams, eff: EffectiveParams, which: str, margin: float = MARGIN):
    """Raise :class:`RegimeError` if ``which`` is outside its regime of validity."""
    if which not in ENGINEERED:
        raise ValueError(f"unknown engineered Hamiltonian {which!r}; choose from {ENGINEERED}")
    if which == "H1":
        if abs(p.varphi - np.pi / 2) > PHASE_ATOL:
            raise RegimeError(f"H1 requires varphi = pi/2 (anti-node), got {p.varphi}")
        if not is_tuned(p.delta, eff.omega_ii):
            raise RegimeError(f"H1 requires delta = omega_ii ({p.delta} != {eff.omega_ii})")
        return
    if abs(p.varphi) > PHASE_ATOL:
        raise RegimeError(f"{which} requires varphi = 0 (node), got {p.varphi}")
    if p.eta ** 4 * margin > 1.0:
        raise RegimeError(f"{which} requires eta^4 << 1 (eta^4 = {p.eta ** 4:.3g})")
    Phi = rotation_frequency(p, eff)
    if Phi <= 0:
        raise RegimeError(f"{which} requires Phi = nu + 2 eta^2 chi_ii > 0, got {Phi}")
    slow = max(abs(eff.omega_ii), abs(eff.chi_ii), abs(eff.xi_ii))
    if Phi < margin * slow:
        raise RegimeError(
            f"{which} requires Phi >> omega_ii, chi_ii, |xi_ii| (Phi={Phi:.4g}, max={slow:.4g})")
    if which == "H2" and not is_tuned(p.delta, Phi):
        raise RegimeError(f"H2 requires delta = Phi ({p.delta} != {Phi})")
    if which == "H3" and not is_tuned(p.delta, -Phi):
        raise RegimeError(f"H3 requires delta = -Phi ({p.delta} != {-Phi})")
    if which in ("H4", "H_eq17") and abs(p.delta) * margin > Phi:
        raise RegimeError(f"{which} requires |delta| << Phi (|delta|={abs(p.delta):.4g}, Phi={Phi:.4g})")
    if which == "H5":
        far = (abs(p.delta) * margin >= Phi and abs(p.delta - Phi) * margin >= Phi
               and abs(p.delta + Phi) * margin >= Phi)
        near_zero = abs(p.delta) * margin <= Phi and abs(eff.xi_ii) * margin <= abs(eff.omega_ii)
        if not (far or near_zero):
            raise RegimeError(
                "H5 requires either |delta| ~ Phi with |delta -+ Phi| ~ Phi, "
                "or delta ~ 0 with |xi_ii| << omega_ii")


def build_engineered(p: SystemParams, eff: EffectiveParams, which: str, space: SpaceSignature,
                     t: float = 0.0, check: bool = True) -> OperatorMatrix:
    """One of the engineered interactions ``H1 .. H5``, ``H_eq14`` or ``H_eq17``.

    ``H4`` and ``H_eq14`` depend on ``t``; the others ignore it. ``H_eq14`` is
    the node Hamiltonian in the rotating picture, keeping the two-phonon
    sidebands. ``H_eq17`` is ``H4`` seen from the frame
    ``exp(-i delta t a^dag a)``. Factor 0 is the cavity, factor 1 the vibration.
    """
    if check:
        check_engineered(p, eff, which)
    _require_modes(space, allow_cavity_only=(which == "H1"))
    a = ladder(space, 0)
    ad = a.dag()
    xi = eff.xi_ii
    if which == "H1":
        return xi * (ad @ ad) + np.conj(xi) * (a @ a)

    b = ladder(space, 1)
    bd = b.dag()
    eta2 = p.eta ** 2
    n_a = number(space, 0)
    kerr_weight = 2.0 * number(space, 1) + identity(space)
    pair = ad @ ad

    def hc(op):
        return op + op.dag()

    if which == "H2":
        return eta2 * eff.omega_ii * (kerr_weight @ n_a) + hc(eta2 * xi * (pair @ bd @ bd))
    if which == "H3":
        return eta2 * eff.omega_ii * (kerr_weight @ n_a) + hc(eta2 * xi * (pair @ b @ b))
    if which == "H5":
        return eta2 * eff.omega_ii * (n_a @ kerr_weight)
    if which == "H4":
        inner = eff.omega_ii * n_a + hc(xi * np.exp(-2j * p.delta * t) * pair)
        return eta2 * (kerr_weight @ inner)
    if which == "H_eq17":
        Xi = eta2 * eff.omega_ii * kerr_weight - p.delta * identity(space)
        Gamma = 2.0 * eta2 * xi * kerr_weight
        return Xi @ n_a + 0.5 * hc(Gamma @ pair)
    # H_eq14
    Phi = rotation_frequency(p, eff)
    inner = eff.omega_ii * n_a + hc(xi * np.exp(-2j * p.delta * t) * pair)
    H = eta2 * (kerr_weight @ inner)
    H = H + hc(eta2 * np.exp(2j * Phi * t) * ((eff.omega_ii * n_a + eff.chi_ii * identity(space)) @ bd @ bd))
    H = H + hc(eta2 * xi * np.exp(-2j * (p.delta - Phi) * t) * (pair @ bd @ bd))
    H = H + hc(eta2 * xi * np.exp(-2j * (p.delta + Phi) * t) * (pair @ b @ b))
    return H


def fock_block_hamiltonian(Xi: float, Gamma: complex, n_cav: int) -> OperatorMatrix:
    """Cavity Hamiltonian ``Xi a^dag a + (Gamma a^dag^2 + h.c.) / 2`` for one vibrational level."""
    space = SpaceSignature.of(Boson(n_cav))
    a = lowering_matrix(n_cav)
    ad = a.conj().T
    pair = 0.5 * Gamma * (ad @ ad)
    return OperatorMatrix(space, Xi * (ad @ a) + pair + pair.conj().T)


def semiclassical_hamiltonian(p: SystemParams, eff: EffectiveParams, beta: complex,
                              space: SpaceSignature, check: bool = True) -> OperatorMatrix:
    """Cavity-only squeezing Hamiltonian ``2 eta^2 |beta|^2 (xi_ii a^dag^2 + h.c.)``.

    Valid when the detuning compensates the mean Stark shift,
    ``delta = 2 eta^2 |beta|^2 omega_ii``.
    """
    if len(space.factors) != 1 or not isinstance(space.factors[0], Boson):
        raise SignatureError(f"semiclassical Hamiltonian lives on a cavity-only space, got {space}")
    target = 2.0 * p.eta ** 2 * abs(beta) ** 2 * eff.omega_ii
    if check and not is_tuned(p.delta, target):
        raise RegimeError(f"semiclassical form requires delta = 2 eta^2 |beta|^2 omega_ii = {target}")
    a = ladder(space, 0)
    pair = 2.0 * p.eta ** 2 * abs(beta) ** 2 * eff.xi_ii * (a.dag() @ a.dag())
    return pair + pair.dag()
