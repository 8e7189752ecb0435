"""Dense operator algebra on truncated Fock spaces tensored with a three-level atom.

Factors are either bosonic modes truncated to ``N`` levels or a three-level
atom. Atomic levels use the fixed index map ``g -> 0, e -> 1, i -> 2``.
Multi-factor operators are Kronecker products in factor order (factor 0 is
the slowest-varying index).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy.special import gammaln

from .errors import ContractError, SignatureError, TruncationError, TruncationWarning

LEVELS = {"g": 0, "e": 1, "i": 2}

HERMITIAN_RTOL = 1e-10
# truncation guard: population allowed in the top 10% of a Fock ladder
TOP_FRACTION = 0.1
TOP_POPULATION_TOL = 1e-6


@dataclass(frozen=True)
class Boson:
    """Bosonic mode truncated to ``n`` Fock levels (0..n-1)."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise SignatureError(f"Boson truncation must be an integer >= 2, got {self.n!r}")

    @property
    def dim(self) -> int:
        return int(self.n)


@dataclass(frozen=True)
class Atom:
    """Three-level atom (ladder g, i, e)."""

    levels: int = 3

    def __post_init__(self):
        if self.levels != 3:
            raise SignatureError("only three-level atoms are supported")

    @property
    def dim(self) -> int:
        return 3


Factor = Union[Boson, Atom]


@dataclass(frozen=True)
class SpaceSignature:
    """Ordered tensor-product structure of a Hilbert space."""

    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise SignatureError("a space needs at least one factor")
        for f in factors:
            if not isinstance(f, (Boson, Atom)):
                raise SignatureError(f"unknown factor type {f!r}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, *factors: Factor) -> "SpaceSignature":
        return cls(tuple(factors))

    @property
    def dims(self) -> tuple:
        return tuple(f.dim for f in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def factor(self, index: int) -> Factor:
        if not 0 <= index < len(self.factors):
            raise SignatureError(
                f"factor index {index} out of range for {len(self.factors)}-factor space"
            )
        return self.factors[index]

    def boson(self, index: int) -> Boson:
        f = self.factor(index)
        if not isinstance(f, Boson):
            raise SignatureError(f"factor {index} is {f!r}, expected a Boson")
        return f

    def atom(self, index: int) -> Atom:
        f = self.factor(index)
        if not isinstance(f, Atom):
            raise SignatureError(f"factor {index} is {f!r}, expected an Atom")
        return f


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


def _check_same(s1: SpaceSignature, s2: SpaceSignature):
    if s1 != s2:
        raise SignatureError(f"signature mismatch: {s1} vs {s2}")


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense complex operator on a :class:`SpaceSignature`."""

    space: SpaceSignature
    data: np.ndarray

    def __post_init__(self):
        data = _frozen(self.data)
        if data.shape != (self.space.dim, self.space.dim):
            raise SignatureError(
                f"matrix shape {data.shape} does not match space dimension {self.space.dim}"
            )
        object.__setattr__(self, "data", data)

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.space, self.data.conj().T)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0

    def hermiticity_error(self) -> float:
        """``max|H - H^dag|`` relative to ``max|H|`` (0 for the zero matrix)."""
        scale = self.max_abs()
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(self.data - self.data.conj().T))) / scale

    def is_hermitian(self, rtol: float = 1e-12) -> bool:
        return self.hermiticity_error() <= rtol

    def __add__(self, other):
        if isinstance(other, OperatorMatrix):
            _check_same(self.space, other.space)
            return OperatorMatrix(self.space, self.data + other.data)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, OperatorMatrix):
            _check_same(self.space, other.space)
            return OperatorMatrix(self.space, self.data - other.data)
        return NotImplemented

    def __neg__(self):
        return OperatorMatrix(self.space, -self.data)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return OperatorMatrix(self.space, self.data * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if np.isscalar(scalar):
            return OperatorMatrix(self.space, self.data / scalar)
        return NotImplemented

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            _check_same(self.space, other.space)
            return OperatorMatrix(self.space, self.data @ other.data)
        if isinstance(other, StateVector):
            _check_same(self.space, other.space)
            return StateVector(self.space, self.data @ other.amplitudes, normalize=False)
        return NotImplemented


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state on a :class:`SpaceSignature`.

    ``warnings`` carries truncation diagnostics attached by the operation that
    produced the state.
    """

    space: SpaceSignature
    amplitudes: np.ndarray
    normalize: bool = True
    warnings: tuple = field(default=())

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (self.space.dim,):
            raise SignatureError(
                f"state length {amps.shape[0]} does not match space dimension {self.space.dim}"
            )
        if self.normalize:
            nrm = np.linalg.norm(amps)
            if nrm == 0:
                raise ContractError("cannot normalize the zero vector")
            amps = amps / nrm
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per factor."""
        return self.amplitudes.reshape(self.space.dims)

    def overlap(self, other: "StateVector") -> complex:
        _check_same(self.space, other.space)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def populations(self, factor_index: int) -> np.ndarray:
        """Reduced level populations of one factor."""
        self.space.factor(factor_index)
        probs = np.abs(self.tensor()) ** 2
        axes = tuple(k for k in range(len(self.space.dims)) if k != factor_index)
        return probs.sum(axis=axes)

    def with_warnings(self, extra: Sequence[str]) -> "StateVector":
        if not extra:
            return self
        return StateVector(self.space, self.amplitudes, normalize=False,
                           warnings=self.warnings + tuple(extra))


# ---------------------------------------------------------------------------
# operator construction

def identity(space: SpaceSignature) -> OperatorMatrix:
    return OperatorMatrix(space, np.eye(space.dim, dtype=complex))


def embed(space: SpaceSignature, factor_index: int, local: np.ndarray) -> OperatorMatrix:
    """Place a single-factor matrix into ``space`` with identities elsewhere."""
    space.factor(factor_index)
    local = np.asarray(local, dtype=complex)
    d = space.dims[factor_index]
    if local.shape != (d, d):
        raise SignatureError(f"local operator shape {local.shape} != ({d}, {d})")
    left = int(np.prod(space.dims[:factor_index]))
    right = int(np.prod(space.dims[factor_index + 1:]))
    out = np.kron(np.kron(np.eye(left), local), np.eye(right))
    return OperatorMatrix(space, out)


def lowering_matrix(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1).astype(complex)


def ladder(space: SpaceSignature, factor_index: int, kind: str = "lowering") -> OperatorMatrix:
    """Truncated annihilation (``kind="lowering"``) or creation operator."""
    n = space.boson(factor_index).n
    a = lowering_matrix(n)
    if kind == "lowering":
        local = a
    elif kind == "raising":
        local = a.conj().T
    else:
        raise ValueError(f"kind must be 'lowering' or 'raising', got {kind!r}")
    return embed(space, factor_index, local)


def number(space: SpaceSignature, factor_index: int) -> OperatorMatrix:
    n = space.boson(factor_index).n
    return embed(space, factor_index, np.diag(np.arange(n, dtype=complex)))


def _level(label) -> int:
    if isinstance(label, str) and label in LEVELS:
        return LEVELS[label]
    raise ValueError(f"unknown atomic level {label!r}; expected one of {sorted(LEVELS)}")


def atomic_projector(space: SpaceSignature, factor_index: int, r: str, s: str) -> OperatorMatrix:
    """``|r><s|`` on the atomic factor."""
    space.atom(factor_index)
    local = np.zeros((3, 3), dtype=complex)
    local[_level(r), _level(s)] = 1.0
    return embed(space, factor_index, local)


def hermitian_function(
    X: OperatorMatrix,
    f: Union[str, Callable[[np.ndarray], np.ndarray]],
    shift: float = 0.0,
    rtol: float = HERMITIAN_RTOL,
) -> OperatorMatrix:
    """Evaluate ``f(X + shift)`` through the spectral decomposition of Hermitian ``X``.

    ``f`` is ``"sin"``, ``"cos"``, ``"exp_i"`` (``exp(i x)``) or a vectorised
    callable applied to the eigenvalues.
    """
    if X.hermiticity_error() > rtol:
        raise ContractError(
            f"hermitian_function needs a Hermitian input (relative error {X.hermiticity_error():.3e})"
        )
    funcs = {"sin": np.sin, "cos": np.cos, "exp_i": lambda x: np.exp(1j * x)}
    fn = funcs[f] if isinstance(f, str) else f
    if isinstance(f, str) and f not in funcs:
        raise ValueError(f"unknown function {f!r}")
    H = 0.5 * (X.data + X.data.conj().T)
    evals, Q = np.linalg.eigh(H)
    fvals = np.asarray(fn(evals + shift))
    return OperatorMatrix(X.space, (Q * fvals) @ Q.conj().T)


# ---------------------------------------------------------------------------
# states

def basis_state(space: SpaceSignature, levels: Sequence) -> StateVector:
    """Product basis state; atomic entries may be given as ``"g"``, ``"e"``, ``"i"``."""
    if len(levels) != len(space.factors):
        raise SignatureError("one level per factor required")
    idx = []
    for k, (lvl, fac) in enumerate(zip(levels, space.factors)):
        j = _level(lvl) if isinstance(fac, Atom) and isinstance(lvl, str) else int(lvl)
        if not 0 <= j < fac.dim:
            raise SignatureError(f"level {lvl!r} outside factor {k} ({fac!r})")
        idx.append(j)
    amps = np.zeros(space.dim, dtype=complex)
    amps[np.ravel_multi_index(tuple(idx), space.dims)] = 1.0
    return StateVector(space, amps)


def product_state(*states: StateVector) -> StateVector:
    """Tensor product of states in the given factor order."""
    factors = []
    amps = np.ones(1, dtype=complex)
    warns = []
    for st in states:
        factors.extend(st.space.factors)
        amps = np.kron(amps, st.amplitudes)
        warns.extend(st.warnings)
    return StateVector(SpaceSignature(tuple(factors)), amps, warnings=tuple(warns))


def poisson_weights(beta: complex, n: int) -> np.ndarray:
    """Untruncated coherent-state populations ``|C_m|^2`` for ``m < n``."""
    mean = abs(beta) ** 2
    m = np.arange(n)
    if mean == 0:
        out = np.zeros(n)
        out[0] = 1.0
        return out
    return np.exp(-mean + m * math.log(mean) - gammaln(m + 1))


def top_level_count(n: int) -> int:
    """Levels watched by the truncation guard: the top 10%, but at least two.

    Two levels keep the guard sensitive to pair processes, which populate only
    every other Fock state.
    """
    return max(1, min(n - 1, max(2, math.ceil(TOP_FRACTION * n))))


def _poisson_top_tail(mean: float, n: int) -> float:
    """Poisson probability of landing in the top 10% of an ``n``-level ladder or above."""
    from scipy.stats import poisson

    start = n - top_level_count(n)
    return float(poisson.sf(start - 1, mean)) if mean > 0 else 0.0


def required_truncation(beta: complex) -> int:
    """Smallest ladder size whose top 10% holds less than the guard population."""
    mean = abs(beta) ** 2
    n = 2
    while _poisson_top_tail(mean, n) >= TOP_POPULATION_TOL:
        n += 1
    return n


def coherent_state(space: SpaceSignature, factor_index: int, beta: complex) -> StateVector:
    """Coherent state ``|beta>`` on the single Boson factor ``factor_index``.

    The result lives on the one-factor space of that mode; compose with
    :func:`product_state`.

    Raises:
        TruncationError: if the untruncated Poisson distribution puts
            ``>= 1e-6`` population in the top 10% of the ladder.
    """
    fac = space.boson(factor_index)
    n = fac.n
    if _poisson_top_tail(abs(beta) ** 2, n) >= TOP_POPULATION_TOL:
        raise TruncationError(
            f"|beta|^2={abs(beta) ** 2:.4g} needs a Boson truncation of at least "
            f"N={required_truncation(beta)} (got N={n})"
        )
    m = np.arange(n)
    if beta == 0:
        amps = np.zeros(n, dtype=complex)
        amps[0] = 1.0
    else:
        logmag = -0.5 * abs(beta) ** 2 + m * math.log(abs(beta)) - 0.5 * gammaln(m + 1)
        amps = np.exp(logmag + 1j * m * np.angle(beta))
    return StateVector(SpaceSignature((fac,)), amps)


def top_population(psi: StateVector, factor_index: int) -> float:
    """Population in the top 10% of levels of a Boson factor."""
    n = psi.space.boson(factor_index).n
    k = top_level_count(n)
    return float(psi.populations(factor_index)[n - k:].sum())


def truncation_warnings(psi: StateVector, emit: bool = True) -> tuple:
    """Guard messages for every Boson factor whose top levels are populated."""
    out = []
    for k, fac in enumerate(psi.space.factors):
        if isinstance(fac, Boson):
            p = top_population(psi, k)
            if p >= TOP_POPULATION_TOL:
                msg = f"factor {k} (N={fac.n}): top-10% population {p:.2e} >= {TOP_POPULATION_TOL:g}"
                out.append(msg)
                if emit:
                    warnings.warn(msg, TruncationWarning, stacklevel=3)
    return tuple(out)


class TruncationTracker:
    """Worst top-10% population per Boson factor seen across many states."""

    def __init__(self):
        self.worst: dict = {}

    def observe(self, psi: StateVector) -> tuple:
        msgs = truncation_warnings(psi, emit=False)
        for k, fac in enumerate(psi.space.factors):
            if isinstance(fac, Boson):
                p = top_population(psi, k)
                if p >= TOP_POPULATION_TOL and p > self.worst.get(k, (0.0, 0))[0]:
                    self.worst[k] = (p, fac.n)
        return msgs

    def messages(self) -> tuple:
        return tuple(f"factor {k} (N={n}): top-10% population reached {p:.2e} >= {TOP_POPULATION_TOL:g}"
                     for k, (p, n) in sorted(self.worst.items()))

    def emit(self, stacklevel: int = 3):
        for msg in self.messages():
            warnings.warn(msg, TruncationWarning, stacklevel=stacklevel)


def guard_state(psi: StateVector, emit: bool = True) -> StateVector:
    """Attach truncation warnings to ``psi`` (no-op when the guard is satisfied)."""
    return psi.with_warnings(truncation_warnings(psi, emit=emit))


# ---------------------------------------------------------------------------
# observables

def apply_local(psi: StateVector, factor_index: int, local: np.ndarray) -> np.ndarray:
    """Apply a single-factor matrix without building the embedded operator."""
    t = psi.tensor()
    out = np.tensordot(local, t, axes=([1], [factor_index]))
    return np.moveaxis(out, 0, factor_index).reshape(-1)


def expectation(psi: StateVector, A: OperatorMatrix) -> complex:
    _check_same(psi.space, A.space)
    return complex(np.vdot(psi.amplitudes, A.data @ psi.amplitudes))


def local_expectation(psi: StateVector, factor_index: int, local: np.ndarray) -> complex:
    return complex(np.vdot(psi.amplitudes, apply_local(psi, factor_index, local)))


def mode_moments(psi: StateVector, factor_index: int) -> dict:
    """First and second moments of a Boson factor: <a>, <a^2>, <a^dag a>, <a a^dag>."""
    n = psi.space.boson(factor_index).n
    a = lowering_matrix(n)
    a_psi = apply_local(psi, factor_index, a)
    ad_psi = apply_local(psi, factor_index, a.conj().T)
    v = psi.amplitudes
    return {
        "a": complex(np.vdot(v, a_psi)),
        "aa": complex(np.vdot(ad_psi, a_psi)),
        "ada": float(np.vdot(a_psi, a_psi).real),
        "aad": float(np.vdot(ad_psi, ad_psi).real),
    }


def mean_number(psi: StateVector, factor_index: int) -> float:
    return mode_moments(psi, factor_index)["ada"]


def quadrature_variance(psi: StateVector, factor_index: int, theta: float) -> float:
    """Variance of ``X_theta = (a e^{-i theta} + a^dag e^{i theta}) / 2``."""
    mo = mode_moments(psi, factor_index)
    return variance_from_moments(mo, np.asarray(theta, dtype=float))


def variance_from_moments(mo: dict, theta):
    """Quadrature variance from a :func:`mode_moments` record (states or mixtures)."""
    # <X^2> = (e^{-2i th}<a^2> + c.c. + <a a^dag> + <a^dag a>) / 4, exact on the truncated space
    x2 = 0.25 * (2.0 * np.real(mo["aa"] * np.exp(-2j * theta)) + mo["aad"] + mo["ada"])
    x1 = np.real(mo["a"] * np.exp(-1j * theta))
    return x2 - x1 ** 2


def squeezed_quadrature(psi: StateVector, factor_index: int) -> tuple:
    """Closed-form extremes of the quadrature variance over the angle.

    Returns ``(theta_min, var_min, var_max)`` with ``theta_min`` in ``[0, pi)``.
    """
    return quadrature_extremes(mode_moments(psi, factor_index))


def quadrature_extremes(mo: dict) -> tuple:
    """``(theta_min, var_min, var_max)`` from a :func:`mode_moments` record."""
    cov = mo["aa"] - mo["a"] ** 2
    sym = 0.25 * (mo["aad"] + mo["ada"]) - 0.5 * abs(mo["a"]) ** 2
    theta_min = float(np.mod(0.5 * (np.angle(cov) + np.pi), np.pi))
    return theta_min, float(sym - 0.5 * abs(cov)), float(sym + 0.5 * abs(cov))
