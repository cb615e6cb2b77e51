"""
Weighted coefficient spaces of vector-valued analytic functions on a disc.

A function is stored as its Taylor coefficients a_0..a_N (each a vector in
C^d) together with a certified bound on the weighted norm of everything the
stored polynomial misses. The norm is ‖f‖² = Σ β_n²‖a_n‖².
"""

import dataclasses
import functools
import math
import typing

import numpy as np
from loguru import logger
from numpy.polynomial import polynomial
from scipy import signal, special

from config import DEFAULT_TOL, MIN_TRUNC_LEN
from errors import DomainError, InvalidParameterError
from models import WeightKind

_GAIN_TERMS = 4096
"""Longest shift-power profile used when propagating tail bounds."""

_LOG_NEGLIGIBLE = math.log(1e-40)
_LOG_SERIES_CUTOFF = math.log(1e-18)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclasses.dataclass(frozen=True, eq=False)
class WeightSequence:
    """Norm weights β_0..β_N of a coefficient space."""

    kind: WeightKind
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise InvalidParameterError("A weight sequence needs at least two values.")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise InvalidParameterError("All weights must be finite and strictly positive.")
        if not math.isclose(values[0], 1.0):
            raise InvalidParameterError(f"β_0 must equal 1, got {values[0]}.")
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def preset(cls, kind: WeightKind, length: int) -> "WeightSequence":
        """Build the first ``length`` weights of a named space."""
        if kind == WeightKind.CUSTOM:
            raise InvalidParameterError("Custom weights need an explicit list.")
        return cls(kind, _preset_beta(kind, np.arange(length)))

    @classmethod
    def custom(cls, values: typing.Sequence[float]) -> "WeightSequence":
        return cls(WeightKind.CUSTOM, np.asarray(values, dtype=float))

    @property
    def trunc_len(self) -> int:
        return self.values.size - 1

    @property
    def ratio_bound(self) -> float:
        """max β_{n+1}/β_n over the stored range, the norm of M_z on it."""
        return float(np.max(self.values[1:] / self.values[:-1]))

    @property
    def asymptotic_ratio(self) -> float:
        """Limit of β_{n+1}/β_n used past the stored range."""
        if self.kind == WeightKind.CUSTOM:
            return float(self.values[-1] / self.values[-2])
        return 1.0

    @property
    def radius(self) -> float:
        """Radius of the disc the functions live on, lim β_n^{1/n}."""
        return self.asymptotic_ratio

    def beta(self, n: int | np.ndarray) -> np.ndarray:
        """Weights at arbitrary degrees, extended past the stored range."""
        n = np.asarray(n)
        if self.kind != WeightKind.CUSTOM:
            return _preset_beta(self.kind, n)
        stored = self.values[np.minimum(n, self.trunc_len)]
        excess = np.maximum(n - self.trunc_len, 0)
        return stored * self.asymptotic_ratio**excess

    def log_beta(self, n: np.ndarray) -> np.ndarray:
        if self.kind != WeightKind.CUSTOM:
            return np.log(_preset_beta(self.kind, n))
        stored = np.log(self.values[np.minimum(n, self.trunc_len)])
        excess = np.maximum(n - self.trunc_len, 0)
        return stored + excess * math.log(self.asymptotic_ratio)

    def log_shift_gain(self, j: int, start: int = 0) -> float:
        """
        log of sup over n ≥ start of β_{n+j}/β_n (only n with n + j ≥ 0).

        This is the norm of M_z^j (j > 0) or L^{-j} (j < 0) restricted to
        functions supported on degrees ≥ start.
        """
        n0 = max(start, -j)
        if self.kind == WeightKind.HARDY or j == 0:
            return 0.0
        if self.kind == WeightKind.BERGMAN:
            # β_{n+j}/β_n = √((n+1)/(n+j+1)) is monotone in n
            return 0.0 if j > 0 else 0.5 * math.log((n0 + 1) / (n0 + j + 1))
        if self.kind == WeightKind.DIRICHLET:
            return 0.5 * math.log((n0 + j + 1) / (n0 + 1)) if j > 0 else 0.0
        upper = max(n0, self.trunc_len - min(j, 0)) + 1
        n = np.arange(n0, upper + 1)
        window = float(np.max(self.log_beta(n + j) - self.log_beta(n)))
        return max(window, j * math.log(self.asymptotic_ratio))

    def shift_gain(self, j: int, start: int = 0) -> float:
        """exp of log_shift_gain, saturating at inf."""
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_shift_gain(j, start)))

    def log_gain_profile(self, direction: int, start: int) -> np.ndarray:
        """log_shift_gain(direction·k, start) for k = 0 .. _GAIN_TERMS - 1."""
        return _log_gain_profile(self, direction, start)

    def log_series(self, start: int, rho: float, power: int = 1) -> float:
        """
        log √(Σ_{n ≥ start} β_n^{2·power} ρ^{2n}), which is -inf for an empty sum
        and +inf for a divergent one.
        """
        if rho == 0.0:
            return float(power * self.log_beta(np.asarray(0))) if start == 0 else -math.inf
        rate = rho * self.asymptotic_ratio**power
        if rate >= 1.0:
            return math.inf
        count = int(math.ceil(_LOG_NEGLIGIBLE / (2.0 * math.log(rate)))) + 64
        n = np.arange(start, start + min(count, 2_000_000))
        log_terms = 2.0 * power * self.log_beta(n) + 2.0 * n * math.log(rho)
        return 0.5 * float(special.logsumexp(log_terms))

    def series(self, start: int, rho: float, power: int = 1) -> float:
        return math.exp(self.log_series(start, rho, power))


def _preset_beta(kind: WeightKind, n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    match kind:
        case WeightKind.HARDY:
            return np.ones_like(n)
        case WeightKind.BERGMAN:
            return 1.0 / np.sqrt(n + 1.0)
        case WeightKind.DIRICHLET:
            return np.sqrt(n + 1.0)
    raise InvalidParameterError(f"No preset for {kind}.")


@functools.lru_cache(maxsize=64)
def _log_gain_profile(weights: WeightSequence, direction: int, start: int) -> np.ndarray:
    gains = np.array([weights.log_shift_gain(direction * k, start) for k in range(_GAIN_TERMS)])
    gains.setflags(write=False)
    return gains


@dataclasses.dataclass(frozen=True, eq=False)
class CoeffFunction:
    """Taylor coefficients a_0..a_N (rows) of a C^d-valued function plus a tail bound."""

    coeffs: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.ndim == 1:
            coeffs = coeffs[:, None]
        if coeffs.ndim != 2 or coeffs.shape[1] < 1:
            raise InvalidParameterError("Coefficients must form an (N+1) × d array.")
        if not (self.tail_bound >= 0.0):
            raise InvalidParameterError("The tail bound must be nonnegative.")
        object.__setattr__(self, "coeffs", _frozen(coeffs))
        object.__setattr__(self, "tail_bound", float(self.tail_bound))

    @property
    def fiber_dim(self) -> int:
        return self.coeffs.shape[1]

    @property
    def trunc_len(self) -> int:
        return self.coeffs.shape[0] - 1

    def degree(self, atol: float = 0.0) -> int:
        """Highest degree with a coefficient above ``atol``, -1 for zero."""
        nonzero = np.flatnonzero(np.max(np.abs(self.coeffs), axis=1) > atol)
        return int(nonzero[-1]) if nonzero.size else -1

    def is_constant(self) -> bool:
        return self.tail_bound == 0.0 and self.degree() <= 0

    def constant_term(self) -> np.ndarray:
        return self.coeffs[0].copy()

    def __add__(self, other: "CoeffFunction") -> "CoeffFunction":
        return CoeffFunction(self.coeffs + other.coeffs, self.tail_bound + other.tail_bound)

    def __sub__(self, other: "CoeffFunction") -> "CoeffFunction":
        return CoeffFunction(self.coeffs - other.coeffs, self.tail_bound + other.tail_bound)

    def __neg__(self) -> "CoeffFunction":
        return CoeffFunction(-self.coeffs, self.tail_bound)

    def __mul__(self, scalar: complex) -> "CoeffFunction":
        return CoeffFunction(self.coeffs * scalar, abs(scalar) * self.tail_bound)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "CoeffFunction":
        return self * (1.0 / scalar)


@dataclasses.dataclass(frozen=True, eq=False)
class SpaceModel:
    """The space on which M_z and its canonical left inverse L act."""

    weights: WeightSequence
    fiber_dim: int
    trunc_len: int
    tol: float = DEFAULT_TOL

    @property
    def kind(self) -> WeightKind:
        return self.weights.kind

    @property
    def radius(self) -> float:
        return self.weights.radius

    @property
    def beta(self) -> np.ndarray:
        return self.weights.values

    @property
    def dim(self) -> int:
        """Dimension of the stored coefficient space."""
        return (self.trunc_len + 1) * self.fiber_dim

    def zeros(self) -> CoeffFunction:
        return CoeffFunction(np.zeros((self.trunc_len + 1, self.fiber_dim), dtype=complex))

    def check(self, f: CoeffFunction) -> None:
        if f.coeffs.shape != (self.trunc_len + 1, self.fiber_dim):
            raise InvalidParameterError(
                f"Function of shape {f.coeffs.shape} does not fit the model "
                f"({self.trunc_len + 1}, {self.fiber_dim})."
            )

    def to_vector(self, f: CoeffFunction) -> np.ndarray:
        """Coordinates in the orthonormal basis zⁿe_i/β_n, degree-major."""
        self.check(f)
        return (self.beta[:, None] * f.coeffs).ravel()

    def from_vector(self, vector: np.ndarray, tail_bound: float = 0.0) -> CoeffFunction:
        coeffs = np.asarray(vector, dtype=complex).reshape(self.trunc_len + 1, self.fiber_dim)
        return CoeffFunction(coeffs / self.beta[:, None], tail_bound)

    def fiber_basis(self) -> list[np.ndarray]:
        return list(np.eye(self.fiber_dim, dtype=complex))

    def describe(self) -> dict[str, typing.Any]:
        """Resolved parameters of the model, as written next to every output."""
        return {
            "kind": self.kind.value,
            "d": self.fiber_dim,
            "N": self.trunc_len,
            "tol": self.tol,
            "radius": self.radius,
            "beta": self.beta.tolist(),
        }


def make_space(
    kind: WeightKind,
    d: int = 1,
    N: int = 256,
    tol: float = DEFAULT_TOL,
    beta: typing.Sequence[float] | None = None,
) -> SpaceModel:
    """Create a space model with preset or explicit (Custom) weights."""
    if N < MIN_TRUNC_LEN:
        raise InvalidParameterError(
            f"Truncation length {N} cannot hold test functions (need at least {MIN_TRUNC_LEN})."
        )
    if d < 1:
        raise InvalidParameterError("Fiber dimension must be positive.")
    if not tol > 0:
        raise InvalidParameterError("Tolerance must be positive.")

    if kind == WeightKind.CUSTOM:
        if beta is None:
            raise InvalidParameterError("Custom weights require an explicit beta list.")
        if len(beta) < N + 1:
            raise InvalidParameterError(f"Custom weights need {N + 1} values, got {len(beta)}.")
        weights = WeightSequence.custom(list(beta)[: N + 1])
    else:
        weights = WeightSequence.preset(kind, N + 1)

    logger.debug(f"Built {kind.value} space with d={d}, N={N}, tol={tol:g}")
    return SpaceModel(weights=weights, fiber_dim=d, trunc_len=N, tol=tol)


def inner(model: SpaceModel, f: CoeffFunction, g: CoeffFunction) -> complex:
    """Weighted inner product ⟨f, g⟩, linear in f."""
    return complex(np.vdot(model.to_vector(g), model.to_vector(f)))


def norm(model: SpaceModel, f: CoeffFunction) -> float:
    return float(np.linalg.norm(model.to_vector(f)))


def _fiber_vector(model: SpaceModel, e: typing.Any) -> np.ndarray:
    if e is None:
        e = model.fiber_basis()[0]
    vector = np.atleast_1d(np.asarray(e, dtype=complex))
    if vector.shape != (model.fiber_dim,):
        raise InvalidParameterError(
            f"Fiber vector of length {vector.size} does not match d={model.fiber_dim}."
        )
    return vector


def constant(model: SpaceModel, e: typing.Any = None) -> CoeffFunction:
    """The constant function z ↦ e, an element of the kernel of L."""
    coeffs = np.zeros((model.trunc_len + 1, model.fiber_dim), dtype=complex)
    coeffs[0] = _fiber_vector(model, e)
    return CoeffFunction(coeffs)


def monomial(model: SpaceModel, n: int, e: typing.Any = None) -> CoeffFunction:
    if not 0 <= n <= model.trunc_len:
        raise InvalidParameterError(f"Degree {n} is outside 0..{model.trunc_len}.")
    coeffs = np.zeros((model.trunc_len + 1, model.fiber_dim), dtype=complex)
    coeffs[n] = _fiber_vector(model, e)
    return CoeffFunction(coeffs)


def szego_kernel(model: SpaceModel, a: complex, e: typing.Any = None) -> CoeffFunction:
    """The kernel k_a(z) = 1/(1 - az), times the fiber vector e, truncated at N."""
    vector = _fiber_vector(model, e)
    if abs(a) * model.weights.asymptotic_ratio >= 1.0:
        raise DomainError(f"k_a with |a| = {abs(a):g} is not in the space.")
    powers = np.concatenate(([1.0 + 0j], np.cumprod(np.full(model.trunc_len, complex(a)))))
    tail = float(np.linalg.norm(vector)) * model.weights.series(model.trunc_len + 1, abs(a))
    return CoeffFunction(powers[:, None] * vector[None, :], tail)


def random_function(
    model: SpaceModel, rng: np.random.Generator, degree: int | None = None
) -> CoeffFunction:
    """Unit-norm polynomial with complex Gaussian, β-normalized coefficients."""
    degree = model.trunc_len // 2 if degree is None else degree
    shape = (degree + 1, model.fiber_dim)
    raw = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
    coeffs = np.zeros((model.trunc_len + 1, model.fiber_dim), dtype=complex)
    coeffs[: degree + 1] = raw / model.beta[: degree + 1, None]
    f = CoeffFunction(coeffs)
    return f / norm(model, f)


def apply_Mz(model: SpaceModel, f: CoeffFunction) -> CoeffFunction:
    """Multiplication by z; the top coefficient is folded into the tail bound."""
    model.check(f)
    N = model.trunc_len
    shifted = np.zeros_like(f.coeffs)
    shifted[1:] = f.coeffs[:-1]
    dropped = float(model.weights.beta(N + 1) * np.linalg.norm(f.coeffs[-1]))
    tail = model.weights.shift_gain(1, N + 1) * f.tail_bound + dropped
    return CoeffFunction(shifted, tail)


def apply_L(model: SpaceModel, f: CoeffFunction) -> CoeffFunction:
    """The canonical left inverse of M_z: the coefficient down-shift."""
    model.check(f)
    shifted = np.zeros_like(f.coeffs)
    shifted[:-1] = f.coeffs[1:]
    tail = model.weights.shift_gain(-1, model.trunc_len + 1) * f.tail_bound
    return CoeffFunction(shifted, tail)


def backward_sums(coeffs: np.ndarray, lam: complex) -> np.ndarray:
    """G_n = Σ_{k ≥ n} λ^{k-n} a_k over the stored coefficients."""
    reversed_sums = signal.lfilter([1.0], [1.0, -complex(lam)], coeffs[::-1], axis=0)
    return np.asarray(reversed_sums)[::-1]


def resolvent_tail_gain(model: SpaceModel, lam: complex, offset: int = 0) -> float:
    """Bound of Σ_k |λ|^k ‖L^{k+offset}‖ on functions supported past the stored range."""
    if lam == 0:
        return model.weights.shift_gain(-offset, model.trunc_len + 1)
    log_gains = model.weights.log_gain_profile(-1, model.trunc_len + 1)
    k = np.arange(log_gains.size - offset)
    log_terms = k * math.log(abs(lam)) + log_gains[offset:]
    log_total = float(special.logsumexp(log_terms))
    if log_terms[-1] > _LOG_SERIES_CUTOFF + max(log_total, 0.0):
        return math.inf
    with np.errstate(over="ignore"):
        return float(np.exp(log_total))


def difference_quotient(model: SpaceModel, f: CoeffFunction, lam: complex) -> CoeffFunction:
    """(L_λ f)(z) = (f(z) - f(λ))/(z - λ), coefficientwise Σ_{k>n} a_k λ^{k-n-1}."""
    model.check(f)
    if abs(lam) >= model.radius:
        raise DomainError(f"Difference quotient needs |λ| < {model.radius:g}, got {abs(lam):g}.")
    sums = backward_sums(f.coeffs, lam)
    quotient = np.zeros_like(f.coeffs)
    quotient[:-1] = sums[1:]
    tail = resolvent_tail_gain(model, lam, offset=1) * f.tail_bound if f.tail_bound else 0.0
    return CoeffFunction(quotient, tail)


def evaluate(f: CoeffFunction, z: complex, radius: float = 1.0) -> np.ndarray:
    """Horner evaluation of Σ a_n zⁿ; constants evaluate everywhere."""
    if abs(z) >= radius and not f.is_constant():
        raise DomainError(f"Cannot evaluate at |z| = {abs(z):g} outside radius {radius:g}.")
    return np.asarray(polynomial.polyval(complex(z), f.coeffs), dtype=complex)


def evaluation_bound(model: SpaceModel, z: complex, start: int = 0) -> float:
    """√(Σ_{n ≥ start} |z|^{2n}/β_n²): the norm of point evaluation at z on degrees ≥ start."""
    return model.weights.series(start, abs(z), power=-1)


def evaluate_with_bound(
    model: SpaceModel, f: CoeffFunction, z: complex
) -> tuple[np.ndarray, float]:
    """Value at z and the error bound coming from the tail."""
    value = evaluate(f, z, radius=model.radius)
    if f.tail_bound == 0.0:
        return value, 0.0
    return value, f.tail_bound * evaluation_bound(model, z, start=model.trunc_len + 1)


def apply_Mz_resolvent(model: SpaceModel, f: CoeffFunction, lam: complex) -> CoeffFunction:
    """(M_z - λ)^{-1} f for λ outside σ(M_z), by the forward recurrence g_n = (g_{n-1} - a_n)/λ."""
    model.check(f)
    if abs(lam) <= model.radius:
        raise DomainError(f"(M_z - λ) is not invertible for |λ| = {abs(lam):g} ≤ {model.radius:g}.")
    lam = complex(lam)
    g = np.asarray(signal.lfilter([-1.0 / lam], [1.0, -1.0 / lam], f.coeffs, axis=0))

    N = model.trunc_len
    top = float(np.linalg.norm(g[-1]))
    tail = 0.0
    if top > 0.0:
        # past N the solution continues as g_N λ^{-(n-N)}
        log_tail = (
            math.log(top) + N * math.log(abs(lam)) + model.weights.log_series(N + 1, 1 / abs(lam))
        )
        tail = math.exp(log_tail)
    if f.tail_bound:
        log_gains = model.weights.log_gain_profile(1, N + 1)
        k = np.arange(log_gains.size)
        log_sum = special.logsumexp(log_gains - (k + 1.0) * math.log(abs(lam)))
        tail += f.tail_bound * math.exp(log_sum)
    return CoeffFunction(g, tail)
