"""
Resolvent R_λ = (I - λL)^{-1}, the decomposition f = (M_z - λ)g + h, the kernel
component c_λ(f) and the continuation λ ↦ c_λ(f)(λ).
"""

import dataclasses
import math
import typing

import numpy as np
import scipy.linalg
from loguru import logger

from config import NEUMANN_DIVERGENCE_RUN, NEUMANN_STOP_RUN
from errors import (
    DegenerateParameterError,
    DomainError,
    InvalidParameterError,
    OutsideDomainError,
    SpectrumHitError,
    ToleranceError,
)
from models import ContinuationRecord, pair
from modules.coeffspace import (
    CoeffFunction,
    SpaceModel,
    apply_L,
    apply_Mz,
    apply_Mz_resolvent,
    backward_sums,
    constant,
    evaluate_with_bound,
    evaluation_bound,
    norm,
    resolvent_tail_gain,
)

if typing.TYPE_CHECKING:
    from modules.subspaces import InvariantSubspace


@dataclasses.dataclass(frozen=True)
class ResolventSolution:
    """R_λ f together with how it was obtained."""

    g: CoeffFunction
    certified: bool
    """Whether 1/λ was certified outside the relevant spectrum of L."""
    remainder: float
    """Norm bound of what the solve left out (unsummed Neumann terms, projection loss)."""
    terms: int = 0


@dataclasses.dataclass(frozen=True)
class ContinuationResult:
    lam: complex
    value: np.ndarray
    kernel_component: CoeffFunction
    residual: float
    in_paper_domain: bool

    def to_record(self) -> ContinuationRecord:
        return ContinuationRecord(
            lambda_=pair(self.lam),
            value=[pair(v) for v in self.value],
            residual=self.residual,
            in_paper_domain=self.in_paper_domain,
        )


@dataclasses.dataclass(frozen=True)
class LaurentSeries:
    """Coefficients P_E Tⁿh (n ≥ 1) of U_h(z) = Σ (P_E Tⁿh) z^{-n}."""

    coefficients: np.ndarray
    ratios: np.ndarray
    convergence_radius: float

    def evaluate(self, z: complex) -> np.ndarray:
        if abs(z) <= self.convergence_radius:
            logger.warning(
                f"Summing U_h at |z| = {abs(z):g} inside the estimated radius "
                f"{self.convergence_radius:g}"
            )
        powers = complex(z) ** -np.arange(1, len(self.coefficients) + 1)
        return powers @ self.coefficients


def _neumann(model: SpaceModel, f: CoeffFunction, lam: complex) -> ResolventSolution:
    N = model.trunc_len
    f_norm = norm(model, f)
    if lam == 0 or f_norm == 0.0:
        return ResolventSolution(f, certified=True, remainder=0.0)

    # ‖L^k f‖² = Σ_n β_n² ‖a_{n+k}‖²
    energy = np.sum(np.abs(f.coeffs) ** 2, axis=1)
    shifted = np.correlate(energy, model.beta**2, mode="full")[N:]
    with np.errstate(divide="ignore"):
        log_terms = np.arange(N + 1) * math.log(abs(lam)) + 0.5 * np.log(shifted)

    log_threshold = math.log(model.tol * f_norm)
    log_slack = math.log1p(-model.tol)
    small_run = non_decreasing_run = 0
    stop = N
    for k, log_term in enumerate(log_terms):
        small_run = small_run + 1 if log_term < log_threshold else 0
        if small_run >= NEUMANN_STOP_RUN:
            stop = k
            break
        if k and np.isfinite(log_term) and log_term >= log_terms[k - 1] + log_slack:
            non_decreasing_run += 1
        else:
            non_decreasing_run = 0
        if non_decreasing_run >= NEUMANN_DIVERGENCE_RUN:
            raise OutsideDomainError(
                f"Neumann series for (I - λL)^(-1) diverges at |λ| = {abs(lam):g}: "
                f"{NEUMANN_DIVERGENCE_RUN} non-decreasing terms by k = {k}."
            )

    sums = backward_sums(f.coeffs, lam)
    partial = sums.copy()
    if stop < N:
        partial[: N - stop] -= complex(lam) ** (stop + 1) * sums[stop + 1 :]
    remainder = float(np.sum(np.exp(log_terms[stop + 1 :])))

    tail = remainder
    if f.tail_bound:
        tail += resolvent_tail_gain(model, lam) * f.tail_bound
    logger.debug(f"Neumann series at λ={lam:.4g} stopped after {stop + 1} terms")
    return ResolventSolution(
        CoeffFunction(partial, tail),
        certified=abs(lam) < model.radius,
        remainder=remainder,
        terms=stop + 1,
    )


def _restricted(
    model: SpaceModel, f: CoeffFunction, lam: complex, subspace: "InvariantSubspace"
) -> ResolventSolution:
    coords, loss = subspace.orthonormal_coordinates(f)
    system = np.eye(subspace.dim) - lam * subspace.restriction_orthonormal
    smallest = float(scipy.linalg.svdvals(system).min())
    scale = 1.0 + abs(lam) * float(np.linalg.norm(subspace.restriction_orthonormal, 2))
    if smallest <= model.tol * scale:
        raise SpectrumHitError(
            f"1/λ = {1 / lam:.6g} is an eigenvalue of L restricted to the subspace "
            f"(σ_min(I - λA) = {smallest:.3g})."
        )
    solution = scipy.linalg.solve(system, coords)
    g = subspace.from_orthonormal(solution)
    return ResolventSolution(g, certified=True, remainder=loss * norm(model, f) / smallest)


def _solve(
    model: SpaceModel,
    f: CoeffFunction,
    lam: complex,
    subspace: "InvariantSubspace | None",
) -> ResolventSolution:
    model.check(f)
    if subspace is None:
        return _neumann(model, f, lam)
    if lam == 0:
        return ResolventSolution(f, certified=True, remainder=0.0)
    return _restricted(model, f, lam, subspace)


def resolvent_R(
    model: SpaceModel,
    f: CoeffFunction,
    lam: complex,
    subspace: "InvariantSubspace | None" = None,
) -> CoeffFunction:
    """
    g = (I - λL)^{-1} f.

    On the full space the Neumann series Σ λᵏLᵏf is summed with adaptive
    stopping; inside an invariant subspace the restricted system is solved.
    """
    return _solve(model, f, lam, subspace).g


def _off_kernel_norm(model: SpaceModel, f: CoeffFunction) -> float:
    """Weighted norm of the coefficients of degree ≥ 1."""
    return float(np.linalg.norm(model.beta[1:, None] * f.coeffs[1:]))


def _identity_residual(
    model: SpaceModel, f: CoeffFunction, g: CoeffFunction, c: CoeffFunction, lam: complex
) -> float:
    # (M_z - λ)g - M_z f + λ c
    lhs = apply_Mz(model, g) - g * lam
    return norm(model, lhs - apply_Mz(model, f) + c * lam)


def _kernel_component(
    model: SpaceModel,
    f: CoeffFunction,
    lam: complex,
    subspace: "InvariantSubspace | None",
) -> tuple[CoeffFunction, ResolventSolution, float]:
    if lam == 0:
        raise DegenerateParameterError("c_λ(f) is undefined at λ = 0.")
    solution = _solve(model, f, lam, subspace)
    g = solution.g
    c = g - apply_Mz(model, apply_L(model, g))

    f_norm = norm(model, f)
    budget = 10 * model.tol * max(f_norm, norm(model, g))
    off_kernel = _off_kernel_norm(model, c)
    if off_kernel > budget:
        raise ToleranceError(f"c_λ(f) is not in the kernel of L (residual {off_kernel:.3g}).")
    kernel_part = CoeffFunction(constant(model, c.coeffs[0]).coeffs, c.tail_bound + off_kernel)

    residual = _identity_residual(model, f, g, kernel_part, lam)
    if residual > budget + abs(lam) * solution.remainder:
        raise ToleranceError(
            f"(M_z - λ)R_λf = M_z f - λc_λ(f) fails at λ = {lam:.4g}: "
            f"residual {residual:.3g} over budget {budget:.3g}."
        )
    return kernel_part, solution, residual


def kernel_component_c(
    model: SpaceModel,
    f: CoeffFunction,
    lam: complex,
    subspace: "InvariantSubspace | None" = None,
) -> CoeffFunction:
    """c_λ(f) = (I - M_z L) R_λ f, the kernel element in (M_z - λ)R_λf = M_z f - λc_λ(f)."""
    return _kernel_component(model, f, lam, subspace)[0]


def continue_f(
    model: SpaceModel,
    f: CoeffFunction,
    lam: complex,
    subspace: "InvariantSubspace | None" = None,
) -> ContinuationResult:
    """The continuation f̃(λ) = c_λ(f)(λ)."""
    c, solution, residual = _kernel_component(model, f, lam, subspace)
    value = c.constant_term()

    if abs(lam) < model.radius:
        expected, eval_error = evaluate_with_bound(model, f, lam)
        point_norm = evaluation_bound(model, lam)
        budget = (
            10 * model.tol * norm(model, f) * max(1.0, point_norm)
            + solution.remainder * point_norm
            + eval_error
        )
        mismatch = float(np.linalg.norm(value - expected))
        if mismatch > budget:
            raise ToleranceError(
                f"Continuation disagrees with f at interior λ = {lam:.4g}: "
                f"|f̃(λ) - f(λ)| = {mismatch:.3g} over budget {budget:.3g}."
            )

    return ContinuationResult(
        lam=complex(lam),
        value=value,
        kernel_component=c,
        residual=residual,
        in_paper_domain=solution.certified,
    )


def decompose(
    model: SpaceModel, f: CoeffFunction, lam: complex
) -> tuple[CoeffFunction, CoeffFunction]:
    """Split f = (M_z - λ)g + h with g = R_λ(Lf) and h in the kernel of L."""
    model.check(f)
    g = resolvent_R(model, apply_L(model, f), lam)
    h = f - (apply_Mz(model, g) - g * lam)

    f_norm = norm(model, f)
    off_kernel = _off_kernel_norm(model, h)
    if off_kernel > 10 * model.tol * f_norm + h.tail_bound:
        raise ToleranceError(
            f"h is not in the kernel of L at λ = {lam:.4g} (off-kernel norm {off_kernel:.3g})."
        )
    h = CoeffFunction(constant(model, h.coeffs[0]).coeffs, h.tail_bound + off_kernel)

    residual = norm(model, f - (apply_Mz(model, g) - g * lam) - h)
    if residual > 10 * model.tol * f_norm + off_kernel:
        raise ToleranceError(f"Decomposition residual {residual:.3g} is over budget.")
    return g, h


def resolvent_from_decomposition(
    model: SpaceModel, f: CoeffFunction, lam: complex
) -> CoeffFunction:
    """R_λ f read off the decomposition M_z f = (M_z - λ)g + h."""
    g, _ = decompose(model, apply_Mz(model, f), lam)
    return g


def eigenvector_at(model: SpaceModel, lam: complex, e: typing.Any = None) -> CoeffFunction:
    """(M_z - λ)^{-1}e for a constant e: an eigenvector of L with eigenvalue 1/λ."""
    if abs(lam) <= model.radius:
        raise DomainError(f"λ = {lam:.4g} is not in the resolvent set of M_z.")
    h = constant(model, e)
    if not np.any(h.coeffs[0]):
        raise InvalidParameterError("The kernel vector e must be nonzero.")
    v = apply_Mz_resolvent(model, h, lam)
    if v.tail_bound > model.tol * norm(model, v):
        logger.warning(
            f"Eigenvector at λ = {lam:.4g} keeps a tail of {v.tail_bound:.3g} "
            f"at N = {model.trunc_len}"
        )
    return v


def exterior_series(
    T: np.ndarray, h: np.ndarray, E_dim: int, terms: int
) -> LaurentSeries:
    """Laurent coefficients P_E Tⁿ h, n = 1..terms, with their decay ratios."""
    T = np.asarray(T, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise InvalidParameterError("T must be a square matrix.")
    if h.shape != (T.shape[0],):
        raise InvalidParameterError(f"h of shape {h.shape} does not match T of shape {T.shape}.")
    if not 1 <= E_dim <= T.shape[0]:
        raise InvalidParameterError(f"E_dim must lie in 1..{T.shape[0]}, got {E_dim}.")
    if terms < 1:
        raise InvalidParameterError("At least one term is required.")

    coefficients = np.zeros((terms, E_dim), dtype=complex)
    current = h
    for n in range(terms):
        current = T @ current
        coefficients[n] = current[:E_dim]

    norms = np.linalg.norm(coefficients, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(norms[:-1] > 0, norms[1:] / norms[:-1], np.nan)
        roots = norms ** (1.0 / np.arange(1, terms + 1))
    radius = float(np.max(roots[terms // 2 :])) if terms else 0.0
    return LaurentSeries(coefficients=coefficients, ratios=ratios, convergence_radius=radius)
