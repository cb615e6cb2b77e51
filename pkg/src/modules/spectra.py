"""
Smallest-singular-value indicators of truncated operators, grid scans and
spectral radius estimates.

Matrices are written in the orthonormal basis u_n = zⁿ/β_n (times a fiber
unit vector), degree-major.
"""

import dataclasses
import io
import typing

import numpy as np
import scipy.linalg
from loguru import logger

from config import EXTERIOR_MARGIN
from errors import InvalidParameterError, PreconditionError
from models import GridSpec, OperatorTag, unpair
from modules.coeffspace import (
    SpaceModel,
    apply_L,
    apply_Mz,
    apply_Mz_resolvent,
    norm,
    random_function,
)
from modules.reports import CheckReport, Comparison
from modules.resolvent import eigenvector_at
from modules.utility import atomic_write

if typing.TYPE_CHECKING:
    from modules.subspaces import InvariantSubspace

MIN_EFFECTIVE_LEN = 4


@dataclasses.dataclass(frozen=True)
class SpectralScan:
    grid: np.ndarray
    indicator: np.ndarray
    trunc_len: int
    operator_tag: OperatorTag
    resolution: int

    @property
    def resolvent_norm(self) -> np.ndarray:
        """1/indicator, the norm of the truncated resolvent (inf on the indicated spectrum)."""
        with np.errstate(divide="ignore"):
            return 1.0 / self.indicator

    def lipschitz_violations(self, slack: float = 1e-12) -> list[tuple[int, int]]:
        """Adjacent grid points whose indicators differ by more than their distance."""
        if self.grid.size == 1:
            return []
        side = self.resolution
        violations = []
        for i in range(self.grid.size):
            row, col = divmod(i, side)
            neighbours = []
            if col + 1 < side:
                neighbours.append(i + 1)
            if row + 1 < side:
                neighbours.append(i + side)
            for j in neighbours:
                jump = abs(self.indicator[i] - self.indicator[j])
                if jump > abs(self.grid[i] - self.grid[j]) + slack:
                    violations.append((i, j))
        return violations

    def to_csv(self, path: str, header: str) -> None:
        buffer = io.StringIO()
        columns = np.column_stack((self.grid.real, self.grid.imag, self.indicator))
        np.savetxt(
            buffer,
            columns,
            fmt="%.17g",
            delimiter=",",
            header=f"{header}\nre,im,indicator",
            comments="# ",
        )
        atomic_write(path, buffer.getvalue())


@dataclasses.dataclass(frozen=True)
class RadiusEstimate:
    value: float
    sequence: np.ndarray
    """max over probes of ‖Tᵏx‖^{1/k}, k = 1..iterations."""

    def __float__(self) -> float:
        return self.value


def _shift(ratios: np.ndarray, rows: int, d: int) -> np.ndarray:
    """Forward weighted shift with u_n ↦ ratios[n]·u_{n+1}, cut to ``rows`` degrees."""
    cols = ratios.size
    base = np.zeros((max(rows, cols + 1), cols))
    base[np.arange(1, cols + 1), np.arange(cols)] = ratios
    return np.kron(base[:rows], np.eye(d))


def _effective_len(model: SpaceModel, N_eff: int | None) -> int:
    N_eff = model.trunc_len if N_eff is None else N_eff
    if N_eff < MIN_EFFECTIVE_LEN:
        raise InvalidParameterError(
            f"Truncation length {N_eff} is too small (need at least {MIN_EFFECTIVE_LEN})."
        )
    if N_eff > model.trunc_len:
        raise InvalidParameterError(f"N_eff = {N_eff} exceeds the model's N = {model.trunc_len}.")
    return N_eff


def _ratios(model: SpaceModel, start: int, stop: int, step: int) -> np.ndarray:
    """β_{n+step}/β_n for n in start..stop-1."""
    n = np.arange(start, stop)
    return np.exp(model.weights.log_beta(n + step) - model.weights.log_beta(n))


def truncation(
    model: SpaceModel,
    tag: OperatorTag,
    N_eff: int | None = None,
    subspace: "InvariantSubspace | None" = None,
    adjoint: bool = False,
) -> np.ndarray:
    """
    Matrix of the operator (or of its adjoint) on polynomials of low degree.

    M_z maps degree < N_eff into degree ≤ N_eff and is rectangular; L is square
    on degree ≤ N_eff. The adjoint of M_z is square and the adjoint of L is
    rectangular, so every matrix is exact on its domain.
    """
    if tag == OperatorTag.RESTRICTION:
        if subspace is None:
            raise InvalidParameterError("RestrictionMatrix needs a subspace.")
        A = subspace.restriction_orthonormal
        return A.conj().T if adjoint else A.copy()

    N_eff = _effective_len(model, N_eff)
    d = model.fiber_dim
    match tag, adjoint:
        case OperatorTag.MZ, False:
            return _shift(_ratios(model, 0, N_eff, 1), N_eff + 1, d)
        case OperatorTag.MZ, True:
            return _shift(_ratios(model, 0, N_eff + 1, 1), N_eff + 1, d).T
        case OperatorTag.L, False:
            return _shift(_ratios(model, 1, N_eff + 2, -1), N_eff + 1, d).T
        case OperatorTag.L, True:
            return _shift(_ratios(model, 1, N_eff + 2, -1), N_eff + 2, d)
    raise InvalidParameterError(f"Unknown operator {tag}.")


def _smallest_singular(T: np.ndarray, lam: complex) -> float:
    shifted = T.astype(complex, copy=True)
    diagonal = np.arange(min(T.shape))
    shifted[diagonal, diagonal] -= lam
    return float(scipy.linalg.svdvals(shifted).min())


def svd_indicator(
    model: SpaceModel,
    tag: OperatorTag,
    lam: complex,
    N_eff: int | None = None,
    subspace: "InvariantSubspace | None" = None,
) -> float:
    """σ_min(T - λ) of the truncation; small values indicate λ in the approximate point spectrum."""
    return _smallest_singular(truncation(model, tag, N_eff, subspace), lam)


def adjoint_lower_bound(
    model: SpaceModel,
    tag: OperatorTag,
    lam: complex,
    N_eff: int | None = None,
    subspace: "InvariantSubspace | None" = None,
) -> float:
    """σ_min((T - λ)*) on its exact truncation; bounded away from 0 iff T - λ is onto."""
    adjoint = truncation(model, tag, N_eff, subspace, adjoint=True)
    return _smallest_singular(adjoint, np.conj(lam))


def invertibility_indicator(
    model: SpaceModel,
    tag: OperatorTag,
    lam: complex,
    N_eff: int | None = None,
    subspace: "InvariantSubspace | None" = None,
) -> float:
    """min(σ_min(T - λ), σ_min((T - λ)*)): small when T - λ fails to be injective or surjective."""
    direct = svd_indicator(model, tag, lam, N_eff, subspace)
    return min(direct, adjoint_lower_bound(model, tag, lam, N_eff, subspace))


def grid_points(spec: GridSpec) -> np.ndarray:
    """Row-major square grid: imaginary part ascending by row, real part by column."""
    center = unpair(spec.center)
    if spec.radius == 0:
        return np.array([center])
    axis = np.linspace(-spec.radius, spec.radius, spec.resolution)
    re, im = np.meshgrid(center.real + axis, center.imag + axis)
    return (re + 1j * im).ravel()


def scan_grid(
    model: SpaceModel,
    tag: OperatorTag,
    spec: GridSpec,
    subspace: "InvariantSubspace | None" = None,
    N_eff: int | None = None,
) -> SpectralScan:
    grid = grid_points(spec)
    direct = truncation(model, tag, N_eff, subspace)
    adjoint = truncation(model, tag, N_eff, subspace, adjoint=True)
    indicator = np.array(
        [
            min(_smallest_singular(direct, lam), _smallest_singular(adjoint, np.conj(lam)))
            for lam in grid
        ]
    )
    logger.debug(f"Scanned {grid.size} points of {tag.value}")
    return SpectralScan(
        grid=grid,
        indicator=indicator,
        trunc_len=model.trunc_len if N_eff is None else N_eff,
        operator_tag=tag,
        resolution=1 if spec.radius == 0 else spec.resolution,
    )


def _probe_vectors(model: SpaceModel, size: int) -> np.ndarray:
    degrees = sorted({0, size // 4, size // 2, 3 * size // 4, size - 1})
    probes = np.zeros((size * model.fiber_dim, len(degrees) * model.fiber_dim), dtype=complex)
    column = 0
    for n in degrees:
        for i in range(model.fiber_dim):
            probes[n * model.fiber_dim + i, column] = 1.0
            column += 1
    return probes


def spectral_radius_estimate(
    model: SpaceModel,
    tag: OperatorTag,
    iterations: int = 32,
    subspace: "InvariantSubspace | None" = None,
    probes: np.ndarray | None = None,
) -> RadiusEstimate:
    """Gelfand-style max_x ‖Tᵏx‖^{1/k} over a fixed probe set, k = 1..iterations."""
    if iterations < 4:
        raise InvalidParameterError("At least four iterations are required.")
    if tag == OperatorTag.MZ:
        T = truncation(model, OperatorTag.MZ, adjoint=True).conj().T
    else:
        T = truncation(model, tag, subspace=subspace)

    if probes is None:
        if tag == OperatorTag.RESTRICTION:
            probes = np.eye(T.shape[0], dtype=complex)
        else:
            probes = _probe_vectors(model, T.shape[0] // model.fiber_dim)
    probes = np.asarray(probes, dtype=complex)
    if probes.ndim == 1:
        probes = probes[:, None]
    probes = probes / np.linalg.norm(probes, axis=0)

    sequence = np.zeros(iterations)
    current = probes
    for k in range(1, iterations + 1):
        current = T @ current
        sequence[k - 1] = float(np.max(np.linalg.norm(current, axis=0))) ** (1.0 / k)
    return RadiusEstimate(value=float(sequence[-1]), sequence=sequence)


def effective_len_ladder(model: SpaceModel) -> list[int]:
    """N/4, N/2, N: the refinement ladder of the N-trend sub-checks."""
    N = model.trunc_len
    return [max(MIN_EFFECTIVE_LEN, N // 4), max(MIN_EFFECTIVE_LEN, N // 2), N]


def _check_exterior(model: SpaceModel, lam: complex) -> None:
    if abs(lam) < model.radius * (1.0 + EXTERIOR_MARGIN) - 1e-12:
        raise PreconditionError(
            f"|λ| = {abs(lam):g} is within {EXTERIOR_MARGIN:g} of the spectrum of M_z."
        )


def reciprocal_spectrum_check(
    model: SpaceModel,
    lambdas: typing.Sequence[complex],
    seed: int = 0,
) -> CheckReport:
    """For λ outside σ(M_z), certify 1/λ ∈ σ(L) with an explicit eigenvector."""
    for lam in lambdas:
        _check_exterior(model, lam)

    N = model.trunc_len
    tol = model.tol
    report = CheckReport(
        name="reciprocal",
        provenance={"N": N, "tol": tol, "seed": seed, "samples": len(lambdas)},
    )
    rng = np.random.default_rng(seed)
    gain = model.weights.shift_gain(-1, N + 1)
    refinements = effective_len_ladder(model)

    for index, lam in enumerate(lambdas):
        lam = complex(lam)
        label = f"lambda[{index}]"
        witness = eigenvector_at(model, lam)
        witness_norm = norm(model, witness)
        residual = norm(model, apply_L(model, witness) - witness / lam)
        bound = (gain + 1 / abs(lam)) * witness.tail_bound + 10 * tol * witness_norm
        report.record(f"{label}.witness_residual", residual, bound)

        indicators = [svd_indicator(model, OperatorTag.L, 1 / lam, n) for n in refinements]
        report.sequences[f"{label}.indicator"] = indicators
        growth = max(b - a for a, b in zip(indicators, indicators[1:], strict=False))
        report.record(f"{label}.indicator_non_increasing", growth, 10 * tol)
        report.record(
            f"{label}.indicator_certified", indicators[-1], residual / witness_norm + 10 * tol
        )

        probe = random_function(model, rng)
        lifted = apply_Mz_resolvent(model, apply_Mz(model, probe), lam)
        restored = lifted - apply_L(model, lifted) * lam
        allowance = 10 * tol * (1 + abs(lam)) + (1 + abs(lam) * gain) * lifted.tail_bound
        report.record(f"{label}.right_inverse", norm(model, restored - probe), allowance)

        image = apply_Mz(model, witness - apply_L(model, witness) * lam)
        defect = norm(model, witness - apply_Mz_resolvent(model, image, lam)) / witness_norm
        report.record(f"{label}.left_inverse_defect", defect, 0.5, Comparison.AT_LEAST)

    logger.debug(f"Reciprocal check over {len(lambdas)} samples: passed={report.passed}")
    return report

