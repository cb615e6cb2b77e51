"""
Theorem-level verifiers. Each check returns a CheckReport and records its
failures instead of raising; only violated preconditions raise.
"""

import dataclasses
import math
import typing

import numpy as np
import scipy.linalg
from loguru import logger
from pydantic import BaseModel, Field, computed_field

from config import BOUNDARY_MARGIN, DEFAULT_SEED, PROBE_COUNT, RANK_TOLERANCE
from errors import (
    InvalidParameterError,
    LabError,
    NotInSubspaceError,
    OutsideDomainError,
    PreconditionError,
)
from models import OperatorTag, Suite, SubspaceMode
from modules.coeffspace import (
    CoeffFunction,
    SpaceModel,
    apply_L,
    apply_Mz,
    apply_Mz_resolvent,
    constant,
    evaluate,
    evaluation_bound,
    norm,
    random_function,
    szego_kernel,
)
from modules.reports import CheckReport, Comparison
from modules.resolvent import (
    decompose,
    eigenvector_at,
    resolvent_from_decomposition,
    resolvent_R,
)
from modules.spectra import (
    adjoint_lower_bound,
    effective_len_ladder,
    invertibility_indicator,
    reciprocal_spectrum_check,
    svd_indicator,
    truncation,
)
from modules.subspaces import InvariantSubspace, build_subspace, membership_test

INTERIOR_SAMPLES = (0.0, 0.5, 0.5j)
EXTERIOR_RING = 1.5
INDICATOR_INTERIOR_LIMIT = 1e-6
INDICATOR_EXTERIOR_FLOOR = 0.05
CD_INDICATOR_LIMIT = 1e-4
CD_SURJECTIVE_FLOOR = 1e-3
CD_STABILITY_LIMIT = 0.25


@dataclasses.dataclass(frozen=True)
class BlowupDiagnostic:
    exponent: float
    intercept: float
    rms: float
    norms: np.ndarray
    distances: np.ndarray
    report: CheckReport


class SuiteReport(BaseModel):
    suite: Suite
    reports: list[CheckReport] = Field(default_factory=list)
    provenance: dict[str, typing.Any] = Field(default_factory=dict)

    @computed_field
    @property
    def passed(self) -> bool:
        return all(report.passed for report in self.reports)

    def failures(self) -> list[str]:
        return [name for report in self.reports for name in report.failures()]


def _disc_samples(
    rng: np.random.Generator, count: int, low: float, high: float
) -> list[complex]:
    """Points with modulus uniform in [low, high] and uniform angle."""
    moduli = rng.uniform(low, high, count)
    angles = rng.uniform(0.0, 2 * math.pi, count)
    return [complex(z) for z in moduli * np.exp(1j * angles)]


def _provenance(model: SpaceModel, **extra: typing.Any) -> dict[str, typing.Any]:
    return {
        "kind": model.kind.value,
        "d": model.fiber_dim,
        "N": model.trunc_len,
        "tol": model.tol,
        **extra,
    }


def model_axioms_check(
    model: SpaceModel, seed: int = DEFAULT_SEED, probes: int = PROBE_COUNT
) -> CheckReport:
    """The structural properties the resolvent machinery relies on."""
    rng = np.random.default_rng(seed)
    report = CheckReport(name="axioms", provenance=_provenance(model, seed=seed, probes=probes))
    functions = [random_function(model, rng) for _ in range(probes)]

    # bounded point evaluations
    points = _disc_samples(rng, probes, 0.0, 0.9 * model.radius)
    worst = 0.0
    for f, z in zip(functions, points, strict=True):
        value = float(np.linalg.norm(evaluate(f, z, radius=model.radius)))
        worst = max(worst, value / (evaluation_bound(model, z) * norm(model, f)))
    report.record("point_evaluation", worst, 1.0 + 1e-9)

    kernel = scipy.linalg.null_space(truncation(model, OperatorTag.L))
    report.record("kernel_dimension", kernel.shape[1], model.fiber_dim, Comparison.EQUAL)
    leak = float(np.max(np.abs(kernel[model.fiber_dim :]))) if kernel.size else 0.0
    report.record("kernel_constants", leak, 1e-12)

    failures = 0
    for f, lam in zip(functions, _disc_samples(rng, probes, 0.0, 0.9), strict=True):
        try:
            decompose(model, f, lam * min(1.0, model.radius))
        except LabError as exc:
            logger.debug(f"Decomposition failed at λ = {lam:.4g}: {exc}")
            failures += 1
    report.record("decomposition_failures", failures, 0)

    interior = [
        invertibility_indicator(model, OperatorTag.MZ, lam * model.radius)
        for lam in INTERIOR_SAMPLES
    ]
    report.sequences["interior_indicator"] = interior
    report.record("spectrum_interior", max(interior), INDICATOR_INTERIOR_LIMIT)
    ring = EXTERIOR_RING * np.exp(2j * math.pi * np.arange(8) / 8)
    exterior = [invertibility_indicator(model, OperatorTag.MZ, lam) for lam in ring]
    report.sequences["exterior_indicator"] = exterior
    report.record(
        "spectrum_exterior", min(exterior), INDICATOR_EXTERIOR_FLOOR, Comparison.AT_LEAST
    )
    return report


def sot_decay_check(
    model: SpaceModel, probes: typing.Sequence[CoeffFunction], n_max: int
) -> CheckReport:
    """‖M_zⁿLⁿf‖ is the norm of the part of f of degree ≥ n and must fall to zero."""
    if n_max < 2:
        raise InvalidParameterError("n_max must be at least 2.")
    n_max = min(n_max, model.trunc_len)
    report = CheckReport(
        name="sot", provenance=_provenance(model, probes=len(probes), n_max=n_max)
    )
    worst_rise = worst_final = worst_mismatch = 0.0
    for index, f in enumerate(probes):
        f_norm = norm(model, f)
        energy = model.beta**2 * np.sum(np.abs(f.coeffs) ** 2, axis=1)
        sequence = np.sqrt(np.cumsum(energy[::-1])[::-1])[: n_max + 1]
        report.sequences[f"probe[{index}]"] = sequence.tolist()

        for n in (1, n_max):
            explicit = f
            for _ in range(n):
                explicit = apply_L(model, explicit)
            for _ in range(n):
                explicit = apply_Mz(model, explicit)
            worst_mismatch = max(worst_mismatch, abs(norm(model, explicit) - sequence[n]))

        if f_norm:
            worst_rise = max(worst_rise, float(np.max(np.diff(sequence))) / f_norm)
            excess = sequence[-1] - model.tol * f_norm - f.tail_bound
            worst_final = max(worst_final, float(excess) / f_norm)
    report.record("operator_agreement", worst_mismatch, 1e-12)
    report.record("non_increasing", worst_rise, 0.0)
    report.record("final_below_tolerance", worst_final, 0.0)
    return report


def _check_omegas(model: SpaceModel, omegas: typing.Sequence[complex]) -> float:
    """Samples must avoid 0 and the circle bounding σ(L); returns that circle's radius."""
    outer = 1.0 / model.radius
    for omega in omegas:
        if not BOUNDARY_MARGIN * outer < abs(omega) < (1 - BOUNDARY_MARGIN) * outer:
            raise PreconditionError(
                f"ω = {omega:.4g} is within {BOUNDARY_MARGIN:g} of 0 or of |ω| = {outer:g}."
            )
    return outer


def cd_check(
    model: SpaceModel,
    omegas: typing.Sequence[complex],
    expected_n: int,
    K: int = 10,
) -> CheckReport:
    """The Cowen-Douglas conditions for L on the disc where L - ω is onto."""
    _check_omegas(model, omegas)
    N = model.trunc_len
    d = model.fiber_dim
    ladder = effective_len_ladder(model)
    report = CheckReport(
        name="cd",
        provenance=_provenance(model, samples=len(omegas), expected_n=expected_n, K=K),
    )

    worst_indicator = worst_rise = worst_drop = 0.0
    lowest_bound = math.inf
    dimensions = []
    square = truncation(model, OperatorTag.L)
    for omega in omegas:
        indicators = [svd_indicator(model, OperatorTag.L, omega, n) for n in ladder]
        worst_indicator = max(worst_indicator, indicators[-1])
        worst_rise = max(worst_rise, *(b - a for a, b in zip(indicators, indicators[1:])))

        # L - ω is onto exactly when (L - ω)* is bounded below
        bounds = [adjoint_lower_bound(model, OperatorTag.L, omega, n) for n in ladder]
        lowest_bound = min(lowest_bound, bounds[-1])
        worst_drop = max(worst_drop, (bounds[-2] - bounds[-1]) / max(bounds[-1], 1e-300))

        rows = (square - omega * np.eye((N + 1) * d))[: N * d]
        dimensions.append(scipy.linalg.null_space(rows).shape[1])

    report.record("in_spectrum", worst_indicator, CD_INDICATOR_LIMIT)
    report.record("indicator_non_increasing", worst_rise, 10 * model.tol)
    report.record("surjective_bound", lowest_bound, CD_SURJECTIVE_FLOOR, Comparison.AT_LEAST)
    report.record("surjective_stable", worst_drop, CD_STABILITY_LIMIT)

    degree = max(0, min(K, len(omegas) - 1, N // 2))
    columns = [
        np.kron(model.beta[: degree + 1] * omega ** np.arange(degree + 1), e)
        for omega in omegas
        for e in model.fiber_basis()
    ]
    if columns:
        stacked = np.column_stack(columns)
        stacked /= np.linalg.norm(stacked, axis=0)
        singular = scipy.linalg.svdvals(stacked)
        rank = int(np.sum(singular > RANK_TOLERANCE * singular[0]))
        report.sequences["kernel_span_singular_values"] = singular.tolist()
        report.record("kernel_span_rank", rank, (degree + 1) * d, Comparison.EQUAL)

    report.sequences["kernel_dimension"] = [float(n) for n in dimensions]
    report.record("kernel_dimension_constant", len(set(dimensions)), 1, Comparison.AT_MOST)
    mismatched = sum(1 for n in dimensions if n != expected_n)
    report.record("kernel_dimension", mismatched, 0)
    return report


def density_check(
    model: SpaceModel,
    kernel_basis: typing.Sequence[typing.Any] | None,
    lambdas: typing.Sequence[complex],
    K: int,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """
    Polynomial approximants of (M_z - λ)^{-1}h, the span of resolvent vectors
    and the telescoping reconstruction f = M_zⁿLⁿf + Σ M_zᵏ(I - M_zL)Lᵏf.
    """
    shift_norm = model.weights.shift_gain(1, 0)
    for lam in lambdas:
        if abs(lam) <= shift_norm:
            raise PreconditionError(f"|λ| = {abs(lam):g} must exceed ‖M_z‖ = {shift_norm:g}.")
    if K < 0:
        raise InvalidParameterError("K must be nonnegative.")
    kernel_basis = model.fiber_basis() if kernel_basis is None else list(kernel_basis)
    report = CheckReport(
        name="density",
        provenance=_provenance(model, samples=len(lambdas), K=K, seed=seed),
    )
    K = min(K, model.trunc_len)

    worst_excess = 0.0
    for e in kernel_basis:
        h = constant(model, e)
        for index, lam in enumerate(lambdas):
            target = apply_Mz_resolvent(model, h, lam)
            target_norm = norm(model, target)
            powers = -(complex(lam) ** -np.arange(1, K + 2))
            measured, printed_ratio = [], []
            for n in range(K + 1):
                approximant = np.zeros_like(h.coeffs)
                approximant[: n + 1] = powers[: n + 1, None] * h.coeffs[0]
                gap = norm(model, CoeffFunction(approximant) - target)
                bound = (shift_norm / abs(lam)) ** (n + 1) * target_norm
                measured.append(gap)
                printed_ratio.append(gap * abs(lam) / bound)
                worst_excess = max(worst_excess, (gap - bound) / target_norm)
            report.sequences[f"lambda[{index}].gap"] = measured
            report.sequences[f"lambda[{index}].printed_bound_ratio"] = printed_ratio
    report.record("approximant_bound", worst_excess, 10 * model.tol)

    degree = min(K, len(lambdas) - 1)
    if degree >= 0:
        rows = (degree + 1) * model.fiber_dim
        e = kernel_basis[0]
        h = constant(model, e)
        resolvents = np.column_stack(
            [model.to_vector(apply_Mz_resolvent(model, h, lam))[:rows] for lam in lambdas]
        )
        worst = 0.0
        for k in range(degree + 1):
            target = np.zeros(rows, dtype=complex)
            target[k * model.fiber_dim : (k + 1) * model.fiber_dim] = (
                model.beta[k] * h.coeffs[0]
            )
            solution, *_ = scipy.linalg.lstsq(resolvents, target)
            residual = np.linalg.norm(resolvents @ solution - target) / np.linalg.norm(target)
            worst = max(worst, float(residual))
        report.record("monomials_in_resolvent_span", worst, RANK_TOLERANCE)

    rng = np.random.default_rng(seed)
    steps = max(1, min(K, model.trunc_len))
    worst = 0.0
    for _ in range(4):
        f = random_function(model, rng)
        worst = max(worst, telescoping_residual(model, f, steps) / norm(model, f))
    report.record("telescoping", worst, 10 * model.tol)
    return report


def telescoping_residual(model: SpaceModel, f: CoeffFunction, n: int) -> float:
    """‖f - M_zⁿLⁿf - Σ_{k<n} M_zᵏ(I - M_zL)Lᵏf‖ on the stored coefficients."""
    rebuilt = model.zeros()
    power = f
    for k in range(n):
        piece = power - apply_Mz(model, apply_L(model, power))
        for _ in range(k):
            piece = apply_Mz(model, piece)
        rebuilt = rebuilt + piece
        power = apply_L(model, power)
    for _ in range(n):
        power = apply_Mz(model, power)
    return norm(model, f - power - rebuilt)


def decompose_solvability_check(
    model: SpaceModel, lambdas: typing.Sequence[complex], seed: int = DEFAULT_SEED
) -> CheckReport:
    """Inside σ(M_z) the decomposition exists; outside it 1/λ is an eigenvalue of L."""
    for lam in lambdas:
        if abs(abs(lam) / model.radius - 1) <= BOUNDARY_MARGIN:
            raise PreconditionError(f"|λ| = {abs(lam):g} is too close to the boundary circle.")
    rng = np.random.default_rng(seed)
    ladder = effective_len_ladder(model)
    report = CheckReport(
        name="solvability", provenance=_provenance(model, samples=len(lambdas), seed=seed)
    )

    conflicts = failures = 0
    worst_agreement = worst_instability = 0.0
    smallest_indicator = math.inf
    for index, lam in enumerate(lambdas):
        lam = complex(lam)
        f = random_function(model, rng)
        if lam == 0:
            g, h = decompose(model, f, lam)
            worst_agreement = max(worst_agreement, norm(model, g - apply_L(model, f)))
            continue

        if abs(lam) < model.radius:
            try:
                decompose(model, f, lam)
                solvable = True
            except LabError as exc:
                logger.debug(f"Decomposition failed at λ = {lam:.4g}: {exc}")
                solvable = False
                failures += 1
            indicators = [
                abs(lam) * svd_indicator(model, OperatorTag.L, 1 / lam, n) for n in ladder[1:]
            ]
            report.sequences[f"lambda[{index}].indicator"] = indicators
            smallest_indicator = min(smallest_indicator, indicators[-1])
            gap = abs(indicators[1] - indicators[0]) / max(indicators[1], 1e-300)
            worst_instability = max(worst_instability, gap)
            if solvable:
                direct = resolvent_R(model, f, lam)
                rebuilt = resolvent_from_decomposition(model, f, lam)
                worst_agreement = max(worst_agreement, norm(model, direct - rebuilt))
            witnessed = False
        else:
            witness = eigenvector_at(model, lam)
            try:
                resolvent_R(model, witness, lam)
                solvable = True
            except OutsideDomainError:
                solvable = False
            residual = norm(model, apply_L(model, witness) - witness / lam)
            gain = model.weights.shift_gain(-1, model.trunc_len + 1)
            bound = (gain + 1 / abs(lam)) * witness.tail_bound
            witnessed = residual <= bound + 10 * model.tol * norm(model, witness)
            if solvable or not witnessed:
                failures += 1
        if solvable and witnessed:
            conflicts += 1

    report.record("failures", failures, 0)
    report.record("conflicts", conflicts, 0)
    report.record("resolvent_agreement", worst_agreement, 10 * model.tol)
    if math.isfinite(smallest_indicator):
        report.record("indicator_floor", smallest_indicator, 1e-3, Comparison.AT_LEAST)
        report.record("indicator_stable", worst_instability, 5e-2)
    return report


def dyadic_ray(
    xi: complex, count: int = 12, start: int = 1, direction: complex = 1.0
) -> list[complex]:
    """λ_k = ξ(1 + direction·2⁻ᵏ) for k = start .. start + count - 1."""
    return [complex(xi) * (1 + direction * 2.0**-k) for k in range(start, start + count)]


def boundary_blowup_diagnostic(
    model: SpaceModel,
    sub: InvariantSubspace,
    f: CoeffFunction,
    xi: complex,
    ray: typing.Sequence[complex],
    expected_exponent: float | None = None,
) -> BlowupDiagnostic:
    """Fit log‖R_λf‖ against -log|λ - ξ| along a ray approaching ξ."""
    if len(ray) < 3:
        raise InvalidParameterError("The ray needs at least three points.")
    membership = membership_test(sub, f)
    if not membership.is_member:
        raise NotInSubspaceError(
            f"f is not in the subspace (residual {membership.residual:.3g})."
        )

    norms = np.array([norm(model, resolvent_R(model, f, lam, subspace=sub)) for lam in ray])
    distances = np.abs(np.asarray(ray, dtype=complex) - xi)
    x = -np.log(distances)
    y = np.log(norms)
    (exponent, intercept), residuals, *_ = np.polyfit(x, y, 1, full=True)
    rms = math.sqrt(float(residuals[0]) / len(ray)) if len(residuals) else 0.0

    report = CheckReport(
        name="blowup",
        provenance=_provenance(model, xi=[complex(xi).real, complex(xi).imag], points=len(ray)),
        sequences={"norms": norms.tolist(), "distances": distances.tolist()},
    )
    report.record("fit_rms", rms, 0.1)
    if expected_exponent is not None:
        report.record("exponent", abs(exponent - expected_exponent), 0.05)
    logger.debug(f"Growth exponent {exponent:.4f} towards ξ = {xi:.4g} (rms {rms:.2g})")
    return BlowupDiagnostic(
        exponent=float(exponent),
        intercept=float(intercept),
        rms=rms,
        norms=norms,
        distances=distances,
        report=report,
    )


def _blowup_suite(model: SpaceModel) -> CheckReport:
    """A simple pole and an analytic point, with their expected growth exponents."""
    report = CheckReport(name="blowup", provenance=_provenance(model))
    r = model.radius
    cases = [("pole", 0.9 / r, r / 0.9, 1, 1.0), ("analytic", 0.5 / r, 1.2 * r, 4, 0.0)]
    for label, a, xi, start, expected in cases:
        kernel = szego_kernel(model, a)
        sub = build_subspace(model, [kernel], SubspaceMode.EXACT_SPAN)
        ray = dyadic_ray(xi, count=12, start=start)
        diagnostic = boundary_blowup_diagnostic(model, sub, kernel, xi, ray, expected)
        for detail in diagnostic.report.details:
            report.details.append(detail.model_copy(update={"name": f"{label}.{detail.name}"}))
        report.sequences[f"{label}.norms"] = diagnostic.norms.tolist()
        report.sequences[f"{label}.exponent"] = [diagnostic.exponent]
    return report


def run_suite(model: SpaceModel, suite: Suite = Suite.ALL, seed: int = DEFAULT_SEED) -> SuiteReport:
    """Run the named check (or all of them) with the default sample sets."""
    rng = np.random.default_rng(seed)
    r = model.radius
    selected = list(Suite)[1:] if suite == Suite.ALL else [suite]
    result = SuiteReport(suite=suite, provenance=_provenance(model, seed=seed))

    for name in selected:
        logger.info(f"Running {name.value} check")
        match name:
            case Suite.AXIOMS:
                report = model_axioms_check(model, seed=seed)
            case Suite.SOT:
                probes = [random_function(model, rng) for _ in range(PROBE_COUNT)]
                probes.append(szego_kernel(model, 0.9 / r))
                report = sot_decay_check(model, probes, model.trunc_len)
            case Suite.CD:
                omegas = _disc_samples(rng, 50, 0.1 / r, 0.85 / r)
                report = cd_check(model, omegas, expected_n=model.fiber_dim)
            case Suite.DENSITY:
                scale = max(1.0, model.weights.shift_gain(1, 0))
                moduli = np.linspace(1.5, 3.0, 8) * scale
                angles = 2 * math.pi * np.arange(8) / 8 + 0.3
                lambdas = [complex(z) for z in moduli * np.exp(1j * angles)]
                report = density_check(model, None, lambdas, K=12, seed=seed)
            case Suite.SOLVABILITY:
                grid = [0.0, 0.5 * r, 0.5j * r, -0.7 * r, 2.0 * r, -1.5 * r, 1.5j * r]
                report = decompose_solvability_check(model, grid, seed=seed)
            case Suite.RECIPROCAL:
                lambdas = [2.0 * r, 1.5 * r, 10.0 * r, 2.0j * r]
                report = reciprocal_spectrum_check(model, lambdas, seed=seed)
            case Suite.BLOWUP:
                report = _blowup_suite(model)
            case _:
                raise InvalidParameterError(f"Unknown suite {name}.")
        result.reports.append(report)
        logger.info(f"Check {name.value}: {'passed' if report.passed else 'FAILED'}")

    result.reports.sort(key=lambda report: report.name)
    return result
