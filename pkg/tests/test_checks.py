import numpy as np
import pytest

from errors import InvalidParameterError, NotInSubspaceError, PreconditionError, SpectrumHitError
from models import Suite, WeightKind
from modules.checks import (
    boundary_blowup_diagnostic,
    cd_check,
    decompose_solvability_check,
    density_check,
    dyadic_ray,
    model_axioms_check,
    run_suite,
    sot_decay_check,
    telescoping_residual,
)
from modules.coeffspace import constant, make_space, monomial, random_function, szego_kernel
from modules.subspaces import build_subspace


def measured(report, name):
    return next(detail.measured for detail in report.details if detail.name == name)


def annulus(rng, count, low, high):
    return list(rng.uniform(low, high, count) * np.exp(1j * rng.uniform(0, 2 * np.pi, count)))


def test_axioms_hold_for_presets(preset):
    report = model_axioms_check(preset, seed=0, probes=8)
    assert report.passed, report.failures()
    assert measured(report, "kernel_dimension") == 1


def test_axioms_count_fiber_dimension():
    model = make_space(WeightKind.HARDY, d=3, N=32)
    report = model_axioms_check(model, seed=0, probes=4)
    assert measured(report, "kernel_dimension") == 3
    assert report.passed, report.failures()


def test_axioms_reject_a_larger_disc():
    model = make_space(WeightKind.CUSTOM, N=32, beta=2.0 ** np.arange(33))
    report = model_axioms_check(model, seed=0, probes=4)
    assert not report.passed
    assert "axioms.spectrum_exterior" in report.failures()


def test_sot_decay_of_polynomials(small_hardy):
    f = monomial(small_hardy, 5) + constant(small_hardy)
    report = sot_decay_check(small_hardy, [f], n_max=10)
    assert report.passed, report.failures()
    sequence = report.sequences["probe[0]"]
    assert len(sequence) == 11
    assert sequence[5] == pytest.approx(1.0)
    assert all(value == 0 for value in sequence[6:])


def test_sot_decay_of_kernels(hardy):
    report = sot_decay_check(hardy, [szego_kernel(hardy, 0.5), szego_kernel(hardy, 0.9)], 256)
    assert report.passed, report.failures()
    assert report.sequences["probe[0]"][3] == pytest.approx(0.125 / np.sqrt(0.75))


def test_sot_decay_of_random_probes(preset):
    rng = np.random.default_rng(5)
    probes = [random_function(preset, rng) for _ in range(4)]
    assert sot_decay_check(preset, probes, preset.trunc_len).passed
    with pytest.raises(InvalidParameterError):
        sot_decay_check(preset, probes, 1)


def test_cd_conditions_on_hardy():
    model = make_space(WeightKind.HARDY, N=128)
    omegas = annulus(np.random.default_rng(1), 50, 0.1, 0.85)
    report = cd_check(model, omegas, expected_n=1)
    assert report.passed, report.failures()
    assert report.sequences["kernel_dimension"] == [1.0] * 50


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("kind", [WeightKind.HARDY, WeightKind.BERGMAN, WeightKind.DIRICHLET])
def test_cd_conditions_on_presets(kind, d):
    model = make_space(kind, d=d, N=128)
    omegas = annulus(np.random.default_rng(2), 50, 0.1, 0.85)
    report = cd_check(model, omegas, expected_n=d)
    assert report.passed, report.failures()


def test_cd_detects_wrong_kernel_dimension():
    model = make_space(WeightKind.HARDY, N=64)
    omegas = annulus(np.random.default_rng(3), 30, 0.1, 0.85)
    report = cd_check(model, omegas, expected_n=2)
    assert report.failures() == ["cd.kernel_dimension"]


@pytest.mark.parametrize("omega", [0.0, 0.01, 0.97, 1.2j])
def test_cd_preconditions(small_hardy, omega):
    with pytest.raises(PreconditionError):
        cd_check(small_hardy, [0.5, omega], expected_n=1)


def test_density_bound_is_sharp_for_hardy():
    model = make_space(WeightKind.HARDY, N=128)
    report = density_check(model, None, [2.0], K=12)
    assert report.passed, report.failures()
    np.testing.assert_allclose(report.sequences["lambda[0].printed_bound_ratio"], 2.0)
    assert report.sequences["lambda[0].gap"][10] == pytest.approx(2.0**-12 / np.sqrt(0.75))


def test_density_over_several_points(preset):
    scale = max(1.0, preset.weights.shift_gain(1, 0))
    lambdas = list(np.linspace(1.5, 3.0, 8) * scale * np.exp(1j * np.arange(8)))
    report = density_check(preset, None, lambdas, K=12, seed=4)
    assert report.passed, report.failures()


def test_density_precondition():
    dirichlet = make_space(WeightKind.DIRICHLET, N=32)
    with pytest.raises(PreconditionError):
        density_check(dirichlet, None, [1.3], K=4)
    with pytest.raises(PreconditionError):
        density_check(make_space(WeightKind.HARDY, N=32), None, [1.0], K=4)


def test_telescoping_reconstruction(small_hardy):
    assert telescoping_residual(small_hardy, monomial(small_hardy, 3), 4) == 0.0
    f = random_function(small_hardy, np.random.default_rng(8))
    assert telescoping_residual(small_hardy, f, 12) <= 1e-12


def test_solvability_equivalence():
    model = make_space(WeightKind.HARDY, N=128)
    report = decompose_solvability_check(model, [0, 0.5, 0.5j, -0.7, 2.0, -1.5, 1.5j])
    assert report.passed, report.failures()
    assert min(report.sequences["lambda[1].indicator"]) >= 0.4
    assert measured(report, "conflicts") == 0


def test_solvability_precondition(small_hardy):
    with pytest.raises(PreconditionError):
        decompose_solvability_check(small_hardy, [0.5, 1.0])
    with pytest.raises(PreconditionError):
        decompose_solvability_check(small_hardy, [0.98j])


def test_dyadic_ray():
    np.testing.assert_allclose(dyadic_ray(1.0, count=3), [1.5, 1.25, 1.125])
    np.testing.assert_allclose(dyadic_ray(2j, count=2, start=2, direction=-1), [1.5j, 1.75j])


def test_blowup_at_a_pole(hardy):
    kernel = szego_kernel(hardy, 0.9)
    sub = build_subspace(hardy, [kernel])
    xi = 1 / 0.9
    diagnostic = boundary_blowup_diagnostic(hardy, sub, kernel, xi, dyadic_ray(xi), 1.0)
    assert diagnostic.exponent == pytest.approx(1.0, abs=0.05)
    assert diagnostic.report.passed
    scaled = boundary_blowup_diagnostic(hardy, sub, kernel * 3, xi, dyadic_ray(xi))
    assert scaled.exponent == pytest.approx(diagnostic.exponent, abs=1e-9)


def test_no_blowup_at_analytic_points(hardy):
    kernel = szego_kernel(hardy, 0.5)
    sub = build_subspace(hardy, [kernel])
    diagnostic = boundary_blowup_diagnostic(
        hardy, sub, kernel, 1.2, dyadic_ray(1.2, start=4), expected_exponent=0.0
    )
    assert abs(diagnostic.exponent) <= 0.05
    assert diagnostic.report.passed


def test_no_blowup_at_another_generators_pole(hardy):
    sub = build_subspace(hardy, [szego_kernel(hardy, 0.3), szego_kernel(hardy, 0.6)])
    xi = 1 / 0.6
    diagnostic = boundary_blowup_diagnostic(
        hardy, sub, szego_kernel(hardy, 0.3), xi, dyadic_ray(xi, start=4)
    )
    assert abs(diagnostic.exponent) <= 0.05


def test_blowup_errors(hardy):
    kernel = szego_kernel(hardy, 0.5)
    sub = build_subspace(hardy, [kernel])
    with pytest.raises(NotInSubspaceError):
        boundary_blowup_diagnostic(hardy, sub, monomial(hardy, 1), 2.0, dyadic_ray(2.0))
    with pytest.raises(SpectrumHitError):
        boundary_blowup_diagnostic(hardy, sub, kernel, 2.0, [2.5, 2.25, 2.0])
    with pytest.raises(InvalidParameterError):
        boundary_blowup_diagnostic(hardy, sub, kernel, 2.0, [2.5, 2.25])


def test_full_suite():
    model = make_space(WeightKind.HARDY, N=128)
    result = run_suite(model, Suite.ALL, seed=0)
    assert result.passed, result.failures()
    assert [report.name for report in result.reports] == [
        "axioms",
        "blowup",
        "cd",
        "density",
        "reciprocal",
        "solvability",
        "sot",
    ]


def test_single_suite_is_reproducible(small_hardy):
    first = run_suite(small_hardy, Suite.SOT, seed=3)
    second = run_suite(small_hardy, Suite.SOT, seed=3)
    assert first.model_dump() == second.model_dump()
    assert len(first.reports) == 1


def test_cd_flags_a_boundary_point_hidden_by_the_tail_weights():
    # Hardy weights with a single drop at the end report radius 1/2, so ω = 1 passes the
    # preconditions although it sits on the boundary of σ(L) for every stored degree
    model = make_space(WeightKind.CUSTOM, N=128, beta=[1.0] * 128 + [0.5])
    report = cd_check(model, [0.5, 1.0], expected_n=1)
    assert "cd.surjective_stable" in report.failures()
    assert measured(report, "surjective_stable") > 0.9
    assert measured(report, "surjective_bound") > 0.01


def test_axioms_on_a_narrower_disc():
    model = make_space(WeightKind.CUSTOM, N=64, beta=0.5 ** np.arange(65))
    report = model_axioms_check(model, seed=0, probes=8)
    assert report.passed, report.failures()
    assert max(report.sequences["interior_indicator"]) < 1e-6


@pytest.mark.parametrize("ratio", [2.0, 0.5])
def test_reciprocal_suite_on_geometric_weights(ratio):
    model = make_space(WeightKind.CUSTOM, N=64, beta=ratio ** np.arange(65))
    result = run_suite(model, Suite.RECIPROCAL)
    assert [report.name for report in result.reports] == ["reciprocal"]
    assert all(np.isfinite(detail.measured) for detail in result.reports[0].details)
