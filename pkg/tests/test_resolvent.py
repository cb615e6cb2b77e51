import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from errors import (
    DegenerateParameterError,
    DomainError,
    InvalidParameterError,
    OutsideDomainError,
    SpectrumHitError,
)
from models import WeightKind
from modules.coeffspace import (
    apply_L,
    apply_Mz,
    constant,
    evaluate,
    make_space,
    monomial,
    norm,
    random_function,
    szego_kernel,
)
from modules.resolvent import (
    continue_f,
    decompose,
    eigenvector_at,
    exterior_series,
    kernel_component_c,
    resolvent_from_decomposition,
    resolvent_R,
)
from modules.subspaces import build_subspace

HARDY = make_space(WeightKind.HARDY, N=256)
BERGMAN = make_space(WeightKind.BERGMAN, N=128)

interior = st.complex_numbers(
    min_magnitude=0.01, max_magnitude=0.9, allow_nan=False, allow_infinity=False
)


def test_resolvent_at_zero_is_identity():
    f = random_function(HARDY, np.random.default_rng(1))
    np.testing.assert_array_equal(resolvent_R(HARDY, f, 0).coeffs, f.coeffs)


def test_resolvent_of_kernel_function():
    kernel = szego_kernel(HARDY, 0.5)
    g = resolvent_R(HARDY, kernel, 0.25)
    np.testing.assert_allclose(g.coeffs, kernel.coeffs * 8 / 7, atol=1e-12)


def test_resolvent_diverges_past_the_eigenvalue():
    with pytest.raises(OutsideDomainError):
        resolvent_R(HARDY, szego_kernel(HARDY, 0.5), 3.0)


def test_restricted_resolvent_outside_the_disc():
    sub = build_subspace(HARDY, [szego_kernel(HARDY, 0.5)])
    kernel = szego_kernel(HARDY, 0.5)
    g = resolvent_R(HARDY, kernel, 1.6, subspace=sub)
    np.testing.assert_allclose(g.coeffs, 5 * kernel.coeffs, atol=1e-9)


def test_decompose_examples():
    g, h = decompose(HARDY, constant(HARDY), 0.7)
    assert not np.any(g.coeffs)
    np.testing.assert_allclose(h.coeffs, constant(HARDY).coeffs)

    g, h = decompose(HARDY, monomial(HARDY, 1), 0.5)
    np.testing.assert_allclose(g.coeffs, constant(HARDY).coeffs)
    np.testing.assert_allclose(h.coeffs, constant(HARDY, 0.5).coeffs)


@seed(2)
@settings(deadline=None, max_examples=40)
@given(lam=interior, probe=st.integers(0, 1000))
def test_decomposition_reconstructs_and_evaluates(lam, probe):
    f = random_function(BERGMAN, np.random.default_rng(probe))
    g, h = decompose(BERGMAN, f, lam)
    rebuilt = apply_Mz(BERGMAN, g) - g * lam + h
    assert norm(BERGMAN, rebuilt - f) <= 1e-9
    assert h.degree() <= 0
    np.testing.assert_allclose(h.constant_term(), evaluate(f, lam), atol=1e-8)


@seed(5)
@settings(deadline=None, max_examples=40)
@given(
    lam=interior,
    sample=st.integers(0, 1000),
    degree=st.integers(0, 24),
    kind=st.sampled_from([WeightKind.HARDY, WeightKind.BERGMAN, WeightKind.DIRICHLET]),
)
def test_decomposition_residual_stays_within_tolerance(lam, sample, degree, kind):
    model = make_space(kind, N=64)
    f = random_function(model, np.random.default_rng(sample), degree=degree)
    g, h = decompose(model, f, lam)
    residual = norm(model, f - (apply_Mz(model, g) - g * lam) - h)
    assert residual <= 10 * model.tol * norm(model, f)


def test_resolvent_from_decomposition_matches_neumann():
    f = random_function(HARDY, np.random.default_rng(4))
    direct = resolvent_R(HARDY, f, 0.5)
    indirect = resolvent_from_decomposition(HARDY, f, 0.5)
    np.testing.assert_allclose(indirect.coeffs, direct.coeffs, atol=1e-10)


def test_kernel_component():
    with pytest.raises(DegenerateParameterError):
        kernel_component_c(HARDY, constant(HARDY), 0)
    c = kernel_component_c(HARDY, constant(HARDY), 0.3)
    np.testing.assert_allclose(c.coeffs, constant(HARDY).coeffs)
    c = kernel_component_c(HARDY, szego_kernel(HARDY, 0.5), 0.25)
    assert c.constant_term()[0] == pytest.approx(8 / 7)
    assert c.degree() == 0


@seed(3)
@settings(deadline=None, max_examples=100)
@given(lam=interior, probe=st.integers(0, 10_000))
def test_continuation_agrees_with_function_inside_the_disc(lam, probe):
    f = random_function(HARDY, np.random.default_rng(probe))
    result = continue_f(HARDY, f, lam)
    expected = evaluate(f, lam)
    assert abs(result.value[0] - expected[0]) <= 1e-8 * max(1.0, abs(expected[0]))
    assert result.residual <= 1e-8 * norm(HARDY, f)
    assert result.in_paper_domain


@pytest.mark.parametrize("a", [0.3, -0.6, 0.5j, 0.9])
def test_continuation_of_kernels_inside_the_disc(a):
    kernel = szego_kernel(HARDY, a)
    lam = 0.4 - 0.2j
    result = continue_f(HARDY, kernel, lam)
    assert result.value[0] == pytest.approx(1 / (1 - a * lam), rel=1e-8)


def test_continuation_through_invariant_subspace():
    kernel = szego_kernel(HARDY, 0.5)
    sub = build_subspace(HARDY, [kernel])
    result = continue_f(HARDY, kernel, 1.6, subspace=sub)
    assert result.value[0] == pytest.approx(5.0, abs=1e-10)
    assert result.in_paper_domain
    with pytest.raises(SpectrumHitError):
        continue_f(HARDY, kernel, 2.0, subspace=sub)


def test_polynomials_continue_past_the_boundary():
    result = continue_f(HARDY, monomial(HARDY, 3), 2.0)
    assert result.value[0] == pytest.approx(8.0)
    assert not result.in_paper_domain
    record = result.to_record().model_dump(by_alias=True, exclude_none=True)
    assert record["lambda"] == [2.0, 0.0]
    assert record["value"] == [[pytest.approx(8.0), pytest.approx(0.0)]]


def test_eigenvector_at_exterior_point():
    v = eigenvector_at(HARDY, 2.0)
    np.testing.assert_allclose(v.coeffs, -0.5 * szego_kernel(HARDY, 0.5).coeffs, atol=1e-15)
    shifted = apply_L(HARDY, v)
    np.testing.assert_allclose(shifted.coeffs[:-1], 0.5 * v.coeffs[:-1], atol=1e-15)


def test_eigenvector_is_fiberwise():
    model = make_space(WeightKind.HARDY, d=2, N=64)
    v = eigenvector_at(model, 3.0, [0, 1])
    assert not np.any(v.coeffs[:, 0])
    assert v.coeffs[0, 1] == pytest.approx(-1 / 3)


def test_eigenvector_rejects_bad_input():
    with pytest.raises(DomainError):
        eigenvector_at(HARDY, 0.5)
    with pytest.raises(DomainError):
        eigenvector_at(HARDY, 1.0)
    with pytest.raises(InvalidParameterError):
        eigenvector_at(HARDY, 2.0, 0.0)


def test_exterior_series_of_a_contraction():
    series = exterior_series(np.array([[0.5]]), np.array([1.0]), 1, 60)
    np.testing.assert_allclose(series.coefficients[:, 0], 0.5 ** np.arange(1, 61))
    np.testing.assert_allclose(series.ratios, 0.5)
    assert series.convergence_radius == pytest.approx(0.5)
    assert series.evaluate(2.0)[0] == pytest.approx(1 / 3)


def test_exterior_series_projects_onto_leading_coordinates():
    T = np.diag([0.5, 0.9])
    series = exterior_series(T, np.array([1.0, 1.0]), 1, 40)
    np.testing.assert_allclose(series.coefficients[:, 0], 0.5 ** np.arange(1, 41))

    nilpotent = exterior_series(np.zeros((2, 2)), np.array([1.0, 0.0]), 2, 10)
    assert not np.any(nilpotent.coefficients)
    assert nilpotent.convergence_radius == 0.0


def test_exterior_series_validates_input():
    with pytest.raises(InvalidParameterError):
        exterior_series(np.zeros((2, 3)), np.zeros(2), 1, 5)
    with pytest.raises(InvalidParameterError):
        exterior_series(np.eye(2), np.zeros(3), 1, 5)
    with pytest.raises(InvalidParameterError):
        exterior_series(np.eye(2), np.zeros(2), 3, 5)
    with pytest.raises(InvalidParameterError):
        exterior_series(np.eye(2), np.zeros(2), 1, 0)
