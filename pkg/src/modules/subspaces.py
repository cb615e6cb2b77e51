"""
Finite-dimensional L-invariant subspaces, their restriction matrices and the
spectral predicates that compare membership with restriction eigenvalues.
"""

import dataclasses
import typing

import numpy as np
import scipy.linalg
from loguru import logger

from config import GRAM_CONDITION_LIMIT, MEMBERSHIP_THRESHOLD, RANK_TOLERANCE
from errors import (
    DependentBasisError,
    DomainError,
    InvalidParameterError,
    InvarianceError,
    NotInSubspaceError,
    PreconditionError,
    UndefinedRatioError,
)
from models import SubspaceMode, pair
from modules.coeffspace import CoeffFunction, SpaceModel, apply_L, norm, szego_kernel
from modules.reports import ArrDiscEntry, ArrDiscReport
from modules.resolvent import eigenvector_at


class Membership(typing.NamedTuple):
    is_member: bool
    residual: float
    threshold: float


@dataclasses.dataclass(frozen=True)
class PointSpectrumVerdict:
    """Whether 1/λ is an eigenvalue of L restricted to the subspace, decided twice."""

    lam: complex
    by_membership: bool
    by_eigenvalue: bool
    residual: float
    threshold: float

    @property
    def agree(self) -> bool:
        return self.by_membership == self.by_eigenvalue

    @property
    def holds(self) -> bool:
        return self.by_membership

    def __bool__(self) -> bool:
        return self.holds


@dataclasses.dataclass(frozen=True, eq=False)
class InvariantSubspace:
    model: SpaceModel
    basis: tuple[CoeffFunction, ...]
    gram: np.ndarray
    restriction: np.ndarray
    """A with L b_j ≈ Σ_i A_ij b_i."""
    closure_residual: float
    frame: np.ndarray
    """Orthonormal frame Q = B R⁻¹ as columns of model coordinates."""
    cholesky: np.ndarray
    """Upper triangular R with gram = Rᴴ R."""
    restriction_orthonormal: np.ndarray
    condition: float
    threshold: float
    mode: SubspaceMode

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def tail_bounds(self) -> np.ndarray:
        return np.array([b.tail_bound for b in self.basis])

    def orthonormal_coordinates(self, f: CoeffFunction) -> tuple[np.ndarray, float]:
        """Coordinates of P_M f in the frame and the relative projection loss."""
        self.model.check(f)
        vector = self.model.to_vector(f)
        size = float(np.linalg.norm(vector))
        if size == 0.0:
            return np.zeros(self.dim, dtype=complex), 0.0
        coords = self.frame.conj().T @ vector
        loss = float(np.linalg.norm(vector - self.frame @ coords)) / size
        if loss > self.threshold:
            raise NotInSubspaceError(
                f"Function is not in the subspace: relative residual {loss:.3g} "
                f"exceeds {self.threshold:.3g}."
            )
        return coords, loss

    def from_orthonormal(self, coords: np.ndarray) -> CoeffFunction:
        """The element Q y, with a tail bound inherited from the basis."""
        weights = scipy.linalg.solve_triangular(self.cholesky, coords)
        tail = float(np.abs(weights) @ self.tail_bounds)
        return self.model.from_vector(self.frame @ coords, tail)

    def combine(self, weights: np.ndarray) -> CoeffFunction:
        """Σ_j w_j b_j."""
        coeffs = sum(w * b.coeffs for w, b in zip(weights, self.basis, strict=True))
        tail = float(np.abs(weights) @ self.tail_bounds)
        return CoeffFunction(coeffs, tail)


def _vectors(model: SpaceModel, functions: typing.Sequence[CoeffFunction]) -> np.ndarray:
    return np.column_stack([model.to_vector(f) for f in functions])


def _orbit_basis(
    model: SpaceModel, generators: list[CoeffFunction], depth: int
) -> list[CoeffFunction]:
    """Generators followed by the independent Lᵏg (1 ≤ k < depth), chosen greedily."""
    accepted: list[CoeffFunction] = []
    frame: list[np.ndarray] = []

    def distance(vector: np.ndarray) -> np.ndarray:
        residual = vector.copy()
        for _ in range(2):
            for q in frame:
                residual -= np.vdot(q, residual) * q
        return residual

    current = list(generators)
    for k in range(depth):
        for index, candidate in enumerate(current):
            vector = model.to_vector(candidate)
            size = float(np.linalg.norm(vector))
            residual = distance(vector)
            gap = float(np.linalg.norm(residual))
            if size > 0.0 and gap > RANK_TOLERANCE * size:
                accepted.append(candidate)
                frame.append(residual / gap)
            elif k == 0:
                raise DependentBasisError(f"Generator {index} depends on the previous ones.")
        current = [apply_L(model, g) for g in current]
    logger.debug(f"Orbit closure of depth {depth} kept {len(accepted)} vectors")
    return accepted


def build_subspace(
    model: SpaceModel,
    generators: typing.Sequence[CoeffFunction],
    mode: SubspaceMode = SubspaceMode.EXACT_SPAN,
    orbit_depth: int | None = None,
    tolerance: float | None = None,
) -> InvariantSubspace:
    """
    Span of the generators with the matrix of L on it.

    ExactSpan refuses spans that L does not map into themselves. OrbitClosure
    adds the L-orbit of the generators up to ``orbit_depth`` and reports how far
    the result is from invariant.
    """
    if not generators:
        raise InvalidParameterError("At least one generator is required.")
    for g in generators:
        model.check(g)
    threshold = MEMBERSHIP_THRESHOLD if tolerance is None else tolerance

    basis = list(generators)
    if mode == SubspaceMode.ORBIT_CLOSURE:
        if orbit_depth is None or orbit_depth < 1:
            raise InvalidParameterError("OrbitClosure needs a positive orbit depth.")
        basis = _orbit_basis(model, basis, orbit_depth)

    B = _vectors(model, basis)
    sizes = np.linalg.norm(B, axis=0)
    if np.any(sizes == 0.0):
        raise DependentBasisError("The zero function cannot be a generator.")
    gram = B.conj().T @ B
    scaled = gram / np.outer(sizes, sizes)
    condition = float(np.linalg.cond(scaled))
    if not condition < GRAM_CONDITION_LIMIT:
        raise DependentBasisError(
            f"Generators are numerically dependent (gram condition {condition:.3g})."
        )
    if condition > 1e8:
        logger.warning(f"Gram condition number {condition:.3g} is large")

    R = scipy.linalg.cholesky(gram, lower=False)
    Q = scipy.linalg.solve_triangular(R, B.T, trans="T").T
    LB = _vectors(model, [apply_L(model, b) for b in basis])
    projected = Q.conj().T @ LB
    restriction_orthonormal = scipy.linalg.solve_triangular(R, projected.T, trans="T").T
    restriction = scipy.linalg.solve_triangular(R, projected)
    closure_residual = float(np.max(np.linalg.norm(LB - Q @ projected, axis=0)))

    tails = np.array([b.tail_bound for b in basis])
    gain = model.weights.shift_gain(-1, model.trunc_len + 1)
    allowed = threshold * float(np.max(sizes)) + (
        gain + float(np.linalg.norm(restriction, 2))
    ) * float(np.max(tails))
    if closure_residual > allowed:
        if mode == SubspaceMode.EXACT_SPAN:
            raise InvarianceError(
                f"Span is not L-invariant: closure residual {closure_residual:.3g} "
                f"exceeds {allowed:.3g}."
            )
        logger.warning(
            f"Orbit closure of depth {orbit_depth} is {closure_residual:.3g} away from invariant"
        )

    logger.debug(
        f"Built {mode.value} subspace of dimension {len(basis)}, "
        f"closure residual {closure_residual:.3g}"
    )
    return InvariantSubspace(
        model=model,
        basis=tuple(basis),
        gram=gram,
        restriction=restriction,
        closure_residual=closure_residual,
        frame=Q,
        cholesky=R,
        restriction_orthonormal=restriction_orthonormal,
        condition=condition,
        threshold=threshold,
        mode=mode,
    )


def restriction_spectrum(sub: InvariantSubspace) -> list[complex]:
    """Eigenvalues of L restricted to the subspace, sorted by real then imaginary part."""
    eigenvalues = scipy.linalg.eigvals(sub.restriction_orthonormal)
    return sorted((complex(mu) for mu in eigenvalues), key=lambda mu: (mu.real, mu.imag))


def membership_test(sub: InvariantSubspace, f: CoeffFunction) -> Membership:
    """Relative gram-projection residual ‖f - P_M f‖/‖f‖ against the subspace threshold."""
    sub.model.check(f)
    vector = sub.model.to_vector(f)
    size = float(np.linalg.norm(vector))
    if size == 0.0:
        raise UndefinedRatioError("Membership of the zero function is undefined.")
    coords = sub.frame.conj().T @ vector
    residual = float(np.linalg.norm(vector - sub.frame @ coords)) / size
    return Membership(residual <= sub.threshold, residual, sub.threshold)


def _near_spectrum(sub: InvariantSubspace, mu: complex) -> bool:
    return any(abs(eig - mu) <= sub.threshold for eig in restriction_spectrum(sub))


def point_spectrum_restriction(
    model: SpaceModel,
    sub: InvariantSubspace,
    lam: complex,
    kernel_basis: typing.Sequence[typing.Any] | None = None,
) -> PointSpectrumVerdict:
    """
    Decide whether some (M_z - λ)^{-1}h with h in the kernel of L lies in the
    subspace, and cross-check with 1/λ among the restriction eigenvalues.
    """
    if abs(lam) <= model.radius:
        raise DomainError(f"λ = {lam:.4g} lies in the spectrum of M_z.")
    kernel_basis = model.fiber_basis() if kernel_basis is None else list(kernel_basis)
    if not kernel_basis:
        raise InvalidParameterError("The kernel basis is empty.")

    candidates = _vectors(model, [eigenvector_at(model, lam, e) for e in kernel_basis])
    frame, _ = np.linalg.qr(candidates)
    outside = frame - sub.frame @ (sub.frame.conj().T @ frame)
    residual = float(scipy.linalg.svdvals(outside).min())

    verdict = PointSpectrumVerdict(
        lam=complex(lam),
        by_membership=residual <= sub.threshold,
        by_eigenvalue=_near_spectrum(sub, 1 / lam),
        residual=residual,
        threshold=sub.threshold,
    )
    if not verdict.agree:
        logger.warning(
            f"Point spectrum predicates disagree at λ = {lam:.4g}: membership "
            f"{verdict.by_membership} (residual {residual:.3g}), eigenvalue {verdict.by_eigenvalue}"
        )
    return verdict


def arr_disc_check(
    model: SpaceModel, sub: InvariantSubspace, samples: typing.Iterable[complex]
) -> ArrDiscReport:
    """Compare a ∈ σ(L|_M) with k_a ∈ M for every sample a in the disc."""
    if model.fiber_dim != 1:
        raise PreconditionError("The disc identity is checked for scalar spaces only.")
    report = ArrDiscReport()
    for a in samples:
        a = complex(a)
        if abs(a) * model.weights.asymptotic_ratio >= 1.0:
            raise PreconditionError(f"Sample a = {a:.4g} is outside the disc.")
        in_spectrum = _near_spectrum(sub, a)
        is_member = membership_test(sub, szego_kernel(model, a)).is_member
        report.entries.append(
            ArrDiscEntry(
                a=pair(a),
                in_spectrum=in_spectrum,
                is_member=is_member,
                agree=in_spectrum == is_member,
            )
        )
    if not report.passed:
        logger.warning(f"{len(report.disagreements())} disc samples disagree")
    return report
