from enum import Enum
from typing import Annotated, Any

from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import DEFAULT_TOL, DEFAULT_TRUNC_LEN, OUTPUT_DIR


class WeightKind(str, Enum):
    HARDY = "Hardy"
    """β_n = 1."""
    BERGMAN = "Bergman"
    """β_n = 1/√(n+1)."""
    DIRICHLET = "Dirichlet"
    """β_n = √(n+1)."""
    CUSTOM = "Custom"
    """Explicit β list, extended geometrically past the stored range."""


class OperatorTag(str, Enum):
    MZ = "Mz"
    L = "L"
    RESTRICTION = "RestrictionMatrix"


class SubspaceMode(str, Enum):
    EXACT_SPAN = "ExactSpan"
    ORBIT_CLOSURE = "OrbitClosure"


class Command(str, Enum):
    SPACE = "space"
    CONTINUE = "continue"
    SCAN = "scan"
    SUBSPACE = "subspace"
    CHECK = "check"


class Suite(str, Enum):
    ALL = "all"
    AXIOMS = "axioms"
    SOT = "sot"
    CD = "cd"
    DENSITY = "density"
    SOLVABILITY = "solvability"
    RECIPROCAL = "reciprocal"
    BLOWUP = "blowup"


ComplexPair = Annotated[list[float], Field(min_length=2, max_length=2)]
"""A complex number written as ``[re, im]``."""


def pair(value: complex) -> list[float]:
    """Convert a complex number into its ``[re, im]`` form."""
    value = complex(value)
    return [value.real, value.imag]


def unpair(value: list[float]) -> complex:
    """Convert an ``[re, im]`` pair into a complex number."""
    return complex(value[0], value[1])


class SpaceDescriptor(BaseModel):
    kind: WeightKind
    beta: list[float] | None = None
    d: int = Field(default=1, ge=1)
    N: int = Field(default=DEFAULT_TRUNC_LEN, ge=1)
    tol: float = Field(default=DEFAULT_TOL, gt=0)

    @model_validator(mode="after")
    def check_custom_beta(self) -> "SpaceDescriptor":
        if self.kind == WeightKind.CUSTOM and not self.beta:
            raise ValueError("Custom weights require an explicit beta list")
        return self


class FunctionDescriptor(BaseModel):
    fiber_dim: int = Field(default=1, ge=1)
    coeffs: list[list[ComplexPair]] | list[ComplexPair] | None = None
    """Taylor coefficients per degree; per degree a list of ``fiber_dim`` pairs."""
    szego: ComplexPair | None = None
    """Shortcut for the kernel k_a(z) = 1/(1 - az)."""
    fiber: list[ComplexPair] | None = None
    """Fiber vector multiplying the kernel, defaults to the first unit vector."""
    tail_bound: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def check_source(self) -> "FunctionDescriptor":
        if (self.coeffs is None) == (self.szego is None):
            raise ValueError("Exactly one of 'coeffs' and 'szego' must be given")
        if self.fiber is not None and len(self.fiber) != self.fiber_dim:
            raise ValueError("'fiber' length must equal fiber_dim")
        return self


class SubspaceDescriptor(BaseModel):
    generators: list[FunctionDescriptor] = Field(min_length=1)
    mode: SubspaceMode = SubspaceMode.EXACT_SPAN
    orbit_depth: int | None = Field(default=None, ge=1)
    tolerance: float | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def check_orbit_depth(self) -> "SubspaceDescriptor":
        if self.mode == SubspaceMode.ORBIT_CLOSURE and self.orbit_depth is None:
            raise ValueError("OrbitClosure mode requires 'orbit_depth'")
        return self


class GridSpec(BaseModel):
    center: ComplexPair = Field(default_factory=lambda: [0.0, 0.0])
    radius: float = Field(default=1.5, ge=0)
    resolution: int = Field(default=64, ge=8)


class ContinuationRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    lambda_: ComplexPair = Field(alias="lambda")
    value: list[ComplexPair] | None = None
    residual: float | None = None
    in_paper_domain: bool | None = None
    error: str | None = None


class RunConfig(BaseModel):
    command: Command
    space: str | None = None
    f: str | None = None
    subspace: str | None = None
    lambdas: list[ComplexPair] = Field(default_factory=list)
    grid: GridSpec | None = None
    operator: OperatorTag = OperatorTag.L
    suite: Suite = Suite.ALL
    out: str = OUTPUT_DIR
    seed: int | None = None
    N: int | None = Field(default=None, ge=1)
    tol: float | None = Field(default=None, gt=0)
    resolution: int | None = Field(default=None, ge=8)

    def echo(self, space: dict[str, Any] | None = None) -> dict[str, Any]:
        """
        Effective configuration embedded into every output file.

        ``space`` holds the resolved model parameters; its N and tol replace the raw overrides.
        """
        effective = self.model_dump(mode="json")
        if space is not None:
            effective.update(N=space["N"], tol=space["tol"], space=space)
        return effective
