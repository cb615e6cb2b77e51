"""Turn JSON descriptors into space models, functions and subspaces."""

import json
import typing

import numpy as np
from loguru import logger
from pydantic import BaseModel

from config import DEFAULT_TRUNC_LEN
from errors import DescriptorError
from models import (
    FunctionDescriptor,
    SpaceDescriptor,
    SubspaceDescriptor,
    WeightKind,
    unpair,
)
from modules.coeffspace import CoeffFunction, SpaceModel, make_space, szego_kernel
from modules.subspaces import InvariantSubspace, build_subspace

Descriptor = typing.TypeVar("Descriptor", bound=BaseModel)


def read_descriptor(path: str, schema: type[Descriptor]) -> Descriptor:
    """Parse a JSON file against a descriptor schema."""
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    logger.debug(f"Loaded {schema.__name__} from {path}")
    return schema.model_validate(payload)


def space_from_descriptor(
    descriptor: SpaceDescriptor, N: int | None = None, tol: float | None = None
) -> SpaceModel:
    """Build the model; explicit overrides win over descriptor values."""
    return make_space(
        descriptor.kind,
        d=descriptor.d,
        N=descriptor.N if N is None else N,
        tol=descriptor.tol if tol is None else tol,
        beta=descriptor.beta,
    )


def load_space(path: str | None, N: int | None = None, tol: float | None = None) -> SpaceModel:
    """The space described at ``path``, or the scalar Hardy space."""
    if path is None:
        descriptor = SpaceDescriptor(kind=WeightKind.HARDY, N=N or DEFAULT_TRUNC_LEN)
    else:
        descriptor = read_descriptor(path, SpaceDescriptor)
    return space_from_descriptor(descriptor, N, tol)


def function_from_descriptor(model: SpaceModel, descriptor: FunctionDescriptor) -> CoeffFunction:
    if descriptor.fiber_dim != model.fiber_dim:
        raise DescriptorError(
            f"Function has fiber dimension {descriptor.fiber_dim}, the space has {model.fiber_dim}."
        )
    fiber = None
    if descriptor.fiber is not None:
        fiber = np.array([unpair(p) for p in descriptor.fiber])

    if descriptor.szego is not None:
        kernel = szego_kernel(model, unpair(descriptor.szego), fiber)
        return CoeffFunction(kernel.coeffs, kernel.tail_bound + descriptor.tail_bound)

    rows = typing.cast(list, descriptor.coeffs)
    if len(rows) > model.trunc_len + 1:
        raise DescriptorError(
            f"{len(rows)} coefficients do not fit the truncation N = {model.trunc_len}."
        )
    coeffs = np.zeros((model.trunc_len + 1, model.fiber_dim), dtype=complex)
    for n, row in enumerate(rows):
        # scalar coefficients are bare pairs, vector ones are lists of pairs
        entries = [row] if isinstance(row[0], int | float) else row
        if len(entries) != model.fiber_dim:
            raise DescriptorError(
                f"Coefficient {n} has {len(entries)} components, expected {model.fiber_dim}."
            )
        coeffs[n] = [unpair(p) for p in entries]
    return CoeffFunction(coeffs, descriptor.tail_bound)


def load_function(path: str, model: SpaceModel) -> CoeffFunction:
    return function_from_descriptor(model, read_descriptor(path, FunctionDescriptor))


def load_subspace(path: str, model: SpaceModel) -> InvariantSubspace:
    descriptor = read_descriptor(path, SubspaceDescriptor)
    generators = [function_from_descriptor(model, g) for g in descriptor.generators]
    return build_subspace(
        model,
        generators,
        mode=descriptor.mode,
        orbit_depth=descriptor.orbit_depth,
        tolerance=descriptor.tolerance,
    )
