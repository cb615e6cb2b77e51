from .common import (
    Command,
    ComplexPair,
    ContinuationRecord,
    FunctionDescriptor,
    GridSpec,
    OperatorTag,
    RunConfig,
    SpaceDescriptor,
    SubspaceDescriptor,
    SubspaceMode,
    Suite,
    WeightKind,
    pair,
    unpair,
)

__all__ = [
    "Command",
    "ComplexPair",
    "ContinuationRecord",
    "FunctionDescriptor",
    "GridSpec",
    "OperatorTag",
    "RunConfig",
    "SpaceDescriptor",
    "SubspaceDescriptor",
    "SubspaceMode",
    "Suite",
    "WeightKind",
    "pair",
    "unpair",
]
