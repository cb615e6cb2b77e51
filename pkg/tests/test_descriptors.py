import numpy as np
import pytest
from pydantic import ValidationError

from errors import DescriptorError
from models import (
    FunctionDescriptor,
    SpaceDescriptor,
    SubspaceDescriptor,
    SubspaceMode,
    WeightKind,
)
from modules.coeffspace import make_space, szego_kernel
from modules.descriptors import (
    function_from_descriptor,
    load_space,
    load_subspace,
    space_from_descriptor,
)


def test_space_descriptor_validation():
    with pytest.raises(ValidationError):
        SpaceDescriptor(kind=WeightKind.CUSTOM)
    with pytest.raises(ValidationError):
        SpaceDescriptor(kind=WeightKind.HARDY, d=0)
    descriptor = SpaceDescriptor.model_validate({"kind": "Bergman", "N": 32})
    model = space_from_descriptor(descriptor, tol=1e-8)
    assert model.kind == WeightKind.BERGMAN
    assert model.trunc_len == 32
    assert model.tol == 1e-8


def test_default_space():
    model = load_space(None, N=16)
    assert model.kind == WeightKind.HARDY
    assert model.trunc_len == 16


def test_function_descriptor_validation():
    with pytest.raises(ValidationError):
        FunctionDescriptor()
    with pytest.raises(ValidationError):
        FunctionDescriptor(coeffs=[[1, 0]], szego=[0.5, 0])
    with pytest.raises(ValidationError):
        FunctionDescriptor(szego=[0.5, 0], fiber=[[1, 0], [0, 0]])
    with pytest.raises(ValidationError):
        SubspaceDescriptor(generators=[{"szego": [0.5, 0]}], mode=SubspaceMode.ORBIT_CLOSURE)


def test_scalar_and_vector_coefficients():
    model = make_space(WeightKind.HARDY, N=16)
    f = function_from_descriptor(model, FunctionDescriptor(coeffs=[[1, 0], [0, 2]]))
    np.testing.assert_array_equal(f.coeffs[:3, 0], [1, 2j, 0])

    vector_model = make_space(WeightKind.HARDY, d=2, N=16)
    descriptor = FunctionDescriptor(fiber_dim=2, coeffs=[[[1, 0], [0, 0]], [[0, 0], [3, 0]]])
    g = function_from_descriptor(vector_model, descriptor)
    np.testing.assert_array_equal(g.coeffs[:2], [[1, 0], [0, 3]])


def test_kernel_descriptors():
    model = make_space(WeightKind.HARDY, d=2, N=16)
    descriptor = FunctionDescriptor(
        fiber_dim=2, szego=[0.5, 0], fiber=[[0, 0], [1, 0]], tail_bound=1e-3
    )
    f = function_from_descriptor(model, descriptor)
    kernel = szego_kernel(model, 0.5, [0, 1])
    np.testing.assert_array_equal(f.coeffs, kernel.coeffs)
    assert f.tail_bound == pytest.approx(kernel.tail_bound + 1e-3)


def test_descriptor_mismatches():
    model = make_space(WeightKind.HARDY, N=8)
    with pytest.raises(DescriptorError):
        function_from_descriptor(model, FunctionDescriptor(fiber_dim=2, szego=[0.5, 0]))
    with pytest.raises(DescriptorError):
        function_from_descriptor(model, FunctionDescriptor(coeffs=[[1, 0]] * 10))
    vector_model = make_space(WeightKind.HARDY, d=2, N=8)
    with pytest.raises(DescriptorError):
        function_from_descriptor(
            vector_model, FunctionDescriptor(fiber_dim=2, coeffs=[[[1, 0], [0, 0], [0, 0]]])
        )


def test_load_orbit_subspace(tmp_path):
    path = tmp_path / "sub.json"
    path.write_text(
        '{"generators": [{"coeffs": [[0, 0], [0, 0], [1, 0]]}],'
        ' "mode": "OrbitClosure", "orbit_depth": 3}'
    )
    sub = load_subspace(str(path), make_space(WeightKind.HARDY, N=16))
    assert sub.dim == 3
    assert sub.mode == SubspaceMode.ORBIT_CLOSURE
