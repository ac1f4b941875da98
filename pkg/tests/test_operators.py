import numpy as np
import pytest

from abcs.operators import SensingOperator
from abcs.pixelio import BlockGrid
from abcs.recon import decode_idct
from abcs.sensing import SensingConfig, sense


def mixed_operator(rng, block, rows=3, cols=2):
    grid = BlockGrid(block, rows, cols)
    counts = rng.integers(0, block * block + 1, size=grid.n_blocks)
    counts[0], counts[-1] = 0, block * block
    return SensingOperator(grid, counts)


@pytest.mark.parametrize("block", [8, 16, 32])
def test_adjoint_and_orthonormal_rows(rng, block):
    for _ in range(100):
        op = mixed_operator(rng, block)
        x = rng.normal(size=op.grid.shape)
        y = rng.normal(size=op.m)
        lhs, rhs = np.dot(op.forward(x), y), np.vdot(x, op.adjoint(y))
        assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))
        assert np.linalg.norm(op.forward(op.adjoint(y)) - y) <= 1e-9 * np.linalg.norm(y)


def test_full_counts_is_orthonormal(rng):
    op = SensingOperator(BlockGrid(8, 2, 2), np.full(4, 64))
    x = rng.normal(size=(16, 16))
    np.testing.assert_allclose(op.adjoint(op.forward(x)), x, atol=1e-12)
    assert np.linalg.norm(op.forward(x)) == pytest.approx(np.linalg.norm(x))


def test_forward_reproduces_payload(cameraman):
    ms = sense(cameraman, SensingConfig(0.1, "dd", 32))
    op = SensingOperator.from_measurements(ms)
    np.testing.assert_array_equal(op.forward(cameraman), ms.payload)
    np.testing.assert_array_equal(op.adjoint(ms.payload), decode_idct(ms))
    assert op.shape == (ms.counts.sum(), 65536)
    assert op.delta == pytest.approx(ms.counts.sum() / 65536)


def test_zero_in_zero_out(rng):
    op = mixed_operator(rng, 8)
    assert not op.forward(np.zeros(op.grid.shape)).any()


def test_shape_errors(rng):
    op = mixed_operator(rng, 8)
    with pytest.raises(ValueError):
        op.forward(np.zeros((8, 8)))
    with pytest.raises(ValueError):
        op.adjoint(np.zeros(op.m + 1))
    with pytest.raises(ValueError):
        SensingOperator(BlockGrid(8, 1, 1), np.array([65]))


def test_mask_immutable(rng):
    op = mixed_operator(rng, 8)
    with pytest.raises(ValueError):
        op._mask[0, 0] = True
