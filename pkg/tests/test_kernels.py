import numpy as np
import pytest

from icbounds.core import V_MIN, ChannelParams, PowerAllocation
from icbounds.optimizer import NM_FATOL, NM_XATOL, _instance, _random_starts, _steps

numba = pytest.importorskip("numba")

from icbounds.kernels import _numba, _numpy  # noqa: E402


def _case(P, c, P0, n, stream):
    ch = ChannelParams(P, c)
    inst = _instance(ch, PowerAllocation.symmetric(ch, P0))
    starts = _random_starts(inst, n, 0, stream)
    return starts, np.repeat(inst[None, :], n, axis=0)


@pytest.mark.parametrize("P, c, P0", [(10.0, 0.1, 0.0), (3.0, 0.4, 1.0), (40.0, 0.05, 10.0)])
def test_objective_agrees(P, c, P0):
    starts, insts = _case(P, c, P0, 64, 1)
    args = [starts[:, k] for k in range(4)] + [insts[:, k] for k in range(6)]
    ref = _numpy.genie_objective(*args, V_MIN)
    got = np.array([_numba.genie_objective(*(a[i] for a in args), V_MIN) for i in range(len(starts))])
    np.testing.assert_allclose(got, ref, rtol=1e-14)


@pytest.mark.parametrize("P, c, P0", [(10.0, 0.1, 0.0), (3.0, 0.4, 1.0)])
def test_nelder_mead_agrees(P, c, P0):
    starts, insts = _case(P, c, P0, 16, 2)
    xa, fa, _ = _numpy.nelder_mead_batch(starts, _steps(starts), insts, V_MIN, 500, NM_FATOL, NM_XATOL)
    xb, fb, _ = _numba.nelder_mead_batch(starts, _steps(starts), insts, V_MIN, 500, NM_FATOL, NM_XATOL)
    np.testing.assert_allclose(fa, fb, rtol=1e-12)
    assert fa.min() == pytest.approx(fb.min(), rel=1e-13)


def test_grid_agrees():
    ch = ChannelParams(10.0, 0.1)
    inst = _instance(ch, PowerAllocation.symmetric(ch, 0.0))
    axis = np.arange(17) / 16
    a = _numpy.grid_search(axis, axis, inst, V_MIN)
    b = _numba.grid_search(axis, axis, inst, V_MIN)
    assert a[0] == pytest.approx(b[0], rel=1e-14)
    assert tuple(a[1:]) == tuple(b[1:])
