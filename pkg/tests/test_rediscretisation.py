import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from conftest import uniform_grid
from stmg.assembly import assemble_system
from stmg.materials import ALUMINIUM_EPOXY as AL, simp_eval
from stmg.mesh import CoarseningDirection, SpaceTimeGrid, coarsen_grid
from stmg.rediscretisation import (
    ALL_METHODS,
    ReassemblyMethod,
    RediscretisationMethod,
    coarse_system,
    coarsen_materials,
)
from stmg.transfer import InterpolationMethod, TransferPair, build_transfer

X, T, F = CoarseningDirection.SpaceX, CoarseningDirection.TimeT, CoarseningDirection.FullST
K, D, R, P = ReassemblyMethod.K, ReassemblyMethod.D, ReassemblyMethod.R, ReassemblyMethod.P


def test_method_names():
    assert [m.name for m in ALL_METHODS] == ["CK", "CD", "CR", "CP", "BK", "BD", "BR", "BP"]
    assert RediscretisationMethod.parse("bp").unstable
    assert not RediscretisationMethod.parse("CR").unstable
    with pytest.raises(ValueError):
        RediscretisationMethod.parse("CQ")


def _grid_from(chi):
    k, c = simp_eval(np.asarray(chi, float), AL)
    return SpaceTimeGrid(0.1, 1.0, len(chi), 4, k, c)


def test_harmonic_example():
    g = SpaceTimeGrid(1.0, 1.0, 2, 2, [1.0, 3.0], [1.0, 1.0])
    k, c, _ = coarsen_materials(g, X, R)
    assert k.tolist() == [1.5] and c.tolist() == [1.0]
    k, _, _ = coarsen_materials(g, X, K)
    assert k.tolist() == [2.0]


def test_identical_children_all_agree():
    g = _grid_from([1.0, 1.0])
    for m in (K, D, R):
        k, c, _ = coarsen_materials(g, X, m, np.array([1.0, 1.0]), AL)
        assert k[0] == AL.k_con and c[0] == AL.c_con


def test_d_versus_k_on_mixed_pair():
    chi = np.array([0.0, 1.0])
    g = _grid_from(chi)
    kd, _, chi_c = coarsen_materials(g, X, D, chi, AL)
    kk, _, _ = coarsen_materials(g, X, K)
    assert chi_c.tolist() == [0.5]
    assert kd[0] == pytest.approx(AL.k_ins + 0.125 * (AL.k_con - AL.k_ins))
    assert kk[0] == pytest.approx(0.5 * (AL.k_ins + AL.k_con))


def test_d_requires_design():
    with pytest.raises(ValueError):
        coarsen_materials(_grid_from([0.2, 0.4]), X, D)


def test_time_coarsening_copies():
    chi = np.array([0.2, 0.9, 0.4, 0.1])
    g = _grid_from(chi)
    for m in ReassemblyMethod:
        k, c, chi_c = coarsen_materials(g, T, m, chi, AL)
        assert np.array_equal(k, g.k) and np.array_equal(c, g.c)


def test_fullst_uses_spatial_rule():
    chi = np.array([0.2, 0.9, 0.4, 0.1])
    g = _grid_from(chi)
    for m in ReassemblyMethod:
        a = coarsen_materials(g, F, m, chi, AL)
        b = coarsen_materials(g, X, m, chi, AL)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


@given(st.lists(st.floats(0, 1), min_size=1, max_size=16).map(lambda v: v + v[::-1]))
def test_harmonic_below_arithmetic(chi):
    chi = np.array(chi)
    g = _grid_from(chi)
    kr, _, _ = coarsen_materials(g, X, R)
    kk, _, _ = coarsen_materials(g, X, K)
    assert np.all(kr <= kk * (1 + 1e-14))
    eq = g.k[0::2] == g.k[1::2]
    assert np.allclose(kr[eq], kk[eq], rtol=1e-15)


@given(st.floats(0, 1), st.integers(1, 8))
def test_uniform_materials_all_methods_agree(v, n):
    chi = np.full(2 * n, v)
    g = _grid_from(chi)
    out = [coarsen_materials(g, X, m, chi, AL)[:2] for m in (K, D, R)]
    for k, c in out[1:]:
        assert np.allclose(k, out[0][0], rtol=1e-14) and np.allclose(c, out[0][1], rtol=1e-14)


def test_projection_with_identity():
    g = uniform_grid(N_el=4, N_t=4, k=2.0)
    sys = assemble_system(g)
    I = sp.identity(g.n_dofs, format="csr")
    pair = TransferPair(P=I, R=0.5 * I, s=0.5, direction=T)
    out = coarse_system(sys, pair, g, P)
    assert np.allclose(out.J.toarray(), 0.5 * sys.J.toarray())
    assert out.b is None


def test_rediscretised_coarse_stencil():
    g = uniform_grid(N_el=8, N_t=8, k=2.0, c=3.0)
    sys = assemble_system(g)
    for d in (X, T):
        c = coarsen_grid(g, d)
        kc, cc, _ = coarsen_materials(g, d, K)
        c = c.with_materials(kc, cc)
        out = coarse_system(sys, build_transfer(g, c, d, InterpolationMethod.Causal), c, K)
        row = out.J.toarray()[c.flatten(2, 2)]
        s = c.dx / c.dt * 3.0
        assert row[c.flatten(2, 2)] == pytest.approx(s * 2 / 3 + 2 * 2.0 / c.dx)
        assert row[c.flatten(1, 2)] == pytest.approx(-s * 2 / 3)


def test_galerkin_transpose_identity():
    g = uniform_grid(N_el=8, N_t=8, k=2.0)
    sys = assemble_system(g)
    c = coarsen_grid(g, X)
    tp = build_transfer(g, c, X, InterpolationMethod.Bilinear)
    out = coarse_system(sys, tp, c.with_materials(np.ones(4), np.ones(4)), P)
    lhs = out.J.T.toarray()
    rhs = (tp.P.T @ sys.J.T @ tp.R.T).toarray()
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-12 * np.abs(lhs).max())


def test_shape_mismatch_rejected():
    g = uniform_grid(N_el=8, N_t=8)
    sys = assemble_system(g)
    c = coarsen_grid(g, X)
    tp = build_transfer(g, c, X, InterpolationMethod.Causal)
    with pytest.raises(ValueError):
        coarse_system(sys, tp, coarsen_grid(g, T), K)
