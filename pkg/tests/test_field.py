import numpy as np
import pytest

from heisenfourier.field import OperatorField, TGrid, load_field, save_field, zero_field

RNG = np.random.default_rng(77)


def test_tgrid_lattice_layout():
    tg = TGrid(0.125, 4)
    assert tg.ks == (-4, -3, -2, -1, 1, 2, 3, 4)
    assert tg.n_nodes == 8
    assert np.allclose(tg.nodes, np.array(tg.ks) * 0.125)
    assert 0 not in tg.ks


def test_tgrid_index_and_lattice_lookup():
    tg = TGrid(0.125, 4)
    assert tg.index_of(-4) == 0
    assert tg.index_of(1) == 4
    assert tg.index_of(0) is None
    assert tg.index_of(5) is None
    assert tg.lattice_k(0.375) == 3
    assert tg.lattice_k(-0.5) == -4
    assert tg.lattice_k(0.3) is None


def test_tgrid_validation():
    with pytest.raises(ValueError):
        TGrid(0.0, 4)
    with pytest.raises(ValueError):
        TGrid(0.125, 0)


def _random_field(tg, dim):
    mats = RNG.standard_normal((tg.n_nodes, dim, dim)) + 1j * RNG.standard_normal(
        (tg.n_nodes, dim, dim)
    )
    return OperatorField(tg, mats)


def test_field_node_access():
    tg = TGrid(0.25, 2)
    F = _random_field(tg, 3)
    assert np.array_equal(F.at_k(-2), F.mats[0])
    assert np.array_equal(F.at_k(1), F.mats[2])
    assert np.array_equal(F.at_k(0), np.zeros((3, 3)))
    assert np.array_equal(F.at_t(0.5), F.at_k(2))
    assert np.array_equal(F.at_t(0.3), np.zeros((3, 3)))


def test_field_shape_checks():
    tg = TGrid(0.25, 2)
    with pytest.raises(ValueError):
        OperatorField(tg, np.zeros((3, 2, 2)))
    with pytest.raises(ValueError):
        OperatorField(tg, np.zeros((4, 2, 3)))
    bad = np.zeros((4, 2, 2))
    bad[0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        OperatorField(tg, bad)


def test_field_arithmetic_requires_same_lattice():
    F = _random_field(TGrid(0.25, 2), 3)
    G = _random_field(TGrid(0.25, 2), 3)
    H = _random_field(TGrid(0.125, 2), 3)
    total = F + G
    assert np.array_equal(total.mats, F.mats + G.mats)
    diff = F - G
    assert np.array_equal(diff.mats, F.mats - G.mats)
    scaled = F.scaled(2j)
    assert np.array_equal(scaled.mats, 2j * F.mats)
    with pytest.raises(ValueError):
        F + H


def test_zero_field():
    Z = zero_field(TGrid(0.5, 3), 4)
    assert Z.mats.shape == (6, 4, 4)
    assert np.all(Z.mats == 0)


def test_save_load_roundtrip_is_exact(tmp_path):
    tg = TGrid(0.125, 3)
    F = _random_field(tg, 5)
    save_field(F, tmp_path / "field")
    back = load_field(tmp_path / "field")
    assert back.tgrid == tg
    assert np.array_equal(back.mats, F.mats)
