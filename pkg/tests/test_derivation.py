import math

import numpy as np
import pytest

from heisenfourier.derivation import (
    BOUNDARY_TOL,
    boundedness_check,
    d_z,
    leibniz_defect,
    module_norm_check,
    multiplier_defect,
)
from heisenfourier.field import TGrid
from heisenfourier.grid import GridSpec1D
from heisenfourier.group import GaussianPoly, Poly3, SampledFunction3D, sample_family

F_ODD = GaussianPoly(Poly3({(0, 0, 1): 1.0}), (0.6, 0.6, 0.5))
G_PARTNER = GaussianPoly(Poly3({(0, 0, 2): 0.5, (0, 0, 0): 0.2}), (0.55, 0.7, 0.65))
H_OFFCENTER = GaussianPoly(
    Poly3({(1, 0, 0): 0.4, (0, 0, 0): 1.0}), (0.7, 0.65, 0.6), (0.2, -0.3, 0.15)
)
BOX = (5.0, 5.0, 4.0)
COUNTS = (40, 40, 32)
GRID = GridSpec1D(32, 3.2)
TG = TGrid(0.25, 8)


def test_dz_prefers_the_analytic_path():
    f = sample_family(F_ODD, BOX, COUNTS)
    df = d_z(f)
    assert df.dz_method == "analytic"
    assert df.family is not None
    want = (1j / (2 * math.pi)) * f.dz_samples
    assert np.array_equal(df.samples, want)


def test_dz_spectral_fallback_agrees_with_analytic():
    f = sample_family(F_ODD, BOX, COUNTS)
    plain = SampledFunction3D(f.box, f.counts, f.samples.copy())
    spectral = d_z(plain)
    assert spectral.dz_method == "spectral"
    assert np.max(np.abs(spectral.samples - d_z(f).samples)) < 1e-6


def test_dz_spectral_handles_modulated_functions():
    fam = GaussianPoly(Poly3.const(1.0), (0.6, 0.6, 0.7), z_freq=-1.0)
    f = sample_family(fam, BOX, (40, 40, 40))
    plain = SampledFunction3D(f.box, f.counts, f.samples.copy())
    assert np.max(np.abs(d_z(f).samples - d_z(plain).samples)) < 1e-6


def test_dz_is_linear_and_homogeneous():
    f = sample_family(F_ODD, BOX, COUNTS)
    g = sample_family(G_PARTNER, BOX, COUNTS)
    combo = SampledFunction3D(BOX, COUNTS, 2.0 * f.samples - 1.5j * g.samples)
    lhs = d_z(combo).samples
    plain_f = SampledFunction3D(BOX, COUNTS, f.samples.copy())
    plain_g = SampledFunction3D(BOX, COUNTS, g.samples.copy())
    rhs = 2.0 * d_z(plain_f).samples - 1.5j * d_z(plain_g).samples
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_dz_rejects_tiny_z_grids():
    f = SampledFunction3D((1.0, 1.0, 1.0), (8, 8, 6), np.zeros((8, 8, 6)))
    with pytest.raises(ValueError):
        d_z(f)


def test_multiplier_defect_zero_function():
    f = SampledFunction3D((1.0, 1.0, 1.0), (8, 8, 8), np.zeros((8, 8, 8)))
    assert multiplier_defect(f, TGrid(0.5, 2), GridSpec1D(8, 2.0)) == 0.0


def test_multiplier_defect_small_for_compact_functions():
    f = sample_family(F_ODD, BOX, COUNTS)
    assert f.boundary_max() < BOUNDARY_TOL
    assert multiplier_defect(f, TG, GRID) < 1e-6


def test_multiplier_defect_warns_on_boundary_mass():
    f = sample_family(F_ODD, (1.5, 1.5, 1.0), (10, 10, 8))
    with pytest.warns(UserWarning):
        multiplier_defect(f, TGrid(0.5, 2), GridSpec1D(8, 2.0))


def test_leibniz_identity_on_the_closed_form_family():
    f = sample_family(F_ODD, BOX, COUNTS)
    g = sample_family(G_PARTNER, BOX, COUNTS)
    assert leibniz_defect(f, g) < 1e-12
    # f twice: d(f^2) = 2 f df
    assert leibniz_defect(f, f) < 1e-12


def test_leibniz_requires_closed_form_products():
    f = sample_family(F_ODD, BOX, COUNTS)
    h = sample_family(H_OFFCENTER, BOX, COUNTS)
    with pytest.raises(ValueError):
        leibniz_defect(f, h)
    g = sample_family(G_PARTNER, BOX, (40, 40, 30))
    with pytest.raises(ValueError):
        leibniz_defect(f, g)


def test_boundedness_chain():
    f = sample_family(F_ODD, BOX, COUNTS)
    res = boundedness_check(f, TG, GRID)
    assert res.passed
    assert res.lhs <= res.rhs + 1e-9
    # the node-wise chain can only be violated by quadrature error
    assert res.node_gap <= 1e-6


def test_module_inequality_and_zero_special_case():
    f = sample_family(F_ODD, BOX, COUNTS)
    h = sample_family(H_OFFCENTER, BOX, COUNTS)
    res = module_norm_check(f, h, TG, GRID)
    assert res.passed
    assert res.rel_excess == 0.0
    zero = SampledFunction3D(BOX, COUNTS, np.zeros(COUNTS))
    res0 = module_norm_check(zero, zero, TG, GRID)
    assert res0.passed and res0.lhs == 0.0 and res0.rhs == 0.0


def test_module_inequality_requires_matching_grids():
    f = sample_family(F_ODD, BOX, COUNTS)
    h = sample_family(H_OFFCENTER, BOX, (40, 40, 30))
    with pytest.raises(ValueError):
        module_norm_check(f, h, TG, GRID)
