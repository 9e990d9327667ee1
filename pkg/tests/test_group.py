import math

import numpy as np
import pytest

from heisenfourier.group import (
    GaussianPoly,
    GroupElement,
    IDENTITY,
    Poly3,
    box_axes,
    check_map,
    inv,
    load_sampled,
    mul,
    named_prefactor,
    sample_family,
    save_sampled,
    SampledFunction3D,
)

RNG = np.random.default_rng(402)


def test_mul_known_value():
    g = mul(GroupElement(1.0, 2.0, 0.0), GroupElement(3.0, -1.0, 0.5))
    assert g == GroupElement(4.0, 1.0, -3.0)


def test_inverse_is_exact_for_arbitrary_floats():
    for _ in range(50):
        g = GroupElement(*RNG.standard_normal(3))
        assert mul(g, inv(g)) == IDENTITY
        assert mul(inv(g), g) == IDENTITY


def test_associativity_exact_on_dyadics():
    raw = RNG.integers(-64, 64, size=(30, 3), endpoint=True) / 64.0
    els = [GroupElement(*map(float, row)) for row in raw]
    for i in range(0, 30, 3):
        g1, g2, g3 = els[i : i + 3]
        assert mul(mul(g1, g2), g3) == mul(g1, mul(g2, g3))


def test_center_commutes_exactly():
    g = GroupElement(0.3, -1.7, 0.9)
    z = GroupElement(0.0, 0.0, 2.31)
    assert mul(g, z) == mul(z, g)


def test_poly_arithmetic():
    p = Poly3({(1, 0, 0): 2.0, (0, 0, 1): 1.0})
    q = Poly3({(0, 1, 0): 1.0})
    prod = p * q
    assert prod.coeffs == {(1, 1, 0): 2.0, (0, 1, 1): 1.0}
    s = p + p
    assert s.coeffs == {(1, 0, 0): 4.0, (0, 0, 1): 2.0}
    assert p.dz().coeffs == {(0, 0, 0): 1.0}
    assert Poly3({(0, 0, 2): 3.0}).dz().coeffs == {(0, 0, 1): 6.0}


def test_poly_reflect_flips_odd_monomials():
    p = Poly3({(1, 0, 0): 1.0, (0, 0, 2): 1.0, (1, 1, 1): 2.0})
    r = p.reflect()
    assert r.coeffs == {(1, 0, 0): -1.0, (0, 0, 2): 1.0, (1, 1, 1): -2.0}


def test_poly_coefficients_stay_real_when_possible():
    p = Poly3({(0, 0, 0): complex(2.0, 0.0)})
    assert isinstance(p.coeffs[(0, 0, 0)], float)
    q = Poly3({(0, 0, 0): 1j})
    assert isinstance(q.coeffs[(0, 0, 0)], complex)
    xs = np.array([0.5])
    assert p.eval_grid(xs, xs, xs).dtype == float
    assert q.eval_grid(xs, xs, xs).dtype == complex


def test_poly_drops_zero_coefficients():
    assert Poly3({(1, 0, 0): 0.0}).coeffs == {}


def test_named_prefactors():
    assert named_prefactor("z", 0.5).coeffs == {(0, 0, 1): 1.0}
    h2 = named_prefactor("hermite2", 0.5)
    assert h2.coeffs == {(0, 0, 2): 1.0, (0, 0, 0): -0.25}
    with pytest.raises(ValueError):
        named_prefactor("cubic", 0.5)


def test_gaussian_eval_matches_direct_formula():
    fam = GaussianPoly(
        Poly3({(1, 0, 1): 0.5, (0, 0, 0): 1.0}),
        (0.7, 1.1, 0.5),
        center=(0.2, -0.1, 0.3),
    )
    xs = np.array([-0.4, 0.9])
    ys = np.array([0.1])
    zs = np.array([0.5, -1.2])
    got = fam.eval_grid(xs, ys, zs)
    for i, x in enumerate(xs):
        for k, z in enumerate(zs):
            want = (0.5 * x * z + 1.0) * math.exp(
                -((x - 0.2) ** 2) / (2 * 0.49)
                - (0.1 + 0.1) ** 2 / (2 * 1.21)
                - ((z - 0.3) ** 2) / (2 * 0.25)
            )
            assert abs(got[i, 0, k] - want) < 1e-14


def test_gaussian_modulation_factor():
    fam = GaussianPoly(Poly3.const(1.0), (1.0, 1.0, 1.0), z_freq=0.75)
    plain = GaussianPoly(Poly3.const(1.0), (1.0, 1.0, 1.0))
    xs = np.array([0.0])
    zs = np.array([0.4, -0.9])
    got = fam.eval_grid(xs, xs, zs)
    want = plain.eval_grid(xs, xs, zs) * np.exp(-2j * np.pi * 0.75 * zs)
    assert np.max(np.abs(got - want)) < 1e-15


def test_gaussian_dz_matches_finite_differences():
    for fam in (
        GaussianPoly(Poly3({(0, 0, 1): 1.0, (2, 0, 0): 0.3}), (0.7, 1.0, 0.5)),
        GaussianPoly(Poly3.const(1.0), (0.6, 0.6, 0.7), z_freq=-1.0),
    ):
        xs = np.array([0.3])
        ys = np.array([-0.2])
        h = 1e-5
        for z in (0.15, -0.8):
            up = fam.eval_grid(xs, ys, np.array([z + h]))[0, 0, 0]
            dn = fam.eval_grid(xs, ys, np.array([z - h]))[0, 0, 0]
            want = (up - dn) / (2 * h)
            got = fam.dz_eval_grid(xs, ys, np.array([z]))[0, 0, 0]
            assert abs(got - want) < 1e-8


def test_gaussian_product_combines_widths_and_freqs():
    f1 = GaussianPoly(Poly3({(0, 0, 1): 1.0}), (0.5, 0.8, 1.6), z_freq=0.45)
    f2 = GaussianPoly(Poly3.const(2.0), (0.55, 0.75, 1.6), z_freq=0.38)
    prod = f1 * f2
    assert prod.z_freq == pytest.approx(0.83)
    want_sx = 1.0 / math.sqrt(1 / 0.25 + 1 / 0.3025)
    assert prod.sigma[0] == pytest.approx(want_sx)
    xs = np.array([0.2])
    zs = np.array([0.6])
    lhs = prod.eval_grid(xs, xs, zs)
    rhs = f1.eval_grid(xs, xs, zs) * f2.eval_grid(xs, xs, zs)
    assert np.max(np.abs(lhs - rhs)) < 1e-15


def test_gaussian_product_requires_shared_center():
    f1 = GaussianPoly(Poly3.const(1.0), (1.0, 1.0, 1.0))
    f2 = GaussianPoly(Poly3.const(1.0), (1.0, 1.0, 1.0), center=(0.1, 0.0, 0.0))
    with pytest.raises(ValueError):
        f1 * f2


def test_gaussian_reflect():
    fam = GaussianPoly(
        Poly3({(0, 0, 1): 1.0}), (0.7, 1.0, 0.5), center=(0.2, 0.0, -0.1), z_freq=0.4
    )
    r = fam.reflect()
    assert r.center == (-0.2, 0.0, 0.1)
    assert r.z_freq == -0.4
    xs = np.array([0.31])
    ys = np.array([-0.6])
    zs = np.array([0.12])
    lhs = r.eval_grid(xs, ys, zs)[0, 0, 0]
    rhs = fam.eval_grid(-xs, -ys, -zs)[0, 0, 0]
    assert abs(lhs - rhs) < 1e-15


def test_gaussian_rejects_bad_widths():
    with pytest.raises(ValueError):
        GaussianPoly(Poly3.const(1.0), (0.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        GaussianPoly(Poly3.const(1.0), (1.0, 1.0, 1.0), z_freq=math.inf)


def test_box_axes_symmetric_under_negation():
    xs, ys, zs = box_axes((2.0, 1.0, 1.5), (8, 4, 6))
    for ax in (xs, ys, zs):
        assert np.max(np.abs(ax + ax[::-1])) == 0.0
    with pytest.raises(ValueError):
        box_axes((2.0, 1.0, 1.5), (7, 4, 6))
    with pytest.raises(ValueError):
        box_axes((2.0, -1.0, 1.5), (8, 4, 6))


def test_sampled_shape_validation():
    with pytest.raises(ValueError):
        SampledFunction3D((1.0, 1.0, 1.0), (4, 4, 4), np.zeros((4, 4, 2)))
    with pytest.raises(ValueError):
        SampledFunction3D((1.0, 1.0, 1.0), (2, 2, 2), np.full((2, 2, 2), np.inf))


def test_product_keeps_family_only_for_shared_centers():
    box = (2.0, 2.0, 2.0)
    counts = (8, 8, 8)
    f = sample_family(GaussianPoly(Poly3.const(1.0), (0.5, 0.5, 0.5)), box, counts)
    g = sample_family(
        GaussianPoly(Poly3({(0, 0, 1): 1.0}), (0.6, 0.5, 0.7)), box, counts
    )
    prod = f * g
    assert prod.family is not None
    assert prod.dz_samples is not None
    assert np.max(np.abs(prod.samples - f.samples * g.samples)) == 0.0
    h = sample_family(
        GaussianPoly(Poly3.const(1.0), (0.5, 0.5, 0.5), center=(0.3, 0.0, 0.0)),
        box,
        counts,
    )
    mixed = f * h
    assert mixed.family is None
    assert mixed.dz_samples is None


def test_product_requires_matching_grids():
    f = sample_family(GaussianPoly(Poly3.const(1.0), (0.5, 0.5, 0.5)), (2.0, 2.0, 2.0), (8, 8, 8))
    g = sample_family(GaussianPoly(Poly3.const(1.0), (0.5, 0.5, 0.5)), (2.0, 2.0, 2.0), (8, 8, 6))
    with pytest.raises(ValueError):
        f * g


def test_l2_norm_matches_quadrature():
    fam = GaussianPoly(Poly3.const(1.0), (0.4, 0.4, 0.4))
    f = sample_family(fam, (2.4, 2.4, 2.4), (24, 24, 24))
    # separable Gaussian: ||f||^2 = prod_a sigma_a sqrt(pi)
    want = (0.4 * math.sqrt(math.pi)) ** 3
    assert abs(f.l2_norm_sq() - want) / want < 1e-10


def test_check_map_is_an_exact_involution():
    fam = GaussianPoly(
        Poly3({(1, 0, 1): 0.7, (0, 0, 0): 0.1}), (0.8, 0.55, 0.45), (0.3, -0.4, 0.1)
    )
    f = sample_family(fam, (2.0, 2.0, 1.5), (8, 10, 6))
    back = check_map(check_map(f))
    assert np.array_equal(back.samples, f.samples)
    assert np.array_equal(back.dz_samples, f.dz_samples)


def test_check_map_evaluates_at_inverse():
    fam = GaussianPoly(Poly3({(0, 0, 1): 1.0}), (0.7, 1.0, 0.5), (0.2, 0.1, -0.3))
    f = sample_family(fam, (2.0, 2.0, 1.5), (8, 8, 6))
    fc = check_map(f)
    xs, ys, zs = f.axes
    want = fam.eval_grid(-xs, -ys, -zs)
    assert np.max(np.abs(fc.samples - want)) < 1e-15
    # reflected family agrees with reflected samples on the same axes
    assert fc.family is not None
    regen = fc.family.eval_grid(xs, ys, zs)
    assert np.max(np.abs(fc.samples - regen)) < 1e-15


def test_boundary_max_sees_all_faces():
    samples = np.zeros((4, 4, 4))
    samples[3, 1, 2] = 7.0
    f = SampledFunction3D((1.0, 1.0, 1.0), (4, 4, 4), samples)
    assert f.boundary_max() == 7.0


def test_save_load_roundtrip(tmp_path):
    fam = GaussianPoly(Poly3({(0, 0, 1): 1.0}), (0.7, 1.0, 0.5))
    f = sample_family(fam, (1.5, 1.0, 1.0), (6, 4, 4))
    path = tmp_path / "f.dat"
    save_sampled(f, path)
    back = load_sampled(path)
    assert back.box == f.box
    assert back.counts == f.counts
    assert np.array_equal(back.samples, f.samples)


def test_load_rejects_malformed_files(tmp_path):
    path = tmp_path / "bad.dat"
    path.write_text("")
    with pytest.raises(ValueError):
        load_sampled(path)
    path.write_text("box 1.0 1.0 1.0\ncounts 2 2 2\n0.0 0.0\n")
    with pytest.raises(ValueError):
        load_sampled(path)
