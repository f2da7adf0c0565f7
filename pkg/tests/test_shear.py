import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from su2lat.errors import ValidationError
from su2lat.lattice import Grid3, ShellSpec, sample_ylm_state
from su2lat.shear import (LatticePermutation, ShearParams, UnsupportedAxisError, apply_permutation,
                          displacement_stats, is_bijection, round_half_away, rotation_2d, rotation_3d,
                          rotation_90, shear_2d)

THETAS = np.linspace(-math.pi / 2, math.pi / 2, 25)


def site(g, x, y, z):
    return int(g.flat(x, y, z))


def image(perm, x, y, z):
    return tuple(int(v) for v in perm.grid.unflat(perm.map[site(perm.grid, x, y, z)]))


def test_round_half_away():
    assert list(round_half_away([0.5, -0.5, 1.5, -2.5, 0.49, -0.51])) == [1, -1, 2, -3, 0, -1]


def test_shear_params_product_is_rotation():
    for th in THETAS:
        shx, shy, _ = ShearParams(th).matrices()
        R = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        assert np.allclose(shx @ shy @ shx, R, atol=1e-15)


def test_shear_zero_is_identity():
    assert shear_2d(Grid3(16), ("x", "y"), "x", 0.0).is_identity()


def test_shear_worked_example():
    g = Grid3(8)
    p = shear_2d(g, ("x", "y"), "x", 1.0)
    assert image(p, 1, 2, 5) == (7, 2, 5)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-3, 3), axis=st.sampled_from(["x", "y"]))
def test_shear_cancels(a, axis):
    g = Grid3(8)
    fwd = shear_2d(g, ("x", "y"), axis, a)
    assert is_bijection(fwd)
    assert fwd.then(shear_2d(g, ("x", "y"), axis, -a)).is_identity()


def test_non_bijection_rejected():
    g = Grid3(8)
    with pytest.raises(ValidationError):
        LatticePermutation(g, np.zeros(g.size, dtype=np.int64))


def test_rotation_2d_is_three_shears():
    g = Grid3(16)
    for th in THETAS[::3]:
        prm = ShearParams(th)
        chain = (shear_2d(g, ("x", "y"), "x", prm.a)
                 .then(shear_2d(g, ("x", "y"), "y", prm.b))
                 .then(shear_2d(g, ("x", "y"), "x", prm.a)))
        assert chain == rotation_2d(g, ("x", "y"), th)


def test_rotation_2d_zero_and_range():
    g = Grid3(16)
    assert rotation_2d(g, ("x", "y"), 0.0).is_identity()
    with pytest.raises(ValidationError):
        rotation_2d(g, ("x", "y"), math.pi / 2 + 0.01)


def test_rotation_2d_quarter_matches_exact_in_centre():
    g = Grid3(32)
    sheared = rotation_2d(g, ("x", "y"), math.pi / 2)
    exact = rotation_90(g, "z", 1)
    x, y, z = (a - g.c for a in g.coords())
    central = (np.abs(x) <= 8) & (np.abs(y) <= 8)
    assert np.array_equal(sheared.map[central], exact.map[central])


@pytest.mark.parametrize("n", [8, 16, 32])
def test_sweep_bijective_and_invertible(n):
    g = Grid3(n)
    for th in THETAS:
        for p in (rotation_2d(g, ("y", "z"), th), rotation_3d(g, "y", th)):
            assert is_bijection(p)
            assert p.then(p.inverse()).is_identity()


def test_square_region_bound_n64():
    """Both plane coordinates within n/4 of the centre; direct computation."""
    g = Grid3(64)
    x, y, _ = (a - g.c for a in g.coords())
    sel = np.flatnonzero((np.abs(x) <= 16) & (np.abs(y) <= 16))
    for th in THETAS:
        p = rotation_2d(g, ("x", "y"), th)
        ix, iy, _ = (a - g.c for a in g.unflat(p.map[sel]))
        ex = math.cos(th) * x[sel] - math.sin(th) * y[sel]
        ey = math.sin(th) * x[sel] + math.cos(th) * y[sel]
        assert np.hypot(ix - ex, iy - ey).max() <= 3


def test_displacement_pi6_n64():
    st_ = displacement_stats(rotation_3d(Grid3(64), "z", math.pi / 6), math.pi / 6, 16)
    assert st_.max <= 3 and st_.mean <= 1.0
    assert st_.max == pytest.approx(1.0172031335458285, abs=1e-12)
    assert st_.mean == pytest.approx(0.4901707430891014, abs=1e-12)
    assert sum(st_.histogram) == st_.count


@pytest.mark.parametrize("th", [0.0, math.pi / 2, -math.pi / 2, math.pi])
def test_exact_angles_have_zero_displacement(th):
    g = Grid3(32)
    assert displacement_stats(rotation_3d(g, "z", th), th, 8).max == 0.0


def test_four_quarter_turns():
    g = Grid3(16)
    for ax in "xyz":
        q = rotation_90(g, ax, 1)
        assert q.then(q).then(q).then(q).is_identity()
        assert not q.is_identity()


def test_x_quarter_turn_coordinates():
    g = Grid3(16)
    c = g.c
    # (x, y, z) -> (x, z, 2c - y) is the clockwise turn about x in our right-handed convention
    assert image(rotation_90(g, "x", -1), 3, 5, 11) == (3, 11, 2 * c - 5)
    assert image(rotation_90(g, "x", 1), 3, 5, 11) == (3, 2 * c - 11, 5)


def test_quarter_turns_do_not_commute():
    g = Grid3(16)
    a, b = rotation_90(g, "x", 1), rotation_90(g, "z", 1)
    s = site(g, 3, 5, 11)
    assert a.then(b).map[s] != b.then(a).map[s]


def test_half_turn_is_two_quarters():
    g = Grid3(16)
    q = rotation_90(g, "z", 1)
    assert rotation_3d(g, "z", math.pi) == q.then(q)


def test_rotation_3d_inverse_exhaustive():
    g = Grid3(32)
    for th in np.linspace(-math.pi + 0.05, math.pi, 17):
        assert rotation_3d(g, "z", th).then(rotation_3d(g, "z", -th)).is_identity()


def test_rotation_3d_axis_handling():
    g = Grid3(8)
    assert rotation_3d(g, [0.0, 0.0, 1.0], 0.4) == rotation_3d(g, "z", 0.4)
    with pytest.raises(UnsupportedAxisError):
        rotation_3d(g, [1.0, 1.0, 0.0], 0.4)
    with pytest.raises(UnsupportedAxisError):
        rotation_3d(g, "w", 0.4)


def test_rotation_3d_moves_ylm_toward_exact():
    from su2lat.specfun import RotationSpec, exact_rotate, CompactState
    from su2lat.lattice import translate_isometry, decode
    g = Grid3(64)
    s = ShellSpec.default(g)
    out = apply_permutation(sample_ylm_state(2, 1, g, s), rotation_3d(g, "z", math.pi / 4))
    c, _ = decode(out, translate_isometry(2, g, s))
    target = exact_rotate(CompactState.basis(2, 1), RotationSpec.z(math.pi / 4))
    assert abs(np.vdot(target.amps, c.amps)) ** 2 >= 0.9


def test_apply_permutation_properties():
    g = Grid3(16)
    st_ = sample_ylm_state(2, 1, g, ShellSpec.default(g))
    assert np.array_equal(apply_permutation(st_, LatticePermutation.identity(g)).amps, st_.amps)
    p = rotation_3d(g, "x", 0.7)
    out = apply_permutation(st_, p)
    assert np.array_equal(np.sort(np.abs(out.amps)), np.sort(np.abs(st_.amps)))
    assert np.array_equal(apply_permutation(out, p.inverse()).amps, st_.amps)
    with pytest.raises(ValidationError):
        apply_permutation(st_, LatticePermutation.identity(Grid3(8)))


def test_displacement_zero_angle():
    g = Grid3(16)
    assert displacement_stats(LatticePermutation.identity(g), 0.0, 4).max == 0.0
