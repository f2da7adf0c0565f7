import math

import numpy as np
import pytest

from su2lat.errors import LeakageError, PrecisionError
from su2lat.lattice import Grid3, LatticeState, ShellSpec, encode, sample_ylm_state, translate_isometry
from su2lat.phasest import (ExactBackend, _powers, decode_outcome, estimate_m, lattice_z_rotation,
                            min_bits, translate_back, uncompute_m)
from su2lat.shear import permute_amps, rotation_90
from su2lat.specfun import CompactState
from su2lat.stateprep import TaggedState, translate_with_tag


def setup(n, ell):
    g = Grid3(n)
    s = ShellSpec.default(g)
    return g, s, translate_isometry(ell, g, s)


def test_min_bits():
    assert [min_bits(ell) for ell in range(8)] == [1, 2, 3, 3, 4, 4, 4, 4]


def test_decode_window():
    assert [decode_outcome(a, 3) for a in range(8)] == [0, 1, 2, 3, -4, -3, -2, -1]


def test_z_rotation_exact_cases():
    g = Grid3(16)
    assert lattice_z_rotation(g, math.pi / 2) == rotation_90(g, "z", 1)
    assert lattice_z_rotation(g, 0.0).is_identity()
    assert lattice_z_rotation(g, 2 * math.pi).is_identity()


def test_z_rotation_pi8_overlap():
    g = Grid3(64)
    s = ShellSpec.default(g)
    perm = lattice_z_rotation(g, math.pi / 8)
    worst = 1.0
    for ell in range(5):
        for m in range(-ell, ell + 1):
            a = sample_ylm_state(ell, m, g, s).amps
            worst = min(worst, abs(np.vdot(np.exp(-1j * m * math.pi / 8) * a, permute_amps(a, perm))))
    # measured 0.918 (l=4, |m|=4); even l=0 only reaches 0.93, so the loss is radial
    assert worst >= 0.99, worst


def test_exact_backend_deterministic_l4_m3():
    g, _, iso = setup(32, 4)
    pe = estimate_m(iso.column_state(3), 4, 4, "exact-oracle", iso)
    assert pe.m == 3
    assert pe.probability(3) == pytest.approx(1.0, abs=1e-12)


def test_negative_m_decodes():
    g, _, iso = setup(32, 3)
    pe = estimate_m(iso.column_state(-2), 3, 3, "exact-oracle", iso)
    assert pe.m == -2 and pe.confidence > 1 - 1e-12
    assert pe.decoded()[-2] == pytest.approx(1.0, abs=1e-12)


def test_precision_error():
    g, _, iso = setup(32, 3)
    with pytest.raises(PrecisionError):
        estimate_m(iso.column_state(1), 3, 2, "exact-oracle", iso)


def test_shear_backend_l3_m1():
    g, s, _ = setup(64, 3)
    pe = estimate_m(sample_ylm_state(3, 1, g, s), 3, min_bits(3), "shear")
    assert pe.m == 1
    assert pe.probability(1) >= 0.9
    assert pe.probability(1) == pytest.approx(0.9574143572079675, abs=1e-9)


def test_distribution_normalized_and_phase_invariant():
    g, s, _ = setup(32, 2)
    st = sample_ylm_state(2, -1, g, s)
    a = estimate_m(st, 2, 3, "shear")
    b = estimate_m(LatticeState(g, st.amps * np.exp(0.7j), 2), 2, 3, "shear")
    assert math.fsum(a.distribution.tolist()) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(a.distribution, b.distribution, atol=1e-12)


def test_angle_doubling_matches_repeated_application():
    g, _, iso = setup(32, 2)
    be = ExactBackend(iso)
    psi = iso.column_state(1).amps + 0.3 * iso.column_state(-2).amps
    stack = _powers(psi, 3, be)
    step = psi
    for j in range(8):
        assert np.allclose(stack[j], step, atol=1e-12)
        step = be.rotate(step, "z", -2 * math.pi / 8)


def test_uncompute_exact_backend_all_m():
    for ell in range(5):
        g, s, iso = setup(32, ell)
        t = min_bits(ell)
        for m in range(-ell, ell + 1):
            tagged = translate_with_tag(CompactState.basis(ell, m), g, s, iso)
            _, leak = uncompute_m(tagged, t, "exact-oracle", iso)
            assert leak <= 1e-10


def test_uncompute_shear_leakage():
    g, s, _ = setup(64, 2)
    c = CompactState.random(2, np.random.default_rng(1))
    _, leak = uncompute_m(translate_with_tag(c, g, s), 3, "shear")
    assert leak <= 0.1


def test_uncompute_superposition_fidelity():
    rng = np.random.default_rng(1)
    c = CompactState.random(2, rng)
    g, s, iso = setup(64, 2)
    out, _ = uncompute_m(translate_with_tag(c, g, s), 3, "shear")
    ref = sum(c.amps[k] * sample_ylm_state(2, k - 2, g, s).amps for k in range(5))
    ref /= np.linalg.norm(ref)
    assert abs(np.vdot(ref, out.amps)) ** 2 >= 0.95

    out, leak = uncompute_m(translate_with_tag(c, g, s, iso), 3, "exact-oracle", iso)
    assert abs(np.vdot(encode(c, iso).amps, out.amps)) ** 2 >= 1 - 1e-9


def test_wrong_tag_leaks():
    g, s, iso = setup(32, 2)
    blocks = np.zeros((5, g.size), dtype=complex)
    blocks[4] = iso.column_state(-1).amps  # tag says m=2, lattice says m=-1
    with pytest.raises(LeakageError) as info:
        uncompute_m(TaggedState(2, g, blocks), 3, "exact-oracle", iso)
    assert info.value.leakage > 0.99


def test_translate_back_exact():
    g, s, iso = setup(32, 3)
    c = CompactState.random(3, np.random.default_rng(2))
    out, leak = translate_back(encode(c, iso), 3, 3, s, "exact-oracle", iso)
    assert leak <= 1e-10
    assert np.max(np.abs(out.amps - c.amps)) <= 1e-10


def test_p_correct_non_decreasing_in_n():
    medians = []
    for n in (32, 64, 128):
        g = Grid3(n)
        s = ShellSpec.default(g)
        medians.append(np.median([estimate_m(sample_ylm_state(2, m, g, s), 2, 3, "shear").probability(m)
                                  for m in range(-2, 3)]))
    # measured 0.95457, 0.95415, 0.95556: flat within shear noise
    assert medians[0] <= medians[1] <= medians[2], medians
