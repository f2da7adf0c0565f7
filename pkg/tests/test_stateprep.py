import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from su2lat.errors import ValidationError
from su2lat.lattice import (Grid3, LatticeState, ShellSpec, encode, sample_ylm_state, shell_sites,
                            translate_isometry)
from su2lat.phasest import uncompute_m
from su2lat.specfun import CompactState, assoc_legendre_norm
from su2lat.stateprep import (PrepPlan, TargetDensity, apply_prep, build_prep_plan, interval_sum,
                              prepare_ylm_lattice, rephase, ring_rephase_fn, translate_with_tag)


def random_density(rng, n_qubits):
    w = rng.exponential(size=2**n_qubits)
    w[rng.random(w.size) < 0.2] = 0.0
    w[rng.integers(w.size)] += 1.0
    return TargetDensity.from_weights(w)


class SlowOracle:
    """Interval sums by direct summation, for cross-checking the tree."""

    def __init__(self, p):
        self.p = np.asarray(p)
        self.n_qubits = self.p.size.bit_length() - 1

    def __call__(self, level, index):
        return math.fsum(self.p[index * 2**level:(index + 1) * 2**level].tolist())


# densities and interval sums

@pytest.mark.parametrize("bad", [[0.5, 0.5, 0.0], [1.2, -0.2], [0.5, 0.4], [float("nan"), 1.0]])
def test_density_validation(bad):
    with pytest.raises(ValidationError):
        TargetDensity(bad)


def test_interval_sum_trivial_cases():
    d = random_density(np.random.default_rng(0), 5)
    assert interval_sum(d, 5, 0) == pytest.approx(1.0, abs=1e-15)
    for k in range(32):
        assert interval_sum(d, 0, k) == d.probs[k]
    u = TargetDensity(np.full(32, 1 / 32))
    for level in range(6):
        assert interval_sum(u, level, 0) == 2.0 ** (level - 5)


def test_zero_weights_rejected():
    with pytest.raises(ValidationError):
        TargetDensity.from_weights(np.zeros(4))


def test_interval_sum_range():
    d = TargetDensity(np.full(8, 1 / 8))
    with pytest.raises(ValidationError):
        interval_sum(d, 1, 4)
    with pytest.raises(ValidationError):
        interval_sum(d, 4, 0)


@settings(max_examples=30, deadline=None)
@given(w=arrays(float, st.sampled_from([2, 4, 16, 64]), elements=st.floats(0, 1)).filter(lambda a: a.sum() > 0))
def test_refinement_identity(w):
    d = TargetDensity.from_weights(w)
    n = d.n_qubits
    for level in range(1, n + 1):
        for k in range(2 ** (n - level)):
            assert interval_sum(d, level, k) == interval_sum(d, level - 1, 2 * k) + interval_sum(d, level - 1, 2 * k + 1)


# plans

def test_delta_density():
    p = np.zeros(16)
    p[0] = 1.0
    plan = build_prep_plan(TargetDensity(p))
    assert all(np.all(t == 0) for t in plan.angles)
    assert np.array_equal(apply_prep(plan), p)


def test_uniform_density():
    plan = build_prep_plan(TargetDensity(np.full(64, 1 / 64)))
    assert all(np.allclose(t, math.pi / 4, atol=1e-15) for t in plan.angles)
    assert np.allclose(apply_prep(plan), 1 / 8, atol=1e-15)


def test_plan_shapes_and_range():
    plan = build_prep_plan(random_density(np.random.default_rng(1), 6))
    for i, tab in enumerate(plan.angles):
        assert tab.shape == (2**i,)
        assert np.all((tab >= 0) & (tab <= math.pi / 2))
    with pytest.raises(ValidationError):
        PrepPlan(1, (np.array([2.0]),))


def test_random_8_qubit_densities():
    rng = np.random.default_rng(2)
    for _ in range(10):
        d = random_density(rng, 8)
        psi = apply_prep(build_prep_plan(d))
        assert np.max(np.abs(psi - np.sqrt(d.probs))) <= 1e-10
        assert np.all(psi >= 0)
        assert abs(np.linalg.norm(psi) - 1) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 10), seed=st.integers(0, 2**32 - 1))
def test_cascade_reproduces_sqrt_density(n, seed):
    d = random_density(np.random.default_rng(seed), n)
    assert np.max(np.abs(apply_prep(build_prep_plan(d)) - np.sqrt(d.probs))) <= 1e-10


def test_oracle_protocol_gives_same_plan():
    d = random_density(np.random.default_rng(3), 7)
    a = build_prep_plan(d)
    b = build_prep_plan(SlowOracle(d.probs))
    for ta, tb in zip(a.angles, b.angles):
        assert np.allclose(ta, tb, atol=1e-12)


# rephasing

def test_rephase_zero_and_global():
    v = np.random.default_rng(4).normal(size=16) + 0j
    v /= np.linalg.norm(v)
    assert np.array_equal(rephase(v, lambda x: np.zeros(x.size)), v)
    w = rephase(v, np.full(16, math.pi))
    assert abs(np.vdot(v, w)) ** 2 == pytest.approx(1.0, abs=1e-15)
    assert abs(np.linalg.norm(w) - 1) < 1e-15


def test_rephase_keeps_type():
    c = CompactState.random(2, np.random.default_rng(5))
    assert isinstance(rephase(c, np.zeros(5)), CompactState)


def test_ring_rephase_reproduces_sample_phases():
    g = Grid3(32)
    s = ShellSpec.default(g)
    idx, theta, _ = shell_sites(g, s)
    for ell, m in [(2, 1), (3, -2), (4, 3)]:
        sample = sample_ylm_state(ell, m, g, s)
        sign = np.zeros(g.size)
        sign[idx] = np.sign(assoc_legendre_norm(ell, m, np.cos(theta)))
        real_part = LatticeState(g, np.abs(sample.amps) * sign, ell)
        out = rephase(real_part, ring_rephase_fn(m, g))
        assert np.max(np.abs(out.amps - sample.amps)) <= 1e-10


# Y_lm preparation

def test_prepare_l0():
    g = Grid3(32)
    s = ShellSpec.default(g)
    a = prepare_ylm_lattice(0, 0, g, s).amps
    assert np.max(np.abs(a - sample_ylm_state(0, 0, g, s).amps)) <= 1e-10


def test_prepare_l2_m1():
    g = Grid3(32)
    s = ShellSpec.default(g)
    a = prepare_ylm_lattice(2, 1, g, s).amps
    assert abs(np.vdot(sample_ylm_state(2, 1, g, s).amps, a)) ** 2 >= 1 - 1e-9


def test_prepare_sign_of_m():
    g = Grid3(32)
    s = ShellSpec.default(g)
    a, b = prepare_ylm_lattice(3, 2, g, s).amps, prepare_ylm_lattice(3, -2, g, s).amps
    assert np.max(np.abs(np.abs(a) - np.abs(b))) < 1e-14


@pytest.mark.parametrize("n", [32, 64])
def test_prepare_matches_sampling(n):
    g = Grid3(n)
    s = ShellSpec.default(g)
    for ell in range(5):
        for m in range(-ell, ell + 1):
            a = prepare_ylm_lattice(ell, m, g, s).amps
            assert np.max(np.abs(a - sample_ylm_state(ell, m, g, s).amps)) <= 1e-9


# tagged translation

def test_tag_basis_state():
    g = Grid3(32)
    t = translate_with_tag(CompactState.basis(3, 2), g, ShellSpec.default(g))
    nonzero = [k for k in range(7) if np.any(t.blocks[k])]
    assert nonzero == [5]
    assert t.norm == pytest.approx(1.0, abs=1e-12)


def test_tag_norm_random():
    g = Grid3(32)
    t = translate_with_tag(CompactState.random(2, np.random.default_rng(6)), g, ShellSpec.default(g))
    assert t.norm == pytest.approx(1.0, abs=1e-12)


def test_tag_uncompute_matches_isometry_image():
    g = Grid3(64)
    s = ShellSpec.default(g)
    c = CompactState.random(2, np.random.default_rng(1))
    out, _ = uncompute_m(translate_with_tag(c, g, s), 3, "shear")
    fid = abs(np.vdot(encode(c, translate_isometry(2, g, s)).amps, out.amps)) ** 2
    # measured 0.968: the sheared z-rotations move amplitude off the shell
    assert fid >= 0.99, fid
