"""Amplitude encoding by a cascade of conditionally controlled rotations.

Qubit ``i`` (counted from the most significant) is rotated by an angle that
depends on the values of all higher bits.  The angle comes from the ratio of
two dyadic interval sums of the target density.  The interval sums are exact
here because the density is the discretized one, so the cascade reproduces
``sqrt(density)`` to rounding error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .errors import ValidationError
from .lattice import Grid3, LatticeState, ShellSpec, _shell_samples, shell_sites
from .specfun import CompactState


class IntervalOracle(Protocol):
    """Anything that can return the probability mass of a dyadic interval."""

    n_qubits: int

    def __call__(self, level: int, index: int) -> float: ...


@dataclass(frozen=True, eq=False)
class TargetDensity:
    """Non-negative weights over 2**n_qubits basis states, summing to one."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        size = p.size
        if size == 0 or size & (size - 1):
            raise ValidationError(f"density length must be a power of two, got {size}")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValidationError("density must be finite and non-negative")
        total = math.fsum(p.tolist())
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"density must sum to 1 (got {total!r})")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "_tree", _dyadic_tree(p))

    @classmethod
    def from_weights(cls, w) -> "TargetDensity":
        w = np.asarray(w, dtype=float)
        total = math.fsum(w.tolist())
        if not total > 0:
            raise ValidationError("weights must have a positive sum")
        return cls(w / total)

    @classmethod
    def from_amplitudes(cls, amps) -> "TargetDensity":
        return cls.from_weights(np.abs(np.asarray(amps)) ** 2)

    @property
    def n_qubits(self) -> int:
        return self.probs.size.bit_length() - 1

    def __call__(self, level: int, index: int) -> float:
        return interval_sum(self, level, index)


def _dyadic_tree(p: np.ndarray) -> list[np.ndarray]:
    # level k holds the sums over blocks of 2**k entries; built by pairwise
    # addition so parent == left + right holds bit-for-bit
    levels = [p]
    while levels[-1].size > 1:
        levels.append(levels[-1].reshape(-1, 2).sum(axis=1))
    return levels


def interval_sum(density: TargetDensity, level: int, index: int) -> float:
    """Mass of the dyadic interval ``[index * 2**level, (index + 1) * 2**level)``."""
    n = density.n_qubits
    if not 0 <= level <= n:
        raise ValidationError(f"level must be in [0, {n}], got {level}")
    if not 0 <= index < 2 ** (n - level):
        raise ValidationError(f"index must be in [0, {2 ** (n - level)}), got {index}")
    return float(density._tree[level][index])


@dataclass(frozen=True, eq=False)
class PrepPlan:
    """``angles[i][p]`` is the rotation angle of qubit i (MSB first) when the
    higher bits read ``p``."""

    n_qubits: int
    angles: tuple

    def __post_init__(self):
        if len(self.angles) != self.n_qubits:
            raise ValidationError("one angle table per qubit required")
        for i, tab in enumerate(self.angles):
            tab = np.asarray(tab, dtype=float)
            if tab.shape != (2**i,):
                raise ValidationError(f"table {i} must have {2**i} entries")
            if np.any(tab < 0) or np.any(tab > math.pi / 2 + 1e-15):
                raise ValidationError("angles must lie in [0, pi/2]")


def build_prep_plan(density) -> PrepPlan:
    """Angles ``arccos(sqrt(P(prefix, 0) / P(prefix)))``; empty prefixes get 0.

    ``density`` may be a :class:`TargetDensity` or any :class:`IntervalOracle`.
    """
    n = density.n_qubits
    angles = []
    for i in range(n):
        level = n - i
        if isinstance(density, TargetDensity):
            parent = density._tree[level]
            left = density._tree[level - 1][0::2]
        else:
            parent = np.array([density(level, p) for p in range(2**i)])
            left = np.array([density(level - 1, 2 * p) for p in range(2**i)])
        ratio = np.divide(left, parent, out=np.ones_like(left), where=parent > 0)
        tab = np.arccos(np.sqrt(np.clip(ratio, 0.0, 1.0)))
        tab.setflags(write=False)
        angles.append(tab)
    return PrepPlan(n, tuple(angles))


def apply_prep(plan: PrepPlan) -> np.ndarray:
    """Run the cascade on |0...0> and return the 2**n amplitude vector.

    Each stage is a uniformly controlled Ry on qubit i acting on the full state
    vector; the target qubit starts in |0>, so only the cosine/sine column
    matters, but the full 2x2 rotation is applied.
    """
    n = plan.n_qubits
    psi = np.zeros(2**n)
    psi[0] = 1.0
    for i, tab in enumerate(plan.angles):
        view = psi.reshape(2**i, 2, 2 ** (n - i - 1))
        c = np.cos(tab)[:, None]
        s = np.sin(tab)[:, None]
        zero, one = view[:, 0, :].copy(), view[:, 1, :].copy()
        view[:, 0, :] = c * zero - s * one
        view[:, 1, :] = s * zero + c * one
    return psi


def rephase(state, phase_fn):
    """Multiply amplitude x by exp(i phase(x)).

    ``phase_fn`` is either a callable on the index array or an array of phases.
    Works on raw arrays, :class:`CompactState` and :class:`LatticeState`.
    """
    amps = state.amps if hasattr(state, "amps") else np.asarray(state)
    if callable(phase_fn):
        phases = np.asarray(phase_fn(np.arange(amps.size)), dtype=float)
    else:
        phases = np.asarray(phase_fn, dtype=float)
    out = amps * np.exp(1j * phases)
    if isinstance(state, LatticeState):
        return LatticeState(state.grid, out, state.ell)
    if isinstance(state, CompactState):
        return CompactState(state.ell, out)
    return out


def _ylm_site_weights(ell: int, m: int, grid: Grid3, shell: ShellSpec):
    """|Y_lm|^2 on every site as an (n, n, n) array [x, y, z], plus shell phases."""
    idx, _, phi = shell_sites(grid, shell)
    vals = _shell_samples(ell, grid, shell)[:, m + ell]
    w = np.zeros(grid.size)
    w[idx] = np.abs(vals) ** 2
    n = grid.n
    return w.reshape(n, n, n), idx, vals


def prepare_ylm_lattice(ell: int, m: int, grid: Grid3, shell: ShellSpec) -> LatticeState:
    """Prepare the discretized Y_lm shell state with the rotation cascade.

    1. the z register gets the marginal of |Y_lm|^2 over z (only the
       polar-angle factor enters);
    2. for each z, a second cascade spreads the slice into its ring on the
       shell, with the conditional (x, y) density;
    3. a rephasing by the argument of Y_lm: m * phi plus pi where the
       Legendre factor is negative.
    """
    if abs(m) > ell:
        raise ValidationError(f"|m| > l ({m}, {ell})")
    n = grid.n
    w, idx, vals = _ylm_site_weights(ell, m, grid, shell)
    w = w / math.fsum(w.ravel().tolist())

    pz = w.sum(axis=(0, 1))
    z_amp = apply_prep(build_prep_plan(TargetDensity.from_weights(pz)))

    cube = np.zeros((n, n, n))
    for z in np.flatnonzero(pz > 0):
        ring = TargetDensity.from_weights(w[:, :, z].ravel())
        cube[:, :, z] = z_amp[z] * apply_prep(build_prep_plan(ring)).reshape(n, n)

    phases = np.zeros(grid.size)
    phases[idx] = np.angle(vals)
    return rephase(LatticeState.normalized(grid, cube.ravel(), ell), phases)


@dataclass(frozen=True, eq=False)
class TaggedState:
    """Joint state sum_m |m> (x) block[m + l]; blocks are dense lattice vectors."""

    ell: int
    grid: Grid3
    blocks: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.blocks))

    def block(self, m: int) -> np.ndarray:
        return self.blocks[m + self.ell]


def translate_with_tag(compact: CompactState, grid: Grid3, shell: ShellSpec,
                       isometry=None) -> TaggedState:
    """|m> -> |m, Y_lm> for a superposition over m.

    Blocks are ``prepare_ylm_lattice`` outputs; passing a
    :class:`~su2lat.lattice.TranslateIsometry` uses its orthonormalized
    columns instead (exact eigenstates of the isometry-based rotation backend).
    """
    ell = compact.ell
    blocks = np.zeros((2 * ell + 1, grid.size), dtype=complex)
    for k, c in enumerate(compact.amps):
        if c == 0:
            continue
        m = k - ell
        if isometry is not None:
            if isometry.ell != ell or isometry.grid != grid:
                raise ValidationError("isometry does not match state/grid")
            vec = isometry.embed(np.eye(2 * ell + 1)[k])
        else:
            vec = prepare_ylm_lattice(ell, m, grid, shell).amps
        blocks[k] = c * vec
    return TaggedState(ell, grid, blocks)


def ring_rephase_fn(m: int, grid: Grid3) -> Callable[[np.ndarray], np.ndarray]:
    """Phase function m * phi(x, y) over flat site indices."""
    def fn(index):
        x, y, _ = grid.unflat(index)
        return m * np.arctan2(y - grid.c, x - grid.c)
    return fn
