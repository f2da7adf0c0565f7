"""Bijective lattice rotations built from three cyclic shears.

A shear moves every lattice line parallel to one axis by a constant integer,
cyclically, so it is a permutation of sites.  Three of them,
``u += a v; v += b u; u += a v`` with ``a = -tan(theta/2)`` and
``b = sin(theta)``, approximate the rotation by ``theta`` in the (u, v) plane
near the grid centre.  Exact quarter-turns are pure coordinate permutations.

Rotations are active and right-handed: about z the plane is (x, y), about x it
is (y, z), about y it is (z, x).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .lattice import Grid3, LatticeState

AXES = {"x": 0, "y": 1, "z": 2}
# rotation plane (u, v) for each axis; rotation by +theta turns u toward v
PLANES = {0: (1, 2), 1: (2, 0), 2: (0, 1)}
_QUARTER = math.pi / 2


class UnsupportedAxisError(ValidationError):
    pass


def round_half_away(x):
    """Round to nearest integer, ties away from zero."""
    x = np.asarray(x, dtype=float)
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int64)


def _axis_index(axis) -> int:
    if isinstance(axis, str):
        if axis.lower() not in AXES:
            raise UnsupportedAxisError(f"unknown axis {axis!r}")
        return AXES[axis.lower()]
    if isinstance(axis, (int, np.integer)) and 0 <= axis < 3:
        return int(axis)
    v = np.asarray(axis, dtype=float)
    if v.shape == (3,):
        hits = np.flatnonzero(np.abs(v) > 1e-12)
        if hits.size == 1 and abs(v[hits[0]] - 1.0) <= 1e-12:
            return int(hits[0])
    raise UnsupportedAxisError(f"only the principal axes x, y, z are supported, got {axis!r}")


@dataclass(frozen=True, eq=False)
class LatticePermutation:
    """Site bijection: the amplitude at flat index i moves to ``map[i]``."""

    grid: Grid3
    map: np.ndarray

    def __post_init__(self):
        mp = np.asarray(self.map, dtype=np.int64).reshape(-1)
        if mp.size != self.grid.size:
            raise ValidationError(f"map has {mp.size} entries, grid has {self.grid.size}")
        if mp.min() < 0 or mp.max() >= mp.size or not np.all(np.bincount(mp, minlength=mp.size) == 1):
            raise ValidationError("map is not a bijection")
        mp.setflags(write=False)
        object.__setattr__(self, "map", mp)

    @classmethod
    def identity(cls, grid: Grid3) -> "LatticePermutation":
        return cls(grid, np.arange(grid.size, dtype=np.int64))

    def then(self, other: "LatticePermutation") -> "LatticePermutation":
        """Apply ``self`` first, then ``other``."""
        if other.grid != self.grid:
            raise ValidationError("grid mismatch")
        return LatticePermutation(self.grid, other.map[self.map])

    def inverse(self) -> "LatticePermutation":
        inv = np.empty_like(self.map)
        inv[self.map] = np.arange(self.map.size, dtype=np.int64)
        return LatticePermutation(self.grid, inv)

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.map, np.arange(self.map.size)))

    def __eq__(self, other):
        if not isinstance(other, LatticePermutation):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.map, other.map)

    __hash__ = None


def is_bijection(perm: LatticePermutation) -> bool:
    """Independent check: sorted image equals 0..N-1."""
    return bool(np.array_equal(np.sort(perm.map), np.arange(perm.grid.size)))


def _from_coords(grid: Grid3, new) -> LatticePermutation:
    n = grid.n
    x, y, z = (np.mod(a, n) for a in new)
    return LatticePermutation(grid, grid.flat(x, y, z))


@dataclass(frozen=True)
class ShearParams:
    theta: float

    @property
    def a(self) -> float:
        return -math.tan(self.theta / 2)

    @property
    def b(self) -> float:
        return math.sin(self.theta)

    def matrices(self):
        """Continuous shear factors; their product Shx(a) Shy(b) Shx(a) is R(theta)."""
        shx = np.array([[1.0, self.a], [0.0, 1.0]])
        shy = np.array([[1.0, 0.0], [self.b, 1.0]])
        return shx, shy, shx


def shear_2d(grid: Grid3, plane, sheared_axis, a: float) -> LatticePermutation:
    """Cyclic shear ``u' = (u + round(a (v - c))) mod n`` in every slice of the plane.

    ``plane`` is a pair of axes; ``sheared_axis`` is the member that moves, the
    other one drives the offset.
    """
    if not math.isfinite(a):
        raise ValidationError("shear slope must be finite")
    p = tuple(_axis_index(ax) for ax in plane)
    u = _axis_index(sheared_axis)
    if len(p) != 2 or p[0] == p[1] or u not in p:
        raise ValidationError(f"bad plane/axis combination {plane!r}/{sheared_axis!r}")
    v = p[1] if u == p[0] else p[0]
    coords = list(grid.coords())
    offset = round_half_away(a * (coords[v] - grid.c))
    coords[u] = coords[u] + offset
    return _from_coords(grid, coords)


def rotation_90(grid: Grid3, axis, quarter_turns: int) -> LatticePermutation:
    """Exact rotation by ``quarter_turns * 90`` degrees about the centre.

    Negation is taken about ``c`` modulo ``n``.  One positive turn about z maps
    ``(x, y) -> (2c - y, x)``; about x it maps ``(y, z) -> (2c - z, y)``.
    """
    k = _axis_index(axis)
    q = int(quarter_turns) % 4
    u, v = PLANES[k]
    coords = [a - grid.c for a in grid.coords()]
    for _ in range(q):
        coords[u], coords[v] = -coords[v], coords[u]
    return _from_coords(grid, [a + grid.c for a in coords])


def _shear_rotation(grid: Grid3, u: int, v: int, theta: float) -> LatticePermutation:
    prm = ShearParams(theta)
    coords = [a - grid.c for a in grid.coords()]
    cu, cv = coords[u], coords[v]
    n = grid.n
    # wrap to centred coordinates after each step so offsets see the true position
    half = n // 2
    cu = np.mod(cu + round_half_away(prm.a * cv) + half, n) - half
    cv = np.mod(cv + round_half_away(prm.b * cu) + half, n) - half
    cu = np.mod(cu + round_half_away(prm.a * cv) + half, n) - half
    coords[u], coords[v] = cu, cv
    return _from_coords(grid, [a + grid.c for a in coords])


def rotation_2d(grid: Grid3, plane, theta: float) -> LatticePermutation:
    """Three-shear rotation by ``theta`` (|theta| <= pi/2) turning plane[0] toward plane[1]."""
    if abs(theta) > _QUARTER + 1e-12:
        raise ValidationError(f"|theta| = {abs(theta):.6g} exceeds pi/2; compose quarter-turns first")
    u, v = (_axis_index(ax) for ax in plane)
    if u == v:
        raise ValidationError("plane axes must differ")
    return _shear_rotation(grid, u, v, theta)


def _reduce_angle(theta: float) -> float:
    """Map theta into (-pi, pi]."""
    t = math.remainder(theta, 2 * math.pi)
    return math.pi if t == -math.pi else t


def _exact_quarters(theta: float):
    q = theta / _QUARTER
    qr = round(q)
    if abs(q - qr) <= 1e-12:
        return int(qr)
    return None


def rotation_3d(grid: Grid3, axis, theta: float) -> LatticePermutation:
    """Lattice rotation about a principal axis.

    Multiples of pi/2 use the exact quarter-turn permutation.  Otherwise a half
    turn H is split off when |theta| > pi/2, so the shear angle stays within
    [-pi/2, pi/2].  H goes after the shears for positive theta and before them
    for negative theta, so ``rotation_3d(axis, -theta)`` is the exact inverse
    (H does not commute with the shears on the wrapped row v = -n/2).
    """
    k = _axis_index(axis)
    if not math.isfinite(theta):
        raise ValidationError("theta must be finite")
    t = _reduce_angle(theta)
    q = _exact_quarters(t)
    if q is not None:
        return rotation_90(grid, k, q)
    u, v = PLANES[k]
    if abs(t) <= _QUARTER:
        return _shear_rotation(grid, u, v, t)
    half = rotation_90(grid, k, 2)
    if t > 0:
        return _shear_rotation(grid, u, v, t - math.pi).then(half)
    return half.then(_shear_rotation(grid, u, v, t + math.pi))


def apply_permutation(state: LatticeState, perm: LatticePermutation) -> LatticeState:
    """amps'[map[i]] = amps[i]."""
    if state.grid != perm.grid:
        raise ValidationError("grid mismatch")
    out = np.empty_like(state.amps)
    out[perm.map] = state.amps
    return LatticeState(state.grid, out, state.ell)


def permute_amps(amps: np.ndarray, perm: LatticePermutation) -> np.ndarray:
    """Raw-array version of :func:`apply_permutation` (no normalization check)."""
    out = np.empty_like(amps)
    out[perm.map] = amps
    return out


@dataclass(frozen=True)
class DisplacementStats:
    max: float
    mean: float
    histogram: tuple
    bin_edges: tuple
    count: int


def displacement_stats(perm: LatticePermutation, theta: float, region_radius: float,
                       axis="z", bins: int = 8) -> DisplacementStats:
    """Distance between each site's image and its exactly rotated position.

    Only sites within ``region_radius`` (Euclidean, in the rotation plane) of
    the centre are scored, across all slices along ``axis``.  Distances are
    wrap-aware (periodic minimum image).
    """
    grid = perm.grid
    k = _axis_index(axis)
    u, v = PLANES[k]
    coords = [a - grid.c for a in grid.coords()]
    cu, cv = coords[u], coords[v]
    sel = np.flatnonzero(cu * cu + cv * cv <= region_radius * region_radius)
    cs, sn = math.cos(theta), math.sin(theta)
    eu = cs * cu[sel] - sn * cv[sel]
    ev = sn * cu[sel] + cs * cv[sel]
    img = [a - grid.c for a in grid.unflat(perm.map[sel])]
    n = grid.n
    du = np.mod(img[u] - eu + n / 2, n) - n / 2
    dv = np.mod(img[v] - ev + n / 2, n) - n / 2
    dw = np.mod(img[k] - coords[k][sel] + n / 2, n) - n / 2
    d = np.sqrt(du * du + dv * dv + dw * dw)
    # values like 1e-15 are exact hits
    d[d < 1e-9] = 0.0
    hist, edges = np.histogram(d, bins=bins, range=(0.0, max(4.0, float(d.max()) if d.size else 4.0)))
    return DisplacementStats(
        max=float(d.max()) if d.size else 0.0,
        mean=float(d.mean()) if d.size else 0.0,
        histogram=tuple(int(h) for h in hist),
        bin_edges=tuple(float(e) for e in edges),
        count=int(d.size),
    )
