"""Periodic cubic grids and discretized spherical-harmonic states on a shell.

Sites are integer triples ``(x, y, z)`` in ``0..n-1``; the physical coordinate
is ``site - c`` with ``c = n // 2``.  Flat indices are x-major:
``flat = (x * n + y) * n + z``.
"""
from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import ConditioningError, EmptySupportError, ResolutionError, ValidationError
from .specfun import CompactState, assoc_legendre_norm

MIN_SITES_PER_DIM = 20
MAX_GRAM_OFFDIAG = 0.3


@dataclass(frozen=True)
class Grid3:
    n: int

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 8 or n > 256 or n & (n - 1):
            raise ValidationError(f"n must be a power of two in [8, 256], got {n!r}")

    @property
    def c(self) -> int:
        return self.n // 2

    @property
    def size(self) -> int:
        return self.n**3

    def flat(self, x, y, z):
        n = self.n
        return (np.asarray(x) * n + y) * n + z

    def unflat(self, idx):
        idx = np.asarray(idx)
        n = self.n
        return idx // (n * n), (idx // n) % n, idx % n

    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Integer site coordinates of every flat index."""
        return _site_coords(self.n)


@lru_cache(maxsize=4)
def _site_coords(n: int):
    idx = np.arange(n**3, dtype=np.int64)
    out = (idx // (n * n), (idx // n) % n, idx % n)
    for a in out:
        a.setflags(write=False)
    return out


@dataclass(frozen=True)
class ShellSpec:
    """Radial window ``|r - r0| <= width / 2`` in lattice units."""

    r0: float
    width: float = 3.0

    @classmethod
    def default(cls, grid: Grid3) -> "ShellSpec":
        return cls(0.35 * grid.n, 3.0)

    def check(self, grid: Grid3) -> None:
        if not (self.width > 0 and self.r0 - self.width / 2 > 0):
            raise ValidationError("shell must satisfy width > 0 and r0 - width/2 > 0")
        if not self.r0 + self.width / 2 < grid.n / 2:
            raise ValidationError(
                f"shell outer radius {self.r0 + self.width / 2} must stay below n/2 = {grid.n / 2}"
            )


@lru_cache(maxsize=16)
def shell_sites(grid: Grid3, shell: ShellSpec):
    """Flat indices and spherical angles (theta, phi) of the sites inside the shell."""
    shell.check(grid)
    n, c = grid.n, grid.c
    # scan only the bounding box of the shell
    rmax = int(math.ceil(shell.r0 + shell.width / 2))
    ax = np.arange(c - rmax, c + rmax + 1)
    X, Y, Z = np.meshgrid(ax, ax, ax, indexing="ij")
    dx, dy, dz = X - c, Y - c, Z - c
    r = np.sqrt(dx * dx + dy * dy + dz * dz)
    mask = np.abs(r - shell.r0) <= shell.width / 2
    if not mask.any():
        raise EmptySupportError(f"shell r0={shell.r0}, width={shell.width} contains no site")
    idx = grid.flat(X[mask], Y[mask], Z[mask]).astype(np.int64)
    order = np.argsort(idx)
    idx = idx[order]
    dx, dy, dz, r = dx[mask][order], dy[mask][order], dz[mask][order], r[mask][order]
    theta = np.arccos(np.clip(dz / r, -1.0, 1.0))
    phi = np.arctan2(dy, dx)
    for a in (idx, theta, phi):
        a.setflags(write=False)
    return idx, theta, phi


def _check_resolution(ell: int, grid: Grid3, shell: ShellSpec) -> np.ndarray:
    idx, _, _ = shell_sites(grid, shell)
    need = MIN_SITES_PER_DIM * (2 * ell + 1)
    if idx.size < need:
        raise ResolutionError(
            f"shell has {idx.size} sites; l={ell} needs at least {need}"
        )
    return idx


def _unit_norm(v: np.ndarray) -> float:
    """Euclidean norm with compensated summation over the nonzero entries."""
    sq = v.real**2 + v.imag**2
    return math.sqrt(math.fsum(sq[sq != 0].tolist()))


@lru_cache(maxsize=64)
def _raw_samples(ell: int, grid: Grid3, shell: ShellSpec) -> np.ndarray:
    """Y_lm on shell sites with one common scale sqrt(4 pi / sites), one column per m.

    A shared scale keeps the frame covariant: a lattice symmetry maps the columns
    into each other by exactly D, so the Gram matrix commutes with D.
    """
    _check_resolution(ell, grid, shell)
    _, theta, phi = shell_sites(grid, shell)
    cos_t = np.cos(theta)
    scale = math.sqrt(4 * math.pi / theta.size)
    V = np.stack([assoc_legendre_norm(ell, m, cos_t) * np.exp(1j * m * phi) * scale
                  for m in range(-ell, ell + 1)], axis=1)
    V.setflags(write=False)
    return V


@lru_cache(maxsize=64)
def _shell_samples(ell: int, grid: Grid3, shell: ShellSpec) -> np.ndarray:
    """Raw samples with each column normalized on its own."""
    raw = _raw_samples(ell, grid, shell)
    V = np.stack([raw[:, k] / _unit_norm(raw[:, k]) for k in range(raw.shape[1])], axis=1)
    V.setflags(write=False)
    return V


@dataclass(frozen=True, eq=False)
class LatticeState:
    grid: Grid3
    amps: np.ndarray
    ell: int | None = None

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.size != self.grid.size:
            raise ValidationError(f"expected {self.grid.size} amplitudes, got {amps.size}")
        nrm = _unit_norm(amps)
        if abs(nrm - 1.0) > 1e-12:
            raise ValidationError(f"LatticeState must be normalized (norm={nrm!r})")
        object.__setattr__(self, "amps", amps)

    @classmethod
    def normalized(cls, grid: Grid3, amps, ell=None) -> "LatticeState":
        amps = np.asarray(amps, dtype=complex)
        return cls(grid, amps / _unit_norm(amps), ell)

    def cube(self) -> np.ndarray:
        """Amplitudes as an (n, n, n) array indexed [x, y, z]."""
        n = self.grid.n
        return self.amps.reshape(n, n, n)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.amps)

    def vdot(self, other: "LatticeState") -> complex:
        return complex(np.vdot(self.amps, other.amps))


def sample_ylm_state(ell: int, m: int, grid: Grid3, shell: ShellSpec) -> LatticeState:
    """Y_lm(theta, phi) * R(r) on the lattice, R = 1 on the shell, normalized."""
    if abs(m) > ell:
        raise ValidationError(f"|m| > l ({m}, {ell})")
    idx, _, _ = shell_sites(grid, shell)
    amps = np.zeros(grid.size, dtype=complex)
    amps[idx] = _shell_samples(ell, grid, shell)[:, m + ell]
    return LatticeState(grid, amps, ell)


def gram_matrix(ell: int, grid: Grid3, shell: ShellSpec) -> np.ndarray:
    """Overlaps G[m, m'] = <Y_lm | Y_lm'> of the sampled states (index m + l)."""
    V = _shell_samples(ell, grid, shell)
    G = V.conj().T @ V
    G = (G + G.conj().T) / 2
    np.fill_diagonal(G, 1.0)
    return G


def max_offdiag(G: np.ndarray) -> float:
    if G.shape[0] < 2:
        return 0.0
    return float(np.max(np.abs(G - np.diag(np.diag(G)))))


@dataclass(frozen=True, eq=False)
class TranslateIsometry:
    """Orthonormal embedding of |m> as discretized Y_lm, stored on shell sites only.

    ``columns[:, m + l]`` holds the amplitudes on ``sites``.
    """

    ell: int
    grid: Grid3
    shell: ShellSpec
    sites: np.ndarray
    columns: np.ndarray
    gram: np.ndarray

    @property
    def dim(self) -> int:
        return 2 * self.ell + 1

    def column_state(self, m: int) -> LatticeState:
        amps = np.zeros(self.grid.size, dtype=complex)
        amps[self.sites] = self.columns[:, m + self.ell]
        return LatticeState.normalized(self.grid, amps, self.ell)

    def dense(self) -> np.ndarray:
        T = np.zeros((self.grid.size, self.dim), dtype=complex)
        T[self.sites] = self.columns
        return T

    @cached_property
    def raw(self) -> np.ndarray:
        return _shell_samples(self.ell, self.grid, self.shell)

    def project(self, amps: np.ndarray) -> np.ndarray:
        """T^dagger amps."""
        return self.columns.conj().T @ amps[self.sites]

    def embed(self, coeffs: np.ndarray) -> np.ndarray:
        """T coeffs as a dense amplitude vector."""
        out = np.zeros(self.grid.size, dtype=complex)
        out[self.sites] = self.columns @ coeffs
        return out


def lowdin(V: np.ndarray) -> np.ndarray:
    """Symmetric orthogonalization V (V^dagger V)^(-1/2)."""
    G = V.conj().T @ V
    w, U = np.linalg.eigh((G + G.conj().T) / 2)
    if w.min() <= 1e-8 * w.max():
        raise ConditioningError(f"Gram matrix is singular (min eigenvalue {w.min():.3g})")
    return V @ ((U / np.sqrt(w)) @ U.conj().T)


@lru_cache(maxsize=32)
def translate_isometry(ell: int, grid: Grid3, shell: ShellSpec) -> TranslateIsometry:
    G = gram_matrix(ell, grid, shell)
    off = max_offdiag(G)
    if off > MAX_GRAM_OFFDIAG:
        raise ConditioningError(
            f"max off-diagonal overlap {off:.3f} exceeds {MAX_GRAM_OFFDIAG}; refine the grid"
        )
    T = lowdin(_raw_samples(ell, grid, shell))
    T.setflags(write=False)
    sites, _, _ = shell_sites(grid, shell)
    return TranslateIsometry(ell, grid, shell, sites, T, G)


def encode(compact: CompactState, T: TranslateIsometry) -> LatticeState:
    if compact.ell != T.ell:
        raise ValidationError(f"state has l={compact.ell}, isometry has l={T.ell}")
    return LatticeState.normalized(T.grid, T.embed(compact.amps), T.ell)


def decode(lattice: LatticeState, T: TranslateIsometry) -> tuple[CompactState, float]:
    """Project onto the isometry range; returns the renormalized state and the residual norm."""
    if lattice.grid != T.grid:
        raise ValidationError("grid mismatch between state and isometry")
    coeffs = T.project(lattice.amps)
    rest = lattice.amps.copy()
    rest[T.sites] -= T.columns @ coeffs
    residual = _unit_norm(rest)
    if not np.any(coeffs):
        raise ValidationError("state has no overlap with the isometry range")
    return CompactState.from_vector(T.ell, coeffs), residual


# ----------------------------------------------------------------------------
# File formats
# ----------------------------------------------------------------------------

MAGIC = b"LATS"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIi")


def save_lattice_state(path, state: LatticeState) -> None:
    """Binary export: 'LATS', u32 version, u32 n, i32 l (-1 if unset), then re/im f64 pairs."""
    ell = -1 if state.ell is None else int(state.ell)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, state.grid.n, ell))
        pairs = np.empty((state.grid.size, 2), dtype="<f8")
        pairs[:, 0] = state.amps.real
        pairs[:, 1] = state.amps.imag
        fh.write(pairs.tobytes())


def load_lattice_state(path) -> LatticeState:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValidationError("truncated header")
        magic, version, n, ell = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValidationError(f"bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise ValidationError(f"unsupported version {version}")
        grid = Grid3(n)
        body = fh.read()
    if len(body) != grid.size * 16:
        raise ValidationError(f"expected {grid.size * 16} payload bytes, got {len(body)}")
    pairs = np.frombuffer(body, dtype="<f8").reshape(-1, 2)
    amps = pairs[:, 0] + 1j * pairs[:, 1]
    return LatticeState(grid, amps, None if ell < 0 else ell)


def export_csv(path, state: LatticeState, all_sites: bool = False) -> None:
    """Write x,y,z,re,im rows (nonzero sites only unless ``all_sites``)."""
    idx = np.arange(state.grid.size) if all_sites else state.support()
    xs, ys, zs = state.grid.unflat(idx)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "z", "re", "im"])
        for x, y, z, a in zip(xs, ys, zs, state.amps[idx]):
            w.writerow([int(x), int(y), int(z), repr(float(a.real)), repr(float(a.imag))])
