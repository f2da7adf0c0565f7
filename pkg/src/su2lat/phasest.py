"""Phase estimation of the magnetic quantum number on a lattice state.

The unitary whose phase is estimated is the lattice rotation about z by
``-2 pi / 2**t``: under the active convention a rotation by ``phi`` multiplies
Y_lm by ``exp(-i m phi)``, so this choice gives eigenphase ``m / 2**t`` and the
ancilla outcome ``a = m mod 2**t``.  Outcomes ``a >= 2**(t-1)`` decode to
negative m.

The circuit (Hadamards, controlled ``U^(2^k)``, inverse QFT) is simulated in
closed form: the ancilla-``a`` branch of the output is
``A_a psi = 2**-t * sum_j exp(-2 pi i a j / 2**t) U^j psi``.
Controlled powers are rotations by the doubled angle, not repeated
applications of U.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LeakageError, PrecisionError, ValidationError
from .lattice import Grid3, LatticeState, ShellSpec, TranslateIsometry
from .shear import LatticePermutation, permute_amps, rotation_3d
from .specfun import CompactState, wigner_small_d
from .stateprep import TaggedState, prepare_ylm_lattice


def min_bits(ell: int) -> int:
    return max(1, math.ceil(math.log2(2 * ell + 2)))


def decode_outcome(a: int, t: int) -> int:
    return a - 2**t if a >= 2 ** (t - 1) else a


def lattice_z_rotation(grid: Grid3, phi: float) -> LatticePermutation:
    """Rotation by phi about z; exact permutation for multiples of pi/2, sheared otherwise."""
    return rotation_3d(grid, "z", phi)


class ShearBackend:
    """Rotations as site permutations (exact quarter-turns, three-shear otherwise)."""

    name = "shear"

    def __init__(self, grid: Grid3):
        self.grid = grid
        self._cache: dict = {}

    def perm(self, axis: str, angle: float) -> LatticePermutation:
        key = (axis, float(angle))
        if key not in self._cache:
            self._cache[key] = rotation_3d(self.grid, axis, angle)
        return self._cache[key]

    def rotate(self, amps: np.ndarray, axis: str, angle: float) -> np.ndarray:
        return permute_amps(amps, self.perm(axis, angle))


class ExactBackend:
    """Exact rotation on the span of an isometry, identity on its complement.

    ``U = I + T (D - I) T^dagger``; the isometry columns are exact eigenvectors
    of the z-rotations.
    """

    name = "exact-oracle"

    def __init__(self, isometry: TranslateIsometry):
        self.isometry = isometry
        self.grid = isometry.grid
        self._m = np.arange(-isometry.ell, isometry.ell + 1)

    def matrix(self, axis: str, angle: float) -> np.ndarray:
        if axis == "z":
            return np.diag(np.exp(-1j * self._m * angle))
        if axis == "y":
            return wigner_small_d(self.isometry.ell, angle)
        raise ValidationError(f"exact backend supports z and y, not {axis!r}")

    def rotate(self, amps: np.ndarray, axis: str, angle: float) -> np.ndarray:
        T = self.isometry
        c = T.project(amps)
        delta = self.matrix(axis, angle) @ c - c
        out = amps.copy()
        out[T.sites] += T.columns @ delta
        return out


def make_backend(backend, grid: Grid3, isometry: TranslateIsometry | None = None):
    if not isinstance(backend, str):
        return backend
    if backend == "shear":
        return ShearBackend(grid)
    if backend in ("exact", "exact-oracle"):
        if isometry is None:
            raise ValidationError("the exact-oracle backend needs a TranslateIsometry")
        return ExactBackend(isometry)
    raise ValidationError(f"unknown backend {backend!r}")


def _stage_angle(k: int, t: int) -> float:
    return -(2**k) * 2 * math.pi / 2**t


def _powers(amps: np.ndarray, t: int, backend) -> np.ndarray:
    """Stack of U^j psi, j = 0..2**t - 1; stage k = 0 acts first."""
    N = 2**t
    out = np.empty((N, amps.size), dtype=complex)
    out[0] = amps
    for j in range(1, N):
        hi = j.bit_length() - 1
        out[j] = backend.rotate(out[j - (1 << hi)], "z", _stage_angle(hi, t))
    return out


def _adjoint_powers(amps: np.ndarray, t: int, backend) -> np.ndarray:
    """Stack of (U^j)^dagger chi, j = 0..2**t - 1."""
    N = 2**t
    out = np.empty((N, amps.size), dtype=complex)
    out[0] = amps
    for j in range(1, N):
        lo = (j & -j).bit_length() - 1
        out[j] = backend.rotate(out[j - (1 << lo)], "z", -_stage_angle(lo, t))
    return out


def branch(amps: np.ndarray, a: int, t: int, backend) -> np.ndarray:
    """A_a psi, the lattice component left with ancilla outcome ``a``."""
    N = 2**t
    w = np.exp(-2j * np.pi * a * np.arange(N) / N)
    return w @ _powers(amps, t, backend) / N


def branch_adjoint(chi: np.ndarray, a: int, t: int, backend) -> np.ndarray:
    """A_a^dagger chi: inverse phase estimation projected onto ancilla |0>."""
    N = 2**t
    w = np.exp(2j * np.pi * a * np.arange(N) / N)
    return w @ _adjoint_powers(chi, t, backend) / N


@dataclass
class PhaseEstimate:
    t: int
    distribution: np.ndarray
    m: int
    confidence: float
    backend: str = ""

    def probability(self, m: int) -> float:
        return float(self.distribution[m % 2**self.t])

    def decoded(self) -> dict:
        """Outcome probabilities keyed by decoded m."""
        return {decode_outcome(a, self.t): float(p) for a, p in enumerate(self.distribution)}


def _check_bits(ell: int, t: int) -> None:
    if t < min_bits(ell):
        raise PrecisionError(f"t={t} too small for l={ell}; need t >= {min_bits(ell)}")


def estimate_m(state: LatticeState, ell: int, t: int, backend="shear",
               isometry: TranslateIsometry | None = None) -> PhaseEstimate:
    """Outcome distribution of textbook phase estimation of the z-rotation."""
    _check_bits(ell, t)
    be = make_backend(backend, state.grid, isometry)
    comps = np.fft.fft(_powers(state.amps, t, be), axis=0) / 2**t
    dist = np.einsum("ij,ij->i", comps.conj(), comps).real
    dist = dist / math.fsum(dist.tolist())
    a = int(np.argmax(dist))
    return PhaseEstimate(t, dist, decode_outcome(a, t), float(dist[a]), be.name)


def uncompute_m(tagged: TaggedState, t: int, backend="shear",
                isometry: TranslateIsometry | None = None) -> tuple[LatticeState, float]:
    """|m, Y_lm> -> |Y_lm>: estimate m into ancillas, subtract it from the tag,
    run the estimation backwards, and keep the tag = ancilla = 0 branch.

    The kept lattice state is ``sum_a A_a^dagger A_a psi_a`` where ``psi_a`` is
    the block tagged ``a``; leakage is the probability outside that branch.
    """
    ell = tagged.ell
    _check_bits(ell, t)
    be = make_backend(backend, tagged.grid, isometry)
    out = np.zeros(tagged.grid.size, dtype=complex)
    total = 0.0
    for k in range(2 * ell + 1):
        psi = tagged.blocks[k]
        nrm2 = float(np.vdot(psi, psi).real)
        if nrm2 == 0.0:
            continue
        total += nrm2
        a = (k - ell) % 2**t
        out += branch_adjoint(branch(psi, a, t, be), a, t, be)
    kept = float(np.vdot(out, out).real)
    leakage = max(0.0, total - kept) / total
    if leakage > 0.5:
        raise LeakageError(leakage)
    return LatticeState.normalized(tagged.grid, out, ell), leakage


def translate_back(state: LatticeState, ell: int, t: int, shell: ShellSpec, backend="shear",
                   isometry: TranslateIsometry | None = None) -> tuple[CompactState, float]:
    """Inverse of the tagged translation: estimate m, copy it to a fresh tag,
    uncompute the ancillas, then un-prepare Y_lm conditioned on the tag.

    Amplitude of |m> is ``<Y_lm | A_a^dagger A_a psi>`` with ``a = m mod 2**t``.
    With the exact backend the isometry columns stand in for Y_lm.
    """
    _check_bits(ell, t)
    be = make_backend(backend, state.grid, isometry)
    use_columns = isinstance(be, ExactBackend)
    coeffs = np.zeros(2 * ell + 1, dtype=complex)
    for k in range(2 * ell + 1):
        m = k - ell
        a = m % 2**t
        kept = branch_adjoint(branch(state.amps, a, t, be), a, t, be)
        if use_columns:
            basis = be.isometry.column_state(m).amps
        else:
            basis = prepare_ylm_lattice(ell, m, state.grid, shell).amps
        coeffs[k] = np.vdot(basis, kept)
    kept_prob = float(np.vdot(coeffs, coeffs).real)
    leakage = max(0.0, 1.0 - kept_prob)
    if leakage > 0.5:
        raise LeakageError(leakage)
    return CompactState.from_vector(ell, coeffs), leakage
