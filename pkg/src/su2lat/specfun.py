"""Exact special functions and the Wigner rotation oracle.

Conventions used throughout the package:

* Euler angles are z-y-z, active: ``R = Rz(alpha) @ Ry(beta) @ Rz(gamma)``.
* ``D(alpha, beta, gamma) = exp(-i alpha Jz) exp(-i beta Jy) exp(-i gamma Jz)``
  in the basis ``m = -l, ..., +l`` (index ``m + l``).  A z-rotation by ``phi``
  therefore multiplies ``amps[m]`` by ``exp(-i m phi)``.
* Spherical harmonics carry the Condon-Shortley phase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ValidationError


class DomainError(ValidationError):
    """Argument outside the domain of a special function."""


def _two_ell(ell) -> int:
    """Return 2*ell as an int, rejecting anything that is not a half-integer >= 0."""
    two = Fraction(ell).limit_denominator(2) * 2
    if two.denominator != 1 or abs(float(two) - 2 * float(ell)) > 1e-12 or two < 0:
        raise DomainError(f"ell must be a non-negative integer or half-integer, got {ell!r}")
    return int(two)


# ----------------------------------------------------------------------------
# Rotations
# ----------------------------------------------------------------------------

def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


@dataclass(frozen=True)
class RotationSpec:
    """A rotation given by z-y-z Euler angles (radians, active convention)."""

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def identity(cls) -> "RotationSpec":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def z(cls, angle: float) -> "RotationSpec":
        return cls(angle, 0.0, 0.0)

    @classmethod
    def y(cls, angle: float) -> "RotationSpec":
        return cls(0.0, angle, 0.0)

    @classmethod
    def from_axis_angle(cls, axis, angle: float) -> "RotationSpec":
        axis = np.asarray(axis, dtype=float)
        if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1.0) > 1e-12:
            raise ValueError("axis must be a unit 3-vector (norm 1 within 1e-12)")
        if not math.isfinite(angle):
            raise ValueError("angle must be finite")
        kx, ky, kz = axis
        K = np.array([[0.0, -kz, ky], [kz, 0.0, -kx], [-ky, kx, 0.0]])
        R = np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * (K @ K)
        return cls.from_matrix(R)

    @classmethod
    def from_matrix(cls, R) -> "RotationSpec":
        """Extract z-y-z Euler angles; at gimbal lock (beta = 0 or pi) gamma is set to 0."""
        R = np.asarray(R, dtype=float)
        sb = math.hypot(R[0, 2], R[1, 2])
        beta = math.atan2(sb, R[2, 2])
        if sb > 1e-12:
            alpha = math.atan2(R[1, 2], R[0, 2])
            gamma = math.atan2(R[2, 1], -R[2, 0])
        elif R[2, 2] > 0:
            alpha, gamma = math.atan2(R[1, 0], R[0, 0]), 0.0
        else:
            alpha, gamma = math.atan2(-R[1, 0], -R[0, 0]), 0.0
        return cls(alpha, beta, gamma)

    def matrix(self) -> np.ndarray:
        return rot_z(self.alpha) @ rot_y(self.beta) @ rot_z(self.gamma)

    def inverse(self) -> "RotationSpec":
        return RotationSpec(-self.gamma, -self.beta, -self.alpha)

    def su2(self) -> np.ndarray:
        """The spin-1/2 matrix in the basis (m=+1/2, m=-1/2), i.e. qubit order |0>, |1>."""
        return wigner_oracle(0.5, self).entries[::-1, ::-1]


# ----------------------------------------------------------------------------
# Legendre functions and spherical harmonics
# ----------------------------------------------------------------------------

def assoc_legendre_norm(ell: int, m: int, x, sin_theta=None):
    """Orthonormalized associated Legendre function including the Condon-Shortley phase.

    ``assoc_legendre_norm(l, m, cos(theta)) * exp(i m phi)`` is the unit-norm
    spherical harmonic Y_lm.  Negative ``m`` follows ``P_{l,-m} = (-1)^m P_{lm}``.
    Evaluated by the normalized three-term recurrence in ``l``; no factorials.
    Accepts scalar or array ``x``.  Pass ``sin_theta`` when it is known to
    avoid the cancellation in sqrt(1 - x^2) near the poles.
    """
    ell, m = int(ell), int(m)
    if ell < 0 or abs(m) > ell:
        raise DomainError(f"need 0 <= |m| <= l, got l={ell}, m={m}")
    x_arr = np.asarray(x, dtype=float)
    if np.any(np.abs(x_arr) > 1.0) or not np.all(np.isfinite(x_arr)):
        raise DomainError("x must lie in [-1, 1]")
    sign = -1.0 if (m < 0 and m % 2) else 1.0
    m = abs(m)

    # P_mm = (-1)^m sqrt((2m+1)/(4pi) * prod_{k<=m} (2k-1)/(2k)) (1-x^2)^(m/2)
    if sin_theta is None:
        s = np.sqrt(np.clip(1.0 - x_arr * x_arr, 0.0, None))
    else:
        s = np.abs(np.asarray(sin_theta, dtype=float))
    pmm = np.full_like(x_arr, math.sqrt(1.0 / (4.0 * math.pi)))
    for k in range(1, m + 1):
        pmm = -pmm * math.sqrt((2 * k + 1) / (2.0 * k)) * s
    if ell == m:
        out = pmm
    else:
        p_prev, p_cur = pmm, x_arr * math.sqrt(2 * m + 3) * pmm
        for l in range(m + 2, ell + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            p_prev, p_cur = p_cur, a * (x_arr * p_cur - b * p_prev)
        out = p_cur
    out = sign * out
    return float(out) if np.ndim(out) == 0 else out


def ylm(ell: int, m: int, theta, phi):
    """Complex spherical harmonic Y_lm(theta, phi), Condon-Shortley phase."""
    p = assoc_legendre_norm(ell, m, np.cos(theta), np.sin(theta))
    val = p * np.exp(1j * m * np.asarray(phi, dtype=float))
    return complex(val) if np.ndim(val) == 0 else val


# ----------------------------------------------------------------------------
# Angular momentum matrices and the Wigner oracle
# ----------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _spin_ops(two_ell: int):
    j = two_ell / 2.0
    m = np.arange(-two_ell, two_ell + 1, 2) / 2.0
    # <m+1|J+|m> = sqrt(j(j+1) - m(m+1))
    jp = np.diag(np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1)), k=-1).astype(complex)
    jm = jp.conj().T
    jx = (jp + jm) / 2.0
    jy = (jp - jm) / 2.0j
    jz = np.diag(m).astype(complex)
    for op in (jx, jy, jz):
        op.setflags(write=False)
    return jx, jy, jz


def spin_operators(ell):
    """Return (Jx, Jy, Jz) for spin ``ell`` in the ascending-m basis."""
    return _spin_ops(_two_ell(ell))


@lru_cache(maxsize=None)
def _jy_eig(two_ell: int):
    w, v = np.linalg.eigh(_spin_ops(two_ell)[1])
    return w, v


@dataclass(frozen=True, eq=False)
class WignerMatrix:
    """Exact rotation matrix in the |l, m> basis (m ascending).

    ``two_ell`` stores 2l so half-integer spins are exact.
    """

    two_ell: int
    entries: np.ndarray

    @property
    def ell(self) -> float:
        return self.two_ell / 2

    @property
    def dim(self) -> int:
        return self.two_ell + 1

    def __matmul__(self, other):
        if isinstance(other, WignerMatrix):
            return self.entries @ other.entries
        return self.entries @ other

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def wigner_small_d(ell, beta: float) -> np.ndarray:
    two = _two_ell(ell)
    w, v = _jy_eig(two)
    return (v * np.exp(-1j * beta * w)) @ v.conj().T


def wigner_oracle(ell, rot: RotationSpec) -> WignerMatrix:
    """D(alpha, beta, gamma) = exp(-i a Jz) exp(-i b Jy) exp(-i g Jz).

    ``exp(-i b Jy)`` comes from the eigendecomposition of the ladder-operator
    built Jy.  Accepts integer or half-integer ``ell`` up to 64.
    """
    two = _two_ell(ell)
    if two > 128:
        raise DomainError("ell > 64 is not supported")
    m = np.arange(-two, two + 1, 2) / 2.0
    d = wigner_small_d(two / 2, rot.beta)
    left = np.exp(-1j * rot.alpha * m)
    right = np.exp(-1j * rot.gamma * m)
    entries = left[:, None] * d * right[None, :]
    entries.setflags(write=False)
    return WignerMatrix(two, entries)


# ----------------------------------------------------------------------------
# Compact register
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CompactState:
    """Amplitudes over m = -l..+l, stored at index m + l."""

    ell: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.shape != (2 * int(self.ell) + 1,):
            raise ValueError(f"expected {2 * int(self.ell) + 1} amplitudes, got shape {amps.shape}")
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"CompactState must be normalized (norm={nrm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "ell", int(self.ell))
        object.__setattr__(self, "amps", amps)

    @classmethod
    def basis(cls, ell: int, m: int) -> "CompactState":
        if abs(m) > ell:
            raise DomainError(f"|m| > l ({m}, {ell})")
        amps = np.zeros(2 * ell + 1, dtype=complex)
        amps[m + ell] = 1.0
        return cls(ell, amps)

    @classmethod
    def from_vector(cls, ell: int, vec) -> "CompactState":
        """Normalize ``vec`` and wrap it."""
        vec = np.asarray(vec, dtype=complex)
        return cls(ell, vec / np.linalg.norm(vec))

    @classmethod
    def random(cls, ell: int, rng: np.random.Generator) -> "CompactState":
        v = rng.normal(size=2 * ell + 1) + 1j * rng.normal(size=2 * ell + 1)
        return cls.from_vector(ell, v)

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(-self.ell, self.ell + 1)


def exact_rotate(state: CompactState, rot: RotationSpec) -> CompactState:
    """Apply the Wigner matrix of ``rot`` to ``state``."""
    return CompactState(state.ell, wigner_oracle(state.ell, rot).entries @ state.amps)
