"""Symmetric subspace of N qubits, the hyper-Hadamard, and angular momentum addition.

Dicke state ``h`` (uniform superposition of all N-bit strings of Hamming
weight h) is aligned with ``|j = N/2, m = N/2 - h>``; qubit |0> is m = +1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NumericalFailure, ValidationError
from .specfun import RotationSpec, _two_ell, spin_operators, wigner_oracle

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


class DegeneracyError(NumericalFailure):
    pass


# ----------------------------------------------------------------------------
# Symmetric subspace
# ----------------------------------------------------------------------------

@lru_cache(maxsize=16)
def _weights(N: int) -> np.ndarray:
    idx = np.arange(2**N)
    w = np.zeros(2**N, dtype=np.int64)
    for k in range(N):
        w += (idx >> k) & 1
    return w


@dataclass(frozen=True, eq=False)
class SymmetricBasis:
    """Orthonormal Dicke basis; ``vectors[:, h]`` is the weight-h state over 2**N amplitudes."""

    n_qubits: int
    vectors: np.ndarray

    @classmethod
    def build(cls, N: int) -> "SymmetricBasis":
        if not 1 <= N <= 16:
            raise ValidationError(f"explicit symmetric basis needs 1 <= N <= 16, got {N}")
        w = _weights(N)
        V = np.zeros((2**N, N + 1))
        for h in range(N + 1):
            V[w == h, h] = 1.0 / math.sqrt(math.comb(N, h))
        V.setflags(write=False)
        return cls(N, V)

    @property
    def dim(self) -> int:
        return self.n_qubits + 1


def krawtchouk(k: int, x: int, N: int) -> int:
    """Binary Krawtchouk polynomial K_k(x; N) = sum_j (-1)^j C(x, j) C(N - x, k - j)."""
    return sum((-1) ** j * math.comb(x, j) * math.comb(N - x, k - j) for j in range(0, k + 1))


def hyper_hadamard(N: int) -> np.ndarray:
    """H^{(x)N} restricted to the symmetric subspace (Dicke basis, h = 0..N).

    Entry (h', h) = 2^(-N/2) K_{h'}(h; N) sqrt(C(N, h) / C(N, h')), from
    counting pairs (x, y) of weights (h, h') by their overlap x.y.
    """
    if not 1 <= N <= 30:
        raise ValidationError(f"N must be in [1, 30], got {N}")
    M = np.empty((N + 1, N + 1))
    for hp in range(N + 1):
        for h in range(N + 1):
            M[hp, h] = krawtchouk(hp, h, N) * math.sqrt(math.comb(N, h) / math.comb(N, hp))
    return M / 2 ** (N / 2)


def _tensor_apply(U: np.ndarray, vec: np.ndarray, N: int) -> np.ndarray:
    """Apply U to every qubit of a 2**N vector."""
    psi = vec.reshape((2,) * N)
    for k in range(N):
        psi = np.moveaxis(np.tensordot(U, psi, axes=([1], [k])), 0, k)
    return psi.reshape(-1)


def symmetric_restrict(U, N: int, return_leakage: bool = False):
    """Matrix of U^{(x)N} on the Dicke basis, by brute force over 2**N amplitudes.

    Raises if the symmetric subspace is not invariant to 1e-12 (it always is for
    a genuine tensor power, so this guards the construction itself).
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (2, 2) or np.max(np.abs(U.conj().T @ U - np.eye(2))) > 1e-10:
        raise ValidationError("U must be a 2x2 unitary")
    if not 1 <= N <= 12:
        raise ValidationError(f"brute-force restriction needs 1 <= N <= 12, got {N}")
    S = SymmetricBasis.build(N).vectors
    images = np.stack([_tensor_apply(U, S[:, h].astype(complex), N) for h in range(N + 1)], axis=1)
    M = S.T @ images
    leak = float(np.max(np.abs(images - S @ M)))
    if leak > 1e-12:
        raise NumericalFailure(f"symmetric subspace not invariant (leakage {leak:.3g})")
    return (M, leak) if return_leakage else M


def symmetric_vs_wigner(N: int, rot: RotationSpec) -> float:
    """Max entrywise gap between the restricted tensor power and D^{N/2}.

    The Dicke index h maps to Wigner index N - h (m = N/2 - h), i.e. a reversal.
    """
    M = symmetric_restrict(rot.su2(), N)
    D = wigner_oracle(N / 2, rot).entries[::-1, ::-1]
    return float(np.max(np.abs(M - D)))


# ----------------------------------------------------------------------------
# Adding angular momenta
# ----------------------------------------------------------------------------

def _m_values(two_ell: int) -> np.ndarray:
    return np.arange(-two_ell, two_ell + 1, 2) / 2.0


def add_translate(M, ell, ell2) -> np.ndarray:
    """c * sum_m |m, M - m> over all allowed m; flat index (m + l)(2l' + 1) + (m' + l')."""
    t1, t2 = _two_ell(ell), _two_ell(ell2)
    m1, m2 = _m_values(t1), _m_values(t2)
    if abs(M) > (t1 + t2) / 2 + 1e-12:
        raise ValidationError(f"|M| = {abs(M)} exceeds l + l' = {(t1 + t2) / 2}")
    hit = np.abs(m1[:, None] + m2[None, :] - M) < 1e-9
    count = int(hit.sum())
    if count == 0:
        raise ValidationError(f"no (m, M - m) pairs for M={M}")
    return (hit / math.sqrt(count)).astype(complex).reshape(-1)


@dataclass(frozen=True, eq=False)
class CGDecomposition:
    """``blocks`` lists (L, isometry) with isometry columns ordered M = -L..L."""

    ell: float
    ell2: float
    blocks: tuple

    def isometry(self) -> np.ndarray:
        return np.hstack([iso for _, iso in self.blocks])

    def block(self, L) -> np.ndarray:
        for LL, iso in self.blocks:
            if abs(LL - L) < 1e-9:
                return iso
        raise KeyError(L)

    def coefficient(self, m1, m2, L, M) -> float:
        """<l m1; l' m2 | L M>."""
        iso = self.block(L)
        t2 = round(2 * self.ell2)
        row = int(round(m1 + self.ell)) * (t2 + 1) + int(round(m2 + self.ell2))
        return float(iso[row, int(round(M + L))].real)


@lru_cache(maxsize=64)
def _cg(t1: int, t2: int) -> CGDecomposition:
    ell, ell2 = t1 / 2, t2 / 2
    A, B = spin_operators(ell), spin_operators(ell2)
    I1, I2 = np.eye(t1 + 1), np.eye(t2 + 1)
    J = [np.kron(a, I2) + np.kron(I1, b) for a, b in zip(A, B)]
    J2 = sum(j @ j for j in J)
    Jz = J[2]
    Jm = J[0] - 1j * J[1]
    w, V = np.linalg.eigh(J2)
    expected = [(t1 + t2 - 2 * k) / 2 for k in range(min(t1, t2) + 1)][::-1]
    blocks = []
    used = 0
    for L in expected:
        lam = L * (L + 1)
        sel = np.flatnonzero(np.abs(w - lam) <= 1e-8 * max(1.0, lam))
        if sel.size != int(round(2 * L + 1)):
            raise DegeneracyError(f"eigenvalue {lam} has multiplicity {sel.size}, expected {2 * L + 1}")
        used += sel.size
        P = V[:, sel]
        # highest weight inside the block, phase fixed by <l l; l' L-l | L L> > 0
        zw, zv = np.linalg.eigh(P.conj().T @ Jz @ P)
        top = P @ zv[:, np.argmax(zw)]
        row = t1 * (t2 + 1) + int(round(L - ell + ell2))
        top = top * (abs(top[row]) / top[row])
        cols = [top]
        for _ in range(int(round(2 * L))):
            nxt = Jm @ cols[-1]
            cols.append(nxt / np.linalg.norm(nxt))
        iso = np.stack(cols[::-1], axis=1)
        iso.setflags(write=False)
        blocks.append((L, iso))
    if used != (t1 + 1) * (t2 + 1):
        raise DegeneracyError("blocks do not exhaust the product space")
    return CGDecomposition(ell, ell2, tuple(blocks))


def cg_oracle(ell, ell2) -> CGDecomposition:
    """Decompose spin l (x) spin l' into total-L blocks by diagonalizing total J^2.

    Lowering within a block keeps ``<L, M-1|J-|L, M>`` positive, the standard
    phase convention.
    """
    t1, t2 = _two_ell(ell), _two_ell(ell2)
    if t1 > 12 or t2 > 12:
        raise ValidationError("cg_oracle supports l, l' <= 6")
    return _cg(t1, t2)


def add_translate_overlap(M, ell, ell2) -> float:
    """|<CG image of |l + l', M>| add_translate(M)>|: how far the uniform
    superposition is from the true coupled state."""
    top = (_two_ell(ell) + _two_ell(ell2)) / 2
    iso = cg_oracle(ell, ell2).block(top)
    col = iso[:, int(round(M + top))]
    return float(abs(np.vdot(col, add_translate(M, ell, ell2))))
