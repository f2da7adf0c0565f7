"""Rotate a compact |m> register by translating to the lattice and back.

A general rotation is split as ``Rz(alpha) Ry(beta) Rz(gamma)``.  The two
z-rotations are diagonal phases on the compact register; only ``Ry(beta)``
goes through the lattice:

* ``mode="isometry"``: encode with the orthonormalized Y_lm frame, rotate,
  project back (discretization error only, plus shear error);
* ``mode="circuit"``: prepare |m, Y_lm>, uncompute m by phase estimation,
  rotate, then estimate m again and un-prepare.

Every run is scored against the exact Wigner matrix.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ValidationError
from .lattice import Grid3, LatticeState, ShellSpec, decode, encode, max_offdiag, translate_isometry
from .phasest import make_backend, min_bits, translate_back, uncompute_m
from .specfun import CompactState, RotationSpec, exact_rotate
from .stateprep import translate_with_tag

MODES = ("isometry", "circuit")
BACKENDS = ("shear", "exact-oracle")


@dataclass(frozen=True)
class PipelineConfig:
    ell: int
    n: int = 64
    r0: float | None = None
    width: float = 3.0
    mode: str = "isometry"
    backend: str = "shear"
    t: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.backend not in BACKENDS:
            raise ValidationError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.ell < 0:
            raise ValidationError("ell must be non-negative")
        if self.t is not None and self.t < min_bits(self.ell):
            raise ValidationError(f"t must be >= {min_bits(self.ell)} for l={self.ell}")
        self.shell.check(self.grid)

    @property
    def grid(self) -> Grid3:
        return Grid3(self.n)

    @property
    def shell(self) -> ShellSpec:
        r0 = 0.35 * self.n if self.r0 is None else self.r0
        return ShellSpec(r0, self.width)

    @property
    def t_bits(self) -> int:
        return min_bits(self.ell) if self.t is None else self.t


@dataclass
class FidelityReport:
    fidelity: float
    leakage: float
    norm_before_renorm: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def fidelity(a: CompactState, b: CompactState) -> float:
    """|<a|b>|^2."""
    if a.ell != b.ell:
        raise ValidationError(f"l mismatch ({a.ell} vs {b.ell})")
    return float(min(1.0, abs(np.vdot(a.amps, b.amps)) ** 2))


def rotate_z_compact(state: CompactState, phi: float) -> CompactState:
    """amps[m] *= exp(-i m phi)."""
    return CompactState(state.ell, state.amps * np.exp(-1j * state.m_values * phi))


def compose_rotations(rots) -> RotationSpec:
    """Product ``R1 R2 ... Rk`` (the last one acts first), as z-y-z Euler angles."""
    R = np.eye(3)
    for r in rots:
        R = R @ r.matrix()
    return RotationSpec.from_matrix(R)


class LatticeRotator:
    """Holds the grid, isometry and rotation backend so repeated rotations
    reuse one orthonormal frame and one permutation cache."""

    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.grid = cfg.grid
        self.shell = cfg.shell
        self.isometry = translate_isometry(cfg.ell, self.grid, self.shell)
        self.backend = make_backend(cfg.backend, self.grid, self.isometry)

    def _to_lattice(self, state: CompactState):
        cfg = self.cfg
        if cfg.mode == "isometry":
            return encode(state, self.isometry).amps, 0.0
        iso = self.isometry if cfg.backend == "exact-oracle" else None
        tagged = translate_with_tag(state, self.grid, self.shell, iso)
        lat, leak = uncompute_m(tagged, cfg.t_bits, self.backend)
        return lat.amps, leak

    def _to_compact(self, amps: np.ndarray):
        cfg = self.cfg
        lat = LatticeState.normalized(self.grid, amps, cfg.ell)
        if cfg.mode == "isometry":
            out, residual = decode(lat, self.isometry)
            return out, residual**2
        return translate_back(lat, cfg.ell, cfg.t_bits, self.shell, self.backend)

    def rotate_y(self, state: CompactState, beta: float):
        """Ry(beta) through the lattice; returns the state and (leak_in, leak_out)."""
        amps, leak_in = self._to_lattice(state)
        amps = self.backend.rotate(amps, "y", beta)
        out, leak_out = self._to_compact(amps)
        return out, (leak_in, leak_out)

    def rotate(self, state: CompactState, rot: RotationSpec):
        return rotate_via_lattice(state, rot, self.cfg, rotator=self)


def rotate_via_lattice(state: CompactState, rot: RotationSpec, cfg: PipelineConfig,
                       rotator: LatticeRotator | None = None):
    """Apply ``rot`` to ``state``; returns the output and a :class:`FidelityReport`."""
    if state.ell != cfg.ell:
        raise ValidationError(f"state has l={state.ell}, config has l={cfg.ell}")
    target = exact_rotate(state, rot)
    out = rotate_z_compact(state, rot.gamma)
    diag = {"mode": cfg.mode, "backend": cfg.backend, "n": cfg.n, "ell": cfg.ell}
    leakage = 0.0
    if rot.beta != 0.0:
        rotator = rotator or LatticeRotator(cfg)
        out, (leak_in, leak_out) = rotator.rotate_y(out, rot.beta)
        leakage = 1.0 - (1.0 - leak_in) * (1.0 - leak_out)
        diag.update(
            leak_translate=leak_in,
            leak_translate_back=leak_out,
            gram_max_offdiag=max_offdiag(rotator.isometry.gram),
        )
        if cfg.mode == "circuit":
            diag["t_bits"] = cfg.t_bits
    out = rotate_z_compact(out, rot.alpha)
    report = FidelityReport(
        fidelity=fidelity(target, out),
        leakage=leakage,
        norm_before_renorm=math.sqrt(max(0.0, 1.0 - leakage)),
        diagnostics=diag,
    )
    return out, report
