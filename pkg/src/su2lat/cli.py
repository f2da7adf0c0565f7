"""Command-line experiments.

Usage: ``su2lat <subcommand> [--config FILE] [flags]``.  Data goes to
``--output`` (or stdout); a one-line summary goes to stderr.  Exit codes:
0 success, 1 validation error, 2 numerical failure.

Config files use ``key = value`` lines (keys spelled like the flags, dashes or
underscores), optionally grouped under ``[common]`` or ``[<subcommand>]``
sections.  Flags override the file.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import NumericalFailure, ValidationError
from .lattice import Grid3, ShellSpec, sample_ylm_state
from .phasest import estimate_m, min_bits, uncompute_m
from .pipeline import BACKENDS, MODES, PipelineConfig, rotate_via_lattice
from .specfun import CompactState, RotationSpec

SUBCOMMANDS = ("rotate", "fidelity-sweep", "shear-check", "prep-check", "qpe-check",
               "hyper-hadamard", "kicked-top", "selftest")
RNG_NOTE = "numpy.random.default_rng (PCG64)"


class ConfigError(ValidationError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class RunConfig:
    subcommand: str = "selftest"
    ell: int = 3
    n: int = 64
    r0: float | None = None
    width: float = 3.0
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    mode: str = "isometry"
    backend: str = "shear"
    t_bits: int | None = None
    seed: int = 0
    samples: int = 10
    ns: tuple = (32, 64, 128)
    betas: tuple = (math.pi / 8, math.pi / 4, math.pi / 2)
    thetas: int = 25
    j: int = 4
    c: float = 3.0
    p: float = math.pi / 2
    steps: int = 5
    big_n: int = 4
    output: str | None = None
    format: str | None = None

    def pipeline(self, n: int | None = None) -> PipelineConfig:
        return PipelineConfig(self.ell, self.n if n is None else n, self.r0, self.width,
                              self.mode, self.backend, self.t_bits)

    def shell(self, n: int | None = None) -> ShellSpec:
        n = self.n if n is None else n
        return ShellSpec(0.35 * n if self.r0 is None else self.r0, self.width)

    def resolved(self) -> dict:
        d = asdict(self)
        d["ns"] = list(self.ns)
        d["betas"] = list(self.betas)
        return d


def _parse_list(cast):
    def parse(text):
        if isinstance(text, (list, tuple)):
            return tuple(cast(v) for v in text)
        return tuple(cast(v) for v in str(text).replace(" ", "").split(",") if v)
    return parse


def _opt(cast):
    def parse(text):
        if text is None or str(text).lower() in ("", "none"):
            return None
        return cast(text)
    return parse


_CASTS = {
    "subcommand": str, "ell": int, "n": int, "r0": _opt(float), "width": float,
    "alpha": float, "beta": float, "gamma": float, "mode": str, "backend": str,
    "t_bits": _opt(int), "seed": int, "samples": int, "ns": _parse_list(int),
    "betas": _parse_list(float), "thetas": int, "j": int, "c": float, "p": float,
    "steps": int, "big_n": int, "output": _opt(str), "format": _opt(str),
}


def _is_pow2(n: int) -> bool:
    return 8 <= n <= 256 and not n & (n - 1)


def validate(cfg: RunConfig) -> list[str]:
    """Every violated precondition, by field name."""
    errs = []
    if cfg.subcommand not in SUBCOMMANDS:
        errs.append(f"subcommand: unknown {cfg.subcommand!r}")
    if not _is_pow2(cfg.n):
        errs.append(f"n: must be a power of two in [8, 256], got {cfg.n}")
    for n in cfg.ns:
        if not _is_pow2(n):
            errs.append(f"ns: {n} is not a power of two in [8, 256]")
    if not 0 <= cfg.ell <= 64:
        errs.append(f"ell: must be in [0, 64], got {cfg.ell}")
    if cfg.mode not in MODES:
        errs.append(f"mode: must be one of {MODES}")
    kicked_backends = ("exact", "lattice")
    allowed = kicked_backends if cfg.subcommand == "kicked-top" else BACKENDS
    if cfg.backend not in allowed:
        errs.append(f"backend: must be one of {allowed}")
    if cfg.t_bits is not None and cfg.ell >= 0 and cfg.t_bits < min_bits(cfg.ell):
        errs.append(f"t_bits: must be >= {min_bits(cfg.ell)} for ell={cfg.ell}")
    if cfg.format not in (None, "csv", "json"):
        errs.append("format: must be csv or json")
    if cfg.width <= 0:
        errs.append("width: must be positive")
    if _is_pow2(cfg.n):
        try:
            cfg.shell().check(Grid3(cfg.n))
        except ValidationError as exc:
            errs.append(f"r0: {exc}")
    for name in ("alpha", "beta", "gamma", "c", "p", "width"):
        if not math.isfinite(getattr(cfg, name)):
            errs.append(f"{name}: must be finite")
    if cfg.seed < 0:
        errs.append("seed: must be non-negative")
    if cfg.samples < 1:
        errs.append("samples: must be >= 1")
    if cfg.thetas < 2:
        errs.append("thetas: must be >= 2")
    if cfg.steps < 0:
        errs.append("steps: must be >= 0")
    if not 0 <= cfg.j <= 8:
        errs.append("j: must be in [0, 8]")
    if not 1 <= cfg.big_n <= 12:
        errs.append("big_n: must be in [1, 12]")
    return errs


def _read_file(path) -> dict:
    with open(path) as fh:
        text = fh.read()
    parser = configparser.ConfigParser(default_section="__none__", interpolation=None)
    lines = [ln.strip() for ln in text.splitlines()]
    first = next((ln for ln in lines if ln and ln[0] not in "#;"), "")
    shift = 0 if first.startswith("[") else 1
    try:
        parser.read_string("[common]\n" * shift + text, source=str(path))
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] - shift
        raise ConfigError([f"{path}: parse error at line {line}: expected 'key = value', "
                           f"got {lines[line - 1]!r}"]) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError([f"{path}: parse error at line {exc.lineno}: missing section header"]) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError([f"{path}: line {exc.lineno - shift}: duplicate key {exc.option!r}"]) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError([f"{path}: line {exc.lineno - shift}: duplicate section {exc.section!r}"]) from None
    return {s: dict(parser[s]) for s in parser.sections()}


def load_config(path=None, subcommand: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults < file ([common], then [subcommand]) < overrides, then validate."""
    raw: dict = {}
    if path is not None:
        sections = _read_file(path)
        raw.update(sections.get("common", {}))
        if subcommand and subcommand in sections:
            raw.update(sections[subcommand])
    values, errs = {}, []
    for key, text in raw.items():
        name = key.replace("-", "_")
        if name not in _CASTS:
            errs.append(f"{name}: unknown key")
            continue
        try:
            values[name] = _CASTS[name](text)
        except ValueError:
            errs.append(f"{name}: cannot parse {text!r}")
    for key, val in (overrides or {}).items():
        values[key] = val
    if subcommand:
        values["subcommand"] = subcommand
    if subcommand == "kicked-top":
        values.setdefault("backend", "lattice")
    cfg = RunConfig(**values)
    errs.extend(validate(cfg))
    if errs:
        raise ConfigError(errs)
    return cfg


# ----------------------------------------------------------------------------
# Subcommands; each returns (format, payload, summary)
# ----------------------------------------------------------------------------

def _workers() -> int:
    try:
        return max(1, int(os.environ.get("SU2LAT_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    items = list(items)
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        return list(pool.map(fn, items))


def cmd_rotate(cfg: RunConfig):
    rng = np.random.default_rng(cfg.seed)
    state = CompactState.random(cfg.ell, rng)
    rot = RotationSpec(cfg.alpha, cfg.beta, cfg.gamma)
    _, report = rotate_via_lattice(state, rot, cfg.pipeline())
    payload = {"config": cfg.resolved(), "rng": RNG_NOTE, "report": report.to_dict()}
    return "json", payload, f"fidelity={report.fidelity:.12f} leakage={report.leakage:.6f}"


def cmd_fidelity_sweep(cfg: RunConfig):
    rng = np.random.default_rng(cfg.seed)
    states = [CompactState.random(cfg.ell, rng) for _ in range(cfg.samples)]
    from .pipeline import LatticeRotator

    def point(args):
        n, beta = args
        rotator = LatticeRotator(cfg.pipeline(n))
        reps = [rotator.rotate(s, RotationSpec(0.0, beta, 0.0))[1] for s in states]
        return [cfg.ell, n, beta, cfg.mode,
                float(np.median([r.fidelity for r in reps])),
                float(np.median([r.leakage for r in reps]))]

    grid = [(n, b) for n in cfg.ns for b in cfg.betas]
    rows = _pmap(point, grid)
    header = ["ell", "n", "beta", "mode", "fidelity", "leakage"]
    return "csv", (header, rows), f"{len(rows)} sweep points"


def cmd_shear_check(cfg: RunConfig):
    from .shear import displacement_stats, is_bijection, rotation_2d, rotation_3d

    thetas = np.linspace(-math.pi / 2, math.pi / 2, cfg.thetas)
    grid = Grid3(cfg.n)

    def point(theta):
        p2 = rotation_2d(grid, ("x", "y"), theta)
        p3 = rotation_3d(grid, "z", theta)
        st = displacement_stats(p3, theta, cfg.n / 4)
        return [float(theta), cfg.n, st.max, st.mean, str(is_bijection(p2) and is_bijection(p3)).lower()]

    rows = _pmap(point, thetas)
    ok = all(r[4] == "true" for r in rows)
    header = ["theta", "n", "max_disp", "mean_disp", "bijective"]
    return "csv", (header, rows), f"{len(rows)} angles, all bijective={ok}"


def cmd_prep_check(cfg: RunConfig):
    from .stateprep import prepare_ylm_lattice

    grid, shell = Grid3(cfg.n), cfg.shell()
    jobs = [(l, m) for l in range(cfg.ell + 1) for m in range(-l, l + 1)]

    def point(job):
        l, m = job
        a = prepare_ylm_lattice(l, m, grid, shell).amps
        b = sample_ylm_state(l, m, grid, shell).amps
        return [l, m, cfg.n, float(np.max(np.abs(a - b)))]

    rows = _pmap(point, jobs)
    worst = max(r[3] for r in rows)
    return "csv", (["ell", "m", "n", "max_abs_err"], rows), f"max_abs_err={worst:.3e}"


def cmd_qpe_check(cfg: RunConfig):
    from .lattice import translate_isometry
    from .stateprep import translate_with_tag

    grid, shell = Grid3(cfg.n), cfg.shell()
    t = cfg.t_bits or min_bits(cfg.ell)
    iso = translate_isometry(cfg.ell, grid, shell)
    exact = cfg.backend == "exact-oracle"

    def point(m):
        state = iso.column_state(m) if exact else sample_ylm_state(cfg.ell, m, grid, shell)
        pe = estimate_m(state, cfg.ell, t, cfg.backend, iso)
        tagged = translate_with_tag(CompactState.basis(cfg.ell, m), grid, shell, iso if exact else None)
        _, leak = uncompute_m(tagged, t, cfg.backend, iso)
        return [cfg.ell, m, cfg.n, t, cfg.backend, pe.probability(m), leak]

    rows = _pmap(point, range(-cfg.ell, cfg.ell + 1))
    header = ["ell", "m", "n", "t", "backend", "p_correct", "leakage"]
    return "csv", (header, rows), f"min p_correct={min(r[5] for r in rows):.6f}"


def cmd_hyper_hadamard(cfg: RunConfig):
    from .symm import HADAMARD, hyper_hadamard, symmetric_restrict

    N = cfg.big_n
    M = hyper_hadamard(N)
    dev = float(np.max(np.abs(M - symmetric_restrict(HADAMARD, N))))
    header = [f"h{k}" for k in range(N + 1)]
    rows = [[float(v) for v in row] for row in M]
    return "csv", (header, rows), f"N={N} deviation_from_bruteforce={dev:.3e}"


def cmd_kicked_top(cfg: RunConfig):
    from .kickedtop import KickedTopParams, kicked_top_run

    params = KickedTopParams(cfg.j, cfg.c, cfg.p, cfg.steps)
    other = "exact"
    if cfg.backend == "lattice":
        other = PipelineConfig(cfg.j, cfg.n, cfg.r0, cfg.width, "isometry", "shear", cfg.t_bits)
    run = kicked_top_run(CompactState.basis(cfg.j, cfg.j), params, ("exact", other))
    rows = [list(r) for r in run.rows()]
    header = ["step", "fidelity", "jz_exact", "jz_lattice", "leakage"]
    return "csv", (header, rows), f"final fidelity={run.fidelity[-1]:.12f}"


def selftest_checks():
    """Quick invariant checks; yields (name, passed)."""
    from .kickedtop import kick_phase
    from .shear import rotation_90, shear_2d
    from .specfun import wigner_oracle, ylm
    from .stateprep import TargetDensity, apply_prep, build_prep_plan
    from .symm import add_translate, hyper_hadamard

    g = Grid3(8)
    yield "ylm_00_constant", abs(ylm(0, 0, 0.4, 2.0) - 1 / math.sqrt(4 * math.pi)) < 1e-15
    yield "wigner_identity", bool(np.allclose(wigner_oracle(5, RotationSpec()).entries, np.eye(11), atol=1e-14))
    yield "shear_zero_identity", shear_2d(g, ("x", "y"), "x", 0.0).is_identity()
    four = rotation_90(g, "x", 1)
    yield "four_quarter_turns", four.then(four).then(four).then(four).is_identity()
    psi = apply_prep(build_prep_plan(TargetDensity(np.full(16, 1 / 16))))
    yield "prep_uniform", bool(np.allclose(psi, 0.25, atol=1e-15))
    yield "hyper_hadamard_n1", bool(np.allclose(hyper_hadamard(1), [[1, 1], [1, -1]] / np.sqrt(2)))
    top = add_translate(2, 1, 1)
    yield "add_translate_top", bool(abs(top[-1] - 1) < 1e-15 and np.count_nonzero(top) == 1)
    s = CompactState.random(3, np.random.default_rng(0))
    _, rep = rotate_via_lattice(s, RotationSpec(0.7, 0.0, -0.2), PipelineConfig(3, 64))
    yield "rotate_beta0_exact", abs(rep.fidelity - 1) < 1e-12
    yield "kick_c0_identity", bool(np.array_equal(kick_phase(s, 0.0).amps, s.amps))


def cmd_selftest(cfg: RunConfig):
    rows = [[name, str(bool(ok)).lower()] for name, ok in selftest_checks()]
    failed = [r[0] for r in rows if r[1] != "true"]
    if failed:
        raise NumericalFailure(f"selftest failed: {', '.join(failed)}")
    return "csv", (["check", "passed"], rows), f"{len(rows)} checks passed"


COMMANDS = {
    "rotate": cmd_rotate, "fidelity-sweep": cmd_fidelity_sweep, "shear-check": cmd_shear_check,
    "prep-check": cmd_prep_check, "qpe-check": cmd_qpe_check, "hyper-hadamard": cmd_hyper_hadamard,
    "kicked-top": cmd_kicked_top, "selftest": cmd_selftest,
}


# ----------------------------------------------------------------------------
# Output and argument parsing
# ----------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def render(cfg: RunConfig, kind: str, payload) -> str:
    fmt = cfg.format or kind
    if kind == "json":
        if fmt == "csv":
            rep = payload["report"]
            payload = (["fidelity", "leakage", "norm_before_renorm"],
                       [[rep["fidelity"], rep["leakage"], rep["norm_before_renorm"]]])
        else:
            return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    header, rows = payload
    if fmt == "json":
        doc = {"config": cfg.resolved(), "rng": RNG_NOTE,
               "rows": [dict(zip(header, [_fmt(v) for v in r])) for r in rows]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(cfg.resolved(), sort_keys=True) + "\n")
    buf.write(f"# rng: {RNG_NOTE}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError([message])


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    common.add_argument("--config", dest="config_file", default=None, help="key = value config file")
    common.add_argument("--ell", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--r0", type=float)
    common.add_argument("--width", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--gamma", type=float)
    common.add_argument("--mode", type=str)
    common.add_argument("--backend", type=str)
    common.add_argument("--t-bits", dest="t_bits", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--ns", type=_parse_list(int))
    common.add_argument("--betas", type=_parse_list(float))
    common.add_argument("--thetas", type=int)
    common.add_argument("--j", type=int)
    common.add_argument("--c", type=float)
    common.add_argument("--p", type=float)
    common.add_argument("--steps", type=int)
    common.add_argument("--N", dest="big_n", type=int)
    common.add_argument("--output", "-o", type=str)
    common.add_argument("--format", type=str)
    parser = _Parser(prog="su2lat", description="Lattice SU(2) rotation experiments")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def run(argv=None) -> int:
    try:
        ns = vars(build_parser().parse_args(argv))
        sub = ns.pop("subcommand")
        path = ns.pop("config_file", None)
        cfg = load_config(path, sub, ns)
        kind, payload, summary = COMMANDS[sub](cfg)
        text = render(cfg, kind, payload)
        if cfg.output:
            with open(cfg.output, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        print(f"su2lat {sub}: {summary}", file=sys.stderr)
        return 0
    except ConfigError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
