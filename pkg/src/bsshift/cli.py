"""Command-line driver: spectrum sweeps, figure tables, convergence and verification.

Configuration is a flat ``key = value`` text file with ``#`` comments::

    delta_e = 11
    n_ref = 60
    n_max = 200
    g_min = 0
    g_max = 1
    g_steps = 101
    k_list = 6, 7, 8, 9, 10

Every CSV begins with ``#`` lines echoing the full configuration and the tool
version.  Floats are written with 17 significant digits.

Exit codes: 0 success, 1 invariant failure, 2 partial results with flagged
rows, 64 configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import logging
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np
from scipy import linalg

from . import __version__
from .fockspin import (FockSpinBasis, block_eigenvalues, build_hamiltonian, dump_spectrum,
                       load_spectrum, parity_operator)
from .grid1d import GridEigenproblem, grid_dressed_gap, wkb_dressed_energy
from .model import ModelParams, ParameterError, coupling_for_g
from .resonance import (degenerate_pt_splitting, exact_splitting, resonant_pair,
                        shirley_splitting)
from .rotation import (QuadratureCalculus, build_unitary, decomposition_residual,
                       rotate_hamiltonian)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_PARTIAL = 2
EXIT_CONFIG = 64


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    delta_e: float = 11.0
    hbar_omega0: float = 1.0
    coupling_u: float = 0.0
    n_ref: float = 60.0
    n_max: int = 200
    g_min: float = 0.0
    g_max: float = 1.0
    g_steps: int = 101
    k_list: tuple[int, ...] = (6, 7, 8, 9, 10)
    tol_quad: float = 1e-12
    tol_eig: float = 1e-9
    tol_root: float = 1e-8
    output_dir: str = "out"
    cache: bool = True

    def __post_init__(self):
        if not self.g_min < self.g_max:
            raise ConfigError(f"g_min ({self.g_min}) must be below g_max ({self.g_max})")
        if self.g_steps < 2:
            raise ConfigError(f"g_steps must be >= 2, got {self.g_steps}")
        if self.g_min < 0:
            raise ConfigError("g_min must be non-negative")
        for name in ("tol_quad", "tol_eig", "tol_root"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.n_max < 1:
            raise ConfigError("n_max must be >= 1")
        if any(k < 0 for k in self.k_list):
            raise ConfigError("resonance orders in k_list must be >= 0")
        try:
            self.params
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.delta_e, self.hbar_omega0, self.coupling_u, self.n_ref)

    @property
    def g_values(self) -> np.ndarray:
        return np.linspace(self.g_min, self.g_max, self.g_steps)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {_format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        kinds = {f.name: f.type for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in kinds:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            try:
                values[key] = _parse_value(kinds[key], val)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
        return cls(**values)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_text(text)


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "on" if v else "off"
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, tuple):
        return ", ".join(str(x) for x in v)
    return str(v)


def _parse_value(kind: str, text: str):
    if kind == "float":
        return float(text)
    if kind == "int":
        return int(text)
    if kind == "bool":
        low = text.lower()
        if low in ("on", "true", "yes", "1"):
            return True
        if low in ("off", "false", "no", "0"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if kind.startswith("tuple"):
        return tuple(int(x) for x in text.replace(",", " ").split())
    return text


def fmt(x: float) -> str:
    return format(float(x), ".17g")


class CsvWriter:
    """Comment-prefixed, LF-terminated CSV with a config echo."""

    def __init__(self, path: Path, header: list[str], config: RunConfig, command: str):
        self.path = path
        self.buf = io.StringIO(newline="")
        self.buf.write(f"# bsshift {__version__} {command}\n")
        for line in config.to_text().splitlines():
            self.buf.write(f"# {line}\n")
        self.buf.write(",".join(header) + "\n")
        self.flags: list[str] = []

    def row(self, values: list) -> None:
        out = []
        for v in values:
            if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
                out.append(str(int(v)))
            else:
                out.append(fmt(v))
        self.buf.write(",".join(out) + "\n")

    def flag(self, message: str) -> None:
        self.flags.append(message)

    def close(self) -> Path:
        for msg in self.flags:
            self.buf.write(f"# flagged: {msg}\n")
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.buf.getvalue())
        return self.path


@dataclass
class CommandResult:
    exit_code: int
    outputs: list[Path] = field(default_factory=list)
    report: str = ""


def _out_dir(config: RunConfig) -> Path:
    return Path(config.output_dir)


def _pool_map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# -- spectrum sweep ---------------------------------------------------------

def _cache_key(params: ModelParams, n_max: int, g: float) -> str:
    text = "|".join(fmt(x) for x in (params.delta_e, params.hbar_omega0, params.n_ref, g))
    return hashlib.sha256(f"{text}|{n_max}".encode()).hexdigest()[:32]


def sweep_point(params: ModelParams, n_max: int, g: float,
                cache_dir: Path | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Full sorted spectrum at one coupling with parity labels (cached if requested)."""
    path = None
    if cache_dir is not None:
        path = cache_dir / f"{_cache_key(params, n_max, g)}.bin"
        if path.exists():
            w, p = load_spectrum(path)
            return w, p
    u = coupling_for_g(g, params)
    parts = [(block_eigenvalues(params, n_max, par, coupling_u=u), par) for par in (1, -1)]
    w = np.concatenate([e for e, _ in parts])
    p = np.concatenate([np.full(len(e), float(par)) for e, par in parts])
    order = np.argsort(w, kind="stable")
    w, p = w[order], p[order]
    if path is not None:
        cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(f".{os.getpid()}.{id(w)}.tmp")
        dump_spectrum(tmp, w, p)
        os.replace(tmp, path)
    return w, p


def cmd_spectrum_sweep(config: RunConfig, threads: int = 1) -> CommandResult:
    params = config.params
    cache_dir = _out_dir(config) / "cache" if config.cache else None
    writer = CsvWriter(_out_dir(config) / "spectrum_sweep.csv", ["g", "index", "energy", "parity"],
                       config, "sweep")

    def point(g):
        try:
            return sweep_point(params, config.n_max, g, cache_dir)
        except linalg.LinAlgError as exc:
            return exc

    code = EXIT_OK
    for g, res in zip(config.g_values, _pool_map(point, list(config.g_values), threads)):
        if isinstance(res, Exception):
            writer.flag(f"g={fmt(g)}: eigensolver failed ({res})")
            for i in range(2 * (config.n_max + 1)):
                writer.row([g, i, math.nan, math.nan])
            code = EXIT_PARTIAL
            continue
        w, p = res
        for i, (e, par) in enumerate(zip(w, p)):
            writer.row([g, i, e, int(par)])
    return CommandResult(code, [writer.close()])


# -- figure tables ----------------------------------------------------------

def _splittings(config: RunConfig, k: int, want_pt: bool, want_shirley: bool,
                dump_dir: Path | None = None) -> dict:
    params = config.params
    ex = exact_splitting(k, params, n_max=config.n_max)
    d = ex.diagnostics
    row = {"k": k, "g0": ex.g_at_min, "gap_exact": ex.gap,
           "n_mean": d["n_mean"], "residual": math.nan}
    # the same coupling quoted with either level's photon number
    row["g0_n_low"] = ex.g_at_min * math.sqrt(d["n_low"] / d["n_mean"]) if d["n_low"] else math.nan
    row["g0_n_high"] = ex.g_at_min * math.sqrt(d["n_high"] / d["n_mean"])
    if want_shirley:
        row["gap_shirley"] = shirley_splitting(k, ex.g_at_min, params).gap
    if want_pt:
        pt = degenerate_pt_splitting(k, params)
        row["gap_pt"] = pt.gap
        row["residual"] = pt.diagnostics.get("residual", 0.0)
        if dump_dir is not None and pt.g_at_min > 0:
            _dump_pair(k, params, pt.g_at_min, dump_dir)
    return row


def _dump_pair(k: int, params: ModelParams, g0: float, out: Path) -> None:
    from .grid1d import rotated_eigenfunction_pair

    pair = resonant_pair(k, params.n_ref)
    p0 = replace(params, n_ref=pair.n_mean).with_g(g0)
    u_low, u_high = rotated_eigenfunction_pair(p0, pair.low, pair.high)
    out.mkdir(parents=True, exist_ok=True)
    u_low.to_csv(out / f"wavefunction_k{k}_n{pair.n_low}_up.csv")
    u_high.to_csv(out / f"wavefunction_k{k}_n{pair.n_high}_down.csv")


def _table(config: RunConfig, name: str, header: list[str], want_pt: bool,
           want_shirley: bool, threads: int, dump: bool) -> CommandResult:
    writer = CsvWriter(_out_dir(config) / f"{name}.csv", header, config, name)
    dump_dir = _out_dir(config) / "wavefunctions" if dump else None

    def one(k):
        try:
            return _splittings(config, k, want_pt, want_shirley, dump_dir)
        except (ValueError, RuntimeError, ArithmeticError) as exc:
            return exc

    code = EXIT_OK
    for k, res in zip(config.k_list, _pool_map(one, list(config.k_list), threads)):
        if isinstance(res, Exception):
            writer.flag(f"k={k}: {type(res).__name__}: {res}")
            res = {"k": k}
            code = EXIT_PARTIAL
        values = {"two_k_plus_one": 2 * k + 1, "n_max": config.n_max, **res}
        writer.row([values.get(h, math.nan) for h in header])
    return CommandResult(code, [writer.close()])


def cmd_fig1(config: RunConfig, threads: int = 1) -> CommandResult:
    return _table(config, "fig1", ["two_k_plus_one", "g0", "gap_exact", "gap_shirley"],
                  want_pt=False, want_shirley=True, threads=threads, dump=False)


def cmd_fig2(config: RunConfig, threads: int = 1, dump_wavefunctions: bool = False) -> CommandResult:
    return _table(config, "fig2", ["two_k_plus_one", "g0", "gap_exact", "gap_pt"],
                  want_pt=True, want_shirley=False, threads=threads, dump=dump_wavefunctions)


RESONANCE_HEADER = ["k", "two_k_plus_one", "g0", "gap_exact", "gap_shirley", "gap_pt",
                    "n_mean", "g0_n_low", "g0_n_high", "n_max", "residual"]


def cmd_resonance(config: RunConfig, threads: int = 1,
                  dump_wavefunctions: bool = False) -> CommandResult:
    return _table(config, "resonance", RESONANCE_HEADER, want_pt=True, want_shirley=True,
                  threads=threads, dump=dump_wavefunctions)


def cmd_converge(config: RunConfig, threads: int = 1) -> CommandResult:
    """Exact gaps at ``n_max`` and ``1.5 n_max`` for each resonance."""
    header = ["two_k_plus_one", "n_max", "g0", "gap_exact", "relative_change"]
    writer = CsvWriter(_out_dir(config) / "converge.csv", header, config, "converge")
    sizes = [config.n_max, int(round(1.5 * config.n_max))]
    params = config.params

    def one(k):
        try:
            return [exact_splitting(k, params, n_max=n) for n in sizes]
        except (ValueError, RuntimeError) as exc:
            return exc

    code = EXIT_OK
    for k, res in zip(config.k_list, _pool_map(one, list(config.k_list), threads)):
        if isinstance(res, Exception):
            writer.flag(f"k={k}: {type(res).__name__}: {res}")
            code = EXIT_PARTIAL
            continue
        base = res[0].gap
        for n, r in zip(sizes, res):
            change = abs(r.gap - base) / base if base > 0 else 0.0
            writer.row([2 * k + 1, n, r.g_at_min, r.gap, change])
    return CommandResult(code, [writer.close()])


# -- verification -----------------------------------------------------------

@dataclass
class Check:
    suite: str
    name: str
    value: float
    limit: float
    hint: str = ""

    @property
    def ok(self) -> bool:
        return bool(self.value <= self.limit)

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        text = f"[{tag}] {self.suite}: {self.name} = {self.value:.3e} (limit {self.limit:.1e})"
        if not self.ok and self.hint:
            text += f" -- {self.hint}"
        return text


def _verify_g(config: RunConfig) -> float:
    return min(config.g_max, 1.0)


def verify_rotation(config: RunConfig) -> list[Check]:
    params = config.params.with_g(_verify_g(config))
    basis = FockSpinBasis(config.n_max)
    calc = QuadratureCalculus.for_basis(basis)
    h = build_hamiltonian(params, basis)
    u = build_unitary(params, calc)
    uni = float(np.max(np.abs(u.matrix.T @ u.matrix - np.eye(basis.dim))))
    hp = rotate_hamiltonian(h, u)
    half = basis.dim // 2
    spec = float(np.max(np.abs(linalg.eigvalsh(hp.matrix)[:half]
                               - linalg.eigvalsh(h.matrix)[:half])))
    decomp = decomposition_residual(params, calc)
    par = parity_operator(basis)
    pres = (u.H @ par @ u - par).matrix
    return [
        Check("rotation", "unitarity |U^T U - 1|", uni, 1e-9),
        Check("rotation", "interior spectral invariance", spec, 1e-7),
        Check("rotation", "|H' - (H0 + V + W)| interior", decomp, 1e-6),
        Check("rotation", "parity preserved |U^T P U - P|", float(np.max(np.abs(pres))), 1e-9),
    ]


def verify_parity(config: RunConfig) -> list[Check]:
    params = config.params.with_g(_verify_g(config))
    basis = FockSpinBasis(config.n_max)
    h = build_hamiltonian(params, basis)
    hm = build_hamiltonian(params, basis, coupling_u=-params.coupling_u)
    comm = h.commutator_norm(parity_operator(basis))
    flip = float(np.max(np.abs(linalg.eigvalsh(h.matrix) - linalg.eigvalsh(hm.matrix))))
    return [Check("parity", "|[P, H]|", comm, 1e-12),
            Check("parity", "spectrum(U) vs spectrum(-U)", flip, 1e-10)]


def verify_wkb(config: RunConfig) -> list[Check]:
    n = max(1, int(round(config.n_ref)))
    checks = []
    g_hi = _verify_g(config)
    for g in np.linspace(max(config.g_min, 0.0), g_hi, 4):
        params = replace(config.params, n_ref=n).with_g(float(g))
        grid = grid_dressed_gap(params, n, GridEigenproblem.for_levels(params, n))
        wkb = wkb_dressed_energy(float(g), n, params.delta_e)
        checks.append(Check("wkb-grid", f"|dE_wkb - dE_grid|/dE_grid at g={g:.3g}, n={n}",
                            abs(wkb - grid) / grid, 1e-2))
    return checks


def verify_truncation(config: RunConfig) -> list[Check]:
    checks = []
    if config.k_list:
        top = max(resonant_pair(k, config.n_ref).n_high for k in config.k_list)
        need = int(math.ceil(top / 0.9))
        checks.append(Check("truncation", f"highest resonant Fock number {top} / (0.9 n_max)",
                            top / (0.9 * config.n_max), 1.0,
                            f"increase n_max to at least {need}"))
    params = config.params.with_g(_verify_g(config))
    u = params.coupling_u
    worst = 0.0
    for par in (1, -1):
        w1 = block_eigenvalues(params, config.n_max, par, coupling_u=u)
        w2 = block_eigenvalues(params, 2 * config.n_max, par, coupling_u=u)
        half = len(w1) // 2
        worst = max(worst, float(np.max(np.abs(w1[:half] - w2[:half]))))
    checks.append(Check("truncation", "lowest-half eigenvalue change when n_max doubles",
                        worst, 1e-8, f"increase n_max beyond {config.n_max}"))
    return checks


def cmd_verify(config: RunConfig) -> CommandResult:
    checks: list[Check] = []
    for suite in (verify_rotation, verify_parity, verify_wkb, verify_truncation):
        checks.extend(suite(config))
    report = "\n".join(c.line() for c in checks)
    ok = all(c.ok for c in checks)
    report += "\n" + ("all suites passed" if ok else "invariant failure") + "\n"
    return CommandResult(EXIT_OK if ok else EXIT_INVARIANT, [], report)


# -- entry point ------------------------------------------------------------

COMMANDS = ("sweep", "fig1", "fig2", "resonance", "verify", "converge")


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="key = value configuration file")
    parser.add_argument("--out", default=default, help="output directory (overrides output_dir)")
    parser.add_argument("--threads", type=int, default=default if suppress else 1,
                        help="worker threads for independent g-points / resonances")
    parser.add_argument("--dump-wavefunctions", action="store_true",
                        default=default if suppress else False,
                        help="write rotated-frame eigenfunctions u(y) as CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bsshift", description=__doc__.split("\n")[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "sweep": "full spectrum on the configured g grid",
        "fig1": "exact vs weak-coupling splitting per resonance",
        "fig2": "exact vs rotated-frame degenerate-PT splitting per resonance",
        "resonance": "all three splitting estimates per resonance",
        "verify": "run invariant suites and report pass/fail",
        "converge": "exact splitting at n_max and 1.5 n_max",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, help=helps[name])
        _global_flags(sp, suppress=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    try:
        config = RunConfig.load(args.config) if args.config else RunConfig()
        if args.out:
            config = replace(config, output_dir=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    threads = max(1, args.threads or 1)

    with warnings.catch_warnings():
        warnings.simplefilter("default")
        try:
            if args.command == "sweep":
                res = cmd_spectrum_sweep(config, threads)
            elif args.command == "fig1":
                res = cmd_fig1(config, threads)
            elif args.command == "fig2":
                res = cmd_fig2(config, threads, args.dump_wavefunctions)
            elif args.command == "resonance":
                res = cmd_resonance(config, threads, args.dump_wavefunctions)
            elif args.command == "converge":
                res = cmd_converge(config, threads)
            else:
                res = cmd_verify(config)
        except OSError as exc:
            print(f"I/O error: {exc}", file=sys.stderr)
            return EXIT_INVARIANT
    if res.report:
        print(res.report, end="")
    for path in res.outputs:
        log.info("wrote %s", path)
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
