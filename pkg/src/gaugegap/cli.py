"""Command-line interface: ``gaugegap <command> [options]``.

Results go to standard output as JSON run records (or CSV with ``--csv``);
progress and errors go to standard error.  Exit codes: 0 success,
1 verification failure, 2 input error, 3 eigensolver did not converge.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .blocks import SectorLabel, all_sectors, build_block, full_hamiltonian_dense
from .cheeger import cut_crossings, double_well, nu_bound, protofact_check, sector_cut, sign_cut, variational_gap_bound
from .decompose import DecompositionError, decompose, verify
from .eigen import NoConvergence, ProblemTooLarge, SolverConfig, topk_symmetric
from .gapsearch import format_csv, solve_sector, spectral_gap
from .gaugecode import MODELS, CodeFormatError, CssCode, build_model, load_code, load_symmetries
from .ideals import partition_ideals

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_CONVERGENCE = 0, 1, 2, 3
ENV_PREFIX = "GAUGEGAP_"
CONFIG_KEYS = {"tol": float, "seed": int, "threads": int, "max_iter": int, "basis_cap": int, "cache_dir": str}
SCHEMA_VERSION = 1

MODEL_SIZES = {
    "ising1d": "n (chain length, >= 3)",
    "xy1d": "n (even chain length, >= 4)",
    "xy-plaquette": "l (even linear size, n = l^2)",
    "compass2d": "l (linear size, n = l^2)",
    "compass3d": "l (linear size, n = l^3)",
    "gcc": "none (the bundled n = 15 code)",
}


class InputError(ValueError):
    pass


@dataclass
class RunRecord:
    command: str
    params: dict
    code_hash: str | None
    version: str
    wall_time: float
    solver: dict | None
    payload: object
    cached: bool = False
    schema: str = field(default="")

    def to_dict(self) -> dict:
        return asdict(self)


# -- configuration -----------------------------------------------------------

def read_config_file(path: Path) -> dict:
    """``key = value`` lines; ``#`` comments and ``[section]`` headers are ignored."""
    out = {}
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in CONFIG_KEYS:
            continue
        out[key] = value.strip().strip('"').strip("'")
    return out


def resolve_settings(args: argparse.Namespace, environ=None) -> dict:
    """Merge settings: flags, then environment variables, then the config file."""
    environ = os.environ if environ is None else environ
    cfg_path = args.config or environ.get(ENV_PREFIX + "CONFIG")
    if cfg_path is None and Path("gaugegap.toml").is_file():
        cfg_path = "gaugegap.toml"
    file_values = read_config_file(Path(cfg_path)) if cfg_path else {}
    settings = {}
    for key, kind in CONFIG_KEYS.items():
        flag = getattr(args, key, None)
        env = environ.get(ENV_PREFIX + key.upper())
        raw = flag if flag is not None else env if env is not None else file_values.get(key)
        if raw is not None:
            try:
                settings[key] = kind(raw)
            except ValueError:
                raise InputError(f"bad value for {key}: {raw!r}") from None
    settings.setdefault("threads", os.cpu_count() or 1)
    return settings


def solver_config(settings: dict) -> SolverConfig:
    kw = {k: settings[k] for k in ("tol", "seed", "max_iter", "basis_cap") if k in settings}
    return SolverConfig(**kw)


def cache_dir(settings: dict) -> Path:
    if "cache_dir" in settings:
        return Path(settings["cache_dir"])
    base = os.environ.get("XDG_CACHE_HOME") or str(Path.home() / ".cache")
    return Path(base) / "gaugegap"


def cache_key(command: str, params: dict, code_hash: str | None, solver: dict | None) -> str:
    blob = json.dumps({"command": command, "params": params, "code": code_hash, "solver": solver,
                       "major": __version__.split(".")[0]}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


# -- inputs ------------------------------------------------------------------

def load_input_code(args) -> CssCode:
    try:
        if args.file:
            return load_code(args.file)
        if not args.model:
            raise InputError("give --model or --file")
        return build_model(args.model, args.size)
    except (CodeFormatError, OSError) as exc:
        raise InputError(str(exc)) from None
    except ValueError as exc:
        raise InputError(str(exc)) from None


def parse_sector(text: str | None, dec) -> SectorLabel:
    if text is None:
        return SectorLabel.zero(dec)
    try:
        return SectorLabel.parse(text, dec)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _symmetries(args, code):
    if not args.sym:
        return None, None
    try:
        return load_symmetries(args.sym, code.n)
    except (CodeFormatError, OSError) as exc:
        raise InputError(str(exc)) from None


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


# -- commands ----------------------------------------------------------------

def cmd_models(args, settings):
    return {"models": [{"name": k, "size": v} for k, v in MODEL_SIZES.items()]}, None, None


def cmd_decompose(args, settings):
    code = load_input_code(args)
    dec = decompose(code)
    payload = {"code": code.name, **dec.counts(),
               "matrices": {k: m.to_strings() for k, m in dec.matrices().items()}}
    return payload, code, None


def cmd_ideals(args, settings):
    code = load_input_code(args)
    part = partition_ideals(code)
    return {"code": code.name, "n": code.n, "count": len(part), "parts": part.summary()}, code, None


def cmd_spectrum(args, settings):
    code = load_input_code(args)
    dec = decompose(code)
    sector = parse_sector(args.sector, dec)
    cfg = solver_config(settings)
    k = args.k or 2
    if k < 1:
        raise InputError("--k must be positive")
    part = partition_ideals(code, dec)
    if len(part) > 1 and not args.direct:
        res = solve_sector(code, dec, sector, k, cfg, part)
        payload = {"values": [float(v) for v in res.values], "residuals": [], "iterations": 0,
                   "converged": True, "method": "ideals"}
    else:
        block = build_block(code, dec, sector)
        res = topk_symmetric(block, k=min(k, block.dim), tol=cfg.tol, max_iter=cfg.max_iter, seed=cfg.seed,
                             basis_cap=cfg.basis_cap, check_multiplicity=True)
        payload = {**res.to_dict(), "method": res.meta.get("method", "lanczos")}
    payload.update({"code": code.name, "n": code.n, "sector": str(sector), "r": dec.r})
    return payload, code, cfg


def cmd_gap(args, settings):
    code = load_input_code(args)
    syms, dual = _symmetries(args, code)
    cfg = solver_config(settings)
    report = spectral_gap(code, mode="full" if args.full_sweep else "single", symmetries=syms, duality=dual,
                          config=cfg, threads=settings["threads"], progress=_progress)
    failed = [c for c in report.candidates if c.failed]
    if failed:
        _progress(f"{len(failed)} sector solve(s) failed; see the report")
    return report, code, cfg


def cmd_gapscan(args, settings):
    if not args.model:
        raise InputError("gapscan needs --model")
    sizes = args.sizes or ([args.size] if args.size else None)
    if not sizes:
        raise InputError("gapscan needs --sizes")
    cfg = solver_config(settings)
    rows = []
    for size in sizes:
        try:
            code = build_model(args.model, size)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        _progress(f"{args.model} size {size} (n = {code.n})")
        rep = spectral_gap(code, mode="full" if args.full_sweep else "single", config=cfg,
                           threads=settings["threads"])
        rows.append({"model": args.model, "size": size, "n": code.n, "lambda1": rep.lambda1, "gap": rep.gap})
    return {"rows": rows}, None, cfg


def cmd_verify(args, settings):
    code = load_input_code(args)
    warnings = code.validate()
    dec = decompose(code)
    rep = verify(dec, code)
    payload = {"code": code.name, "n": code.n, "warnings": warnings, **rep.to_dict()}
    if args.oracle:
        if code.n > 12:
            raise InputError(f"--oracle needs n <= 12, got {code.n}")
        full = np.sort(np.linalg.eigvalsh(full_hamiltonian_dense(code, 12)))
        parts = [np.linalg.eigvalsh(build_block(code, dec, s).dense(12)) for s in all_sectors(dec)]
        union = np.sort(np.repeat(np.concatenate(parts), 1 << dec.k))
        err = float(np.abs(full - union).max()) if len(full) == len(union) else float("inf")
        payload["oracle"] = {"max_abs_diff": err, "ok": err <= 1e-9}
        payload["ok"] = payload["ok"] and err <= 1e-9
    return payload, code, None


def cmd_cheeger(args, settings):
    if args.double_well:
        h = double_well(args.double_well)
        vals, vecs = np.linalg.eigh(h)
        bound = variational_gap_bound(h, vecs[:, -1], sign_cut(vecs[:, -2]))
        strategy = "exhaustive" if h.shape[0] <= 16 else "sign-cut-local-search"
        nu = nu_bound(h, strategy)
        payload = {"d": args.double_well, "lambda1": float(vals[-1]), "lambda2": float(vals[-2]),
                   "variational": bound.to_dict(), "nu": nu.to_dict()}
        return payload, None, None
    code = load_input_code(args)
    dec = decompose(code)
    sector = parse_sector(args.sector, dec)
    payload = {"code": code.name, **sector_cut(code, sector)}
    if args.check_protofact:
        payload["protofact"] = protofact_check(code)
    if args.crossings:
        payload["crossings"] = cut_crossings(code, sector.tx)
    return payload, code, None


def cmd_bench(args, settings):
    code = load_input_code(args)
    dec = decompose(code)
    sector = parse_sector(args.sector, dec)
    block = build_block(code, dec, sector)
    _kernels.warmup()
    x = np.random.default_rng(settings.get("seed", 0)).standard_normal(block.dim)
    reps = args.reps
    block.apply(x)
    t = time.perf_counter()
    for _ in range(reps):
        block.apply(x)
    kernel = (time.perf_counter() - t) / reps
    payload = {"code": code.name, "r": dec.r, "dim": block.dim, "terms": len(block.translations),
               "matvec_seconds": kernel, "threads": settings["threads"]}
    if block.nbits <= 20:
        t = time.perf_counter()
        block.apply_numpy(x)
        payload["numpy_matvec_seconds"] = time.perf_counter() - t
    return payload, code, None


COMMANDS = {
    "models": (cmd_models, "list built-in models"),
    "decompose": (cmd_decompose, "print the (L, S, T, R) decomposition"),
    "spectrum": (cmd_spectrum, "top eigenvalues of one sector block"),
    "gap": (cmd_gap, "spectral gap via the sector search"),
    "gapscan": (cmd_gapscan, "gap across a list of sizes"),
    "ideals": (cmd_ideals, "commuting-ideal partition"),
    "verify": (cmd_verify, "check decomposition invariants (and the dense oracle)"),
    "cheeger": (cmd_cheeger, "cut bounds for a double well or a sector block"),
    "bench": (cmd_bench, "time the matrix-free block action"),
}
CACHED = {"spectrum", "gap", "gapscan"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", choices=sorted([*MODELS, "gcc"]))
    common.add_argument("--size", type=int)
    common.add_argument("--file", help="code file (gaugecode v1 format)")
    common.add_argument("--sector", help="'<tx-bits>,<tz-bits>'")
    common.add_argument("--k", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--max-iter", dest="max_iter", type=int)
    common.add_argument("--basis-cap", dest="basis_cap", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--full-sweep", action="store_true")
    common.add_argument("--csv", action="store_true")
    common.add_argument("--out", help="also write the output to this path")
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--cache-dir", dest="cache_dir")
    common.add_argument("--sym", help="symmetry file: 'sym ...' and 'dual ...' permutation lines")
    common.add_argument("--config", help="key = value settings file")

    parser = argparse.ArgumentParser(prog="gaugegap", description="Sector-resolved spectra of CSS gauge code Hamiltonians.")
    parser.add_argument("--version", action="version", version=f"gaugegap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "gapscan":
            p.add_argument("--sizes", type=lambda s: [int(v) for v in s.split(",") if v], help="comma-separated sizes")
        if name == "verify":
            p.add_argument("--oracle", action="store_true", help="compare with the dense full spectrum")
        if name == "spectrum":
            p.add_argument("--direct", action="store_true", help="skip the commuting-ideal split")
        if name == "cheeger":
            p.add_argument("--double-well", dest="double_well", type=int)
            p.add_argument("--check-protofact", action="store_true")
            p.add_argument("--crossings", action="store_true")
        if name == "bench":
            p.add_argument("--reps", type=int, default=5)
    return parser


def _payload_dict(payload) -> object:
    return payload.to_dict() if hasattr(payload, "to_dict") else payload


def _to_csv(command: str, payload) -> str:
    if command == "gap":
        return format_csv(payload.csv_rows())
    if command == "gapscan":
        lines = ["model,n,gap"] + [f'{r["model"]},{r["n"]},{r["gap"]:.6f}' for r in payload["rows"]]
        return "\n".join(lines) + "\n"
    if command == "spectrum":
        lines = ["n,sector,index,lambda"] + [
            f'{payload["n"]},"{payload["sector"]}",{i + 1},{v:.6f}' for i, v in enumerate(payload["values"])
        ]
        return "\n".join(lines) + "\n"
    raise InputError(f"--csv is not available for {command}")


def _emit(text: str, out: str | None) -> None:
    sys.stdout.write(text)
    sys.stdout.flush()
    if out:
        Path(out).write_text(text, encoding="utf-8")


def _error(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        settings = resolve_settings(args)
        _kernels.set_threads(settings["threads"])
        func = COMMANDS[args.command][0]
        params = {k: v for k, v in sorted(vars(args).items())
                  if k not in ("command", "csv", "out", "no_cache", "cache_dir", "config", "threads")}
        use_cache = args.command in CACHED and not args.no_cache and not args.csv
        key = record_path = None
        if use_cache:
            code_hash = load_input_code(args).content_hash() if (args.file or args.model) and args.command != "gapscan" else None
            cfg = solver_config(settings).to_dict()
            key = cache_key(args.command, params, code_hash, cfg)
            record_path = cache_dir(settings) / f"{key}.json"
            if record_path.is_file():
                _emit(record_path.read_text(encoding="utf-8"), args.out)
                return EXIT_OK
        payload, code, cfg = func(args, settings)
    except InputError as exc:
        return _error("input", str(exc), EXIT_INPUT)
    except (DecompositionError, ProblemTooLarge) as exc:
        return _error("input", str(exc), EXIT_INPUT)
    except NoConvergence as exc:
        return _error("convergence", str(exc), EXIT_CONVERGENCE)

    if args.csv:
        try:
            _emit(_to_csv(args.command, payload), args.out)
        except InputError as exc:
            return _error("input", str(exc), EXIT_INPUT)
    else:
        record = RunRecord(
            command=args.command, params=params,
            code_hash=code.content_hash() if code is not None else None,
            version=__version__, wall_time=time.perf_counter() - started,
            solver=cfg.to_dict() if cfg is not None else None,
            payload=_payload_dict(payload), schema=f"{args.command}.v{SCHEMA_VERSION}",
        )
        text = json.dumps(record.to_dict(), indent=2, sort_keys=True) + "\n"
        _emit(text, args.out)
        if record_path is not None:
            record_path.parent.mkdir(parents=True, exist_ok=True)
            cached = dict(record.to_dict(), cached=True)
            record_path.write_text(json.dumps(cached, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    ok = payload.get("ok", True) if isinstance(payload, dict) else True
    if args.command == "gap" and not payload.ok:
        return EXIT_CONVERGENCE
    return EXIT_OK if ok else EXIT_FAILED


def schema_path(command: str):
    return resources.files("gaugegap") / "schemas" / f"{command}.v{SCHEMA_VERSION}.json"


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
