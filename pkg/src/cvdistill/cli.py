"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 truncation or convergence
failure, 3 a ``verify`` check failed.  Errors are printed to stderr as JSON.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import pipelines
from .artifacts import atomic_write
from .config import PIPELINES, load_config
from .errors import ConfigError, CVDistillError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECKS = 0, 1, 2, 3

# flag dest -> (section, key)
FLAG_MAP = {
    "scheme": ("physics", "scheme"),
    "db": ("physics", "db"),
    "r": ("physics", "r"),
    "R": ("physics", "R"),
    "eta_apd": ("physics", "eta_apd"),
    "eta_out": ("physics", "eta_out"),
    "D": ("physics", "D"),
    "db_min": ("grid", "db_min"),
    "db_max": ("grid", "db_max"),
    "points": ("grid", "points"),
    "N": ("sampling", "N"),
    "seed": ("sampling", "seed"),
    "D_rec": ("sampling", "D_rec"),
    "method": ("sampling", "method"),
    "d_list": ("analysis", "d_list"),
    "B_resamples": ("analysis", "B_resamples"),
    "max_iter": ("analysis", "max_iter"),
    "tol": ("analysis", "tol"),
    "half_width": ("wigner", "half_width"),
    "grid_points": ("wigner", "points"),
    "mode": ("wigner", "mode"),
    "out": ("output", "dir"),
    "plot": ("output", "plot"),
}


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors: exit 1 with error JSON."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.exit(_fail(EXIT_CONFIG, ConfigError(message)))


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="cvdistill", description="Photon-subtraction entanglement distillation simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    subs = ap.add_subparsers(dest="pipeline", required=True, parser_class=_Parser)
    for name in PIPELINES:
        sp = subs.add_parser(name)
        sp.add_argument("--config", help="YAML run configuration; flags override its values")
        sp.add_argument("--out", help="output directory (default $CVDISTILL_OUT or ./cvdistill-out)")
        sp.add_argument("--plot", action="store_true", default=None, help="also render PNG figures next to the data")
        phys = sp.add_argument_group("physics")
        phys.add_argument("--scheme", choices=["undistilled", "1photon", "2photon"])
        phys.add_argument("--db", type=float, help="initial squeezing in dB (negative)")
        phys.add_argument("--r", type=float, help="squeezing parameter; overrides --db")
        phys.add_argument("--R", type=float, help="tap reflectance; 0 selects ideal subtraction")
        phys.add_argument("--eta-apd", dest="eta_apd", type=float)
        phys.add_argument("--eta-out", dest="eta_out", type=float)
        phys.add_argument("--D", type=int, help="Fock cutoff per mode")
        if name in ("curve", "entropy-curve", "epr"):
            g = sp.add_argument_group("grid")
            g.add_argument("--db-min", dest="db_min", type=float)
            g.add_argument("--db-max", dest="db_max", type=float)
            g.add_argument("--points", type=int)
        if name in ("tomo-sim", "extrapolate"):
            s = sp.add_argument_group("sampling")
            s.add_argument("--N", type=int)
            s.add_argument("--seed", type=int)
            s.add_argument("--D-rec", dest="D_rec", type=int)
            s.add_argument("--method", choices=["joint", "factorized"])
            s.add_argument("--max-iter", dest="max_iter", type=int)
            s.add_argument("--tol", type=float)
        if name == "extrapolate":
            sp.add_argument("--d-list", dest="d_list", type=_int_list)
            sp.add_argument("--B-resamples", dest="B_resamples", type=int)
        if name == "wigner":
            w = sp.add_argument_group("wigner grid (default [-5,5]^2 at 201x201)")
            w.add_argument("--half-width", dest="half_width", type=float)
            w.add_argument("--grid-points", dest="grid_points", type=int)
            w.add_argument("--mode", choices=["minus", "plus"])
    return ap


def overrides_from(args: argparse.Namespace) -> dict:
    out: dict = {"pipeline": args.pipeline}
    for dest, (section, key) in FLAG_MAP.items():
        val = getattr(args, dest, None)
        if val is not None:
            out.setdefault(section, {})[key] = val
    if getattr(args, "r", None) is not None:
        out["physics"]["db"] = None
    return out


def _fail(code: int, exc: BaseException) -> int:
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(err, sort_keys=True), file=sys.stderr)
    return code


def _print_summary(pipeline: str, out: Path, res, written: list[Path]) -> None:
    print(f"{pipeline}: {len(written)} file(s) in {out}")
    width = max((len(k) for k, _ in res.summary), default=0)
    for label, value in res.summary:
        if isinstance(value, float):
            value = f"{value:.10g}"
        print(f"  {label:<{width}}  {value}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, overrides_from(args))
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    try:
        res = pipelines.PIPELINE_FUNCS[args.pipeline](cfg)
    except CVDistillError as exc:
        return _fail(EXIT_NUMERIC, exc)
    out = Path(cfg.out_dir())
    written = []
    for name, text in sorted(res.artifacts.items()):
        atomic_write(out / name, text)
        written.append(out / name)
    if cfg.output.plot:
        from . import plots

        written += plots.render(res.figures, out)
    _print_summary(args.pipeline, out, res, written)
    if not res.ok:
        if args.pipeline == "verify":
            return EXIT_CHECKS
        return _fail(EXIT_NUMERIC, CVDistillError("reconstruction did not converge"))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
