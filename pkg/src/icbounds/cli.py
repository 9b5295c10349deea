"""Command-line entry point ``icb``.

Subcommands::

    icb bounds --P 10 --c 0.1
    icb sweep --P-min 1 --P-max 50 --P-steps 5 --c-min 0.01 --c-max 0.45 --c-steps 5 --out sweep.csv
    icb verify --suite identities --seed 7
    icb fme system.txt R0 R1

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import io
import math
import sys
from dataclasses import dataclass, field

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_IO = 3

CSV_COLUMNS = (
    "P", "c", "in_gamma_A", "in_gamma_B", "smart_genie", "optimal_P0", "lower_bits",
    "upper_bits", "gap_bits", "genie_a_sq", "genie_b_sq", "status",
)

# Flag destination -> (type, default). Config files use the same keys, with
# either dashes or underscores.
OPTIONS = {
    "P": (float, None),
    "c": (float, None),
    "P_min": (float, 1.0),
    "P_max": (float, 50.0),
    "P_steps": (int, 5),
    "c_min": (float, 0.01),
    "c_max": (float, 0.45),
    "c_steps": (int, 5),
    "P0_steps": (int, 101),
    "seed": (int, 0),
    "tol": (float, 1e-4),
    "out": (str, None),
    "suite": (str, "all"),
}


class UsageError(Exception):
    pass


@dataclass
class SweepConfig:
    P_min: float
    P_max: float
    P_steps: int
    c_min: float
    c_max: float
    c_steps: int
    P0_steps: int = 101
    seed: int = 0
    tol: float = 1e-4
    out: str | None = None
    format: str = "csv"
    optimizer: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.P_min < 0 or self.c_min < 0:
            raise UsageError("P-min and c-min must be >= 0")
        if self.P_min > self.P_max or self.c_min > self.c_max:
            raise UsageError("min must not exceed max")
        if self.P_steps < 1 or self.c_steps < 1 or self.P0_steps < 1:
            raise UsageError("step counts must be >= 1")

    def axis(self, lo, hi, steps):
        if steps == 1:
            return [lo]
        return [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]


def fmt_number(x) -> str:
    """12 significant digits; ``inf`` for infinities; no negative zero."""
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x + 0.0, ".12g")


def _fmt_bool(b):
    return "true" if b else "false"


def csv_row(report) -> list[str]:
    smart = report.smart_genie
    return [
        fmt_number(report.P),
        fmt_number(report.c),
        _fmt_bool(report.in_gamma_A),
        _fmt_bool(report.in_gamma_B),
        _fmt_bool(report.smart_genie_solvable),
        fmt_number(report.optimal_P0),
        fmt_number(report.lower_bits),
        fmt_number(report.upper_bits),
        fmt_number(report.gap_bits),
        fmt_number(smart.a_sq) if smart is not None else "",
        fmt_number(smart.b_sq) if smart is not None else "",
        str(report.status),
    ]


def write_csv(reports, stream) -> None:
    stream.write(",".join(CSV_COLUMNS) + "\n")
    for report in reports:
        stream.write(",".join(csv_row(report)) + "\n")


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in OPTIONS:
                raise UsageError(f"{path}:{n}: unknown key {key!r}")
            kind = OPTIONS[key][0]
            try:
                out[key] = kind(value)
            except ValueError:
                raise UsageError(f"{path}:{n}: bad value {value!r} for {key}") from None
    return out


def _resolve(args) -> dict:
    """Defaults, then the config file, then explicit flags."""
    values = {key: default for key, (_, default) in OPTIONS.items()}
    if args.config:
        values.update(read_config(args.config))
    for key in OPTIONS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return values


def _add_common(p, keys):
    for key in keys:
        kind, _ = OPTIONS[key]
        p.add_argument("--" + key.replace("_", "-"), dest=key, type=kind, default=None)
    p.add_argument("--config", default=None, help="file of 'key = value' lines; flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="icb", description="Sum-capacity bounds for the symmetric Gaussian interference channel.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("bounds", help="lower/upper bounds at one (P, c)")
    _add_common(p, ("P", "c", "P0_steps", "seed", "tol", "out"))
    p = sub.add_parser("sweep", help="bounds over a (P, c) grid, as CSV")
    _add_common(p, ("P_min", "P_max", "P_steps", "c_min", "c_max", "c_steps", "P0_steps", "seed", "tol", "out"))
    p = sub.add_parser("verify", help="run property suites")
    _add_common(p, ("suite", "seed"))
    p = sub.add_parser("fme", help="Fourier-Motzkin projection of an inequality file")
    p.add_argument("system", help="inequality file, '-' for stdin")
    p.add_argument("eliminate", nargs="*", help="variables to eliminate")
    _add_common(p, ("out",))
    return parser


def _optimizer(values):
    from .optimizer import OptimizerConfig

    return OptimizerConfig(seed=values["seed"])


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_bounds(values) -> int:
    from .bounds import compute_bounds
    from .core import ChannelParams

    if values["P"] is None or values["c"] is None:
        raise UsageError("bounds needs --P and --c")
    if values["P0_steps"] < 1:
        raise UsageError("--P0-steps must be >= 1")
    ch = ChannelParams(values["P"], values["c"])
    rep = compute_bounds(ch, _optimizer(values), values["P0_steps"], values["tol"])
    cert = rep.certificate
    lines = [
        ("P", fmt_number(rep.P)),
        ("c", fmt_number(rep.c)),
        ("lower_bits", fmt_number(rep.lower_bits)),
        ("optimal_P0", fmt_number(rep.optimal_P0)),
        ("upper_bits", fmt_number(rep.upper_bits)),
        ("upper_P1", fmt_number(rep.upper_P1) or "none"),
        ("gap_bits", fmt_number(rep.gap_bits)),
        ("status", str(rep.status)),
        ("in_gamma_A", _fmt_bool(rep.in_gamma_A)),
        ("in_gamma_B", _fmt_bool(rep.in_gamma_B)),
        ("smart_genie", _fmt_bool(rep.smart_genie_solvable)),
    ]
    if rep.smart_genie is not None:
        lines += [("smart_a_sq", fmt_number(rep.smart_genie.a_sq)), ("smart_b_sq", fmt_number(rep.smart_genie.b_sq))]
    if cert is not None:
        lines.append(("certificate", " ".join(fmt_number(x) for x in cert.as_tuple()) + "  (a1^2 a2^2 v1 v2)"))
    width = max(len(k) for k, _ in lines)
    sys.stdout.write("".join(f"{k:<{width}}  {v}\n" for k, v in lines))
    if values["out"]:
        buf = io.StringIO()
        write_csv([rep], buf)
        _emit(buf.getvalue(), values["out"])
    return EXIT_OK


def run_sweep(cfg: SweepConfig):
    """Reports in row-major order: ``P`` outer, ``c`` inner."""
    from .bounds import compute_bounds
    from .core import ChannelParams
    from .optimizer import OptimizerConfig

    opt = cfg.optimizer or OptimizerConfig(seed=cfg.seed)
    reports = []
    for P in cfg.axis(cfg.P_min, cfg.P_max, cfg.P_steps):
        for c in cfg.axis(cfg.c_min, cfg.c_max, cfg.c_steps):
            reports.append(compute_bounds(ChannelParams(P, c), opt, cfg.P0_steps, cfg.tol))
    return reports


def cmd_sweep(values) -> int:
    cfg = SweepConfig(
        values["P_min"], values["P_max"], values["P_steps"],
        values["c_min"], values["c_max"], values["c_steps"],
        values["P0_steps"], values["seed"], values["tol"], values["out"],
    )
    if cfg.out not in (None, "-"):
        # fail before the expensive part if the path is unwritable
        open(cfg.out, "a", encoding="utf-8").close()
    buf = io.StringIO()
    write_csv(run_sweep(cfg), buf)
    _emit(buf.getvalue(), cfg.out)
    return EXIT_OK


def cmd_verify(values) -> int:
    from .verify import SUITES, run_suite

    suite = values["suite"]
    if suite != "all" and suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(['all', *SUITES])}")
    checks = run_suite(suite, values["seed"])
    for check in checks:
        print(check.line(), flush=True)
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def cmd_fme(args, values) -> int:
    from .fme import format_system, parse_system, project

    if args.system == "-":
        text = sys.stdin.read()
    else:
        with open(args.system, encoding="utf-8") as fh:
            text = fh.read()
    system = parse_system(text)
    res = project(system, args.eliminate)
    header = f"# eliminated: {' '.join(res.eliminated) or '(none)'}; redundant rows removed: {res.redundant_removed}\n"
    _emit(header + format_system(res.rows), values["out"])
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    from .errors import DomainError, ParseError, RowExplosionError

    try:
        values = _resolve(args)
        if args.command == "bounds":
            return cmd_bounds(values)
        if args.command == "sweep":
            return cmd_sweep(values)
        if args.command == "verify":
            return cmd_verify(values)
        return cmd_fme(args, values)
    except OSError as exc:
        print(f"icb: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, DomainError, ParseError, RowExplosionError, ValueError) as exc:
        print(f"icb: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
