"""Command-line front end: sweeps, optimum search, bit generation and testing.

Configuration precedence: command-line flags override the optional key=value
configuration file (path from --config or the BSQRNG_CONFIG environment
variable), which overrides built-in defaults. Exit codes: 0 success,
1 validation error, 2 runtime or numeric error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .detection import DetectorPair, outcome_probabilities, throughput
from .fock import (
    DEFAULT_TRUNCATION,
    SourceModel,
    TruncationError,
    TruncationPolicy,
    coincidence_contrast,
    output_joint_distribution,
)
from .mcsim import SimConfig, run
from .postproc import BitStream, events_to_bits, stream_stats, von_neumann
from .randtests import parse_report_csv, run_battery

_ENV_CONFIG = "BSQRNG_CONFIG"
_DEFAULT_SOURCES = "single,indist"


@dataclass(frozen=True)
class SweepSpec:
    """Grid of effective mean photon numbers to evaluate per source."""

    mu_eta_min: float
    mu_eta_max: float
    points: int = 60
    spacing: str = "log"
    sources: tuple[SourceModel, ...] = (
        SourceModel.single(),
        SourceModel.indistinguishable_pair(),
    )

    def __post_init__(self):
        if not self.mu_eta_min < self.mu_eta_max:
            raise ValueError(
                f"need mu_eta_min < mu_eta_max, got {self.mu_eta_min} and {self.mu_eta_max}"
            )
        if self.points < 2:
            raise ValueError(f"need at least 2 grid points, got {self.points}")
        if self.spacing not in ("log", "linear"):
            raise ValueError(f"spacing must be 'log' or 'linear', got {self.spacing!r}")
        if self.spacing == "log" and self.mu_eta_min <= 0.0:
            raise ValueError("log spacing needs a positive lower endpoint")

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.mu_eta_min, self.mu_eta_max, self.points)
        return np.linspace(self.mu_eta_min, self.mu_eta_max, self.points)


@dataclass(frozen=True)
class SweepRow:
    mu_eta: float
    source: str
    p_gen: float
    p_disc: float
    p_none: float
    contrast: float
    error: str = ""


_SWEEP_HEADER = "mu_eta,source,p_gen,p_disc,p_none,contrast"


def sweep(spec: SweepSpec, policy: TruncationPolicy = DEFAULT_TRUNCATION) -> list[SweepRow]:
    """Analytic generation/discard/contrast table over the grid."""
    rows = []
    for mu_eta in spec.grid():
        try:
            contrast = coincidence_contrast(float(mu_eta))
        except ValueError as exc:
            contrast, contrast_error = math.nan, str(exc)
        else:
            contrast_error = ""
        for source in spec.sources:
            try:
                probs = outcome_probabilities(
                    output_joint_distribution(source, float(mu_eta), policy)
                )
                rows.append(
                    SweepRow(
                        float(mu_eta),
                        source.label,
                        probs.p_gen,
                        probs.p_disc,
                        probs.p_none,
                        contrast,
                        contrast_error,
                    )
                )
            except TruncationError as exc:
                rows.append(
                    SweepRow(
                        float(mu_eta), source.label,
                        math.nan, math.nan, math.nan, contrast, str(exc),
                    )
                )
    return rows


def sweep_csv(rows: list[SweepRow]) -> str:
    lines = [_SWEEP_HEADER]
    for r in rows:
        if r.error:
            lines.append(f"# mu_eta={r.mu_eta:.9g} source={r.source} error: {r.error}")
        lines.append(
            f"{r.mu_eta:.9g},{r.source},{r.p_gen:.9g},{r.p_disc:.9g},"
            f"{r.p_none:.9g},{r.contrast:.9g}"
        )
    return "\n".join(lines) + "\n"


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def find_optimum(
    source: SourceModel,
    bracket: tuple[float, float] = (0.2, 6.0),
    policy: TruncationPolicy = DEFAULT_TRUNCATION,
    tol: float = 1e-4,
    detectors: DetectorPair = DetectorPair(),
) -> tuple[float, float]:
    """Locate the mu-eta value maximizing the valid-bit probability.

    A coarse log-spaced pre-scan checks the bracket contains a single
    interior peak (small truncation wiggles tolerated), then golden-section
    search refines the argmax to ``tol``.
    """
    lo, hi = bracket
    if not 0.0 < lo < hi:
        raise ValueError(f"bracket must satisfy 0 < lo < hi, got {bracket}")

    def p_gen(mu_eta: float) -> float:
        return outcome_probabilities(
            output_joint_distribution(source, mu_eta, policy), detectors
        ).p_gen

    grid = np.geomspace(lo, hi, 33)
    values = [p_gen(float(x)) for x in grid]
    peak = int(np.argmax(values))
    if peak in (0, len(grid) - 1):
        raise ValueError(f"bracket {bracket} does not straddle the maximum")
    slack = 1e-6  # tolerate truncation-bound jumps in the pre-scan
    rising = all(values[i + 1] >= values[i] - slack for i in range(peak))
    falling = all(values[i + 1] <= values[i] + slack for i in range(peak, len(values) - 1))
    if not (rising and falling):
        raise ValueError("pre-scan found multiple peaks; narrow the bracket")

    a, b = float(grid[peak - 1]), float(grid[peak + 1])
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = p_gen(c), p_gen(d)
    while b - a > tol:
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = p_gen(d)
        else:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = p_gen(c)
    best = (a + b) / 2.0
    return best, p_gen(best)


def generate(
    cfg: SimConfig, debias_flag: bool, out_path: str | Path
) -> tuple[BitStream, dict[str, str]]:
    """Simulate, extract bits, optionally debias, and write the bit file."""
    tally, outcomes = run(cfg)
    provenance = {
        "source": cfg.source.label,
        "mu": f"{cfg.mu:.9g}",
        "eta0": f"{cfg.detectors.eta0:.9g}",
        "eta1": f"{cfg.detectors.eta1:.9g}",
        "seed": str(cfg.seed),
        "gates": str(cfg.n_gates),
        "gate_rate": f"{cfg.gate_rate:.9g}",
    }
    stream = events_to_bits(outcomes, provenance)
    raw_length = stream.length
    if debias_flag:
        stream = von_neumann(stream)
    stream.write(out_path)

    stats = stream_stats(stream)
    summary = {
        "out": str(out_path),
        "n_gates": str(tally.n_gates),
        "bit0": str(tally.bit0),
        "bit1": str(tally.bit1),
        "collision": str(tally.collision),
        "none": str(tally.none),
        "p_gen": f"{tally.p_gen:.9g}",
        "p_gen_stderr": f"{tally.p_gen_stderr():.9g}",
        "p_disc": f"{tally.p_disc:.9g}",
        "p_disc_stderr": f"{tally.p_disc_stderr():.9g}",
        "raw_bits": str(raw_length),
        "output_bits": str(stream.length),
        "raw_throughput_bits_per_s": f"{throughput(tally.p_gen, cfg.gate_rate):.9g}",
    }
    if stats.ones_fraction is not None:
        summary["ones_fraction"] = f"{stats.ones_fraction:.9g}"
    if debias_flag and stats.extraction_efficiency is not None:
        summary["extraction_efficiency"] = f"{stats.extraction_efficiency:.9g}"
    return stream, summary


def load_bitstream(path: str | Path) -> BitStream:
    """Read a bit file, accepting the binary format or ASCII '0'/'1' text."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == b"BSRB":
        return BitStream.read(path)
    text = Path(path).read_text()
    return BitStream.from_ascii(text)


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; the contract wants 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(_fail(1, message))


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _read_config_file(path: str | Path) -> dict[str, str]:
    values = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}: bad configuration line {line!r}")
        values[key.strip()] = value.strip()
    return values


_CONFIG_CASTS = {
    "mu": float,
    "mu_eta": float,
    "eta0": float,
    "eta1": float,
    "source": str,
    "gates": int,
    "seed": int,
    "gate_rate": float,
    "block_size": int,
    "alpha": float,
    "format": str,
    "points": int,
    "spacing": str,
}


def _apply_config(args: argparse.Namespace, config_path: str | None) -> None:
    """Fill unset options from the configuration file, if one is named."""
    path = config_path or os.environ.get(_ENV_CONFIG)
    if not path:
        return
    for key, raw in _read_config_file(path).items():
        cast = _CONFIG_CASTS.get(key)
        if cast is None:
            raise ValueError(f"unknown configuration key {key!r}")
        if getattr(args, key, None) is None:
            setattr(args, key, cast(raw))


def _resolved(args: argparse.Namespace, **defaults):
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    return args


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bsqrng", description=__doc__)
    parser.add_argument("--config", help="key=value configuration file")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="analytic probability table over a mu-eta grid")
    p_sweep.add_argument("--mu-eta-min", type=float, default=None)
    p_sweep.add_argument("--mu-eta-max", type=float, default=None)
    p_sweep.add_argument("--points", type=int, default=None)
    p_sweep.add_argument("--spacing", choices=["log", "linear"], default=None)
    p_sweep.add_argument("--source", dest="source", default=None,
                         help="comma-separated list: single,indist,dist,mix:<overlap>")
    p_sweep.add_argument("--out", default=None, help="output CSV path (default stdout)")

    p_opt = sub.add_parser("optimum", help="search the valid-bit probability maximum")
    p_opt.add_argument("--source", default=None)
    p_opt.add_argument("--bracket", nargs=2, type=float, metavar=("LO", "HI"), default=None)

    p_gen = sub.add_parser("generate", help="simulate gates and write a bit file")
    p_gen.add_argument("--mu", type=float, default=None, help="mean photons per gate")
    p_gen.add_argument("--mu-eta", type=float, default=None,
                       help="effective mean; shorthand for --mu with ideal detectors")
    p_gen.add_argument("--eta0", type=float, default=None)
    p_gen.add_argument("--eta1", type=float, default=None)
    p_gen.add_argument("--source", default=None)
    p_gen.add_argument("--gates", type=int, default=None)
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--gate-rate", dest="gate_rate", type=float, default=None)
    p_gen.add_argument("--debias", action="store_true")
    p_gen.add_argument("--out", required=True)

    p_test = sub.add_parser("test", help="run the randomness battery on a bit file")
    p_test.add_argument("input", help="bit file (binary or ASCII)")
    p_test.add_argument("--block-size", dest="block_size", type=int, default=None)
    p_test.add_argument("--alpha", type=float, default=None, help="significance level")
    p_test.add_argument("--out", default=None, help="report path (default stdout)")
    p_test.add_argument("--format", choices=["csv", "text"], default=None)

    p_rep = sub.add_parser("report", help="re-render a stored CSV result")
    p_rep.add_argument("input", help="battery report CSV or sweep CSV")

    return parser


def _parse_sources(text: str) -> tuple[SourceModel, ...]:
    return tuple(SourceModel.from_label(part.strip()) for part in text.split(","))


def _cmd_sweep(args) -> int:
    args = _resolved(args, mu_eta_min=0.05, mu_eta_max=20.0, points=60,
                     spacing="log", source=_DEFAULT_SOURCES)
    spec = SweepSpec(args.mu_eta_min, args.mu_eta_max, args.points, args.spacing,
                     _parse_sources(args.source))
    text = sweep_csv(sweep(spec))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_optimum(args) -> int:
    args = _resolved(args, source="indist", bracket=[0.2, 6.0])
    source = SourceModel.from_label(args.source)
    mu_eta_star, p_gen_star = find_optimum(source, tuple(args.bracket))
    print(f"source={source.label}")
    print(f"mu_eta_star={mu_eta_star:.9g}")
    print(f"p_gen_star={p_gen_star:.9g}")
    return 0


def _cmd_generate(args) -> int:
    if args.mu_eta is not None:
        if args.mu is not None or args.eta0 is not None or args.eta1 is not None:
            raise ValueError("--mu-eta replaces --mu/--eta0/--eta1; give one form only")
        args.mu, args.eta0, args.eta1 = args.mu_eta, 1.0, 1.0
    args = _resolved(args, mu=2.1, eta0=1.0, eta1=1.0, source="indist",
                     gates=100_000, seed=1, gate_rate=100_000.0)
    cfg = SimConfig(
        seed=args.seed,
        n_gates=args.gates,
        mu=args.mu,
        source=SourceModel.from_label(args.source),
        detectors=DetectorPair(args.eta0, args.eta1),
        gate_rate=args.gate_rate,
    )
    _stream, summary = generate(cfg, args.debias, args.out)
    for key, value in summary.items():
        print(f"{key}={value}")
    return 0


def _cmd_test(args) -> int:
    args = _resolved(args, block_size=100_000, alpha=0.01, format="csv")
    stream = load_bitstream(args.input)
    report = run_battery(stream, args.block_size, args.alpha)
    rendered = report.to_csv() if args.format == "csv" else report.to_text()
    if args.out:
        Path(args.out).write_text(rendered)
    else:
        sys.stdout.write(rendered)
    for name, frac in report.pass_fraction().items():
        print(f"pass_fraction {name} {frac:.3f}", file=sys.stderr)
    return 0


def _cmd_report(args) -> int:
    text = Path(args.input).read_text()
    first_line = text.splitlines()[0] if text else ""
    if first_line == "test,block,p_value,pass":
        sys.stdout.write(parse_report_csv(text).to_text())
    elif first_line == _SWEEP_HEADER:
        sys.stdout.write(text)
    else:
        raise ValueError(f"{args.input}: unrecognized stored result")
    return 0


_COMMANDS = {
    "sweep": _cmd_sweep,
    "optimum": _cmd_optimum,
    "generate": _cmd_generate,
    "test": _cmd_test,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, args.config)
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        return _fail(1, str(exc))
    except (TruncationError, ArithmeticError, RuntimeError) as exc:
        return _fail(2, str(exc))
    except OSError as exc:
        return _fail(3, str(exc))


if __name__ == "__main__":
    sys.exit(main())
