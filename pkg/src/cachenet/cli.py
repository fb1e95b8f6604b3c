"""Command-line front end.

Subcommands ``analytic``, ``simulate``, ``sweep`` and ``tradeoff`` write CSV
(header row first) to ``--output`` or standard output. Diagnostics,
including backhaul-constraint warnings, go to standard error.

Exit status: 0 on success, 1 for invalid arguments or parameters, 2 when a
quadrature or solver fails.
"""
from __future__ import annotations

import argparse
import configparser
import contextlib
import csv
import logging
import math
import sys
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .analytic import (
    ProbabilityRangeError,
    QuadratureConfig,
    QuadratureError,
    avg_delivery_rate,
    outage_probability,
)
from .core import (
    BackhaulModel,
    BackhaulWarning,
    CacheParams,
    DeterministicFading,
    ExponentialFading,
    NetworkParams,
)
from .montecarlo import SimConfig, estimate
from .tradeoff import SolverError, TradeoffQuery, tradeoff_curve

log = logging.getLogger("cachenet")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

SWEEP_VARS = ("S", "lambda", "T", "gamma", "s_total")

INPUT_COLUMNS = ["lambda", "alpha", "snr_db", "T", "S", "L", "gamma", "c1", "c2", "fading"]
ANALYTIC_COLUMNS = ["p_out", "delivery_rate", "path", "est_error"]
SIM_COLUMNS = ["outage_mean", "outage_std_err", "delivery_mean", "delivery_std_err", "n", "seed"]
TRADEOFF_COLUMNS = ["s_total", "lambda_star", "achieved_outage", "feasible"]


class UsageError(Exception):
    pass


class _StderrHandler(logging.StreamHandler):
    """Writes to whatever ``sys.stderr`` is at emit time."""

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, _):
        pass


def _setup_logging():
    if not any(isinstance(h, _StderrHandler) for h in log.handlers):
        handler = _StderrHandler()
        handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
        log.addHandler(handler)
        log.setLevel(logging.INFO)
        log.propagate = False


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunSpec:
    command: str
    args: argparse.Namespace


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        # repr is the shortest string that round-trips exactly
        return repr(float(x))
    return str(x)


def _model_flags() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("model parameters (S, L in nats; T, c1, c2 in nats/sec/Hz)")
    g.add_argument("--lambda", dest="lam", type=float, default=0.2, help="station density per unit area")
    g.add_argument("--alpha", type=float, default=4.0, help="pathloss exponent (> 2)")
    g.add_argument("--snr-db", type=float, default=10.0, help="signal-to-noise ratio in dB")
    g.add_argument("--T", dest="T", type=float, default=0.1, help="target file bitrate [nats/sec/Hz]")
    g.add_argument("--S", dest="S", type=float, default=1.0, help="cache size per station [nats]")
    g.add_argument("--L", dest="L", type=float, default=1.0, help="file length [nats]")
    g.add_argument("--gamma", type=float, default=2.0, help="popularity shape (> 1)")
    g.add_argument("--c1", type=float, default=0.0005, help="backhaul coefficient in C = c1/lambda + c2")
    g.add_argument("--c2", type=float, default=0.0, help="backhaul floor in C = c1/lambda + c2")
    g.add_argument("--fading", choices=("exponential", "deterministic"), default="exponential",
                   help="interferer fading model")
    g.add_argument("--g0", type=float, default=1.0, help="gain for --fading deterministic")
    q = p.add_argument_group("numerics")
    q.add_argument("--quad-rel-tol", type=float, default=1e-9)
    q.add_argument("--quad-abs-tol", type=float, default=1e-12)
    q.add_argument("--quad-max-subdivisions", type=int, default=200)
    o = p.add_argument_group("output")
    o.add_argument("--output", default="-", help="CSV destination (default: stdout)")
    o.add_argument("--config", help="file of 'flag-name = value' lines; flags on the command line win")
    return p


def _sim_flags(required: bool) -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("simulation")
    g.add_argument("--realizations", type=int, default=1000 if required else None,
                   help="Monte Carlo realizations" + ("" if required else " (adds simulation columns)"))
    g.add_argument("--seed", type=int, default=0, help="master seed (unsigned 64-bit)")
    g.add_argument("--window-factor", type=float, default=20.0,
                   help="simulation disk radius in units of 1/sqrt(lambda)")
    g.add_argument("--workers", type=int, default=1, help="worker processes")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cachenet", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    model = _model_flags()

    sub.add_parser("analytic", parents=[model], help="evaluate outage and delivery rate at one point")
    sub.add_parser("simulate", parents=[model, _sim_flags(True)], help="Monte Carlo estimate at one point")

    sw = sub.add_parser("sweep", parents=[model, _sim_flags(False)], help="evaluate over a grid of one variable")
    sw.add_argument("--var", required=True, choices=SWEEP_VARS)
    sw.add_argument("--start", type=float, required=True)
    sw.add_argument("--stop", type=float, required=True)
    sw.add_argument("--step", type=float, required=True)

    tr = sub.add_parser("tradeoff", parents=[model], help="minimal density against total storage")
    tr.add_argument("--p-dagger", type=float, required=True, help="outage cap")
    tr.add_argument("--s-total-start", type=float, required=True, help="storage per unit area [nats]")
    tr.add_argument("--s-total-stop", type=float, required=True)
    tr.add_argument("--s-total-step", type=float, required=True)
    tr.add_argument("--lambda-lo", type=float, default=1e-4)
    tr.add_argument("--lambda-hi", type=float, default=10.0)
    tr.add_argument("--tol", type=float, default=1e-6, help="density tolerance")
    return parser


def _config_tokens(path: str) -> List[str]:
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_string("[run]\n" + fh.read(), source=path)
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}") from exc
    tokens = []
    for key, value in cp["run"].items():
        key = key.strip().lstrip("-")
        if key == "config":
            raise UsageError("config files cannot include other config files")
        tokens.append(f"--{key}={value.strip()}")
    return tokens


def _expand_config(argv: Sequence[str]) -> List[str]:
    """Splice config-file flags in right after the subcommand, so that
    flags given later on the command line override them."""
    argv = list(argv)
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv[1:])
    if not known.config or not argv:
        return argv
    return argv[:1] + _config_tokens(known.config) + argv[1:]


def _grid(start: float, stop: float, step: float) -> np.ndarray:
    if not step > 0:
        raise UsageError("--step must be > 0")
    if start > stop:
        raise UsageError("--start must not exceed --stop")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    # rounding keeps 0.1-style steps from printing as 0.30000000000000004
    return np.round(start + step * np.arange(n), 12)


def _quad(a) -> QuadratureConfig:
    return QuadratureConfig(a.quad_rel_tol, a.quad_abs_tol, a.quad_max_subdivisions)


def _fading(a):
    return DeterministicFading(a.g0) if a.fading == "deterministic" else ExponentialFading()


def _models(a, lam=None, T=None, S=None, gamma=None):
    net = NetworkParams(a.lam if lam is None else lam, a.alpha, a.snr_db, a.T if T is None else T)
    cache = CacheParams(a.S if S is None else S, a.L, a.gamma if gamma is None else gamma)
    return net, cache, BackhaulModel(a.c1, a.c2)


def _inputs_row(a, net, cache):
    return [net.lam, net.alpha, net.snr_db, net.target_rate, cache.storage, cache.file_length,
            cache.gamma, a.c1, a.c2, a.fading]


def _analytic_row(a, net, cache, backhaul):
    quad, fading = _quad(a), _fading(a)
    p = outage_probability(net, cache, quad, fading)
    tau = avg_delivery_rate(net, cache, backhaul, quad, fading)
    return [p.value, tau.value, p.path.value, p.estimated_error]


def _sim_config(a) -> SimConfig:
    return SimConfig(realizations=a.realizations, seed=a.seed, window_radius_factor=a.window_factor,
                     workers=a.workers)


def _sim_row(a, net, cache, backhaul):
    r = estimate(net, cache, backhaul, _sim_config(a))
    return [r.outage_mean, r.outage_std_err, r.delivery_mean, r.delivery_std_err, r.n, a.seed]


def _rows_analytic(a):
    net, cache, bh = _models(a)
    yield INPUT_COLUMNS + ANALYTIC_COLUMNS
    yield _inputs_row(a, net, cache) + _analytic_row(a, net, cache, bh)


def _rows_simulate(a):
    net, cache, bh = _models(a)
    _sim_config(a)  # validate before emitting the header
    yield INPUT_COLUMNS + SIM_COLUMNS
    yield _inputs_row(a, net, cache) + _sim_row(a, net, cache, bh)


def _rows_sweep(a):
    grid = _grid(a.start, a.stop, a.step)
    simulate = a.realizations is not None
    if simulate:
        _sim_config(a)
    header = INPUT_COLUMNS + ANALYTIC_COLUMNS + (SIM_COLUMNS if simulate else [])
    if a.var == "s_total":
        header = ["s_total"] + header
    models = []
    for x in grid:
        x = float(x)
        if a.var == "S":
            models.append(_models(a, S=x))
        elif a.var == "lambda":
            models.append(_models(a, lam=x))
        elif a.var == "T":
            models.append(_models(a, T=x))
        elif a.var == "gamma":
            models.append(_models(a, gamma=x))
        else:
            if not x > 0:
                raise UsageError("s_total values must be > 0")
            models.append(_models(a, S=x / a.lam))
    yield header
    for x, (net, cache, bh) in zip(grid, models):
        row = _inputs_row(a, net, cache) + _analytic_row(a, net, cache, bh)
        if simulate:
            row += _sim_row(a, net, cache, bh)
        if a.var == "s_total":
            row = [float(x)] + row
        yield row


def _rows_tradeoff(a):
    grid = _grid(a.s_total_start, a.s_total_stop, a.s_total_step)
    if not grid[0] > 0:
        raise UsageError("s_total values must be > 0")
    template = TradeoffQuery(
        s_total=float(grid[0]), p_dagger=a.p_dagger, target_rate=a.T, alpha=a.alpha,
        file_length=a.L, gamma=a.gamma, snr_db=a.snr_db, bracket=(a.lambda_lo, a.lambda_hi),
        tol=a.tol, fading=_fading(a), quad=_quad(a),
    )
    points = tradeoff_curve(grid, template)
    yield TRADEOFF_COLUMNS
    for pt in points:
        if not pt.feasible:
            log.warning("s_total=%s: outage cap %s not reachable (closest %.6g at lambda=%.6g)",
                        _fmt(pt.s_total), a.p_dagger, pt.achieved_outage, pt.lambda_star)
        yield [pt.s_total, pt.lambda_star, pt.achieved_outage, pt.feasible]


_COMMANDS = {
    "analytic": _rows_analytic,
    "simulate": _rows_simulate,
    "sweep": _rows_sweep,
    "tradeoff": _rows_tradeoff,
}


def run(spec: RunSpec) -> int:
    """Execute a parsed run; rows are fully computed before anything is written."""
    a = spec.args
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", BackhaulWarning)
            rows = [[_fmt(v) for v in row] for row in _COMMANDS[spec.command](a)]
        seen = set()
        for w in caught:
            msg = str(w.message)
            if issubclass(w.category, BackhaulWarning):
                if msg not in seen:
                    log.warning("%s", msg)
                seen.add(msg)
            else:
                warnings.showwarning(w.message, w.category, w.filename, w.lineno)
    except (UsageError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (QuadratureError, ProbabilityRangeError, SolverError, ArithmeticError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC

    with contextlib.ExitStack() as stack:
        if a.output in (None, "-"):
            fh = sys.stdout
        else:
            try:
                fh = stack.enter_context(open(a.output, "w", encoding="utf-8", newline=""))
            except OSError as exc:
                log.error("cannot open output: %s", exc)
                return EXIT_USAGE
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(rows)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _expand_config(argv)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return run(RunSpec(args.command, args))


if __name__ == "__main__":
    sys.exit(main())
