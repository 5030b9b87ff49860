"""Command-line driver: closed-form solutions, dispersive runs and sweeps.

Exit codes: 0 success, 2 invalid input, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import io
import itertools
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .madelung import compare
from .spectral import (
    Grid,
    InitialConditionSpec,
    RunRecord,
    SpectralUnderresolvedError,
    StepUnderflowError,
    WaveField,
    build_initial_condition,
    evolve,
    write_snapshot,
)
from .talanov import (
    InvalidParameterError,
    TalanovParams,
    classify,
    sigma_of_time,
    support_halfwidth,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ABORT = 3

MODES = ("classify", "dispersionless", "evolve", "sweep", "compare")
DISPERSIONLESS_CAP = 0.999
RELAXATION_HORIZON = 3.0
BLOWUP_HORIZON = 1.3

RECORD_HEADER = ("t", "center_amp", "max_amp", "argmax_x", "mass", "hamiltonian")
SIGMA_HEADER = ("t", "sigma", "alpha", "mu", "gamma", "support_halfwidth", "center_amp")
CLASSIFY_HEADER = ("regime", "branch", "t_c", "t_min", "sigma_min")
SWEEP_HEADER = ("alpha0", "epsilon", "t_c", "t_max", "peak_amp", "rel_err",
                "regime_agreement", "peak_x", "off_center", "status")

# a peak further than this from the centre is the edge ripple, not the focus
OFF_CENTER = 0.1


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    mode: str
    params: TalanovParams
    epsilon: Optional[float] = None
    N: int = 10
    grid: Grid = field(default_factory=Grid)
    t_end: Optional[float] = None
    rel_tol: float = 1e-9
    sample_interval: float = 0.002
    output_path: Optional[str] = None
    snapshot_times: tuple = ()
    tail_tol: float = 1e-10
    dealias: bool = False
    zero_field: bool = False
    alpha0_list: tuple = ()
    epsilon_list: tuple = ()
    workers: int = 1


@dataclass(frozen=True)
class SweepRow:
    alpha0: float
    epsilon: float
    t_c: Optional[float]
    t_max: Optional[float]
    peak_amp: Optional[float]
    regime_agreement: Optional[bool]
    peak_x: Optional[float] = None
    status: str = "ok"

    @property
    def rel_err(self) -> Optional[float]:
        if self.t_c is None or self.t_max is None:
            return None
        return abs(self.t_max - self.t_c) / self.t_c

    @property
    def off_center(self) -> Optional[bool]:
        if self.peak_x is None or self.t_max is None:
            return None
        return abs(self.peak_x) > OFF_CENTER

    def cells(self):
        return (self.alpha0, self.epsilon, self.t_c, self.t_max, self.peak_amp, self.rel_err,
                self.regime_agreement, self.peak_x, self.off_center, self.status)


def fmt(v) -> str:
    """Shortest round-trip text for CSV cells."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_line(values) -> str:
    return ",".join(fmt(v) for v in values) + "\n"


# --------------------------------------------------------------------------- parsing

def _float_list(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _power_of_two(text: str) -> int:
    n = int(text)
    if n < 2 or n & (n - 1):
        raise argparse.ArgumentTypeError(f"{n} is not a power of two")
    return n


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off", ""):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    p.add_argument("--alpha0", type=float, default=None, help="initial chirp")
    p.add_argument("--gamma0", type=float, default=-1.0, help="initial curvature (default -1)")
    p.add_argument("--mu0", type=float, default=1.0, help="initial height (default 1)")
    p.add_argument("--epsilon", type=float, default=None, help="dispersion parameter")
    p.add_argument("--N", type=int, default=10, help="product truncation order (default 10)")
    p.add_argument("--L", type=float, default=32.0, help="box length (default 32)")
    p.add_argument("--points", type=_power_of_two, default=16384,
                   help="grid points, a power of two (default 16384)")
    p.add_argument("--paper-scale", action="store_true",
                   help="use L=64 and 131072 points")
    p.add_argument("--t-end", type=float, default=None, help="final time (evolve/sweep default: 1.3*t_c, at least 1, or 3 without blow-up)")
    p.add_argument("--rel-tol", type=float, default=1e-9,
                   help="time-stepping tolerance (default 1e-9)")
    p.add_argument("--sample-interval", type=float, default=0.002,
                   help="diagnostic sampling interval (default 0.002)")
    p.add_argument("--tail-tol", type=float, default=1e-10,
                   help="spectral tail guard threshold (default 1e-10)")
    p.add_argument("--dealias", action="store_true", help="apply the 2/3-rule mask")
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p.add_argument("--snapshots", type=_float_list, default=(),
                   help="comma-separated times at which to write binary snapshots")
    p.add_argument("--zero-field", action="store_true",
                   help="evolve psi = 0 instead of the parabolic data")
    p.add_argument("--alpha0-list", type=_float_list, default=(), help="sweep chirps")
    p.add_argument("--epsilon-list", type=_float_list, default=(), help="sweep dispersions")
    p.add_argument("--workers", type=int, default=1, help="sweep worker threads (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="talanov-nls",
        description="Self-similar dispersionless solutions and dispersive NLS runs.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    helps = {
        "classify": "regime, branch and catastrophe time of the parabolic data",
        "dispersionless": "sample the closed-form solution in time",
        "evolve": "run the dispersive equation and write its time series",
        "sweep": "compare runs over lists of alpha0 and epsilon",
        "compare": "compare one dispersive run with the closed-form solution",
    }
    for mode in MODES:
        _add_common(sub.add_parser(mode, help=helps[mode], description=helps[mode]))
    return parser


def read_config(path) -> dict:
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


_BOOL_KEYS = {"paper_scale", "dealias", "zero_field"}


def parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            conf = read_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}")
        sub = parser._subparsers._group_actions[0].choices[args.mode]
        known = {a.dest for a in sub._actions}
        unknown = set(conf) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        defaults = {}
        for key, value in conf.items():
            defaults[key] = _bool(value) if key in _BOOL_KEYS else value
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def to_config(args: argparse.Namespace) -> RunConfig:
    if args.alpha0 is None and args.mode not in ("sweep",):
        raise UsageError("--alpha0 is required")
    alpha0 = 0.0 if args.alpha0 is None else args.alpha0
    params = TalanovParams(args.mu0, args.gamma0, alpha0)
    length, points = (64.0, 2**17) if args.paper_scale else (args.L, args.points)
    for name in ("rel_tol", "sample_interval", "tail_tol"):
        if not getattr(args, name) > 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    if args.epsilon is not None and not args.epsilon > 0:
        raise UsageError("--epsilon must be positive")
    if args.N < 1:
        raise UsageError("--N must be at least 1")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    return RunConfig(
        mode=args.mode, params=params, epsilon=args.epsilon, N=args.N,
        grid=Grid(length, points), t_end=args.t_end, rel_tol=args.rel_tol,
        sample_interval=args.sample_interval, output_path=args.out,
        snapshot_times=tuple(args.snapshots), tail_tol=args.tail_tol, dealias=args.dealias,
        zero_field=args.zero_field, alpha0_list=tuple(args.alpha0_list),
        epsilon_list=tuple(args.epsilon_list), workers=args.workers,
    )


# --------------------------------------------------------------------------- commands

def cmd_classify(cfg: RunConfig, out) -> int:
    oc = classify(cfg.params)
    parts = [oc.kind.value]
    if oc.t_c is not None:
        parts.append(f"t_c={oc.t_c:.6f}")
    if oc.t_min is not None:
        parts.append(f"t_min={oc.t_min:.6f} sigma_min={oc.sigma_min:.6f}")
    parts.append(f"branch={oc.branch.value}")
    out.write(" ".join(parts) + "\n")
    out.write(csv_line(CLASSIFY_HEADER))
    out.write(csv_line((oc.kind.value, oc.branch.value, oc.t_c, oc.t_min, oc.sigma_min)))
    return EXIT_OK


def cmd_dispersionless(cfg: RunConfig, out) -> int:
    p = cfg.params
    t_end = cfg.t_end if cfg.t_end is not None else _default_t_end(p)
    if not t_end > 0 or not math.isfinite(t_end):
        raise UsageError("--t-end must be a positive number")
    oc = classify(p)
    if oc.t_c is not None and t_end > DISPERSIONLESS_CAP * oc.t_c:
        t_end = DISPERSIONLESS_CAP * oc.t_c
    n = max(1, math.ceil(t_end / cfg.sample_interval - 1e-9))
    out.write(csv_line(SIGMA_HEADER))
    for t in np.linspace(0.0, t_end, n + 1):
        st = sigma_of_time(p, float(t))
        out.write(csv_line((st.t, st.sigma, st.alpha, st.mu, st.gamma,
                            support_halfwidth(p, st.sigma), math.sqrt(st.mu))))
    return EXIT_OK


def _check_dispersive(cfg: RunConfig):
    p = cfg.params
    if p.mu0 != 1.0 or p.gamma0 != -1.0:
        raise UsageError("the dispersive initial data are defined only for mu0=1, gamma0=-1")
    if cfg.epsilon is None:
        raise UsageError("--epsilon is required")


def _default_t_end(p: TalanovParams) -> float:
    oc = classify(p)
    if oc.t_c is None:
        return RELAXATION_HORIZON
    return max(1.0, BLOWUP_HORIZON * oc.t_c)


def _initial_field(cfg: RunConfig, alpha0: float, epsilon: float) -> WaveField:
    if cfg.zero_field:
        return WaveField(cfg.grid, epsilon, np.zeros(cfg.grid.points, dtype=complex))
    return build_initial_condition(InitialConditionSpec(alpha0, epsilon, cfg.N), cfg.grid)


def run_one(cfg: RunConfig, alpha0: float, epsilon: float, t_end: Optional[float] = None,
            snapshot_times=()) -> RunRecord:
    """Evolve the configured initial data; aborts propagate with partial records."""
    p = TalanovParams(1.0, -1.0, alpha0)
    t_end = t_end if t_end is not None else (cfg.t_end or _default_t_end(p))
    if not t_end > 0:
        raise UsageError("--t-end must be positive")
    return evolve(_initial_field(cfg, alpha0, epsilon), t_end, rel_tol=cfg.rel_tol,
                  sample_interval=cfg.sample_interval, snapshot_times=snapshot_times,
                  tail_tol=cfg.tail_tol, dealias=cfg.dealias)


def write_record(record: RunRecord, out):
    out.write(csv_line(RECORD_HEADER))
    for row in zip(record.sample_times, record.center_amp, record.max_amp, record.argmax_x,
                   record.mass, record.hamiltonian):
        out.write(csv_line(row))


def _snapshot_path(base: Optional[str], t: float) -> Path:
    stem = Path(base).with_suffix("") if base else Path("snapshot")
    return Path(f"{stem}_t{t!r}.nlsf")


def cmd_evolve(cfg: RunConfig, out) -> int:
    _check_dispersive(cfg)
    try:
        record = run_one(cfg, cfg.params.alpha0, cfg.epsilon, snapshot_times=cfg.snapshot_times)
    except (SpectralUnderresolvedError, StepUnderflowError) as exc:
        if exc.record is not None:
            write_record(exc.record, out)
        kind = "underresolved" if isinstance(exc, SpectralUnderresolvedError) else "step underflow"
        out.write(f"# aborted: {kind} at t={exc.t!r}\n")
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    write_record(record, out)
    for t, psi in sorted(record.snapshots.items()):
        write_snapshot(_snapshot_path(cfg.output_path, t), WaveField(cfg.grid, cfg.epsilon, psi, t))
    return EXIT_OK


def sweep_row(cfg: RunConfig, alpha0: float, epsilon: float) -> SweepRow:
    p = TalanovParams(1.0, -1.0, alpha0)
    t_c = classify(p).t_c
    try:
        record = run_one(cfg, alpha0, epsilon)
    except SpectralUnderresolvedError as exc:
        return SweepRow(alpha0, epsilon, t_c, None, None, None, status=f"underresolved@{exc.t!r}")
    except StepUnderflowError as exc:
        return SweepRow(alpha0, epsilon, t_c, None, None, None, status=f"underflow@{exc.t!r}")
    rep = compare(p, record)
    return SweepRow(alpha0, epsilon, rep.t_c, rep.t_max, rep.peak_amp, rep.regime_agreement,
                    rep.peak_x)


def run_sweep(cfg: RunConfig) -> list[SweepRow]:
    pairs = list(itertools.product(cfg.alpha0_list, cfg.epsilon_list))
    for a, _ in pairs:
        TalanovParams(1.0, -1.0, a)
    if cfg.workers == 1 or len(pairs) < 2:
        return [sweep_row(cfg, a, e) for a, e in pairs]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda ae: sweep_row(cfg, *ae), pairs))


def cmd_sweep(cfg: RunConfig, out) -> int:
    if not cfg.zero_field and (cfg.params.mu0 != 1.0 or cfg.params.gamma0 != -1.0):
        raise UsageError("the dispersive initial data are defined only for mu0=1, gamma0=-1")
    if any(not e > 0 for e in cfg.epsilon_list):
        raise UsageError("epsilon values must be positive")
    out.write(csv_line(SWEEP_HEADER))
    for row in run_sweep(cfg):
        out.write(csv_line(row.cells()))
    return EXIT_OK


def cmd_compare(cfg: RunConfig, out) -> int:
    _check_dispersive(cfg)
    row = sweep_row(cfg, cfg.params.alpha0, cfg.epsilon)
    out.write(csv_line(SWEEP_HEADER))
    out.write(csv_line(row.cells()))
    return EXIT_OK if row.status == "ok" else EXIT_ABORT


COMMANDS = {
    "classify": cmd_classify,
    "dispersionless": cmd_dispersionless,
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    try:
        args = parse(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        cfg = to_config(args)
    except (UsageError, InvalidParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    buf = io.StringIO()
    try:
        code = COMMANDS[cfg.mode](cfg, buf)
    except (UsageError, InvalidParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = buf.getvalue()
    if cfg.output_path:
        Path(cfg.output_path).write_text(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
