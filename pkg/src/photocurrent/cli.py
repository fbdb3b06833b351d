"""Command-line front end.

Subcommands: ``current``, ``sweep``, ``distribution``, ``simulate``,
``verify-bound`` and ``validate``. Tables go out as CSV (12 significant
digits), records as JSON; the same arguments always produce the same bytes.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import lindblad as lb
from . import photon_stats as ps
from .bound import DEFAULT_GRID_SIZE, max_classical_current
from .currents import ConverterParams, current, fock_current, full_statistics_current
from .errors import DomainError, PhotocurrentError
from .validate import format_table, run_suite, suite_passed

log = logging.getLogger("photocurrent")

OUTDIR_ENV = "PHOTOCURRENT_OUTDIR"
SWEEP_HEADER = "n_mean,J_poisson,J_thermal,J_subpoisson"
_LARGE_R_SQ = 1e8

GXI2_HELP = (
    "squared coupling ratio r_sq = (gamma / |xi0|)**2 of tunnelling rate to light-matter "
    "coupling (default 1.5). Some figure captions quote this ratio as gamma/|xi0| without "
    "the square; the value given here is always used as r_sq in J = 2x / (4x + r_sq)."
)


def fmt(v: float) -> str:
    """Locale-independent 12-significant-digit rendering."""
    s = f"{float(v):.12g}"
    return "0" if s == "-0" else s


def _round(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dump_json(obj) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- argument parsing


def parse_sweep(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected lo:hi:steps, got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo < 0.0 or hi < lo or steps < 2:
        raise argparse.ArgumentTypeError("need 0 <= lo <= hi and steps >= 2")
    return lo, hi, steps


def positive(text: str) -> float:
    v = float(text)
    if not (math.isfinite(v) and v > 0.0):
        raise argparse.ArgumentTypeError(f"must be finite and > 0, got {text}")
    return v


def nonneg(text: str) -> float:
    v = float(text)
    if not (math.isfinite(v) and v >= 0.0):
        raise argparse.ArgumentTypeError(f"must be finite and >= 0, got {text}")
    return v


def occupation(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"lead occupation must lie in [0, 1], got {text}")
    return v


def stat_spec(text: str) -> str:
    if text in (ps.POISSON, ps.THERMAL, ps.SUBPOISSON) or text.startswith("custom:"):
        return text
    raise argparse.ArgumentTypeError(
        f"--stat must be poisson, thermal, subpoisson or custom:<path>, got {text!r}")


def _common(p: argparse.ArgumentParser, stat=True, nbar=True, model=True, out=True):
    if stat:
        p.add_argument("--stat", type=stat_spec, default=ps.POISSON,
                       help="photon statistics: poisson, thermal, subpoisson or custom:<csv path>")
    if nbar:
        p.add_argument("--nbar", type=nonneg, default=1.0,
                       help="mean photon number (ignored for custom statistics)")
    p.add_argument("--gxi2", type=positive, default=1.5, help=GXI2_HELP)
    if model:
        g = p.add_argument_group("full converter model (any flag switches it on)")
        g.add_argument("--kappa", type=nonneg, help="spontaneous emission rate")
        g.add_argument("--gamma-a", type=nonneg, help="tunnelling rate of the upper level")
        g.add_argument("--gamma-b", type=nonneg, help="tunnelling rate of the lower level")
        g.add_argument("--nbar-a", type=occupation, help="occupation of the right lead")
        g.add_argument("--nbar-b", type=occupation, help="occupation of the left lead")
        g.add_argument("--gamma-ref", type=positive,
                       help="reference rate defining the current unit; required with the full model")
    if out:
        p.add_argument("--out", help=f"output file (default: stdout, or ${OUTDIR_ENV}/<command>.<format>)")
        p.add_argument("--format", choices=("csv", "json"), help="output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photocurrent",
        description="Steady photoelectric current for light with arbitrary photon statistics.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("current", help="current for one statistics / mean photon number")
    _common(p)

    p = sub.add_parser("sweep", help="Poisson, thermal and sub-Poisson currents over a range of means")
    _common(p, stat=False, nbar=False)
    p.add_argument("--sweep", type=parse_sweep, default=(0.0, 60.0, 121),
                   help="lo:hi:steps range of mean photon numbers (default 0:60:121)")
    p.add_argument("--workers", type=int, default=1, help="threads used to evaluate rows")

    p = sub.add_parser("distribution", help="photon-number distribution as n,P_n CSV")
    p.add_argument("--stat", type=stat_spec, default=ps.POISSON)
    p.add_argument("--nbar", type=nonneg, default=1.0)
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="integrate one coherent branch to its steady state")
    _common(p, stat=False)
    p.add_argument("--phase", type=float, default=0.0, help="phase of alpha (radians)")
    p.add_argument("--method", choices=("ode", "density-matrix"), default="ode")

    p = sub.add_parser("verify-bound", help="classical upper-bound certificate as JSON")
    _common(p, stat=False, model=False)
    p.add_argument("--grid-size", type=int, default=DEFAULT_GRID_SIZE)

    p = sub.add_parser("validate", help="run the cross-oracle validation suite")
    p.add_argument("--quick", action="store_true", help="fewer samples and parameter sets")
    p.add_argument("--perturb-branch", type=float, default=0.0, help=argparse.SUPPRESS)

    for name, action in sub.choices.items():
        if name not in ("distribution",):
            action.add_argument("--seed", type=int, default=0, help="random seed")
    return parser


# ---------------------------------------------------------------- helpers


def params_from_args(args) -> ConverterParams:
    if args.gxi2 > _LARGE_R_SQ:
        log.warning("r_sq = %g is very large; the current is ~2 nbar / r_sq and may underflow",
                    args.gxi2)
    flags = ("kappa", "gamma_a", "gamma_b", "nbar_a", "nbar_b", "gamma_ref")
    given = {k: getattr(args, k, None) for k in flags}
    if all(v is None for v in given.values()):
        return ConverterParams.simplified(args.gxi2)
    if given["gamma_ref"] is None:
        raise DomainError("--gamma-ref is required when full-model rates are given")
    defaults = ConverterParams()
    kw = {k: (getattr(defaults, k) if v is None else v) for k, v in given.items()}
    return ConverterParams(r_sq=args.gxi2, **kw)


def stat_from_args(spec: str, nbar: float) -> ps.PhotonStatistics:
    if spec.startswith("custom:"):
        return ps.read_distribution_csv(spec[len("custom:"):])
    if spec == ps.POISSON:
        return ps.PhotonStatistics.poisson(nbar)
    if spec == ps.THERMAL:
        return ps.PhotonStatistics.thermal(nbar)
    return ps.PhotonStatistics.subpoisson_with_mean(nbar)


def warn_ill_conditioned(stat: ps.PhotonStatistics, r_sq: float) -> None:
    """Warn when a custom-distribution current comes from heavy cancellation.

    Per-Fock currents alternate in sign and grow factorially once ``4 n > r_sq``,
    so ``sum P_n j_n`` can be dominated by the far tail of the distribution.
    """
    if stat.kind != ps.CUSTOM:
        return
    terms = [p * fock_current(n, r_sq) for n, p in enumerate(stat.probs) if p]
    spread = math.fsum(abs(t) for t in terms)
    if spread > 10.0 * (abs(math.fsum(terms)) + 1.0):
        log.warning("custom distribution at r_sq=%g: the Fock sum cancels terms as large as "
                    "%.3g in total, so the current depends strongly on the distribution's tail",
                    r_sq, spread)


def model_current(params: ConverterParams, stat: ps.PhotonStatistics) -> float:
    if params.is_simplified:
        return current(stat, params.r_sq).value
    return full_statistics_current(params, stat).value


def sweep_table(params: ConverterParams, lo: float, hi: float, steps: int,
                workers: int = 1) -> list[tuple[float, float, float, float]]:
    means = np.linspace(lo, hi, steps)

    def row(n):
        n = float(n)
        return (n,
                model_current(params, ps.PhotonStatistics.poisson(n)),
                model_current(params, ps.PhotonStatistics.thermal(n)),
                model_current(params, ps.PhotonStatistics.subpoisson_with_mean(n)))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(row, means))
    return [row(n) for n in means]


def format_sweep_csv(rows) -> str:
    lines = [SWEEP_HEADER] + [",".join(fmt(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def _params_dict(params: ConverterParams) -> dict:
    return {"gamma_a": params.gamma_a, "gamma_b": params.gamma_b, "kappa": params.kappa,
            "nbar_a": params.nbar_a, "nbar_b": params.nbar_b, "r_sq": params.r_sq,
            "gamma_ref": params.gamma_ref}


def emit(text: str, args, default_name: str) -> None:
    out = getattr(args, "out", None)
    if out is None and os.environ.get(OUTDIR_ENV):
        out = str(Path(os.environ[OUTDIR_ENV]) / default_name)
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------- commands


def cmd_current(args) -> int:
    params = params_from_args(args)
    stat = stat_from_args(args.stat, args.nbar)
    if params.is_simplified:
        warn_ill_conditioned(stat, params.r_sq)
    j = model_current(params, stat)
    mean = ps.moments(stat).mean
    fmt_ = args.format or "json"
    if fmt_ == "csv":
        text = f"stat,n_mean,r_sq,J\n{stat.kind},{fmt(mean)},{fmt(params.r_sq)},{fmt(j)}\n"
    else:
        text = dump_json({"stat": stat.kind, "n_mean": mean, "params": _params_dict(params),
                          "J_over_gamma": j})
    emit(text, args, f"current.{fmt_}")
    return 0


def cmd_sweep(args) -> int:
    params = params_from_args(args)
    lo, hi, steps = args.sweep
    rows = sweep_table(params, lo, hi, steps, max(1, args.workers))
    if (args.format or "csv") == "json":
        keys = SWEEP_HEADER.split(",")
        text = dump_json([dict(zip(keys, r)) for r in rows])
        emit(text, args, "sweep.json")
    else:
        emit(format_sweep_csv(rows), args, "sweep.csv")
    return 0


def cmd_distribution(args) -> int:
    stat = stat_from_args(args.stat, args.nbar)
    emit(ps.format_distribution_csv(ps.pmf_vector(stat)), args, "distribution.csv")
    return 0


def cmd_simulate(args) -> int:
    params = params_from_args(args)
    alpha = ps.BranchAmplitude(args.nbar, args.phase % (2.0 * math.pi))
    if args.method == "ode":
        state = lb.integrate_to_steady(params, alpha)
        method = "ode_oracle"
    else:
        state = lb.observables(lb.converter_steady(params, alpha))
        method = "density_matrix"
    record = {
        "params": _params_dict(params),
        "alpha_sq": alpha.magnitude_sq,
        "steady": {"n_a": state.n_a, "n_b": state.n_b,
                   "re_tau": state.tau_plus.real, "im_tau": state.tau_plus.imag},
        "J_over_gamma": state.right_current(params),
        "method": method,
    }
    emit(dump_json(record), args, "simulate.json")
    return 0


def cmd_verify_bound(args) -> int:
    params_from_args(args)
    if args.nbar <= 0.0:
        raise DomainError("verify-bound needs --nbar > 0")
    cert = max_classical_current(args.nbar, args.gxi2, grid_size=args.grid_size)
    emit(dump_json(cert.to_dict()), args, "verify-bound.json")
    return 0


def cmd_validate(args) -> int:
    rows = run_suite(seed=args.seed, quick=args.quick, perturb_branch=args.perturb_branch)
    print(format_table(rows))
    failed = [r.name for r in rows if not r.passed and not r.informational]
    if failed:
        print("FAILED: " + "; ".join(failed), file=sys.stderr)
        return 1
    return 0


COMMANDS = {
    "current": cmd_current,
    "sweep": cmd_sweep,
    "distribution": cmd_distribution,
    "simulate": cmd_simulate,
    "verify-bound": cmd_verify_bound,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (PhotocurrentError, ValueError, OSError) as exc:
        print(f"photocurrent {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
