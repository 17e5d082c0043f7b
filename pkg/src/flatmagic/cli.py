"""Command-line front end.

Every subcommand emits rows with the fixed columns in ``COLUMNS``; floats
are written with 17 significant digits in CSV and as round-trip floats in
JSON.  Exit status: 0 success, 2 usage error, 3 numerical flag raised.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
from typing import Any

import numpy as np

from .measures import (
    fit_scaling,
    ipr,
    multifractal_flatness,
    participation_entropy,
    stabilizer_entropy,
)
from .oracles import (
    haar_flatness_std,
    haar_ipr_moment,
    haar_mean_flatness,
    haar_mean_stabilizer_purity,
    sample_haar_state,
    HaarMomentSpec,
)
from .orbit import orbit_average, samples_to_accuracy, theorem_rhs
from .readout import ReadoutModel, device_experiment
from .state import new_basis_state, prepare_bloch, product_state, rxx_state

log = logging.getLogger("flatmagic")

COLUMNS = [
    "command",
    "state",
    "n_qubits",
    "protocol",
    "q",
    "theta",
    "quantity",
    "value",
    "std_error",
    "n_samples",
    "flag",
    "seed",
    "config_hash",
]

EXACT_M2_MAX_QUBITS = 12


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(eval_angle(t)) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def eval_angle(text: str) -> float:
    """Parse a float, allowing ``pi`` multiples like ``pi/4`` or ``3*pi/2``."""
    t = text.strip().lower().replace("π", "pi")
    if "pi" not in t:
        return float(t)
    num, _, den = t.partition("/")
    num = num.replace("*", "").replace("pi", "")
    factor = {"": 1.0, "+": 1.0, "-": -1.0}.get(num)
    if factor is None:
        factor = float(num)
    return factor * math.pi / (float(den) if den else 1.0)


def _angle(text: str) -> float:
    try:
        return eval_angle(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flatmagic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", default="bloch", help="basis:BITS | BITS | bloch | rxx | haar")
    common.add_argument("--n-qubits", type=int, default=1)
    common.add_argument("--theta", type=_angle, default=math.pi / 2)
    common.add_argument("--phi", type=_angle, default=math.pi / 4)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="-")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("measure", parents=[common], help="exact measures of one state")
    p.add_argument("--q-list", type=_floats, default=[2.0])

    p = sub.add_parser("orbit", parents=[common], help="Clifford-orbit average of the flatness")
    p.add_argument("--protocol", default="global", help="comma list of global,local-walk,layer-walk,exact")
    p.add_argument("--samples", type=int, default=10_000)

    p = sub.add_parser("scaling", parents=[common], help="samples needed for a target sigma(M2)")
    p.add_argument("--protocol", default="local-walk")
    p.add_argument("--n-range", default="2:7", help="inclusive range MIN:MAX")
    p.add_argument("--target-sigma", type=float, default=0.1)
    p.add_argument("--max-samples", type=int, default=10**6)
    p.add_argument("--min-samples", type=int, default=100)

    p = sub.add_parser("device", parents=[common], help="simulated noisy two-qubit readout")
    p.add_argument("--theta-points", type=int, default=17)
    p.add_argument("--theta-list", type=_floats, default=None)
    p.add_argument("--samples", type=int, default=60, help="Clifford realizations per theta")
    p.add_argument("--shots", type=int, default=4096)
    p.add_argument("--noise-p", type=float, default=0.045)
    p.add_argument("--noise-q", type=float, default=0.02)
    p.add_argument("--negativity", choices=["keep", "clip"], default="keep")

    p = sub.add_parser("haar-stats", parents=[common], help="Haar ensemble versus closed forms")
    p.add_argument("--samples", type=int, default=200, help="ensemble size")
    return parser


def config_hash(args: argparse.Namespace) -> str:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "format", "workers", "verbose")}
    blob = json.dumps(cfg, sort_keys=True, default=repr).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _spawn(seed: int) -> tuple[np.random.Generator, np.random.SeedSequence]:
    state_ss, sample_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(state_ss), sample_ss


def make_state(spec: str, n_qubits: int, theta: float, phi: float, seed: int):
    spec = spec.strip().lower()
    if spec.startswith("basis:") or (spec and set(spec) <= {"0", "1"}):
        bits = spec.split(":", 1)[-1]
        return new_basis_state(len(bits), bits)
    if n_qubits < 1:
        raise UsageError("--n-qubits must be positive")
    if spec == "bloch":
        return product_state(prepare_bloch(theta, phi), n_qubits)
    if spec == "rxx":
        return rxx_state(theta)
    if spec == "haar":
        return sample_haar_state(n_qubits, _spawn(seed)[0])
    raise UsageError(f"unknown state specification {spec!r}")


class Emitter:
    def __init__(self, args: argparse.Namespace):
        self.rows: list[dict[str, Any]] = []
        self.base = {"command": args.command, "seed": args.seed, "config_hash": config_hash(args)}
        self.flagged = False

    def row(self, **fields):
        row = {c: None for c in COLUMNS}
        row.update(self.base)
        row.update(fields)
        if row.get("flag"):
            self.flagged = True
        for key in ("value", "std_error", "q", "theta"):
            v = row[key]
            if v is not None:
                v = float(v)
                row[key] = v + 0.0 if math.isfinite(v) else None
        self.rows.append(row)

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.rows, indent=1) + "\n"
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in self.rows:
            writer.writerow([_csv_cell(row[c]) for c in COLUMNS])
        return buf.getvalue()


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _protocols(text: str) -> list[str]:
    names = [t.strip().replace("-", "_") for t in text.split(",") if t.strip()]
    for n in names:
        if n not in ("global", "local_walk", "layer_walk", "exact"):
            raise UsageError(f"unknown protocol {n!r}")
    return names


def cmd_measure(args, out: Emitter):
    state = make_state(args.state, args.n_qubits, args.theta, args.phi, args.seed)
    n = state.n_qubits
    common = dict(state=args.state, n_qubits=n)
    for q in args.q_list:
        if q <= 0:
            raise UsageError("Renyi indices must be positive")
        out.row(**common, q=q, quantity="ipr", value=ipr(state, q))
        out.row(**common, q=q, quantity="participation_entropy", value=participation_entropy(state, q))
        if n <= EXACT_M2_MAX_QUBITS:
            out.row(**common, q=q, quantity="stabilizer_entropy", value=stabilizer_entropy(state, q))
    out.row(**common, quantity="flatness", value=multifractal_flatness(state))


def cmd_orbit(args, out: Emitter):
    state = make_state(args.state, args.n_qubits, args.theta, args.phi, args.seed)
    n, d = state.n_qubits, state.dim
    common = dict(state=args.state, n_qubits=n)
    _, sample_ss = _spawn(args.seed)
    if n <= EXACT_M2_MAX_QUBITS:
        m2 = stabilizer_entropy(state, 2)
        out.row(**common, quantity="m2_exact", value=m2)
        out.row(**common, quantity="theorem_rhs", value=theorem_rhs(m2, d))
    for k, protocol in enumerate(_protocols(args.protocol)):
        if protocol != "exact" and args.samples < 2:
            raise UsageError("--samples must be at least 2")
        ss = np.random.SeedSequence(sample_ss.entropy, spawn_key=sample_ss.spawn_key + (k,))
        est = orbit_average(state, protocol, args.samples, ss, workers=args.workers)
        row = dict(common, protocol=protocol, n_samples=est.n_samples)
        out.row(**row, quantity="mean_flatness", value=est.mean_flatness, std_error=est.std_error)
        out.row(
            **row,
            quantity="m2_estimate",
            value=est.m2_estimate,
            std_error=est.m2_std_error,
            flag=int(est.out_of_range),
        )
    print(
        f"cost: direct M2 enumeration ~ 2^(3N) = {8**n}; orbit sampling ~ 2^(2N) = {4**n} per unit accuracy",
        file=sys.stderr,
    )


def _n_range(text: str) -> range:
    try:
        lo, hi = (int(t) for t in text.split(":"))
    except ValueError:
        raise UsageError(f"bad --n-range {text!r}, expected MIN:MAX") from None
    if lo < 1 or hi < lo:
        raise UsageError(f"bad --n-range {text!r}")
    return range(lo, hi + 1)


def cmd_scaling(args, out: Emitter):
    (protocol,) = _protocols(args.protocol)
    if args.target_sigma <= 0:
        raise UsageError("--target-sigma must be positive")
    _, sample_ss = _spawn(args.seed)
    points = []
    for n in _n_range(args.n_range):
        state = make_state(args.state, n, args.theta, args.phi, args.seed + n)
        ss = np.random.SeedSequence(sample_ss.entropy, spawn_key=sample_ss.spawn_key + (n,))
        res = samples_to_accuracy(
            state, protocol, args.target_sigma, ss, args.max_samples, min_samples=args.min_samples
        )
        out.row(
            state=args.state,
            n_qubits=n,
            protocol=protocol,
            quantity="n_target",
            value=res.n_samples,
            std_error=res.m2_std_error,
            n_samples=res.n_samples,
            flag=int(res.saturated),
        )
        log.info("N=%d: %d samples (saturated=%s)", n, res.n_samples, res.saturated)
        points.append((n, math.log2(res.n_samples)))
    if len(points) >= 2:
        fit = fit_scaling(points)
        out.row(state=args.state, protocol=protocol, quantity="fitted_exponent", value=fit.d_q, std_error=math.sqrt(fit.residual))
        out.row(state=args.state, protocol=protocol, quantity="fitted_intercept", value=fit.c_q)


def cmd_device(args, out: Emitter):
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    if args.shots < 1:
        raise UsageError("--shots must be positive")
    try:
        model = ReadoutModel(args.noise_p, args.noise_q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    grid = args.theta_list if args.theta_list else np.linspace(0, 2 * math.pi, args.theta_points)
    _, sample_ss = _spawn(args.seed)
    for rec in device_experiment(grid, args.samples, args.shots, model, sample_ss, negativity=args.negativity):
        common = dict(state="rxx", n_qubits=2, protocol="global", theta=rec.theta, n_samples=rec.n_realizations)
        out.row(**common, quantity="f_dig", value=rec.f_dig, std_error=rec.sigma_dig)
        out.row(**common, quantity="f_corr", value=rec.f_corr, std_error=rec.sigma_stat)
        out.row(**common, quantity="f_ex", value=rec.f_ex)


def cmd_haar_stats(args, out: Emitter):
    n, d = args.n_qubits, 2**args.n_qubits
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    rng, _ = _spawn(args.seed)
    states = [sample_haar_state(n, rng) for _ in range(args.samples)]
    common = dict(state="haar", n_qubits=n, n_samples=args.samples)
    flat = np.array([multifractal_flatness(s) for s in states])
    i2 = np.array([ipr(s, 2) for s in states])
    root = math.sqrt(args.samples)
    out.row(**common, quantity="flatness_mean", value=flat.mean(), std_error=flat.std(ddof=1) / root)
    out.row(**common, quantity="flatness_mean_exact", value=haar_mean_flatness(d))
    out.row(**common, quantity="flatness_std", value=flat.std(ddof=1))
    out.row(**common, quantity="flatness_std_exact", value=haar_flatness_std(d))
    out.row(**common, q=2, quantity="ipr_mean", value=i2.mean(), std_error=i2.std(ddof=1) / root)
    out.row(**common, q=2, quantity="ipr_mean_exact", value=haar_ipr_moment(HaarMomentSpec(d, 2, 1)))
    s2 = -np.log2(i2)
    out.row(**common, q=2, quantity="participation_entropy_mean", value=s2.mean(), std_error=s2.std(ddof=1) / root)
    if n <= 10:
        purity = np.array([2.0 ** -stabilizer_entropy(s, 2) for s in states])
        out.row(**common, quantity="stabilizer_purity_mean", value=purity.mean(), std_error=purity.std(ddof=1) / root)
        out.row(**common, quantity="stabilizer_purity_exact", value=haar_mean_stabilizer_purity(d))


COMMANDS = {
    "measure": cmd_measure,
    "orbit": cmd_orbit,
    "scaling": cmd_scaling,
    "device": cmd_device,
    "haar-stats": cmd_haar_stats,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    if args.workers < 1:
        parser.error("--workers must be positive")
    out = Emitter(args)
    try:
        COMMANDS[args.command](args, out)
    except (UsageError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"flatmagic {args.command}: error: {exc}", file=sys.stderr)
        return 2
    text = out.render(args.format)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return 3 if out.flagged else 0


def main_entry() -> None:
    sys.exit(main())
