"""Command-line driver: contacts in, flow matrices and reports out.

Subcommands:

  flows         build per-window flow matrices and persist them
  detect        flag improbably coherent vertex sets in stored flows
  sweep         tabulate detection metrics over threshold grids
  embeddable    per-window continuous-time embeddability verdicts
  synth         generate a synthetic scenario from a config file
  reverse       rewrite a contact file with all contacts reversed
  oracle-check  compare the solver against both reference oracles

Exit codes: 0 success, 1 domain or I/O error, 2 usage error.  All
diagnostics go to stderr; requested data goes to stdout or files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import core, detection, embeddability, ingest, markov, oracle, synth
from .errors import (
    GridError,
    IntegrityError,
    NumericalError,
    OracleError,
    ParameterError,
    ParseError,
    PolicyError,
    PreconditionError,
    ValidationError,
)

_DOMAIN_ERRORS = (
    ValidationError,
    GridError,
    ParameterError,
    NumericalError,
    PolicyError,
    ParseError,
    IntegrityError,
    PreconditionError,
    OracleError,
    OSError,
)

# window count heuristic: resolvable flows need only a few contacts per window
_AUTO_OMEGA = 3.0


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"{text!r} is not positive")
    return value


def _unit_interval(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"{text!r} is not inside (0, 1)")
    return value


def _rarity(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"{text!r} is not inside (0, 1)")
    return value


def _parse_beta(text: str, dcn, parser) -> float:
    if text == "auto":
        return markov.default_beta(dcn)
    try:
        value = float(text)
    except ValueError:
        parser.error(f"--beta must be a number or 'auto', got {text!r}")
    if not math.isfinite(value):
        parser.error("--beta must be finite")
    return value


def _parse_eps(text: str, parser) -> float:
    if text == "auto":
        return markov.default_epsilon()
    try:
        value = float(text)
    except ValueError:
        parser.error(f"--eps must be a number or 'auto', got {text!r}")
    if not 0.0 <= value < 1.0:
        parser.error("--eps must lie in [0, 1)")
    return value


def _boundaries_from_spec(spec: str, parser) -> list[float]:
    """Grid boundaries from an inline comma list or a file of numbers."""
    if Path(spec).is_file():
        text = Path(spec).read_text(encoding="utf-8")
        tokens = [
            tok
            for line in text.splitlines()
            for tok in line.split("#", 1)[0].replace(",", " ").split()
        ]
    else:
        tokens = [tok.strip() for tok in spec.split(",") if tok.strip()]
    try:
        boundaries = [float(tok) for tok in tokens]
    except ValueError:
        parser.error(f"--grid {spec!r}: not a boundary list or a readable file")
    if len(boundaries) < 2:
        parser.error("--grid needs at least two boundaries")
    return boundaries


def _resolve_grid(args, dcn, parser) -> core.WindowGrid:
    if args.grid is not None:
        return core.sanitize_grid(_boundaries_from_spec(args.grid, parser), dcn)
    if args.window is not None:
        return core.uniform_grid(dcn, args.window)
    count = markov.optimal_window_count(len(dcn), dcn.n, _AUTO_OMEGA)
    return core.grid_from_count(dcn, count)


def _range_spec(spec: str, parser, flag: str) -> list[float]:
    """``start:step:stop`` inclusive, or a single value."""
    parts = spec.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        start, step, stop = (float(p) for p in parts)
    except ValueError:
        parser.error(f"{flag} expects VALUE or start:step:stop, got {spec!r}")
    if step <= 0 or stop < start:
        parser.error(f"{flag} {spec!r} denotes an empty grid")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def _load_contacts(path):
    with open(path, encoding="utf-8", newline="") as handle:
        return ingest.parse_contacts(handle)


def _events_policy(args):
    if args.policy is not None:
        policy = ingest.parse_policy(args.policy)
    else:
        env_path = os.environ.get(ingest.POLICY_ENV_VAR)
        policy = ingest.parse_policy(env_path) if env_path else ingest.default_policy()
    policy.strict = args.strict_policy
    return policy


def _default_jobs() -> int:
    return min(8, os.cpu_count() or 1)


def cmd_flows(args, parser) -> int:
    if args.events is not None:
        events = ingest.parse_events(args.events)
        dcn, names = ingest.events_to_contacts(
            events, _events_policy(args), use_pid=args.use_pid
        )
    else:
        dcn, names = _load_contacts(args.contacts)
    grid = _resolve_grid(args, dcn, parser)
    params = markov.ModelParams(
        beta=_parse_beta(args.beta, dcn, parser),
        epsilon=_parse_eps(args.eps, parser),
    )
    flows = markov.window_flows(dcn, grid, params, jobs=args.jobs)
    ingest.write_flows(flows, grid, params, args.out, names)
    print(
        f"wrote {len(flows)} window(s), n={dcn.n}, beta={params.beta:.6g}, "
        f"eps={params.epsilon:.6g} -> {args.out}",
        file=sys.stderr,
    )
    return 0


def cmd_detect(args, parser) -> int:
    flows, grid, _, names = ingest.read_flows(args.flows)
    truth = None
    if args.truth is not None:
        truth = ingest.parse_truth(args.truth, names=names)
    config = detection.DetectionConfig(threshold=args.lam, rarity=args.mu)
    report = detection.build_report(flows, grid, config, truth)
    payload = json.dumps(report.to_json(), indent=2)
    if args.report is not None:
        Path(args.report).write_text(payload + "\n", encoding="utf-8")
        print(f"wrote report -> {args.report}", file=sys.stderr)
    else:
        print(payload)
    return 0


def cmd_sweep(args, parser) -> int:
    flows, grid, _, names = ingest.read_flows(args.flows)
    truth = ingest.parse_truth(args.truth, names=names)
    lambdas = _range_spec(args.lambda_grid, parser, "--lambda-grid")
    mus = _range_spec(args.mu_grid, parser, "--mu-grid")
    for lam in lambdas:
        if not 0.0 < lam < 1.0:
            parser.error(f"--lambda-grid value {lam!r} outside (0, 1)")
    for mu in mus:
        if not 0.0 < mu < 1.0:
            parser.error(f"--mu-grid value {mu!r} outside (0, 1)")
    rows = detection.threshold_sweep(flows, truth, grid, lambdas, mus)
    lines = ["lambda,mu,form,TPR,FPR,PPV,NPV"]
    for row in rows:
        cells = [repr(row["lambda"]), repr(row["mu"]), row["form"]]
        cells += [
            "" if row[k] is None else repr(row[k])
            for k in ("TPR", "FPR", "PPV", "NPV")
        ]
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {len(rows)} row(s) -> {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def cmd_embeddable(args, parser) -> int:
    dcn, _ = _load_contacts(args.contacts)
    grid = core.sanitize_grid(_boundaries_from_spec(args.grid, parser), dcn)
    params = markov.ModelParams(
        beta=_parse_beta(args.beta, dcn, parser),
        epsilon=_parse_eps(args.eps, parser),
    )
    for m in range(1, grid.num_windows + 1):
        lo, hi = grid.window(m)
        tg = core.restricted_temporal_digraph(dcn, lo, hi)
        flow = markov.absorption(markov.transition_matrix(dcn, grid, m, params))
        verdict = embeddability.check_embeddable(dcn, flow, tg)
        if args.json:
            print(json.dumps({"window": m, **verdict.to_json()}))
        else:
            det = (
                f", det={verdict.determinant:.6g}"
                if verdict.determinant is not None
                else ""
            )
            print(f"window {m}: {verdict.status} ({verdict.reason}{det})")
    return 0


def cmd_synth(args, parser) -> int:
    config = ingest.parse_synth_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    dcn, truth = synth.generate(config)
    ingest.write_contacts(dcn, args.contacts)
    ingest.write_truth(truth, args.truth)
    print(
        f"generated {len(dcn)} contacts on {dcn.n} vertices, "
        f"{len(truth.contacts)} ground-truth contact(s)",
        file=sys.stderr,
    )
    return 0


def cmd_reverse(args, parser) -> int:
    dcn, names = _load_contacts(args.contacts)
    ingest.write_contacts(markov.reverse_dcn(dcn), args.out, names)
    return 0


def cmd_oracle_check(args, parser) -> int:
    dcn, _ = _load_contacts(args.contacts)
    grid = core.sanitize_grid(_boundaries_from_spec(args.grid, parser), dcn)
    params = markov.ModelParams(
        beta=_parse_beta(args.beta, dcn, parser),
        epsilon=_parse_eps(args.eps, parser),
    )
    worst_topo = 0.0
    worst_mc = 0.0
    for m in range(1, grid.num_windows + 1):
        tm = markov.transition_matrix(dcn, grid, m, params)
        flow = markov.absorption(tm)
        try:
            topo = oracle.topo_absorption(tm)
            topo_dev = float(np.max(np.abs(topo.probs - flow.probs)))
            topo_note = f"topo max |delta| = {topo_dev:.3e}"
            worst_topo = max(worst_topo, topo_dev)
        except PreconditionError:
            topo_note = "topo n/a (cyclic window)"
        mc_dev = 0.0
        lo, _ = grid.window(m)
        for v in range(1, dcn.n + 1):
            result = oracle.monte_carlo_absorption(
                tm, (v, lo), samples=args.samples, seed=args.seed + m * dcn.n + v
            )
            for k in range(dcn.n):
                delta = abs(result.freq[k] - flow.probs[v - 1, k])
                se = result.stderr[k]
                if se > 0:
                    mc_dev = max(mc_dev, delta / se)
                elif delta > 0:
                    mc_dev = max(mc_dev, math.inf)
        worst_mc = max(worst_mc, mc_dev)
        print(f"window {m}: {topo_note}; mc max deviation = {mc_dev:.2f} se")
    print(f"overall: topo {worst_topo:.3e}, mc {worst_mc:.2f} se")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcnflow",
        description="Infer and score probable information flows in directed contact networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("flows", help="compute and store per-window flow matrices")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--contacts", metavar="FILE", help="contact file (time,source,target)")
    src.add_argument("--events", metavar="FILE", help="event file (timestamp,subject,pid,verb,object)")
    p.add_argument("--policy", metavar="FILE", help="verb policy; default from $" + ingest.POLICY_ENV_VAR + " or built-in")
    p.add_argument("--strict-policy", action="store_true", help="error on unmapped verbs")
    p.add_argument("--use-pid", action="store_true", help="key subjects by name:pid")
    win = p.add_mutually_exclusive_group(required=True)
    win.add_argument("--window", type=_positive_float, metavar="SECONDS", help="uniform window width")
    win.add_argument("--grid", metavar="SPEC", help="boundaries, inline comma list or file")
    win.add_argument("--auto-windows", action="store_true", help="pick the window count heuristically")
    p.add_argument("--beta", default="auto", help="delay decay rate, number or 'auto'")
    p.add_argument("--eps", default="auto", help="temporal weight floor, number or 'auto'")
    p.add_argument("--jobs", type=int, default=_default_jobs(), metavar="N", help="worker threads over windows")
    p.add_argument("--out", required=True, metavar="DIR", help="output directory")
    p.set_defaults(func=cmd_flows)

    p = sub.add_parser("detect", help="flag rare high-probability flows")
    p.add_argument("--flows", required=True, metavar="DIR", help="directory written by 'flows'")
    p.add_argument("--truth", metavar="FILE", help="ground-truth contacts for scoring")
    p.add_argument("--lambda", dest="lam", type=_unit_interval, required=True, metavar="VALUE", help="flow probability threshold")
    p.add_argument("--mu", dest="mu", type=_rarity, required=True, metavar="VALUE", help="relative frequency ceiling")
    p.add_argument("--report", metavar="FILE", help="report path (default: stdout)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("sweep", help="detection metrics over threshold grids")
    p.add_argument("--flows", required=True, metavar="DIR")
    p.add_argument("--truth", required=True, metavar="FILE")
    p.add_argument("--lambda-grid", required=True, metavar="SPEC", help="VALUE or start:step:stop")
    p.add_argument("--mu-grid", required=True, metavar="SPEC", help="VALUE or start:step:stop")
    p.add_argument("--out", metavar="CSV", help="output table (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("embeddable", help="continuous-time embeddability verdicts")
    p.add_argument("--contacts", required=True, metavar="FILE")
    p.add_argument("--grid", required=True, metavar="SPEC")
    p.add_argument("--beta", default="auto", help="number or 'auto'")
    p.add_argument("--eps", default="0", help="number or 'auto' (default 0: exact determinants)")
    p.add_argument("--json", action="store_true", help="one JSON object per window")
    p.set_defaults(func=cmd_embeddable)

    p = sub.add_parser("synth", help="generate a synthetic scenario")
    p.add_argument("--config", required=True, metavar="FILE", help="JSON or key=value scenario config")
    p.add_argument("--seed", type=int, metavar="INT", help="override the config seed")
    p.add_argument("--contacts", required=True, metavar="FILE", help="output contact file")
    p.add_argument("--truth", required=True, metavar="FILE", help="output ground-truth file")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("reverse", help="reverse every contact (s,t,tau) -> (t,s,-tau)")
    p.add_argument("--contacts", required=True, metavar="FILE")
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=cmd_reverse)

    p = sub.add_parser("oracle-check", help="compare solver against reference oracles")
    p.add_argument("--contacts", required=True, metavar="FILE")
    p.add_argument("--grid", required=True, metavar="SPEC")
    p.add_argument("--beta", default="auto", help="number or 'auto'")
    p.add_argument("--eps", default="auto", help="number or 'auto'")
    p.add_argument("--samples", type=int, default=20000, metavar="INT", help="walks per start vertex")
    p.add_argument("--seed", type=int, default=0, metavar="INT")
    p.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except _DOMAIN_ERRORS as exc:
        print(f"dcnflow: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
