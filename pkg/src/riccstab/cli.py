"""Batch command-line front-end.

Reads a problem file (JSON with matrices A and B, optional tau list,
options, and scaling spec), dispatches to the solver, classifier, refuter,
transformer, or simulator, and emits machine-readable reports. Output is
deterministic for fixed inputs and seed.

Exit codes: 0 definitive answer, 2 undecided (Unknown verdict, Marginal
class, missing witness, or a failed decay run), 1 input or usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from .classes import UNSTRUCTURED, Stability, classify, evaluate_class
from .ddesim import decay_report, export_csv, lk_functional, simulate
from .errors import RiccstabError
from .riccati import MatrixPair, SolveOptions, Verdict, refute_by_sampling, solve_diagonal
from .transforms import ScalingPair, dad_transform

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_UNDECIDED = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract reserves 2 for
    undecided verdicts, so remap usage problems to exit 1."""

    def error(self, message):
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="riccstab", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, needs_file=True):
        p = sub.add_parser(name, help=help_text)
        if needs_file:
            p.add_argument("problem", help="path to a JSON problem file")
        p.add_argument("--tol", type=float, default=None, help="feasibility margin tolerance")
        p.add_argument("--seed", type=int, default=None, help="random seed for solver restarts and sampling")
        p.add_argument("--samples", type=int, default=None, help="random refutation sample budget")
        p.add_argument("--max-iter", type=int, default=None, help="iteration cap per solver restart")
        p.add_argument("--tau", default=None, help="comma-separated delay list for simulation")
        p.add_argument("--horizon", type=float, default=None, help="simulation end time")
        p.add_argument("--step", type=float, default=None, help="integration step")
        p.add_argument("--format", choices=("json", "csv"), default="json", help="payload format (csv: simulate only)")
        p.add_argument("--out", default=None, help="write the payload to this path instead of stdout")
        return p

    add("check", "decide feasibility and emit the verdict with certificate or witness")
    add("classify", "structural class verdict; falls back to check on unstructured pairs")
    add("refute", "search for a refutation witness only")
    add("transform", "apply the scaling from the problem file and map a certificate through it")
    add("simulate", "integrate the delay system and report decay for each delay")
    add("selftest", "run the randomized cross-validation battery twice", needs_file=False)
    return parser


def _load_problem(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise RiccstabError(f"cannot read problem file: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RiccstabError(f"problem file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "A" not in data or "B" not in data:
        raise RiccstabError("problem file must be a JSON object with keys A and B")
    return data


def _problem_pair(data: dict) -> MatrixPair:
    return MatrixPair(data["A"], data["B"])


def _solve_options(data: dict, args) -> SolveOptions:
    opts = data.get("options") or {}
    if not isinstance(opts, dict):
        raise RiccstabError("options must be a JSON object")

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return opts.get(key, default)

    base = SolveOptions()
    return SolveOptions(
        tol=float(pick(args.tol, "tol", base.tol)),
        seed=int(pick(args.seed, "seed", base.seed)),
        samples=int(pick(args.samples, "samples", base.samples)),
        max_iter=int(pick(getattr(args, "max_iter"), "max_iter", base.max_iter)),
    )


def _sim_params(data: dict, args) -> tuple[list[float], float, float]:
    opts = data.get("options") or {}
    if args.tau is not None:
        taus = [float(part) for part in args.tau.split(",") if part.strip() != ""]
    elif isinstance(data.get("tau"), list):
        taus = [float(t) for t in data["tau"]]
    else:
        taus = [0.0]
    if not taus:
        raise RiccstabError("empty delay list")
    horizon = float(args.horizon if args.horizon is not None else opts.get("horizon", 60.0))
    step = float(args.step if args.step is not None else opts.get("step", 0.02))
    return taus, horizon, step


def _emit(payload: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(payload)
    else:
        Path(out).write_text(payload)


def _emit_json(obj, out: str | None) -> None:
    _emit(json.dumps(obj, indent=2, sort_keys=True) + "\n", out)


def _verdict_exit(verdict: Verdict) -> int:
    return EXIT_OK if verdict.is_definitive else EXIT_UNDECIDED


def _cmd_check(data: dict, args) -> int:
    verdict = solve_diagonal(_problem_pair(data), _solve_options(data, args))
    _emit_json(verdict.to_json(), args.out)
    return _verdict_exit(verdict)


def _cmd_classify(data: dict, args) -> int:
    pair = _problem_pair(data)
    tag = classify(pair)
    if tag.name == UNSTRUCTURED:
        verdict = solve_diagonal(pair, _solve_options(data, args))
        _emit_json({"tag": tag.to_json(), "verdict": verdict.to_json()}, args.out)
        return _verdict_exit(verdict)
    class_verdict = evaluate_class(pair)
    _emit_json(class_verdict.to_json(), args.out)
    return EXIT_UNDECIDED if class_verdict.stable is Stability.MARGINAL else EXIT_OK


def _cmd_refute(data: dict, args) -> int:
    opts = _solve_options(data, args)
    witness, tried = refute_by_sampling(_problem_pair(data), n_samples=opts.samples, seed=opts.seed)
    if witness is None:
        _emit_json({"samples_tried": tried, "witness": None}, args.out)
        return EXIT_UNDECIDED
    payload = witness.to_json()
    payload["samples_tried"] = tried
    _emit_json(payload, args.out)
    return EXIT_OK


def _cmd_transform(data: dict, args) -> int:
    spec = data.get("transform")
    if not isinstance(spec, dict) or "d" not in spec or "e" not in spec:
        raise RiccstabError("transform command needs a problem-file entry transform: {d: [...], e: [...]}")
    pair = _problem_pair(data)
    scaling = ScalingPair(spec["d"], spec["e"])
    verdict = solve_diagonal(pair, _solve_options(data, args))
    scaled, map_certificate = dad_transform(pair, scaling)
    payload = {
        "A": scaled.a.tolist(),
        "B": scaled.b.tolist(),
        "status": verdict.status,
        "certificate": None,
    }
    if verdict.status == Verdict.FEASIBLE:
        payload["certificate"] = map_certificate(verdict.certificate).to_json()
    _emit_json(payload, args.out)
    return _verdict_exit(verdict)


def _csv_path(base: str, tau: float, multiple: bool) -> str:
    if not multiple:
        return base
    path = Path(base)
    return str(path.with_name(f"{path.stem}_tau{tau:g}{path.suffix or '.csv'}"))


def _cmd_simulate(data: dict, args) -> int:
    pair = _problem_pair(data)
    taus, horizon, step = _sim_params(data, args)
    verdict = solve_diagonal(pair, _solve_options(data, args))
    cert = verdict.certificate if verdict.status == Verdict.FEASIBLE else None
    phi = np.ones(pair.n)

    reports = []
    trajectories = []
    for tau in taus:
        run_horizon = max(horizon, tau)
        trajectory = simulate(pair, tau, phi, run_horizon, step)
        lk = lk_functional(trajectory, cert) if cert is not None and not trajectory.diverged else None
        trajectories.append((trajectory, lk))
        reports.append(decay_report(trajectory, lk))

    if args.format == "csv":
        if len(taus) != 1:
            raise RiccstabError("csv format requires exactly one delay")
        trajectory, lk = trajectories[0]
        if args.out is None:
            export_csv(trajectory, sys.stdout, lk=lk)
        else:
            export_csv(trajectory, args.out, lk=lk)
    else:
        if args.out is not None:
            for tau, (trajectory, lk) in zip(taus, trajectories):
                export_csv(trajectory, _csv_path(args.out, tau, len(taus) > 1), lk=lk)
        payload = {
            "certificate_status": verdict.status,
            "reports": [report.to_json() for report in reports],
        }
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    return EXIT_OK if all(report.decayed for report in reports) else EXIT_UNDECIDED


def _cmd_selftest(args) -> int:
    seed = args.seed if args.seed is not None else 0
    result = acceptance.selftest(seed)
    _emit_json(result.report, args.out)
    return EXIT_OK if result.report["all_passed"] else EXIT_UNDECIDED


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.format == "csv" and args.command != "simulate":
        parser.error("--format csv only applies to simulate")
    try:
        if args.command == "selftest":
            return _cmd_selftest(args)
        data = _load_problem(args.problem)
        handler = {
            "check": _cmd_check,
            "classify": _cmd_classify,
            "refute": _cmd_refute,
            "transform": _cmd_transform,
            "simulate": _cmd_simulate,
        }[args.command]
        return handler(data, args)
    except (RiccstabError, ValueError, TypeError) as exc:
        sys.stderr.write(f"riccstab: error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
