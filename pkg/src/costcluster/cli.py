"""Command-line front end: ``costcluster {plan,eval,oracle,check,simulate,bench}``.

Exit status: 0 ok, 1 usage error, 2 invalid model or sequence, 3 request
that cannot be carried out (oracle too large, planner/shape mismatch).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

from . import kernels
from .bench import run_bench
from .document import load_model
from .ecr import PlanResult, SequenceError, evaluate_ecr, evaluate_plan
from .flat import DispatchError, plan_basic, plan_flat
from .model import ModelError, TroubleshootingModel
from .oracle import OracleLimitError, brute_force_optimal, check_all
from .sim import estimate_ecr
from .tree import plan_tree

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(x):
    return float(x) if isinstance(x, Fraction) else x


def _exact(x):
    return str(x) if isinstance(x, Fraction) else None


@dataclass
class PlanReport:
    algorithm: str
    ecr: float
    opening_indices: list[int]
    steps: list[dict] = field(default_factory=list)
    ecr_exact: Optional[str] = None

    @classmethod
    def from_result(cls, model: TroubleshootingModel, r: PlanResult) -> "PlanReport":
        steps = []
        cumulative = r.cumulative_ecr
        for i, aid in enumerate(r.sequence):
            steps.append({
                "index": i,
                "action": aid,
                "cluster": model.action_map[aid].cluster_id,
                "opens": list(r.step_openings[i]) if r.step_openings else [],
                "cost": _num(r.step_costs[i]),
                "survival": _num(r.step_survival[i]),
                "cumulative_ecr": _num(cumulative[i]),
            })
        return cls(r.algorithm, _num(r.ecr), list(r.opening_indices), steps, _exact(r.ecr))

    @property
    def sequence(self):
        return [s["action"] for s in self.steps]

    def to_machine(self) -> dict:
        d = asdict(self)
        d["sequence"] = self.sequence
        if d["ecr_exact"] is None:
            del d["ecr_exact"]
        return d

    def to_human(self) -> str:
        lines = [f"{'#':>3}  {'action':<12} {'opens':<16} {'cost':>10} {'survival':>10} {'cum. ECR':>12}"]
        for s in self.steps:
            opens = ",".join(s["opens"]) or "-"
            lines.append(f"{s['index']:>3}  {s['action']:<12} {opens:<16} {s['cost']:>10.6g} "
                         f"{s['survival']:>10.6g} {s['cumulative_ecr']:>12.6g}")
        total = f"ECR = {self.ecr:.12g}"
        if self.ecr_exact:
            total += f"  (exact {self.ecr_exact})"
        lines.append(f"{total}  [{self.algorithm}]")
        lines.append("sequence: " + ",".join(self.sequence))
        return "\n".join(lines)


def choose_planner(model: TroubleshootingModel, algorithm: str):
    if algorithm == "auto":
        if model.depth == 0:
            return plan_basic
        return plan_flat if model.depth == 1 else plan_tree
    return {"basic": plan_basic, "flat": plan_flat, "tree": plan_tree}[algorithm]


def _sequence(text: Optional[str]):
    if text is None:
        return None
    seq = [s.strip() for s in text.split(",") if s.strip()]
    if not seq:
        raise UsageError("--sequence is empty")
    return seq


def _require_sequence(args, model, allow_plan=False):
    seq = _sequence(args.sequence)
    if seq is None:
        if not allow_plan:
            raise UsageError("--sequence is required")
        seq = list(plan_tree(model).sequence)
    return seq


def _full_permutation(model, seq):
    missing = set(model.action_map) - set(seq)
    if missing:
        raise SequenceError(f"sequence omits actions: {', '.join(sorted(missing))}")


def _emit(args, machine: dict, human: str):
    if args.format == "machine":
        print(json.dumps(machine, indent=2, sort_keys=True))
    else:
        print(human)


def _load(args):
    if not args.model:
        raise UsageError("--model is required")
    return load_model(args.model, strict=args.strict, exact=getattr(args, "exact", False))


def cmd_plan(args):
    model = _load(args)
    r = choose_planner(model, args.algorithm)(model)
    rep = PlanReport.from_result(model, r)
    _emit(args, rep.to_machine(), rep.to_human())


def cmd_eval(args):
    model = _load(args)
    seq = _require_sequence(args, model)
    _full_permutation(model, seq)
    r = evaluate_plan(model, seq)
    rep = PlanReport.from_result(model, r)
    _emit(args, rep.to_machine(), rep.to_human())


def cmd_oracle(args):
    model = _load(args)
    rep = brute_force_optimal(model, limit=args.limit)
    d = asdict(rep)
    d["best_sequence"] = list(rep.best_sequence)
    d["best_ecr"] = _num(rep.best_ecr)
    human = (f"best ECR = {float(rep.best_ecr):.12g} over {rep.sequences_examined} orderings "
             f"({rep.ties} tied)\nsequence: {','.join(rep.best_sequence)}")
    _emit(args, d, human)


def cmd_check(args):
    model = _load(args)
    seq = _require_sequence(args, model, allow_plan=True)
    found = check_all(model, seq)
    d = {name: [asdict(v) for v in vs] for name, vs in found.items()}
    total = sum(len(v) for v in found.values())
    lines = [f"{name}: {len(vs)} violation(s)" for name, vs in found.items()]
    lines += [f"  {v}" for vs in found.values() for v in vs]
    lines.append("ok" if total == 0 else f"{total} violation(s)")
    _emit(args, {"violations": d, "total": total}, "\n".join(lines))


def cmd_simulate(args):
    model = _load(args)
    seq = _require_sequence(args, model, allow_plan=True)
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    s = estimate_ecr(model, seq, args.trials, seed=args.seed, workers=args.workers)
    analytic = float(evaluate_ecr(model, seq).ecr)
    d = asdict(s)
    d["analytic_ecr"] = analytic
    human = (f"trials {s.trials}  mean {s.mean_cost:.6f} ± {s.std_error:.6f}  solved {s.solve_rate:.4f}\n"
             f"analytic ECR {analytic:.6f}  (z = {(s.mean_cost - analytic) / s.std_error if s.std_error else 0.0:.2f})")
    _emit(args, d, human)


def cmd_bench(args):
    try:
        sizes = [int(x) for x in args.sizes.split(",")]
    except ValueError:
        raise UsageError(f"bad --sizes {args.sizes!r}") from None
    if any(n < 2 for n in sizes):
        raise UsageError("benchmark sizes must be at least 2")
    backends = None if args.backend == "both" else [args.backend]
    if args.backend in ("both", "compiled") and not kernels.HAVE_COMPILED:
        backends = ["python"]
    rows = run_bench(sizes, seed=args.seed or 0, clusters=args.clusters, backends=backends, repeats=args.repeats)
    lines = [f"{'n':>9} {'clusters':>9} {'backend':>9} {'seconds':>10}"]
    lines += [f"{r.n:>9} {r.clusters:>9} {r.backend:>9} {r.seconds:>10.4f}" for r in rows]
    _emit(args, {"rows": [asdict(r) for r in rows]}, "\n".join(lines))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["human", "machine"], default="human")
    common.add_argument("--strict", dest="strict", action="store_true", default=True,
                        help="reject unknown fields in model files (default)")
    common.add_argument("--no-strict", dest="strict", action="store_false")
    common.add_argument("--seed", type=int, default=None)

    p = _Parser(prog="costcluster", description="Optimal troubleshooting sequences for cost-cluster models.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model_cmd(name, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.add_argument("--model", required=True, help="JSON model file")
        return sp

    sp = model_cmd("plan", "compute an optimal sequence")
    sp.add_argument("--algorithm", choices=["auto", "basic", "flat", "tree"], default="auto")
    sp.add_argument("--exact", action="store_true", help="rational arithmetic")
    sp.set_defaults(func=cmd_plan)

    sp = model_cmd("eval", "expected cost of repair of a sequence")
    sp.add_argument("--sequence", required=True, help="comma-separated action ids")
    sp.add_argument("--exact", action="store_true")
    sp.set_defaults(func=cmd_eval)

    sp = model_cmd("oracle", "brute-force minimum over all orderings")
    sp.add_argument("--limit", type=int, default=8)
    sp.set_defaults(func=cmd_oracle)

    sp = model_cmd("check", "check optimality conditions of a sequence (default: planner output)")
    sp.add_argument("--sequence")
    sp.set_defaults(func=cmd_check)

    sp = model_cmd("simulate", "Monte Carlo estimate of a sequence's ECR (default: planner output)")
    sp.add_argument("--sequence")
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("bench", parents=[common], help="planner wall time on random tree models")
    sp.add_argument("--sizes", default="10000,100000")
    sp.add_argument("--clusters", type=int, default=None, help="total clusters per model (default n/100)")
    sp.add_argument("--backend", choices=["both", "compiled", "python"], default="both")
    sp.add_argument("--repeats", type=int, default=3)
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"costcluster: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelError as exc:
        if args.format == "machine":
            print(json.dumps({"error": "invalid_model", "issues": [
                {"code": c, "id": i, "message": m} for c, i, m in exc.issues]}, indent=2), file=sys.stderr)
        else:
            print(f"costcluster: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SequenceError as exc:
        print(f"costcluster: invalid sequence: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"costcluster: cannot read model: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OracleLimitError, DispatchError) as exc:
        print(f"costcluster: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
