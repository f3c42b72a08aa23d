"""Command-line front end: ``qpi solve|lcu|gates|qram|vqls``.

Every subcommand writes deterministic artifacts (sorted-key JSON, plain
CSV) into --out.  Exit codes: 0 success, 1 configuration error,
2 evaluator failure, 3 infeasible QRAM target, 4 optimiser divergence.

``QPI_SEED`` in the environment overrides any configured seed.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_instance, parse_rate
from .mdp import Policy, bellman_system_matrix
from .pauli import hermitian_embed, lcu_decompose, lcu_histogram, lcu_truncate
from .qram import (InfeasibleTargetError, QramHardwareParams, epsilon_from_hardware,
                   feasibility_grid, grid_csv_lines)
from .solver import (EvaluatorError, ExactEvaluator, HhlEvaluator, VqlsEvaluator,
                     policy_iteration)
from .vqls import (AnsatzConfig, NoiseModel, VqlsConfig, VqlsDivergenceError,
                   vqls_solve)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_EVALUATOR = 2
EXIT_INFEASIBLE = 3
EXIT_DIVERGED = 4

DEFAULT_SEED = 1


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _effective_seed(arg_seed):
    env = os.environ.get("QPI_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise CliError(f"QPI_SEED must be an integer, got {env!r}")
    return arg_seed


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _policy_from_flag(flag, mdp):
    if flag in (None, "zero"):
        return Policy.zero(mdp.n_states)
    try:
        actions = [int(a) for a in flag.split(",")]
    except ValueError:
        raise CliError(f"--policy must be 'zero' or comma-separated actions, got {flag!r}")
    policy = Policy(np.array(actions))
    mdp.validate_policy(policy)
    return policy


def _embedded_from_args(args):
    mdp, _ = load_instance(args.instance)
    gamma = args.gamma if args.gamma is not None else mdp.params.gamma
    policy = _policy_from_flag(getattr(args, "policy", None), mdp)
    B = bellman_system_matrix(mdp, policy, gamma)
    return mdp, hermitian_embed(B, mdp.reward)


def cmd_solve(args):
    mdp, _ = load_instance(args.instance)
    gamma = args.gamma if args.gamma is not None else mdp.params.gamma
    seed = _effective_seed(args.seed)
    if args.evaluator == "exact":
        evaluator = ExactEvaluator()
    elif args.evaluator == "hhl":
        evaluator = HhlEvaluator(n_clock=args.n_clock)
    else:
        evaluator = VqlsEvaluator(seed=seed)
    policy, trace = policy_iteration(mdp, gamma, max_iters=args.max_iters,
                                     evaluator=evaluator)
    out = Path(args.out)
    payload = {
        "actions": [int(a) for a in policy.actions],
        "converged": trace.converged,
        "evaluator": args.evaluator,
        "gamma": gamma,
        "iterations": len(trace.iterations),
        "seed": seed,
    }
    _write(out / "policy.json", json.dumps(payload, sort_keys=True, indent=2) + "\n")
    _write(out / "trace.jsonl", "\n".join(trace.jsonl_lines()) + "\n")
    print(f"{'k':>3} {'changed':>8} {'residual':>12}")
    for it in trace.iterations:
        print(f"{it.k:>3} {it.changed_states:>8} {it.residual:>12.3e}")
    print("state -> order")
    for state, action in enumerate(policy.actions):
        print(f"{state:>5} -> {int(action)}")
    if not trace.converged:
        print("warning: iteration cap reached before the policy repeated", file=sys.stderr)
    return EXIT_OK


def cmd_lcu(args):
    _, system = _embedded_from_args(args)
    lcu = lcu_decompose(system)
    keep = args.terms if args.terms is not None else len(lcu)
    if not 1 <= keep <= len(lcu):
        raise CliError(f"-L must lie in [1, {len(lcu)}], got {keep}")
    truncated, err = lcu_truncate(lcu, keep)
    out = Path(args.out)
    lines = ["pauli_string,coefficient"]
    lines += [f"{p.ops},{a!r}" for a, p in truncated.terms]
    _write(out / "lcu.csv", "\n".join(lines) + "\n")
    hist = ["term_index,coefficient"]
    hist += [f"{i},{a!r}" for i, a in lcu_histogram(truncated)]
    _write(out / "lcu_histogram.csv", "\n".join(hist) + "\n")
    print(f"terms kept: {len(truncated)} of {len(lcu)}")
    print(f"truncation error (Frobenius): {err!r}")
    return EXIT_OK


def cmd_gates(args):
    from .hhl import DisallowedCellError, HhlConfig, gate_count_report
    lcu = None
    if args.instance is not None:
        _, system = _embedded_from_args(args)
        lcu = lcu_decompose(system)
    cfg = HhlConfig(n_clock=args.n_clock)
    l_list = [int(x) for x in args.l_list.split(",")]
    rows = ["N,L,gates"]
    table = []
    for n in range(1, args.n_max + 1):
        for l in l_list:
            try:
                rep = gate_count_report(n, l, cfg, lcu=lcu)
                cell = str(rep.gate_counts["fundamental_total"])
            except DisallowedCellError:
                cell = "disallowed"
            rows.append(f"{n},{l},{cell}")
            table.append((n, l, cell))
    _write(Path(args.out) / "gates.csv", "\n".join(rows) + "\n")
    header = "N\\L " + " ".join(f"{l:>10}" for l in l_list)
    print(header)
    for n in range(1, args.n_max + 1):
        cells = [c for (nn, _, c) in table if nn == n]
        print(f"{n:>3} " + " ".join(f"{c:>10}" for c in cells))
    return EXIT_OK


def _log_range(spec):
    try:
        lo, hi, steps = spec.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise CliError(f"range must look like 'lo:hi:steps', got {spec!r}")
    if steps < 1 or lo <= 0 or hi < lo:
        raise CliError(f"bad range {spec!r}")
    if steps == 1:
        return [lo]
    return list(np.geomspace(lo, hi, steps))


def cmd_qram(args):
    hw = QramHardwareParams(g_d=parse_rate(args.gd), nu=parse_rate(args.nu),
                            c_d=args.cd, kappa_plus_gamma=parse_rate(args.kappa_gamma))
    log_base = 2 if args.log_base == "2" else "e"
    cells = feasibility_grid(_log_range(args.n_range), _log_range(args.fidelity_range),
                             hw, log_base=log_base)
    _write(Path(args.out) / "qram.csv", "\n".join(grid_csv_lines(cells)) + "\n")
    print(f"hardware error floor: {hw.error_floor!r}")
    print(f"current hardware epsilon: {epsilon_from_hardware(hw)!r}")
    feasible = [c for c in cells if c.feasible]
    print(f"feasible cells: {len(feasible)} / {len(cells)}")
    if not feasible:
        raise InfeasibleTargetError("no grid cell admits a positive decoherence budget")
    return EXIT_OK


def cmd_vqls(args):
    _, system = _embedded_from_args(args)
    lcu = lcu_decompose(system)
    keep = args.terms if args.terms is not None else len(lcu)
    truncated, _err = lcu_truncate(lcu, keep)
    seed = _effective_seed(args.seed)
    ansatz = AnsatzConfig(n_qubits=system.n_qubits, n_layers=args.layers)
    runs = [("cost", "grad_norm", None)]
    if args.noise > 0:
        runs.append(("cost_noisy", "grad_norm_noisy",
                     NoiseModel(p1=args.noise, p2=args.noise, seed=seed)))
    columns, traces = [], []
    solution = None
    for cost_col, grad_col, noise in runs:
        cfg = VqlsConfig(learning_rate=args.eta, max_iters=args.iters,
                         target_cost=args.target_cost, seed=seed, noise=noise,
                         trajectories=args.trajectories)
        vec, trace = vqls_solve(truncated, system.rhs, ansatz, cfg)
        if noise is None:
            solution = vec
        columns.append((cost_col, grad_col))
        traces.append(trace)
    depth = max(len(t.rows) for t in traces)
    header = "iter," + ",".join(f"{c},{g}" for c, g in columns)
    lines = [header]
    for k in range(depth):
        cells = [str(k)]
        for t in traces:
            if k < len(t.rows):
                _, c, g = t.rows[k]
                cells += [repr(c), repr(g)]
            else:
                cells += ["", ""]
        lines.append(",".join(cells))
    _write(Path(args.out) / "trace.csv", "\n".join(lines) + "\n")
    noiseless = traces[0]
    print(f"noiseless: cost {noiseless.initial_cost!r} -> {noiseless.final_cost!r} "
          f"in {len(noiseless.rows) - 1} iterations")
    if len(traces) > 1:
        noisy = traces[1]
        print(f"noisy(p={args.noise}): cost {noisy.initial_cost!r} -> {noisy.final_cost!r}")
    if solution is not None and len(solution) <= 16:
        print("solution block:", np.array2string(np.asarray(solution), precision=6))
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="qpi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run policy iteration on an instance file")
    p.add_argument("instance")
    p.add_argument("--evaluator", choices=("exact", "hhl", "vqls"), default="exact")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=20, dest="max_iters")
    p.add_argument("--n-clock", type=int, default=6, dest="n_clock")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("lcu", help="Pauli decomposition of the embedded system")
    p.add_argument("instance")
    p.add_argument("--policy", default="zero")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("-L", "--terms", type=int, default=None)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_lcu)

    p = sub.add_parser("gates", help="gate-count grid for the compiled solver")
    p.add_argument("--n-max", type=int, default=6, dest="n_max")
    p.add_argument("--l-list", default="1,4,9,16", dest="l_list")
    p.add_argument("--n-clock", type=int, default=6, dest="n_clock")
    p.add_argument("--instance", default=None)
    p.add_argument("--policy", default="zero")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_gates)

    p = sub.add_parser("qram", help="memory feasibility grid")
    p.add_argument("--n-range", default="10:1e9:25", dest="n_range")
    p.add_argument("--fidelity-range", default="1e-6:1e-1:25", dest="fidelity_range")
    p.add_argument("--gd", default="1kHz*2pi")
    p.add_argument("--nu", default="10MHz*2pi")
    p.add_argument("--cd", type=float, default=4.5)
    p.add_argument("--kappa-gamma", default="0", dest="kappa_gamma")
    p.add_argument("--log-base", choices=("2", "e"), default="2", dest="log_base")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_qram)

    p = sub.add_parser("vqls", help="variational solve of the embedded system")
    p.add_argument("instance")
    p.add_argument("--policy", default="zero")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("-L", "--terms", type=int, default=None)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--target-cost", type=float, default=1e-8, dest="target_cost")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--trajectories", type=int, default=20)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_vqls)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (CliError, ConfigError, ValueError) as exc:
        if isinstance(exc, InfeasibleTargetError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INFEASIBLE
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EvaluatorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EVALUATOR
    except VqlsDivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
