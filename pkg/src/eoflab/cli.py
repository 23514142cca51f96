"""Command line front end.

Subcommands: compute (EoF of a state file), verify (run a named numerical
check), probe (randomized counterexample search), zoo (write example state
files).  Reports print to stdout as JSON (default) or CSV; a one-line
summary per report goes to stderr.  Exit codes: 0 pass, 1 a check failed
or a probe found a violation, 2 usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .ensembles import save_ensemble
from .eof import EofOptions, eof_minimize, eof_pure, eof_wootters_2q
from .probes import (
    CheckReport,
    ProbeResult,
    _rand_density,
    case1_suite,
    check_case2,
    check_flagged_identity,
    check_ssa,
    check_strong_concavity,
    check_weak_additivity,
    probe_question1,
    probe_question2,
    relation_chain_check,
    superadditivity_probe,
)
from .qstate import DensityMatrix, PureState, load_state, save_state
from .statezoo import (
    Case1Spec,
    case1_state,
    case2_factor,
    classical_spec,
    random_density_dims,
    random_pure,
    two_block_spec,
    werner_state,
    werner_two_pair,
)


def _dims_arg(text: str) -> tuple[int, ...]:
    try:
        parts = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}")
    if not parts:
        raise argparse.ArgumentTypeError("empty list")
    return parts


def _ensemble_size_arg(text: str):
    return text if text == "auto" else int(text)


_CONFIG_CASTS = {
    "cut": _dims_arg, "dims": _dims_arg, "shape": _dims_arg,
    "samples": int, "trials": int, "seed": int, "restarts": int,
    "max_iterations": int, "members": int, "rank": int, "d": int,
    "pairs": int, "decomposition_samples": int,
    "tol": float, "slack": float, "member_slack": float, "phi": float,
    "product_weight": float,
    "ensemble_size": _ensemble_size_arg,
    "source": str, "out": str, "dump_ensemble": str, "format": str,
}


def _load_config(path: str) -> dict[str, str]:
    """key=value per line; blank lines and # comments ignored."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(args: argparse.Namespace, config: dict[str, str]) -> None:
    """Fill options the command line left unset; flags always win."""
    for key, raw in config.items():
        if not hasattr(args, key) or getattr(args, key) is not None:
            continue
        cast = _CONFIG_CASTS.get(key, str)
        setattr(args, key, cast(raw))


def _kwargs(args: argparse.Namespace, names: dict[str, str]) -> dict:
    """Collect the user-set options under their library keyword names."""
    out = {}
    for attr, kw in names.items():
        value = getattr(args, attr)
        if value is not None:
            out[kw] = value
    return out


def _eof_options(args: argparse.Namespace) -> EofOptions | None:
    fields = _kwargs(args, {
        "restarts": "restarts", "seed": "seed", "ensemble_size": "ensemble_size",
        "max_iterations": "max_iterations",
    })
    return EofOptions(**fields) if fields else None


def _emit(reports, fmt: str) -> None:
    """Print reports to stdout (JSON object/array or one merged CSV table)."""
    if fmt == "csv":
        lines: list[str] = []
        for rep in reports:
            block = rep.to_csv().splitlines()
            lines.extend(block if not lines else block[1:])
        print("\n".join(lines))
    else:
        dicts = [rep.to_dict() for rep in reports]
        print(json.dumps(dicts[0] if len(dicts) == 1 else dicts,
                         indent=2, sort_keys=True))
    for rep in reports:
        if isinstance(rep, CheckReport):
            verdict = "PASS" if rep.passed else "FAIL"
            detail = []
            if rep.max_abs_residual is not None:
                detail.append(f"max|residual|={rep.max_abs_residual:.3e}")
            if rep.min_gap is not None:
                detail.append(f"min_gap={rep.min_gap:.3e}")
            print(f"{rep.name}: {verdict} ({', '.join(detail)})", file=sys.stderr)
        elif isinstance(rep, ProbeResult):
            verdict = "VIOLATION" if rep.violation_found else "no violation"
            print(f"{rep.name}: {verdict} (min_gap={rep.min_gap:.3e} over "
                  f"{rep.trials} trials)", file=sys.stderr)


def _print_payload(payload: dict, fmt: str) -> None:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["field", "value"])
        for key in sorted(payload):
            value = payload[key]
            w.writerow([key, value if isinstance(value, str)
                        else json.dumps(value, sort_keys=True)])
        print(buf.getvalue(), end="")
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# subcommands

def _cmd_compute(args: argparse.Namespace) -> int:
    state = load_state(args.state)
    cut = args.cut
    if cut is None:
        if len(state.dims) == 2:
            cut = (0,)
        else:
            print("error: --cut is required for states with more than two "
                  "subsystems", file=sys.stderr)
            return 2
    out: dict = {"dims": list(state.dims), "cut": list(cut)}
    if isinstance(state, PureState):
        out["kind"] = "pure"
        out["value"] = eof_pure(state, cut)
    else:
        opts = _eof_options(args) or EofOptions()
        est = eof_minimize(state, cut, opts)
        out.update({
            "kind": "density",
            "value": est.value,
            "converged": est.converged,
            "restarts": est.restarts_used,
            "iterations": est.iterations,
            "restart_values": list(est.restart_values),
            "ensemble_members": len(est.best_ensemble),
        })
        if state.dims == (2, 2):
            out["closed_form"] = eof_wootters_2q(state)
        if args.dump_ensemble:
            save_ensemble(args.dump_ensemble, est.best_ensemble)
            out["ensemble_file"] = args.dump_ensemble
    _print_payload(out, args.format or "json")
    return 0


_VERIFY_NAMES = ("flagged", "strong-concavity", "ssa", "case1", "case2",
                 "weak-additivity", "relation-chain")


def _run_verify(name: str, args: argparse.Namespace) -> list[CheckReport]:
    base = _kwargs(args, {"seed": "seed", "tol": "tol"})
    if name == "flagged":
        kw = base | _kwargs(args, {"samples": "samples", "dims": "dims"})
        return [check_flagged_identity(**kw)]
    if name == "strong-concavity":
        kw = base | _kwargs(args, {"samples": "samples", "dims": "dims"})
        return [check_strong_concavity(**kw)]
    if name == "ssa":
        kw = base | _kwargs(args, {"samples": "samples", "dims": "dims"})
        return [check_ssa(**kw)]
    if name == "case1":
        kw = base | _kwargs(args, {"samples": "samples", "slack": "slack"})
        return [case1_suite(opts=_eof_options(args), **kw)]
    if name == "case2":
        lam = args.product_weight if args.product_weight is not None else 0.5
        kw = _kwargs(args, {"seed": "seed", "slack": "slack",
                            "member_slack": "member_slack",
                            "decomposition_samples": "decomposition_samples"})
        example = two_block_spec(lam, args.d if args.d is not None else 3)
        analogue = classical_spec([lam, 1.0 - lam])
        opts = _eof_options(args)
        return [check_case2(example, example, opts=opts, **kw),
                check_case2(analogue, analogue, opts=opts, **kw)]
    if name == "weak-additivity":
        kw = _kwargs(args, {"seed": "seed", "slack": "slack", "pairs": "pairs"})
        return [check_weak_additivity(opts=_eof_options(args), **kw)]
    if name == "relation-chain":
        seed = args.seed if args.seed is not None else 0
        rng = np.random.default_rng([seed, 0])
        rho_a = _rand_density(rng, (2, 2), 2)
        rho_b = _rand_density(rng, (2, 2), 2)
        kw = _kwargs(args, {"slack": "slack"})
        return [relation_chain_check(rho_a, rho_b, opts=_eof_options(args), **kw)]
    raise ValueError(f"unknown check {name!r}")


def _cmd_verify(args: argparse.Namespace) -> int:
    names = _VERIFY_NAMES if args.check == "all" else (args.check,)
    reports: list[CheckReport] = []
    for name in names:
        reports.extend(_run_verify(name, args))
    _emit(reports, args.format or "json")
    return 0 if all(r.passed for r in reports) else 1


def _cmd_probe(args: argparse.Namespace) -> int:
    kw = _kwargs(args, {"trials": "trials", "seed": "seed", "slack": "slack"})
    if args.relation == "superadditivity":
        kw |= _kwargs(args, {"source": "source", "phi": "phi"})
        result = superadditivity_probe(opts=_eof_options(args), **kw)
    else:
        kw |= _kwargs(args, {"members": "members", "rank": "rank", "dims": "dims"})
        fn = probe_question1 if args.relation == "question1" else probe_question2
        result = fn(**kw)
    _emit([result], args.format or "json")
    return 1 if result.violation_found else 0


def _cmd_zoo(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else 0
    if args.family == "case1":
        shape = args.shape if args.shape is not None else (2, 2)
        if args.uniform:
            w = np.full(shape, 1.0 / (shape[0] * shape[1]))
        else:
            rng = np.random.default_rng([seed, 0])
            w = rng.dirichlet(np.ones(shape[0] * shape[1])).reshape(shape)
        state = case1_state(Case1Spec(w))
    elif args.family == "case2":
        lam = args.product_weight if args.product_weight is not None else 0.5
        state = case2_factor(two_block_spec(lam, args.d if args.d is not None else 3))
    elif args.family == "werner":
        phi = args.phi if args.phi is not None else -0.85
        if args.two_pair:
            state = werner_two_pair(phi)
        else:
            state = werner_state(args.d if args.d is not None else 2, phi)
    elif args.family == "random":
        dims = args.dims if args.dims is not None else (2, 2)
        if args.pure:
            state = random_pure(dims, [seed, 1])
        else:
            state = random_density_dims(dims, args.rank if args.rank is not None else 2,
                                        [seed, 1])
    else:
        raise ValueError(f"unknown family {args.family!r}")
    save_state(args.out, state)
    kind = "pure" if isinstance(state, PureState) else "density"
    _print_payload({"written": args.out, "family": args.family,
                    "dims": list(state.dims), "kind": kind},
                   args.format or "json")
    return 0


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eof",
        description="Entanglement of formation: computation, verification, probes.",
    )
    parser.add_argument("--config", help="key=value file of option defaults")
    parser.add_argument("--format", choices=("json", "csv"),
                        help="report format on stdout (default json)")
    sub = parser.add_subparsers(dest="command", required=True)

    def opt(p, *names, **kw):
        kw.setdefault("default", None)
        p.add_argument(*names, **kw)

    def common(p):
        # accepted after the subcommand too; SUPPRESS keeps an unset
        # subcommand flag from clobbering a value parsed before it
        p.add_argument("--config", default=argparse.SUPPRESS)
        p.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)

    p = sub.add_parser("compute", help="EoF of a saved state across a cut")
    common(p)
    p.add_argument("state", help="state file (pure or density)")
    opt(p, "--cut", type=_dims_arg, help="left-block subsystem indices, e.g. 0,2")
    opt(p, "--restarts", type=int)
    opt(p, "--seed", type=int)
    opt(p, "--ensemble-size", type=_ensemble_size_arg, dest="ensemble_size")
    opt(p, "--max-iterations", type=int, dest="max_iterations")
    opt(p, "--dump-ensemble", dest="dump_ensemble",
        help="write the best decomposition found to this ensemble file")
    p.set_defaults(fn=_cmd_compute)

    p = sub.add_parser("verify", help="run a named numerical check")
    common(p)
    p.add_argument("check", choices=_VERIFY_NAMES + ("all",))
    opt(p, "--samples", type=int)
    opt(p, "--dims", type=_dims_arg)
    opt(p, "--seed", type=int)
    opt(p, "--tol", type=float)
    opt(p, "--slack", type=float)
    opt(p, "--member-slack", type=float, dest="member_slack")
    opt(p, "--decomposition-samples", type=int, dest="decomposition_samples")
    opt(p, "--pairs", type=int)
    opt(p, "--product-weight", type=float, dest="product_weight")
    opt(p, "--d", type=int)
    opt(p, "--restarts", type=int)
    opt(p, "--ensemble-size", type=_ensemble_size_arg, dest="ensemble_size")
    opt(p, "--max-iterations", type=int, dest="max_iterations")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("probe", help="randomized counterexample search")
    common(p)
    p.add_argument("relation", choices=("question1", "question2", "superadditivity"))
    opt(p, "--trials", type=int)
    opt(p, "--seed", type=int)
    opt(p, "--slack", type=float)
    opt(p, "--source", choices=("random", "case1", "werner"))
    opt(p, "--phi", type=float)
    opt(p, "--members", type=int)
    opt(p, "--rank", type=int)
    opt(p, "--dims", type=_dims_arg)
    opt(p, "--restarts", type=int)
    opt(p, "--ensemble-size", type=_ensemble_size_arg, dest="ensemble_size")
    opt(p, "--max-iterations", type=int, dest="max_iterations")
    p.set_defaults(fn=_cmd_probe)

    p = sub.add_parser("zoo", help="write an example state file")
    common(p)
    p.add_argument("family", choices=("case1", "case2", "werner", "random"))
    p.add_argument("--out", required=True, help="output state file")
    opt(p, "--seed", type=int)
    opt(p, "--shape", type=_dims_arg, help="case1 weight-matrix shape, e.g. 2,3")
    p.add_argument("--uniform", action="store_true",
                   help="case1: uniform weights instead of random")
    opt(p, "--product-weight", type=float, dest="product_weight")
    opt(p, "--d", type=int)
    opt(p, "--phi", type=float)
    p.add_argument("--two-pair", action="store_true", dest="two_pair",
                   help="werner: emit the four-party two-pair view")
    opt(p, "--dims", type=_dims_arg)
    opt(p, "--rank", type=int)
    p.add_argument("--pure", action="store_true", help="random: pure instead of mixed")
    p.set_defaults(fn=_cmd_zoo)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            _apply_config(args, _load_config(args.config))
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    try:
        return args.fn(args)
    except (OSError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
