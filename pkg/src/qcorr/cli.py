"""Command-line entry point.

Exit codes: 0 success, 1 suite failure, 2 usage or parse error,
3 domain-validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict
from typing import Any

from . import __version__
from .channel import (
    KrausChannel,
    LocalChannelPair,
    apply,
    channel_from_spec,
    classify,
    identity_channel,
    min_choi_eigenvalue,
)
from .discord import OptimizerConfig, quantum_discord
from .entropy import mutual_information, von_neumann_entropy
from .errors import CompletePositivityError, FormatError, QCorrError
from .harness import HarnessTolerances, bell_isotropic_demo, run_invariance_experiment, theorem2_suite
from .qstate import (
    BipartiteState,
    PureState,
    Tolerances,
    bell_state,
    pure_to_density,
    random_bipartite,
    state_from_json,
    state_to_json,
    werner_state,
)
from .recovery import check_sufficiency

EXIT_OK, EXIT_SUITE_FAIL, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- input parsing -------------------------------------------------------------

def _read_json(path: str) -> Any:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    text = raw.decode("utf-8", errors="replace")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise UsageError(f"{path}: malformed JSON at byte offset {offset}: {exc.msg}") from None


def _parse_scalar(text: str) -> Any:
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _parse_kv(text: str) -> dict:
    out = {}
    for item in filter(None, text.split(",")):
        if "=" not in item:
            raise UsageError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_scalar(v.strip())
    return out


def parse_zoo_spec(text: str) -> dict:
    """``zoo:NAME[:k=v,...]`` or ``zoo:{json}`` into a channel spec dict."""
    body = text[len("zoo:"):]
    if body.startswith("{"):
        try:
            spec = json.loads(body)
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed inline zoo spec at offset {exc.pos}: {exc.msg}") from None
        return spec
    name, _, params = body.partition(":")
    if not name:
        raise UsageError("zoo spec needs a channel name, e.g. zoo:depolarizing:p=0.5,d=2")
    return {"zoo": name, **_parse_kv(params)}


def load_channel(arg: str, seed: int, default_dim: int | None = None) -> tuple[KrausChannel, Any]:
    spec = parse_zoo_spec(arg) if arg.startswith("zoo:") else _read_json(arg)
    if isinstance(spec, dict) and "zoo" in spec and "d" not in spec and default_dim is not None:
        spec = {**spec, "d": default_dim}
    return channel_from_spec(spec, seed), (spec if arg.startswith("zoo:") else arg)


def load_state(arg: str, seed: int) -> tuple[BipartiteState, Any]:
    """A state file path, or one of ``bell``, ``werner:p=P``, ``random:dim_a=..,dim_b=..,rank=..``."""
    if arg == "bell":
        return bell_state(), "bell"
    if arg.startswith("werner:"):
        params = _parse_kv(arg[len("werner:"):])
        return werner_state(float(params.get("p", 0.5))), arg
    if arg.startswith("random:"):
        params = _parse_kv(arg[len("random:"):])
        da, db = int(params.get("dim_a", 2)), int(params.get("dim_b", 2))
        rank = params.get("rank")
        return random_bipartite(da, db, None if rank is None else int(rank), seed), {**params, "seed": seed}
    s = state_from_json(_read_json(arg))
    if isinstance(s, PureState):
        raise UsageError(f"{arg}: pure-state file needs dim_a and dim_b to define a bipartition")
    return s, arg


def load_single_state(arg: str, seed: int):
    if arg == "bell" or arg.startswith(("werner:", "random:")):
        return load_state(arg, seed)[0].state
    s = state_from_json(_read_json(arg))
    return pure_to_density(s) if isinstance(s, PureState) else s.state


# -- output --------------------------------------------------------------------

def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list) and v and isinstance(v[0], list):
            continue  # matrices are JSON-only
        else:
            out[key] = v
    return out


def _emit(report: dict, args, csv_text: str | None = None) -> None:
    if args.format == "csv":
        if csv_text is None:
            flat = _flatten(report)
            buf = io.StringIO()
            writer = csv.DictWriter(buf, fieldnames=list(flat), lineterminator="\n")
            writer.writeheader()
            writer.writerow(flat)
            csv_text = buf.getvalue()
        text = csv_text
    else:
        text = json.dumps(report, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _optimizer(args) -> OptimizerConfig:
    return OptimizerConfig(restarts=args.restarts, seed=args.seed, max_iters=args.max_iters, ftol=args.ftol)


def _config(args, **extra) -> dict:
    cfg = {"command": args.command, "seed": args.seed}
    if hasattr(args, "restarts"):
        cfg["optimizer"] = _optimizer(args).to_json()
    cfg["state_tolerances"] = asdict(Tolerances())
    if args.tol is not None:
        cfg["tol"] = args.tol
    cfg.update(extra)
    return cfg


# -- commands ------------------------------------------------------------------

def cmd_discord(args) -> int:
    s, spec = load_state(args.state, args.seed)
    result = quantum_discord(s, args.side, _optimizer(args))
    _emit({"config": _config(args, state=spec), **result.to_json()}, args)
    return EXIT_OK


def cmd_mutinfo(args) -> int:
    s, spec = load_state(args.state, args.seed)
    report = {
        "config": _config(args, state=spec),
        "I": mutual_information(s),
        "S_A": von_neumann_entropy(s.marginal("A")),
        "S_B": von_neumann_entropy(s.marginal("B")),
        "S_AB": von_neumann_entropy(s.state),
    }
    _emit(report, args)
    return EXIT_OK


def cmd_channel(args) -> int:
    ch, spec = load_channel(args.spec, args.seed)
    config = _config(args, channel=spec)
    if args.action == "validate":
        err = ch.completeness_error()
        min_eig = min_choi_eigenvalue(ch)
        report = {
            "config": config,
            "cptp_valid": err <= 1e-10 and min_eig >= -1e-10,
            "completeness_error": err,
            "min_choi_eigenvalue": min_eig,
        }
        _emit(report, args)
        if min_eig < -1e-10:
            raise CompletePositivityError(f"Choi matrix has eigenvalue {min_eig:.6g}", min_eig)
        ch.validate()
        return EXIT_OK
    if args.action == "classify":
        tol = 1e-9 if args.tol is None else args.tol
        verdict = classify(ch, trials=args.trials, seed=args.seed, tol=tol)
        _emit({"config": config, **verdict.to_json()}, args)
        return EXIT_OK
    if args.state is None:
        raise UsageError("channel apply needs --state")
    s, _ = load_state(args.state, args.seed)
    out = apply(ch, s.state)
    if out.dim != s.state.dim:
        raise UsageError("channel apply only supports dimension-preserving channels on state files")
    result = BipartiteState(out, s.dim_a, s.dim_b)
    text = json.dumps(state_to_json(result), indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_invariance(args) -> int:
    cfg = _optimizer(args)
    if args.demo:
        if args.p is None:
            raise UsageError("--demo bell-isotropic needs --p")
        report = bell_isotropic_demo(args.p, cfg)
    else:
        if args.state is None:
            raise UsageError("invariance needs --state or --demo")
        s, state_spec = load_state(args.state, args.seed)
        ch_a, spec_a = (
            load_channel(args.channel_a, args.seed + 1, s.dim_a) if args.channel_a else (identity_channel(s.dim_a), "identity")
        )
        ch_b, spec_b = (
            load_channel(args.channel_b, args.seed + 2, s.dim_b) if args.channel_b else (identity_channel(s.dim_b), "identity")
        )
        report = run_invariance_experiment(
            s, LocalChannelPair(ch_a, ch_b), cfg, args.side,
            state_spec=state_spec, channel_spec={"A": spec_a, "B": spec_b},
        )
    _emit({"config": _config(args), **report.to_json()}, args)
    return EXIT_OK


def cmd_suite(args) -> int:
    summary = theorem2_suite(args.seed, args.trials, _optimizer(args), HarnessTolerances(), args.workers)
    payload = {"config": _config(args, trials=args.trials), **summary.to_json()}
    _emit(payload, args, csv_text=summary.to_csv() if args.format == "csv" else None)
    return EXIT_OK if summary.passed else EXIT_SUITE_FAIL


def cmd_petz(args) -> int:
    ch, spec = load_channel(args.channel, args.seed)
    rho = load_single_state(args.rho, args.seed)
    sigma = load_single_state(args.sigma, args.seed + 1)
    recovery_tol = 1e-6 if args.tol is None else args.tol
    report = check_sufficiency(ch, rho, sigma, recovery_tol=recovery_tol)
    _emit({"config": _config(args, channel=spec), **report.to_json(), "equality": report.equality}, args)
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _default_seed() -> int:
    env = os.environ.get("QCORR_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"QCORR_SEED must be an integer, got {env!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcorr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (default: $QCORR_SEED or 0)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tol", type=float, default=None)

    opt = argparse.ArgumentParser(add_help=False)
    opt.add_argument("--restarts", type=_positive_int, default=32)
    opt.add_argument("--max-iters", type=_positive_int, default=500)
    opt.add_argument("--ftol", type=float, default=1e-10)

    side = argparse.ArgumentParser(add_help=False)
    side.add_argument("--side", choices=("A", "B"), default="A")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discord", parents=[common, opt, side], help="I, C and D of a bipartite state")
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_discord)

    p = sub.add_parser("mutinfo", parents=[common], help="quantum mutual information")
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_mutinfo)

    p = sub.add_parser("channel", parents=[common], help="validate, classify or apply a channel")
    p.add_argument("action", choices=("validate", "classify", "apply"))
    p.add_argument("spec", help="channel JSON file or zoo:NAME[:k=v,...]")
    p.add_argument("--state", help="state to transform (apply)")
    p.add_argument("--trials", type=_positive_int, default=200, help="commutativity probe trials")
    p.set_defaults(func=cmd_channel)

    p = sub.add_parser("invariance", parents=[common, opt, side], help="I, C, D before and after local channels")
    p.add_argument("--state")
    p.add_argument("--channel-a")
    p.add_argument("--channel-b")
    p.add_argument("--demo", choices=("bell-isotropic",))
    p.add_argument("--p", type=float)
    p.set_defaults(func=cmd_invariance)

    p = sub.add_parser("suite", parents=[common, opt], help="run the randomized invariance suite")
    p.add_argument("--trials", type=_positive_int, default=50)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("petz", parents=[common], help="relative-entropy sufficiency via the Petz map")
    p.add_argument("--channel", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.set_defaults(func=cmd_petz)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        return args.func(args)
    except (UsageError, FormatError) as exc:
        print(f"qcorr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QCorrError, ValueError) as exc:
        print(f"qcorr: invalid input: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
