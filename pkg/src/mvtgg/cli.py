"""Command line front end; a thin layer over :mod:`mvtgg.api`.

Exit codes: 0 success, 1 oracle mismatch or benchmark integrity failure,
2 usage or input errors. ``MVTGG_SEED`` overrides every seed flag.
Document arguments accept ``bundled:NAME`` for the files shipped with the
package (ast2cd, ast2cd_ambiguous, diamond, example).
"""

from __future__ import annotations

import argparse
import os
import sys
from collections.abc import Sequence
from typing import Any

from . import api, io, resources
from .bench import STRATEGIES
from .errors import BenchmarkIntegrityError, ConfigurationError, InputError

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2


def _doc(ref: str) -> dict[str, Any]:
    if ref.startswith("bundled:"):
        try:
            return resources.load(ref.split(":", 1)[1])
        except KeyError as exc:
            raise InputError(str(exc.args[0])) from None
    return io.read(ref)


def _emit(doc: dict[str, Any], out: str | None) -> None:
    if out:
        io.write(out, doc)
    else:
        sys.stdout.write(io.dumps(doc))


def _note(summary: dict[str, Any]) -> None:
    print(io.dumps(summary).strip(), file=sys.stderr)


def _seed(args: argparse.Namespace) -> int | None:
    env = os.environ.get("MVTGG_SEED")
    if env is not None and env != "":
        try:
            return int(env)
        except ValueError:
            raise InputError(f"MVTGG_SEED must be an integer, got {env!r}") from None
    return args.seed


def _strategies(text: str) -> list[str]:
    names = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in names if s not in STRATEGIES]
    if not names or bad:
        raise argparse.ArgumentTypeError(f"expected a comma-separated subset of {','.join(STRATEGIES)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mvtgg", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def seeded(sp: argparse.ArgumentParser) -> argparse.ArgumentParser:
        sp.add_argument("--seed", type=int, default=None, help="match-order seed (default: deterministic order)")
        return sp

    sp = seeded(sub.add_parser("transform", help="batch forward transformation of a history"))
    sp.add_argument("--tgg", required=True)
    sp.add_argument("--history", required=True)
    sp.add_argument("--strategy", choices=("svm", "mvm"), default="mvm")
    sp.add_argument("--out")

    sp = seeded(sub.add_parser("sync", help="propagate a modification sequence into a state"))
    sp.add_argument("--tgg", help="grammar (default: the one embedded in the state)")
    sp.add_argument("--state", required=True)
    sp.add_argument("--mods", required=True)
    sp.add_argument("--strategy", choices=("svm", "mvm"), default=None)
    sp.add_argument("--out")

    sp = sub.add_parser("project", help="extract one version's triplet from a state")
    sp.add_argument("--state", required=True)
    sp.add_argument("--version", type=int, required=True)
    sp.add_argument("--out")

    sp = seeded(sub.add_parser("verify", help="run the equivalence oracles, or compare two states"))
    sp.add_argument("--tgg")
    sp.add_argument("--history")
    sp.add_argument("--mods")
    sp.add_argument("--compare", nargs=2, metavar=("STATE_A", "STATE_B"))
    sp.add_argument("--report")

    sp = seeded(sub.add_parser("bench", help="run the four-strategy benchmark"))
    sp.add_argument("--tgg", required=True)
    sp.add_argument("--history", required=True)
    sp.add_argument("--mods")
    sp.add_argument("--strategies", type=_strategies, default=list(STRATEGIES))
    sp.add_argument("--repeat", type=int, default=1)
    sp.add_argument("--report")
    sp.add_argument("--inject-fault", choices=STRATEGIES, help="perturb one strategy's output (integrity test)")

    sp = sub.add_parser("generate", help="generate a random history")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--versions", type=int, default=6)
    sp.add_argument("--branch-p", type=float, default=0.2)
    sp.add_argument("--merge-p", type=float, default=0.2)
    sp.add_argument("--ops", type=int, default=2)
    sp.add_argument("--max-elements", type=int, default=60, help="per-version element cap")
    sp.add_argument("--max-total", type=int, default=None, help="cap on distinct elements in the history")
    sp.add_argument("--untranslatable-p", type=float, default=0.05)
    sp.add_argument("--tgg")
    sp.add_argument("--out")

    sp = sub.add_parser("compact", help="drop mv-nodes present in no version")
    sp.add_argument("--state", required=True)
    sp.add_argument("--out")

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    return p


def _run(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    cmd = args.command
    if cmd == "transform":
        state, summary = api.transform(_doc(args.tgg), _doc(args.history), args.strategy, _seed(args))
        _emit(state, args.out)
        _note(summary)
        return EXIT_OK
    if cmd == "sync":
        tgg = _doc(args.tgg) if args.tgg else None
        state, summary = api.sync(_doc(args.state), _doc(args.mods), tgg_doc=tgg,
                                  strategy=args.strategy, seed=_seed(args))
        _emit(state, args.out)
        _note(summary)
        return EXIT_OK
    if cmd == "project":
        _emit(api.project(_doc(args.state), args.version), args.out)
        return EXIT_OK
    if cmd == "verify":
        if args.compare:
            if args.tgg or args.history or args.mods:
                parser.error("--compare cannot be combined with --tgg/--history/--mods")
            report = api.compare_states(_doc(args.compare[0]), _doc(args.compare[1]))
        else:
            if not (args.tgg and args.history):
                parser.error("verify needs --tgg and --history (or --compare)")
            mods = _doc(args.mods) if args.mods else None
            report = api.verify(_doc(args.tgg), _doc(args.history), mods, _seed(args))
        _emit(report, args.report)
        return EXIT_OK if report["ok"] else EXIT_MISMATCH
    if cmd == "bench":
        if args.repeat < 1:
            parser.error("--repeat must be at least 1")
        mods = _doc(args.mods) if args.mods else None
        report = api.bench(_doc(args.tgg), _doc(args.history), mods_doc=mods, strategies=args.strategies,
                           repeat=args.repeat, seed=_seed(args), inject_fault=args.inject_fault)
        _emit(report, args.report)
        return EXIT_OK
    if cmd == "generate":
        seed = _seed(args)
        doc = api.generate(
            _doc(args.tgg) if args.tgg else None,
            seed=seed if seed is not None else 0, versions=args.versions, branch_p=args.branch_p,
            merge_p=args.merge_p, ops=args.ops, max_elements=args.max_elements, max_total=args.max_total,
            untranslatable_p=args.untranslatable_p,
        )
        _emit(doc, args.out)
        return EXIT_OK
    if cmd == "compact":
        state, summary = api.compact(_doc(args.state))
        _emit(state, args.out)
        _note(summary)
        return EXIT_OK
    if cmd == "serve":
        import uvicorn

        from .service.app import create_app
        uvicorn.run(create_app(), host=args.host, port=args.port)
        return EXIT_OK
    parser.error(f"unknown command {cmd}")
    return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args, parser)
    except BenchmarkIntegrityError as exc:
        print(f"mvtgg: benchmark aborted: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (InputError, ConfigurationError) as exc:
        print(f"mvtgg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
