"""Command-line entry points: train, ask, eval, serve.

Exit codes: 0 success, 1 usage error, 2 data error, 3 rejected question
(ask only).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bundle import load_bundle, save_bundle
from .errors import EngineError
from .evaluation import EvalSuite, generate_technical_suite, render_report, run_suite
from .models import BundleConfig, parse_qa_pairs, train_from_corpus
from .server import serve
from .synthesis import RejectConfig, synthesize
from .textmodel import Lexicon

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_REJECTED = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="infoqa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a bundle from a corpus")
    p_train.add_argument("--corpus", required=True, help="plain-text corpus file")
    p_train.add_argument("--qa", help="question<TAB>answer training pairs")
    p_train.add_argument("--lexicon", help="lexicon TSV (default: bundled English)")
    p_train.add_argument("--out", required=True, help="bundle directory to write")
    p_train.add_argument("--mode", choices=("parallel", "consecutive"), default="parallel")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--holdout", type=float, default=0.1)

    p_ask = sub.add_parser("ask", help="answer one question")
    p_ask.add_argument("--model", required=True, help="bundle directory")
    p_ask.add_argument("--question", required=True)
    p_ask.add_argument("--trace", action="store_true", help="print the full trace JSON")
    p_ask.add_argument("--threshold", type=float, help="retrieval confidence gate")

    p_eval = sub.add_parser("eval", help="run an evaluation suite")
    p_eval.add_argument("--model", required=True, help="bundle directory")
    p_eval.add_argument("--suite", help="suite TSV (group, question, gold, alts)")
    p_eval.add_argument("--generate", type=int, metavar="N", help="generate an N-item suite")
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--report", required=True, help="report file to write")
    p_eval.add_argument(
        "--compare", metavar="DIR", help="second bundle for the other report column"
    )

    p_serve = sub.add_parser("serve", help="serve the HTTP API and console")
    p_serve.add_argument("--model", required=True, help="bundle directory")
    p_serve.add_argument("--port", type=int, required=True)
    p_serve.add_argument("--bind", default="127.0.0.1")
    p_serve.add_argument("--console", help="static console directory to serve at /")
    return parser


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _cmd_train(args) -> int:
    corpus = _read_text(args.corpus)
    qa_pairs = parse_qa_pairs(_read_text(args.qa)) if args.qa else []
    lexicon = Lexicon.from_file(args.lexicon) if args.lexicon else Lexicon.bundled()
    config = BundleConfig(seed=args.seed, holdout_ratio=args.holdout)
    bundle, report = train_from_corpus(
        corpus, qa_pairs, lexicon, mode=args.mode, config=config
    )
    save_bundle(bundle, args.out)
    print(report.render())
    print("bundle written to %s" % args.out)
    return EXIT_OK


def _cmd_ask(args) -> int:
    bundle = load_bundle(args.model)
    thresholds = None
    if args.threshold is not None:
        thresholds = RejectConfig(mlsu_min=args.threshold, max_steps=bundle.config.max_steps)
    trace = synthesize(bundle, args.question, thresholds)
    if args.trace:
        print(trace.to_json(indent=2))
    if trace.rejected:
        print("rejected: %s (stage %s)" % (trace.reject_reason, trace.reject_stage),
              file=sys.stderr)
        return EXIT_REJECTED
    if not args.trace:
        print(trace.final_answer)
    return EXIT_OK


def _cmd_eval(args) -> int:
    bundle = load_bundle(args.model)
    if args.suite:
        suite = EvalSuite.from_text(_read_text(args.suite))
    elif args.generate:
        suite = generate_technical_suite(bundle, args.generate, seed=args.seed)
    else:
        raise _UsageError("eval needs --suite FILE or --generate N")

    reports = {"parallel": None, "consecutive": None}
    reports[bundle.training_mode] = run_suite(bundle, suite)
    if args.compare:
        other = load_bundle(args.compare)
        column = other.training_mode
        if reports[column] is not None:
            column = "consecutive" if column == "parallel" else "parallel"
        reports[column] = run_suite(other, suite)

    text = render_report(reports)
    report_path = Path(args.report)
    report_path.write_text(text, encoding="utf-8")
    report_path.with_suffix(report_path.suffix + ".json").write_text(
        json.dumps(
            {
                mode: (r.to_dict() if r else None)
                for mode, r in reports.items()
            },
            sort_keys=True,
            ensure_ascii=False,
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    print(text, end="")
    return EXIT_OK


def _default_console_dir() -> Path | None:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


def _cmd_serve(args) -> int:
    bundle = load_bundle(args.model)
    console = Path(args.console) if args.console else _default_console_dir()
    server = serve(bundle, args.port, bind=args.bind, console_dir=console)
    print("serving on http://%s:%d/ (console: %s)" % (args.bind, args.port, console or "off"))
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


_COMMANDS = {
    "train": _cmd_train,
    "ask": _cmd_ask,
    "eval": _cmd_eval,
    "serve": _cmd_serve,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except (EngineError, OSError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
