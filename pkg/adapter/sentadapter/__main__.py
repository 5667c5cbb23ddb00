"""Command line: finetune a model, or serve one over the protocol."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import AdapterConfig
from .finetune import finetune
from .serve import Responder


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sentadapter")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    ft = sub.add_parser("finetune", help="fine-tune on an annotated interchange file")
    ft.add_argument("--train", required=True, help="CSV with id, text, label columns")
    ft.add_argument("--out", required=True, help="artifact output directory")
    ft.add_argument("--base-model", default=AdapterConfig.base_model)
    ft.add_argument("--epochs", type=int, default=AdapterConfig.epochs)
    ft.add_argument("--learning-rate", type=float, default=AdapterConfig.learning_rate)
    ft.add_argument("--batch-size", type=int, default=AdapterConfig.batch_size)
    ft.add_argument("--seed", type=int, default=AdapterConfig.seed)
    ft.add_argument("--max-length", type=int, default=AdapterConfig.max_length)

    sv = sub.add_parser("serve", help="answer scoring requests")
    sv.add_argument("--model", required=True, help="artifact directory")
    sv.add_argument("--batch-size", type=int, default=32)
    mode = sv.add_mutually_exclusive_group()
    mode.add_argument("--stdio", action="store_true", help="speak on stdin/stdout (default)")
    mode.add_argument("--listen", metavar="HOST:PORT", help="speak over TCP")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "finetune":
            config = AdapterConfig(
                base_model=args.base_model,
                epochs=args.epochs,
                learning_rate=args.learning_rate,
                batch_size=args.batch_size,
                seed=args.seed,
                max_length=args.max_length,
            )
            payload = finetune(args.train, args.out, config)
            report = payload.get("ternary")
            if report:
                print(f"held-out macro F1: {report['macro_f1']:.3f}", file=sys.stderr)
        else:
            responder = Responder(args.model, batch_size=args.batch_size)
            if args.listen:
                host, _, port = args.listen.rpartition(":")
                responder.serve_tcp(host or "127.0.0.1", int(port))
            else:
                responder.serve_stdio()
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
