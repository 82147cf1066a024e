"""Command line entry: serve the scorer or fine-tune a model."""

from __future__ import annotations

import argparse
import sys

from lm_service.config import ServiceConfig
from lm_service.finetune import TrainConfig, finetune
from lm_service.model import MaskedLanguageModel, ModelError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lm-service", description="masked-LM scoring service"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the scoring HTTP server")
    serve.add_argument("--model", required=True, help="model id or local path")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8311)
    serve.add_argument("--device", default="cpu")
    serve.add_argument("--max-batch", type=int, default=32)
    serve.add_argument(
        "--max-candidate-pieces", type=int, default=8,
        help="reject candidates longer than this many subword pieces",
    )

    tune = sub.add_parser("finetune", help="fine-tune on a training file")
    tune.add_argument("--model", required=True, help="model id or local path")
    tune.add_argument("--train", required=True, help="four-column training file")
    tune.add_argument("--out", required=True, help="checkpoint directory")
    tune.add_argument("--epochs", type=int, default=1)
    tune.add_argument("--batch-size", type=int, default=32)
    tune.add_argument("--lr", type=float, default=5e-5)
    tune.add_argument("--seed", type=int, default=0)
    tune.add_argument("--device", default="cpu")
    return parser


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from lm_service.app import create_app

    config = ServiceConfig(
        model=args.model,
        host=args.host,
        port=args.port,
        device=args.device,
        max_batch=args.max_batch,
        max_candidate_pieces=args.max_candidate_pieces,
    )
    model = MaskedLanguageModel(config)
    # load before binding so a bad model is an exit, not a 503 forever
    try:
        model.load()
    except ModelError as exc:
        print(f"lm-service: {exc}", file=sys.stderr)
        return 1
    uvicorn.run(create_app(model=model), host=config.host, port=config.port)
    return 0


def cmd_finetune(args: argparse.Namespace) -> int:
    config = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        seed=args.seed,
        device=args.device,
    )
    try:
        result = finetune(args.model, args.train, args.out, config)
    except (ModelError, OSError, ValueError) as exc:
        print(f"lm-service: {exc}", file=sys.stderr)
        return 1
    for rejection in result.rejections:
        print(
            f"rejected line {rejection.line_no}: {rejection.reason}",
            file=sys.stderr,
        )
    last = f"{result.losses[-1]:.4f}" if result.losses else "n/a"
    print(
        f"trained on {result.n_lines} lines, {result.steps} steps, "
        f"final loss {last}; checkpoints: {', '.join(result.checkpoints)}"
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return cmd_serve(args)
    return cmd_finetune(args)


if __name__ == "__main__":
    sys.exit(main())
