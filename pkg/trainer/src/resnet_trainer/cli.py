"""Command-line trainer: fit on exported window files, emit metric reports."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

logger = logging.getLogger("resnet_trainer")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="resnet-trainer")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("train", help="train on window files and evaluate on the test split")
    p.add_argument("--train", type=Path, required=True, help="training window file")
    p.add_argument("--val", type=Path, required=True, help="validation window file")
    p.add_argument("--test", type=Path, required=True, help="test window file")
    p.add_argument("--batch", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--max-epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=1e-4)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)

    from .windowfile import WindowFileError, read_window_file

    try:
        train_x, train_y, train_hdr = read_window_file(args.train)
        val_x, val_y, val_hdr = read_window_file(args.val)
        test_x, test_y, test_hdr = read_window_file(args.test)
    except WindowFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for name, hdr in (("val", val_hdr), ("test", test_hdr)):
        if (hdr.channels, hdr.length, hdr.label_set) != (
            train_hdr.channels,
            train_hdr.length,
            train_hdr.label_set,
        ):
            print(f"error: {name} file shape disagrees with train header", file=sys.stderr)
            return 1

    from .model import build_resnet1d
    from .metrics import confusion_csv, metrics_csv
    from .train import (
        TrainSpec,
        TrainingDiverged,
        evaluate_model,
        history_csv,
        make_deterministic,
        train_model,
    )

    make_deterministic(args.seed)
    model = build_resnet1d(
        input_length=train_hdr.length,
        channels=train_hdr.channels,
        num_classes=train_hdr.label_set,
        seed=args.seed,
    )
    logger.info(
        "training on %d windows (%d x %d, %d classes), batch %d",
        train_hdr.count,
        train_hdr.length,
        train_hdr.channels,
        train_hdr.label_set,
        args.batch,
    )
    spec = TrainSpec(
        batch_size=args.batch, max_epochs=args.max_epochs, initial_lr=args.lr, seed=args.seed
    )
    try:
        history = train_model(model, (train_x, train_y), (val_x, val_y), spec)
    except TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    last = history[-1]
    logger.info("finished after %d epochs, val accuracy %.4f", len(history), last.val_accuracy)

    report = evaluate_model(model, (test_x, test_y), train_hdr.label_set, args.batch)
    logger.info("test accuracy %.4f, macro F1 %.4f", report.accuracy, report.macro_f1)

    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "metrics.csv").write_text(metrics_csv(report))
    (args.out / "confusion.csv").write_text(confusion_csv(report.confusion))
    (args.out / "history.csv").write_text(history_csv(history))
    logger.info("reports written to %s", args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
