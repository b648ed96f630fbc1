"""Command line for the embedding extractor.

Exit codes follow the engine convention: 0 success, 2 usage error,
1 runtime error. Progress goes to stderr; the run summary is JSON on
stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .extract import EmbedderError, ExtractJob, extract


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="keystage-embed",
        description="Embed engine chunks with a frozen pretrained transformer",
    )
    parser.add_argument("--model", required=True,
                        help="model name or local checkpoint directory")
    parser.add_argument("--in", dest="input_path", required=True,
                        help="engine chunk JSONL (chunk_id, text)")
    parser.add_argument("--out", dest="output_path", required=True,
                        help="embedding JSONL to write")
    parser.add_argument("--attention", action="store_true",
                        help="emit per-word aggregated attention weights")
    parser.add_argument("--logits", action="store_true",
                        help="emit 4-class logits from a classification head")
    parser.add_argument("--batch-size", type=_positive_int, default=8)
    parser.add_argument("--quiet", action="store_true",
                        help="suppress progress lines on stderr")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    job = ExtractJob(
        model=args.model,
        input_path=args.input_path,
        output_path=args.output_path,
        attention=args.attention,
        logits=args.logits,
        batch_size=args.batch_size,
    )

    def progress(message: str) -> None:
        if not args.quiet:
            print(message, file=sys.stderr)

    try:
        summary = extract(job, progress=progress)
    except (EmbedderError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({
        "out": args.output_path,
        "records": summary.records,
        "dim": summary.dim,
        "model": summary.model,
        "truncated": list(summary.truncated),
    }, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
