#!/usr/bin/env python3
"""Token counter server speaking the adapter wire protocol on stdio.

Each request: decimal byte length of the UTF-8 text, newline, then the
text bytes. Each response: decimal token count, newline. Runs until EOF.

With --mode tiktoken the counts come from the real BPE if the package is
installed; --mode approx uses the built-in whitespace-and-punctuation
splitter (handy for tests and offline runs).
"""

import argparse
import sys

from layoutprompt.tokens import ApproximateCounter, serve_counts


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--mode", choices=["approx", "tiktoken"], default="approx")
    parser.add_argument("--encoding", default="cl100k_base",
                        help="BPE encoding name for --mode tiktoken")
    args = parser.parse_args()

    if args.mode == "tiktoken":
        import tiktoken

        encoder = tiktoken.get_encoding(args.encoding)
        count = lambda text: len(encoder.encode(text))
    else:
        count = ApproximateCounter().count

    serve_counts(count, sys.stdin.buffer, sys.stdout.buffer)
    return 0


if __name__ == "__main__":
    sys.exit(main())
