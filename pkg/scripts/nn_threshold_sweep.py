#!/usr/bin/env python3
"""Sensitivity sweep for the greedy chain-reordering thresholds.

The chain criterion accepts a successor when the vertical gap is below
min_char_height AND the left-edge offset is below min_char_width. This
script sweeps both thresholds over a synthetic table and reports which
reading order comes out: column-major, the original row-major order, or
something else. Useful to see how sharp the flip between the two regimes
is for a given cell geometry.

Example:
    python scripts/nn_threshold_sweep.py --rows 4 --cols 3 --row-gap 5 --col-gap 60
"""

import argparse

from layoutprompt.model import CharMetrics, Page, TextBox
from layoutprompt.noise import NoiseConfig, apply_nearest_neighbor


def table_page(rows: int, cols: int, cell_w: int, cell_h: int,
               row_gap: int, col_gap: int) -> Page:
    boxes = []
    for r in range(rows):
        for c in range(cols):
            left = c * (cell_w + col_gap)
            top = r * (cell_h + row_gap)
            boxes.append(TextBox(
                text=f"r{r}c{c}", left=left, top=top,
                right=left + cell_w, bottom=top + cell_h,
                reading_index=len(boxes)))
    return Page(boxes=tuple(boxes))


def classify(order: list[str], rows: int, cols: int) -> str:
    row_major = [f"r{r}c{c}" for r in range(rows) for c in range(cols)]
    col_major = [f"r{r}c{c}" for c in range(cols) for r in range(rows)]
    if order == col_major:
        return "column"
    if order == row_major:
        return "row"
    return "mixed"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=4)
    parser.add_argument("--cols", type=int, default=3)
    parser.add_argument("--cell-width", type=int, default=40)
    parser.add_argument("--cell-height", type=int, default=20)
    parser.add_argument("--row-gap", type=int, default=5)
    parser.add_argument("--col-gap", type=int, default=60)
    parser.add_argument("--heights", type=int, nargs="+",
                        default=[2, 4, 6, 8, 10, 15, 20, 30])
    parser.add_argument("--widths", type=int, nargs="+",
                        default=[10, 25, 50, 75, 100, 150])
    args = parser.parse_args()

    page = table_page(args.rows, args.cols, args.cell_width, args.cell_height,
                      args.row_gap, args.col_gap)

    header = "min_h \\ min_w " + "".join(f"{w:>8}" for w in args.widths)
    print(header)
    for min_h in args.heights:
        cells = []
        for min_w in args.widths:
            out = apply_nearest_neighbor(
                page, NoiseConfig(), CharMetrics(min_w, min_h))
            cells.append(classify([b.text for b in out.boxes], args.rows, args.cols))
        print(f"{min_h:>13} " + "".join(f"{c:>8}" for c in cells))
    print(f"\ntable: {args.rows}x{args.cols}, cell {args.cell_width}x{args.cell_height}, "
          f"row gap {args.row_gap}, column gap {args.col_gap}")
    return 0


if __name__ == "__main__":
    import sys

    sys.exit(main())
