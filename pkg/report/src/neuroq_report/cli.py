"""`report --in DIR --out DIR`: render every artifact the logs support."""
from __future__ import annotations

import argparse
import sys

from .figures import plot_convergence, plot_returns
from .runset import RunSetError, load_runset
from .tables import timing_table


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="report",
        description="Render return curves, convergence curves, and timing "
                    "tables from training logs.",
    )
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="directory containing <algo>/seed<k>/ runs")
    parser.add_argument("--out", dest="out_dir", required=True)
    args = parser.parse_args(argv)

    try:
        runset = load_runset(args.in_dir)
    except RunSetError as exc:
        print(f"report: {exc}", file=sys.stderr)
        return 1

    written = [plot_returns(runset, args.out_dir),
               timing_table(runset, args.out_dir)]
    try:
        written.append(plot_convergence(runset, args.out_dir))
    except RunSetError as exc:
        print(f"report: convergence skipped: {exc}", file=sys.stderr)
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
