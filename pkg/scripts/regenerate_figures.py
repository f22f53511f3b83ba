"""Regenerate every figure data set into one directory.

Equivalent to running `wfgraph figures --which W --out DIR` for each W;
kept as a script so a single command refreshes all of them.
"""

import argparse

from wfgraph import cli


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="figure_data",
                        help="output directory (created if missing)")
    args = parser.parse_args()
    for which in sorted(cli._FIGURE_BUILDERS):
        code = cli.main(["figures", "--which", str(which), "--out", args.out])
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
