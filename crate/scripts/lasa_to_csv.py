"""Convert LASA handwriting .mat files into the CSV layout read by
`samlfd bias-study --corpus DIR`.

Each output file has the columns demo,x,y with one block of rows per
demonstration. Only the first block is used by the bias study.

    python scripts/lasa_to_csv.py path/to/DataSet out/
"""

import argparse
import csv
from pathlib import Path

from scipy.io import loadmat


def demos_of(mat_path):
    data = loadmat(mat_path, squeeze_me=True, struct_as_record=False)
    demos = data["demos"]
    if not hasattr(demos, "__len__"):
        demos = [demos]
    for demo in demos:
        # pos is 2 x T
        yield demo.pos.T


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("src", type=Path, help="directory of LASA .mat files")
    parser.add_argument("dst", type=Path, help="output directory")
    args = parser.parse_args()

    args.dst.mkdir(parents=True, exist_ok=True)
    count = 0
    for mat in sorted(args.src.glob("*.mat")):
        with open(args.dst / f"{mat.stem}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["demo", "x", "y"])
            for i, pos in enumerate(demos_of(mat)):
                for x, y in pos:
                    writer.writerow([i, repr(float(x)), repr(float(y))])
        count += 1
    print(f"converted {count} files into {args.dst}")


if __name__ == "__main__":
    main()
