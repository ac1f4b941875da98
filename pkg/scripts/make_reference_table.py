"""Archive the direct-decode reference table for the bundled 256x256 images.

Runs the bench harness (L-DCT-ZZ, direct IDCT decode, the default ratio grid)
without timing columns and writes tests/data/reference_table.csv. The
acceptance suite recomputes the table and compares against this file.
"""

from pathlib import Path

from abcs.cli import DEFAULT_RATIOS, _ratio_list, run_bench, summarize, write_bench_csv
from abcs.pixelio import load_image

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"


def main():
    images = [(p.stem, load_image(p)) for p in sorted(DATA.glob("*256.pgm"))]
    rows = run_bench(images, ["zz"], _ratio_list(DEFAULT_RATIOS), ["idct"], timing=False)
    rows += summarize(rows)
    out = DATA / "reference_table.csv"
    write_bench_csv(out, rows)
    print(f"wrote {out} ({len(images)} images)")


if __name__ == "__main__":
    main()
