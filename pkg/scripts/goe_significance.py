"""GOE power spectrum against the two-point theory, with the per-frequency
p-value scan over ensemble sizes and the P_k sample distribution at 2N/5.

    python scripts/goe_significance.py --out runs/goe                 # N=1000, M=2*10^4 reference
    python scripts/goe_significance.py --out runs/goe --quick
"""

import argparse

import numpy as np

from deltan import io as dio
from deltan.pipeline import emit_plot_bundle, run_pipeline


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", required=True)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--dim", type=int, default=1000)
    ap.add_argument("--realizations", type=int, default=20_000)
    ap.add_argument("--method", choices=("dense", "tridiagonal"), default="tridiagonal")
    ap.add_argument("--quick", action="store_true", help="N=200, M=2000")
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()
    dim, M = (200, 2000) if args.quick else (args.dim, args.realizations)
    cfg = {"schema_version": 1, "recipe": "goe", "seed": args.seed, "dim": dim, "realizations": M,
           "method": args.method}
    manifest = run_pipeline(cfg, args.out, args.workers, command="scripts/goe_significance.py")
    for tag in ("fig3", "fig4", "fig5"):
        emit_plot_bundle(manifest, tag)
    cols, meta = dio.read_report(manifest.find("report_goe.csv"))
    N = int(cols["k"].max()) + 1
    for M_ in np.unique(cols["M"]):
        sel = (cols["M"] == M_) & (cols["k"] <= N // 2)
        print(f"M={M_:>6d}  pass fraction (k <= N/2) {np.mean(cols['verdict'][sel] == 'pass'):.3f}")


if __name__ == "__main__":
    main()
