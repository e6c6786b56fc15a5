#!/usr/bin/env python3
"""Plot a sweep CSV produced by `corrnoise sweep`.

Convenience only; the tested surface is the CSV itself.
"""
import argparse
import csv
import math


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv_path")
    ap.add_argument("--out", default="sweep.png")
    ap.add_argument("--x", default="axis_value",
                    choices=["axis_value", "d_eff"])
    args = ap.parse_args()

    series = {}
    with open(args.csv_path) as fh:
        for row in csv.DictReader(fh):
            if row["estimate"] == "diverged":
                continue
            x = float(row["d_eff"] if args.x == "d_eff" else row["axis_value"])
            entry = series.setdefault(row["algorithm"], {"x": [], "y": [],
                                                         "err": [], "th": []})
            entry["x"].append(x)
            entry["y"].append(float(row["estimate"]))
            entry["err"].append(float(row["stderr"]))
            th = float(row["theory"])
            entry["th"].append(th if math.isfinite(th) else None)

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    for name, s in sorted(series.items()):
        ax.errorbar(s["x"], s["y"], yerr=s["err"], marker="o", ls="-",
                    capsize=3, label=name)
        th_pairs = [(x, t) for x, t in zip(s["x"], s["th"]) if t is not None]
        if th_pairs:
            ax.plot([p[0] for p in th_pairs], [p[1] for p in th_pairs],
                    ls="--", alpha=0.6, label=f"{name} (theory)")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(args.x)
    ax.set_ylabel("stationary suboptimality")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
