"""Reconstruction quality vs number of measurement planes.

Runs MHPR and the variational solver on the same synthetic instances for
M in {1, 2, 4, 8} and plots mean ECC with standard-error bars. Results
land in runs/m_sweep/ as CSV plus PNG.
"""

import argparse
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from holophys.cli import zs_for_m
from holophys.field import OpticalGrid
from holophys.metrics import evaluate
from holophys.solvers import SolverConfig, mhpr, variational_solve
from holophys.synthgen import SynthConfig, make_dataset

GRID = OpticalGrid(n=64, pitch=1.12, wavelength=0.53, refractive_index=1.0)


def run_point(m, count, seed, var_steps):
    zs = zs_for_m(m)
    rows = []
    for k, (obj, stack) in enumerate(
        make_dataset(SynthConfig(), GRID, zs, count, seed=(seed, m))
    ):
        ecc_mhpr = evaluate(mhpr(stack, iters=100).field, obj.field).ecc
        cfg = SolverConfig(max_iters=var_steps, seed=0)
        ecc_var = evaluate(variational_solve(stack, cfg).field, obj.field).ecc
        rows.append({"M": m, "instance": k, "ecc_mhpr": ecc_mhpr, "ecc_var": ecc_var})
        print(f"M={m} instance={k}: mhpr {ecc_mhpr:.4f}  var {ecc_var:.4f}")
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ms", type=int, nargs="+", default=[1, 2, 4, 8])
    ap.add_argument("--count", type=int, default=10, help="instances per M")
    ap.add_argument("--var-steps", type=int, default=400)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/m_sweep")
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    rows = []
    for m in args.ms:
        rows.extend(run_point(m, args.count, args.seed, args.var_steps))

    with open(os.path.join(args.out, "m_sweep.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["M", "instance", "ecc_mhpr", "ecc_var"])
        w.writeheader()
        w.writerows(rows)

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for key, label in (("ecc_mhpr", "MHPR (100 iters)"), ("ecc_var", "variational")):
        means, ses = [], []
        for m in args.ms:
            vals = np.array([r[key] for r in rows if r["M"] == m])
            means.append(vals.mean())
            ses.append(vals.std(ddof=1) / np.sqrt(len(vals)) if len(vals) > 1 else 0.0)
        ax.errorbar(args.ms, means, yerr=ses, marker="o", capsize=3, label=label)
    ax.set_xlabel("number of planes M")
    ax.set_ylabel("ECC vs truth")
    ax.set_xscale("log", base=2)
    ax.set_xticks(args.ms)
    ax.set_xticklabels([str(m) for m in args.ms])
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(args.out, "m_sweep.png"), dpi=150)
    print(f"wrote {args.out}/m_sweep.csv and m_sweep.png")


if __name__ == "__main__":
    main()
