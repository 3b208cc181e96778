"""End-to-end self-supervised run: synthesize stacks, train, evaluate.

Trains the spectral network on measurement stacks alone (the truth fields
stay untouched, checked via the read counter) and scores the result on a
fresh holdout against an MHPR baseline run on the same stacks.

Defaults are sized for a quick desk check (~2 min). The full-size run is

    python3 scripts/train_pipeline.py --count 2000 --epochs 6 --holdout 100
"""

import argparse
import json
import os
import time

import numpy as np

from holophys.field import OpticalGrid
from holophys.metrics import evaluate
from holophys.solvers import mhpr
from holophys.spafnet import SpafConfig, network_forward, save_weights, train
from holophys.synthgen import SynthConfig, field_read_count, make_dataset

GRID = OpticalGrid(n=64, pitch=1.12, wavelength=0.53, refractive_index=1.0)
ZS = [300.0, 375.0]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--holdout", type=int, default=20)
    ap.add_argument("--epochs", type=int, default=2)
    ap.add_argument("--batch-size", type=int, default=8)
    ap.add_argument("--channels", type=int, default=32)
    ap.add_argument("--blocks", type=int, default=4)
    ap.add_argument("--half-windows", type=int, nargs="+", default=None,
                    help="one per block; default trims/extends the 16 12 8 8 pyramid")
    ap.add_argument("--seed", type=int, default=1001)
    ap.add_argument("--out", default="runs/train_pipeline")
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    windows = args.half_windows
    if windows is None:
        pyramid = [16, 12, 8, 8]
        windows = (pyramid + [pyramid[-1]] * args.blocks)[: args.blocks]
    cfg = SpafConfig(
        m_inputs=len(ZS), channels=args.channels, blocks=args.blocks,
        half_windows=tuple(windows),
    )

    print(f"synthesizing {args.count} training stacks + {args.holdout} holdout ...")
    train_stacks = [
        s for _, s in make_dataset(SynthConfig(), GRID, ZS, args.count, seed=args.seed)
    ]
    holdout = make_dataset(SynthConfig(), GRID, ZS, args.holdout, seed=args.seed + 1)

    reads_before = field_read_count()
    t0 = time.perf_counter()
    weights, log = train(
        train_stacks, cfg, epochs=args.epochs, batch_size=args.batch_size,
        seed=0, verbose=True,
    )
    train_minutes = (time.perf_counter() - t0) / 60
    reads = field_read_count() - reads_before
    assert reads == 0, f"training touched {reads} truth fields"

    save_weights(os.path.join(args.out, "weights.spwt"), weights, seed=0)
    val = [r["total"] for r in log if r.get("kind") == "val"]
    print(f"trained {train_minutes:.1f} min, val loss {val[0]:.4f} -> {min(val):.4f}")

    net_ecc, mhpr_ecc = [], []
    for obj, stack in holdout:
        net_ecc.append(evaluate(network_forward(stack, weights, cfg), obj.field).ecc)
        mhpr_ecc.append(evaluate(mhpr(stack, iters=100).field, obj.field).ecc)
    summary = {
        "count": args.count,
        "epochs": args.epochs,
        "train_minutes": round(train_minutes, 2),
        "truth_reads_during_train": reads,
        "val_loss_first": val[0],
        "val_loss_best": min(val),
        "holdout_net_ecc_mean": float(np.mean(net_ecc)),
        "holdout_mhpr_ecc_mean": float(np.mean(mhpr_ecc)),
    }
    with open(os.path.join(args.out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    print(json.dumps(summary, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
