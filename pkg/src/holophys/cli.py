"""Command-line driver: dataset generation, solving, training, sweeps.

Subcommands: gen, simulate, solve, train, infer, eval, sweep. Global
flags: --config (JSON file with per-command sections), --seed, --out,
--threads. Every command writes a manifest.json (canonical JSON, no
timestamps) into the output directory before any artifact, so a run is
reproducible from the manifest alone.

Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, cfld
from .errors import ConfigError, DataError, NumericError, ShapeMismatch
from .field import ComplexField, HologramStack, OpticalGrid
from .ioutil import atomic_write_text, canonical_json, sha256_file
from .loss import DEFAULT_WEIGHTS, LossWeights
from .metrics import evaluate
from .propagation import sigma_for_snr_db, simulate_hologram_stack
from .solvers import SolverConfig, default_init, mhpr, refocus, variational_solve
from .spafnet import SpafConfig, load_weights, network_forward, save_weights, train
from .synthgen import SynthConfig, make_dataset

DEFAULT_PITCH = 1.12
DEFAULT_WAVELENGTH = 0.53

METRIC_FIELDS = ["ssim_amp", "ssim_phase", "rmse_amp", "rmse_phase", "ecc"]

# config files hold one optional object per subcommand; flags override file
# values, file values override built-in defaults
CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        cmd: {"type": "object"}
        for cmd in ("gen", "simulate", "solve", "train", "infer", "eval", "sweep")
    },
}


def zs_for_m(m: int) -> list[float]:
    """Plane layout per M: one plane at 300, the two-plane training
    geometry {300, 375}, otherwise evenly spaced over [300, 405]."""
    if m < 1:
        raise ConfigError(f"M must be >= 1, got {m}")
    if m == 1:
        return [300.0]
    if m == 2:
        return [300.0, 375.0]
    return [float(z) for z in np.linspace(300.0, 405.0, m)]


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in str(text).split(",") if tok != ""]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _parse_values(text: str) -> list[float]:
    """Accept '1,2,4' or 'lo..hi' or 'lo..hi:step' (step defaults to 10)."""
    text = str(text)
    if ".." in text:
        span, _, step = text.partition(":")
        lo, _, hi = span.partition("..")
        try:
            lo, hi = float(lo), float(hi)
            step = float(step) if step else 10.0
        except ValueError:
            raise ConfigError(f"bad range {text!r}") from None
        if step <= 0 or hi < lo:
            raise ConfigError(f"bad range {text!r}")
        count = int(round((hi - lo) / step))
        return [lo + k * step for k in range(count + 1)]
    return _parse_floats(text)


def _grid(args) -> OpticalGrid:
    return OpticalGrid(args["n"], args["pitch"], args["wavelength"], 1.0)


def _ensure_out(args) -> str:
    out = args.get("out")
    if not out:
        raise ConfigError("--out is required")
    os.makedirs(out, exist_ok=True)
    return out


def _write_manifest(out: str, command: str, config: dict, inputs: dict[str, str]) -> None:
    manifest = {
        "command": command,
        "config": config,
        "inputs": inputs,
        "versions": {"holophys": __version__, "numpy": np.__version__},
    }
    atomic_write_text(os.path.join(out, "manifest.json"), canonical_json(manifest) + "\n")


def _write_csv(path: str, fieldnames: list[str], rows: list[dict]) -> None:
    import io

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    atomic_write_text(path, buf.getvalue())


def _metrics_row(recon: ComplexField, truth: ComplexField) -> dict:
    rep = evaluate(recon, truth)
    return {k: f"{v:.10g}" for k, v in rep.as_dict().items()}


# ---------------------------------------------------------------- gen


def cmd_gen(args) -> int:
    out = _ensure_out(args)
    existing = [p for p in os.listdir(out) if not p.startswith(".")]
    if existing:
        raise ConfigError(f"output dir {out} is not empty ({len(existing)} entries)")
    zs = _parse_floats(args["zs"])
    z_mode = args["z_mode"]
    z_range = (275.0, 400.0)
    if z_mode.startswith("uniform"):
        parts = z_mode.split(":")
        if len(parts) == 3:
            z_range = (float(parts[1]), float(parts[2]))
        elif len(parts) != 1:
            raise ConfigError(f"bad --z-mode {z_mode!r}")
        z_mode = "uniform"
    elif z_mode != "fixed":
        raise ConfigError(f"bad --z-mode {z_mode!r}")
    config = {
        "n": args["n"],
        "pitch": args["pitch"],
        "wavelength": args["wavelength"],
        "count": args["count"],
        "zs": zs,
        "kind": args["kind"],
        "noise_sigma": args["noise_sigma"],
        "smoothing_radius": args["smoothing_radius"],
        "delta": args["delta"],
        "z_mode": z_mode,
        "z_range": list(z_range),
        "seed": args["seed"],
    }
    _write_manifest(out, "gen", config, {})
    grid = _grid(args)
    cfg = SynthConfig(
        n=args["n"],
        delta=args["delta"],
        smoothing_radius=args["smoothing_radius"],
        seed=args["seed"],
    )
    entries = make_dataset(
        cfg,
        grid,
        zs,
        args["count"],
        noise_sigma=args["noise_sigma"],
        kind=args["kind"],
        z_mode=z_mode,
        z_range=z_range,
    )
    sums = {}
    for i, (obj, stack) in enumerate(entries):
        sp = os.path.join(out, f"stack_{i:04d}.cfld")
        tp = os.path.join(out, f"truth_{i:04d}.cfld")
        cfld.write_stack(sp, stack)
        cfld.write_field(tp, obj.field)
        sums[os.path.basename(sp)] = sha256_file(sp)
        sums[os.path.basename(tp)] = sha256_file(tp)
    atomic_write_text(os.path.join(out, "checksums.json"), canonical_json(sums) + "\n")
    print(f"gen: wrote {len(entries)} stacks to {out}")
    return 0


# ---------------------------------------------------------------- simulate


def cmd_simulate(args) -> int:
    out = _ensure_out(args)
    obj_path = args.get("object")
    if not obj_path:
        raise ConfigError("--object is required")
    field = cfld.read(obj_path)
    if not isinstance(field, ComplexField):
        raise DataError(f"{obj_path} does not hold a complex field")
    zs = _parse_floats(args["zs"])
    config = {
        "object": os.path.basename(obj_path),
        "zs": zs,
        "noise_sigma": args["noise_sigma"],
        "seed": args["seed"],
    }
    _write_manifest(out, "simulate", config, {os.path.basename(obj_path): sha256_file(obj_path)})
    stack = simulate_hologram_stack(field, zs, args["noise_sigma"], seed=args["seed"])
    cfld.write_stack(os.path.join(out, "stack.cfld"), stack)
    print(f"simulate: wrote stack.cfld with M={stack.m}")
    return 0


# ---------------------------------------------------------------- solve


def _load_stack(path: str) -> HologramStack:
    obj = cfld.read(path)
    if not isinstance(obj, HologramStack):
        raise DataError(f"{path} does not hold a hologram stack")
    return obj


def _loss_weights(args) -> LossWeights:
    return LossWeights(args["alpha"], args["beta"], args["gamma"])


def cmd_solve(args) -> int:
    out = _ensure_out(args)
    stack_path = args.get("stack")
    if not stack_path:
        raise ConfigError("--stack is required")
    stack = _load_stack(stack_path)
    inputs = {os.path.basename(stack_path): sha256_file(stack_path)}
    truth_path = args.get("truth")
    if truth_path:
        inputs[os.path.basename(truth_path)] = sha256_file(truth_path)
    config = {
        "stack": os.path.basename(stack_path),
        "method": args["method"],
        "iters": args["iters"],
        "steps": args["steps"],
        "mode": args["mode"],
        "lr": args["lr"],
        "weights": [args["alpha"], args["beta"], args["gamma"]],
        "seed": args["seed"],
        "no_eval": bool(args["no_eval"]),
    }
    _write_manifest(out, "solve", config, inputs)

    weights = _loss_weights(args)
    result = None
    if args["method"] == "mhpr":
        result = mhpr(stack, iters=args["iters"], weights=weights)
    elif args["method"] == "var" and args["steps"] == 0:
        # zero steps short-circuits to the shared initialization
        pass
    elif args["method"] == "var":
        cfg = SolverConfig(
            max_iters=args["steps"],
            lr=args["lr"],
            weights=weights,
            mode=args["mode"],
            seed=args["seed"],
        )
        result = variational_solve(stack, cfg)
    else:
        raise ConfigError(f"unknown method {args['method']!r}")
    field = result.field if result is not None else default_init(stack)

    cfld.write_field(os.path.join(out, "recon.cfld"), field)
    if result is not None:
        lines = [canonical_json(r.as_dict()) for r in result.loss_trace]
        atomic_write_text(os.path.join(out, "loss_trace.jsonl"), "\n".join(lines) + "\n")
    if truth_path and not args["no_eval"]:
        truth = cfld.read(truth_path)
        if not isinstance(truth, ComplexField):
            raise DataError(f"{truth_path} does not hold a complex field")
        _write_csv(os.path.join(out, "metrics.csv"), METRIC_FIELDS, [_metrics_row(field, truth)])
    print(f"solve[{args['method']}]: wrote recon.cfld")
    return 0


# ---------------------------------------------------------------- train


def _dataset_stacks(dataset_dir: str) -> tuple[list[str], list[HologramStack]]:
    if not os.path.isdir(dataset_dir):
        raise DataError(f"dataset dir {dataset_dir} does not exist")
    names = sorted(p for p in os.listdir(dataset_dir) if p.startswith("stack_") and p.endswith(".cfld"))
    if not names:
        raise DataError(f"no stack_*.cfld files in {dataset_dir}")
    stacks = [_load_stack(os.path.join(dataset_dir, p)) for p in names]
    return names, stacks


def cmd_train(args) -> int:
    out = _ensure_out(args)
    dataset_dir = args.get("dataset")
    if not dataset_dir:
        raise ConfigError("--dataset is required")
    names, stacks = _dataset_stacks(dataset_dir)
    half_windows = tuple(int(v) for v in _parse_floats(args["half_windows"]))
    cfg = SpafConfig(
        m_inputs=stacks[0].m,
        channels=args["channels"],
        blocks=args["blocks"],
        half_windows=half_windows,
        recursion=args["recursion"],
    )
    config = {
        "dataset": os.path.basename(os.path.abspath(dataset_dir)),
        "epochs": args["epochs"],
        "batch_size": args["batch_size"],
        "channels": args["channels"],
        "blocks": args["blocks"],
        "half_windows": list(half_windows),
        "recursion": args["recursion"],
        "lr": args["lr"],
        "weights": [args["alpha"], args["beta"], args["gamma"]],
        "seed": args["seed"],
    }
    inputs = {p: sha256_file(os.path.join(dataset_dir, p)) for p in names}
    _write_manifest(out, "train", config, inputs)
    weights, log = train(
        stacks,
        cfg,
        epochs=args["epochs"],
        batch_size=args["batch_size"],
        seed=args["seed"],
        loss_weights=_loss_weights(args),
        lr=args["lr"],
    )
    save_weights(os.path.join(out, "weights.spwt"), weights, seed=args["seed"])
    atomic_write_text(
        os.path.join(out, "train_log.jsonl"),
        "\n".join(canonical_json(r) for r in log) + "\n",
    )
    finals = [r["total"] for r in log if r["kind"] == "val"]
    print(f"train: {len(stacks)} stacks, val loss {finals[0]:.4f} -> {min(finals):.4f}")
    return 0


# ---------------------------------------------------------------- infer


def cmd_infer(args) -> int:
    out = _ensure_out(args)
    weights_path = args.get("weights")
    if not weights_path:
        raise ConfigError("--weights is required")
    weights, header = load_weights(weights_path)
    cfg = weights.cfg
    inputs = {os.path.basename(weights_path): sha256_file(weights_path)}

    if args.get("stack"):
        pairs = [(os.path.basename(args["stack"]), args["stack"], None)]
    elif args.get("dataset"):
        names, _ = _dataset_stacks(args["dataset"])
        pairs = []
        for name in names:
            truth = os.path.join(args["dataset"], name.replace("stack_", "truth_"))
            pairs.append((name, os.path.join(args["dataset"], name), truth if os.path.exists(truth) else None))
    else:
        raise ConfigError("--stack or --dataset is required")
    for name, path, _ in pairs:
        inputs[name] = sha256_file(path)
    config = {
        "weights": os.path.basename(weights_path),
        "stacks": [name for name, _, _ in pairs],
        "no_eval": bool(args["no_eval"]),
    }
    _write_manifest(out, "infer", config, inputs)

    rows = []
    for i, (name, path, truth_path) in enumerate(pairs):
        stack = _load_stack(path)
        field = network_forward(stack, weights, cfg)
        cfld.write_field(os.path.join(out, f"recon_{i:04d}.cfld"), field)
        if truth_path and not args["no_eval"]:
            truth = cfld.read(truth_path)
            row = {"stack": name}
            row.update(_metrics_row(field, truth))
            rows.append(row)
    if rows:
        _write_csv(os.path.join(out, "metrics.csv"), ["stack"] + METRIC_FIELDS, rows)
    print(f"infer: {len(pairs)} reconstructions written")
    return 0


# ---------------------------------------------------------------- eval


def cmd_eval(args) -> int:
    out = _ensure_out(args)
    recon_path, truth_path = args.get("recon"), args.get("truth")
    if not recon_path or not truth_path:
        raise ConfigError("--recon and --truth are required")
    recon, truth = cfld.read(recon_path), cfld.read(truth_path)
    if not isinstance(recon, ComplexField) or not isinstance(truth, ComplexField):
        raise DataError("eval expects two complex-field files")
    inputs = {
        os.path.basename(recon_path): sha256_file(recon_path),
        os.path.basename(truth_path): sha256_file(truth_path),
    }
    _write_manifest(
        out,
        "eval",
        {"recon": os.path.basename(recon_path), "truth": os.path.basename(truth_path)},
        inputs,
    )
    rep = evaluate(recon, truth)
    atomic_write_text(os.path.join(out, "metrics.json"), canonical_json(rep.as_dict()) + "\n")
    _write_csv(os.path.join(out, "metrics.csv"), METRIC_FIELDS, [_metrics_row(recon, truth)])
    print(f"eval: ecc={rep.ecc:.4f} ssim_amp={rep.ssim_amp:.4f}")
    return 0


# ---------------------------------------------------------------- sweep


def _sweep_point(param: str, value: float, args, base_seed: int):
    """Solve `count` fresh instances at one grid point; returns row dicts."""
    count = args["count"]
    grid = _grid(args)
    cfg = SynthConfig(n=args["n"], seed=0, smoothing_radius=args["smoothing_radius"])
    rows = []
    zs = zs_for_m(2)
    for k in range(count):
        seed = (base_seed, int(round(value * 1000)) & 0xFFFFFFFF, k)
        if param == "M":
            m = int(value)
            zs_i = zs_for_m(m)
            entry = make_dataset(cfg, grid, zs_i, 1, kind=args["kind"], seed=seed)[0]
            obj, stack = entry
        elif param == "dz":
            entry = make_dataset(cfg, grid, zs, 1, kind=args["kind"], seed=seed)[0]
            obj, _ = entry
            shifted = simulate_hologram_stack(obj.field, [z + value for z in zs])
            stack = HologramStack(grid, [(z, p[1]) for z, p in zip(zs, shifted.planes)])
        elif param == "snr":
            entry = make_dataset(cfg, grid, zs, 1, kind=args["kind"], seed=seed)[0]
            obj, clean = entry
            sigma = sigma_for_snr_db(float(np.mean(clean.amplitudes())), value)
            stack = simulate_hologram_stack(obj.field, list(zs), sigma, seed=k + 1)
        elif param == "wavelength":
            test_grid = OpticalGrid(args["n"], args["pitch"], float(value), 1.0)
            entry = make_dataset(cfg, test_grid, zs, 1, kind=args["kind"], seed=seed)[0]
            obj, measured = entry
            # the solver assumes the nominal wavelength
            stack = HologramStack(grid, [(z, p[1]) for z, p in zip(zs, measured.planes)])
        else:
            raise ConfigError(f"unknown sweep param {param!r}")

        if args["method"] == "mhpr":
            field = mhpr(stack, iters=args["iters"], track_loss=False).field
        else:
            scfg = SolverConfig(max_iters=args["steps"], lr=args["lr"], weights=_loss_weights(args))
            field = variational_solve(stack, scfg).field

        if param == "wavelength":
            truth = ComplexField(grid, obj.field.values)
        else:
            truth = obj.field
        row = {"param": param, "value": f"{value:.10g}", "instance": k}
        row.update(_metrics_row(field, truth))
        if param == "dz" and args["refocus"]:
            row_ref = _metrics_row(refocus(field, value), truth)
            row["ecc_refocused"] = row_ref["ecc"]
        rows.append(row)
    return rows


def cmd_sweep(args) -> int:
    out = _ensure_out(args)
    param = args.get("param")
    if param not in ("M", "dz", "snr", "wavelength"):
        raise ConfigError("--param must be one of M, dz, snr, wavelength")
    values = _parse_values(args["values"])
    if not values:
        raise ConfigError("sweep grid is empty")
    config = {
        "param": param,
        "values": values,
        "count": args["count"],
        "method": args["method"],
        "refocus": bool(args["refocus"]),
        "kind": args["kind"],
        "seed": args["seed"],
        "n": args["n"],
        "pitch": args["pitch"],
        "wavelength": args["wavelength"],
    }
    _write_manifest(out, "sweep", config, {})

    with ThreadPoolExecutor(max_workers=max(1, args["threads"])) as pool:
        futures = [pool.submit(_sweep_point, param, v, args, args["seed"]) for v in values]
        all_rows = [row for fut in futures for row in fut.result()]

    fields = ["param", "value", "instance"] + METRIC_FIELDS
    if param == "dz" and args["refocus"]:
        fields.append("ecc_refocused")
    _write_csv(os.path.join(out, "sweep.csv"), fields, all_rows)

    summary = []
    for v in values:
        eccs = [float(r["ecc"]) for r in all_rows if float(r["value"]) == v]
        mean = float(np.mean(eccs))
        se = float(np.std(eccs, ddof=1) / math.sqrt(len(eccs))) if len(eccs) > 1 else 0.0
        summary.append({"value": f"{v:.10g}", "mean_ecc": f"{mean:.10g}", "se_ecc": f"{se:.10g}"})
    _write_csv(os.path.join(out, "summary.csv"), ["value", "mean_ecc", "se_ecc"], summary)

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = [float(s["value"]) for s in summary]
    ys = [float(s["mean_ecc"]) for s in summary]
    es = [float(s["se_ecc"]) for s in summary]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3)
    ax.set_xlabel(param)
    ax.set_ylabel("mean ECC")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(os.path.join(out, "sweep.png"), dpi=110)
    plt.close(fig)
    print(f"sweep[{param}]: {len(all_rows)} rows over {len(values)} grid points")
    return 0


# ---------------------------------------------------------------- parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=None)


DEFAULTS = {
    "gen": {
        "n": 64, "pitch": DEFAULT_PITCH, "wavelength": DEFAULT_WAVELENGTH,
        "count": 8, "zs": "300,375", "kind": "amplitude-phase",
        "noise_sigma": 0.0, "smoothing_radius": 2, "delta": 0.1,
        "z_mode": "fixed", "seed": 0, "threads": 1,
    },
    "simulate": {"object": None, "zs": "300,375", "noise_sigma": 0.0, "seed": 0, "threads": 1},
    "solve": {
        "stack": None, "truth": None, "method": "mhpr", "iters": 100,
        "steps": 2000, "mode": "complex", "lr": 0.002,
        "alpha": DEFAULT_WEIGHTS.alpha, "beta": DEFAULT_WEIGHTS.beta,
        "gamma": DEFAULT_WEIGHTS.gamma, "no_eval": False, "seed": 0, "threads": 1,
    },
    "train": {
        "dataset": None, "epochs": 6, "batch_size": 8, "channels": 32,
        "blocks": 4, "half_windows": "16,12,8,8", "recursion": 2, "lr": 0.002,
        "alpha": DEFAULT_WEIGHTS.alpha, "beta": DEFAULT_WEIGHTS.beta,
        "gamma": DEFAULT_WEIGHTS.gamma, "seed": 0, "threads": 1,
    },
    "infer": {"weights": None, "stack": None, "dataset": None, "no_eval": False, "seed": 0, "threads": 1},
    "eval": {"recon": None, "truth": None, "seed": 0, "threads": 1},
    "sweep": {
        "param": None, "values": "1,2,4", "count": 6, "method": "mhpr",
        "iters": 100, "steps": 500, "lr": 0.002, "refocus": False,
        "kind": "amplitude-phase", "n": 64, "pitch": DEFAULT_PITCH,
        "wavelength": DEFAULT_WAVELENGTH, "smoothing_radius": 2,
        "alpha": DEFAULT_WEIGHTS.alpha, "beta": DEFAULT_WEIGHTS.beta,
        "gamma": DEFAULT_WEIGHTS.gamma, "seed": 0, "threads": 1,
    },
}


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="holo", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    specs: dict[str, list[tuple]] = {
        "gen": [
            ("--n", int), ("--pitch", float), ("--wavelength", float),
            ("--count", int), ("--zs", str), ("--kind", str),
            ("--noise-sigma", float), ("--smoothing-radius", int),
            ("--delta", float), ("--z-mode", str),
        ],
        "simulate": [("--object", str), ("--zs", str), ("--noise-sigma", float)],
        "solve": [
            ("--stack", str), ("--truth", str), ("--method", str),
            ("--iters", int), ("--steps", int), ("--mode", str), ("--lr", float),
            ("--alpha", float), ("--beta", float), ("--gamma", float),
            ("--no-eval", bool),
        ],
        "train": [
            ("--dataset", str), ("--epochs", int), ("--batch-size", int),
            ("--channels", int), ("--blocks", int), ("--half-windows", str),
            ("--recursion", int), ("--lr", float),
            ("--alpha", float), ("--beta", float), ("--gamma", float),
        ],
        "infer": [("--weights", str), ("--stack", str), ("--dataset", str), ("--no-eval", bool)],
        "eval": [("--recon", str), ("--truth", str)],
        "sweep": [
            ("--param", str), ("--values", str), ("--count", int),
            ("--method", str), ("--iters", int), ("--steps", int), ("--lr", float),
            ("--refocus", bool), ("--kind", str), ("--n", int),
            ("--pitch", float), ("--wavelength", float), ("--smoothing-radius", int),
            ("--alpha", float), ("--beta", float), ("--gamma", float),
        ],
    }
    for cmd, flags in specs.items():
        p = sub.add_parser(cmd)
        _add_common(p)
        for flag, typ in flags:
            if typ is bool:
                p.add_argument(flag, action="store_const", const=True, default=None)
            else:
                p.add_argument(flag, type=typ, default=None)
    return top


def _load_config_file(path: str, command: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"config file {path} not found") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path}: bad JSON: {e}") from None
    import jsonschema

    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ConfigError(f"config file {path}: {e.message}") from None
    return data.get(command, {})


def _effective_args(ns: argparse.Namespace) -> dict:
    command = ns.command
    args = dict(DEFAULTS[command])
    args.setdefault("out", None)
    if ns.config:
        section = _load_config_file(ns.config, command)
        unknown = set(section) - set(args)
        if unknown:
            raise ConfigError(f"config keys not valid for {command}: {sorted(unknown)}")
        args.update(section)
    for key, val in vars(ns).items():
        if key in ("command", "config") or val is None:
            continue
        args[key] = val
    return args


HANDLERS = {
    "gen": cmd_gen,
    "simulate": cmd_simulate,
    "solve": cmd_solve,
    "train": cmd_train,
    "infer": cmd_infer,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        args = _effective_args(ns)
        return HANDLERS[ns.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (DataError, ShapeMismatch, FileNotFoundError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    except (NumericError, ArithmeticError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
