"""Command-line entry point: ``hqmm <subcommand> ...``.

Symbols are 1-based in every file the CLI reads or writes.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from hqmm import experiments
from hqmm.convert import hmm_to_hqmm_circuit, hmm_to_hqmm_sqrt
from hqmm.data import load_dataset
from hqmm.givens import factor_unitary
from hqmm.hmm import HmmParams, baum_welch
from hqmm.learn import TrainConfig, train
from hqmm.metrics import da
from hqmm.model import deinterleave

logger = logging.getLogger("hqmm")


class CliError(Exception):
    pass


def _read_config(path) -> dict:
    if path is None:
        return {}
    try:
        cfg = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    if cfg is None:
        return {}
    if not isinstance(cfg, dict):
        raise CliError(f"config {path} must be a mapping")
    return cfg


def _write_json(obj, out):
    text = json.dumps(obj, indent=1) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def cmd_generate(args) -> int:
    cfg = _read_config(args.config)
    spec = experiments.ExperimentSpec(
        generator=args.model,
        m_train=args.m_train if args.m_train is not None else cfg.get("m_train", 10),
        m_val=args.m_val if args.m_val is not None else cfg.get("m_val", 5),
        length=args.length if args.length is not None else cfg.get("length", 500),
        burn_in=args.burn_in if args.burn_in is not None else cfg.get("burn_in", 200),
        seed=args.seed,
    )
    paths = experiments.generate_dataset(spec, args.out)
    for p in paths:
        print(p)
    return 0


def cmd_train(args) -> int:
    data = load_dataset(args.data)
    s = args.s or data.s
    if data.s != s:
        data = load_dataset(args.data, s)
    cfg = _read_config(args.config)
    if args.kind == "hqmm":
        train_cfg = TrainConfig.from_dict(dict(cfg, rng_seed=args.seed))
        val = load_dataset(args.validation, s) if args.validation else None
        model, report = train(data, (args.n, s, args.w), train_cfg, validation=val,
                              checkpoint=args.checkpoint, resume=args.resume)
        summary = {"accepted": report.accepted, "rejected": report.rejected,
                   "train_da": report.train_da, "val_da": report.val_da, "wall_time": report.wall_time}
    else:
        res = baum_welch(data, args.n, s, restarts=cfg.get("restarts", 10), max_iters=cfg.get("max_iters", 500),
                         tol=cfg.get("tol", 1e-6), rng_seed=args.seed)
        model = res.params
        summary = {"train_loglik": res.loglik_trace[-1], "train_da": da(model, data).mean}
    experiments.save_model(model, args.out)
    print(json.dumps(summary))
    return 0


def cmd_evaluate(args) -> int:
    model = experiments.load_model(args.model)
    data = load_dataset(args.data, model.s)
    score = da(model, data)
    _write_json({"da_mean": score.mean, "da_std": score.std, "per_sequence": score.values.tolist()}, args.out)
    return 0


def cmd_convert(args) -> int:
    model = experiments.load_model(args.hmm)
    if not isinstance(model, HmmParams):
        raise CliError(f"{args.hmm} is not an HMM file")
    kraus = (hmm_to_hqmm_circuit if args.method == "circuit" else hmm_to_hqmm_sqrt)(model)
    experiments.save_model(kraus, args.out)
    return 0


def _load_unitary(path) -> np.ndarray:
    doc = json.loads(Path(path).read_text())
    if "data" in doc:
        dim = int(doc["dim"])
        return deinterleave(doc["data"], dim, dim)
    return np.array(doc["re"], float) + 1j * np.array(doc.get("im", np.zeros_like(doc["re"])), float)


def cmd_factor(args) -> int:
    U = _load_unitary(args.unitary)
    rots = factor_unitary(U)
    _write_json({"dim": U.shape[0], "product_order": "U = H[0] @ H[1] @ ...",
                 "rotations": [r.to_dict() for r in rots]}, args.out)
    return 0


def cmd_reproduce(args) -> int:
    overrides = _read_config(args.config)
    out = Path(args.out or "results")
    spec = experiments.table_spec(args.table, args.scale, args.seed, out, **overrides)
    rows = experiments.run_experiment(spec)
    sys.stdout.write(experiments.results_csv(rows))
    return 0 if all(r["status"] == "ok" for r in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hqmm", description="Hidden quantum Markov models: learn, evaluate, convert.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_required=False):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", required=out_required)
        sp.add_argument("--config")

    g = sub.add_parser("generate", help="sample train/validation datasets from a model")
    g.add_argument("--model", required=True, help="builtin name or model JSON path")
    g.add_argument("--m-train", type=int)
    g.add_argument("--m-val", type=int)
    g.add_argument("--length", type=int)
    g.add_argument("--burn-in", type=int)
    common(g, out_required=True)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="learn an HQMM (rotations) or HMM (Baum-Welch)")
    t.add_argument("--data", required=True)
    t.add_argument("--validation")
    t.add_argument("--kind", choices=["hqmm", "hmm"], default="hqmm")
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--s", type=int)
    t.add_argument("--w", type=int, default=1)
    t.add_argument("--checkpoint")
    t.add_argument("--resume")
    common(t, out_required=True)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="DA of a model on a dataset")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    common(e)
    e.set_defaults(func=cmd_evaluate)

    c = sub.add_parser("convert", help="HMM file -> equivalent HQMM file")
    c.add_argument("--hmm", required=True)
    c.add_argument("--method", choices=["circuit", "sqrt"], default="circuit")
    common(c, out_required=True)
    c.set_defaults(func=cmd_convert)

    f = sub.add_parser("factor", help="factor a unitary into two-row rotations")
    f.add_argument("--unitary", required=True)
    common(f)
    f.set_defaults(func=cmd_factor)

    r = sub.add_parser("reproduce", help="run one benchmark table")
    r.add_argument("--table", type=int, choices=sorted(experiments.TABLES), required=True)
    r.add_argument("--scale", choices=sorted(experiments.SCALES), default="desk")
    common(r)
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, ValueError, TypeError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"hqmm {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
