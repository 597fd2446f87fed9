"""Command-line entry point.

Subcommands bind config files to runs: compression reports, environment
sanity checks, training, evaluation and baseline comparison tables. Every
output file embeds the sha256 of the canonical config plus the seed, and
the process exits 0 only when the run completed and all outputs were
written; failures produce a machine-readable JSON error on stderr.
"""

import argparse
import csv
import dataclasses
import hashlib
import json
import os
import sys

import numpy as np

from .compress.pipeline import CompressionConfig, run_pipeline
from .compress.distill import DistillConfig
from .compress.profiles import load_catalog
from .env.config import SystemConfig
from .env.mec import Action, MecEnv, TRACE_FIELDS
from .train.trainer import RunConfig, Trainer, baseline_policy, evaluate_policy


def _hash_dict(d):
    return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


def _load_json(path):
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _write_json(path, payload):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _compression_config(raw, seed):
    raw = dict(raw)
    if "distill" in raw:
        raw["distill"] = DistillConfig(**raw["distill"])
    if "hidden" in raw:
        raw["hidden"] = tuple(raw["hidden"])
    cfg = CompressionConfig(**raw)
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    return cfg


def cmd_compress(args):
    cfg = _compression_config(_load_json(args.config), args.seed)
    report, _ = run_pipeline(cfg)
    cfg_dict = dataclasses.asdict(cfg)
    cfg_dict["hidden"] = list(cfg_dict["hidden"])
    report["seed"] = cfg.seed
    report["config_hash"] = _hash_dict(cfg_dict)
    out = args.out or "compress_report.json"
    _write_json(out, report)
    print(json.dumps({
        "toy_task": report["toy_task"],
        "storage_ratio": report["accessibility"]["storage_ratio"],
        "accuracy": report["accuracy"],
        "hallucination": report["hallucination"],
    }, indent=2))
    return 0


def cmd_env_check(args):
    raw = _load_json(args.config)
    if args.seed is not None:
        raw["seed"] = args.seed
    cfg = SystemConfig.from_dict(raw)
    checks = {}

    env_a = MecEnv(cfg, seed=cfg.seed)
    env_b = MecEnv(cfg, seed=cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    obs_a = env_a.reset()
    obs_b = env_b.reset()
    checks["reset_deterministic"] = bool(np.array_equal(obs_a, obs_b))
    checks["observation_dim"] = env_a.state_dim == obs_a.shape[0]

    diags = []
    obs_finite = True
    rewards_positive = True
    for _ in range(min(cfg.T, 50)):
        act = Action(
            alpha=rng.uniform(size=cfg.K),
            power_w=rng.uniform(0.0, cfg.p_max_w, size=cfg.K),
        )
        out_a = env_a.step(act)
        out_b = env_b.step(act)
        diags.append(out_a.diagnostics)
        obs_finite &= bool(np.all(np.isfinite(out_a.observation)))
        rewards_positive &= bool(out_a.reward > 0.0)
        checks.setdefault("step_deterministic", True)
        checks["step_deterministic"] &= bool(
            np.array_equal(out_a.observation, out_b.observation)
            and out_a.reward == out_b.reward
        )
        if out_a.done:
            break
    checks["observations_finite"] = obs_finite
    checks["rewards_positive"] = rewards_positive
    checks["latency_nonnegative"] = bool(
        all(np.all(d["latency"] >= 0.0) for d in diags)
    )
    checks["qos_in_unit_interval"] = bool(
        all(np.all((0 <= d["a_tilde"]) & (d["a_tilde"] <= 1)) for d in diags)
        and all(np.all((0 <= d["h_tilde"]) & (d["h_tilde"] <= 1)) for d in diags)
    )

    payload = {
        "checks": checks,
        "ok": all(checks.values()),
        "seed": cfg.seed,
        "config_hash": _hash_dict(cfg.to_dict()),
    }
    out = args.out or "env_check.json"
    _write_json(out, payload)
    trace_path = os.path.splitext(out)[0] + "_trace.csv"
    with open(trace_path, "w") as fh:
        fh.write("# config_hash=%s seed=%d\n" % (payload["config_hash"], cfg.seed))
        fh.write(",".join(TRACE_FIELDS) + "\n")
        env_a.write_trace(fh, diags)
    print(json.dumps(payload["checks"], indent=2))
    return 0 if payload["ok"] else 1


def _run_config(args):
    raw = _load_json(args.config)
    cfg = RunConfig.from_dict(raw)
    replace = {}
    if args.seed is not None:
        replace["seed"] = args.seed
    if getattr(args, "iterations", None) is not None:
        replace["iterations"] = args.iterations
    if getattr(args, "parallel_envs", None) is not None:
        replace["parallel_envs"] = args.parallel_envs
    if replace:
        cfg = dataclasses.replace(cfg, **replace)
    return cfg


def cmd_train(args):
    cfg = _run_config(args)
    trainer = Trainer(cfg)
    if args.resume:
        trainer.load_checkpoint(args.resume)
    out = args.out or "train_out"
    trainer.train(out_dir=out)
    return 0


def cmd_evaluate(args):
    cfg = _run_config(args)
    if args.baseline:
        policy = baseline_policy(cfg.env, args.baseline)
        label = "always-" + args.baseline
    else:
        if not args.checkpoint:
            raise ValueError("evaluate needs --checkpoint or --baseline")
        trainer = Trainer(cfg)
        trainer.load_checkpoint(args.checkpoint)
        policy = lambda obs: trainer.actor.mean_action(obs[None, :])[0]
        label = cfg.algorithm
    result = evaluate_policy(cfg, policy, episodes=args.episodes)
    result["policy"] = label
    result["seed"] = cfg.seed
    result["config_hash"] = cfg.config_hash()
    out = args.out or "evaluation.json"
    _write_json(out, result)
    print(json.dumps({k: v for k, v in result.items() if k != "per_episode"}, indent=2))
    return 0


COMPARE_COLUMNS = [
    "policy", "K", "seed", "config_hash", "mean_reward", "mean_latency",
    "mean_a_tilde", "mean_h_tilde", "mean_alpha", "mean_energy",
]


def cmd_compare(args):
    cfg = _run_config(args)
    rows = []

    def add_row(policy_name, result):
        row = {"policy": policy_name, "K": cfg.env.K, "seed": cfg.seed,
               "config_hash": cfg.config_hash()}
        row.update({k: result[k] for k in COMPARE_COLUMNS[4:]})
        rows.append(row)

    for algorithm in ("wm-ppo", "ppo"):
        run_cfg = dataclasses.replace(cfg, algorithm=algorithm)
        trainer = Trainer(run_cfg)
        trainer.train(out_dir=None)
        add_row(algorithm, trainer.evaluate(episodes=args.episodes))
    for mode in ("local", "offload"):
        add_row("always-" + mode,
                evaluate_policy(cfg, baseline_policy(cfg.env, mode),
                                episodes=args.episodes))

    out = args.out or "comparison.csv"
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=COMPARE_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow(row)
    for row in rows:
        print("%-14s latency=%.4f acc=%.4f hall=%.4f" % (
            row["policy"], row["mean_latency"], row["mean_a_tilde"],
            row["mean_h_tilde"]))
    return 0


def cmd_profile_catalog(args):
    catalog = load_catalog(args.config)
    payload = {name: dataclasses.asdict(p) for name, p in catalog.items()}
    print(json.dumps(payload, indent=2, sort_keys=True))
    if args.out:
        _write_json(args.out, {
            "catalog": payload,
            "seed": args.seed if args.seed is not None else 0,
            "config_hash": _hash_dict(payload),
        })
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="edgeoff")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int, help="seed override")
        sp.add_argument("--out", help="output file or directory")

    sp = sub.add_parser("compress", help="run the compression pipeline")
    common(sp)
    sp.set_defaults(fn=cmd_compress)

    sp = sub.add_parser("env-check", help="environment sanity suite")
    common(sp)
    sp.set_defaults(fn=cmd_env_check)

    sp = sub.add_parser("train", help="train a policy")
    common(sp)
    sp.add_argument("--iterations", type=int)
    sp.add_argument("--parallel-envs", type=int, dest="parallel_envs")
    sp.add_argument("--resume", help="checkpoint to continue from")
    sp.set_defaults(fn=cmd_train)

    sp = sub.add_parser("evaluate", help="evaluate a checkpoint or baseline")
    common(sp)
    sp.add_argument("--checkpoint")
    sp.add_argument("--baseline", choices=["local", "offload"])
    sp.add_argument("--episodes", type=int, default=20)
    sp.set_defaults(fn=cmd_evaluate)

    sp = sub.add_parser("compare", help="train both algorithms and tabulate against baselines")
    common(sp)
    sp.add_argument("--iterations", type=int)
    sp.add_argument("--parallel-envs", type=int, dest="parallel_envs")
    sp.add_argument("--episodes", type=int, default=20)
    sp.set_defaults(fn=cmd_compare)

    sp = sub.add_parser("profile-catalog", help="print the model-variant catalog")
    common(sp)
    sp.set_defaults(fn=cmd_profile_catalog)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        json.dump(
            {"error": type(exc).__name__, "message": str(exc),
             "subcommand": args.subcommand},
            sys.stderr,
        )
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
