"""Experiment runner: config parsing, seeded ensembles, CSV/JSON outputs.

Config files are plain ``key = value`` text with comma-separated lists; see
the README for the full key reference.  All outputs are deterministic bytes
given (config, master seed): floats are written with repr() and episodes are
reduced in sorted job order regardless of execution order.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bandit import BatchSchedule, EngineConfig, RegretTrace, run_episode
from .env import BanditInstance, SeedSpec, make_instance
from .mechanism import PrivacyParams, derive_params

VARIANT_SDP_AE = "sdp-ae"
VARIANT_VB = "vb-sdp-ae"
VARIANT_BASELINE = "ae-baseline"
VARIANTS = (VARIANT_SDP_AE, VARIANT_VB, VARIANT_BASELINE)

RESULTS_HEADER = ("variant,epsilon,delta,checkpoint,"
                  "mean_regret,stderr,min,max,clean_violations")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    k: int
    means: tuple[float, ...]
    horizon: int
    variants: tuple[str, ...]
    epsilons: tuple[float, ...]
    deltas: tuple[float, ...]
    seeds: int
    master_seed: int
    checkpoints: tuple[int, ...]
    output: str
    baseline_m: int = 1
    sdp_ae_m: int | None = None  # override for the constant batch size

    def instance(self) -> BanditInstance:
        return make_instance(self.k, list(self.means), self.horizon)


@dataclass(frozen=True)
class ResultRow:
    variant: str
    epsilon: float | None
    delta: float | None
    checkpoint: int
    mean_regret: float
    stderr: float
    min: float
    max: float
    clean_violations: int


@dataclass
class AggregateResult:
    rows: list[ResultRow]
    # (variant, epsilon, delta) -> seed -> checkpointed regret array
    traces: dict = field(default_factory=dict)
    full_traces: dict = field(default_factory=dict)


def _parse_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def parse_config(path: str) -> ExperimentConfig:
    raw: dict[str, tuple[str, int]] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            key, sep, value = text.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', "
                                  f"got {text!r}")
            raw[key.strip()] = (value.strip(), lineno)

    def need(key):
        if key not in raw:
            raise ConfigError(f"{path}: missing required key {key!r}")
        return raw[key][0]

    def geti(key, value):
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{path}:{raw[key][1]}: {key} must be an "
                              f"integer, got {value!r}") from None

    def getf(key, item):
        try:
            return float(item)
        except ValueError:
            raise ConfigError(f"{path}:{raw[key][1]}: {key} entry {item!r} "
                              f"is not a number") from None

    k = geti("k", need("k"))
    means = tuple(getf("means", v) for v in _parse_list(need("means")))
    horizon = geti("horizon", need("horizon"))
    variants = tuple(_parse_list(need("variants")))
    seeds = geti("seeds", need("seeds"))
    master_seed = geti("master_seed", need("master_seed"))
    checkpoints = tuple(geti("checkpoints", v)
                        for v in _parse_list(need("checkpoints")))
    output = need("output")
    epsilons = tuple(getf("epsilons", v)
                     for v in _parse_list(raw.get("epsilons", ("", 0))[0]))
    deltas = tuple(getf("deltas", v)
                   for v in _parse_list(raw.get("deltas", ("", 0))[0]))
    baseline_m = geti("baseline_m", raw["baseline_m"][0]) if "baseline_m" in raw else 1
    sdp_ae_m = geti("sdp_ae_m", raw["sdp_ae_m"][0]) if "sdp_ae_m" in raw else None

    if k < 1:
        raise ConfigError(f"{path}:{raw['k'][1]}: k must be >= 1")
    if len(means) != k:
        raise ConfigError(f"{path}:{raw['means'][1]}: got {len(means)} means "
                          f"for k={k}")
    for mu in means:
        if not 0.0 <= mu <= 1.0:
            raise ConfigError(f"{path}:{raw['means'][1]}: means entry {mu} "
                              f"outside [0, 1]")
    if horizon < 1:
        raise ConfigError(f"{path}:{raw['horizon'][1]}: horizon must be >= 1")
    for v in variants:
        if v not in VARIANTS:
            raise ConfigError(f"{path}:{raw['variants'][1]}: unknown variant "
                              f"{v!r} (expected one of {', '.join(VARIANTS)})")
    if seeds < 1:
        raise ConfigError(f"{path}:{raw['seeds'][1]}: seeds must be >= 1")
    if list(checkpoints) != sorted(checkpoints):
        raise ConfigError(f"{path}:{raw['checkpoints'][1]}: checkpoints must "
                          f"be sorted ascending")
    if not checkpoints:
        raise ConfigError(f"{path}: checkpoints must be nonempty")
    if checkpoints[0] < 1 or checkpoints[-1] > horizon:
        raise ConfigError(f"{path}:{raw['checkpoints'][1]}: checkpoints must "
                          f"lie in [1, horizon]")
    private = [v for v in variants if v != VARIANT_BASELINE]
    if private and (not epsilons or not deltas):
        raise ConfigError(f"{path}: private variants {private} need "
                          f"epsilons and deltas")
    for eps in epsilons:
        if not 0.0 < eps <= 1.0:
            raise ConfigError(f"{path}:{raw['epsilons'][1]}: epsilon {eps} "
                              f"outside (0, 1]")
    for delta in deltas:
        if not 0.0 < delta < 1.0:
            raise ConfigError(f"{path}:{raw['deltas'][1]}: delta {delta} "
                              f"outside (0, 1)")
    return ExperimentConfig(k=k, means=means, horizon=horizon,
                            variants=variants, epsilons=epsilons,
                            deltas=deltas, seeds=seeds,
                            master_seed=master_seed, checkpoints=checkpoints,
                            output=output, baseline_m=baseline_m,
                            sdp_ae_m=sdp_ae_m)


def engine_config(config: ExperimentConfig, variant: str,
                  params: PrivacyParams | None) -> EngineConfig:
    if variant == VARIANT_BASELINE:
        return EngineConfig(schedule=BatchSchedule.constant(config.baseline_m),
                            horizon=config.horizon)
    if params is None:
        raise ValueError(f"variant {variant} needs privacy parameters")
    if variant == VARIANT_SDP_AE:
        if config.sdp_ae_m is not None:
            schedule = BatchSchedule.constant(config.sdp_ae_m)
        else:
            schedule = BatchSchedule.default_constant(params)
    elif variant == VARIANT_VB:
        schedule = BatchSchedule.doubling()
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return EngineConfig(schedule=schedule, horizon=config.horizon,
                        privacy=params)


def _cells(config: ExperimentConfig, variant: str):
    if variant == VARIANT_BASELINE:
        return [(None, None)]
    return [(eps, delta) for eps in config.epsilons for delta in config.deltas]


def _run_job(args):
    config, variant, eps, delta, seed = args
    params = None if eps is None else derive_params(eps, delta)
    instance = config.instance()
    econf = engine_config(config, variant, params)
    trace = run_episode(instance, econf, SeedSpec(config.master_seed, seed))
    checks = np.array([trace.cumulative_regret[c - 1]
                       for c in config.checkpoints])
    full = trace.cumulative_regret.copy()
    return checks, bool(trace.clean_event_violated), full


def run_experiment(config: ExperimentConfig, threads: int = 1,
                   full_trace: bool = False,
                   write: bool = True) -> AggregateResult:
    jobs = []
    keys = []
    for variant in config.variants:
        for eps, delta in _cells(config, variant):
            for seed in range(config.seeds):
                jobs.append((config, variant, eps, delta, seed))
                keys.append((variant, eps, delta, seed))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_run_job, jobs, chunksize=4))
    else:
        outcomes = [_run_job(job) for job in jobs]

    result = AggregateResult(rows=[])
    per_cell: dict = {}
    for (variant, eps, delta, seed), (checks, violated, full) in zip(keys, outcomes):
        cell = per_cell.setdefault((variant, eps, delta),
                                   {"checks": [], "violations": 0})
        cell["checks"].append(checks)
        cell["violations"] += int(violated)
        result.traces[(variant, eps, delta, seed)] = checks
        if full_trace:
            result.full_traces[(variant, eps, delta, seed)] = full

    for variant in config.variants:
        for eps, delta in _cells(config, variant):
            cell = per_cell[(variant, eps, delta)]
            data = np.vstack(cell["checks"])
            n = data.shape[0]
            means = data.mean(axis=0)
            if n > 1:
                stderrs = data.std(axis=0, ddof=1) / math.sqrt(n)
            else:
                stderrs = np.zeros(data.shape[1])
            for j, cp in enumerate(config.checkpoints):
                result.rows.append(ResultRow(
                    variant=variant, epsilon=eps, delta=delta, checkpoint=cp,
                    mean_regret=float(means[j]), stderr=float(stderrs[j]),
                    min=float(data[:, j].min()), max=float(data[:, j].max()),
                    clean_violations=cell["violations"]))
    if write:
        emit_outputs(result, config, full_trace=full_trace)
    return result


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(value)


def emit_outputs(result: AggregateResult, config: ExperimentConfig,
                 full_trace: bool = False) -> None:
    """Write results.csv, per-episode traces, plotdata.csv, and manifest.json."""
    out = config.output
    os.makedirs(out, exist_ok=True)
    os.makedirs(os.path.join(out, "traces"), exist_ok=True)

    with open(os.path.join(out, "results.csv"), "w") as fh:
        fh.write(RESULTS_HEADER + "\n")
        for row in result.rows:
            fh.write(",".join([
                row.variant, _fmt(row.epsilon), _fmt(row.delta),
                str(row.checkpoint), _fmt(row.mean_regret), _fmt(row.stderr),
                _fmt(row.min), _fmt(row.max), str(row.clean_violations),
            ]) + "\n")

    for (variant, eps, delta, seed), checks in sorted(
            result.traces.items(), key=lambda kv: str(kv[0])):
        tag = f"{variant}_{_fmt(eps) or 'none'}_{_fmt(delta) or 'none'}_{seed}"
        path = os.path.join(out, "traces", tag + ".csv")
        with open(path, "w") as fh:
            if full_trace and (variant, eps, delta, seed) in result.full_traces:
                fh.write("user,cumulative_regret\n")
                full = result.full_traces[(variant, eps, delta, seed)]
                for user, value in enumerate(full, 1):
                    fh.write(f"{user},{value!r}\n")
            else:
                fh.write("checkpoint,cumulative_regret\n")
                for cp, value in zip(config.checkpoints, checks):
                    fh.write(f"{cp},{float(value)!r}\n")

    with open(os.path.join(out, "plotdata.csv"), "w") as fh:
        fh.write("variant,epsilon,delta,seed,checkpoint,cumulative_regret\n")
        for (variant, eps, delta, seed), checks in sorted(
                result.traces.items(), key=lambda kv: str(kv[0])):
            for cp, value in zip(config.checkpoints, checks):
                fh.write(f"{variant},{_fmt(eps)},{_fmt(delta)},{seed},"
                         f"{cp},{float(value)!r}\n")

    manifest = {
        "package_version": __version__,
        "numpy_version": np.__version__,
        "master_seed": config.master_seed,
        "config": {
            "k": config.k,
            "means": list(config.means),
            "horizon": config.horizon,
            "variants": list(config.variants),
            "epsilons": list(config.epsilons),
            "deltas": list(config.deltas),
            "seeds": config.seeds,
            "checkpoints": list(config.checkpoints),
            "baseline_m": config.baseline_m,
            "sdp_ae_m": config.sdp_ae_m,
        },
    }
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
