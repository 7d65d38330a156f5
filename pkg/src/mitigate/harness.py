"""Seeded experiment runner producing CSV rows and a JSON summary.

A config is one JSON document.  Every trial draws from its own substream
keyed on ``(seed, purpose, arm, trial, probe)``, so results do not depend on
how many worker threads run them.  Wall time goes into the summary only, which
keeps the CSV byte-identical across reruns.
"""

import copy
import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations
from pathlib import Path

import numpy as np

from . import adversary
from .distributions import (
    AffineModel,
    BoundedUniform,
    LabeledPopulation,
    NoNoise,
    PolynomialModel,
    ScaledRademacher,
    TruncatedGaussian,
    make_shallow_tree,
    make_tau_heavy,
    monomial_exponents,
    random_polynomial,
    uniform_noise_for_proxy,
)
from .errors import ConfigError, InadmissibleAttack
from .fourier import FourierSpectrum, format_mask_set
from .geometry import Box, UnitBall
from .global_mitigator import fourier_heavy_mitigate
from .local_linear import (
    AdvancedLinearConfig,
    BasicLinearConfig,
    advanced_linear_mitigate,
    basic_linear_mitigate,
)
from .local_poly import PolyConfig, poly_mitigate
from .oracle import FunctionOracle, Hypercube, MitigationParams, empirical_tv_discrete
from .robust import MixtureSpec, RoundingConfig, draw_offset, mean_of_medians, median_of_means, randomized_round
from .streams import substream

SCHEMA_VERSION = 1
COLUMNS = (
    "schema_version", "experiment", "arm", "trial", "probe", "seed", "output", "y_star",
    "truth", "error", "baseline", "loss", "success", "queries", "samples", "accepted", "discarded",
)
EXPERIMENTS = (
    "global-fourier", "local-linear-basic", "local-linear-advanced", "local-poly",
    "robust-mean", "security-suite", "rounding-wrap", "poly-lower-bound-demo",
)
LOCAL = ("local-linear-basic", "local-linear-advanced", "local-poly")
SUITE_MITIGATORS = ("global-fourier",) + LOCAL

STREAM_MODEL, STREAM_ATTACK, STREAM_TRIAL, STREAM_OFFSET = 1, 2, 3, 4


# ------------------------------------------------------------------ config


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict
    model: dict = field(default_factory=dict)
    noise: dict = field(default_factory=dict)
    body: dict = field(default_factory=dict)
    attacks: list = field(default_factory=list)
    trials: int = 10
    seed: int = 0
    out: str = None
    probes: list = None
    options: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d):
        d = copy.deepcopy(d)
        known = {"experiment", "params", "model", "noise", "body", "attacks", "trials", "seed", "out", "probes"}
        options = {k: v for k, v in d.items() if k not in known}
        if "experiment" not in d:
            raise ConfigError("config is missing 'experiment'")
        return cls(
            experiment=d["experiment"],
            params=d.get("params", {}),
            model=d.get("model", {}),
            noise=d.get("noise", {}),
            body=d.get("body", {}),
            attacks=d.get("attacks", []),
            trials=int(d.get("trials", 10)),
            seed=int(d.get("seed", 0)),
            out=d.get("out"),
            probes=d.get("probes"),
            options=options,
        )

    def to_dict(self):
        d = {k: copy.deepcopy(getattr(self, k)) for k in
             ("experiment", "params", "model", "noise", "body", "attacks", "trials", "seed", "out", "probes")}
        d.update(copy.deepcopy(self.options))
        return d


def load_config(path):
    with open(path) as fh:
        return json.load(fh)


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(doc, sets):
    """Apply ``a.b.c=value`` overrides to a copy of ``doc``; values parse as JSON when possible."""
    doc = copy.deepcopy(doc)
    for item in sets or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, text = item.split("=", 1)
        parts = key.strip().split(".")
        node = doc
        for p in parts[:-1]:
            if isinstance(node, list):
                node = node[int(p)]
            else:
                node = node.setdefault(p, {})
        if isinstance(node, list):
            node[int(parts[-1])] = _parse_value(text)
        else:
            node[parts[-1]] = _parse_value(text)
    return doc


# ------------------------------------------------------------------ builders


def build_params(d):
    if "n" not in d:
        raise ConfigError("params.n is required")
    allowed = {"n", "s", "tau", "eps0", "eps1", "delta0", "delta1", "epsilon"}
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown params: {sorted(extra)}")
    return MitigationParams(**d)


def build_noise(d):
    kind = d.get("kind", "none")
    if kind == "none":
        return NoNoise()
    if kind == "uniform":
        return BoundedUniform(float(d["a"]))
    if kind == "uniform_proxy":
        return uniform_noise_for_proxy(float(d["sigma"]))
    if kind == "rademacher":
        return ScaledRademacher(float(d["a"]))
    if kind == "truncated_gaussian":
        return TruncatedGaussian(float(d["sigma"]), float(d["cut"]))
    raise ConfigError(f"unknown noise kind {kind!r}")


def _mask(key):
    return int(key, 0) if isinstance(key, str) else int(key)


def build_model(d, n, rng):
    kind = d.get("kind")
    if kind == "fourier":
        return FourierSpectrum(n, {_mask(k): float(v) for k, v in d["coeffs"].items()})
    if kind == "tau_heavy":
        return make_tau_heavy(n, int(d["t"]), float(d["tau"]), rng)
    if kind == "tree":
        return make_shallow_tree(n, int(d["depth"]), rng)
    if kind == "affine":
        w = d.get("w")
        w = rng.normal(0.0, float(d.get("scale", 1.0)) / math.sqrt(n), size=n) if w is None else np.asarray(w, float)
        return AffineModel(w, float(d.get("intercept", 0.0)))
    if kind == "polynomial":
        if "coeffs" in d:
            exps = d.get("exponents") or monomial_exponents(n, int(d["d"])).tolist()
            return PolynomialModel(exps, d["coeffs"])
        return random_polynomial(n, int(d["d"]), rng, float(d.get("scale", 1.0)))
    raise ConfigError(f"unknown model kind {kind!r}")


def build_body(d, n):
    kind = d.get("kind", "ball")
    if kind == "ball":
        return UnitBall(n)
    if kind == "box":
        return Box(n, d.get("half_width"))
    raise ConfigError(f"unknown body kind {kind!r}")


@dataclass
class _Context:
    cfg: ExperimentConfig
    kind: str
    params: MitigationParams
    h: object = None
    domain: object = None
    population: object = None
    arms: list = field(default_factory=list)
    probes: list = field(default_factory=list)
    mitigator_cfg: object = None
    accuracy: float = None
    planted: frozenset = None
    rounding: RoundingConfig = None
    extra: dict = field(default_factory=dict)


def _check_admissible(arm_id, f, bound, what):
    cert = getattr(f, "certificate", None)
    if cert is None or bound is None:
        return
    if cert.value - 3 * cert.stderr > bound:
        raise ConfigError(f"attack {arm_id!r}: {what} {cert.value:.6g} <= {bound:.6g} violated")


def _arm_specs(cfg):
    arms = cfg.attacks or [{"id": "clean", "kind": "none"}]
    ids = [a.get("id", f"arm{i}") for i, a in enumerate(arms)]
    if len(set(ids)) != len(ids):
        raise ConfigError("attack ids must be unique")
    return [dict(a, id=i) for a, i in zip(arms, ids)]


def _resolve_point(value, x_star, n):
    if isinstance(value, str) and value == "x_star":
        return x_star
    v = np.asarray(value, dtype=np.float64)
    if v.shape != (n,):
        raise ConfigError(f"point has shape {v.shape}, expected ({n},)")
    return v


def prepare(cfg):
    """Validate the config and build every fixed object.  No trial runs here."""
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    if cfg.trials < 0:
        raise ConfigError(f"trials >= 0 violated (trials={cfg.trials})")
    kind = cfg.experiment
    if kind == "security-suite":
        kind = cfg.options.get("mitigator", "global-fourier")
        if kind not in SUITE_MITIGATORS:
            raise ConfigError(f"security-suite mitigator must be one of {SUITE_MITIGATORS}, got {kind!r}")
        if len(cfg.attacks) < 2:
            raise ConfigError("security-suite needs at least 2 attack arms")
    params = build_params(cfg.params)
    ctx = _Context(cfg, kind, params)
    model_rng = substream(cfg.seed, STREAM_MODEL)
    n = params.n

    if kind == "robust-mean":
        base = dict(alpha=1 / 3, mu=0.0, core_radius=1.0, outlier=1e6, outlier_sign="symmetric", m=10_000,
                    baseline_batch=2)
        base.update(cfg.options.get("mixture", {}))
        ctx.arms = []
        for spec in _arm_specs(cfg):
            mix = dict(base, **{k: v for k, v in spec.items() if k not in ("id", "kind")})
            if mix["outlier_sign"] not in ("symmetric", "positive"):
                raise ConfigError(f"outlier_sign must be 'symmetric' or 'positive', got {mix['outlier_sign']!r}")
            MixtureSpec(mix["alpha"], mix["mu"], mix["core_radius"], 0.0).check()
            if int(mix["m"]) < 1:
                raise ConfigError("mixture.m >= 1 violated")
            ctx.arms.append((spec["id"], mix))
        return ctx

    if kind == "poly-lower-bound-demo":
        d = int(cfg.model.get("d", 2))
        h0, h1 = adversary.flat_bump_polynomials(n, d)
        ctx.domain = UnitBall(n)
        ctx.mitigator_cfg = PolyConfig(n, d, params.s, params.delta1 or 1.0)
        zero = FunctionOracle(h0.evaluate, n, name="zero")
        ctx.arms = [("h0", (h0, zero)), ("h1", (h1, zero))]
        ctx.probes = [np.zeros(n)]
        return ctx

    if kind == "global-fourier":
        params.check_global()
        ctx.domain = Hypercube(n)
        ctx.h = build_model(cfg.model or {"kind": "tau_heavy", "t": 2, "tau": params.tau}, n, model_rng)
        if not isinstance(ctx.h, FourierSpectrum):
            raise ConfigError("global-fourier needs a Fourier model (fourier, tau_heavy or tree)")
        if ctx.h.sup_norm() > 1 + 1e-9:
            raise ConfigError("sup |h| <= 1 violated by the planted spectrum")
        ctx.planted = ctx.h.heavy(params.tau)
        noise = build_noise(cfg.noise)
        ctx.population = LabeledPopulation(ctx.h, ctx.domain, noise)
        ctx.accuracy = params.eps1
        for i, spec in enumerate(_arm_specs(cfg)):
            f = adversary.attack_from_config(spec, ctx.h, ctx.domain, substream(cfg.seed, STREAM_ATTACK, i))
            _check_admissible(spec["id"], f, params.eps0, "square loss vs h")
            ctx.arms.append((spec["id"], f))
        return ctx

    # local mitigators (plain, wrapped in rounding, or inside the suite)
    base_kind = cfg.options.get("mitigator", "local-linear-advanced") if kind == "rounding-wrap" else kind
    if base_kind not in LOCAL:
        raise ConfigError(f"rounding-wrap mitigator must be one of {LOCAL}, got {base_kind!r}")
    ctx.extra["base"] = base_kind
    ctx.domain = build_body(cfg.body, n)
    default_model = {"kind": "polynomial", "d": 2} if base_kind == "local-poly" else {"kind": "affine"}
    ctx.h = build_model(cfg.model or default_model, n, model_rng)
    noise = build_noise(cfg.noise)
    ctx.population = LabeledPopulation(ctx.h, ctx.domain, noise)
    if not params.delta1 > 0:
        raise ConfigError("delta1 > 0 violated (target cutoff radius)")
    eps = params.epsilon if params.epsilon > 0 else None
    if base_kind == "local-linear-basic":
        ctx.mitigator_cfg = BasicLinearConfig(params.s, params.delta1, eps if eps is not None else 0.01)
        ctx.accuracy = params.delta1
    elif base_kind == "local-linear-advanced":
        s = int(cfg.options.get("samples", 0)) or AdvancedLinearConfig.recommended(n).s
        ctx.mitigator_cfg = AdvancedLinearConfig(s, math.sqrt(noise.proxy), params.delta1, eps or 0.01)
        if cfg.options.get("enforce_noise_bound", False):
            ctx.mitigator_cfg.check_noise(n)
        ctx.accuracy = ctx.mitigator_cfg.accuracy(n)
    else:
        d = int(getattr(ctx.h, "degree", cfg.model.get("d", 2)))
        ctx.mitigator_cfg = PolyConfig(n, max(d, 1), params.s, params.delta1, eps)
        ctx.accuracy = params.delta1

    probes = cfg.probes if cfg.probes is not None else [cfg.options.get("x_star", [0.0] * n)]
    ctx.probes = [_resolve_point(p, None, n) for p in probes]
    for p in ctx.probes:
        if not ctx.domain.contains(p)[0]:
            raise ConfigError("probe x_star must lie in the body")
    if kind == "rounding-wrap":
        ctx.rounding = RoundingConfig(float(cfg.options.get("rounding", {}).get("beta", 10.0)), params.delta1)
        ctx.accuracy = ctx.rounding.accuracy_radius
    for i, spec in enumerate(_arm_specs(cfg)):
        spec = dict(spec)
        for key in ("center", "anchor"):
            if key in spec:
                spec[key] = _resolve_point(spec[key], ctx.probes[0], n)
        if spec.get("kind") == "targeted_ball":
            spec.setdefault("eps", params.epsilon if params.epsilon > 0 else 1.0)
        try:
            f = adversary.attack_from_config(spec, ctx.h, ctx.domain, substream(cfg.seed, STREAM_ATTACK, i))
        except InadmissibleAttack as exc:
            raise ConfigError(f"attack {spec['id']!r}: {exc}") from exc
        if spec.get("kind") == "eps_mass" and eps is not None:
            _check_admissible(spec["id"], f, eps, "corrupted mass")
        ctx.arms.append((spec["id"], f))
    return ctx


# ------------------------------------------------------------------ trials


def _row(ctx, arm_id, trial, probe=""):
    row = dict.fromkeys(COLUMNS, "")
    row.update(schema_version=SCHEMA_VERSION, experiment=ctx.cfg.experiment, arm=arm_id, trial=trial,
               probe=probe, seed=ctx.cfg.seed)
    return row


def _trial_global(ctx, ai, trial):
    arm_id, oracle = ctx.arms[ai]
    f = oracle.fresh()
    out = fourier_heavy_mitigate(f, ctx.population, ctx.params, substream(ctx.cfg.seed, STREAM_TRIAL, ai, trial))
    if out.queries_used != f.query_count:
        raise RuntimeError("query accounting mismatch")
    diff = {S: out.g[S] - ctx.h[S] for S in out.g.support | ctx.h.support}
    loss = math.fsum(v * v for v in diff.values())
    row = _row(ctx, arm_id, trial)
    row.update(output=format_mask_set(out.recovered_set), loss=loss,
               success=int(out.recovered_set == ctx.planted), queries=out.queries_used,
               samples=out.samples_used, accepted=len(out.recovered_set))
    return [row]


def _local_estimate(ctx, kind, f, probe, rng):
    body, mc = ctx.domain, ctx.mitigator_cfg
    if kind == "local-linear-basic":
        est = basic_linear_mitigate(f, body, probe, mc, rng)
        ok = est.samples == 0 and est.queries <= 2 * mc.m
    elif kind == "local-linear-advanced":
        est = advanced_linear_mitigate(f, ctx.population, body, probe, mc, rng)
        ok = est.samples == mc.s and est.queries == 2 * est.accepted_count <= 2 * mc.s
    else:
        est = poly_mitigate(f, body, probe, mc, rng)
        ok = est.samples == 0 and est.queries == (mc.d + 1) * (mc.s - est.discarded)
    if not ok or est.queries != f.query_count:
        raise RuntimeError(f"query/sample accounting mismatch in {kind}")
    return est


def _trial_local(ctx, ai, trial):
    arm_id, oracle = ctx.arms[ai]
    rows = []
    for p, probe in enumerate(ctx.probes):
        f = oracle.fresh()
        est = _local_estimate(ctx, ctx.extra["base"], f, probe, substream(ctx.cfg.seed, STREAM_TRIAL, ai, trial, p))
        truth = float(ctx.h.evaluate(probe[None, :])[0])
        row = _row(ctx, arm_id, trial, p)
        err = abs(est.y_star - truth)
        row.update(output=repr(est.y_star), y_star=est.y_star, truth=truth, error=err,
                   success=int(err <= ctx.accuracy), queries=est.queries, samples=est.samples,
                   accepted=est.accepted_count, discarded=est.discarded)
        rows.append(row)
    return rows


def _trial_rounding(ctx, ai, trial):
    arm_id, oracle = ctx.arms[ai]
    # one offset per trial, shared by every arm: the coupling behind the disagreement bound
    offset = draw_offset(ctx.rounding, substream(ctx.cfg.seed, STREAM_OFFSET, trial))
    rows = []
    for p, probe in enumerate(ctx.probes):
        f = oracle.fresh()
        est = _local_estimate(ctx, ctx.extra["base"], f, probe, substream(ctx.cfg.seed, STREAM_TRIAL, ai, trial, p))
        rounded = randomized_round(est.y_star, ctx.rounding.grid, offset)
        truth = float(ctx.h.evaluate(probe[None, :])[0])
        row = _row(ctx, arm_id, trial, p)
        err = abs(rounded - truth)
        row.update(output=repr(rounded), y_star=rounded, truth=truth, error=err, baseline=est.y_star,
                   success=int(err <= ctx.accuracy), queries=est.queries, samples=est.samples,
                   accepted=est.accepted_count, discarded=est.discarded)
        rows.append(row)
    return rows


def _trial_lower_bound(ctx, ai, trial):
    arm_id, (h, zero) = ctx.arms[ai]
    f = zero.fresh()
    # both arms share a stream: the oracle is the same, only the nominal population differs
    est = poly_mitigate(f, ctx.domain, ctx.probes[0], ctx.mitigator_cfg, substream(ctx.cfg.seed, STREAM_TRIAL, 0, trial))
    truth = float(h.evaluate(ctx.probes[0][None, :])[0])
    row = _row(ctx, arm_id, trial, 0)
    err = abs(est.y_star - truth)
    row.update(output=repr(est.y_star), y_star=est.y_star, truth=truth, error=err,
               success=int(err <= ctx.mitigator_cfg.delta1), queries=est.queries, samples=0,
               accepted=est.accepted_count, discarded=est.discarded)
    return [row]


def _trial_robust(ctx, ai, trial):
    arm_id, mix = ctx.arms[ai]
    rng = substream(ctx.cfg.seed, STREAM_TRIAL, ai, trial)
    m = int(mix["m"])
    core = mix["mu"] + mix["core_radius"] * (2.0 * rng.integers(0, 2, size=m) - 1.0)
    bad = rng.random(m) < mix["alpha"]
    if mix["outlier_sign"] == "symmetric":
        sign = 2.0 * rng.integers(0, 2, size=m) - 1.0
    else:
        sign = np.ones(m)
    values = np.where(bad, mix["mu"] + sign * mix["outlier"], core)
    est = mean_of_medians(values).estimate
    base = median_of_means(values, int(mix["baseline_batch"]))
    err = abs(est - mix["mu"])
    row = _row(ctx, arm_id, trial)
    row.update(output=repr(est), y_star=est, truth=float(mix["mu"]), error=err, baseline=base,
               success=int(err < mix["core_radius"]), samples=m)
    return [row]


def _trial_fn(ctx):
    if ctx.cfg.experiment == "robust-mean":
        return _trial_robust
    if ctx.cfg.experiment == "poly-lower-bound-demo":
        return _trial_lower_bound
    if ctx.cfg.experiment == "rounding-wrap":
        return _trial_rounding
    if ctx.kind == "global-fourier":
        return _trial_global
    return _trial_local


def worker_count():
    env = os.environ.get("MITIGATE_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, cap)


# ------------------------------------------------------------------ summary


def binomial_ci(k, n, z=1.959963984540054):
    """Wilson score interval."""
    if n == 0:
        return (0.0, 1.0)
    p = k / n
    den = 1 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return (max(0.0, mid - half), min(1.0, mid + half))


def _mean_ci(values, z=2.5758293035489004):
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return None
    mean = float(v.mean())
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else float("nan")
    return dict(mean=mean, se=se, ci99=[mean - z * se, mean + z * se])


def summarize(rows, cfg, kind=None):
    """Aggregate statistics; depends only on the rows and the config."""
    kind = kind or cfg.experiment
    if not rows:
        return dict(experiment=cfg.experiment, seed=cfg.seed, trials=cfg.trials, rows=0, empty=True)
    arms = list(dict.fromkeys(r["arm"] for r in rows))
    per_arm = {}
    for a in arms:
        rs = [r for r in rows if r["arm"] == a]
        k = sum(int(r["success"]) for r in rs)
        entry = dict(rows=len(rs), success_rate=k / len(rs), success_ci95=list(binomial_ci(k, len(rs))),
                     failure_rate=1 - k / len(rs))
        if kind == "global-fourier":
            entry["p_recovered_planted"] = entry["success_rate"]
            losses = [r["loss"] for r in rs]
            entry["p_loss_within_eps1"] = sum(x <= cfg.params.get("eps1", 0.1) for x in losses) / len(rs)
        else:
            probes = sorted(set(r["probe"] for r in rs))
            entry["bias"] = {
                str(p): _mean_ci([r["y_star"] - r["truth"] for r in rs if r["probe"] == p]) for p in probes
            }
        if kind == "robust-mean":
            entry["baseline_far_rate"] = sum(abs(r["baseline"] - r["truth"]) >= 1e3 for r in rs) / len(rs)
        per_arm[a] = entry
    out = dict(experiment=cfg.experiment, seed=cfg.seed, trials=cfg.trials, rows=len(rows), empty=False,
               schema_version=SCHEMA_VERSION, arms=per_arm)

    cross = {}
    delta = cfg.params.get("delta1", 0.0)
    for a, b in combinations(arms, 2):
        ra = [r for r in rows if r["arm"] == a]
        rb = [r for r in rows if r["arm"] == b]
        entry = dict(tv=empirical_tv_discrete([r["output"] for r in ra], [r["output"] for r in rb]))
        if kind in LOCAL or kind == "rounding-wrap":
            worst = 0.0
            for p in sorted(set(r["probe"] for r in ra)):
                ya = {r["trial"]: r["y_star"] for r in ra if r["probe"] == p}
                yb = {r["trial"]: r["y_star"] for r in rb if r["probe"] == p}
                common = sorted(ya.keys() & yb.keys())
                if common:
                    worst = max(worst, sum(abs(ya[t] - yb[t]) > delta for t in common) / len(common))
            entry["cutoff_dissimilarity"] = worst
        if kind == "poly-lower-bound-demo":
            entry["identical_outputs"] = [r["output"] for r in ra] == [r["output"] for r in rb]
        cross[f"{a}|{b}"] = entry
    if cross:
        out["cross_arm"] = cross
    return out


# ------------------------------------------------------------------ running


@dataclass
class MitigationReport:
    config: dict
    rows: list
    summary: dict

    def csv_text(self):
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: _fmt(r[k]) for k in COLUMNS})
        return buf.getvalue()

    def write(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.csv_text())
        sidecar = summary_path(path)
        sidecar.write_text(json.dumps(self.summary, indent=2, sort_keys=True, default=_json_default) + "\n")
        return path, sidecar


def summary_path(csv_path):
    p = Path(csv_path)
    return p.with_name(p.stem + ".summary.json")


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialize {type(o)}")


def run_experiment(config, workers=None):
    """Validate, run every (arm, trial), and return the report (written if ``out`` is set)."""
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    cfg = replace(cfg)  # the caller's object is never touched
    start = time.perf_counter()
    ctx = prepare(cfg)
    fn = _trial_fn(ctx)
    tasks = [(ai, t) for ai in range(len(ctx.arms)) for t in range(cfg.trials)]
    workers = worker_count() if workers is None else max(1, int(workers))
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda at: fn(ctx, *at), tasks))
    else:
        chunks = [fn(ctx, *at) for at in tasks]
    rows = [r for chunk in chunks for r in chunk]
    summary = summarize(rows, cfg, ctx.kind)
    summary["wall_time_s"] = time.perf_counter() - start
    if ctx.kind == "global-fourier" and ctx.planted is not None:
        summary["planted"] = format_mask_set(ctx.planted)
    report = MitigationReport(cfg.to_dict(), rows, summary)
    if cfg.out:
        report.write(cfg.out)
    return report


def security_suite(config, workers=None):
    """``run_experiment`` with the experiment forced to ``security-suite``."""
    d = config.to_dict() if isinstance(config, ExperimentConfig) else copy.deepcopy(config)
    d["experiment"] = "security-suite"
    return run_experiment(d, workers)
