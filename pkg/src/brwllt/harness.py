"""Experiment orchestration: config ingestion, runners, CSV emission.

A single JSON config describes one experiment; every emitted row carries
the config hash and base seed so it can be reproduced bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
import math
import statistics
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .exact_dist import cf_invert, convolve_step, delta_dist, dist_at
from .gw_brw import (
    OffspringLaw,
    ReplicateSeed,
    evolve_generation,
    initial_state,
    simulate,
    validate_offspring,
)
from .llt import (
    constants,
    fit_correction_coefficients,
    gaussian_identity_check,
    parity_matched,
    rw_expansion,
)
from .martingales import (
    FUNCTIONALS,
    f1_eval,
    freeze,
    functional_value,
    harmonicity_defect,
    readout,
)
from .step_law import StepLaw, WalkClass, classify, law_from_dict, moments

EXPERIMENTS = ("llt-check", "coeff-fit", "identities", "martingale-check", "brw-check")

DEFAULT_THRESHOLDS = {
    "cf_agreement": 1e-9,
    "identity_rel_err": 1e-8,
    "harmonicity_rel": 1e-9,
    "c1_rel_err": 0.01,
    "c2_rel_err": 0.05,
}


@dataclass
class ExperimentConfig:
    experiment: str
    law: StepLaw
    offspring: OffspringLaw | None
    n_values: tuple[int, ...]
    z_set: tuple[tuple[int, ...], ...]
    replicates: int
    base_seed: int
    kappa: float
    z_radius_constant: float
    n_est: int | None
    count_width: int
    output: str | None
    thresholds: dict
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def load_config(doc: dict) -> ExperimentConfig:
    """Validate a config document and build the typed experiment config."""
    experiment = doc["experiment"]
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS}")
    law = law_from_dict(doc["step_law"])
    offspring = None
    if "offspring" in doc:
        offspring = validate_offspring(doc["offspring"])
    if experiment == "brw-check" and offspring is None:
        raise ValueError("brw-check requires an offspring spec")
    kappa = float(doc.get("kappa", 0.15))
    if not 0.0 < kappa < 1.0 / 6.0:
        raise ValueError(f"kappa = {kappa} outside (0, 1/6)")
    n_values = tuple(int(n) for n in doc.get("n_values", ()))
    z_set = tuple(tuple(int(c) for c in z) for z in doc.get("z_set", [[0] * law.d]))
    for z in z_set:
        if len(z) != law.d:
            raise ValueError(f"z = {z} has wrong dimension, expected {law.d}")
    count_width = int(doc.get("count_width", 64))
    if count_width not in (64, 128):
        raise ValueError("count_width must be 64 or 128")
    thresholds = dict(DEFAULT_THRESHOLDS)
    thresholds.update(doc.get("thresholds", {}))
    return ExperimentConfig(
        experiment=experiment,
        law=law,
        offspring=offspring,
        n_values=n_values,
        z_set=z_set,
        replicates=int(doc.get("replicates", 1)),
        base_seed=int(doc.get("base_seed", 0)),
        kappa=kappa,
        z_radius_constant=float(doc.get("z_radius_constant", 1.0)),
        n_est=int(doc["n_est"]) if "n_est" in doc else None,
        count_width=count_width,
        output=doc.get("output"),
        thresholds=thresholds,
        raw=doc,
    )


def load_config_file(path) -> ExperimentConfig:
    with open(path) as fh:
        return load_config(json.load(fh))


def admissible_z(cfg: ExperimentConfig, n: int):
    """The configured z set filtered to ||z|| <= C * n^kappa."""
    cap = cfg.z_radius_constant * n**cfg.kappa
    return [z for z in cfg.z_set if math.sqrt(sum(c * c for c in z)) <= cap]


@dataclass
class RunResult:
    columns: tuple[str, ...]
    rows: list[tuple]
    passed: bool
    notes: list[str] = field(default_factory=list)


def run_llt_check(cfg: ExperimentConfig) -> RunResult:
    """Exact probability vs CF inversion vs second-order prediction."""
    m = moments(cfg.law)
    c = constants(m, classify(cfg.law))
    bipartite = c.walk_class is WalkClass.BIPARTITE
    rows = []
    sup_gamma = {}
    cf_ok = True
    dist = delta_dist(cfg.law)
    probes = sorted(set(cfg.n_values))
    for n in range(1, max(probes) + 1):
        dist = convolve_step(dist, cfg.law)
        if n not in probes:
            continue
        sup = 0.0
        for z in admissible_z(cfg, n):
            exact = dist_at(dist, z)
            cf = cf_invert(cfg.law, n, z)
            pred = rw_expansion(c, m, n, z)
            if bipartite and not parity_matched(n, z):
                gamma = 0.0
            else:
                gamma = n ** (cfg.law.d / 2.0 + 2.0) * (exact - pred)
            sup = max(sup, abs(gamma))
            if abs(exact - cf) > cfg.thresholds["cf_agreement"]:
                cf_ok = False
            rows.append((n, *z, exact, cf, pred, gamma))
        sup_gamma[n] = sup
    for n in probes:
        rows.append((n, *("sup",) * cfg.law.d, "", "", "", sup_gamma[n]))
    decreasing = sup_gamma[probes[-1]] < sup_gamma[probes[0]]
    notes = [
        f"sup|gamma| at n={probes[0]}: {sup_gamma[probes[0]]:.6g}",
        f"sup|gamma| at n={probes[-1]}: {sup_gamma[probes[-1]]:.6g}",
        f"convolution/cf agreement within {cfg.thresholds['cf_agreement']}: {cf_ok}",
    ]
    cols = ("n", *(f"z{s + 1}" for s in range(cfg.law.d)), "exact", "cf_invert", "predicted", "gamma")
    return RunResult(cols, rows, cf_ok and decreasing, notes)


def run_coeff_fit(cfg: ExperimentConfig) -> RunResult:
    """Empirical 1/n, 1/n^2 coefficients plus the Lambda-sign verdict."""
    rows = []
    ok = True
    notes = []
    for z in cfg.z_set:
        fit = fit_correction_coefficients(cfg.law, z, cfg.n_values)
        for n, c1, c2 in zip(fit.n_list, fit.c1_seq, fit.c2_seq):
            rows.append(("fit", *z, n, c1, c2, "", ""))
        err_theorem = abs(fit.c2_hat - fit.c2_theorem)
        err_flipped = abs(fit.c2_hat - fit.c2_flipped)
        verdict = "theorem" if err_theorem <= err_flipped else "flipped"
        rows.append(
            ("verdict", *z, fit.n_list[-1], fit.c1_hat, fit.c2_hat, fit.c2_theorem, verdict)
        )
        c1_err = abs(fit.c1_hat - fit.c1_exact) / max(abs(fit.c1_exact), 1e-30)
        if c1_err > cfg.thresholds["c1_rel_err"]:
            ok = False
        notes.append(
            f"z={z}: c1_hat={fit.c1_hat:.6g} (exact {fit.c1_exact:.6g}), "
            f"c2_hat={fit.c2_hat:.6g}, sign verdict: {verdict}"
        )
    cols = ("kind", *(f"z{s + 1}" for s in range(cfg.law.d)), "n", "c1", "c2", "c2_candidate", "verdict")
    return RunResult(cols, rows, ok, notes)


def run_identities(cfg: ExperimentConfig) -> RunResult:
    """Relative errors of the 13 Gaussian moment identities."""
    m = moments(cfg.law)
    z = cfg.z_set[0]
    rows = []
    ok = True
    for idx in range(1, 14):
        err = gaussian_identity_check(m, idx, z=z if idx <= 4 else None)
        if err > cfg.thresholds["identity_rel_err"]:
            ok = False
        rows.append((idx, err))
    return RunResult(("identity", "relative_error"), rows, ok, [f"all 13 <= {cfg.thresholds['identity_rel_err']}: {ok}"])


def run_martingale_check(cfg: ExperimentConfig) -> RunResult:
    """Exact harmonicity grid, one-step martingale Monte Carlo, trajectories."""
    m = moments(cfg.law)
    z = cfg.z_set[0]
    rng = np.random.Generator(np.random.Philox(key=np.array([cfg.base_seed, 0x6D61727467], dtype=np.uint64)))
    rows = []
    ok = True

    # (a) harmonicity on a randomized grid.
    grid = max(cfg.replicates, 100)
    span = 5 * cfg.law.max_range
    for _ in range(grid):
        x = tuple(int(v) for v in rng.integers(-span, span + 1, size=cfg.law.d))
        n = int(rng.integers(0, 60))
        for fid in FUNCTIONALS:
            defect = harmonicity_defect(fid, cfg.law, m, x, n, z=z)
            val = functional_value(fid, m, x, n, z=z)
            scale = 1.0 + (max(abs(v) for v in val) if isinstance(val, tuple) else abs(val))
            rel = abs(defect) / scale
            if rel > cfg.thresholds["harmonicity_rel"]:
                ok = False
            rows.append(("harmonicity", fid, *x, n, defect, rel))

    # (b) one-step annealed martingale check by Monte Carlo.
    if cfg.offspring is not None:
        base = initial_state(cfg.law.d)
        for _ in range(4):
            base = evolve_generation(
                base, cfg.offspring, cfg.law, ReplicateSeed(cfg.base_seed, 0), cfg.count_width
            )
        parent = readout(base, cfg.offspring.mean, m, z)
        samples = {fid: [] for fid in ("W", "N2z", "N4")}
        reps = max(cfg.replicates, 200)
        for r in range(1, reps + 1):
            child_state = evolve_generation(
                base, cfg.offspring, cfg.law, ReplicateSeed(cfg.base_seed, r), cfg.count_width
            )
            child = readout(child_state, cfg.offspring.mean, m, z)
            samples["W"].append(child.W)
            samples["N2z"].append(child.N2z)
            samples["N4"].append(child.N4)
        for fid, vals in samples.items():
            mean = statistics.fmean(vals)
            se = statistics.stdev(vals) / math.sqrt(len(vals)) if len(vals) > 1 else 0.0
            parent_val = getattr(parent, fid)
            within = abs(mean - parent_val) <= 4.0 * se + 1e-12
            if not within:
                ok = False
            rows.append(("one-step", fid, *(("",) * cfg.law.d), base.n + 1, mean - parent_val, se))

        # (c) readout trajectory for visual convergence.
        n_max = max(cfg.n_values) if cfg.n_values else 30
        state = initial_state(cfg.law.d)
        for _ in range(n_max):
            state = evolve_generation(
                state, cfg.offspring, cfg.law, ReplicateSeed(cfg.base_seed, 10**6), cfg.count_width
            )
            ro = readout(state, cfg.offspring.mean, m, z)
            rows.append(("trajectory", "all", *(("",) * cfg.law.d), ro.n, ro.W, ro.N4))
    cols = ("kind", "functional", *(f"x{s + 1}" for s in range(cfg.law.d)), "n", "value", "aux")
    return RunResult(cols, rows, ok, [f"harmonicity and one-step checks pass: {ok}"])


def run_brw_check(cfg: ExperimentConfig) -> RunResult:
    """Per-replicate residual rows plus median/IQR aggregates across replicates."""
    if cfg.offspring is None:
        raise ValueError("brw-check requires an offspring spec")
    m = moments(cfg.law)
    c = constants(m, classify(cfg.law))
    probes = sorted(set(cfg.n_values))
    n_max = max(probes)
    n_est = cfg.n_est if cfg.n_est is not None else n_max
    schedule = sorted(set(probes) | {n_est})
    rows = []
    per_probe: dict = {(n, z): [] for n in probes for z in cfg.z_set}
    f1_bands: dict = {z: [] for z in cfg.z_set}
    mean = cfg.offspring.mean
    for rep in range(cfg.replicates):
        seed = ReplicateSeed(cfg.base_seed, rep)
        snaps = simulate(cfg.offspring, cfg.law, n_max, seed, schedule, cfg.count_width)
        by_n = {st.n: st for st in snaps}
        for z in cfg.z_set:
            est_z = freeze(readout(by_n[n_est], mean, m, z))
            f1_bands[z].append(f1_eval(est_z, c, m, z))
            for n in probes:
                st = by_n[n]
                observed = mean ** (-n) * st.counts.get(z, 0)
                lead = c.factor * (2.0 * math.pi * n) ** (-cfg.law.d / 2.0) * c.norm
                w_n = st.total / mean**n
                if c.walk_class is WalkClass.BIPARTITE and not parity_matched(n, z):
                    ratio = 0.0
                else:
                    ratio = observed / lead - w_n
                per_probe[(n, z)].append(ratio)
                rows.append((rep, n, *z, observed, lead * w_n, ratio, w_n))
    ok = True
    notes = []
    for z in cfg.z_set:
        meds = {}
        for n in probes:
            vals = [abs(v) for v in per_probe[(n, z)]]
            meds[n] = statistics.median(vals)
            q = statistics.quantiles(per_probe[(n, z)], n=4) if len(vals) >= 4 else [0, 0, 0]
            rows.append(("agg", n, *z, meds[n], q[0], q[2], ""))
        if meds[probes[-1]] >= meds[probes[0]]:
            ok = False
        notes.append(
            f"z={z}: median|ratio| {meds[probes[0]]:.4g} (n={probes[0]}) -> "
            f"{meds[probes[-1]]:.4g} (n={probes[-1]})"
        )
        # first-order band check at the largest probe
        n_last = probes[-1]
        scaled = [n_last * v for v in per_probe[(n_last, z)]]
        med_scaled = statistics.median(scaled)
        band = statistics.quantiles(f1_bands[z], n=4) if len(f1_bands[z]) >= 4 else None
        if band is not None:
            lo, hi = band[0], band[2]
            in_band = lo - 1e-9 <= med_scaled <= hi + 1e-9
            if not in_band:
                ok = False
            notes.append(
                f"z={z}: n*(ratio) median {med_scaled:.4g} vs F1 IQR [{lo:.4g}, {hi:.4g}]"
            )
    cols = ("replicate", "n", *(f"z{s + 1}" for s in range(cfg.law.d)), "observed", "predicted", "ratio", "W_n")
    return RunResult(cols, rows, ok, notes)


RUNNERS = {
    "llt-check": run_llt_check,
    "coeff-fit": run_coeff_fit,
    "identities": run_identities,
    "martingale-check": run_martingale_check,
    "brw-check": run_brw_check,
}


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    return RUNNERS[cfg.experiment](cfg)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(cfg: ExperimentConfig, result: RunResult, path) -> None:
    """Emit rows with a #-prefixed audit header."""
    with open(path, "w") as fh:
        fh.write(f"# config_hash={cfg.config_hash}\n")
        fh.write(f"# tool_version={__version__}\n")
        fh.write(f"# base_seed={cfg.base_seed}\n")
        fh.write(f"# experiment={cfg.experiment}\n")
        fh.write(f"# passed={result.passed}\n")
        fh.write(",".join(result.columns) + "\n")
        for row in result.rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
