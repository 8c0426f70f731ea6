"""Count-based branching random walk driven by a Galton-Watson offspring law.

A generation is a map site -> exact integer particle count.  One step
splits every site's count over offspring values by exact multinomial,
then splits the resulting total over the displacement atoms of the step
law, again by exact multinomial.  All randomness comes from counter-based
Philox streams keyed by (base seed, replicate, generation, site ordinal),
so the result is independent of processing order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CountOverflow, HasExtinction, NonNormalized, SubcriticalOrCritical
from .step_law import StepLaw

_NORMALIZATION_TOL = 1e-12
# numpy's Generator.binomial takes an int64 trial count; stay clear of it.
_BINOMIAL_CHUNK = 2**62

COUNT_LIMITS = {64: 2**63 - 1, 128: 2**127 - 1}


@dataclass(frozen=True)
class OffspringLaw:
    """Finite offspring distribution with p_0 = 0 and mean > 1.

    ``probs[k-1]`` is P(N = k) for k = 1..K.
    """

    probs: tuple[float, ...]
    mean: float


@dataclass(frozen=True)
class GenerationState:
    """Exact site occupancy of one generation."""

    n: int
    d: int
    counts: dict  # lattice tuple -> int
    total: int


@dataclass(frozen=True)
class ReplicateSeed:
    base_seed: int
    replicate_index: int


def validate_offspring(raw) -> OffspringLaw:
    """Validate an offspring table and return the normalized law.

    ``raw`` is either a mapping {k: P(N = k)} or a sequence of
    probabilities for k = 1..K.

    Raises:
        HasExtinction: positive mass on zero offspring.
        NonNormalized: negative entries, or sum != 1 within 1e-12.
        SubcriticalOrCritical: mean offspring number is <= 1.
    """
    if isinstance(raw, dict):
        ks = [int(k) for k in raw]
        if any(k < 0 for k in ks):
            raise ValueError("offspring counts must be nonnegative")
        p0 = float(raw.get(0, raw.get("0", 0.0)))
        if p0 > 0.0:
            raise HasExtinction(f"P(N=0) = {p0} > 0")
        dense = [0.0] * max(ks)
        for k, p in raw.items():
            if int(k) >= 1:
                dense[int(k) - 1] = float(p)
        probs = dense
    else:
        probs = [float(p) for p in raw]
    if any(p < 0.0 for p in probs):
        raise NonNormalized("offspring probabilities must be nonnegative")
    total = math.fsum(probs)
    if abs(total - 1.0) > _NORMALIZATION_TOL:
        raise NonNormalized(f"offspring probabilities sum to {total!r}")
    probs = [p / total for p in probs]
    mean = math.fsum(k * p for k, p in enumerate(probs, start=1))
    if mean <= 1.0:
        raise SubcriticalOrCritical(f"offspring mean {mean} <= 1")
    return OffspringLaw(probs=tuple(probs), mean=mean)


def _mix64(x: int) -> int:
    """splitmix64 finalizer; a bijective 64-bit mixing function."""
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return x ^ (x >> 31)


def derive_stream(seed: ReplicateSeed, generation: int, ordinal: int) -> np.random.Generator:
    """Philox stream for one site visit, a pure function of its coordinates."""
    k0 = _mix64(seed.base_seed & 0xFFFFFFFFFFFFFFFF)
    k0 = _mix64(k0 ^ _mix64(seed.replicate_index))
    k1 = _mix64(k0 ^ _mix64(generation))
    k2 = _mix64(k1 ^ _mix64(ordinal))
    key = np.array([k1, k2], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def binomial_exact(trials: int, p: float, rng: np.random.Generator) -> int:
    """One draw from Binomial(trials, p) for arbitrarily large trial counts.

    Backed by the generator's exact binomial sampler (inversion/rejection,
    no normal approximation); counts beyond the int64 range are split into
    independent binomial blocks, whose sum has the exact law.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p = {p} outside [0, 1]")
    if trials < 0:
        raise ValueError(f"negative trial count {trials}")
    if p == 0.0 or trials == 0:
        return 0
    if p == 1.0:
        return trials
    out = 0
    remaining = trials
    while remaining > 0:
        block = min(remaining, _BINOMIAL_CHUNK)
        out += int(rng.binomial(block, p))
        remaining -= block
    return out


def multinomial_exact(trials: int, probs, rng: np.random.Generator) -> list[int]:
    """Split ``trials`` over categories by sequential exact binomial draws.

    Categories are consumed in the given order with renormalized tail
    probabilities, which realizes the exact multinomial law.
    """
    counts = []
    remaining = trials
    tail = math.fsum(probs)
    for p in probs[:-1]:
        if remaining == 0 or tail <= 0.0:
            counts.append(0)
            continue
        c = binomial_exact(remaining, min(p / tail, 1.0), rng)
        counts.append(c)
        remaining -= c
        tail -= p
    counts.append(remaining)
    return counts


def evolve_generation(
    state: GenerationState,
    off: OffspringLaw,
    law: StepLaw,
    seed: ReplicateSeed,
    count_width: int = 64,
) -> GenerationState:
    """One branching-and-displacement step.

    Sites are visited in sorted order; each visit draws from its own
    derived stream, so any processing order gives the same result.  The
    new total equals the integer sum of all sampled offspring exactly.
    """
    limit = COUNT_LIMITS[count_width]
    atoms = list(law.atoms())
    atom_points = [a for a, _ in atoms]
    atom_probs = [p for _, p in atoms]
    new_counts: dict = {}
    new_total = 0
    for ordinal, site in enumerate(sorted(state.counts)):
        c = state.counts[site]
        if c == 0:
            continue
        rng = derive_stream(seed, state.n, ordinal)
        per_value = multinomial_exact(c, off.probs, rng)
        offspring = sum(k * ck for k, ck in enumerate(per_value, start=1))
        placed = multinomial_exact(offspring, atom_probs, rng)
        for point, cnt in zip(atom_points, placed):
            if cnt == 0:
                continue
            dest = tuple(site[s] + point[s] for s in range(law.d))
            val = new_counts.get(dest, 0) + cnt
            if val > limit:
                raise CountOverflow(
                    f"count at {dest} exceeds {count_width}-bit limit in generation {state.n + 1}"
                )
            new_counts[dest] = val
        new_total += offspring
    return GenerationState(n=state.n + 1, d=state.d, counts=new_counts, total=new_total)


def initial_state(d: int) -> GenerationState:
    """A single ancestor at the origin."""
    return GenerationState(n=0, d=d, counts={(0,) * d: 1}, total=1)


def simulate(
    off: OffspringLaw,
    law: StepLaw,
    n_max: int,
    seed: ReplicateSeed,
    probe_schedule,
    count_width: int = 64,
) -> list[GenerationState]:
    """Run to generation ``n_max`` and snapshot the scheduled generations."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    probes = set(int(n) for n in probe_schedule)
    state = initial_state(law.d)
    out = []
    if 0 in probes:
        out.append(state)
    for _ in range(n_max):
        state = evolve_generation(state, off, law, seed, count_width=count_width)
        if state.n in probes:
            out.append(state)
    return out


def dump_snapshot_csv(states, path) -> None:
    """Write rows (generation, z_1..z_d, count) with exact integer counts."""
    if not states:
        raise ValueError("no snapshots to dump")
    d = states[0].d
    with open(path, "w") as fh:
        cols = ",".join(f"z{s + 1}" for s in range(d))
        fh.write(f"generation,{cols},count\n")
        for st in states:
            for site in sorted(st.counts):
                zs = ",".join(str(c) for c in site)
                fh.write(f"{st.n},{zs},{st.counts[site]}\n")
