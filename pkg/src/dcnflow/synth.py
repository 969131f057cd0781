"""Seeded synthetic contact networks with planted anomalies.

The background is a Poisson stream of contacts whose endpoint pairs favor
small vertex groups; repeated intra-group traffic is what gives the
rarity filter something to suppress.  Anomalies are short temporally
coherent relay chains injected on top and recorded as ground truth.
Optional noise adds uniformly random contacts, and :func:`degrade` does
the same to an existing network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Contact, Dcn, validate_dcn
from .detection import GroundTruth, ground_truth
from .errors import ParameterError, ValidationError


@dataclass(frozen=True)
class AnomalySpec:
    """One relay chain: contacts ``path[i] -> path[i+1]`` spaced ``gap`` apart."""

    path: tuple[int, ...]
    start: float
    gap: float

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(int(v) for v in self.path))
        if len(self.path) < 2:
            raise ParameterError("an anomaly path needs at least two vertices")
        if any(a == b for a, b in zip(self.path, self.path[1:])):
            raise ParameterError(f"anomaly path {self.path} repeats a consecutive vertex")
        if not self.gap > 0:
            raise ParameterError("anomaly gap must be positive")

    def contacts(self) -> list[Contact]:
        return [
            Contact(self.path[i], self.path[i + 1], self.start + i * self.gap)
            for i in range(len(self.path) - 1)
        ]


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of one synthetic scenario.

    ``group_count = 0`` picks roughly ``sqrt(n)`` groups.  Groups are the
    consecutive chunks of ``1..n``; ``community_bias`` is the probability
    that a background contact stays inside one group.
    """

    n: int
    duration: float
    background_rate: float
    community_bias: float
    anomalies: tuple[AnomalySpec, ...] = ()
    noise_fraction: float = 0.0
    seed: int = 0
    group_count: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError("need at least two vertices")
        if not self.duration > 0:
            raise ParameterError("duration must be positive")
        if not self.background_rate > 0:
            raise ParameterError("background rate must be positive")
        if not 0.0 <= self.community_bias <= 1.0:
            raise ParameterError("community bias must lie in [0, 1]")
        if not 0.0 <= self.noise_fraction < 1.0:
            raise ParameterError("noise fraction must lie in [0, 1)")
        if self.group_count < 0:
            raise ParameterError("group count cannot be negative")
        groups = self.resolved_group_count()
        if self.n < 2 * groups:
            raise ParameterError(
                f"{groups} groups need at least {2 * groups} vertices for "
                "within-group pairs"
            )
        for spec in self.anomalies:
            for v in spec.path:
                if not 1 <= v <= self.n:
                    raise ValidationError(
                        f"anomaly vertex {v} outside 1..{self.n}"
                    )
            end = spec.start + (len(spec.path) - 2) * spec.gap
            if spec.start < 0 or end >= self.duration:
                raise ValidationError(
                    f"anomaly chain {spec.path} does not fit in [0, {self.duration})"
                )

    def resolved_group_count(self) -> int:
        if self.group_count:
            return self.group_count
        return max(1, int(math.isqrt(self.n)))


def _group_layout(n: int, groups: int) -> tuple[np.ndarray, np.ndarray]:
    """Start offset (1-based) and size of each consecutive vertex group."""
    sizes = np.full(groups, n // groups, dtype=np.int64)
    sizes[: n % groups] += 1
    starts = np.concatenate(([1], 1 + np.cumsum(sizes)[:-1]))
    return starts, sizes


def _distinct_pairs(rng, count: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """``count`` uniform ordered pairs with distinct endpoints in ``1..n``."""
    s = rng.integers(1, n + 1, size=count)
    t = rng.integers(1, n, size=count)
    t = t + (t >= s)
    return s, t


def _background(rng, config: SynthConfig) -> list[Contact]:
    count = int(rng.poisson(config.background_rate * config.duration))
    if count == 0:
        return []
    times = rng.uniform(0.0, config.duration, size=count)
    starts, sizes = _group_layout(config.n, config.resolved_group_count())
    intra = rng.random(count) < config.community_bias
    s = np.empty(count, dtype=np.int64)
    t = np.empty(count, dtype=np.int64)

    k_intra = int(intra.sum())
    if k_intra:
        gi = rng.integers(0, len(sizes), size=k_intra)
        sz = sizes[gi]
        s_local = rng.integers(0, sz)
        t_local = rng.integers(0, sz - 1)
        t_local = t_local + (t_local >= s_local)
        s[intra] = starts[gi] + s_local
        t[intra] = starts[gi] + t_local
    k_inter = count - k_intra
    if k_inter:
        s_u, t_u = _distinct_pairs(rng, k_inter, config.n)
        s[~intra] = s_u
        t[~intra] = t_u
    return [Contact(int(a), int(b), float(tt)) for a, b, tt in zip(s, t, times)]


def _collision_shift(times: np.ndarray) -> float:
    distinct = np.unique(times)
    if distinct.size < 2:
        return 0.25
    return 0.125 * float(np.min(np.diff(distinct)))  # quarter of the half-gap shift


def _place_anomalies(
    existing: set[Contact], specs: tuple[AnomalySpec, ...]
) -> list[Contact]:
    """Expand anomaly chains, nudging any contact off an occupied timestamp."""
    taken = {c.time for c in existing}
    placed: list[Contact] = []
    for spec in specs:
        for c in spec.contacts():
            t = c.time
            if t in taken:
                all_times = np.array(sorted(taken | {cc.time for cc in placed}))
                shift = _collision_shift(all_times)
                while t in taken:
                    t += shift
            placed.append(Contact(c.source, c.target, t))
            taken.add(t)
    return placed


def generate(config: SynthConfig) -> tuple[Dcn, GroundTruth]:
    """Draw one scenario: background, anomaly chains, then noise.

    Deterministic in ``config.seed``; the returned ground truth holds
    exactly the injected anomaly contacts (after any timestamp nudges).
    """
    rng = np.random.default_rng(config.seed)
    contacts: set[Contact] = set(_background(rng, config))
    anomaly_contacts = _place_anomalies(contacts, config.anomalies)
    contacts.update(anomaly_contacts)
    if config.noise_fraction > 0.0:
        contacts.update(
            _noise_contacts(
                rng,
                contacts,
                config.n,
                math.ceil(config.noise_fraction * len(contacts)),
                0.0,
                config.duration,
            )
        )
    dcn = validate_dcn(contacts, config.n)
    return dcn, ground_truth(anomaly_contacts, dcn)


def _noise_contacts(
    rng, existing: set[Contact], n: int, count: int, lo: float, hi: float
) -> list[Contact]:
    fresh: list[Contact] = []
    have = set(existing)
    while len(fresh) < count:
        need = count - len(fresh)
        s, t = _distinct_pairs(rng, need, n)
        times = rng.uniform(lo, hi, size=need)
        for a, b, tt in zip(s, t, times):
            c = Contact(int(a), int(b), float(tt))
            if c not in have:
                have.add(c)
                fresh.append(c)
    return fresh


def degrade(dcn: Dcn, fraction: float, seed: int) -> Dcn:
    """Copy of ``dcn`` with ``ceil(fraction * |C|)`` extra random contacts.

    New contacts draw uniform distinct endpoint pairs and uniform times
    over the network's own time span; exact duplicates of existing
    triples are redrawn, so the contact count grows by exactly the
    requested amount.
    """
    if not 0.0 <= fraction < 1.0:
        raise ParameterError(f"degradation fraction must lie in [0, 1), got {fraction!r}")
    if fraction == 0.0:
        return dcn
    rng = np.random.default_rng(seed)
    count = math.ceil(fraction * len(dcn.contacts))
    lo = float(dcn.times[0])
    hi = float(dcn.times[-1])
    if not lo < hi:
        hi = lo + 1.0
    fresh = _noise_contacts(rng, set(dcn.contacts), dcn.n, count, lo, hi)
    merged = tuple(
        sorted(
            set(dcn.contacts) | set(fresh),
            key=lambda c: (c.time, c.source, c.target),
        )
    )
    return Dcn(n=dcn.n, contacts=merged)
