"""Shared fixtures-in-spirit: the worked example, closed forms, fuzzers.

The five-vertex example network and its hand-derived flow matrices are
the backbone of the numeric tests; everything here was computed by hand
from the kernel definition and is frozen as the expected truth.
"""

from __future__ import annotations

import math

import numpy as np

from dcnflow import Dcn, WindowGrid, validate_dcn

# the running example: four contacts on five vertices
EXAMPLE_CONTACTS = ((1, 4, 1.0), (5, 4, 2.0), (2, 5, 3.0), (4, 3, 4.0))

# two simultaneous reciprocal pairs; its window digraphs contain 2-cycles
RECIPROCAL_CONTACTS = ((1, 2, 0.0), (2, 1, 0.0), (1, 2, 1.0), (2, 1, 1.0))


def example_dcn() -> Dcn:
    return validate_dcn(EXAMPLE_CONTACTS, 5)


def reciprocal_dcn() -> Dcn:
    return validate_dcn(RECIPROCAL_CONTACTS, 2)


def full_flow(beta: float) -> np.ndarray:
    """Closed-form flow matrix of the example over the single window [0, 5).

    Derived by eliminating the transient states one at a time; each entry
    is a rational function of e^beta.
    """
    e = math.exp
    return np.array([
        [1 / (e(4 * beta) + 1), 0.0,
         e(5 * beta) / ((e(4 * beta) + 1) * (e(beta) + 1)),
         e(4 * beta) / ((e(4 * beta) + 1) * (e(beta) + 1)), 0.0],
        [0.0, 1 / (e(2 * beta) + 1), 0.0, 0.0, e(2 * beta) / (e(2 * beta) + 1)],
        [0.0, 0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, e(beta) / (e(beta) + 1), 1 / (e(beta) + 1), 0.0],
        [0.0, 0.0, e(2 * beta) / (e(beta) + 1) ** 2,
         e(beta) / (e(beta) + 1) ** 2, 1 / (e(beta) + 1)],
    ])


def window1_flow(beta: float) -> np.ndarray:
    """Closed form for the example's first window [0, 2.5)."""
    e = math.exp
    return np.array([
        [1 / (e(4 * beta) + 1), 0.0, 0.0, e(4 * beta) / (e(4 * beta) + 1), 0.0],
        [0.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, e(beta) / (e(beta) + 1), 1 / (e(beta) + 1)],
    ])


def window2_flow(beta: float) -> np.ndarray:
    """Closed form for the example's second window [2.5, 5)."""
    e = math.exp
    return np.array([
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 1 / (e(2 * beta) + 1), 0.0, 0.0, e(2 * beta) / (e(2 * beta) + 1)],
        [0.0, 0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, e(beta) / (e(beta) + 1), 1 / (e(beta) + 1), 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0],
    ])


def random_dcn(rng: np.random.Generator, max_n: int = 8, max_contacts: int = 60,
               distinct_times: bool = False) -> Dcn:
    """A random valid network; ``distinct_times`` forces acyclic digraphs."""
    n = int(rng.integers(2, max_n + 1))
    count = int(rng.integers(1, max_contacts + 1))
    if not distinct_times:
        count = min(count, n * (n - 1) * 20)  # only so many integer-time triples
    contacts = set()
    while len(contacts) < count:
        s = int(rng.integers(1, n + 1))
        t = int(rng.integers(1, n))
        if t >= s:
            t += 1
        if distinct_times:
            tau = float(rng.uniform(0.0, 100.0))  # continuous, ties have measure zero
        else:
            tau = float(rng.integers(0, 20))
        contacts.add((s, t, tau))
    return validate_dcn(contacts, n)


def random_window(rng: np.random.Generator, dcn: Dcn) -> tuple[float, float]:
    """Bounds of a window guaranteed to avoid all contact times."""
    t0 = float(dcn.times[0])
    t1 = float(dcn.times[-1])
    lo = t0 - float(rng.uniform(0.1, 2.0))
    hi = t1 + float(rng.uniform(0.1, 2.0))
    return lo, hi


def refinement_pair(
    rng: np.random.Generator, dcn: Dcn, max_extra: int = 4
) -> tuple[WindowGrid, WindowGrid]:
    """A coarse one-window grid and a random refinement sharing endpoints."""
    lo, hi = random_window(rng, dcn)
    times = set(dcn.times.tolist())
    inner: set[float] = set()
    for _ in range(int(rng.integers(1, max_extra + 1))):
        b = float(rng.uniform(lo, hi))
        if b not in times and lo < b < hi:
            inner.add(b)
    coarse = WindowGrid((lo, hi))
    fine = WindowGrid(tuple(sorted({lo, hi, *inner})))
    return coarse, fine
