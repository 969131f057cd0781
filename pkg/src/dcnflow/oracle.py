"""Independent checks on the flow solver.

Two oracles recompute absorption probabilities without touching the
fundamental-matrix solve: brute-force Monte Carlo sampling of chain
trajectories, and a dynamic program over a topological order of the
transient states (valid only when they form a DAG, i.e. when no
simultaneous reciprocal contacts exist).  A reachability helper answers
which exits a window entry can touch at all.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import Dcn, State, WindowGrid, restricted_temporal_digraph
from .errors import OracleError, PreconditionError, ValidationError
from .markov import FlowMatrix, TransitionMatrix

#: hard ceiling on steps in a single sampled trajectory
STEP_CAP = 10**6


@dataclass(eq=False)
class MonteCarloResult:
    """Empirical absorption frequencies from sampled trajectories."""

    start: State
    samples: int
    freq: np.ndarray = field(repr=False)

    @property
    def stderr(self) -> np.ndarray:
        """Binomial standard error of each frequency."""
        return np.sqrt(self.freq * (1.0 - self.freq) / self.samples)


def monte_carlo_absorption(
    tm: TransitionMatrix, start: State, samples: int, seed: int
) -> MonteCarloResult:
    """Sample trajectories from ``start`` until absorption.

    Parameters
    ----------
    tm : TransitionMatrix
    start : (vertex, time)
        Any state of the chain; usually an entry state ``(v, lo)``.
    samples : int
        Number of independent trajectories.
    seed : int
        Seed for the generator; results are reproducible.

    Returns
    -------
    MonteCarloResult
        Frequencies over absorbing vertices ``1..n``.

    Raises
    ------
    OracleError
        If a trajectory fails to absorb within ``STEP_CAP`` steps.
    """
    if samples < 1:
        raise ValidationError("need at least one sample")
    try:
        start_idx = tm.states.index(start)
    except ValueError:
        raise ValidationError(f"{start} is not a state of this chain") from None

    t = tm.n_transient
    indptr = tm.matrix.indptr
    indices = tm.matrix.indices
    data = tm.matrix.data
    # per-row cumulative distributions for O(log d) sampling
    row_targets: list[np.ndarray] = []
    row_cum: list[np.ndarray] = []
    for i in range(t):
        lo, hi = indptr[i], indptr[i + 1]
        row_targets.append(indices[lo:hi])
        row_cum.append(np.cumsum(data[lo:hi]))

    rng = np.random.default_rng(seed)
    counts = np.zeros(tm.n, dtype=np.int64)
    for _ in range(samples):
        state = start_idx
        steps = 0
        while state < t:
            u = rng.random() * row_cum[state][-1]
            k = int(np.searchsorted(row_cum[state], u, side="right"))
            k = min(k, len(row_targets[state]) - 1)
            state = int(row_targets[state][k])
            steps += 1
            if steps > STEP_CAP:
                raise OracleError(
                    f"trajectory from {start} exceeded {STEP_CAP} steps "
                    "without absorbing"
                )
        counts[state - t] += 1
    return MonteCarloResult(
        start=start, samples=samples, freq=counts / float(samples)
    )


def _transient_topo_order(tm: TransitionMatrix) -> list[int]:
    """Topological order of the transient states, or raise if cyclic."""
    t = tm.n_transient
    indptr = tm.matrix.indptr
    indices = tm.matrix.indices
    succ: list[list[int]] = [[] for _ in range(t)]
    indeg = [0] * t
    for i in range(t):
        for j in indices[indptr[i]: indptr[i + 1]]:
            if j < t:
                succ[i].append(int(j))
                indeg[int(j)] += 1
    ready = deque(i for i in range(t) if indeg[i] == 0)
    order: list[int] = []
    while ready:
        i = ready.popleft()
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
    if len(order) != t:
        raise PreconditionError(
            "transient states contain a cycle (simultaneous reciprocal "
            "contacts); the topological oracle does not apply"
        )
    return order


def topo_absorption(tm: TransitionMatrix) -> FlowMatrix:
    """Absorption probabilities by dynamic programming over a DAG.

    Processes transient states in reverse topological order, accumulating
    each state's absorption distribution from its successors.  Applies
    only when the transient sub-chain is acyclic; agreement with the
    fundamental-matrix solver is then exact up to rounding.
    """
    order = _transient_topo_order(tm)
    t = tm.n_transient
    n = tm.n
    indptr = tm.matrix.indptr
    indices = tm.matrix.indices
    data = tm.matrix.data
    b = np.zeros((t + n, n))
    for v in range(n):
        b[t + v, v] = 1.0
    for i in reversed(order):
        acc = np.zeros(n)
        for pos in range(indptr[i], indptr[i + 1]):
            acc += data[pos] * b[indices[pos]]
        b[i] = acc
    return FlowMatrix(window_index=tm.window_index, probs=b[:n].copy())


def coherent_reachability(dcn: Dcn, grid: WindowGrid, m: int) -> np.ndarray:
    """Boolean matrix of exits reachable from each entry of window ``m``.

    ``result[v-1, w-1]`` is True iff the restricted time-expanded digraph
    contains a path from ``(v, lo)`` to ``(w, hi)``.  Flow probabilities
    can only be positive where this is; the temporal-arc floor never adds
    cross-vertex support because it only reweights stay-in-place arcs.
    """
    lo, hi = grid.window(m)
    tg = restricted_temporal_digraph(dcn, lo, hi)
    adj: dict[State, list[State]] = {}
    for tail, head in tg.arcs():
        adj.setdefault(tail, []).append(head)
    n = dcn.n
    reach = np.zeros((n, n), dtype=bool)
    for v in range(1, n + 1):
        seen = {(v, lo)}
        frontier = deque(seen)
        while frontier:
            s = frontier.popleft()
            for nxt in adj.get(s, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        for w in range(1, n + 1):
            if (w, hi) in seen:
                reach[v - 1, w - 1] = True
    return reach
