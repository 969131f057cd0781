"""Per-window absorbing Markov chains and flow matrices.

Each window of a grid turns the time-expanded digraph into an absorbing
Markov chain: spatial arcs carry unit weight, the temporal arc leaving a
state carries ``max(epsilon, exp(-beta * delay))``, rows are normalized,
and the ``n`` exit states ``(v, window_end)`` absorb.  The chance that
information entering the window at vertex ``v`` leaves it at vertex ``w``
is the absorption probability collected in the window's flow matrix.

The temporal-arc delay is the gap to the next state of the fiber, except
on the arc into the exit state, where it is the gap to the vertex's next
contact after the window (capped at the final grid boundary).  That makes
the chain insensitive to where exactly a boundary falls between contacts,
which is what lets flow matrices of refined grids compose exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse

from .core import Contact, Dcn, State, WindowGrid
from .errors import NumericalError, ParameterError, ValidationError

#: weights below this never matter; exp(x) underflows to 0.0 near x = -745
_LOG_TINY = -745.0


@dataclass(frozen=True)
class ModelParams:
    """Inverse-delay-scale ``beta`` and floor ``epsilon`` for temporal arcs.

    ``beta`` may be negative (favoring temporal arcs over spatial ones);
    ``epsilon`` must lie in ``[0, 1)`` and exists to keep long delays from
    underflowing to an exactly-zero weight.
    """

    beta: float
    epsilon: float

    def __post_init__(self):
        if not math.isfinite(self.beta):
            raise ParameterError(f"beta must be finite, got {self.beta!r}")
        if not (0.0 <= self.epsilon < 1.0):
            raise ParameterError(f"epsilon must lie in [0, 1), got {self.epsilon!r}")


@dataclass(eq=False)
class TransitionMatrix:
    """Row-stochastic transition kernel of one window's absorbing chain.

    States are ordered transient-first: transient states sorted by
    ``(time, vertex)`` -- so the ``n`` entry states ``(v, lo)`` come
    first, sorted by vertex -- followed by the ``n`` absorbing exit
    states ``(v, hi)`` sorted by vertex.
    """

    states: tuple[State, ...]
    matrix: scipy.sparse.csr_matrix = field(repr=False)
    n: int
    n_transient: int
    window_index: int
    lo: float
    hi: float

    @property
    def num_states(self) -> int:
        return len(self.states)

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def absorbing_states(self) -> tuple[State, ...]:
        return self.states[self.n_transient:]

    def emitting_states(self) -> tuple[State, ...]:
        return self.states[: self.n]


@dataclass(eq=False)
class FlowMatrix:
    """Absorption probabilities of one window, indexed by vertex id.

    ``probs[v-1, w-1]`` is the chance that information sitting at vertex
    ``v`` when the window opens sits at vertex ``w`` when it closes.
    """

    window_index: int
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.ndim != 2 or self.probs.shape[0] != self.probs.shape[1]:
            raise ValidationError("a flow matrix must be square")
        self.probs.flags.writeable = False

    @property
    def n(self) -> int:
        return self.probs.shape[0]


def default_beta(dcn: Dcn) -> float:
    """Reciprocal of the mean gap between consecutive distinct contact times."""
    times = dcn.times
    if times.size < 2:
        raise ParameterError(
            "default beta needs at least two distinct contact times"
        )
    mean_gap = float(times[-1] - times[0]) / (times.size - 1)
    return 1.0 / mean_gap


def default_epsilon() -> float:
    """Square root of double-precision machine epsilon (~1.49e-8)."""
    return float(np.sqrt(np.finfo(np.float64).eps))


def _window_contacts(dcn: Dcn, lo: float, hi: float) -> list[Contact]:
    # contacts are sorted by time; binary-search the half-open slice
    times = dcn.time_array
    i = int(np.searchsorted(times, lo, side="left"))
    j = int(np.searchsorted(times, hi, side="left"))
    return list(dcn.contacts[i:j])


def _next_contact_after(dcn: Dcn, vertex: int, after: float, cap: float) -> float:
    """Earliest incident time of ``vertex`` strictly past ``after``, capped."""
    inc = dcn.incident_times[vertex]
    k = int(np.searchsorted(inc, after, side="right"))
    nxt = float(inc[k]) if k < inc.size else math.inf
    return min(nxt, cap)


def transition_matrix(
    dcn: Dcn, grid: WindowGrid, m: int, params: ModelParams
) -> TransitionMatrix:
    """Build the absorbing-chain kernel for window ``m`` of ``grid``.

    Parameters
    ----------
    dcn : Dcn
        The full network; contacts outside the window still matter through
        the next-contact lookahead on exit arcs.
    grid : WindowGrid
        Sanitized boundaries (no boundary equals a contact time).
    m : int
        1-based window index.
    params : ModelParams

    Returns
    -------
    TransitionMatrix
        Sparse row-stochastic kernel with exactly ``n`` absorbing states.
    """
    lo, hi = grid.window(m)
    cap = grid.boundaries[-1]
    contacts = _window_contacts(dcn, lo, hi)
    n = dcn.n

    # fibers over [lo, hi): boundaries plus incident in-window times
    fiber_times: dict[int, set[float]] = {v: {lo, hi} for v in range(1, n + 1)}
    spatial_out: dict[State, list[int]] = {}
    for c in contacts:
        if c.time == lo or c.time == hi:
            raise NumericalError(
                f"window boundary {c.time} coincides with a contact; sanitize the grid"
            )
        fiber_times[c.source].add(c.time)
        fiber_times[c.target].add(c.time)

    transient: list[State] = []
    for v, ts in fiber_times.items():
        for t in ts:
            if t != hi:
                transient.append((v, t))
    transient.sort(key=lambda s: (s[1], s[0]))
    absorbing: list[State] = [(v, hi) for v in range(1, n + 1)]
    states: list[State] = transient + absorbing
    index = {s: i for i, s in enumerate(states)}

    for c in contacts:
        spatial_out.setdefault((c.source, c.time), []).append(index[(c.target, c.time)])

    # successor time within each fiber, for temporal arcs
    fiber_sorted = {v: sorted(ts) for v, ts in fiber_times.items()}

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    eps = params.epsilon
    beta = params.beta

    for v, ts in fiber_sorted.items():
        for pos, t0 in enumerate(ts[:-1]):
            tail = index[(v, t0)]
            t1 = ts[pos + 1]
            head_has_out = (t1 != hi) or bool(spatial_out.get((v, t1)))
            if head_has_out:
                delay = t1 - t0
            else:
                delay = _next_contact_after(dcn, v, hi, cap) - t0
            log_w = -beta * delay
            try:
                w = math.exp(log_w)
            except OverflowError:
                w = math.inf
            w = max(eps, w)
            targets = list(spatial_out.get((v, t0), ()))
            k = len(targets)
            if math.isinf(w):
                # temporal weight dwarfs the unit spatial weights; normalize
                # through the log to stay finite
                r = math.exp(-log_w) if -log_w > _LOG_TINY else 0.0
                denom = 1.0 + k * r
                p_temporal = 1.0 / denom
                p_spatial = r / denom
            else:
                z = k + w
                if z == 0.0:
                    raise NumericalError(
                        f"state ({v}, {t0}) has zero total out-weight; "
                        "a positive epsilon avoids this underflow"
                    )
                p_temporal = w / z
                p_spatial = 1.0 / z
            for tgt in targets:
                rows.append(tail)
                cols.append(tgt)
                vals.append(p_spatial)
            rows.append(tail)
            cols.append(index[(v, t1)])
            vals.append(p_temporal)

    for v, t in absorbing:
        i = index[(v, t)]
        rows.append(i)
        cols.append(i)
        vals.append(1.0)

    size = len(states)
    matrix = scipy.sparse.csr_matrix(
        (vals, (rows, cols)), shape=(size, size), dtype=float
    )
    return TransitionMatrix(
        states=tuple(states),
        matrix=matrix,
        n=n,
        n_transient=len(transient),
        window_index=m,
        lo=lo,
        hi=hi,
    )


def absorption(tm: TransitionMatrix) -> FlowMatrix:
    """Solve the fundamental-matrix system for absorption probabilities.

    With the kernel partitioned into transient block ``Q`` and
    transient-to-absorbing block ``R``, the absorption probabilities are
    the solution ``X`` of ``(I - Q) X = R``.  The returned matrix is the
    ``n x n`` sub-block of ``X`` for the entry states ``(v, lo)``,
    reordered by vertex id.
    """
    t = tm.n_transient
    dense = tm.matrix.toarray()
    q = dense[:t, :t]
    r = dense[:t, t:]
    a = np.eye(t) - q
    try:
        x = scipy.linalg.solve(a, r)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(
            f"singular chain in window {tm.window_index}: {exc}"
        ) from exc
    probs = x[: tm.n]
    sums = probs.sum(axis=1)
    if not np.allclose(sums, 1.0, rtol=0.0, atol=1e-10):
        worst = float(np.max(np.abs(sums - 1.0)))
        raise NumericalError(
            f"flow rows deviate from stochasticity by {worst:.3e} "
            f"in window {tm.window_index}"
        )
    return FlowMatrix(window_index=tm.window_index, probs=probs)


def window_flows(
    dcn: Dcn, grid: WindowGrid, params: ModelParams, jobs: int = 1
) -> list[FlowMatrix]:
    """Flow matrix of every window of ``grid``, in order.

    Windows are independent, so ``jobs > 1`` solves them on a thread
    pool; the result is identical either way.
    """

    def solve(m: int) -> FlowMatrix:
        return absorption(transition_matrix(dcn, grid, m, params))

    indices = range(1, grid.num_windows + 1)
    if jobs <= 1 or grid.num_windows < 2:
        return [solve(m) for m in indices]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(solve, indices))


def compose(flows: Sequence[FlowMatrix]) -> FlowMatrix:
    """Chain consecutive window flows into one flow matrix.

    Windows must be consecutive and in order; the product's rows index
    starting vertices of the first window, columns ending vertices of the
    last.  The composite keeps the first window's index.
    """
    if not flows:
        raise ValidationError("cannot compose an empty flow sequence")
    n = flows[0].n
    probs = np.eye(n)
    prev = None
    for f in flows:
        if f.n != n:
            raise ValidationError("flow matrices disagree on vertex count")
        if prev is not None and f.window_index != prev + 1:
            raise ValidationError(
                f"windows not consecutive: {prev} then {f.window_index}"
            )
        prev = f.window_index
        probs = probs @ f.probs
    return FlowMatrix(window_index=flows[0].window_index, probs=probs)


def optimal_window_count(num_contacts: int, n: int, omega: float) -> int:
    """Window count minimizing the flow-pipeline cost model.

    The per-window solve costs about ``(n + 2 N / M) ** omega`` for a
    matrix-solve exponent ``omega > 2``, and ``M`` windows give total cost
    ``M * n * (n + 2 N / M) ** (omega - 1)`` after accounting for the
    shared absorbing columns.  The continuous minimizer is
    ``2 (omega - 2) N / n``, rounded and clamped to ``1..N``.
    """
    if num_contacts < 1:
        raise ParameterError("contact count must be positive")
    if n < 1:
        raise ParameterError("vertex count must be positive")
    if not omega > 2:
        raise ParameterError(f"cost exponent must exceed 2, got {omega!r}")
    m_star = 2.0 * (omega - 2.0) * num_contacts / n
    return int(min(max(round(m_star), 1), num_contacts))


def reverse_dcn(dcn: Dcn) -> Dcn:
    """Time-reversed network: ``(s, t, tau)`` becomes ``(t, s, -tau)``.

    An involution; flows of the reverse network answer where information
    at a vertex could have come from.
    """
    flipped = [Contact(c.target, c.source, -c.time) for c in dcn.contacts]
    ordered = tuple(sorted(flipped, key=lambda c: (c.time, c.source, c.target)))
    return Dcn(n=dcn.n, contacts=ordered)


def row_distance(flow: FlowMatrix, v: int, w: int, metric: str = "total-variation") -> float:
    """Distance between the outgoing flow distributions of two vertices.

    ``metric`` is ``"total-variation"`` or ``"hellinger"``; both lie in
    ``[0, 1]`` and vanish iff the rows coincide.
    """
    n = flow.n
    for x in (v, w):
        if not 1 <= x <= n:
            raise ValidationError(f"vertex id {x} outside 1..{n}")
    p = flow.probs[v - 1]
    q = flow.probs[w - 1]
    if metric == "total-variation":
        return 0.5 * float(np.abs(p - q).sum())
    if metric == "hellinger":
        return float(np.sqrt(0.5 * ((np.sqrt(p) - np.sqrt(q)) ** 2).sum()))
    raise ParameterError(f"unknown metric {metric!r}")
