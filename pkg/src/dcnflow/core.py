"""Directed contact networks and their time-expanded digraphs.

A directed contact network is a finite set of contacts ``(source, target,
time)`` over vertices ``1..n``.  Every model quantity in this package is
derived from the time-expanded ("temporal") digraph of such a network:
each vertex is split into a fiber of time-stamped copies, consecutive
copies are linked by temporal arcs, and each contact contributes one
spatial arc between same-time copies of its endpoints.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np

from .errors import GridError, ParameterError, TrivialNetworkError, ValidationError

NEG_INF = float("-inf")
POS_INF = float("inf")


class Contact(NamedTuple):
    """One directed contact: ``source`` acts on ``target`` at ``time``."""

    source: int
    target: int
    time: float


#: a state of the time-expanded digraph: (vertex id, time stamp)
State = tuple[int, float]


@dataclass(frozen=True)
class Dcn:
    """An immutable directed contact network on vertices ``1..n``.

    ``contacts`` is kept sorted by ``(time, source, target)`` so that all
    derived computations are deterministic.  Construct through
    :func:`validate_dcn`; the raw constructor performs no checking and
    tolerates an empty contact tuple (needed for window restrictions).
    """

    n: int
    contacts: tuple[Contact, ...]

    @cached_property
    def times(self) -> np.ndarray:
        """Distinct contact times, ascending."""
        return np.unique([c.time for c in self.contacts])

    @cached_property
    def time_array(self) -> np.ndarray:
        """Per-contact times in contact order (nondecreasing)."""
        return np.fromiter(
            (c.time for c in self.contacts), dtype=float, count=len(self.contacts)
        )

    @cached_property
    def incident_times(self) -> dict[int, np.ndarray]:
        """Map vertex id -> distinct times of contacts incident to it."""
        seen: dict[int, set[float]] = {v: set() for v in range(1, self.n + 1)}
        for c in self.contacts:
            seen[c.source].add(c.time)
            seen[c.target].add(c.time)
        return {v: np.array(sorted(ts)) for v, ts in seen.items()}

    @cached_property
    def epsilon_c(self) -> float | None:
        """Half the smallest gap between distinct contact times.

        This is the canonical shift used to move a window boundary off a
        contact time.  ``None`` when fewer than two distinct times exist.
        """
        if len(self.times) < 2:
            return None
        return 0.5 * float(np.min(np.diff(self.times)))

    def __len__(self) -> int:
        return len(self.contacts)

    def contact_set(self) -> frozenset[Contact]:
        return frozenset(self.contacts)


@dataclass(frozen=True)
class TemporalFiber:
    """The ordered time stamps at which one vertex appears in the digraph."""

    vertex: int
    times: tuple[float, ...]


#: an arc of the time-expanded digraph, as a (tail state, head state) pair
Arc = tuple[State, State]


@dataclass(frozen=True)
class TemporalDigraph:
    """Time-expanded digraph of a contact network over ``[lo, hi)``.

    Boundaries are ``-inf``/``+inf`` for the unrestricted digraph.  The
    vertex set is the disjoint union of the fibers; arcs split into
    ``spatial_arcs`` (one per contact, between same-time states) and
    ``temporal_arcs`` (between consecutive states of one fiber).
    """

    n: int
    lo: float
    hi: float
    fibers: tuple[TemporalFiber, ...]
    spatial_arcs: tuple[Arc, ...]
    temporal_arcs: tuple[Arc, ...]

    @property
    def num_vertices(self) -> int:
        return sum(len(f.times) for f in self.fibers)

    @property
    def num_arcs(self) -> int:
        return len(self.spatial_arcs) + len(self.temporal_arcs)

    def states(self) -> list[State]:
        return [(f.vertex, t) for f in self.fibers for t in f.times]

    def arcs(self) -> list[Arc]:
        return list(self.spatial_arcs) + list(self.temporal_arcs)

    def out_degrees(self) -> dict[State, int]:
        deg: dict[State, int] = {s: 0 for s in self.states()}
        for tail, _head in self.arcs():
            deg[tail] += 1
        return deg


@dataclass(frozen=True)
class WindowGrid:
    """Strictly increasing window boundaries ``a_0 < a_1 < ... < a_M``.

    Window ``m`` (1-based, ``m in 1..M``) is the half-open interval
    ``[a_{m-1}, a_m)``.
    """

    boundaries: tuple[float, ...]

    def __post_init__(self):
        b = self.boundaries
        if len(b) < 2:
            raise GridError("a grid needs at least two boundaries")
        if any(not math.isfinite(x) for x in b):
            raise GridError("grid boundaries must be finite")
        if any(b[i] >= b[i + 1] for i in range(len(b) - 1)):
            raise GridError("grid boundaries must be strictly increasing")

    @property
    def num_windows(self) -> int:
        return len(self.boundaries) - 1

    def window(self, m: int) -> tuple[float, float]:
        if not 1 <= m <= self.num_windows:
            raise GridError(f"window index {m} outside 1..{self.num_windows}")
        return self.boundaries[m - 1], self.boundaries[m]

    def window_of(self, time: float) -> int | None:
        """1-based index of the window containing ``time``, else ``None``."""
        b = self.boundaries
        if time < b[0] or time >= b[-1]:
            return None
        # rightmost boundary <= time; windows are half-open on the right
        return int(np.searchsorted(np.asarray(b), time, side="right"))


def validate_dcn(contacts: Iterable, n: int) -> Dcn:
    """Check and canonicalize raw contact triples into a :class:`Dcn`.

    Parameters
    ----------
    contacts : iterable of (source, target, time)
        Raw triples; duplicates collapse, self-loops are dropped with a
        warning.
    n : int
        Number of vertices; every id must lie in ``1..n``.

    Returns
    -------
    Dcn
        Canonical network with contacts sorted by ``(time, source, target)``.

    Raises
    ------
    ValidationError
        For ids outside ``1..n``, nonfinite times, or a bad ``n``.
    TrivialNetworkError
        If no usable contact remains.
    """
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"vertex count must be a positive integer, got {n!r}")
    cleaned: set[Contact] = set()
    dropped_loops = 0
    for raw in contacts:
        s, t, tau = raw
        c = Contact(int(s), int(t), float(tau))
        if not math.isfinite(c.time):
            raise ValidationError(f"contact {c} has a nonfinite time")
        if not (1 <= c.source <= n and 1 <= c.target <= n):
            raise ValidationError(f"contact {c} has a vertex id outside 1..{n}")
        if c.source == c.target:
            dropped_loops += 1
            continue
        cleaned.add(c)
    if dropped_loops:
        warnings.warn(f"dropped {dropped_loops} self-loop contact(s)", stacklevel=2)
    if not cleaned:
        raise TrivialNetworkError("contact network is empty after validation")
    ordered = tuple(sorted(cleaned, key=lambda c: (c.time, c.source, c.target)))
    return Dcn(n=n, contacts=ordered)


def temporal_fiber(dcn: Dcn, vertex: int, lo: float = NEG_INF, hi: float = POS_INF) -> TemporalFiber:
    """Fiber of ``vertex`` over ``[lo, hi)``: the boundaries plus every
    incident contact time inside the interval, ascending."""
    if not 1 <= vertex <= dcn.n:
        raise ValidationError(f"vertex id {vertex} outside 1..{dcn.n}")
    if not lo < hi:
        raise GridError(f"empty fiber interval [{lo}, {hi})")
    inc = dcn.incident_times.get(vertex)
    inner = () if inc is None else tuple(t for t in inc.tolist() if lo <= t < hi)
    times = tuple(sorted({lo, hi, *inner}))
    return TemporalFiber(vertex=vertex, times=times)


def _assemble_digraph(dcn: Dcn, lo: float, hi: float) -> TemporalDigraph:
    fibers = tuple(temporal_fiber(dcn, v, lo, hi) for v in range(1, dcn.n + 1))
    spatial: list[Arc] = [
        ((c.source, c.time), (c.target, c.time)) for c in dcn.contacts
    ]
    temporal: list[Arc] = []
    for f in fibers:
        for t0, t1 in zip(f.times, f.times[1:]):
            temporal.append(((f.vertex, t0), (f.vertex, t1)))
    return TemporalDigraph(
        n=dcn.n,
        lo=lo,
        hi=hi,
        fibers=fibers,
        spatial_arcs=tuple(spatial),
        temporal_arcs=tuple(temporal),
    )


def build_temporal_digraph(dcn: Dcn) -> TemporalDigraph:
    """Unrestricted time-expanded digraph, with ``-inf``/``+inf`` boundary states.

    Counting identities (exact): the digraph has ``sum_v |fiber(v)|``
    vertices, at most ``2 n + 2 |C|`` of them, and exactly
    ``|V| - n + |C|`` arcs.
    """
    return _assemble_digraph(dcn, NEG_INF, POS_INF)


def restrict(dcn: Dcn, lo: float, hi: float) -> Dcn:
    """Sub-network of contacts with time in ``[lo, hi)``.

    The result may be empty; empty restrictions are legal only inside
    windowed pipelines, never as top-level inputs.
    """
    if not lo < hi:
        raise GridError(f"empty restriction interval [{lo}, {hi})")
    kept = tuple(c for c in dcn.contacts if lo <= c.time < hi)
    return Dcn(n=dcn.n, contacts=kept)


def restricted_temporal_digraph(dcn: Dcn, lo: float, hi: float) -> TemporalDigraph:
    """Time-expanded digraph of one window ``[lo, hi)``.

    The boundaries stand in for ``-inf``/``+inf``, so every vertex gains
    entry state ``(v, lo)`` and exit state ``(v, hi)``.  Boundaries must
    avoid contact times; use :func:`sanitize_grid` to arrange that.
    """
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise GridError("window boundaries must be finite")
    times = dcn.times
    for b in (lo, hi):
        if times.size and np.any(times == b):
            raise GridError(f"window boundary {b} collides with a contact time")
    return _assemble_digraph(restrict(dcn, lo, hi), lo, hi)


def sanitize_grid(boundaries: Iterable[float], dcn: Dcn) -> WindowGrid:
    """Shift proposed boundaries off contact times and validate the result.

    Any boundary equal to a contact time moves up by half the minimum gap
    between distinct contact times.  If the shifted sequence is no longer
    strictly increasing, or still collides, the grid is rejected.

    Parameters
    ----------
    boundaries : iterable of float
        Proposed boundaries, in ascending order.
    dcn : Dcn
        Network whose contact times must be avoided.

    Returns
    -------
    WindowGrid
    """
    raw = [float(b) for b in boundaries]
    if len(raw) < 2:
        raise GridError("a grid needs at least two boundaries")
    contact_times = set(dcn.times.tolist())
    shifted = []
    for b in raw:
        if b in contact_times:
            eps = dcn.epsilon_c
            if eps is None:
                raise GridError(
                    f"boundary {b} collides with the only contact time; "
                    "no canonical shift exists"
                )
            b = b + eps
        shifted.append(b)
    if any(x >= y for x, y in zip(shifted, shifted[1:])):
        raise GridError("boundary shift broke strict monotonicity")
    if any(b in contact_times for b in shifted):
        raise GridError("boundary still collides with a contact time after shifting")
    return WindowGrid(boundaries=tuple(shifted))


def uniform_grid(dcn: Dcn, width: float) -> WindowGrid:
    """Equal-width grid covering every contact with half a window of slack.

    The first boundary sits ``width/2`` before the earliest contact and
    windows of exactly ``width`` follow until the latest contact is
    covered by at least ``width/2``.  The result is sanitized, so
    boundaries landing on contact times get shifted.
    """
    if not (math.isfinite(width) and width > 0):
        raise ParameterError(f"window width must be positive and finite, got {width!r}")
    if len(dcn.contacts) == 0:
        raise TrivialNetworkError("cannot build a grid over an empty network")
    t_min = float(dcn.times[0])
    t_max = float(dcn.times[-1])
    a0 = t_min - width / 2
    target = t_max + width / 2
    count = max(1, math.ceil((target - a0) / width - 1e-12))
    bounds = [a0 + i * width for i in range(count + 1)]
    return sanitize_grid(bounds, dcn)


def grid_from_count(dcn: Dcn, num_windows: int) -> WindowGrid:
    """Grid with ``num_windows`` equal windows over the padded contact span."""
    if num_windows < 1:
        raise ParameterError("window count must be at least 1")
    if len(dcn.contacts) == 0:
        raise TrivialNetworkError("cannot build a grid over an empty network")
    t_min = float(dcn.times[0])
    t_max = float(dcn.times[-1])
    span = t_max - t_min
    width = span / num_windows if span > 0 else 1.0
    # pad by half a window on each side, like uniform_grid
    a0 = t_min - width / 2
    a1 = t_max + width / 2
    bounds = np.linspace(a0, a1, num_windows + 1).tolist()
    return sanitize_grid(bounds, dcn)
