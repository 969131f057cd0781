"""Can a window's flow matrix arise from a continuous-time chain?

A flow matrix is *embeddable* when it equals ``expm(G)`` for some
generator matrix ``G``.  Two partial criteria are decidable here: an
acyclic time-expanded digraph always yields an embeddable flow matrix,
and for two vertices the determinant sign settles the question (positive
determinant iff embeddable).  Everything else is reported as unknown.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .core import Dcn, TemporalDigraph
from .errors import ParameterError
from .markov import FlowMatrix

STATUS_EMBEDDABLE = "embeddable"
STATUS_NOT_EMBEDDABLE = "not-embeddable"
STATUS_UNKNOWN = "unknown"

REASON_ACYCLIC = "acyclic-digraph"
REASON_POSITIVE_DET = "positive-det-2x2"
REASON_NEGATIVE_DET = "negative-det-2x2"
REASON_NO_CRITERION = "no-criterion"


@dataclass(frozen=True)
class EmbeddabilityVerdict:
    status: str
    reason: str
    determinant: float | None = None

    def to_json(self) -> dict:
        out = {"status": self.status, "reason": self.reason}
        if self.determinant is not None:
            out["determinant"] = self.determinant
        return out


def is_acyclic(tg: TemporalDigraph) -> bool:
    """True iff the time-expanded digraph has no directed cycle.

    Temporal arcs strictly increase time, so any cycle must thread
    same-time spatial arcs; simultaneous reciprocal contacts are the
    canonical culprits.
    """
    states = tg.states()
    index = {s: i for i, s in enumerate(states)}
    succ: list[list[int]] = [[] for _ in states]
    indeg = [0] * len(states)
    for tail, head in tg.arcs():
        succ[index[tail]].append(index[head])
        indeg[index[head]] += 1
    ready = deque(i for i, d in enumerate(indeg) if d == 0)
    seen = 0
    while ready:
        i = ready.popleft()
        seen += 1
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
    return seen == len(states)


def log_upper_triangular_2x2(p: float) -> np.ndarray:
    """Matrix logarithm of ``[[1-p, p], [0, 1]]`` for ``p`` in ``(0, 1)``.

    The closed form is ``log(1-p) * [[1, -1], [0, 0]]``; it is a valid
    generator up to sign conventions, witnessing embeddability of every
    upper-triangular two-vertex flow matrix.
    """
    if not (isinstance(p, (int, float)) and math.isfinite(p) and 0.0 < p < 1.0):
        raise ParameterError(f"p must lie strictly inside (0, 1), got {p!r}")
    return math.log1p(-p) * np.array([[1.0, -1.0], [0.0, 0.0]])


def check_embeddable(
    dcn: Dcn, flow: FlowMatrix, tg: TemporalDigraph
) -> EmbeddabilityVerdict:
    """Classify the flow matrix of the window whose digraph is ``tg``.

    Order of tests: an acyclic digraph settles it affirmatively; with two
    vertices the determinant sign decides (nonpositive means no); larger
    cyclic instances are left unknown.
    """
    det = float(np.linalg.det(flow.probs)) if dcn.n == 2 else None
    if is_acyclic(tg):
        return EmbeddabilityVerdict(STATUS_EMBEDDABLE, REASON_ACYCLIC, det)
    if dcn.n == 2:
        if det > 0.0:
            return EmbeddabilityVerdict(STATUS_EMBEDDABLE, REASON_POSITIVE_DET, det)
        return EmbeddabilityVerdict(STATUS_NOT_EMBEDDABLE, REASON_NEGATIVE_DET, det)
    return EmbeddabilityVerdict(STATUS_UNKNOWN, REASON_NO_CRITERION, det)
