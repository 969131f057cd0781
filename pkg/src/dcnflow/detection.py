"""Flagging rare high-probability flows and scoring against ground truth.

A pair ``(j, k)`` is suspicious in window ``m`` when its flow probability
clears a threshold there while clearing it in less than a ``rarity``
fraction of all windows: likely flows that are also unusual.  Flagged
windows are scored against the windows that truly contain planted
contacts, in two bookkeeping forms: Boolean (per-window hit/miss bits)
and natural (per-window vertex counts).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import Contact, Dcn, WindowGrid
from .errors import ParameterError, ValidationError
from .markov import FlowMatrix

BOOLEAN = "boolean"
NATURAL = "natural"


@dataclass(frozen=True)
class DetectionConfig:
    """Flow-probability threshold and rarity bound for flagging.

    ``threshold`` (the lambda knob of the CLI) is the minimum flow
    probability worth noticing; ``rarity`` (the mu knob) is the largest
    fraction of windows in which a pair may clear the threshold and still
    count as unusual.
    """

    threshold: float
    rarity: float

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ParameterError(
                f"threshold must lie in (0, 1), got {self.threshold!r}"
            )
        if not 0.0 < self.rarity < 1.0:
            raise ParameterError(f"rarity must lie in (0, 1), got {self.rarity!r}")


@dataclass(frozen=True)
class GroundTruth:
    """The planted contacts whose windows a detector should recover."""

    contacts: tuple[Contact, ...]

    def validate_against(self, dcn: Dcn) -> None:
        missing = set(self.contacts) - dcn.contact_set()
        if missing:
            raise ValidationError(
                f"{len(missing)} ground-truth contact(s) absent from the network"
            )


def ground_truth(contacts: Sequence, dcn: Dcn | None = None) -> GroundTruth:
    """Canonicalize raw triples into a :class:`GroundTruth`, optionally
    checking containment in ``dcn``."""
    cleaned = tuple(
        sorted(
            {Contact(int(s), int(t), float(tau)) for s, t, tau in contacts},
            key=lambda c: (c.time, c.source, c.target),
        )
    )
    truth = GroundTruth(contacts=cleaned)
    if dcn is not None:
        truth.validate_against(dcn)
    return truth


@dataclass(eq=False)
class ConfusionTallies:
    """Per-window confusion counts in one bookkeeping form."""

    form: str
    n: int
    tp: np.ndarray = field(repr=False)
    fp: np.ndarray = field(repr=False)
    fn: np.ndarray = field(repr=False)
    tn: np.ndarray = field(repr=False)

    def totals(self) -> dict[str, int]:
        return {
            "tp": int(self.tp.sum()),
            "fp": int(self.fp.sum()),
            "fn": int(self.fn.sum()),
            "tn": int(self.tn.sum()),
        }


def exceedance_counts(flows: Sequence[FlowMatrix], threshold: float) -> np.ndarray:
    """How many windows each pair's flow probability exceeds ``threshold``.

    Strict comparison; the result is an ``n x n`` integer matrix counting
    over all windows, diagonal included (callers exclude it as policy).
    """
    if not flows:
        raise ValidationError("no flow matrices given")
    n = flows[0].n
    counts = np.zeros((n, n), dtype=np.int64)
    for f in flows:
        counts += f.probs > threshold
    return counts


def flagged_indices(
    flows: Sequence[FlowMatrix],
    m: int,
    config: DetectionConfig,
    counts: np.ndarray | None = None,
) -> frozenset[int]:
    """Vertices touched by rare above-threshold flows in window ``m``.

    A pair ``(j, k)``, ``j != k``, is flagged when its probability in
    window ``m`` exceeds the threshold and its exceedance frequency over
    all windows stays below the rarity bound; the window under test is
    included in that frequency.  Returns the union of the endpoints of
    flagged pairs, as 1-based vertex ids.
    """
    if not 1 <= m <= len(flows):
        raise ValidationError(f"window index {m} outside 1..{len(flows)}")
    if counts is None:
        counts = exceedance_counts(flows, config.threshold)
    num_windows = len(flows)
    probs = flows[m - 1].probs
    rare = (counts / num_windows) < config.rarity
    mask = (probs > config.threshold) & rare
    np.fill_diagonal(mask, False)
    js, ks = np.nonzero(mask)
    return frozenset((js + 1).tolist()) | frozenset((ks + 1).tolist())


def truth_indices(truth: GroundTruth, grid: WindowGrid, m: int) -> frozenset[int]:
    """Endpoints of ground-truth contacts falling in window ``m``."""
    out: set[int] = set()
    for c in truth.contacts:
        if grid.window_of(c.time) == m:
            out.add(c.source)
            out.add(c.target)
    return frozenset(out)


def confusion(
    flagged: Sequence[frozenset[int]],
    truth: Sequence[frozenset[int]],
    n: int,
) -> tuple[ConfusionTallies, ConfusionTallies]:
    """Score per-window flag sets against per-window truth sets.

    Returns Boolean tallies (exactly one of tp/fp/fn/tn is 1 per window)
    and natural tallies (vertex counts summing to ``n`` per window).
    """
    if len(flagged) != len(truth):
        raise ValidationError("flagged and truth sequences differ in length")
    m = len(flagged)
    bools = {k: np.zeros(m, dtype=np.int64) for k in ("tp", "fp", "fn", "tn")}
    nats = {k: np.zeros(m, dtype=np.int64) for k in ("tp", "fp", "fn", "tn")}
    for i, (fl, tr) in enumerate(zip(flagged, truth)):
        if fl and (fl & tr):
            bools["tp"][i] = 1
        elif fl:
            bools["fp"][i] = 1
        elif tr:
            bools["fn"][i] = 1
        else:
            bools["tn"][i] = 1
        nats["tp"][i] = len(fl & tr)
        nats["fp"][i] = len(fl - tr)
        nats["fn"][i] = len(tr - fl)
        nats["tn"][i] = n - len(fl | tr)
    return (
        ConfusionTallies(form=BOOLEAN, n=n, **bools),
        ConfusionTallies(form=NATURAL, n=n, **nats),
    )


def rates_and_values(tallies: ConfusionTallies) -> dict[str, float | None]:
    """True/false positive rates and predictive values from summed tallies.

    A metric whose denominator vanishes is reported as ``None``, never
    silently coerced to a number.
    """
    tot = tallies.totals()

    def ratio(num: int, den: int) -> float | None:
        return None if den == 0 else num / den

    return {
        "TPR": ratio(tot["tp"], tot["tp"] + tot["fn"]),
        "FPR": ratio(tot["fp"], tot["fp"] + tot["tn"]),
        "PPV": ratio(tot["tp"], tot["tp"] + tot["fp"]),
        "NPV": ratio(tot["tn"], tot["tn"] + tot["fn"]),
    }


def threshold_sweep(
    flows: Sequence[FlowMatrix],
    truth: GroundTruth,
    grid: WindowGrid,
    thresholds: Sequence[float],
    rarities: Sequence[float],
) -> list[dict]:
    """Metrics in both forms over a grid of (threshold, rarity) settings.

    Exceedance counts are recomputed once per threshold and shared across
    rarity values.  Rows come back as dicts keyed ``lambda``, ``mu``,
    ``form``, ``TPR``, ``FPR``, ``PPV``, ``NPV``.
    """
    num_windows = len(flows)
    truth_sets = [truth_indices(truth, grid, m) for m in range(1, num_windows + 1)]
    n = flows[0].n
    rows: list[dict] = []
    for lam in thresholds:
        counts = exceedance_counts(flows, lam)
        for mu in rarities:
            config = DetectionConfig(threshold=lam, rarity=mu)
            flagged = [
                flagged_indices(flows, m, config, counts)
                for m in range(1, num_windows + 1)
            ]
            for tallies in confusion(flagged, truth_sets, n):
                row = {"lambda": lam, "mu": mu, "form": tallies.form}
                row.update(rates_and_values(tallies))
                rows.append(row)
    return rows


@dataclass(eq=False)
class DetectionReport:
    """Everything a detection run produced, ready for serialization."""

    config: DetectionConfig
    n: int
    flagged: list[frozenset[int]]
    truth: list[frozenset[int]] | None
    boolean_tallies: ConfusionTallies | None
    natural_tallies: ConfusionTallies | None

    def to_json(self) -> dict:
        windows = []
        for i, fl in enumerate(self.flagged):
            entry: dict = {"index": i + 1, "flagged": sorted(fl)}
            if self.truth is not None:
                entry["truth"] = sorted(self.truth[i])
                entry["boolean"] = {
                    k: int(getattr(self.boolean_tallies, k)[i])
                    for k in ("tp", "fp", "fn", "tn")
                }
                entry["natural"] = {
                    k: int(getattr(self.natural_tallies, k)[i])
                    for k in ("tp", "fp", "fn", "tn")
                }
            windows.append(entry)
        out: dict = {
            "config": {
                "lambda": self.config.threshold,
                "mu": self.config.rarity,
            },
            "n": self.n,
            "num_windows": len(self.flagged),
            "windows": windows,
        }
        if self.truth is not None:
            out["totals"] = {
                BOOLEAN: self.boolean_tallies.totals(),
                NATURAL: self.natural_tallies.totals(),
            }
            out["metrics"] = {
                BOOLEAN: rates_and_values(self.boolean_tallies),
                NATURAL: rates_and_values(self.natural_tallies),
            }
        return out


def build_report(
    flows: Sequence[FlowMatrix],
    grid: WindowGrid,
    config: DetectionConfig,
    truth: GroundTruth | None = None,
) -> DetectionReport:
    """Run flagging over every window and, with truth, score it."""
    num_windows = len(flows)
    if grid.num_windows != num_windows:
        raise ValidationError(
            f"grid has {grid.num_windows} windows but {num_windows} flows given"
        )
    n = flows[0].n
    counts = exceedance_counts(flows, config.threshold)
    flagged = [
        flagged_indices(flows, m, config, counts)
        for m in range(1, num_windows + 1)
    ]
    if truth is None:
        return DetectionReport(
            config=config, n=n, flagged=flagged, truth=None,
            boolean_tallies=None, natural_tallies=None,
        )
    truth_sets = [truth_indices(truth, grid, m) for m in range(1, num_windows + 1)]
    bool_t, nat_t = confusion(flagged, truth_sets, n)
    return DetectionReport(
        config=config, n=n, flagged=flagged, truth=truth_sets,
        boolean_tallies=bool_t, natural_tallies=nat_t,
    )
