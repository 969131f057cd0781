"""Event-log conversion and every file format the tools read or write.

Entity names are interned to dense 1-based integer ids in first-seen
order, so all parsers that accept names also return the name table.
"""

from __future__ import annotations

import csv
import json
import math
import re
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .core import Contact, Dcn, WindowGrid, validate_dcn
from .detection import GroundTruth, ground_truth
from .errors import (
    GridError,
    IntegrityError,
    ParameterError,
    ParseError,
    PolicyError,
    TrivialNetworkError,
)
from .markov import FlowMatrix, ModelParams
from .synth import AnomalySpec, SynthConfig

DIRECTIONS = ("out", "in", "both", "ignore")

POLICY_ENV_VAR = "DCNFLOW_POLICY"

# flow-matrix entries below this are not persisted
SPARSITY_FLOOR = 1e-15

_INT_RE = re.compile(r"^[+-]?\d+$")


@dataclass(frozen=True)
class EventSummary:
    """One audit record: at ``timestamp``, ``subject_name`` did ``verb`` to ``obj``."""

    timestamp: float
    subject_name: str
    subject_id: str
    verb: str
    obj: str

    def __post_init__(self):
        object.__setattr__(self, "timestamp", float(self.timestamp))
        if not math.isfinite(self.timestamp):
            raise ParameterError(
                f"event timestamp must be finite, got {self.timestamp!r}"
            )
        if not self.verb:
            raise ParameterError("event verb must be nonempty")


class VerbPolicy:
    """Maps event verbs to contact directions.

    Unknown verbs are ignored with a one-time warning, or rejected when
    ``strict`` is set.
    """

    def __init__(self, table: dict[str, str], strict: bool = False):
        for verb, direction in table.items():
            if direction not in DIRECTIONS:
                raise PolicyError(
                    f"verb {verb!r} maps to {direction!r}; "
                    f"expected one of {', '.join(DIRECTIONS)}"
                )
        self.table = dict(table)
        self.strict = strict
        self._warned: set[str] = set()

    def direction_of(self, verb: str) -> str:
        direction = self.table.get(verb)
        if direction is None:
            if self.strict:
                raise PolicyError(f"no direction configured for verb {verb!r}")
            if verb not in self._warned:
                self._warned.add(verb)
                warnings.warn(f"ignoring unmapped verb {verb!r}")
            return "ignore"
        return direction


def default_policy(strict: bool = False) -> VerbPolicy:
    """The policy shipped with the package (see ``data/default_policy.cfg``)."""
    cfg = resources.files(__package__).joinpath("data/default_policy.cfg")
    with cfg.open("r", encoding="utf-8") as handle:
        policy = parse_policy(handle)
    policy.strict = strict
    return policy


def _open_text(source, mode: str = "r"):
    """(handle, needs_close) for a path or an already-open stream."""
    if isinstance(source, (str, Path)):
        return open(source, mode, encoding="utf-8", newline=""), True
    return source, False


def parse_policy(source) -> VerbPolicy:
    """Read ``verb = direction`` lines; ``#`` starts a comment."""
    handle, needs_close = _open_text(source)
    try:
        table: dict[str, str] = {}
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError("expected verb = direction", line=lineno)
            verb, direction = (part.strip() for part in line.split("=", 1))
            if not verb:
                raise ParseError("empty verb", line=lineno)
            if direction.lower() not in DIRECTIONS:
                raise ParseError(
                    f"unknown direction {direction!r} for verb {verb!r}",
                    line=lineno,
                )
            table[verb] = direction.lower()
        return VerbPolicy(table)
    finally:
        if needs_close:
            handle.close()


class _Interner:
    """First-seen name -> dense 1-based id."""

    def __init__(self):
        self.ids: dict[str, int] = {}

    def intern(self, name: str) -> int:
        got = self.ids.get(name)
        if got is None:
            got = len(self.ids) + 1
            self.ids[name] = got
        return got

    def names(self) -> tuple[str, ...]:
        return tuple(self.ids)


def events_to_contacts(
    events: Iterable[EventSummary],
    policy: VerbPolicy | None = None,
    use_pid: bool = False,
) -> tuple[Dcn, tuple[str, ...]]:
    """Apply the verb policy to each event and intern entity names.

    ``use_pid`` keys subjects by ``name:id`` instead of name alone, so
    same-named processes stay distinct.  Returns the network and the
    name table (index ``v - 1`` is the label of vertex ``v``).
    """
    if policy is None:
        policy = default_policy()
    interner = _Interner()
    contacts: list[Contact] = []

    def emit(src_name: str, dst_name: str, time: float):
        contacts.append(
            Contact(interner.intern(src_name), interner.intern(dst_name), time)
        )

    for event in events:
        direction = policy.direction_of(event.verb)
        if direction == "ignore":
            continue
        subject = (
            f"{event.subject_name}:{event.subject_id}" if use_pid else event.subject_name
        )
        if direction in ("out", "both"):
            emit(subject, event.obj, event.timestamp)
        if direction in ("in", "both"):
            emit(event.obj, subject, event.timestamp)
    if not contacts:
        raise TrivialNetworkError("no events mapped to contacts under this policy")
    return validate_dcn(contacts, len(interner.ids)), interner.names()


def _contact_rows(source) -> list[tuple[int, float, str, str]]:
    """Parse ``time,source,target`` lines to (lineno, time, src, dst) rows.

    A first line whose leading field is not numeric is taken as a header.
    """
    handle, needs_close = _open_text(source)
    try:
        rows: list[tuple[int, float, str, str]] = []
        first_data_line = True
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) != 3:
                raise ParseError(
                    f"expected time,source,target but found {len(fields)} fields",
                    line=lineno,
                )
            try:
                time = float(fields[0])
            except ValueError:
                if first_data_line:
                    first_data_line = False
                    continue  # header
                raise ParseError(f"bad time {fields[0]!r}", line=lineno)
            first_data_line = False
            if not math.isfinite(time):
                raise ParseError(f"time must be finite, got {fields[0]!r}", line=lineno)
            if not fields[1] or not fields[2]:
                raise ParseError("empty source or target", line=lineno)
            rows.append((lineno, time, fields[1], fields[2]))
        return rows
    finally:
        if needs_close:
            handle.close()


def _rows_to_contacts(
    rows: Sequence[tuple[int, float, str, str]],
    names: Sequence[str] | None,
) -> tuple[list[Contact], tuple[str, ...] | None]:
    """Map parsed rows to contacts, by literal id or by interned name.

    With no ``names`` table: all-integer endpoint tokens are literal ids,
    anything else switches the whole file to interning.
    """
    if names is not None:
        lookup = {name: i + 1 for i, name in enumerate(names)}
        contacts = []
        for lineno, time, src, dst in rows:
            try:
                contacts.append(Contact(lookup[src], lookup[dst], time))
            except KeyError as exc:
                raise ParseError(f"name {exc.args[0]!r} not in name table", line=lineno)
        return contacts, tuple(names)
    if all(_INT_RE.match(src) and _INT_RE.match(dst) for _, _, src, dst in rows):
        return [Contact(int(s), int(d), t) for _, t, s, d in rows], None
    interner = _Interner()
    contacts = [
        Contact(interner.intern(src), interner.intern(dst), time)
        for _, time, src, dst in rows
    ]
    return contacts, interner.names()


def parse_contacts(source) -> tuple[Dcn, tuple[str, ...] | None]:
    """Read a contact file; returns the network and a name table or None.

    The table is None when the file used literal integer ids (the vertex
    count is then the largest id seen).
    """
    rows = _contact_rows(source)
    if not rows:
        raise TrivialNetworkError("no contact lines found")
    contacts, names = _rows_to_contacts(rows, None)
    dropped = len(contacts) - len(set(contacts))
    if dropped:
        warnings.warn(f"dropped {dropped} duplicate contact(s)")
    n = len(names) if names is not None else max(max(c.source, c.target) for c in contacts)
    return validate_dcn(contacts, n), names


def write_contacts(dcn: Dcn, target, names: Sequence[str] | None = None) -> None:
    """Write ``time,source,target`` lines, using names when given."""
    if names is not None and len(names) < dcn.n:
        raise ParameterError(f"name table has {len(names)} entries for n={dcn.n}")

    def label(v: int) -> str:
        return names[v - 1] if names is not None else str(v)

    handle, needs_close = _open_text(target, "w")
    try:
        handle.write("time,source,target\n")
        for c in dcn.contacts:
            handle.write(f"{c.time!r},{label(c.source)},{label(c.target)}\n")
    finally:
        if needs_close:
            handle.close()


def parse_truth(
    source,
    names: Sequence[str] | None = None,
    dcn: Dcn | None = None,
) -> GroundTruth:
    """Read ground-truth contacts (same format as contact files).

    Supply ``names`` to resolve named endpoints against an existing
    table; ``dcn`` additionally checks that every truth contact occurs
    in the network.
    """
    rows = _contact_rows(source)
    if names is None and not all(
        _INT_RE.match(src) and _INT_RE.match(dst) for _, _, src, dst in rows
    ):
        raise ParseError("truth file uses names but no name table was given")
    contacts, _ = _rows_to_contacts(rows, names)
    return ground_truth(contacts, dcn)


def write_truth(
    truth: GroundTruth, target, names: Sequence[str] | None = None
) -> None:
    """Write ground-truth contacts in the contact-file format."""

    def label(v: int) -> str:
        return names[v - 1] if names is not None else str(v)

    handle, needs_close = _open_text(target, "w")
    try:
        handle.write("time,source,target\n")
        for c in truth.contacts:
            handle.write(f"{c.time!r},{label(c.source)},{label(c.target)}\n")
    finally:
        if needs_close:
            handle.close()


def parse_events(source) -> list[EventSummary]:
    """Read ``timestamp,subject_name,subject_id,verb,object`` CSV rows."""
    handle, needs_close = _open_text(source)
    try:
        events: list[EventSummary] = []
        first_data_line = True
        for lineno, fields in enumerate(csv.reader(handle), start=1):
            if not fields or (len(fields) == 1 and not fields[0].strip()):
                continue
            if len(fields) != 5:
                raise ParseError(
                    f"expected 5 fields, found {len(fields)}", line=lineno
                )
            try:
                timestamp = float(fields[0])
            except ValueError:
                if first_data_line:
                    first_data_line = False
                    continue  # header
                raise ParseError(f"bad timestamp {fields[0]!r}", line=lineno)
            first_data_line = False
            try:
                events.append(
                    EventSummary(
                        timestamp,
                        fields[1].strip(),
                        fields[2].strip(),
                        fields[3].strip(),
                        fields[4].strip(),
                    )
                )
            except ParameterError as exc:
                raise ParseError(str(exc), line=lineno)
        return events
    finally:
        if needs_close:
            handle.close()


def _window_filename(m: int, num_windows: int) -> str:
    width = max(4, len(str(num_windows)))
    return f"window_{m:0{width}d}.csv"


def write_flows(
    flows: Sequence[FlowMatrix],
    grid: WindowGrid,
    params: ModelParams,
    directory,
    names: Sequence[str] | None = None,
) -> None:
    """Persist per-window flow matrices plus a manifest.json.

    Entries below ``SPARSITY_FLOOR`` are omitted; everything else round
    trips exactly (floats are written in full precision).
    """
    if len(flows) != grid.num_windows:
        raise ParameterError(
            f"{len(flows)} matrices for a grid of {grid.num_windows} windows"
        )
    for m, flow in enumerate(flows, start=1):
        if flow.window_index != m:
            raise ParameterError(
                f"matrix {m} carries window index {flow.window_index}"
            )
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    n = flows[0].n
    manifest = {
        "n": n,
        "num_windows": len(flows),
        "beta": params.beta,
        "epsilon": params.epsilon,
        "boundaries": list(grid.boundaries),
        "floor": SPARSITY_FLOOR,
    }
    if names is not None:
        manifest["names"] = list(names)
    with open(directory / "manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2)
        handle.write("\n")
    for flow in flows:
        path = directory / _window_filename(flow.window_index, len(flows))
        m = flow.window_index
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("window_index,source,target,probability\n")
            for j in range(n):
                for k in range(n):
                    p = float(flow.probs[j, k])
                    if p >= SPARSITY_FLOOR:
                        handle.write(f"{m},{j + 1},{k + 1},{p!r}\n")


def read_flows(
    directory,
    beta: float | None = None,
    epsilon: float | None = None,
) -> tuple[list[FlowMatrix], WindowGrid, ModelParams, tuple[str, ...] | None]:
    """Load a flows directory, verifying the manifest and row masses.

    ``beta``/``epsilon``, when given, must match the manifest exactly;
    a recompute with different parameters should not silently reuse
    stored matrices.
    """
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.is_file():
        raise IntegrityError(f"no manifest.json in {directory}")
    try:
        with open(manifest_path, encoding="utf-8") as handle:
            manifest = json.load(handle)
    except json.JSONDecodeError as exc:
        raise IntegrityError(f"manifest.json is not valid JSON: {exc}")
    for key in ("n", "num_windows", "beta", "epsilon", "boundaries", "floor"):
        if key not in manifest:
            raise IntegrityError(f"manifest.json lacks {key!r}")
    n = int(manifest["n"])
    num_windows = int(manifest["num_windows"])
    floor = float(manifest["floor"])
    if beta is not None and float(manifest["beta"]) != beta:
        raise IntegrityError(
            f"stored flows used beta={manifest['beta']}, requested {beta}"
        )
    if epsilon is not None and float(manifest["epsilon"]) != epsilon:
        raise IntegrityError(
            f"stored flows used epsilon={manifest['epsilon']}, requested {epsilon}"
        )
    try:
        grid = WindowGrid(tuple(float(b) for b in manifest["boundaries"]))
    except (GridError, TypeError, ValueError) as exc:
        raise IntegrityError(f"bad boundaries in manifest: {exc}")
    if grid.num_windows != num_windows:
        raise IntegrityError(
            f"manifest claims {num_windows} windows but lists "
            f"{grid.num_windows} boundary intervals"
        )
    names = tuple(manifest["names"]) if "names" in manifest else None

    flows: list[FlowMatrix] = []
    tol = n * floor + 1e-8
    for m in range(1, num_windows + 1):
        path = directory / _window_filename(m, num_windows)
        if not path.is_file():
            raise IntegrityError(f"missing flow file {path.name}")
        probs = np.zeros((n, n))
        with open(path, encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.strip()
                if not line or line.startswith("window_index,"):
                    continue
                fields = line.split(",")
                try:
                    idx, j, k, p = (
                        int(fields[0]),
                        int(fields[1]),
                        int(fields[2]),
                        float(fields[3]),
                    )
                except (IndexError, ValueError):
                    raise IntegrityError(f"{path.name} line {lineno}: bad row {line!r}")
                if len(fields) != 4:
                    raise IntegrityError(f"{path.name} line {lineno}: bad row {line!r}")
                if idx != m:
                    raise IntegrityError(
                        f"{path.name} line {lineno}: window index {idx}, expected {m}"
                    )
                if not (1 <= j <= n and 1 <= k <= n):
                    raise IntegrityError(
                        f"{path.name} line {lineno}: vertex outside 1..{n}"
                    )
                if probs[j - 1, k - 1] != 0.0:
                    raise IntegrityError(
                        f"{path.name} line {lineno}: duplicate entry ({j},{k})"
                    )
                probs[j - 1, k - 1] = p
        bad = np.abs(probs.sum(axis=1) - 1.0) > tol
        if bad.any():
            v = int(np.flatnonzero(bad)[0]) + 1
            raise IntegrityError(
                f"{path.name}: row {v} mass is {probs[v - 1].sum():.6g}, "
                "not 1; file truncated or corrupt"
            )
        flows.append(FlowMatrix(window_index=m, probs=probs))
    params = ModelParams(beta=float(manifest["beta"]), epsilon=float(manifest["epsilon"]))
    return flows, grid, params, names


def _config_value(raw: str, key: str, lineno: int):
    try:
        if key in ("n", "seed", "group_count"):
            return int(raw)
        return float(raw)
    except ValueError:
        raise ParseError(f"bad value {raw!r} for {key}", line=lineno)


def _parse_anomaly_text(text: str, lineno: int = 0) -> AnomalySpec:
    """``1-2-3@100:0.5`` means path 1->2->3 starting at 100, hop gap 0.5."""
    try:
        path_part, rest = text.split("@", 1)
        start_part, gap_part = rest.split(":", 1)
        path = tuple(int(tok) for tok in path_part.split("-"))
        return AnomalySpec(path=path, start=float(start_part), gap=float(gap_part))
    except (ValueError, ParameterError) as exc:
        raise ParseError(f"bad anomaly {text!r}: {exc}", line=lineno)


_SYNTH_KEYS = {
    "n",
    "duration",
    "background_rate",
    "community_bias",
    "noise_fraction",
    "seed",
    "group_count",
}


def parse_synth_config(source) -> SynthConfig:
    """Read a scenario config, JSON or ``key = value`` lines.

    Scalar keys match the config fields; anomaly chains are the
    ``anomalies`` list in JSON, or repeated ``anomaly = 1-2-3@100:0.5``
    lines otherwise.
    """
    handle, needs_close = _open_text(source)
    try:
        text = handle.read()
    finally:
        if needs_close:
            handle.close()
    if text.lstrip().startswith("{"):
        return _synth_config_json(text)
    kwargs: dict = {}
    anomalies: list[AnomalySpec] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected key = value", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "anomaly":
            anomalies.append(_parse_anomaly_text(value, lineno))
        elif key in _SYNTH_KEYS:
            kwargs[key] = _config_value(value, key, lineno)
        else:
            raise ParseError(f"unknown config key {key!r}", line=lineno)
    try:
        return SynthConfig(anomalies=tuple(anomalies), **kwargs)
    except TypeError as exc:
        raise ParseError(f"incomplete config: {exc}")


def _synth_config_json(text: str) -> SynthConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON: {exc.msg}", line=exc.lineno)
    if not isinstance(data, dict):
        raise ParseError("top-level JSON value must be an object")
    unknown = set(data) - _SYNTH_KEYS - {"anomalies"}
    if unknown:
        raise ParseError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    anomalies = []
    for i, entry in enumerate(data.pop("anomalies", [])):
        try:
            anomalies.append(
                AnomalySpec(
                    path=tuple(entry["path"]),
                    start=float(entry["start"]),
                    gap=float(entry["gap"]),
                )
            )
        except (KeyError, TypeError, ValueError, ParameterError) as exc:
            raise ParseError(f"bad anomaly entry {i}: {exc}")
    try:
        return SynthConfig(anomalies=tuple(anomalies), **data)
    except TypeError as exc:
        raise ParseError(f"incomplete config: {exc}")
