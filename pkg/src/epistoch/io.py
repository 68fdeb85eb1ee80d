"""CSV schemas, ingestion with line/column diagnostics, atomic writers and
the JSON result envelope.

Floats are written with 9 significant digits. Lines starting with ``#`` are
comments; the event-log writer uses one (``# n=<population>``) to carry the
population size.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__ as VERSION
from .core import KIND_CODES, KIND_NAMES, EventLog
from .errors import DomainError, SchemaError
from .final_size import FinalSizeObservation, SampleObservation
from .structured import HouseholdOutbreakData
from .surveillance import CountPanel



def fmt(x) -> str:
    """Canonical text for a number: integers as-is, floats to 9 significant digits."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = format(x, ".9g")
    return "0" if s == "-0" else s


# column parsers ----------------------------------------------------------------

def _float(v):
    x = float(v)
    if math.isnan(x):
        raise ValueError("NaN not allowed")
    return x


def _nonneg_float(v):
    x = _float(v)
    if x < 0:
        raise ValueError("must be >= 0")
    return x


def _int(v):
    x = float(v)
    if x != int(x):
        raise ValueError("must be an integer")
    return int(x)


def _nonneg_int(v):
    x = _int(v)
    if x < 0:
        raise ValueError("must be a nonnegative integer")
    return x


def _pos_int(v):
    x = _int(v)
    if x < 1:
        raise ValueError("must be a positive integer")
    return x


def _opt(parser):
    def p(v):
        return None if v.strip() == "" else parser(v)
    return p


def _str(v):
    if v.strip() == "":
        raise ValueError("empty value")
    return v.strip()


def _kind(v):
    v = v.strip()
    if v not in KIND_CODES:
        raise ValueError(f"kind must be one of {sorted(KIND_CODES)}")
    return KIND_CODES[v]


def _household_event(v):
    v = v.strip()
    if v not in ("index", "infection", "recovery"):
        raise ValueError("event must be index, infection or recovery")
    return v


@dataclass(frozen=True)
class Schema:
    id: str
    columns: tuple  # (name, parser)
    optional: tuple = ()  # trailing optional columns (name, parser)

    @property
    def header(self) -> list:
        return [c for c, _ in self.columns]


SCHEMAS = {
    "event-log": Schema("event-log", (("time", _nonneg_float), ("kind", _kind), ("subject", _nonneg_int),
                                      ("infector", _opt(_nonneg_int)))),
    "panel": Schema("panel", (("unit", _str), ("week", _int), ("year", _int), ("count", _nonneg_int))),
    "weights": Schema("weights", (("from", _str), ("to", _str), ("weight", _nonneg_float))),
    "household-events": Schema("household-events", (("household_id", _str), ("event", _household_event),
                                                     ("time", _nonneg_float))),
    "household-sizes": Schema("household-sizes", (("household_id", _str), ("size", _pos_int))),
    "final-size": Schema("final-size", (("n", _pos_int), ("Z", _nonneg_int)), (("n_immune", _nonneg_int),)),
    "sample": Schema("sample", (("n", _pos_int), ("m", _pos_int), ("Z_m", _nonneg_int))),
    "incidence": Schema("incidence", (("period", _int), ("count", _nonneg_int))),
    "removal-times": Schema("removal-times", (("time", _nonneg_float),)),
}


def _rows(path, schema: Schema):
    """Yield ``(line_number, {column: value})`` after header validation."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise SchemaError(f"cannot open {path}: {exc.strerror}") from exc
    with fh:
        header = None
        cols = None
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if text == "" or text.startswith("#"):
                continue
            cells = next(csv.reader([raw.rstrip("\r\n")]))
            if header is None:
                header = [c.strip() for c in cells]
                n_req = len(schema.columns)
                allowed = [schema.header, schema.header + [c for c, _ in schema.optional]]
                if header not in allowed:
                    raise SchemaError(
                        f"header {','.join(header)!r} does not match schema {schema.id!r} "
                        f"({','.join(schema.header)})", line=lineno)
                cols = list(schema.columns) + list(schema.optional[: len(header) - n_req])
                continue
            if len(cells) != len(cols):
                raise SchemaError(f"expected {len(cols)} fields, found {len(cells)}", line=lineno)
            rec = {}
            for (name, parser), cell in zip(cols, cells):
                try:
                    rec[name] = parser(cell)
                except (ValueError, TypeError) as exc:
                    raise SchemaError(f"bad value {cell!r}: {exc}", line=lineno, column=name) from None
            yield lineno, rec
        if header is None:
            raise SchemaError(f"{path} is empty; expected header for schema {schema.id!r}")


def _comment_value(path, key):
    with open(path) as fh:
        for raw in fh:
            s = raw.strip()
            if s.startswith("#") and "=" in s:
                k, v = s[1:].split("=", 1)
                if k.strip() == key:
                    return v.strip()
            elif s:
                return None
    return None


def read_records(path, schema_id: str) -> list:
    if schema_id not in SCHEMAS:
        raise SchemaError(f"unknown schema {schema_id!r}; known: {sorted(SCHEMAS)}")
    return [rec for _, rec in _rows(path, SCHEMAS[schema_id])]


def ingest_csv(path, schema_id: str, **kw):
    """Read and validate a CSV file into the matching in-memory type.

    ``event-log`` returns an :class:`EventLog` (``n`` from the ``# n=``
    comment or the keyword); ``panel`` a :class:`CountPanel`;
    ``household-events`` a :class:`HouseholdOutbreakData` (needs
    ``sizes_path`` or ``sizes``); ``final-size`` / ``sample`` a list of
    observations; ``incidence`` a count array; ``weights`` a list of
    ``(from, to, weight)``; ``removal-times`` an array.
    """
    if schema_id not in SCHEMAS:
        raise SchemaError(f"unknown schema {schema_id!r}; known: {sorted(SCHEMAS)}")
    schema = SCHEMAS[schema_id]
    rows = list(_rows(path, schema))
    if schema_id == "event-log":
        return _build_event_log(path, rows, kw.get("n"))
    if schema_id == "panel":
        return _build_panel(rows)
    if schema_id == "weights":
        return [(r["from"], r["to"], r["weight"]) for _, r in rows]
    if schema_id == "household-events":
        return _build_household(rows, kw)
    if schema_id == "household-sizes":
        return [(r["household_id"], r["size"]) for _, r in rows]
    if schema_id == "final-size":
        out = []
        for ln, r in rows:
            try:
                out.append(FinalSizeObservation(r["n"], r["Z"], r.get("n_immune") or 0))
            except DomainError as exc:
                raise SchemaError(str(exc), line=ln) from None
        return out
    if schema_id == "sample":
        out = []
        for ln, r in rows:
            try:
                out.append(SampleObservation(r["n"], r["m"], r["Z_m"]))
            except DomainError as exc:
                raise SchemaError(str(exc), line=ln) from None
        return out
    if schema_id == "incidence":
        periods = [r["period"] for _, r in rows]
        if periods and periods != list(range(periods[0], periods[0] + len(periods))):
            raise SchemaError("incidence periods must be consecutive and increasing")
        return np.array([r["count"] for _, r in rows], dtype=np.int64)
    if schema_id == "removal-times":
        return np.array([r["time"] for _, r in rows], dtype=float)
    raise SchemaError(f"no builder for schema {schema_id!r}")


def _build_event_log(path, rows, n):
    if n is None:
        v = _comment_value(path, "n")
        if v is not None:
            try:
                n = int(v)
            except ValueError:
                raise SchemaError(f"bad population comment n={v!r}", line=1) from None
    times = [r["time"] for _, r in rows]
    for (ln, _), prev, cur in zip(rows[1:], times, times[1:]):
        if cur < prev:
            raise SchemaError("event times must be nondecreasing", line=ln, column="time")
    subj = [r["subject"] for _, r in rows]
    if n is None:
        n = max(subj) + 1 if subj else 1
    for ln, r in rows:
        if r["subject"] >= n:
            raise SchemaError(f"subject {r['subject']} outside population of {n}", line=ln, column="subject")
    return EventLog(
        np.array(times, dtype=float),
        np.array([r["kind"] for _, r in rows], dtype=np.int8),
        np.array(subj, dtype=np.int64),
        np.array([-1 if r["infector"] is None else r["infector"] for _, r in rows], dtype=np.int64),
        int(n),
    )


def _build_panel(rows):
    units = []
    seen = {}
    periods = sorted({(r["year"], r["week"]) for _, r in rows})
    pidx = {p: k for k, p in enumerate(periods)}
    for _, r in rows:
        if r["unit"] not in seen:
            seen[r["unit"]] = len(units)
            units.append(r["unit"])
    y = np.full((len(units), len(periods)), -1, dtype=np.int64)
    for ln, r in rows:
        i, t = seen[r["unit"]], pidx[(r["year"], r["week"])]
        if y[i, t] >= 0:
            raise SchemaError(f"duplicate count for unit {r['unit']!r}", line=ln, column="week")
        y[i, t] = r["count"]
    if np.any(y < 0):
        i, t = np.argwhere(y < 0)[0]
        raise SchemaError(f"missing count for unit {units[i]!r} at year {periods[t][0]} week {periods[t][1]}")
    return CountPanel(y, week=[p[1] for p in periods], year=[p[0] for p in periods], units=tuple(units))


def weights_matrix(triples, units) -> np.ndarray:
    """``w[j, i]`` from ``(from=j, to=i, weight)`` triples."""
    index = {u: k for k, u in enumerate(units)}
    w = np.zeros((len(units), len(units)))
    for a, b, v in triples:
        if a not in index or b not in index:
            raise SchemaError(f"weight references unknown unit {a if a not in index else b!r}")
        if a == b and v != 0:
            raise SchemaError(f"self-weight for unit {a!r} must be zero")
        w[index[a], index[b]] = v
    return w


def _build_household(rows, kw):
    sizes = kw.get("sizes")
    if sizes is None:
        sp = kw.get("sizes_path")
        if sp is None:
            raise SchemaError("household events need a sizes file (household_id,size)")
        sizes = ingest_csv(sp, "household-sizes")
    ids = [h for h, _ in sizes]
    if len(set(ids)) != len(ids):
        raise SchemaError("duplicate household_id in sizes")
    index = {h: k for k, h in enumerate(ids)}
    hh, ev, tt = [], [], []
    for ln, r in rows:
        if r["household_id"] not in index:
            raise SchemaError(f"unknown household {r['household_id']!r}", line=ln, column="household_id")
        hh.append(index[r["household_id"]])
        ev.append(r["event"])
        tt.append(r["time"])
    t_obs = kw.get("t_obs")
    if t_obs is None:
        t_obs = max(tt) if tt else 0.0
    try:
        return HouseholdOutbreakData(np.array(hh, dtype=np.int64), tuple(ev), np.array(tt), np.array([s for _, s in sizes]),
                                     float(t_obs))
    except DomainError as exc:
        raise SchemaError(f"household data invalid: {exc}") from None


# writers -------------------------------------------------------------------

def csv_text(header, rows, comments=()) -> str:
    buf = _io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def event_log_csv(log: EventLog) -> str:
    rows = (
        (t, KIND_NAMES[int(k)], s, None if i < 0 else i)
        for t, k, s, i in zip(log.time.tolist(), log.kind.tolist(), log.subject.tolist(), log.infector.tolist())
    )
    return csv_text(SCHEMAS["event-log"].header, rows, comments=(f"n={log.n}",))


def write_event_log(path, log: EventLog) -> None:
    atomic_write(path, event_log_csv(log))


def panel_csv(panel: CountPanel) -> str:
    units = panel.units or tuple(str(i) for i in range(panel.m))
    week = panel.week if panel.week is not None else np.arange(1, panel.T + 1)
    year = panel.year if panel.year is not None else np.zeros(panel.T, dtype=np.int64)
    rows = ((units[i], week[t], year[t], panel.y[i, t]) for i in range(panel.m) for t in range(panel.T))
    return csv_text(SCHEMAS["panel"].header, rows)


def posterior_csv(sample) -> str:
    rows = ((k,) + tuple(row) for k, row in enumerate(sample.draws.tolist()))
    return csv_text(("draw",) + tuple(sample.names), rows)


# envelope ------------------------------------------------------------------

@dataclass
class ResultEnvelope:
    command: str
    config: dict
    payload: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    version: str = VERSION
    started: Optional[float] = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "version": self.version,
                "command": self.command,
                "config": self.config,
                "wall_clock_seconds": self.wall_clock,
                "payload": self.payload,
            },
            indent=2,
            sort_keys=True,
            default=_json_default,
        ) + "\n"

    def write(self, path) -> None:
        atomic_write(path, self.to_json())

    @classmethod
    def read(cls, path) -> "ResultEnvelope":
        with open(path) as fh:
            d = json.load(fh)
        return cls(d["command"], d["config"], d["payload"], d["wall_clock_seconds"], d["version"])


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (tuple, set)):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False
