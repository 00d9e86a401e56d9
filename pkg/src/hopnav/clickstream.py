"""Clickstream ingestion: log parsing, sessionization, navigation-type
classification, and per-type transition counting on the LCC.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field
from urllib.parse import urlsplit

import numpy as np

from .graph import Graph

SESSION_BREAK_SECONDS = 3600.0  # pauses of at least 60 minutes start a new session
MIN_SESSION_LENGTH = 2

_FIELDS = ("ts", "client", "ontology", "concept", "referrer", "action")


class ClickstreamError(Exception):
    pass


class NavigationType(enum.Enum):
    DE = "DE"  # details tab
    DC = "DC"  # direct click in the tree explorer
    DU = "DU"  # direct URL (no referrer)
    EX = "EX"  # expand
    EL = "EL"  # external link
    ES = "ES"  # external search engine
    LS = "LS"  # local search

    def __str__(self):
        return self.value


#: Pseudo-type meaning "union of all seven types"; never stored on a transition.
ALL = "ALL"


@dataclass
class RequestRecord:
    ts: float
    client: str
    ontology: str
    concept: str
    referrer: str | None = None
    action: str | None = None


@dataclass
class Session:
    client: str
    requests: list[RequestRecord]
    types: list[NavigationType] | None = None  # filled by classify_sessions

    def __len__(self):
        return len(self.requests)


@dataclass
class ParseStats:
    parsed: int = 0
    skipped: int = 0
    bad_lines: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class ClassificationRules:
    """Host lists and action-tag mappings driving navigation-type inference."""

    search_engines: frozenset[str] = frozenset()
    local_hosts: frozenset[str] = frozenset()
    action_map: dict[str, NavigationType] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path) -> "ClassificationRules":
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
        unknown = set(raw) - {"search_engines", "local_hosts", "action_map"}
        if unknown:
            raise ClickstreamError(f"unknown rule keys: {sorted(unknown)}")
        amap = {tag: NavigationType(v) for tag, v in raw.get("action_map", {}).items()}
        return cls(frozenset(raw.get("search_engines", [])),
                   frozenset(raw.get("local_hosts", [])), amap)


#: Reasonable defaults for synthetic logs: common tags, no known hosts.
DEFAULT_RULES = ClassificationRules(
    action_map={"details": NavigationType.DE, "click": NavigationType.DC,
                "expand": NavigationType.EX, "search": NavigationType.LS},
)


def _referrer_host(referrer: str) -> str:
    host = urlsplit(referrer).hostname
    if host:
        return host
    # bare host, no scheme
    return referrer.split("/", 1)[0].lower()


def classify(record: RequestRecord, rules: ClassificationRules) -> NavigationType:
    """Infer the navigation type of one request.

    Precedence: explicit action tag, then no-referrer -> DU, then referrer
    host in the search-engine list -> ES, external host -> EL, local host ->
    DC (the default click inside the explorer).
    """
    if record.action:
        mapped = rules.action_map.get(record.action)
        if mapped is not None:
            return mapped
    if not record.referrer:
        return NavigationType.DU
    host = _referrer_host(record.referrer)
    if host in rules.search_engines:
        return NavigationType.ES
    if host in rules.local_hosts:
        return NavigationType.DC
    return NavigationType.EL


def parse_log(source, schema: dict[str, str] | None = None, fmt: str = "tsv",
              delimiter: str = "\t", strict: bool = False) -> tuple[list[RequestRecord], ParseStats]:
    """Parse a request log into records.

    ``fmt`` is "tsv" (delimited text with a header row) or "jsonl". ``schema``
    maps the canonical field names (ts, client, ontology, concept, referrer,
    action) to the input's column names; identity by default. Bad lines are
    counted and skipped unless ``strict``.
    """
    schema = dict(schema or {})
    names = {f: schema.get(f, f) for f in _FIELDS}
    close = False
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        source = open(source, "r", encoding="utf-8")
        close = True
    stats = ParseStats()
    records: list[RequestRecord] = []
    try:
        if fmt == "jsonl":
            rows = (json.loads(line) for line in source if line.strip())
            lines = enumerate(rows, 1)
        elif fmt == "tsv":
            reader = csv.DictReader(source, delimiter=delimiter)
            if reader.fieldnames is None:
                raise ClickstreamError("empty log: missing header row")
            for f in ("ts", "client", "ontology", "concept"):
                if names[f] not in reader.fieldnames:
                    raise ClickstreamError(f"missing required column {names[f]!r}")
            lines = enumerate(reader, 2)  # line 1 is the header
        else:
            raise ClickstreamError(f"unknown log format {fmt!r}")
        for lineno, row in lines:
            try:
                ts = float(row[names["ts"]])
                client = str(row[names["client"]])
                ontology = str(row[names["ontology"]])
                concept = str(row[names["concept"]])
                if not ontology or not concept or not client:
                    raise ValueError("empty required field")
                referrer = row.get(names["referrer"]) or None
                action = row.get(names["action"]) or None
            except (KeyError, TypeError, ValueError) as exc:
                if strict:
                    raise ClickstreamError(f"line {lineno}: {exc}") from exc
                stats.skipped += 1
                stats.bad_lines.append(lineno)
                continue
            records.append(RequestRecord(ts, client, ontology, concept, referrer, action))
            stats.parsed += 1
    finally:
        if close:
            source.close()
    return records, stats


def sessionize(records, break_threshold: float = SESSION_BREAK_SECONDS,
               min_length: int = MIN_SESSION_LENGTH) -> list[Session]:
    """Group records by client, sort by timestamp (stable on ties), split
    where a gap reaches the break threshold, and drop short sessions.
    """
    by_client: dict[str, list[RequestRecord]] = {}
    for rec in records:
        by_client.setdefault(rec.client, []).append(rec)
    sessions: list[Session] = []
    for client in sorted(by_client):
        recs = sorted(by_client[client], key=lambda r: r.ts)
        chunk: list[RequestRecord] = []
        for rec in recs:
            if chunk and rec.ts - chunk[-1].ts >= break_threshold:
                if len(chunk) >= min_length:
                    sessions.append(Session(client, chunk))
                chunk = []
            chunk.append(rec)
        if len(chunk) >= min_length:
            sessions.append(Session(client, chunk))
    return sessions


def classify_sessions(sessions, rules: ClassificationRules) -> list[Session]:
    for s in sessions:
        s.types = [classify(r, rules) for r in s.requests]
    return sessions


class TransitionSet:
    """Sparse multiset of (source, target, navigation type) counts on an LCC
    graph. The ALL view aggregates across the seven types on demand.
    """

    def __init__(self, graph: Graph):
        self.graph = graph
        self._counts: dict[NavigationType, dict[tuple[int, int], int]] = {}

    def add(self, i: int, j: int, navtype: NavigationType, count: int = 1) -> None:
        n = self.graph.node_count
        if not (0 <= i < n and 0 <= j < n):
            raise ClickstreamError(f"transition ({i}, {j}) outside graph of {n} nodes")
        bucket = self._counts.setdefault(navtype, {})
        bucket[(i, j)] = bucket.get((i, j), 0) + count

    def navtypes(self) -> list[NavigationType]:
        return [t for t in NavigationType if t in self._counts]

    def pair_counts(self, navtype=ALL) -> dict[tuple[int, int], int]:
        if navtype is ALL or navtype == ALL:
            agg: dict[tuple[int, int], int] = {}
            for bucket in self._counts.values():
                for pair, c in bucket.items():
                    agg[pair] = agg.get(pair, 0) + c
            return agg
        return dict(self._counts.get(navtype, {}))

    def nobs(self, navtype=ALL) -> int:
        return sum(self.pair_counts(navtype).values())

    def arrays(self, navtype=ALL):
        """(sources, targets, counts) as numpy arrays, deterministic order."""
        pairs = self.pair_counts(navtype)
        keys = sorted(pairs)
        src = np.array([k[0] for k in keys], np.int64)
        dst = np.array([k[1] for k in keys], np.int64)
        cnt = np.array([pairs[k] for k in keys], np.int64)
        return src, dst, cnt

    def write(self, path) -> None:
        """Serialize as "src_label dst_label type count" lines."""
        g = self.graph
        lines = []
        for t in self.navtypes():
            for (i, j), c in self._counts[t].items():
                lines.append(f"{g.labels[i]}\t{g.labels[j]}\t{t.value}\t{c}")
        with open(path, "w", encoding="utf-8") as f:
            for line in sorted(lines):
                f.write(line + "\n")

    @classmethod
    def read(cls, path, graph: Graph) -> "TransitionSet":
        ts = cls(graph)
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 4:
                    raise ClickstreamError(f"line {lineno}: expected 4 fields")
                i, j = graph.id_of(parts[0]), graph.id_of(parts[1])
                if i is None or j is None:
                    raise ClickstreamError(f"line {lineno}: unknown concept label")
                ts.add(i, j, NavigationType(parts[2]), int(parts[3]))
        return ts


@dataclass
class ExtractStats:
    kept: int = 0
    dropped_off_lcc: int = 0
    dropped_self_loops: int = 0


def extract_transitions(sessions, lcc: Graph, drop_self_loops: bool = False
                        ) -> tuple[TransitionSet, ExtractStats]:
    """Count consecutive in-session pairs whose endpoints both map into the
    LCC. The pair's type is the type of the arriving (second) request.
    """
    ts = TransitionSet(lcc)
    stats = ExtractStats()
    for s in sessions:
        if s.types is None:
            raise ClickstreamError("sessions must be classified before extraction")
        for (prev, cur, navtype) in zip(s.requests, s.requests[1:], s.types[1:]):
            i = lcc.id_of(prev.concept)
            j = lcc.id_of(cur.concept)
            if i is None or j is None:
                stats.dropped_off_lcc += 1
                continue
            if i == j and drop_self_loops:
                stats.dropped_self_loops += 1
                continue
            ts.add(i, j, navtype)
            stats.kept += 1
    return ts, stats
