"""Event-log handling: CSV parsing, component filtering, trace grouping, XES export.

The input schema is a four-column CSV (``processId,timestamp,component,action``)
with one recorded plant observation per row.  Logs are grouped into one trace
per process scenario before mining.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterator
from xml.sax.saxutils import quoteattr

from .errors import BadTimestamp, EmptyLog, MalformedRow, MissingHeader

CSV_HEADER = ("processId", "timestamp", "component", "action")

# Component and action names double as model identifiers downstream (DOT, SMV),
# so they are restricted to a safe charset at parse time.
NAME_RE = re.compile(r"[A-Za-z0-9_]+\Z")


def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 instant and normalize it to UTC.

    A trailing ``Z`` is accepted as the UTC designator; naive timestamps are
    rejected because they do not denote an unambiguous instant.
    """
    raw = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
    stamp = datetime.fromisoformat(raw)
    if stamp.tzinfo is None:
        raise ValueError(f"timestamp {text!r} has no UTC offset")
    return stamp.astimezone(timezone.utc)


def format_timestamp(stamp: datetime) -> str:
    """Render a UTC instant in the log's ISO-8601 style (millisecond precision at most)."""
    stamp = stamp.astimezone(timezone.utc)
    if stamp.microsecond:
        return stamp.strftime("%Y-%m-%dT%H:%M:%S.") + f"{stamp.microsecond // 1000:03d}Z"
    return stamp.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Event:
    """One recorded observation: which component did what, when, in which scenario."""

    process_id: str
    timestamp: datetime
    component: str
    action: str


@dataclass(frozen=True)
class EventLog:
    """An ordered sequence of events, preserving file order."""

    events: tuple[Event, ...] = ()

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)


@dataclass(frozen=True)
class Trace:
    """The action sequence of one process scenario, ordered by timestamp."""

    process_id: str
    actions: tuple[str, ...]
    timestamps: tuple[datetime, ...] | None = None


@dataclass(frozen=True)
class TraceSet:
    """A grouped log: one trace per process id."""

    traces: tuple[Trace, ...] = ()

    @property
    def alphabet(self) -> frozenset[str]:
        return frozenset(a for t in self.traces for a in t.actions)

    def __len__(self) -> int:
        return len(self.traces)


def parse_csv(text: str) -> EventLog:
    """Parse CSV text into an :class:`EventLog`.

    The header row is mandatory and validated by name.  Fields may not contain
    commas (there is no quoting layer); a row with the wrong column count
    raises :class:`MalformedRow` with its 1-based line number.
    """
    lines = text.splitlines()
    if not lines:
        raise MissingHeader()
    header = tuple(field.strip() for field in lines[0].rstrip("\r").split(","))
    if header != CSV_HEADER:
        raise MissingHeader()

    events = []
    for line_no, raw in enumerate(lines[1:], start=2):
        fields = raw.rstrip("\r").split(",")
        if len(fields) != 4:
            raise MalformedRow(line_no)
        process_id, stamp_text, component, action = fields
        if not process_id:
            raise MalformedRow(line_no, "empty processId")
        if not NAME_RE.match(component):
            raise MalformedRow(line_no, f"invalid component {component!r}")
        if not NAME_RE.match(action):
            raise MalformedRow(line_no, f"invalid action {action!r}")
        try:
            stamp = parse_timestamp(stamp_text)
        except ValueError:
            raise BadTimestamp(line_no, stamp_text) from None
        events.append(Event(process_id, stamp, component, action))
    return EventLog(tuple(events))


def export_csv(log: EventLog) -> str:
    """Render an event log back to the CSV schema (LF endings, trailing newline)."""
    lines = [",".join(CSV_HEADER)]
    for event in log:
        lines.append(",".join((event.process_id, format_timestamp(event.timestamp),
                               event.component, event.action)))
    return "\n".join(lines) + "\n"


def filter_component(log: EventLog, component: str) -> EventLog:
    """Keep exactly the events of one component, preserving order."""
    return EventLog(tuple(e for e in log if e.component == component))


def group_traces(log: EventLog) -> TraceSet:
    """Group a log into one trace per process id.

    Within a trace, actions are ordered by timestamp; events with equal
    timestamps keep their original file order (stable sort).  Traces appear in
    order of first occurrence of their process id.
    """
    if not log.events:
        raise EmptyLog()
    grouped: dict[str, list[Event]] = {}
    for event in log:
        grouped.setdefault(event.process_id, []).append(event)
    traces = []
    for process_id, events in grouped.items():
        ordered = sorted(events, key=lambda e: e.timestamp)
        traces.append(Trace(process_id,
                            tuple(e.action for e in ordered),
                            tuple(e.timestamp for e in ordered)))
    return TraceSet(tuple(traces))


def export_xes(traces: TraceSet) -> str:
    """Render a trace set as a minimal XES document.

    Only the attributes the mining step needs are emitted: ``concept:name``
    on traces and events, and ``time:timestamp`` on events when the trace
    carries timestamps.
    """
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             '<log xes.version="1.0" xmlns="http://www.xes-standard.org/">']
    for trace in traces.traces:
        lines.append("  <trace>")
        lines.append(f'    <string key="concept:name" value={quoteattr(trace.process_id)}/>')
        for index, action in enumerate(trace.actions):
            lines.append("    <event>")
            lines.append(f'      <string key="concept:name" value={quoteattr(action)}/>')
            if trace.timestamps is not None:
                stamp = format_timestamp(trace.timestamps[index])
                lines.append(f'      <date key="time:timestamp" value={quoteattr(stamp)}/>')
            lines.append("    </event>")
        lines.append("  </trace>")
    lines.append("</log>")
    return "\n".join(lines) + "\n"


def collapse_duplicate_traces(traces: TraceSet) -> tuple[tuple[str, ...], ...]:
    """Distinct action sequences of a trace set, in order of first occurrence."""
    seen: dict[tuple[str, ...], None] = {}
    for trace in traces.traces:
        seen.setdefault(trace.actions, None)
    return tuple(seen)
