"""Events, traces, and the prefix ordering.

An execution is a finite sequence of atomic events: assignments, boolean
test outcomes, and input choices, each tagged with the program point it
came from.  Traces ordered by the prefix relation ⪯ are the carrier set
for the whole analysis: behaviors are sets of complete (maximal) traces,
and responsibility is decided by how much a prefix already guarantees.

Rendering follows the convention of separating events with " ▷ ".
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Union, overload

ASSIGN = "assign"
INPUT = "input"
TEST_TRUE = "test_true"
TEST_FALSE = "test_false"
ERROR = "error"

EVENT_KINDS = frozenset({ASSIGN, INPUT, TEST_TRUE, TEST_FALSE, ERROR})

TRACE_SEPARATOR = " ▷ "


@dataclass(frozen=True)
class Event:
    """One atomic program action.

    Two events are equal iff point, kind, and all payloads agree; in
    particular ``acs=0`` and ``acs=1`` at the same point are distinct
    events, and an input choice differs from an assignment even when the
    rendered text coincides.
    """

    point: str
    kind: str
    text: str
    var: str | None = None
    source: str | None = None
    value: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind: {self.kind!r}")

    def __str__(self) -> str:
        return self.text

    def __repr__(self) -> str:
        return f"Event({self.point}:{self.text})"


@dataclass(frozen=True)
class Trace:
    """A finite sequence of events; the empty trace has length 0."""

    events: tuple[Event, ...] = ()

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def __bool__(self) -> bool:
        return bool(self.events)

    @overload
    def __getitem__(self, index: int) -> Event: ...

    @overload
    def __getitem__(self, index: slice) -> "Trace": ...

    def __getitem__(self, index: Union[int, slice]):
        if isinstance(index, slice):
            return Trace(self.events[index])
        return self.events[index]

    def append(self, event: Event) -> "Trace":
        return Trace(self.events + (event,))

    def render(self) -> str:
        return TRACE_SEPARATOR.join(e.text for e in self.events) if self.events else "ε"

    def texts(self) -> tuple[str, ...]:
        return tuple(e.text for e in self.events)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"Trace({self.render()})"


EMPTY = Trace()

TraceSet = frozenset  # sets of traces use plain frozensets


def concat(a: Trace, b: Trace) -> Trace:
    """Juxtaposition of two finite traces."""
    return Trace(a.events + b.events)


def is_prefix(a: Trace, b: Trace) -> bool:
    """a ⪯ b: a agrees with b pointwise on [0, |a|-1]."""
    return len(a) <= len(b) and b.events[: len(a)] == a.events


def prefixes(traces: Iterable[Trace]) -> frozenset:
    """All prefixes of every trace in the set, including ε when nonempty.

    The result is prefix-closed, extensive on finite traces, idempotent
    and monotone.
    """
    out: set[Trace] = set()
    for trace in traces:
        for i in range(len(trace) + 1):
            out.add(trace[:i])
    return frozenset(out)
