"""Text instance files.

Format: line 1 is ``p <graph|digraph|tournament> <n> <m>``, every edge or
arc is one ``e <u> <v>`` line (0-indexed, arcs directed u -> v), and
``c key=value`` metadata lines are permitted anywhere.  The writer is
byte-deterministic: metadata sorted by key right after the header, then
edge records sorted numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .graphs import Digraph, Graph, InvariantError, Tournament

KINDS = ("graph", "digraph", "tournament")


class ParseError(ValueError):
    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class InstanceFile:
    """Lossless on-disk form of a graph, digraph, or tournament."""

    kind: str
    n: int
    records: tuple[tuple[int, int], ...]
    metadata: dict[str, str] = field(default_factory=dict)

    @classmethod
    def of(cls, g: Graph | Digraph, metadata: dict[str, str] | None = None) -> "InstanceFile":
        if isinstance(g, Tournament):
            kind = "tournament"
            records = g.arcs
        elif isinstance(g, Digraph):
            kind = "digraph"
            records = g.arcs
        else:
            kind = "graph"
            records = g.edges
        return cls(kind, g.n, tuple(records), dict(metadata or {}))

    def build(self) -> Graph | Digraph | Tournament:
        if self.kind == "graph":
            return Graph(self.n, self.records)
        if self.kind == "digraph":
            return Digraph(self.n, self.records)
        return Tournament(self.n, self.records)

    def dumps(self) -> str:
        lines = [f"p {self.kind} {self.n} {len(self.records)}"]
        for key in sorted(self.metadata):
            lines.append(f"c {key}={self.metadata[key]}")
        for u, v in sorted(self.records):
            lines.append(f"e {u} {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str, path="<string>") -> "InstanceFile":
        kind = None
        n = m = 0
        records: list[tuple[int, int]] = []
        metadata: dict[str, str] = {}
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            tag = line[0]
            if tag == "c":
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    metadata[key.strip()] = value.strip()
                continue
            parts = line.split()
            if tag == "p":
                if kind is not None:
                    raise ParseError(path, line_no, "duplicate header line")
                if len(parts) != 4 or parts[1] not in KINDS:
                    raise ParseError(path, line_no, f"bad header {line!r}")
                kind = parts[1]
                try:
                    n, m = int(parts[2]), int(parts[3])
                except ValueError:
                    raise ParseError(path, line_no, f"bad header counts {line!r}") from None
            elif tag == "e":
                if kind is None:
                    raise ParseError(path, line_no, "edge record before header")
                if len(parts) != 3:
                    raise ParseError(path, line_no, f"bad edge record {line!r}")
                try:
                    u, v = int(parts[1]), int(parts[2])
                except ValueError:
                    raise ParseError(path, line_no, f"bad edge record {line!r}") from None
                records.append((u, v))
            else:
                raise ParseError(path, line_no, f"unknown record type {tag!r}")
        if kind is None:
            raise ParseError(path, 1, "missing header line")
        if len(records) != m:
            raise ParseError(
                path, 1, f"header promises {m} records, file has {len(records)}"
            )
        return cls(kind, n, tuple(records), metadata)


def write_instance(path, g: Graph | Digraph, metadata: dict[str, str] | None = None) -> None:
    Path(path).write_text(InstanceFile.of(g, metadata).dumps(), encoding="utf-8")


def read_instance(path) -> tuple[Graph | Digraph | Tournament, dict[str, str]]:
    """Parse and validate an instance file; invariant violations are named."""
    text = Path(path).read_text(encoding="utf-8")
    inst = InstanceFile.loads(text, path=path)
    try:
        g = inst.build()
    except InvariantError as exc:
        raise InvariantError(f"{path}: {exc}") from exc
    return g, inst.metadata
