"""r-valued not-all-equal k-SAT instances."""

from __future__ import annotations

from dataclasses import dataclass

from .graphs import InvariantError


@dataclass(frozen=True)
class NaeInstance:
    """Variables take one of ``r`` values; no clause may be monochromatic."""

    n_vars: int
    r: int
    k: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n_vars < 0 or self.r < 1 or self.k < 1:
            raise InvariantError("bad instance parameters")
        for clause in self.clauses:
            if len(clause) != self.k:
                raise InvariantError(f"clause {clause} is not width {self.k}")
            if len(set(clause)) != self.k:
                raise InvariantError(f"clause {clause} repeats a variable")
            for x in clause:
                if not (0 <= x < self.n_vars):
                    raise InvariantError(f"variable {x} out of range")

    @property
    def m(self) -> int:
        return len(self.clauses)

    def occurrences(self, var: int) -> int:
        return sum(var in clause for clause in self.clauses)

    def satisfied_by(self, assignment: tuple[int, ...]) -> bool:
        if len(assignment) != self.n_vars:
            return False
        if any(not (0 <= a < self.r) for a in assignment):
            return False
        for clause in self.clauses:
            first = assignment[clause[0]]
            if all(assignment[x] == first for x in clause[1:]):
                return False
        return True

    def to_json_dict(self) -> dict:
        return {
            "n_vars": self.n_vars,
            "r": self.r,
            "k": self.k,
            "clauses": [list(c) for c in self.clauses],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "NaeInstance":
        return cls(
            int(data["n_vars"]),
            int(data["r"]),
            int(data["k"]),
            tuple(tuple(int(x) for x in c) for c in data["clauses"]),
        )
