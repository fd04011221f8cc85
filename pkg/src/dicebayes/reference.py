"""Loader for the embedded reference tables of published posterior values."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Dict, Optional, Tuple

from .core import Average

UNIFORM_ANY_A = "uniform distribution irrespective of a"

_NOTES = {
    "-": None,
    "like-fair": "like fair-throw model",
    "me-dist": "ME distribution",
    "me-burg": "ME distribution for Burg entropy",
}

# printed form of the uniform distribution, used when a cell is the prose
# phrase "uniform distribution irrespective of a"
_UNIFORM_PRINTED = (16.7,) * 6
_UNIFORM_PRINTED_H = 1.793


@dataclass(frozen=True)
class ReferenceCell:
    """One printed cell: percentages, entropy, and an optional annotation.

    probs is None for "undefined" cells. uniform_any_a marks cells the source
    prints as a prose phrase instead of numbers; their numeric stand-ins are
    the printed uniform values.
    """

    probs: Optional[Tuple[float, ...]]
    entropy: Optional[float]
    annotation: Optional[str] = None
    uniform_any_a: bool = False
    entropy_decimals: Optional[int] = None   # printed precision


@dataclass(frozen=True)
class ReferenceRow:
    model: str          # me | fair | johnson | multiplicity | all-exchangeable
    param: Optional[str]  # None | "1" | "5" | "50" | "large" | "large-ratio-*"
    old: ReferenceCell
    new: ReferenceCell


@dataclass(frozen=True)
class ReferenceTable:
    problem: str
    n: Optional[int]          # None in the large-N regime
    average: Average
    rows: Tuple[ReferenceRow, ...]

    @property
    def is_large_n(self) -> bool:
        return self.n is None


def _parse_cell(probs_text: str, entropy_text: str, note: str) -> ReferenceCell:
    annotation = _NOTES[note]
    if probs_text == "undefined":
        return ReferenceCell(None, None, annotation)
    if probs_text == "uniform-any-a":
        return ReferenceCell(_UNIFORM_PRINTED, _UNIFORM_PRINTED_H,
                             UNIFORM_ANY_A, uniform_any_a=True,
                             entropy_decimals=3)
    probs = tuple(float(x) for x in probs_text.split(","))
    if len(probs) != 6:
        raise ValueError(f"bad reference cell {probs_text!r}")
    _, _, frac = entropy_text.partition(".")
    return ReferenceCell(probs, float(entropy_text), annotation,
                         entropy_decimals=len(frac))


def parse_problem_id(problem: str) -> Tuple[Optional[int], Average]:
    """Split a problem id like 'n2-a5' or 'large-a3.5' into (N or None, average)."""
    head, _, avg = problem.partition("-a")
    if not avg:
        raise ValueError(f"bad problem id {problem!r}")
    average = Average.parse(avg)
    if head == "large":
        return None, average
    if head.startswith("n") and head[1:].isdigit():
        return int(head[1:]), average
    raise ValueError(f"bad problem id {problem!r}")


def load_reference_tables() -> Dict[str, ReferenceTable]:
    """All reference tables, keyed by problem id, in publication order."""
    text = (resources.files("dicebayes") / "data" / "reference_tables.txt").read_text()
    tables: Dict[str, list] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("|")
        if len(fields) != 9:
            raise ValueError(f"bad reference record: {line!r}")
        problem, model, param, op, oh, onote, np_, nh, nnote = fields
        old = _parse_cell(op, oh, onote)
        if np_ == "same":
            new = old
        else:
            new = _parse_cell(np_, nh, nnote)
        tables.setdefault(problem, []).append(
            ReferenceRow(model, None if param == "-" else param, old, new))
    out: Dict[str, ReferenceTable] = {}
    for problem, rows in tables.items():
        n, average = parse_problem_id(problem)
        out[problem] = ReferenceTable(problem, n, average, tuple(rows))
    return out
