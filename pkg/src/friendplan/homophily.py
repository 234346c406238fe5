"""Similarity-based acceptance probabilities from the initiator to non-friends.

Besides influence along social links, a node may accept an invitation purely
because its profile resembles the initiator's. The model supplies that
per-node probability; it is rendered in the tree as an extra leaf edge.
"""

from __future__ import annotations

from pathlib import Path
from typing import IO, Mapping, Optional, Union

from .errors import FriendPlanError


class HomophilyModel:
    """Either a single constant probability or an explicit per-node table.

    A table must cover every non-friend node that gets queried; a missing
    entry is an error rather than a silent zero.
    """

    def __init__(self, constant: Optional[float] = None,
                 table: Optional[Mapping[int, float]] = None):
        if (constant is None) == (table is None):
            raise FriendPlanError("provide exactly one of constant= or table=")
        if constant is not None and not 0.0 <= constant <= 1.0:
            raise FriendPlanError("homophily probability must lie in [0, 1]")
        if table is not None:
            for node, h in table.items():
                if not 0.0 <= h <= 1.0:
                    raise FriendPlanError(f"homophily for node {node} outside [0, 1]")
        self._constant = constant
        self._table = dict(table) if table is not None else None

    def probability(self, node: int) -> float:
        if self._constant is not None:
            return self._constant
        try:
            return self._table[node]
        except KeyError:
            raise FriendPlanError(f"no homophily probability for node {node}") from None

    def __repr__(self) -> str:
        if self._constant is not None:
            return f"HomophilyModel(constant={self._constant})"
        return f"HomophilyModel(table with {len(self._table)} nodes)"


def load_homophily(source: Union[str, Path, IO[str]]) -> HomophilyModel:
    """Read a "node probability" table, one pair per line, '#' comments."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    table: dict[int, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FriendPlanError(f"homophily line {lineno}: expected 'node probability'")
        try:
            table[int(parts[0])] = float(parts[1])
        except ValueError:
            raise FriendPlanError(f"homophily line {lineno}: could not parse {raw!r}") from None
    return HomophilyModel(table=table)
