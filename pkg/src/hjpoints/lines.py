"""Combinatorial lines in the grid [1,m]**n.

A line template fixes some coordinates and puts a wildcard in the rest;
substituting j = 1..m for every wildcard yields the m cells of a line.
This module enumerates templates deterministically, searches colorings for
monochromatic lines, searches for line-free colorings by backtracking, and
computes exact line-forcing thresholds for tiny parameters.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import limits
from .errors import DegenerateLineError, ResourceLimitError

STAR = None


@dataclass(frozen=True)
class LineTemplate:
    """Slots are symbols in [1,m] or STAR; at least one STAR spans a line."""

    slots: tuple

    def __post_init__(self):
        if not self.slots:
            raise ValueError("template must have at least one slot")
        for s in self.slots:
            if s is not STAR and (not isinstance(s, int) or s < 1):
                raise ValueError(f"slot must be STAR or a symbol >= 1, got {s!r}")

    @property
    def n(self) -> int:
        return len(self.slots)

    @property
    def star_positions(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.slots) if s is STAR)

    def to_string(self) -> str:
        return ",".join("*" if s is STAR else str(s) for s in self.slots)

    @classmethod
    def from_string(cls, text: str) -> "LineTemplate":
        return cls(tuple(STAR if tok == "*" else int(tok) for tok in text.split(",")))

    def __str__(self) -> str:
        return self.to_string()


def line_cells(template: LineTemplate, m: int) -> list[tuple[int, ...]]:
    """The m cells of the line, ordered by the substituted symbol j = 1..m."""
    stars = template.star_positions
    if not stars:
        raise DegenerateLineError(f"template {template} has no wildcard slot")
    for s in template.slots:
        if s is not STAR and s > m:
            raise ValueError(f"symbol {s} outside alphabet [1,{m}]")
    return [
        tuple(j if s is STAR else s for s in template.slots) for j in range(1, m + 1)
    ]


def enumerate_templates(m: int, n: int):
    """Yield every template over [1,m]**n exactly once.

    Order: wildcard count ascending, then lexicographic with the wildcard
    sorting before every symbol.  Total count is (m+1)**n - m**n.
    """
    if m < 1 or n < 1:
        raise ValueError("need m >= 1 and n >= 1")
    for star_count in range(1, n + 1):
        for enc in itertools.product(range(m + 1), repeat=n):
            if enc.count(0) == star_count:
                yield LineTemplate(tuple(STAR if e == 0 else e for e in enc))


def all_cells(m: int, n: int):
    """Cells of [1,m]**n in lexicographic order."""
    return itertools.product(range(1, m + 1), repeat=n)


def cell_index(cell: tuple[int, ...], m: int) -> int:
    """Rank of a cell in lexicographic order."""
    idx = 0
    for c in cell:
        idx = idx * m + (c - 1)
    return idx


class Coloring:
    """A deterministic k-coloring of the cells of [1,m]**n.

    Backed either by a full color table in lexicographic cell order or by a
    pure evaluation function.  Function-backed colorings memoize into a
    dense table while m**n stays within the cell budget and are evaluated
    on demand above it.
    """

    def __init__(self, m, n, k, fn=None, table=None, max_cells=None):
        if (fn is None) == (table is None):
            raise ValueError("exactly one of fn and table is required")
        self.m = m
        self.n = n
        self.k = k
        total = m**n
        self._fn = fn
        if table is not None:
            table = list(table)
            if len(table) != total:
                raise ValueError(f"table has {len(table)} entries, expected {total}")
            self._table = table
        elif total <= limits.max_cells(max_cells):
            self._table = [None] * total
        else:
            self._table = None

    def evaluate(self, cell: tuple[int, ...]) -> int:
        if self._table is None:
            return self._fn(cell)
        i = cell_index(cell, self.m)
        color = self._table[i]
        if color is None:
            color = self._table[i] = self._fn(cell)
        return color

    def color_table(self) -> list[int]:
        """Full table in lexicographic cell order (forces evaluation)."""
        return [self.evaluate(cell) for cell in all_cells(self.m, self.n)]


def find_monochromatic_line(coloring: Coloring):
    """First template (in enumeration order) whose line is monochromatic.

    Returns (template, color) or None when no template qualifies.
    """
    m = coloring.m
    for template in enumerate_templates(m, coloring.n):
        cells = line_cells(template, m)
        color = coloring.evaluate(cells[0])
        if all(coloring.evaluate(cell) == color for cell in cells[1:]):
            return template, color
    return None


def find_line_incremental(coloring_family, m: int, n_max: int, max_cells=None):
    """Search dimensions n = 1..n_max for the first monochromatic line.

    ``coloring_family(n)`` must return the Coloring to search at dimension
    n, or None to skip that dimension.  Returns (n, template, color) for
    the smallest n admitting a line, or None when every dimension fails.
    Raises ResourceLimitError (with the dimension reached) when m**n would
    exceed the cell budget.
    """
    budget = limits.max_cells(max_cells)
    for n in range(1, n_max + 1):
        if m**n > budget:
            raise ResourceLimitError(
                f"grid {m}**{n} exceeds the cell budget {budget}", n_reached=n
            )
        coloring = coloring_family(n)
        if coloring is None:
            continue
        found = find_monochromatic_line(coloring)
        if found is not None:
            return n, found[0], found[1]
    return None


def line_free_coloring(m: int, k: int, n: int, cell_cap=None):
    """Backtracking search for a k-coloring of [1,m]**n with no line.

    Cells are assigned in lexicographic order and colors tried in ascending
    order, so the first solution found is deterministic.  Returns a
    Coloring or None when every coloring contains a monochromatic line.
    """
    cap = limits.DEFAULT_BACKTRACK_CELLS if cell_cap is None else cell_cap
    total = m**n
    if total > cap:
        raise ResourceLimitError(
            f"search space over {m}**{n} = {total} cells exceeds the cap {cap}"
        )
    lines = [
        tuple(cell_index(cell, m) for cell in line_cells(t, m))
        for t in enumerate_templates(m, n)
    ]
    # Line cells are index-sorted, so a line becomes checkable exactly when
    # its last cell is assigned.
    by_last = [[] for _ in range(total)]
    for line in lines:
        by_last[line[-1]].append(line[:-1])
    assign = [-1] * total

    def extend(i):
        if i == total:
            return True
        for color in range(k):
            if all(
                any(assign[j] != color for j in prefix) for prefix in by_last[i]
            ):
                assign[i] = color
                if extend(i + 1):
                    return True
        assign[i] = -1
        return False

    if extend(0):
        return Coloring(m, n, k, table=assign)
    return None


def hj_number_exact(m: int, k: int, n_cap: int, cell_cap=None):
    """Least n <= n_cap at which every k-coloring of [1,m]**n has a line.

    Returns None when a line-free coloring still exists at n_cap.  The
    answer is well defined because a line-free coloring at n restricts to
    one at n-1.
    """
    for n in range(1, n_cap + 1):
        if line_free_coloring(m, k, n, cell_cap=cell_cap) is None:
            return n
    return None


def write_coloring(coloring: Coloring, dense: bool = False) -> str:
    """Serialize: header ``m n k``, then one ``coords:color`` line per cell
    in lexicographic order, or a single digit string when dense."""
    lines_out = [f"{coloring.m} {coloring.n} {coloring.k}"]
    table = coloring.color_table()
    if dense:
        if coloring.k > 10:
            raise ValueError("dense format needs single-digit colors (k <= 10)")
        lines_out.append("".join(str(c) for c in table))
    else:
        for cell, color in zip(all_cells(coloring.m, coloring.n), table):
            lines_out.append(",".join(str(c) for c in cell) + f":{color}")
    return "\n".join(lines_out) + "\n"


def read_coloring(text: str) -> Coloring:
    """Parse the format written by :func:`write_coloring` (either variant)."""
    rows = [line.strip() for line in text.splitlines() if line.strip()]
    if not rows:
        raise ValueError("empty coloring file")
    try:
        m, n, k = (int(tok) for tok in rows[0].split())
    except ValueError as exc:
        raise ValueError(f"malformed header {rows[0]!r}; expected 'm n k'") from exc
    total = m**n
    body = rows[1:]
    if len(body) == 1 and ":" not in body[0]:
        digits = body[0]
        if len(digits) != total:
            raise ValueError(f"dense row has {len(digits)} digits, expected {total}")
        table = [int(ch) for ch in digits]
    else:
        if len(body) != total:
            raise ValueError(f"expected {total} cell lines, got {len(body)}")
        table = [None] * total
        for row in body:
            coords, _, color = row.partition(":")
            cell = tuple(int(tok) for tok in coords.split(","))
            if len(cell) != n or any(not 1 <= c <= m for c in cell):
                raise ValueError(f"cell {coords!r} outside [1,{m}]**{n}")
            i = cell_index(cell, m)
            if table[i] is not None:
                raise ValueError(f"cell {coords!r} listed twice")
            table[i] = int(color)
    if any(c is None or not 0 <= c < k for c in table):
        raise ValueError("colors must cover every cell and lie in [0, k)")
    return Coloring(m, n, k, table=table)
