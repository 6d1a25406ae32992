"""Grid workspace: rectangular partition, labels and the motion abstraction.

Cells are unit rectangles indexed row-major from the bottom-left corner,
1-based, named "R1".."Rn".  Points on shared edges resolve to the cell with
the larger index (along x first, then y); points on the outer boundary stay
in the outermost cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class WorkspaceError(Exception):
    pass


@dataclass(frozen=True)
class Region:
    id: int
    bounds: tuple  # (x0, y0, x1, y1)
    labels: frozenset

    @property
    def name(self):
        return f"R{self.id}"

    @property
    def center(self):
        x0, y0, x1, y1 = self.bounds
        return ((x0 + x1) / 2.0, (y0 + y1) / 2.0)


class Workspace:
    """Bounded rectangular workspace tiled by a uniform grid of regions."""

    def __init__(self, width, height, cols, rows, labels=None, static_obstacles=()):
        if cols <= 0 or rows <= 0:
            raise WorkspaceError("grid must have positive dimensions")
        cw = width / cols
        ch = height / rows
        if not math.isclose(cw, ch, rel_tol=1e-9):
            raise WorkspaceError("cells must be square (width/cols == height/rows)")
        self.width = float(width)
        self.height = float(height)
        self.cols = int(cols)
        self.rows = int(rows)
        self.cell = cw
        labels = labels or {}
        by_cell = {}
        for prop, cells in labels.items():
            for cid in cells:
                if not 1 <= cid <= cols * rows:
                    raise WorkspaceError(f"label {prop!r} references missing cell {cid}")
                by_cell.setdefault(cid, set()).add(prop)
        self.regions = []
        for r in range(rows):
            for c in range(cols):
                rid = r * cols + c + 1
                bounds = (c * cw, r * ch, (c + 1) * cw, (r + 1) * ch)
                self.regions.append(
                    Region(rid, bounds, frozenset(by_cell.get(rid, ())))
                )
        self.static_obstacles = frozenset(static_obstacles)
        for rid in self.static_obstacles:
            if not 1 <= rid <= len(self.regions):
                raise WorkspaceError(f"obstacle references missing cell {rid}")

    @property
    def n_regions(self):
        return len(self.regions)

    def region(self, rid):
        return self.regions[rid - 1]

    def in_bounds(self, x, y):
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height

    def region_of(self, x, y):
        """The unique region containing (x, y); edge points go to the larger
        cell index, outer-boundary points to the outermost cell."""
        if not self.in_bounds(x, y):
            raise WorkspaceError(f"point ({x}, {y}) outside workspace")
        c = min(int(x // self.cell), self.cols - 1)
        r = min(int(y // self.cell), self.rows - 1)
        return self.regions[r * self.cols + c]

    def label_of(self, x, y):
        return self.region_of(x, y).labels

    def obstacle_rects(self):
        """Rectangles of the static obstacle cells, as an (M, 4) list."""
        return [self.region(rid).bounds for rid in sorted(self.static_obstacles)]

    def cells_of_segment(self, ax, ay, bx, by):
        """All region ids a segment passes through, in traversal order.

        Walks the grid-line crossings of the segment and classifies the
        midpoint of every sub-interval, so arbitrarily thin crossings are
        still reported.
        """
        ts = {0.0, 1.0}
        dx = bx - ax
        dy = by - ay
        if dx != 0.0:
            for c in range(1, self.cols):
                t = (c * self.cell - ax) / dx
                if 0.0 < t < 1.0:
                    ts.add(t)
        if dy != 0.0:
            for r in range(1, self.rows):
                t = (r * self.cell - ay) / dy
                if 0.0 < t < 1.0:
                    ts.add(t)
        out = []
        ts = sorted(ts)
        for t0, t1 in zip(ts, ts[1:]):
            tm = (t0 + t1) / 2.0
            rid = self.region_of(ax + tm * dx, ay + tm * dy).id
            if not out or out[-1] != rid:
                out.append(rid)
        if not out:  # degenerate zero-length segment
            out.append(self.region_of(ax, ay).id)
        return out

    def cells_of_polyline(self, points):
        """Ordered, deduplicated region ids crossed by a polyline."""
        out = []
        for (ax, ay), (bx, by) in zip(points, points[1:]):
            for rid in self.cells_of_segment(ax, ay, bx, by):
                if not out or out[-1] != rid:
                    out.append(rid)
        if not out and points:
            out.append(self.region_of(*points[0]).id)
        return out


@dataclass
class Cts:
    """Finite abstraction of robot motion over the workspace partition."""

    states: tuple
    initial: int
    transitions: frozenset  # directed (rid, rid) pairs, symmetric by build
    labels: dict = field(repr=False)
    reachable: frozenset = frozenset()

    def successors(self, rid):
        return sorted(t for (s, t) in self.transitions if s == rid)


def build_cts(workspace, start, connectivity=4):
    """Abstract the workspace into a transition system.

    Transitions connect edge-adjacent non-obstacle cells (plus diagonal
    neighbors under 8-connectivity) and every non-obstacle cell keeps a
    self-loop so dwelling is always a legal action.  Obstacle cells are
    isolated.
    """
    if connectivity not in (4, 8):
        raise WorkspaceError("connectivity must be 4 or 8")
    if start in workspace.static_obstacles:
        raise WorkspaceError(f"start region R{start} is a static obstacle")
    cols, rows = workspace.cols, workspace.rows
    obstacles = workspace.static_obstacles
    offsets = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    if connectivity == 8:
        offsets += [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    transitions = set()
    for r in range(rows):
        for c in range(cols):
            rid = r * cols + c + 1
            if rid in obstacles:
                continue
            transitions.add((rid, rid))
            for oc, orow in offsets:
                c2, r2 = c + oc, r + orow
                if 0 <= c2 < cols and 0 <= r2 < rows:
                    rid2 = r2 * cols + c2 + 1
                    if rid2 not in obstacles:
                        transitions.add((rid, rid2))
    adj = {}
    for s, t in transitions:
        adj.setdefault(s, []).append(t)
    seen = {start}
    queue = [start]
    while queue:
        cur = queue.pop()
        for nxt in adj.get(cur, ()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    labels = {reg.id: reg.labels for reg in workspace.regions}
    return Cts(
        states=tuple(reg.id for reg in workspace.regions),
        initial=start,
        transitions=frozenset(transitions),
        labels=labels,
        reachable=frozenset(seen),
    )
