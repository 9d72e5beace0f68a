"""SVG explanations: one picture per disjoint segment plus a full-plan overview."""
from __future__ import annotations

import colorsys
import math
import os
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .core import PlanLike, as_vertex_lists
from .segmentation import Decomposition, greedy_decompose
from .world import GridWorld

SVG_NS = "http://www.w3.org/2000/svg"


class RenderError(ValueError):
    pass


def agent_color(agent_id: int) -> str:
    """Deterministic, well-spread hue per agent (golden-ratio stepping)."""
    h = (agent_id * 0.618033988749895) % 1.0
    r, g, b = colorsys.hls_to_rgb(h, 0.45, 0.75)
    return "#{:02x}{:02x}{:02x}".format(round(r * 255), round(g * 255), round(b * 255))


@dataclass(frozen=True)
class RenderSpec:
    cell: int = 40
    margin: int = 10
    label_height: int = 24
    grid_color: str = "#d0d0d0"
    obstacle_color: str = "#404040"

    def color(self, agent_id: int) -> str:
        return agent_color(agent_id)


def _star(cx, cy, r_out, r_in) -> str:
    pts = []
    for k in range(10):
        r = r_out if k % 2 == 0 else r_in
        a = -math.pi / 2 + k * math.pi / 5
        pts.append(f"{cx + r * math.cos(a):.2f},{cy + r * math.sin(a):.2f}")
    return " ".join(pts)


class _Canvas:
    def __init__(self, world: GridWorld, spec: RenderSpec, title: str):
        self.w, self.s = world, spec
        self.width = world.width * spec.cell + 2 * spec.margin
        self.height = world.height * spec.cell + 2 * spec.margin + spec.label_height
        self.parts: list[str] = []
        self._grid()
        self.parts.append(
            f'<text x="{spec.margin}" y="{spec.margin + 14}" font-family="sans-serif" '
            f'font-size="14">{escape(title)}</text>'
        )

    def center(self, v):
        s = self.s
        return (
            s.margin + (v[0] + 0.5) * s.cell,
            s.margin + s.label_height + (v[1] + 0.5) * s.cell,
        )

    def _grid(self):
        s, w = self.s, self.w
        top = s.margin + s.label_height
        for x, y in sorted(w.blocked):
            self.parts.append(
                f'<rect x="{s.margin + x * s.cell}" y="{top + y * s.cell}" width="{s.cell}" '
                f'height="{s.cell}" fill="{s.obstacle_color}"/>'
            )
        for x in range(w.width + 1):
            px = s.margin + x * s.cell
            self.parts.append(
                f'<line x1="{px}" y1="{top}" x2="{px}" y2="{top + w.height * s.cell}" '
                f'stroke="{s.grid_color}" stroke-width="1"/>'
            )
        for y in range(w.height + 1):
            py = top + y * s.cell
            self.parts.append(
                f'<line x1="{s.margin}" y1="{py}" x2="{s.margin + w.width * s.cell}" y2="{py}" '
                f'stroke="{s.grid_color}" stroke-width="1"/>'
            )

    def path(self, agent_id: int, vs, start=None, goal=None):
        color = self.s.color(agent_id)
        c = self.s.cell
        if len(vs) > 1:
            pts = " ".join("{:.1f},{:.1f}".format(*self.center(v)) for v in vs)
            self.parts.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{c * 0.12:.1f}" '
                f'stroke-linejoin="round" stroke-linecap="round"/>'
            )
        waited = {vs[k] for k in range(len(vs) - 1) if vs[k] == vs[k + 1]}
        for v in sorted(waited):
            cx, cy = self.center(v)
            self.parts.append(
                f'<circle cx="{cx + c * 0.22:.1f}" cy="{cy - c * 0.22:.1f}" r="{c * 0.12:.1f}" '
                f'fill="none" stroke="{color}" stroke-width="{c * 0.05:.1f}"/>'
            )
        if start is not None:
            cx, cy = self.center(start)
            self.parts.append(f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="{c * 0.25:.1f}" fill="{color}"/>')
        if goal is not None:
            cx, cy = self.center(goal)
            self.parts.append(
                f'<polygon points="{_star(cx, cy, c * 0.35, c * 0.15)}" fill="{color}"/>'
            )

    def document(self) -> str:
        body = "\n  ".join(self.parts)
        return (
            f'<svg xmlns="{SVG_NS}" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">\n  {body}\n</svg>\n'
        )


@dataclass(frozen=True)
class RenderedDoc:
    filename: str
    svg: str


def render_explanation(plan: PlanLike, decomposition: Decomposition, world: GridWorld,
                       spec: RenderSpec | None = None) -> list[RenderedDoc]:
    """Segment images in order, then ``full_plan.svg``.

    Within segment ``k`` each agent still present is drawn from its first to
    its last vertex of the window. Starts are marked where the agent's path
    begins, goals where it ends, when those fall inside the window.
    """
    spec = spec or RenderSpec()
    paths = as_vertex_lists(plan)
    horizon = max(1, max((len(p) for p in paths), default=0))
    if decomposition.breakpoints[-1] != horizon:
        raise RenderError(
            f"decomposition ends at {decomposition.breakpoints[-1]} but the plan spans {horizon} timesteps"
        )
    for p in paths:
        for v in p:
            if not world.passable(v):
                raise RenderError(f"plan visits {v}, which is not a free cell of the map")

    docs = []
    for k, (a, b) in enumerate(decomposition.windows(), start=1):
        canvas = _Canvas(world, spec, f"k={k}  t=[{a},{b - 1}]")
        owner: dict = {}
        for i, p in enumerate(paths):
            sub = p[a:b]
            if not sub:
                continue  # agent already gone
            for v in sub:
                if owner.setdefault(v, i) != i:
                    raise RenderError(f"segment {k} is not vertex-disjoint at {v}")
            start = p[0] if a == 0 else None
            goal = p[-1] if len(p) <= b else None
            canvas.path(i, sub, start, goal)
        docs.append(RenderedDoc(f"segment_{k}_t{a}-{b - 1}.svg", canvas.document()))

    overview = _Canvas(world, spec, f"full plan, index {decomposition.index}")
    for i, p in enumerate(paths):
        overview.path(i, p, p[0], p[-1])
    docs.append(RenderedDoc("full_plan.svg", overview.document()))
    return docs


def write_explanation(docs, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for d in docs:
        fn = os.path.join(out_dir, d.filename)
        with open(fn, "w") as fh:
            fh.write(d.svg)
        written.append(fn)
    return written


def render_plan(plan: PlanLike, world: GridWorld, out_dir: str, spec: RenderSpec | None = None) -> list[str]:
    """Greedy-decompose a collision-free plan and write its explanation to ``out_dir``."""
    d = greedy_decompose(plan)
    return write_explanation(render_explanation(plan, d, world, spec), out_dir)
