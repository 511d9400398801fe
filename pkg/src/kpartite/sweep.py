"""Margins over the ``(p, q)`` simplex of a state family, threshold extraction, export.

Threshold curves are found by bisection along a fan of rays from the origin
``(p, q) = (0, 0)`` (pure white noise), which every criterion leaves
undetected.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import baselines, criteria
from .criteria import CriterionVerdict, ElementFiducial
from .qstate import DensityOperator, Dims, FamilySpec, StateError
from .twocopy import SwapFiducial

SWAP_CRITERIA = ("thm1", "thm3")
ELEMENT_CRITERIA = ("thm2", "thm4")
BASELINE_CRITERIA = ("critI", "critII", "critIII", "critIV")
CRITERIA = SWAP_CRITERIA + ELEMENT_CRITERIA + BASELINE_CRITERIA

MAX_BISECT_ITERATIONS = 60


class SweepError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Criterion descriptors
# ---------------------------------------------------------------------------

def default_swap_fiducial(dims: Dims) -> SwapFiducial:
    """``(0...0, (d_1-1)...(d_N-1))``; for qubits this is ``(0^N, 1^N)``."""
    return SwapFiducial(tuple(0 for _ in dims), tuple(d - 1 for d in dims))


def default_element_fiducial(dims: Dims) -> ElementFiducial:
    """Base ``0...0`` with ``omega = {1, ..., d-1}``."""
    return ElementFiducial(tuple(0 for _ in dims), tuple(range(1, dims[0])))


@dataclass(frozen=True, eq=False)
class CriterionSpec:
    """A criterion name, a level ``k`` and optional fiducial overrides."""

    name: str
    k: int
    swap: SwapFiducial | None = None
    element: ElementFiducial | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in CRITERIA:
            raise SweepError(f"unknown criterion {self.name!r}; choose from {', '.join(CRITERIA)}")

    @property
    def tag(self) -> str:
        return self.name

    def validate(self, dims: Dims) -> None:
        """Raise :class:`SweepError` if this criterion cannot run on ``dims``."""
        n = len(dims)
        equal = len(set(dims)) == 1
        k = self.k
        if self.name in ("critI", "critII") and any(d != 2 for d in dims):
            raise SweepError(f"{self.name} needs qubits, family has dims {dims}")
        if self.name in ELEMENT_CRITERIA + ("critIII", "critIV") and not equal:
            raise SweepError(f"{self.name} needs equal local dimensions, got {dims}")
        ranges = {
            "thm1": (1, n - 1), "critI": (1, n - 1),
            "thm3": (2, n), "critII": (2, n),
            "thm2": (2, n - 1), "thm4": (2, n - 1), "critIV": (2, n - 1),
            "critIII": (2, 2),
        }
        lo, hi = ranges[self.name]
        if not lo <= k <= hi:
            raise SweepError(f"{self.name} needs k in [{lo}, {hi}] for N={n}, got {k}")
        try:
            if self.name in SWAP_CRITERIA:
                self.swap_fiducial(dims).checked(dims)
            if self.name in ELEMENT_CRITERIA:
                self.element_fiducial(dims).validate(dims)
        except StateError as exc:
            raise SweepError(str(exc)) from exc

    def swap_fiducial(self, dims: Dims) -> SwapFiducial:
        return self.swap if self.swap is not None else default_swap_fiducial(dims)

    def element_fiducial(self, dims: Dims) -> ElementFiducial:
        return self.element if self.element is not None else default_element_fiducial(dims)

    def evaluate(self, rho: DensityOperator) -> CriterionVerdict:
        dims = rho.dims
        if self.name == "thm1":
            return criteria.swap_producibility(rho, self.swap_fiducial(dims), self.k)
        if self.name == "thm3":
            return criteria.swap_separability(rho, self.swap_fiducial(dims), self.k)
        if self.name == "thm2":
            return criteria.element_producibility(rho, self.element_fiducial(dims), self.k)
        if self.name == "thm4":
            return criteria.element_separability(rho, self.element_fiducial(dims), self.k)
        if self.name == "critI":
            return baselines.fisher_producibility(rho, self.k)
        if self.name == "critII":
            return baselines.fisher_separability(rho, self.k)
        if self.name == "critIII":
            return baselines.collective_variance_test(rho)
        return baselines.single_excitation_separability(rho, self.k, **self.options)


# ---------------------------------------------------------------------------
# Parallel helper
# ---------------------------------------------------------------------------

def _parallel_map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def margin_at(family: FamilySpec, criterion: CriterionSpec, p: float, q: float) -> float:
    return criterion.evaluate(family.at(p, q)).margin


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SweepGrid:
    """Margins at ``p = i/(R-1)``, ``q = j/(R-1)``; ``NaN`` where ``p + q > 1``."""

    family: str
    criterion: str
    k: int
    resolution: int
    margins: np.ndarray

    def coords(self, i: int, j: int) -> tuple[float, float]:
        step = self.resolution - 1
        return i / step, j / step

    def points(self) -> Iterable[tuple[float, float, float]]:
        R = self.resolution
        for i in range(R):
            for j in range(R - i):
                p, q = self.coords(i, j)
                yield p, q, float(self.margins[i, j])


def _grid_row(args) -> list[float]:
    family, criterion, i, R = args
    step = R - 1
    return [margin_at(family, criterion, i / step, j / step) for j in range(R - i)]


def grid_sweep(family: FamilySpec, criterion: CriterionSpec, resolution: int = 201,
               workers: int = 1) -> SweepGrid:
    """Evaluate the margin on every simplex point of an ``R x R`` grid."""
    if resolution < 2:
        raise SweepError(f"resolution must be >= 2, got {resolution}")
    criterion.validate(family.dims)
    R = resolution
    rows = _parallel_map(_grid_row, [(family, criterion, i, R) for i in range(R)], workers)
    margins = np.full((R, R), np.nan)
    for i, row in enumerate(rows):
        margins[i, : len(row)] = row
    return SweepGrid(family.label, criterion.tag, criterion.k, R, margins)


# ---------------------------------------------------------------------------
# Bisection
# ---------------------------------------------------------------------------

def ray_length(origin: tuple[float, float], direction: tuple[float, float]) -> float:
    """Largest ``t`` with ``origin + t * direction`` inside the simplex."""
    p0, q0 = origin
    dp, dq = direction
    limits = []
    if dp < 0:
        limits.append(-p0 / dp)
    if dq < 0:
        limits.append(-q0 / dq)
    if dp + dq > 0:
        limits.append((1 - p0 - q0) / (dp + dq))
    if not limits:
        raise SweepError(f"ray from {origin} along {direction} never leaves the simplex")
    return max(0.0, min(limits))


def _bisect(f: Callable[[float], float], lo: float, hi: float, f_lo: float, tol_t: float) -> tuple[float, int]:
    negative_lo = f_lo <= 0
    for it in range(1, MAX_BISECT_ITERATIONS + 1):
        mid = 0.5 * (lo + hi)
        if (f(mid) <= 0) == negative_lo:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol_t:
            return 0.5 * (lo + hi), it
    return 0.5 * (lo + hi), MAX_BISECT_ITERATIONS


def threshold_bisect(
    family: FamilySpec,
    criterion: CriterionSpec,
    origin: tuple[float, float] = (0.0, 0.0),
    direction: tuple[float, float] = (1.0, 0.0),
    tol: float = 1e-6,
) -> tuple[float, float]:
    """Point on the ray where the margin changes sign, located to ``tol`` in ``(p, q)`` distance."""
    criterion.validate(family.dims)
    norm = math.hypot(*direction)
    if norm == 0:
        raise SweepError("zero ray direction")
    t_max = ray_length(origin, direction)

    def f(t: float) -> float:
        return margin_at(family, criterion, origin[0] + t * direction[0], origin[1] + t * direction[1])

    f0, f1 = f(0.0), f(t_max)
    if (f0 <= 0) == (f1 <= 0):
        raise SweepError(f"no sign change of the margin along the ray (endpoints {f0:.6g}, {f1:.6g})")
    t, _ = _bisect(f, 0.0, t_max, f0, tol / norm)
    return origin[0] + t * direction[0], origin[1] + t * direction[1]


@dataclass(frozen=True)
class ThresholdCurve:
    """Polyline of threshold points ordered by ray angle; rays without a crossing are listed in ``omitted``."""

    family: str
    criterion: str
    k: int
    points: tuple[tuple[float, float], ...]
    angles: tuple[float, ...]
    omitted: tuple[float, ...] = ()


def _ray_threshold(args) -> tuple[float, float] | None:
    family, criterion, angle, tol, scan = args
    direction = (math.cos(angle), math.sin(angle))
    # clean up cos(pi/2) so the last ray stays on the q axis
    direction = tuple(0.0 if abs(c) < 1e-15 else c for c in direction)
    t_max = ray_length((0.0, 0.0), direction)

    def f(t: float) -> float:
        return margin_at(family, criterion, t * direction[0], t * direction[1])

    ts = [t_max * m / scan for m in range(scan + 1)]
    values = [f(t) for t in ts]
    for a in range(scan):
        if (values[a] <= 0) != (values[a + 1] <= 0):
            t, _ = _bisect(f, ts[a], ts[a + 1], values[a], tol)
            return t * direction[0], t * direction[1]
    return None


def threshold_curve(
    family: FamilySpec,
    criterion: CriterionSpec,
    rays: int = 64,
    tol: float = 1e-6,
    scan: int = 16,
    workers: int = 1,
) -> ThresholdCurve:
    """Bisect along ``rays`` rays from the origin, angles evenly spaced in ``[0, pi/2]``.

    Each ray is first sampled at ``scan + 1`` points; the first sign change is
    then refined by bisection.
    """
    if rays < 2:
        raise SweepError(f"need at least 2 rays, got {rays}")
    criterion.validate(family.dims)
    angles = [0.5 * math.pi * m / (rays - 1) for m in range(rays)]
    found = _parallel_map(_ray_threshold, [(family, criterion, a, tol, scan) for a in angles], workers)
    points, kept, omitted = [], [], []
    for angle, pt in zip(angles, found):
        if pt is None:
            omitted.append(angle)
        else:
            points.append(pt)
            kept.append(angle)
    return ThresholdCurve(family.label, criterion.tag, criterion.k,
                          tuple(points), tuple(kept), tuple(omitted))


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def _num(x: float) -> str:
    return f"{x:.10g}"


def grid_to_csv(grid: SweepGrid) -> str:
    lines = ["p,q,margin"]
    lines += [f"{_num(p)},{_num(q)},{_num(m)}" for p, q, m in grid.points()]
    return "\n".join(lines) + "\n"


def curve_to_csv(curve: ThresholdCurve) -> str:
    lines = ["p,q"] + [f"{_num(p)},{_num(q)}" for p, q in curve.points]
    return "\n".join(lines) + "\n"


SVG_SIZE = 800
_PAD = 80
_PALETTE = ("#d62728", "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#17becf", "#e377c2", "#8c564b")


def _xy(p: float, q: float) -> tuple[str, str]:
    span = SVG_SIZE - 2 * _PAD
    return f"{_PAD + p * span:.2f}", f"{SVG_SIZE - _PAD - q * span:.2f}"


def _svg_frame(title: str) -> list[str]:
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
        f'<rect x="0" y="0" width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white"/>',
        f'<text x="{SVG_SIZE // 2}" y="30" text-anchor="middle" font-size="18">{title}</text>',
    ]
    x0, y0 = _xy(0, 0)
    x1, _ = _xy(1, 0)
    _, y1 = _xy(0, 1)
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    out.append(f'<line x1="{x1}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="gray" stroke-dasharray="6,4"/>')
    for m in range(6):
        v = m / 5
        tx, ty = _xy(v, 0)
        out.append(f'<line x1="{tx}" y1="{ty}" x2="{tx}" y2="{float(ty) + 6:.2f}" stroke="black"/>')
        out.append(f'<text x="{tx}" y="{float(ty) + 24:.2f}" text-anchor="middle" font-size="14">{v:.1f}</text>')
        lx, ly = _xy(0, v)
        out.append(f'<line x1="{float(lx) - 6:.2f}" y1="{ly}" x2="{lx}" y2="{ly}" stroke="black"/>')
        out.append(f'<text x="{float(lx) - 10:.2f}" y="{float(ly) + 5:.2f}" text-anchor="end" font-size="14">{v:.1f}</text>')
    out.append(f'<text x="{SVG_SIZE - _PAD // 2}" y="{float(y0) + 5:.2f}" font-size="16">p</text>')
    out.append(f'<text x="{x0}" y="{_PAD // 2 + 15}" text-anchor="middle" font-size="16">q</text>')
    return out


def curves_to_svg(curves: Sequence[ThresholdCurve], title: str = "") -> str:
    """All curves as polylines over the unit simplex with a legend."""
    out = _svg_frame(title)
    for idx, curve in enumerate(curves):
        color = _PALETTE[idx % len(_PALETTE)]
        label = f"{curve.criterion} k={curve.k}"
        if curve.points:
            pts = " ".join(",".join(_xy(p, q)) for p, q in curve.points)
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = 60 + 22 * idx
        out.append(f'<line x1="{SVG_SIZE - 220}" y1="{ly}" x2="{SVG_SIZE - 190}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        suffix = "" if curve.points else " (no crossing)"
        out.append(f'<text x="{SVG_SIZE - 182}" y="{ly + 5}" font-size="14">{label}{suffix}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def grid_to_svg(grid: SweepGrid, title: str = "") -> str:
    """Grid cells with positive margin drawn as filled squares."""
    out = _svg_frame(title)
    span = SVG_SIZE - 2 * _PAD
    cell = span / (grid.resolution - 1)
    for p, q, m in grid.points():
        if m > 0:
            x, y = _xy(p, q)
            out.append(f'<rect x="{float(x) - cell / 2:.2f}" y="{float(y) - cell / 2:.2f}" '
                       f'width="{cell:.2f}" height="{cell:.2f}" fill="#d62728" fill-opacity="0.35"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export(obj, fmt: str, title: str = "") -> str:
    """Render a grid, a curve, or a list of curves as ``"csv"`` or ``"svg"``."""
    fmt = fmt.lower()
    if fmt not in ("csv", "svg"):
        raise SweepError(f"unknown format {fmt!r}")
    if isinstance(obj, SweepGrid):
        return grid_to_csv(obj) if fmt == "csv" else grid_to_svg(obj, title)
    if isinstance(obj, ThresholdCurve):
        return curve_to_csv(obj) if fmt == "csv" else curves_to_svg([obj], title)
    curves = list(obj)
    if fmt == "csv":
        raise SweepError("CSV export takes a single curve")
    return curves_to_svg(curves, title)
