"""Tracing level sets {f = k} inside the neighbourhood disc.

Branches are ordered sample lists produced by Euler-predictor /
Newton-corrector continuation, seeded from sign changes on nested grids.
Orientation convention: the tangent is the gradient rotated 90deg
counter-clockwise, so the region f < k lies to the left and convex ovals
around a minimum get positive curvature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import SingularLevel, SingularPoint, TraceDivergence
from .poly import PolyXY

_TURN_LIMIT = 0.42  # max tangent rotation per step, radians


@dataclass
class TraceConfig:
    max_step: float | None = None          # default: radius / 16
    trace_tolerance: float = 1e-10
    seed_grid: int = 64
    gradient_floor_rel: float = 1e-8
    max_corrector_iters: int = 20
    step_retries: int = 3
    curvature_step_cap: float = 0.15       # step <= cap / |kappa|
    max_steps: int = 60000
    seed_scales: int | None = None         # nested seed windows, auto if None


@dataclass
class CurveSample:
    position: np.ndarray
    tangent: np.ndarray
    curvature: float
    arclength: float


class LevelBranch:
    """One traced connected component of {field = level} in the disc.

    Samples are stored as arrays; ``samples`` builds the per-point view.
    Closed branches repeat the first sample at the end.
    """

    def __init__(self, field: PolyXY, level: float, positions: np.ndarray,
                 closed: bool, branch_id: int = 0):
        self.field = field
        self.level = float(level)
        self.positions = np.asarray(positions, dtype=float)
        self.closed = bool(closed)
        self.branch_id = branch_id
        self.tangents, self.curvatures = _frames(field, self.positions)
        self.arclengths = _arc_model_lengths(self.positions, self.tangents)

    @property
    def samples(self) -> list[CurveSample]:
        return [CurveSample(self.positions[i], self.tangents[i],
                            float(self.curvatures[i]), float(self.arclengths[i]))
                for i in range(len(self.positions))]

    @property
    def length(self) -> float:
        return float(self.arclengths[-1])

    def __len__(self):
        return len(self.positions)

    def point_at(self, s: float):
        """Point on the curve at (approximate) arclength s.

        Interpolates the polyline, then projects back onto the level set,
        giving a smooth-enough parametrisation for root finding in s.
        Returns (position, tangent, normal, curvature).
        """
        sl = self.arclengths
        if self.closed:
            s = s % sl[-1]
        else:
            s = min(max(s, 0.0), sl[-1])
        i = int(np.searchsorted(sl, s, side="right")) - 1
        i = min(max(i, 0), len(sl) - 2)
        seg = sl[i + 1] - sl[i]
        w = 0.0 if seg == 0 else (s - sl[i]) / seg
        p = (1.0 - w) * self.positions[i] + w * self.positions[i + 1]
        p = _project(self.field, self.level, p)
        t, n, kap = _frame_at(self.field, p)
        return p, t, n, kap

    def resampled(self, n: int) -> "LevelBranch":
        return resample_by_arclength(self, n)


def _frame_at(field: PolyXY, p):
    gx, gy = field.grad(p[0], p[1])
    g2 = gx * gx + gy * gy
    gn = math.sqrt(g2)
    if gn == 0.0:
        raise SingularPoint("zero gradient")
    fxx = float(field.derivative(2, 0)(p[0], p[1]))
    fxy = float(field.derivative(1, 1)(p[0], p[1]))
    fyy = float(field.derivative(0, 2)(p[0], p[1]))
    num = fxx * gy * gy - 2.0 * fxy * gx * gy + fyy * gx * gx
    kap = num / (g2 * gn)
    t = np.array([-gy / gn, gx / gn])
    n = np.array([gx / gn, gy / gn])
    return t, n, kap


def _frames(field: PolyXY, pos: np.ndarray):
    x, y = pos[:, 0], pos[:, 1]
    gx = field.derivative(1, 0)(x, y)
    gy = field.derivative(0, 1)(x, y)
    g2 = gx * gx + gy * gy
    gn = np.sqrt(g2)
    fxx = field.derivative(2, 0)(x, y)
    fxy = field.derivative(1, 1)(x, y)
    fyy = field.derivative(0, 2)(x, y)
    num = fxx * gy * gy - 2.0 * fxy * gx * gy + fyy * gx * gx
    kap = num / (g2 * gn)
    tang = np.stack([-gy / gn, gx / gn], axis=1)
    return tang, kap


def _arc_model_lengths(pos: np.ndarray, tang: np.ndarray) -> np.ndarray:
    """Cumulative arclength, modelling each segment as a circular arc.

    chord * phi / (2 sin(phi/2)) with phi the turn between end tangents is
    exact on circles and O(h^4) otherwise; plain chords would not meet the
    length-preservation tolerance after resampling.
    """
    if len(pos) < 2:
        return np.zeros(len(pos))
    chords = np.linalg.norm(np.diff(pos, axis=0), axis=1)
    dots = np.clip(np.sum(tang[:-1] * tang[1:], axis=1), -1.0, 1.0)
    phi = np.arccos(dots)
    fac = np.ones_like(phi)
    mask = phi > 1e-8
    fac[mask] = phi[mask] / (2.0 * np.sin(phi[mask] / 2.0))
    out = np.empty(len(pos))
    out[0] = 0.0
    np.cumsum(chords * fac, out=out[1:])
    return out


def _project(field: PolyXY, k: float, p, tol: float = 1e-13, iters: int = 12):
    """Newton projection onto {field = k} along the gradient."""
    p = np.array(p, dtype=float)
    for _ in range(iters):
        r = float(field(p[0], p[1])) - k
        if abs(r) <= tol * max(1.0, abs(k)):
            return p
        gx, gy = field.grad(p[0], p[1])
        g2 = gx * gx + gy * gy
        if g2 == 0.0:
            raise SingularPoint("zero gradient during projection")
        p = p - (r / g2) * np.array([gx, gy])
    return p


def _seed_points(field: PolyXY, k: float, outer: float, inner: float,
                 cfg: TraceConfig):
    """Level-crossing seeds from sign changes on nested square grids.

    Nesting (each window 8x smaller) resolves components much smaller than
    the disc, e.g. shrinking ovals at tiny k.
    """
    n = cfg.seed_grid
    if cfg.seed_scales is not None:
        scales = cfg.seed_scales
    else:
        # resolve features down to ~sqrt(|k|)/8, or the inner radius
        target = max(inner, 0.12 * math.sqrt(abs(k))) if k != 0 or inner > 0 \
            else outer
        target = max(target, 1e-7 * outer)
        scales = 1
        w = outer
        while w > 8 * target and scales < 6:
            w /= 8.0
            scales += 1
    seeds = []
    w = outer
    for _ in range(scales):
        xs = np.linspace(-w, w, n + 1)
        ys = np.linspace(-w, w, n + 1)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        V = field(X, Y) - k
        cell = 2.0 * w / n
        for (A, B, horiz) in ((V[:-1, :], V[1:, :], True),
                              (V[:, :-1], V[:, 1:], False)):
            ii, jj = np.nonzero((A * B < 0))
            for a, b in zip(ii, jj):
                if horiz:
                    x0, y0, dx, dy = xs[a], ys[b], cell, 0.0
                else:
                    x0, y0, dx, dy = xs[a], ys[b], 0.0, cell
                try:
                    t = brentq(lambda t: float(field(x0 + t * dx, y0 + t * dy)) - k,
                               0.0, 1.0, xtol=1e-14)
                except ValueError:
                    continue
                p = np.array([x0 + t * dx, y0 + t * dy])
                r = float(np.hypot(p[0], p[1]))
                if inner + 0.25 * cell < r < outer - 1e-12:
                    seeds.append((p, cell))
        w /= 8.0
    return seeds


def _gradient_floor(field: PolyXY, outer: float, cfg: TraceConfig) -> float:
    xs = np.linspace(-outer, outer, 33)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    gx = field.derivative(1, 0)(X, Y)
    gy = field.derivative(0, 1)(X, Y)
    scale = float(np.sqrt(gx * gx + gy * gy).max())
    return cfg.gradient_floor_rel * max(scale, 1e-300)


def _clip_radius(field: PolyXY, k: float, p_in, p_out, radius: float,
                 inner: bool):
    """Bisect along the (projected) step for the exact circle crossing."""
    a, b = np.array(p_in), np.array(p_out)
    for _ in range(60):
        m = _project(field, k, 0.5 * (a + b))
        r = np.hypot(m[0], m[1])
        if (r > radius) != inner:
            b = m
        else:
            a = m
        if np.linalg.norm(a - b) < 1e-14 * max(1.0, radius):
            break
    return _project(field, k, 0.5 * (a + b))


def _trace_from(field: PolyXY, k: float, start, outer: float, inner: float,
                floor: float, cfg: TraceConfig, max_step: float,
                direction: float = 1.0):
    """March along the curve from start (already on the level set).

    Returns (points, status) with status in {"closed", "boundary", "inner"}.
    """
    pts = [np.array(start, dtype=float)]
    p = pts[0]
    t, _, kap = _frame_at(field, p)
    t = direction * t
    t0 = t.copy()
    steps = 0
    travelled = 0.0
    while steps < cfg.max_steps:
        steps += 1
        h = min(max_step, cfg.curvature_step_cap / max(abs(kap), 1e-12))
        h = max(h, 1e-9 * outer)
        ok = False
        for _ in range(cfg.step_retries + 3):
            q = p + h * t
            q, converged = _correct(field, k, q, floor, cfg)
            if not converged:
                h *= 0.5
                continue
            tq, _, kq = _frame_at(field, q)
            tq = direction * tq
            if float(np.dot(tq, t)) < math.cos(_TURN_LIMIT):
                h *= 0.5
                continue
            ok = True
            break
        if not ok:
            raise TraceDivergence(
                f"corrector failed near ({p[0]:.3g}, {p[1]:.3g}) at level {k:g}")
        r = float(np.hypot(q[0], q[1]))
        if r >= outer:
            pts.append(_clip_radius(field, k, p, q, outer, inner=False))
            return pts, "boundary"
        if inner > 0.0 and r <= inner:
            pts.append(_clip_radius(field, k, p, q, inner, inner=True))
            return pts, "inner"
        step_len = float(np.linalg.norm(q - p))
        travelled += step_len
        # closure test against the start point
        d0 = q - pts[0]
        if travelled > 3.0 * step_len and float(np.dot(tq, t0)) > 0.8:
            dist0 = float(np.linalg.norm(d0))
            if dist0 < 1.3 * step_len:
                pts.append(pts[0].copy())
                return pts, "closed"
            # crossing past the start inside this segment
            seg = q - p
            u = float(np.dot(pts[0] - p, seg)) / max(step_len ** 2, 1e-300)
            if 0.0 < u <= 1.0 and float(
                    np.linalg.norm(pts[0] - (p + u * seg))) < 0.5 * step_len:
                pts.append(pts[0].copy())
                return pts, "closed"
        pts.append(q)
        p, t, kap = q, tq, kq
    raise TraceDivergence(f"step budget exhausted at level {k:g}")


def _correct(field: PolyXY, k: float, q, floor: float, cfg: TraceConfig):
    q = np.array(q, dtype=float)
    for _ in range(cfg.max_corrector_iters):
        r = float(field(q[0], q[1])) - k
        if abs(r) <= cfg.trace_tolerance:
            gx, gy = field.grad(q[0], q[1])
            if math.hypot(gx, gy) < floor:
                raise SingularLevel(
                    f"gradient below floor at ({q[0]:.3g}, {q[1]:.3g})")
            return q, True
        gx, gy = field.grad(q[0], q[1])
        g2 = gx * gx + gy * gy
        if math.sqrt(g2) < floor:
            raise SingularLevel(
                f"gradient below floor at ({q[0]:.3g}, {q[1]:.3g})")
        q = q - (r / g2) * np.array([gx, gy])
    return q, False


def trace_field_level(field: PolyXY, k: float, outer: float,
                      cfg: TraceConfig | None = None, inner: float = 0.0
                      ) -> list[LevelBranch]:
    """All components of {field = k} in the annulus inner < |p| < outer.

    Each component is returned exactly once; open arcs are clipped at the
    annulus boundary.  Generic over any polynomial field (used for level
    sets of f and for the vertex/inflexion set fields).
    """
    cfg = cfg or TraceConfig()
    max_step = cfg.max_step if cfg.max_step is not None else outer / 16.0
    floor = _gradient_floor(field, outer, cfg)
    seeds = _seed_points(field, k, outer, inner, cfg)
    branches: list[LevelBranch] = []
    used = np.zeros(len(seeds), dtype=bool)
    for idx, (seed, cell) in enumerate(seeds):
        if used[idx]:
            continue
        used[idx] = True
        p0 = _project(field, k, seed)
        gx, gy = field.grad(p0[0], p0[1])
        if math.hypot(gx, gy) < floor:
            raise SingularLevel(
                f"seed on singular level at ({p0[0]:.3g}, {p0[1]:.3g})")
        fwd, status = _trace_from(field, k, p0, outer, inner, floor, cfg,
                                  max_step)
        if status == "closed":
            pts = fwd
            closed = True
        else:
            back, _ = _trace_from(field, k, p0, outer, inner, floor, cfg,
                                  max_step, direction=-1.0)
            pts = back[::-1] + fwd[1:]
            closed = False
        pos = np.array(pts)
        branch = LevelBranch(field, k, pos, closed, branch_id=len(branches))
        branches.append(branch)
        # consume the seeds this component explains
        for jdx in range(len(seeds)):
            if not used[jdx]:
                s, c = seeds[jdx]
                if _dist_to_polyline(s, pos) < max(0.8 * c, 0.55 * _local_gap(pos)):
                    used[jdx] = True
    return branches


def _local_gap(pos: np.ndarray) -> float:
    if len(pos) < 2:
        return 0.0
    return float(np.median(np.linalg.norm(np.diff(pos, axis=0), axis=1)))


def _dist_to_polyline(p, pos: np.ndarray) -> float:
    a = pos[:-1]
    b = pos[1:]
    ab = b - a
    denom = np.maximum(np.sum(ab * ab, axis=1), 1e-300)
    t = np.clip(np.sum((p - a) * ab, axis=1) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return float(np.min(np.linalg.norm(proj - p, axis=1)))


def trace_level(surface, k: float, max_step: float | None = None,
                trace_tolerance: float = 1e-10,
                cfg: TraceConfig | None = None) -> list[LevelBranch]:
    """Level set of a MongeSurface inside its neighbourhood disc."""
    if cfg is None:
        cfg = TraceConfig(max_step=max_step, trace_tolerance=trace_tolerance)
    if max_step is not None and max_step <= 0:
        raise ValueError("max_step must be positive")
    if trace_tolerance <= 0:
        raise ValueError("trace_tolerance must be positive")
    return trace_field_level(surface.field, k, surface.neighbourhood_radius, cfg)


def resample_by_arclength(branch: LevelBranch, n: int) -> LevelBranch:
    """n equal-arclength intervals; differential data recomputed from f.

    Closed branches keep the duplicated endpoint (n intervals, n+1 stored
    samples); open branches keep both endpoints (n samples).
    """
    if n < 8:
        raise ValueError("need n >= 8 samples")
    L = branch.length
    if branch.closed:
        targets = np.linspace(0.0, L, n + 1)[:-1]
    else:
        targets = np.linspace(0.0, L, n)
    pts = []
    sl = branch.arclengths
    for s in targets:
        i = int(np.searchsorted(sl, s, side="right")) - 1
        i = min(max(i, 0), len(sl) - 2)
        seg = sl[i + 1] - sl[i]
        w = 0.0 if seg == 0 else (s - sl[i]) / seg
        p = (1.0 - w) * branch.positions[i] + w * branch.positions[i + 1]
        pts.append(_project(branch.field, branch.level, p))
    if branch.closed:
        pts.append(pts[0].copy())
    else:
        pts[0] = branch.positions[0].copy()
        pts[-1] = branch.positions[-1].copy()
    out = LevelBranch(branch.field, branch.level, np.array(pts), branch.closed,
                      branch.branch_id)
    return out
