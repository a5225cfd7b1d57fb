"""Glint finder, stereoscopic triangulation, and glint-map rendering.

This module is the verification oracle for the synthesized surfaces: it
locates specular glints for a given eye and light, reports the normality and
colinearity residuals at each one, and triangulates binocular glint pairs to
the perceived virtual point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, DomainError
from .foliation import CartesianOval, ConicSurface, FoliationMember
from .geom import (
    REFLECTION,
    EyeAtInfinity,
    Eye,
    LightSource,
    Media,
    Vec3,
    ViewPath,
    colinearity_residual,
    eye_direction_from,
    glint_axis,
    norm,
    unit,
    vec3,
    view_thetas,
)
from .ridging import Mesh, RidgedSurface
from .striping import StripeArc, Striping, Toolpath


@dataclass(frozen=True)
class Glint:
    """One specularity: where it is, how well it satisfies the constraints."""

    eye: Eye
    point: Vec3
    normal: Vec3
    normality: float  # |unit normal x unit axis|
    colinearity: float | None  # residual norm vs the intended stipple, mm
    tag: str  # "imaging" | "backface-stray"
    theta: float | None = None  # arc parameter for toolpath glints


@dataclass(frozen=True)
class TriangulationResult:
    point: Vec3 | None
    residual: float  # minimum gap between the two sightlines, mm
    baseline: float  # angle between the sightlines, radians
    at_infinity: bool = False


@dataclass(frozen=True)
class RasterParams:
    width: int = 128
    height: int = 128
    mm_per_px: float = 0.25  # orthographic scale
    focal_px: float | None = None  # pinhole focal length; default = height

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise DegenerateGeometryError("raster dimensions must be positive")


@dataclass(frozen=True)
class SimScene:
    """Targets plus the illumination they were designed for."""

    targets: tuple
    light: LightSource
    media: Media = REFLECTION
    stipple_points: tuple[Vec3, ...] = ()


@dataclass(frozen=True)
class GlintMap:
    thetas: tuple[float, ...]
    glints: tuple[tuple[Glint, ...], ...]
    frames: tuple[np.ndarray, ...] | None
    width: int
    height: int
    warnings: tuple[str, ...] = ()


# ---- glint finding ----


def find_glints(
    target,
    eye: Eye,
    light: LightSource,
    media: Media = REFLECTION,
    tol: float = 1e-9,
    stipple_p: Vec3 | None = None,
    dedupe_radius: float = 0.2,
    seed_angle: float = math.radians(5.0),
) -> list[Glint]:
    """All specular glints on ``target`` for one eye.

    Candidate points are seeded where the surface normal lies within
    ``seed_angle`` of the required eta-weighted axis, then refined until the
    normal/axis misalignment drops below ``tol``; refined hits closer than
    ``dedupe_radius`` to an earlier one are dropped.  An empty list is a
    valid answer: the surface is simply dark from that eye.
    """
    if isinstance(target, (list, tuple)):
        found: list[Glint] = []
        for t in target:
            found.extend(
                find_glints(t, eye, light, media, tol, stipple_p, dedupe_radius, seed_angle)
            )
        return _dedupe(found, dedupe_radius)
    if isinstance(target, (ConicSurface, CartesianOval)):
        return _member_glints(target, eye, light, media, tol, stipple_p)
    if isinstance(target, RidgedSurface):
        return _ridging_glints(target, eye, light, media, tol, stipple_p, dedupe_radius)
    if isinstance(target, Mesh):
        return _mesh_glints(target, eye, light, media, tol, stipple_p, dedupe_radius, seed_angle)
    if isinstance(target, Toolpath):
        return _toolpath_glints(target, None, eye, light, media, stipple_p)
    if isinstance(target, StripeArc):
        return _toolpath_glints(target.toolpath, target.stipple.p, eye, light, media, stipple_p)
    if isinstance(target, Striping):
        found = []
        for arc in target.arcs:
            found.extend(_toolpath_glints(arc.toolpath, arc.stipple.p, eye, light, media, stipple_p))
        return _dedupe(found, dedupe_radius)
    raise DomainError(f"cannot search for glints on {type(target).__name__}")


def _dedupe(glints: list[Glint], radius: float) -> list[Glint]:
    kept: list[Glint] = []
    for g in glints:
        if all(norm(g.point - k.point) > radius for k in kept if k.tag == g.tag):
            kept.append(g)
    return kept


def _axis_misalignment(normal: Vec3, axis_raw: Vec3) -> float:
    return norm(np.cross(unit(normal), unit(axis_raw)))


def _sightline_roots(surface: FoliationMember, eye: Eye, p: Vec3, n_grid: int = 4096):
    """Intersections of the (eye, p) sightline with a member's implicit surface."""
    if isinstance(eye, EyeAtInfinity):
        origin, direction = p, eye.direction
    else:
        origin, direction = np.asarray(eye, dtype=float), unit(p - eye)
    scale = max(norm(surface.focus_p - origin), abs(getattr(surface, "k", 1.0)), 1.0)
    ts = np.linspace(-6.0 * scale, 6.0 * scale, n_grid)
    pts = origin + ts[:, None] * direction
    vals = surface.implicit_many(pts)
    roots = []
    for a, b, fa, fb in zip(ts[:-1], ts[1:], vals[:-1], vals[1:]):
        if not (np.isfinite(fa) and np.isfinite(fb)):
            continue
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0:
            lo, hi, flo = float(a), float(b), float(fa)
            for _ in range(90):
                mid = 0.5 * (lo + hi)
                fm = surface.implicit(origin + mid * direction)
                if flo * fm <= 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(0.5 * (lo + hi))
    return origin, direction, roots


def _order_roots_near_eye(eye: Eye, roots):
    # finite eye: smallest positive t first; infinite eye: largest t first
    if isinstance(eye, EyeAtInfinity):
        return sorted(roots, reverse=True)
    return sorted([t for t in roots if t > 1e-9])


def _member_glints(surface, eye, light, media, tol, stipple_p) -> list[Glint]:
    # Both sightline intersections lie on the member, but only the one whose
    # oriented normal bisects light and eye actually glints (on an ellipsoid
    # the ray must pass p before striking the surface).
    p_ref = stipple_p if stipple_p is not None else surface.focus_p
    origin, direction, roots = _sightline_roots(surface, eye, surface.focus_p)
    for t in _order_roots_near_eye(eye, roots):
        pt = origin + t * direction
        n = surface.normal(pt)
        res = _axis_misalignment(n, glint_axis(pt, light, eye, media))
        if res > tol:
            continue
        col = float(np.hypot(*colinearity_residual(pt, p_ref, eye)))
        return [Glint(eye, pt, n, res, col, "imaging")]
    return []


def _ridging_glints(rs, eye, light, media, tol, stipple_p, dedupe_radius) -> list[Glint]:
    p_ref = stipple_p if stipple_p is not None else rs.p
    found: list[Glint] = []
    for ridge in rs.ridges:
        origin, direction, roots = _sightline_roots(ridge.member, eye, rs.p)
        for t in _order_roots_near_eye(eye, roots):
            pt = origin + t * direction
            q, _ = rs.host.nearest(pt)
            rel = q - rs.foot
            r = math.hypot(float(np.dot(rel, rs.e1)), float(np.dot(rel, rs.e2)))
            if not ridge.r_in - 1e-9 <= r <= ridge.r_out + 1e-9:
                continue
            phi = math.atan2(float(np.dot(rel, rs.e2)), float(np.dot(rel, rs.e1)))
            if not any(lo - 1e-12 <= phi <= hi + 1e-12 for lo, hi in ridge.arc_intervals):
                continue
            n = ridge.member.normal(pt)
            res = _axis_misalignment(n, glint_axis(pt, light, eye, media))
            if res > tol:
                continue
            col = float(np.hypot(*colinearity_residual(pt, p_ref, eye)))
            found.append(Glint(eye, pt, n, res, col, "imaging"))
            break  # nearest valid hit on this ridge; farther ones are occluded
    return _dedupe(found, dedupe_radius)


def _mesh_glints(mesh, eye, light, media, tol, stipple_p, dedupe_radius, seed_angle) -> list[Glint]:
    found: list[Glint] = []
    seeds_by_band: set[int] = set()
    sin_seed = math.sin(seed_angle)
    for idx in range(len(mesh.vertices)):
        v = mesh.vertices[idx]
        n = mesh.normals[idx]
        res = _axis_misalignment(n, glint_axis(v, light, eye, media))
        if res >= sin_seed:
            continue
        if mesh.vertex_tags[idx] == "backface":
            col = (
                float(np.hypot(*colinearity_residual(v, stipple_p, eye)))
                if stipple_p is not None
                else None
            )
            found.append(Glint(eye, v, n, res, col, "backface-stray"))
        else:
            seeds_by_band.add(mesh.vertex_band[idx])
    if mesh.source is not None:
        for band in sorted(seeds_by_band):
            ridge = mesh.source.ridges[band]
            sub = RidgedSurface(
                host=mesh.source.host,
                p=mesh.source.p,
                light=mesh.source.light,
                media=mesh.source.media,
                foot=mesh.source.foot,
                e1=mesh.source.e1,
                e2=mesh.source.e2,
                delta=mesh.source.delta,
                ridges=(ridge,),
            )
            found.extend(
                _ridging_glints(sub, eye, light, media, tol, stipple_p, dedupe_radius)
            )
    else:
        # no analytic source: report the best-aligned imaging vertices as-is
        for idx in range(len(mesh.vertices)):
            if mesh.vertex_tags[idx] != "imaging":
                continue
            v, n = mesh.vertices[idx], mesh.normals[idx]
            res = _axis_misalignment(n, glint_axis(v, light, eye, media))
            if res < sin_seed:
                col = (
                    float(np.hypot(*colinearity_residual(v, stipple_p, eye)))
                    if stipple_p is not None
                    else None
                )
                found.append(Glint(eye, v, n, res, col, "imaging"))
    return _dedupe(found, dedupe_radius)


def _toolpath_glints(path, design_p, eye, light, media, stipple_p) -> list[Glint]:
    """Roots of <t1, axis> = 0 along the arc: the groove glints where its
    direction is perpendicular to the required reflection axis."""
    p_ref = stipple_p if stipple_p is not None else design_p
    samples = path.samples
    if len(samples) < 2:
        return []

    def alignment(pos: Vec3, t1: Vec3) -> float:
        a = glint_axis(pos, light, eye, media)
        return float(np.dot(unit(t1), unit(a)))

    vals = [alignment(s.position, s.t1) for s in samples]
    found: list[Glint] = []
    for k in range(len(samples) - 1):
        fa, fb = vals[k], vals[k + 1]
        if fa == 0.0:
            u = 0.0
        elif fa * fb < 0:
            lo, hi, flo = 0.0, 1.0, fa

            def h(u: float) -> float:
                pos = samples[k].position * (1 - u) + samples[k + 1].position * u
                t1 = samples[k].t1 * (1 - u) + samples[k + 1].t1 * u
                return alignment(pos, t1)

            for _ in range(60):
                mid = 0.5 * (lo + hi)
                fm = h(mid)
                if flo * fm <= 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            u = 0.5 * (lo + hi)
        else:
            continue
        pos = samples[k].position * (1 - u) + samples[k + 1].position * u
        t1 = samples[k].t1 * (1 - u) + samples[k + 1].t1 * u
        theta = samples[k].theta * (1 - u) + samples[k + 1].theta * u
        axis = unit(glint_axis(pos, light, eye, media))
        res = abs(float(np.dot(unit(t1), axis)))
        col = (
            float(np.hypot(*colinearity_residual(pos, p_ref, eye)))
            if p_ref is not None
            else None
        )
        found.append(Glint(eye, pos, axis, res, col, "imaging", theta=theta))
    return found


# ---- triangulation ----


def triangulate(
    glint_left: Glint, glint_right: Glint, eyes: tuple[Eye, Eye]
) -> TriangulationResult:
    """Least-squares intersection of the two glint sightlines."""
    q1, q2 = glint_left.point, glint_right.point
    d1 = eye_direction_from(q1, eyes[0])
    d2 = eye_direction_from(q2, eyes[1])
    baseline = math.acos(max(-1.0, min(1.0, float(np.dot(d1, d2)))))

    cross = np.cross(d1, d2)
    cn = norm(cross)
    if cn < 1e-12:
        gap = norm(np.cross(q2 - q1, d1))
        return TriangulationResult(None, gap, baseline, at_infinity=True)

    m = np.zeros((3, 3))
    b = np.zeros(3)
    for q, d in ((q1, d1), (q2, d2)):
        proj = np.eye(3) - np.outer(d, d)
        m += proj
        b += proj @ q
    point = np.linalg.solve(m, b)
    residual = abs(float(np.dot(q2 - q1, cross / cn)))
    return TriangulationResult(point, residual, baseline)


# ---- rendering ----


def _project(point: Vec3, eye: Eye, raster: RasterParams) -> tuple[int, int, bool]:
    w, h = raster.width, raster.height
    if isinstance(eye, EyeAtInfinity):
        d = eye.direction
        up = vec3(0.0, 1.0, 0.0)
        right = np.cross(up, d)
        right = right / max(norm(right), 1e-12)
        u = float(np.dot(point, right)) / raster.mm_per_px + 0.5 * w
        v = 0.5 * h - float(np.dot(point, up)) / raster.mm_per_px
    else:
        focal = raster.focal_px if raster.focal_px is not None else float(h)
        depth = float(eye[2] - point[2])
        if depth <= 1e-9:
            return 0, 0, False
        u = 0.5 * w + focal * float(point[0] - eye[0]) / depth
        v = 0.5 * h - focal * float(point[1] - eye[1]) / depth
    iu, iv = int(round(u)), int(round(v))
    return iu, iv, (0 <= iu < w and 0 <= iv < h)


def render_glintmap(
    scene: SimScene,
    view: ViewPath,
    raster: RasterParams = RasterParams(),
    tol: float = 1e-6,
    dedupe_radius: float = 0.2,
) -> GlintMap:
    """Sweep the view path, splat per-view glints into grayscale frames."""
    thetas = view_thetas(view)
    all_glints: list[tuple[Glint, ...]] = []
    frames: list[np.ndarray] = []
    warnings: list[str] = []
    clipped = False
    for theta in thetas:
        eye = view.eye_at(float(theta))
        glints = find_glints(
            list(scene.targets),
            eye,
            scene.light,
            scene.media,
            tol=tol,
            dedupe_radius=dedupe_radius,
        )
        all_glints.append(tuple(glints))
        frame = np.zeros((raster.height, raster.width), dtype=np.uint8)
        for g in glints:
            if g.tag != "imaging":
                continue
            u, v, ok = _project(g.point, eye, raster)
            if not ok:
                clipped = True
                continue
            frame[v, u] = 255
        frames.append(frame)
    if clipped:
        warnings.append("some glints projected outside the raster (projection clipped)")
    return GlintMap(
        thetas=tuple(float(t) for t in thetas),
        glints=tuple(all_glints),
        frames=tuple(frames),
        width=raster.width,
        height=raster.height,
        warnings=tuple(warnings),
    )
