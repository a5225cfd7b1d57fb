"""Horizontal-parallax toolpaths, stripings, and the cutting-bit profile.

A glint for a viewpoint at azimuth ``theta`` under an overhead light at
zenith offset ``alpha`` requires the optical normal ``(sin t, cos a,
cos t + sin a)``.  The component of the ideal tangent space that conforms to
the host, ``t1 = n x N``, integrates into toolpaths: closed-form hyperbolas
on flat hosts, numeric curves elsewhere.  The orthogonal component ``t2``
fixes the cutting-bit profile.  A striping selects non-overlapping arcs of
the toolpath foliation, one per stipple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateGeometryError,
    DomainError,
    SightlineMissError,
    UnmachinableProfileError,
    UnsupportedConfigurationError,
)
from .geom import (
    DirectionalLight,
    HostSurface,
    InfinityView,
    LightSource,
    PlaneHost,
    Vec3,
    ViewPath,
    eye_direction_from,
    light_direction_from,
    norm,
    sightline_host_intersection,
    unit,
    vec3,
)
from .ridging import FabricationParams

DEFAULT_STEP = math.radians(0.1)
Z_HAT = np.array([0.0, 0.0, 1.0])
Y_HAT = np.array([0.0, 1.0, 0.0])


@dataclass(frozen=True)
class Stipple:
    """One virtual scene point with its visibility window and placement rank."""

    p: Vec3
    weight: float = 1.0
    window: tuple[float, float] = (-0.25 * math.pi, 0.25 * math.pi)
    priority: int = 0
    stipple_id: int = 0

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise DegenerateGeometryError("stipple weight must lie in [0, 1]")
        if not self.window[0] < self.window[1]:
            raise DegenerateGeometryError("stipple visibility window must be nonempty")


@dataclass(frozen=True)
class ToolpathSample:
    theta: float
    position: Vec3
    t1: Vec3
    axis: Vec3  # unnormalized design glint normal at this theta


@dataclass(frozen=True)
class Toolpath:
    """Sampled space curve theta -> (position, conforming tangent)."""

    samples: tuple[ToolpathSample, ...]
    c0: float
    c1: float
    host: HostSurface | None = None
    stipple_id: int | None = None
    breaks: tuple[int, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def thetas(self) -> np.ndarray:
        return np.array([s.theta for s in self.samples])

    @property
    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.samples])

    def clipped(self, theta_a: float, theta_b: float) -> "Toolpath":
        kept = tuple(s for s in self.samples if theta_a - 1e-12 <= s.theta <= theta_b + 1e-12)
        return Toolpath(kept, self.c0, self.c1, self.host, self.stipple_id, (), self.warnings)


@dataclass(frozen=True)
class StripeArc:
    toolpath: Toolpath
    theta_a: float
    theta_b: float
    stipple: Stipple


@dataclass(frozen=True)
class Striping:
    """Accepted non-overlapping arcs plus the stipples that could not be placed."""

    arcs: tuple[StripeArc, ...]
    fab: FabricationParams
    rejected: tuple[tuple[Stipple, str], ...] = ()


@dataclass(frozen=True)
class BitProfile:
    """Cutting-bit meridian as (depth, radius) samples, radius nonincreasing with depth."""

    points: tuple[tuple[float, float], ...]
    angle_interval: tuple[float, float]  # radians, [min, max] angle(N, t2)

    def covers(self, angle: float, tol: float = 1e-9) -> bool:
        lo, hi = self.angle_interval
        return lo - tol <= angle <= hi + tol


@dataclass(frozen=True)
class ArcFit:
    """Least-squares circle through toolpath samples (plane-projected)."""

    center: Vec3 | None
    radius: float
    max_deviation: float
    is_line: bool = False


# ---- tangent fields ----


def glint_normal_raw(theta: float, alpha: float) -> Vec3:
    """Unnormalized optical normal (sin t, cos a, cos t + sin a)."""
    return vec3(math.sin(theta), math.cos(alpha), math.cos(theta) + math.sin(alpha))


def conforming_tangent(theta: float, alpha: float, n_host: Vec3 = Z_HAT) -> Vec3:
    """Host-conforming tangent t1 = n x N; (cos a, -sin t, 0) on the wall frame.

    Returns the zero vector when the glint normal is parallel to the host
    normal (the degenerate retro configuration).
    """
    t1 = np.cross(glint_normal_raw(theta, alpha), n_host)
    if norm(t1) < 1e-12:
        return np.zeros(3)
    return t1


def orthogonal_tangent(theta: float, alpha: float) -> Vec3:
    """Orthogonal tangent t2 = t1 x n, scaled to (-sin t, -cos a, ...)."""
    denom = math.cos(theta) + math.sin(alpha)
    if abs(denom) < 1e-12:
        raise DomainError("orthogonal tangent pole: cos(theta) + sin(alpha) = 0")
    return vec3(
        -math.sin(theta),
        -math.cos(alpha),
        (math.cos(alpha) ** 2 + math.sin(theta) ** 2) / denom,
    )


def tangent_normal_angle(theta: float, alpha: float) -> float:
    """Angle between the host normal and t2 (the bit's required flank angle)."""
    t2 = orthogonal_tangent(theta, alpha)
    return math.atan2(math.hypot(t2[0], t2[1]), t2[2])


# ---- toolpaths ----


def hyperbolic_toolpath(
    p_z: float,
    alpha: float,
    c0: float,
    theta_range: tuple[float, float],
    step: float = DEFAULT_STEP,
) -> Toolpath:
    """Closed-form flat-host toolpath x = -p_z tan t, y = p_z sec a sec t + C0.

    Local wall frame: the stipple sits at (0, 0, p_z) and the specularity
    curve runs along y = 0 on the host plane z = 0.
    """
    lo, hi = theta_range
    if p_z == 0:
        raise DegenerateGeometryError("p_z must be nonzero for the hyperbolic toolpath")
    if not lo < hi:
        raise DomainError("empty theta range")
    if max(abs(lo), abs(hi)) >= 0.5 * math.pi - 1e-9:
        raise DomainError("theta range touches +-90 degrees")
    if step <= 0:
        raise DomainError("step must be positive")

    n = max(1, int(math.ceil((hi - lo) / step - 1e-12)))
    sec_a = 1.0 / math.cos(alpha)
    samples = []
    for k in range(n + 1):
        t = lo + (hi - lo) * k / n
        pos = vec3(-p_z * math.tan(t), p_z * sec_a / math.cos(t) + c0, 0.0)
        samples.append(
            ToolpathSample(t, pos, conforming_tangent(t, alpha), glint_normal_raw(t, alpha))
        )
    return Toolpath(tuple(samples), c0, 0.0, PlaneHost())


def _specular_x(host: HostSurface, view: ViewPath, p: Vec3):
    """x(theta) of the specularity curve, with an exact derivative when available."""
    def x_of(theta: float) -> float:
        q = sightline_host_intersection(view.eye_at(theta), p, host)
        return float(q[0])

    analytic = (
        isinstance(host, PlaneHost)
        and isinstance(view, InfinityView)
        and abs(view.elevation) < 1e-12
        and abs(float(np.dot(host.normal, Z_HAT)) - 1.0) < 1e-12
    )
    if analytic:
        depth = float(p[2] - host.origin[2])

        def xdot(theta: float) -> float:
            c = math.cos(theta)
            return -depth / (c * c)

    else:
        def xdot(theta: float) -> float:
            # Richardson 5-point stencil; adequate away from the analytic fast path.
            h = 1e-3
            return (
                x_of(theta - 2 * h)
                - 8.0 * x_of(theta - h)
                + 8.0 * x_of(theta + h)
                - x_of(theta + 2 * h)
            ) / (12.0 * h)

    return x_of, xdot


def _host_up(host: HostSurface, q: Vec3) -> Vec3:
    """The host-tangent direction closest to global +y at q."""
    n = host.nearest(q)[1]
    t = Y_HAT - float(np.dot(Y_HAT, n)) * n
    if norm(t) < 1e-9:
        raise DegenerateGeometryError("host normal parallel to +y: no vertical tangent")
    return unit(t)


def integrate_toolpath(
    host: HostSurface,
    stipple: Stipple,
    light: LightSource,
    view: ViewPath,
    c0: float = 0.0,
    c1: float = 0.0,
    step: float = DEFAULT_STEP,
) -> Toolpath:
    """RK4 integration of the conforming tangent field along the specularity curve.

    ``x`` is prescribed by the sightline/host intersection; ``(y, z)`` evolve
    with slope ``(t1_y, t1_z)/t1_x`` times dx/dtheta.  For a directional light
    the integration constant matches the closed form: the path starts at
    vertical gap ``C0 + sign(p) * sec(alpha) * |spec - p|`` above the
    specularity point; for point lights the particular solution is anchored
    on the specularity curve at the range start and C0 offsets it.
    """
    if not hasattr(view, "theta_min"):
        raise UnsupportedConfigurationError(
            "toolpath integration needs an azimuth-parameterized view (orbit or infinity)"
        )
    p = stipple.p
    lo = max(view.theta_min, stipple.window[0])
    hi = min(view.theta_max, stipple.window[1])
    if not lo < hi:
        raise DomainError("stipple window does not intersect the view range")
    if step <= 0:
        raise DomainError("step must be positive")

    sd_p = host.signed_distance(p)
    if abs(sd_p) < 1e-12:
        raise DegenerateGeometryError("stipple lies on the host surface")
    sigma = 1.0 if sd_p > 0 else -1.0

    x_of, xdot = _specular_x(host, view, p)

    q0 = sightline_host_intersection(view.eye_at(lo), p, host)
    if isinstance(light, DirectionalLight):
        gap0 = c0 + sigma * norm(q0 - p) / math.cos(light.alpha)
    else:
        gap0 = c0
    up0 = _host_up(host, q0)
    anchor_probe = q0 + gap0 * up0
    hp, nh = host.nearest(anchor_probe)
    anchor = hp + c1 * nh

    def slope(theta: float, y: float, z: float) -> tuple[float, float] | None:
        pos = vec3(x_of(theta), y, z)
        n_host = host.nearest(pos)[1]
        n_raw = light_direction_from(pos, light) + eye_direction_from(pos, view.eye_at(theta))
        t1 = np.cross(n_raw, n_host)
        nt = norm(t1)
        if nt < 1e-12 or abs(t1[0]) < 1e-12 * nt:
            return None
        dx = xdot(theta)
        return (t1[1] / t1[0] * dx, t1[2] / t1[0] * dx)

    def stored_sample(theta: float, pos: Vec3) -> ToolpathSample:
        n_host = host.nearest(pos)[1]
        n_raw = light_direction_from(pos, light) + eye_direction_from(pos, view.eye_at(theta))
        return ToolpathSample(theta, pos, np.cross(n_raw, n_host), n_raw)

    n_steps = max(1, int(math.ceil((hi - lo) / step - 1e-12)))
    h = (hi - lo) / n_steps
    y, z = float(anchor[1]), float(anchor[2])
    theta = lo
    samples = [stored_sample(theta, vec3(x_of(theta), y, z))]
    breaks: list[int] = []
    warnings: list[str] = []

    for _ in range(n_steps):
        try:
            k1 = slope(theta, y, z)
            k2 = slope(theta + 0.5 * h, y + 0.5 * h * k1[0], z + 0.5 * h * k1[1]) if k1 else None
            k3 = slope(theta + 0.5 * h, y + 0.5 * h * k2[0], z + 0.5 * h * k2[1]) if k2 else None
            k4 = slope(theta + h, y + h * k3[0], z + h * k3[1]) if k3 else None
        except SightlineMissError:
            warnings.append(f"sightline missed the host at theta={theta + h:.6f}; truncated")
            break
        if k4 is None:
            breaks.append(len(samples))
            warnings.append(f"degenerate conforming tangent near theta={theta:.6f}; split")
            theta += h
            continue
        y += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        z += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        theta += h
        samples.append(stored_sample(theta, vec3(x_of(theta), y, z)))

    return Toolpath(
        tuple(samples), c0, c1, host, stipple.stipple_id, tuple(breaks), tuple(warnings)
    )


# ---- striping ----


def _vertical_gap(host: HostSurface, view: ViewPath, p: Vec3, sample: ToolpathSample) -> float:
    """In-host vertical offset between a toolpath sample and the specularity curve."""
    q = sightline_host_intersection(view.eye_at(sample.theta), p, host)
    return float(np.dot(sample.position - q, _host_up(host, q)))


def _gap_at_theta(
    host: HostSurface, view: ViewPath, p: Vec3, path: Toolpath, theta: float
) -> float:
    idx = int(np.argmin(np.abs(path.thetas - theta)))
    return _vertical_gap(host, view, p, path.samples[idx])


def make_striping(
    stipples: list[Stipple],
    light: LightSource,
    host: HostSurface,
    view: ViewPath,
    fab: FabricationParams,
    step: float = DEFAULT_STEP,
) -> Striping:
    """Place one toolpath arc per stipple without destructive overlap.

    C0 puts each arc's colinearity point (where it crosses the stipple's
    specularity curve) at the center of the visibility window; the arc keeps
    the samples inside the bar of half-height ``fab.delta`` around that curve,
    scaled linearly by the stipple weight.  Arcs are accepted greedily in
    (priority, weight) order; an arc whose tool-radius-dilated footprint
    touches an accepted one is rejected.
    """
    if not stipples:
        raise DegenerateGeometryError("striping requires at least one stipple")

    order = sorted(stipples, key=lambda s: (-s.priority, -s.weight, s.stipple_id))
    accepted: list[StripeArc] = []
    rejected: list[tuple[Stipple, str]] = []
    grid = _SegmentGrid(cell=max(4.0 * fab.tool_radius, 2.0))

    for stipple in order:
        lo = max(view.theta_min, stipple.window[0])
        hi = min(view.theta_max, stipple.window[1])
        if not lo < hi:
            rejected.append((stipple, "visibility window outside the view range"))
            continue
        theta_c = 0.5 * (lo + hi)

        try:
            path = _anchored_toolpath(host, stipple, light, view, theta_c, step)
        except (DomainError, DegenerateGeometryError, SightlineMissError) as exc:
            rejected.append((stipple, f"toolpath failed: {exc}"))
            continue

        arc = _bar_clip(host, view, stipple, path, theta_c, fab.delta)
        if arc is None:
            rejected.append((stipple, "empty arc after bar clipping"))
            continue

        pts = arc.toolpath.positions
        if len(pts) < 2:
            rejected.append((stipple, "empty arc after bar clipping"))
            continue
        segs = np.stack([pts[:-1], pts[1:]], axis=1)
        clearance = 2.0 * fab.tool_radius
        hit = grid.first_collision(segs, clearance)
        if hit is not None:
            rejected.append((stipple, f"overlaps accepted stipple {hit}"))
            continue
        grid.insert(segs, stipple.stipple_id)
        accepted.append(arc)

    return Striping(tuple(accepted), fab, tuple(rejected))


def _anchored_toolpath(host, stipple, light, view, theta_c, step) -> Toolpath:
    """Integrate with C0 polished so the specularity crossing sits at theta_c."""
    p = stipple.p
    sd_p = host.signed_distance(p)
    sigma = 1.0 if sd_p > 0 else -1.0
    if isinstance(light, DirectionalLight):
        qc = sightline_host_intersection(view.eye_at(theta_c), p, host)
        c0 = -sigma * norm(qc - p) / math.cos(light.alpha)
    else:
        c0 = 0.0
    path = integrate_toolpath(host, stipple, light, view, c0, 0.0, step)
    for _ in range(3):
        gap = _gap_at_theta(host, view, p, path, theta_c)
        if abs(gap) < 1e-9:
            break
        c0 -= gap
        path = integrate_toolpath(host, stipple, light, view, c0, 0.0, step)
    return path


def _bar_clip(host, view, stipple, path: Toolpath, theta_c: float, bar_half: float):
    """Keep the contiguous run around theta_c inside the specularity bar."""
    gaps = np.array([_vertical_gap(host, view, stipple.p, s) for s in path.samples])
    inside = np.abs(gaps) <= bar_half + 1e-12
    thetas = path.thetas
    ic = int(np.argmin(np.abs(thetas - theta_c)))
    if not inside[ic]:
        return None
    a = ic
    while a > 0 and inside[a - 1]:
        a -= 1
    b = ic
    while b + 1 < len(inside) and inside[b + 1]:
        b += 1
    lo_run, hi_run = thetas[a], thetas[b]
    # linear weight clip about the window center
    w = stipple.weight
    lo_w = theta_c - w * (theta_c - lo_run)
    hi_w = theta_c + w * (hi_run - theta_c)
    clipped = path.clipped(lo_w, hi_w)
    if len(clipped.samples) < 2:
        return None
    return StripeArc(clipped, clipped.samples[0].theta, clipped.samples[-1].theta, stipple)


# ---- overlap testing ----


def segment_pair_distance(p1, p2, q1, q2):
    """Min distance between two 3D segments (vectorized over the first axis)."""
    p1 = np.atleast_2d(p1)
    p2 = np.atleast_2d(p2)
    q1 = np.atleast_2d(q1)
    q2 = np.atleast_2d(q2)
    d1 = p2 - p1
    d2 = q2 - q1
    r = p1 - q1
    a = np.einsum("ij,ij->i", d1, d1)
    e = np.einsum("ij,ij->i", d2, d2)
    f = np.einsum("ij,ij->i", d2, r)
    c = np.einsum("ij,ij->i", d1, r)
    b = np.einsum("ij,ij->i", d1, d2)
    denom = a * e - b * b
    s = np.where(denom > 1e-14, (b * f - c * e) / np.where(denom == 0, 1.0, denom), 0.0)
    s = np.clip(s, 0.0, 1.0)
    t = np.where(e > 1e-14, (b * s + f) / np.where(e == 0, 1.0, e), 0.0)
    t = np.clip(t, 0.0, 1.0)
    # re-clamp s against the clamped t
    s = np.where(a > 1e-14, (b * t - c) / np.where(a == 0, 1.0, a), 0.0)
    s = np.clip(s, 0.0, 1.0)
    closest1 = p1 + s[:, None] * d1
    closest2 = q1 + t[:, None] * d2
    return np.linalg.norm(closest1 - closest2, axis=1)


def polyline_min_distance(pts_a: np.ndarray, pts_b: np.ndarray) -> float:
    """Exact min distance between two sampled polylines (brute force)."""
    sa1, sa2 = pts_a[:-1], pts_a[1:]
    sb1, sb2 = pts_b[:-1], pts_b[1:]
    best = math.inf
    for i in range(len(sa1)):
        d = segment_pair_distance(
            np.broadcast_to(sa1[i], sb1.shape),
            np.broadcast_to(sa2[i], sb1.shape),
            sb1,
            sb2,
        )
        best = min(best, float(d.min()))
    return best


class _SegmentGrid:
    """xy hash of accepted arc segments for exact near-pair retrieval."""

    def __init__(self, cell: float):
        self.cell = cell
        self.cells: dict[tuple[int, int], list[int]] = {}
        self.seg_p1 = []
        self.seg_p2 = []
        self.seg_owner = []

    def _keys(self, p1, p2, pad):
        lo = np.minimum(p1, p2)[:2] - pad
        hi = np.maximum(p1, p2)[:2] + pad
        i0, j0 = int(math.floor(lo[0] / self.cell)), int(math.floor(lo[1] / self.cell))
        i1, j1 = int(math.floor(hi[0] / self.cell)), int(math.floor(hi[1] / self.cell))
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                yield (i, j)

    def insert(self, segs: np.ndarray, owner: int):
        for p1, p2 in segs:
            idx = len(self.seg_p1)
            self.seg_p1.append(p1)
            self.seg_p2.append(p2)
            self.seg_owner.append(owner)
            for key in self._keys(p1, p2, 0.0):
                self.cells.setdefault(key, []).append(idx)

    def first_collision(self, segs: np.ndarray, clearance: float):
        """Owner id of the first accepted segment within ``clearance``, else None."""
        if not self.seg_p1:
            return None
        sp1 = np.array(self.seg_p1)
        sp2 = np.array(self.seg_p2)
        for p1, p2 in segs:
            cand: set[int] = set()
            for key in self._keys(p1, p2, clearance):
                cand.update(self.cells.get(key, ()))
            if not cand:
                continue
            idx = sorted(cand)
            d = segment_pair_distance(
                np.broadcast_to(p1, (len(idx), 3)),
                np.broadcast_to(p2, (len(idx), 3)),
                sp1[idx],
                sp2[idx],
            )
            j = int(np.argmin(d))
            if d[j] < clearance - 1e-12:
                return self.seg_owner[idx[j]]
        return None


# ---- bit profile ----


def bit_profile_for(
    source: Striping | tuple[float, float],
    alpha: float | None = None,
    angle_step: float = math.radians(0.5),
    segment: float = 0.1,
) -> BitProfile:
    """Convex bit meridian covering the angle(N, t2) range of the served arcs.

    ``source`` is either a theta interval (with ``alpha``) evaluated through
    the local-frame tangent formulas, or a Striping whose stored arc samples
    are swept directly.
    """
    if isinstance(source, Striping):
        angles = []
        for arc in source.arcs:
            for s in arc.toolpath.samples:
                n_host = (
                    arc.toolpath.host.nearest(s.position)[1]
                    if arc.toolpath.host is not None
                    else Z_HAT
                )
                t2 = np.cross(s.t1, s.axis)
                nt = norm(t2)
                if nt < 1e-12:
                    continue
                cosang = float(np.dot(t2 / nt, n_host))
                angles.append(math.acos(max(-1.0, min(1.0, abs(cosang)))))
        if not angles:
            raise DomainError("striping has no arc samples to profile")
        lo, hi = min(angles), max(angles)
    else:
        if alpha is None:
            raise DomainError("alpha is required when profiling a theta range")
        ta, tb = source
        if ta > tb:
            raise DomainError("empty theta range")
        n = max(1, int(math.ceil((tb - ta) / angle_step))) if tb > ta else 1
        sweep = [tangent_normal_angle(ta + (tb - ta) * k / n, alpha) for k in range(n + 1)]
        lo, hi = min(sweep), max(sweep)

    if hi - lo >= 0.5 * math.pi or hi >= 0.5 * math.pi:
        raise UnmachinableProfileError(
            f"required flank angles [{math.degrees(lo):.2f}, {math.degrees(hi):.2f}] deg "
            "cannot be ground into one convex bit"
        )

    m = max(1, int(math.ceil((hi - lo) / angle_step - 1e-12)))
    psis = [lo + (hi - lo) * k / m for k in range(m + 1)] if hi > lo else [lo]

    # build from the tip upward: tangent angle ascends, giving a convex flank
    pts = [(0.0, 0.0)]
    d, r = 0.0, 0.0
    for psi in psis:
        d -= segment * math.cos(psi)
        r += segment * math.sin(psi)
        pts.append((d, r))
    top = pts[-1][0]
    shifted = tuple((depth - top, radius) for depth, radius in reversed(pts))
    return BitProfile(shifted, (lo, hi))


# ---- circular arc approximation ----


def circular_arc_fit(
    toolpath: Toolpath, theta_range: tuple[float, float] | None = None
) -> ArcFit:
    """Least-squares circle through the samples in range; deviation is max
    point-to-circle distance.  Colinear samples flag an infinite radius and
    report deviation from the least-squares line instead."""
    samples = toolpath.samples
    if theta_range is not None:
        lo, hi = theta_range
        samples = tuple(s for s in samples if lo - 1e-12 <= s.theta <= hi + 1e-12)
    if len(samples) < 3:
        raise DomainError("circle fit requires at least 3 samples")
    pts = np.array([s.position for s in samples])

    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    u_axis, v_axis = vt[0], vt[1]
    uu = centered @ u_axis
    vv = centered @ v_axis

    # colinear: no spread along the second plane axis
    scale = float(svals[0]) if svals[0] > 0 else 1.0
    if svals[1] <= 1e-9 * scale:
        line_dev = float(np.max(np.abs(vv)))
        return ArcFit(center=None, radius=math.inf, max_deviation=line_dev, is_line=True)

    a_mat = np.column_stack([2.0 * uu, 2.0 * vv, np.ones(len(uu))])
    rhs = uu * uu + vv * vv
    sol, *_ = np.linalg.lstsq(a_mat, rhs, rcond=None)
    uc, vc, c = sol
    radius = math.sqrt(max(c + uc * uc + vc * vc, 0.0))
    if radius > 1e9 * scale:
        dists = np.abs((uu - uc) * vc - (vv - vc) * uc)  # defensive; effectively a line
        return ArcFit(center=None, radius=math.inf, max_deviation=float(dists.max()), is_line=True)
    center3 = centroid + uc * u_axis + vc * v_axis
    dev = np.abs(np.hypot(uu - uc, vv - vc) - radius)
    return ArcFit(center=center3, radius=float(radius), max_deviation=float(dev.max()))
