"""Fresnel-like ridged surfaces conforming to a host within a thin shell.

Each ridge is the piece of one foliation member over an annular band of the
host, bounded laterally by cones from an apex in front of the host and
closed by a conical riser (the non-imaging backface) down to the next band's
member.  Bands follow the revolute symmetry: circles on the host around the
foot of the light/point axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateGeometryError,
    DomainError,
    ResolutionError,
    RootFindError,
    ShellTooThinError,
    UnsupportedConfigurationError,
)
from .foliation import (
    ConicKind,
    ConicSurface,
    classify_member,
    member_through,
    radial_roots,
)
from .geom import (
    REFLECTION,
    DirectionalLight,
    HostSurface,
    LightSource,
    Media,
    PlaneHost,
    PointLight,
    Vec3,
    light_direction_from,
    norm,
    nullspace_basis,
    unit,
)

FULL_INTERVAL = (-math.pi, math.pi)


@dataclass(frozen=True)
class FabricationParams:
    """Knobs shared by the ridging and striping fabricators.

    ``delta`` is the conforming-shell half-thickness; ``pitch`` the radial
    ridge width on the host; ``cone_apex_standoff`` the apex height above the
    band midline (defaults to 10*delta); ``mesh_resolution`` is samples per
    millimeter; ``tool_radius`` is used by striping overlap tests.
    """

    delta: float = 0.5
    pitch: float = 2.0
    cone_apex_standoff: float | None = None
    mesh_resolution: float = 4.0
    tool_radius: float = 0.2

    def __post_init__(self):
        if self.delta <= 0:
            raise DegenerateGeometryError("shell half-thickness delta must be positive")
        if self.pitch <= 0:
            raise DegenerateGeometryError("ridge pitch must be positive")
        if self.mesh_resolution <= 0:
            raise DegenerateGeometryError("mesh resolution must be positive")
        if self.tool_radius < 0:
            raise DegenerateGeometryError("tool radius must be nonnegative")

    @property
    def apex_standoff(self) -> float:
        return self.cone_apex_standoff if self.cone_apex_standoff is not None else 10.0 * self.delta


@dataclass(frozen=True)
class Ridge:
    """One annular band: a foliation member cut by cones and the shell."""

    member: ConicSurface
    r_in: float
    r_out: float
    apex: Vec3
    half_angle_interval: tuple[float, float]
    arc_intervals: tuple[tuple[float, float], ...] = (FULL_INTERVAL,)
    descend: float = 1.0  # how far below the host the cut rays start

    @property
    def k(self) -> float:
        return self.member.k


@dataclass(frozen=True)
class RidgedSurface:
    """Ordered ridges of one stipple's ridging, plus the frame they live in."""

    host: PlaneHost
    p: Vec3
    light: LightSource
    media: Media
    foot: Vec3
    e1: Vec3
    e2: Vec3
    delta: float
    ridges: tuple[Ridge, ...]
    crop_azimuth: tuple[float, float] = FULL_INTERVAL
    crop_elevation: tuple[float, float] = (-0.5 * math.pi, 0.5 * math.pi)
    warnings: tuple[str, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.ridges or all(not r.arc_intervals for r in self.ridges)

    def station_point(self, ridge: Ridge, radius: float, phi: float) -> Vec3:
        """Host point of a band station (radius, azimuth-around-foot)."""
        return self.foot + radius * (math.cos(phi) * self.e1 + math.sin(phi) * self.e2)


@dataclass(frozen=True)
class Mesh:
    """Triangle mesh with imaging/backface tags and analytic vertex normals."""

    vertices: np.ndarray  # (N, 3)
    normals: np.ndarray  # (N, 3)
    triangles: np.ndarray  # (M, 3) int
    face_tags: tuple[str, ...]  # "imaging" | "backface"
    face_band: tuple[int, ...]
    vertex_tags: tuple[str, ...]
    vertex_band: tuple[int, ...]
    source: RidgedSurface | None = None

    @property
    def imaging_area(self) -> float:
        return self._area("imaging")

    @property
    def backface_area(self) -> float:
        return self._area("backface")

    def _area(self, tag: str) -> float:
        total = 0.0
        for tri, t in zip(self.triangles, self.face_tags):
            if t != tag:
                continue
            a, b, c = self.vertices[tri]
            total += 0.5 * norm(np.cross(b - a, c - a))
        return total


# ---- construction ----


def _axis_foot_and_direction(
    p: Vec3, light: LightSource, host: PlaneHost
) -> tuple[Vec3, Vec3]:
    """Foot of the revolute axis on the host and its viewer-side unit direction."""
    n = host.normal
    if isinstance(light, DirectionalLight):
        axis = light.direction
    else:
        axis = light.position - p
        if norm(axis) < 1e-9:
            # Degenerate sphere member: revolve about the host normal through p.
            axis = n
    denom = float(np.dot(axis, n))
    if abs(denom) < 1e-12:
        raise DegenerateGeometryError("foliation axis parallel to the host plane")
    u = unit(axis)
    if float(np.dot(u, n)) < 0:
        u = -u
    t = -host.signed_distance(p) / float(np.dot(u, n))
    return p + t * u, u


def _member_height(member: ConicSurface, x: Vec3, n: Vec3, limit: float) -> float:
    """Signed offset t such that x + t*n lies on the member, |t| <= limit."""
    def f(t: float) -> float:
        return member.implicit(x + t * n)

    t = 0.0
    for _ in range(50):
        ft = f(t)
        g = float(np.dot(member.gradient(x + t * n), n))
        if abs(g) < 1e-14:
            break
        t_new = t - ft / g
        if abs(t_new - t) < 1e-13:
            return t_new if abs(t_new) <= limit else _bisect_height(f, limit)
        t = t_new
        if abs(t) > 4 * limit:
            break
    if abs(t) <= limit and abs(f(t)) < 1e-9:
        return t
    return _bisect_height(f, limit)


def _bisect_height(f, limit: float) -> float:
    ts = np.linspace(-limit, limit, 257)
    vals = [f(t) for t in ts]
    best = None
    for a, b, fa, fb in zip(ts[:-1], ts[1:], vals[:-1], vals[1:]):
        if fa == 0.0 or fa * fb < 0:
            lo, hi, flo = float(a), float(b), fa
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                fm = f(mid)
                if flo * fm <= 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            t = 0.5 * (lo + hi)
            if best is None or abs(t) < abs(best):
                best = t
    if best is None:
        raise RootFindError("foliation member does not cross the shell line")
    return best


def _cone_cut(
    member: ConicSurface, apex: Vec3, hosts: np.ndarray, n: Vec3, descend: float
) -> np.ndarray:
    """Member points on the cone rays apex -> host points.

    Rays are launched from below the shell and run upward so the nearest root
    is always the shell-conforming face, never the far side of a closed
    member.
    """
    dirs = hosts - apex
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    drop = descend / np.abs(dirs @ n)
    origins = hosts + drop[:, None] * dirs
    return radial_roots(member, origins, -dirs, nearest=True)


def build_ridging(
    p: Vec3,
    light: LightSource,
    host: HostSurface,
    fab: FabricationParams,
    crop: tuple[tuple[float, float], tuple[float, float]] | None = None,
    max_radius: float | None = None,
    media: Media = REFLECTION,
    check_stations: int = 24,
) -> RidgedSurface:
    """Build the ridged surface for one virtual point.

    Bands of width ``fab.pitch`` tile the host annularly around the axis
    foot-point out to ``max_radius``.  Each band's member is the foliation
    member through the band midline, which centers its sag in the shell; a
    band whose sag exceeds ``fab.delta`` raises ShellTooThinError with the
    half-thickness that would be required.  When ``max_radius`` is omitted
    the footprint grows until the shell limit (or a generous cap) is hit, so
    the default build is always fabricable.
    """
    if not isinstance(host, PlaneHost):
        raise UnsupportedConfigurationError("ridging is constructed on plane hosts only")
    if not media.is_reflective:
        raise UnsupportedConfigurationError("ridging is a reflective construction")

    kind = classify_member(p, host, light)
    if kind is ConicKind.PARABOLOID and isinstance(light, PointLight):
        raise DegenerateGeometryError(
            "virtual point on the host surface: degenerate parabolic needle"
        )

    sd_p = host.signed_distance(p)
    foot, axis_dir = _axis_foot_and_direction(p, light, host)
    e1, e2 = nullspace_basis(host.normal)

    adaptive = max_radius is None
    if adaptive:
        max_radius = max(8.0 * fab.pitch, 4.0 * abs(sd_p))
    if max_radius <= 0:
        raise DegenerateGeometryError("ridging footprint radius must be positive")

    n_bands = max(1, int(math.ceil(max_radius / fab.pitch - 1e-12)))
    limit = max(8.0 * fab.delta, fab.pitch, abs(sd_p))
    member_kind = kind if kind in (ConicKind.ELLIPSOID, ConicKind.HYPERBOLOID) else None

    ridges: list[Ridge] = []
    warnings: list[str] = []
    phis = np.linspace(-math.pi, math.pi, check_stations, endpoint=False)

    for j in range(n_bands):
        r_in = j * fab.pitch
        r_out = min((j + 1) * fab.pitch, max_radius)
        r_mid = 0.5 * (r_in + r_out)
        q_mid = foot + r_mid * e1
        member = member_through(p, light, q_mid, media, kind=member_kind)

        try:
            sag_mid = _member_height(member, q_mid, host.normal, limit)
            sag_in = _member_height(member, foot + max(r_in, 1e-9) * e1, host.normal, limit)
            sag_out = _member_height(member, foot + r_out * e1, host.normal, limit)
        except RootFindError:
            if adaptive and ridges:
                break
            raise ShellTooThinError(math.inf)

        # cut rays start far enough below the host to clear the whole face
        peak = max(abs(sag_in), abs(sag_mid), abs(sag_out))
        descend = 2.0 * peak + 0.5 * (r_out - r_in) + 1e-6

        # Keep the cone cut steeper than ~45 degrees over the whole band:
        # a low apex over a wide footprint sends rays nearly tangent to the
        # member, which makes the cut ill-posed.
        height = sag_mid + max(fab.apex_standoff, r_out)
        s_axis = height / float(np.dot(axis_dir, host.normal))
        apex = foot + s_axis * axis_dir

        # shell check along the actual cone rays (the geometry that is tooled
        # and meshed); a member that never crosses cannot serve the band
        max_sag = 0.0
        try:
            for r in np.linspace(max(1e-9, r_in), r_out, 7):
                hosts = np.array(
                    [foot + r * (math.cos(phi) * e1 + math.sin(phi) * e2) for phi in phis]
                )
                pts = _cone_cut(member, apex, hosts, host.normal, descend)
                sag = np.max(np.abs([host.signed_distance(pt) for pt in pts]))
                max_sag = max(max_sag, float(sag))
        except (RootFindError, DomainError):
            max_sag = math.inf
        if max_sag > fab.delta:
            if adaptive and ridges:
                break  # footprint reached the fabricable limit
            raise ShellTooThinError(max_sag)

        if fab.pitch <= 2.0 * abs(sag_out - sag_in):
            warnings.append(
                f"band {j}: pitch {fab.pitch:.4g} <= 2x sag variation "
                f"{abs(sag_out - sag_in):.4g}"
            )

        beta_in = _cone_half_angle(apex, foot + max(r_in, 1e-9) * e1, axis_dir)
        beta_out = _cone_half_angle(apex, foot + r_out * e1, axis_dir)
        ridges.append(
            Ridge(member, r_in, r_out, apex, (beta_in, beta_out), descend=descend)
        )

    rs = RidgedSurface(
        host=host,
        p=p,
        light=light,
        media=media,
        foot=foot,
        e1=e1,
        e2=e2,
        delta=fab.delta,
        ridges=tuple(ridges),
        warnings=tuple(warnings),
    )
    if crop is not None:
        rs = crop_ridging(rs, crop[0], crop[1])
    return rs


def _cone_half_angle(apex: Vec3, rim_point: Vec3, axis_dir: Vec3) -> float:
    d = unit(rim_point - apex)
    c = float(np.clip(np.dot(d, -axis_dir), -1.0, 1.0))
    return math.acos(c)


# ---- cropping ----


def _exit_direction(point: Vec3, normal: Vec3, light: LightSource) -> Vec3:
    l_hat = light_direction_from(point, light)
    return 2.0 * float(np.dot(l_hat, normal)) * normal - l_hat


def _merge_stations(phis: np.ndarray, keep: np.ndarray) -> tuple[tuple[float, float], ...]:
    """Merge consecutive retained stations (circular) into azimuth intervals."""
    if keep.all():
        return (FULL_INTERVAL,)
    if not keep.any():
        return ()
    n = len(phis)
    half = math.pi / n  # stations tile 2*pi/n each
    runs = []
    idx = 0
    while idx < n:
        if keep[idx]:
            start = idx
            while idx < n and keep[idx]:
                idx += 1
            runs.append((start, idx - 1))
        else:
            idx += 1
    # join a run that wraps past the -pi/pi seam
    if len(runs) > 1 and runs[0][0] == 0 and runs[-1][1] == n - 1:
        last = runs.pop()
        runs[0] = (last[0] - n, runs[0][1])
    out = []
    for a, b in runs:
        lo = phis[a] - half if a >= 0 else phis[a + n] - 2.0 * math.pi - half
        out.append((lo, phis[b] + half))
    return tuple(out)


def _interval_intersect(
    intervals: tuple[tuple[float, float], ...], other: tuple[tuple[float, float], ...]
) -> tuple[tuple[float, float], ...]:
    out = []
    for a0, a1 in intervals:
        for b0, b1 in other:
            lo, hi = max(a0, b0), min(a1, b1)
            if lo < hi:
                out.append((lo, hi))
    return tuple(out)


def crop_ridging(
    rs: RidgedSurface,
    azimuth: tuple[float, float],
    elevation: tuple[float, float],
) -> RidgedSurface:
    """Retain the imaging area whose reflected sightlines exit inside the windows."""
    if not azimuth[0] < azimuth[1] or not elevation[0] < elevation[1]:
        raise DegenerateGeometryError("crop intervals must be nonempty")

    full_az = azimuth[0] <= -math.pi and azimuth[1] >= math.pi
    full_el = elevation[0] <= -0.5 * math.pi and elevation[1] >= 0.5 * math.pi
    if full_az and full_el:
        return rs

    n_st = 180
    phis = np.linspace(-math.pi, math.pi, n_st, endpoint=False) + math.pi / n_st
    limit = max(8.0 * rs.delta, 1.0)
    new_ridges = []
    warnings = list(rs.warnings)
    for ridge in rs.ridges:
        r_mid = 0.5 * (ridge.r_in + ridge.r_out)
        keep = np.zeros(n_st, dtype=bool)
        for idx, phi in enumerate(phis):
            x = rs.station_point(ridge, r_mid, phi)
            sag = _member_height(ridge.member, x, rs.host.normal, limit)
            pt = x + sag * rs.host.normal
            e = _exit_direction(pt, ridge.member.normal(pt), rs.light)
            theta = math.atan2(e[0], e[2])
            phi_el = math.asin(max(-1.0, min(1.0, e[1])))
            keep[idx] = (
                azimuth[0] <= theta <= azimuth[1] and elevation[0] <= phi_el <= elevation[1]
            )
        retained = _merge_stations(phis, keep)
        retained = _interval_intersect(ridge.arc_intervals, retained)
        if retained:
            new_ridges.append(
                Ridge(
                    ridge.member,
                    ridge.r_in,
                    ridge.r_out,
                    ridge.apex,
                    ridge.half_angle_interval,
                    retained,
                    descend=ridge.descend,
                )
            )
    if not new_ridges:
        warnings.append("crop removed the entire ridged surface")
    return RidgedSurface(
        host=rs.host,
        p=rs.p,
        light=rs.light,
        media=rs.media,
        foot=rs.foot,
        e1=rs.e1,
        e2=rs.e2,
        delta=rs.delta,
        ridges=tuple(new_ridges),
        crop_azimuth=azimuth,
        crop_elevation=elevation,
        warnings=tuple(warnings),
    )


# ---- meshing ----


def mesh_ridging(rs: RidgedSurface, fab: FabricationParams) -> Mesh:
    """Triangulate a ridged surface; imaging faces carry analytic member normals."""
    if rs.is_empty:
        raise DegenerateGeometryError("cannot mesh an empty ridged surface")
    if fab.pitch * fab.mesh_resolution < 4.0:
        raise ResolutionError(
            f"fewer than 4 samples across pitch "
            f"({fab.pitch * fab.mesh_resolution:.2f}); raise mesh_resolution"
        )

    verts: list[np.ndarray] = []
    normals: list[np.ndarray] = []
    tris: list[tuple[int, int, int]] = []
    face_tags: list[str] = []
    face_band: list[int] = []
    vert_tags: list[str] = []
    vert_band: list[int] = []

    n = rs.host.normal

    def add_vertex(pt: Vec3, nrm: Vec3, tag: str, band: int) -> int:
        verts.append(np.asarray(pt, dtype=float))
        normals.append(np.asarray(nrm, dtype=float))
        vert_tags.append(tag)
        vert_band.append(band)
        return len(verts) - 1

    for band_idx, ridge in enumerate(rs.ridges):
        width = ridge.r_out - ridge.r_in
        n_rad = max(4, int(math.ceil(width * fab.mesh_resolution))) + 1
        radii = np.linspace(ridge.r_in, ridge.r_out, n_rad)
        next_member = (
            rs.ridges[band_idx + 1].member if band_idx + 1 < len(rs.ridges) else None
        )
        for lo, hi in ridge.arc_intervals:
            arc_len = (hi - lo) * max(ridge.r_out, 1e-6)
            closed = hi - lo >= 2 * math.pi - 1e-12
            n_az = max(8, int(math.ceil(arc_len * fab.mesh_resolution)))
            phis = np.linspace(lo, hi, n_az, endpoint=not closed)
            n_cols = len(phis)

            # imaging grid: the member cut along cone rays from the apex
            descend = ridge.descend
            ring_ids: list[list[int]] = []
            for r in radii:
                if r < 1e-9:
                    # collapsed inner ring at the axis foot
                    pt = _cone_cut(ridge.member, ridge.apex, rs.foot.reshape(1, 3), n, descend)[0]
                    vid = add_vertex(pt, ridge.member.normal(pt), "imaging", band_idx)
                    ring_ids.append([vid] * n_cols)
                    continue
                hosts = np.array(
                    [rs.foot + r * (math.cos(f) * rs.e1 + math.sin(f) * rs.e2) for f in phis]
                )
                pts = _cone_cut(ridge.member, ridge.apex, hosts, n, descend)
                ids = [
                    add_vertex(pt, ridge.member.normal(pt), "imaging", band_idx) for pt in pts
                ]
                ring_ids.append(ids)

            def col(ids_row, c):
                return ids_row[c % n_cols] if closed else ids_row[c]

            n_seg = n_cols if closed else n_cols - 1
            for ri in range(n_rad - 1):
                inner, outer = ring_ids[ri], ring_ids[ri + 1]
                for c in range(n_seg):
                    a, b = col(inner, c), col(inner, c + 1)
                    d0, d1 = col(outer, c), col(outer, c + 1)
                    if a != b:
                        tris.append((a, b, d1))
                        face_tags.append("imaging")
                        face_band.append(band_idx)
                    tris.append((a, d1, d0))
                    face_tags.append("imaging")
                    face_band.append(band_idx)

            # backface riser: outer rim down to the next member (or the host)
            rim = ring_ids[-1]
            rim_pts = [verts[col(rim, c)] for c in range(n_cols)]
            lower_ids = []
            for c in range(n_cols):
                top = rim_pts[c]
                d = unit(top - ridge.apex)
                if next_member is not None:
                    drop = descend / abs(float(np.dot(d, n)))
                    origin = (top + drop * d).reshape(1, 3)
                    low = radial_roots(next_member, origin, np.array([-d]), nearest=True)[0]
                else:
                    t = -rs.host.signed_distance(ridge.apex) / float(np.dot(d, n))
                    low = ridge.apex + t * d
                phi = phis[c]
                tangent = -math.sin(phi) * rs.e1 + math.cos(phi) * rs.e2
                bn = np.cross(tangent, d)
                bn = unit(bn) if norm(bn) > 1e-12 else n
                if float(np.dot(bn, top - rs.foot)) < 0:
                    bn = -bn
                lower_ids.append(add_vertex(low, bn, "backface", band_idx))
            for c in range(n_seg):
                a, b = col(rim, c), col(rim, c + 1)
                d0 = lower_ids[c % n_cols] if closed else lower_ids[c]
                d1 = lower_ids[(c + 1) % n_cols] if closed else lower_ids[c + 1]
                if norm(verts[d0] - verts[a]) < 1e-12 and norm(verts[d1] - verts[b]) < 1e-12:
                    continue
                tris.append((a, d1, b))
                face_tags.append("backface")
                face_band.append(band_idx)
                tris.append((a, d0, d1))
                face_tags.append("backface")
                face_band.append(band_idx)

    vertices = np.array(verts) if verts else np.zeros((0, 3))
    vnormals = np.array(normals) if normals else np.zeros((0, 3))
    triangles = np.array(tris, dtype=int) if tris else np.zeros((0, 3), dtype=int)

    # orient imaging winding with the analytic normals
    for idx, tri in enumerate(triangles):
        a, b, c = vertices[tri]
        fn = np.cross(b - a, c - a)
        ref = vnormals[tri[0]]
        if float(np.dot(fn, ref)) < 0:
            triangles[idx] = tri[[0, 2, 1]]

    return Mesh(
        vertices=vertices,
        normals=vnormals,
        triangles=triangles,
        face_tags=tuple(face_tags),
        face_band=tuple(face_band),
        vertex_tags=tuple(vert_tags),
        vertex_band=tuple(vert_band),
        source=rs,
    )
