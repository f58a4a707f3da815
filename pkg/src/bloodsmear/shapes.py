"""Contour tracing and cell shape detection on edge masks.

The detection route is: trace connected edge pixels into ordered contours,
accept near-circular closed contours directly, and push everything else
through curve-segment splitting, pairwise merging, and a direct least-squares
ellipse fit. Coordinates are (x, y) with y growing downward; masks index as
[y, x].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .raster import BinaryMask

# walk preference: E, SE, S, SW, W, NW, N, NE as (dx, dy)
_NEIGHBOR_ORDER = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))


class ShapeError(ValueError):
    """Raised for contours or parameters a shape operation cannot accept."""


class EllipseFitError(ShapeError):
    """Raised when a point set does not determine a real ellipse."""


@dataclass(frozen=True)
class Contour:
    """Ordered chain of edge pixels; consecutive points are 8-adjacent.

    A pixel may appear more than once when the chain has to retreat through
    already-visited pixels to reach a side branch. `closed` means the first
    and last points are themselves 8-adjacent.
    """

    points: np.ndarray  # (n, 2) int64, columns x, y

    def __post_init__(self):
        pts = self.points
        if not isinstance(pts, np.ndarray) or pts.ndim != 2 or pts.shape[1] != 2:
            raise ShapeError("expected points of shape (n, 2)")
        if len(pts) == 0:
            raise ShapeError("contour cannot be empty")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        """(min_x, min_y, max_x, max_y)."""
        mn = self.points.min(axis=0)
        mx = self.points.max(axis=0)
        return int(mn[0]), int(mn[1]), int(mx[0]), int(mx[1])

    @property
    def height(self) -> int:
        """Vertical extent max_y - min_y."""
        bb = self.bbox
        return bb[3] - bb[1]

    @property
    def closed(self) -> bool:
        if len(self.points) < 4:
            return False
        dx, dy = np.abs(self.points[0] - self.points[-1])
        return max(int(dx), int(dy)) <= 1

    def validate(self) -> None:
        """Check 8-adjacency of every consecutive pair; raises ShapeError."""
        steps = np.abs(np.diff(self.points, axis=0))
        if len(steps) and int(steps.max()) > 1:
            bad = int(np.argmax(steps.max(axis=1) > 1))
            raise ShapeError(f"points {bad} and {bad + 1} are not 8-adjacent")


def _components(pixels: set[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    """8-connected components, ordered by topmost-then-leftmost pixel."""
    seen: set[tuple[int, int]] = set()
    comps = []
    for start in sorted(pixels, key=lambda p: (p[1], p[0])):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        frontier = [start]
        while frontier:
            x, y = frontier.pop()
            for dx, dy in _NEIGHBOR_ORDER:
                nb = (x + dx, y + dy)
                if nb in pixels and nb not in seen:
                    seen.add(nb)
                    comp.append(nb)
                    frontier.append(nb)
        comps.append(comp)
    return comps


def _ordered_walk(pixels: set[tuple[int, int]], start: tuple[int, int]) -> list[tuple[int, int]]:
    """Depth-first walk emitting an 8-adjacent chain that covers `pixels`.

    When the walk has to continue from an ancestor it first emits the retreat
    path back through visited pixels, so consecutive output points always
    stay 8-adjacent. A plain ring is emitted exactly once around.
    """
    order = [start]
    visited = {start}
    parent: dict[tuple[int, int], tuple[int, int] | None] = {start: None}
    stack = [start]
    while stack:
        cur = stack[-1]
        nxt = None
        for dx, dy in _NEIGHBOR_ORDER:
            cand = (cur[0] + dx, cur[1] + dy)
            if cand in pixels and cand not in visited:
                nxt = cand
                break
        if nxt is None:
            stack.pop()
            continue
        if order[-1] != cur:
            node = parent[order[-1]]
            while node != cur:
                order.append(node)  # retreat through ancestors
                node = parent[node]
            order.append(cur)
        parent[nxt] = cur
        visited.add(nxt)
        stack.append(nxt)
        order.append(nxt)
    return order


def trace_contours(edges: BinaryMask) -> list[Contour]:
    """Extract one ordered contour per 8-connected edge component.

    Contours are sorted by their topmost point (leftmost on ties) and each
    chain starts at that pixel.
    """
    ys, xs = np.nonzero(edges.bits)
    pixels = set(zip(xs.tolist(), ys.tolist()))
    contours = []
    for comp in _components(pixels):
        comp_set = set(comp)
        start = min(comp_set, key=lambda p: (p[1], p[0]))
        walk = _ordered_walk(comp_set, start)
        contours.append(Contour(np.array(walk, dtype=np.int64)))
    return contours


def _locally_connected(nbrs: list[tuple[int, int]]) -> bool:
    """True when the pixels are mutually reachable through 8-adjacency."""
    if not nbrs:
        return False
    seen = {nbrs[0]}
    stack = [nbrs[0]]
    while stack:
        u = stack.pop()
        for v in nbrs:
            if v not in seen and max(abs(u[0] - v[0]), abs(u[1] - v[1])) <= 1:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(nbrs)


def tidy_pixels(pixels: set[tuple[int, int]]) -> set[tuple[int, int]]:
    """Thin staircase artifacts out of a curve's pixel set.

    Edge masks from quantized non-maximum suppression carry two-pixel
    "elbows" where the direction bin flips; those extra pixels read as bogus
    junctions downstream. A pixel is dropped when its remaining neighbors
    stay mutually 8-connected without it, which provably cannot disconnect
    the set. Deletion order is fixed (row-major, re-checked per pass), so the
    result is deterministic. Endpoints (single-neighbor pixels) never go.
    """
    out = set(pixels)
    changed = True
    while changed:
        changed = False
        for p in sorted(out, key=lambda q: (q[1], q[0])):
            nbrs = [
                (p[0] + dx, p[1] + dy)
                for dx, dy in _NEIGHBOR_ORDER
                if (p[0] + dx, p[1] + dy) in out
            ]
            if len(nbrs) >= 2 and _locally_connected(nbrs):
                out.discard(p)
                changed = True
    return out


def _clean_contour(contour: Contour) -> Contour:
    """Re-trace a contour after tidying; gives reliable closed/ring structure."""
    pixels = tidy_pixels({(int(x), int(y)) for x, y in contour.points})
    start = min(pixels, key=lambda p: (p[1], p[0]))
    return Contour(np.array(_ordered_walk(pixels, start), dtype=np.int64))


def circle_test(contour: Contour, tolerance_pct: float = 30.0) -> bool:
    """Accept a closed contour whose radii all fit a band around height/2.

    With the contour's vertical extent H, the allowed diameters are
    H -/+ (H/100)*tolerance, i.e. every point's distance from the bounding
    box center must lie within [H*(100-tol)/200, H*(100+tol)/200].
    """
    if not (0 <= tolerance_pct < 100):
        raise ShapeError(f"tolerance must lie in [0, 100), got {tolerance_pct}")
    if not contour.closed:
        raise ShapeError("circle test requires a closed contour")
    min_x, min_y, max_x, max_y = contour.bbox
    h = max_y - min_y
    if h <= 0:
        raise ShapeError("contour has no vertical extent")
    center = np.array([(min_x + max_x) / 2.0, (min_y + max_y) / 2.0])
    radii = np.hypot(*(contour.points.astype(np.float64) - center).T)
    r_lo = h * (100.0 - tolerance_pct) / 200.0
    r_hi = h * (100.0 + tolerance_pct) / 200.0
    return bool((radii >= r_lo).all() and (radii <= r_hi).all())


@dataclass(frozen=True)
class CurveSegment:
    """A junction-free, corner-free piece of a contour with end tangents.

    Tangent angles are line slopes normalized to (-pi/2, pi/2]; a segment has
    no sense of travel direction, so tangents are modulo pi.
    """

    points: np.ndarray  # (n, 2) int64
    tangent_a: float  # at points[0]
    tangent_b: float  # at points[-1]

    def __post_init__(self):
        if len(self.points) < 2:
            raise ShapeError("curve segment needs at least two points")
        for t in (self.tangent_a, self.tangent_b):
            if not (-math.pi / 2 < t <= math.pi / 2 + 1e-12):
                raise ShapeError(f"tangent {t} outside (-pi/2, pi/2]")

    @property
    def end_a(self) -> np.ndarray:
        return self.points[0]

    @property
    def end_b(self) -> np.ndarray:
        return self.points[-1]


def _normalize_mod_pi(theta: float) -> float:
    """Map any angle to (-pi/2, pi/2]."""
    theta = theta % math.pi  # [0, pi)
    if theta > math.pi / 2:
        theta -= math.pi
    return theta


def _endpoint_tangent(points: np.ndarray) -> float:
    """Dominant direction of a short run of points, via the covariance axis."""
    pts = points.astype(np.float64)
    centered = pts - pts.mean(axis=0)
    cov = centered.T @ centered
    evals, evecs = np.linalg.eigh(cov)
    v = evecs[:, int(np.argmax(evals))]
    return _normalize_mod_pi(math.atan2(float(v[1]), float(v[0])))


def _turn_angles(chain: np.ndarray, k: int, wrap: bool) -> np.ndarray:
    """Turning angle at each index using points k before and after.

    Indices without a full window (open chains only) get angle 0.
    """
    n = len(chain)
    angles = np.zeros(n, dtype=np.float64)
    idx = range(n) if wrap else range(k, n - k)
    for i in idx:
        p_prev = chain[(i - k) % n] if wrap else chain[i - k]
        p_next = chain[(i + k) % n] if wrap else chain[i + k]
        v1 = chain[i] - p_prev
        v2 = p_next - chain[i]
        n1 = math.hypot(*map(float, v1))
        n2 = math.hypot(*map(float, v2))
        if n1 == 0 or n2 == 0:
            continue
        cosang = (float(v1[0]) * float(v2[0]) + float(v1[1]) * float(v2[1])) / (n1 * n2)
        angles[i] = math.acos(max(-1.0, min(1.0, cosang)))
    return angles


def _corner_indices(angles: np.ndarray, threshold_rad: float, wrap: bool) -> list[int]:
    """Local maxima of runs of above-threshold turning angles."""
    over = angles > threshold_rad
    if not over.any():
        return []
    n = len(angles)
    corners = []
    if wrap and over.all():
        return [int(np.argmax(angles))]
    # walk contiguous runs; for wrapped chains rotate so a run never straddles 0
    start_shift = 0
    if wrap:
        off = np.nonzero(~over)[0]
        start_shift = int(off[0])
        over = np.roll(over, -start_shift)
        angles = np.roll(angles, -start_shift)
    i = 0
    while i < n:
        if not over[i]:
            i += 1
            continue
        j = i
        while j < n and over[j]:
            j += 1
        run = slice(i, j)
        best = i + int(np.argmax(angles[run]))
        corners.append((best + start_shift) % n)
        i = j
    return sorted(corners)


def _chain_pieces(pixels: set[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    """Split a pixel set at junctions and return ordered junction-free chains."""
    degree = {}
    for p in pixels:
        degree[p] = sum(
            (p[0] + dx, p[1] + dy) in pixels for dx, dy in _NEIGHBOR_ORDER
        )
    junctions = {p for p, d in degree.items() if d >= 3}
    rest = pixels - junctions
    chains = []
    for comp in _components(rest):
        comp_set = set(comp)
        ends = [
            p
            for p in comp_set
            if sum((p[0] + dx, p[1] + dy) in comp_set for dx, dy in _NEIGHBOR_ORDER) <= 1
        ]
        if ends:
            start = min(ends, key=lambda p: (p[1], p[0]))
        else:
            start = min(comp_set, key=lambda p: (p[1], p[0]))
        chains.append(_ordered_walk(comp_set, start))
    return chains


def split_curve_segments(
    contour: Contour,
    *,
    corner_window: int = 5,
    corner_angle_deg: float = 60.0,
    min_points: int = 3,
    tangent_points: int = 5,
) -> list[CurveSegment]:
    """Break a contour into smooth curve segments.

    Junction pixels (three or more neighbors) are removed first, cutting the
    chain wherever curves cross; the remaining pieces are then cut at corner
    points where the turning angle over the window exceeds the threshold.
    Pieces shorter than `min_points` are discarded. End tangents come from a
    straight-line fit through the `tangent_points` pixels nearest each end.
    """
    if corner_window < 3 or corner_window % 2 == 0:
        raise ShapeError(f"corner window must be odd and >= 3, got {corner_window}")
    pixels = tidy_pixels({(int(x), int(y)) for x, y in contour.points})
    k = corner_window // 2
    threshold = math.radians(corner_angle_deg)
    segments = []
    for chain in _chain_pieces(pixels):
        arr = np.array(chain, dtype=np.int64)
        ring = (
            len(arr) >= 4
            and max(abs(int(arr[0][0] - arr[-1][0])), abs(int(arr[0][1] - arr[-1][1]))) <= 1
        )
        if len(arr) < 2 * k + 1:
            pieces = [arr]
        else:
            angles = _turn_angles(arr, k, wrap=ring)
            corners = _corner_indices(angles, threshold, wrap=ring)
            pieces = _cut_chain(arr, corners, ring, trim=k)
        for piece in pieces:
            if len(piece) < min_points:
                continue
            m = min(tangent_points, len(piece))
            segments.append(
                CurveSegment(
                    points=piece,
                    tangent_a=_endpoint_tangent(piece[:m]),
                    tangent_b=_endpoint_tangent(piece[-m:]),
                )
            )
    return segments


def _cut_chain(arr: np.ndarray, corners: list[int], ring: bool, trim: int = 0) -> list[np.ndarray]:
    """Cut an ordered chain at corner indices.

    The corner pixel and `trim` pixels on both sides of it are dropped: the
    turning maximum localizes the corner only to within the window, so the
    pixels around it belong to neither arc cleanly and would skew the end
    tangents of the pieces.
    """
    if not corners:
        return [arr]
    n = len(arr)
    pieces = []
    if ring:
        for a, b in zip(corners, corners[1:] + [corners[0] + n]):
            lo, hi = a + trim + 1, b - trim - 1
            if hi >= lo:
                pieces.append(arr[[i % n for i in range(lo, hi + 1)]])
    else:
        bounds = [(0, corners[0] - trim - 1)]
        bounds += [
            (a + trim + 1, b - trim - 1) for a, b in zip(corners, corners[1:])
        ]
        bounds.append((corners[-1] + trim + 1, n - 1))
        for lo, hi in bounds:
            if hi >= lo:
                pieces.append(arr[lo : hi + 1])
    return pieces


@dataclass(frozen=True)
class MergeParams:
    """Knobs for the pairwise segment merging measure."""

    distance_th: float = 10.0
    angle_scale: float = math.pi / 2
    mm_cut: float = 0.5

    def __post_init__(self):
        if self.distance_th <= 0 or self.angle_scale <= 0:
            raise ShapeError("distance_th and angle_scale must be positive")
        if not 0 < self.mm_cut <= 1:
            raise ShapeError(f"mm_cut must lie in (0, 1], got {self.mm_cut}")


def merging_measure(si: CurveSegment, sj: CurveSegment, params: MergeParams = MergeParams()) -> float:
    """Pairwise score MM = D * Theta in [0, 1].

    D is 1 when the closest endpoint pair sits under the distance threshold,
    else 0. Theta = 1 / (1 + |ti - tj| / c) compares the tangents at that
    closest pair; the tangent gap is taken literally on (-pi/2, pi/2] angles,
    so two segments meeting at right angles score Theta = 0.5. Distance ties
    resolve to the pair with the smaller tangent gap, keeping the measure
    symmetric.
    """
    candidates = []
    for p, tp in ((si.end_a, si.tangent_a), (si.end_b, si.tangent_b)):
        for q, tq in ((sj.end_a, sj.tangent_a), (sj.end_b, sj.tangent_b)):
            d = math.hypot(float(p[0] - q[0]), float(p[1] - q[1]))
            candidates.append((d, abs(tp - tq)))
    d_min = min(c[0] for c in candidates)
    gap = min(c[1] for c in candidates if c[0] == d_min)
    if d_min >= params.distance_th:
        return 0.0
    return 1.0 / (1.0 + gap / params.angle_scale)


def merge_segments(
    segments: list[CurveSegment], params: MergeParams = MergeParams()
) -> list[list[CurveSegment]]:
    """Group segments by transitive closure of MM >= mm_cut.

    Output order is deterministic: groups sorted by their smallest input
    index, members in input order. Input order does not affect membership.
    """
    n = len(segments)
    root = list(range(n))

    def find(i: int) -> int:
        while root[i] != i:
            root[i] = root[root[i]]
            i = root[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if merging_measure(segments[i], segments[j], params) >= params.mm_cut:
                ri, rj = find(i), find(j)
                if ri != rj:
                    root[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[CurveSegment]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(segments[i])
    return [groups[r] for r in sorted(groups)]


@dataclass(frozen=True)
class EllipseParams:
    """Center, semi-axes (a >= b), rotation of the major axis in [0, pi)."""

    cx: float
    cy: float
    a: float
    b: float
    rotation: float

    def __post_init__(self):
        if not (self.a >= self.b > 0):
            raise ShapeError(f"axes must satisfy a >= b > 0, got {self.a}, {self.b}")
        if not (0 <= self.rotation < math.pi):
            raise ShapeError(f"rotation must lie in [0, pi), got {self.rotation}")

    def radius_at(self, angle: float) -> float:
        """Boundary distance from the center along a world-frame direction."""
        rel = angle - self.rotation
        return (self.a * self.b) / math.hypot(self.b * math.cos(rel), self.a * math.sin(rel))


def fit_ellipse(points: np.ndarray) -> tuple[EllipseParams, float]:
    """Direct least-squares conic fit constrained to ellipses.

    Solves the scatter-matrix eigenproblem on isotropically normalized
    coordinates, keeps the eigenvector satisfying 4ac - b^2 > 0, and converts
    the conic to geometric parameters. Returns (params, radial RMS residual
    in pixels). Raises EllipseFitError for degenerate input (fewer than five
    points, collinear points, or a conic that is not a real ellipse).
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise EllipseFitError("expected points of shape (n, 2)")
    if len(pts) < 5:
        raise EllipseFitError(f"need at least 5 points, got {len(pts)}")

    mean = pts.mean(axis=0)
    centered = pts - mean
    scale = math.sqrt(float((centered**2).sum(axis=1).mean()))
    if scale <= 0:
        raise EllipseFitError("points are coincident")
    xn = centered[:, 0] / scale
    yn = centered[:, 1] / scale

    d1 = np.column_stack([xn * xn, xn * yn, yn * yn])
    d2 = np.column_stack([xn, yn, np.ones_like(xn)])
    s1 = d1.T @ d1
    s2 = d1.T @ d2
    s3 = d2.T @ d2
    try:
        t = -np.linalg.solve(s3, s2.T)
    except np.linalg.LinAlgError as exc:
        raise EllipseFitError(f"degenerate point configuration: {exc}") from exc
    m = s1 + s2 @ t
    m_reduced = np.vstack([m[2] / 2.0, -m[1], m[0] / 2.0])
    evals, evecs = np.linalg.eig(m_reduced)

    best = None
    for col in range(3):
        if abs(evals[col].imag) > 1e-8:
            continue
        v = evecs[:, col].real
        cond = 4.0 * v[0] * v[2] - v[1] ** 2
        if cond > 0:
            best = v
            break
    if best is None:
        raise EllipseFitError("no eigenvector satisfies the ellipse constraint")
    a1 = best
    a2 = t @ a1
    an, bn, cn, dn, en, fn = a1[0], a1[1], a1[2], a2[0], a2[1], a2[2]

    # undo normalization x_n = (x - mx)/s, y_n = (y - my)/s
    mx, my = float(mean[0]), float(mean[1])
    s = scale
    ca = an / s**2
    cb = bn / s**2
    cc = cn / s**2
    cd = (-2.0 * an * mx - bn * my) / s**2 + dn / s
    ce = (-bn * mx - 2.0 * cn * my) / s**2 + en / s
    cf = (an * mx**2 + bn * mx * my + cn * my**2) / s**2 - (dn * mx + en * my) / s + fn

    params = _conic_to_ellipse(ca, cb, cc, cd, ce, cf)
    residual = _radial_rms(pts, params)
    return params, residual


def _conic_to_ellipse(a: float, b: float, c: float, d: float, e: float, f: float) -> EllipseParams:
    disc = b * b - 4.0 * a * c
    if disc >= 0:
        raise EllipseFitError("conic is not an ellipse")
    cx = (2.0 * c * d - b * e) / disc
    cy = (2.0 * a * e - b * d) / disc
    # quadratic-form eigen decomposition gives axes and orientation
    m0 = np.array([[a, b / 2.0], [b / 2.0, c]], dtype=np.float64)
    evals, evecs = np.linalg.eigh(m0)
    f0 = a * cx * cx + b * cx * cy + c * cy * cy + d * cx + e * cy + f
    with np.errstate(divide="ignore", invalid="ignore"):
        axes_sq = -f0 / evals
    if not np.all(np.isfinite(axes_sq)) or np.any(axes_sq <= 0):
        raise EllipseFitError("conic is degenerate or imaginary")
    semi = np.sqrt(axes_sq)
    major = int(np.argmax(semi))
    minor = 1 - major
    v = evecs[:, major]
    rotation = math.atan2(float(v[1]), float(v[0])) % math.pi
    return EllipseParams(
        cx=float(cx),
        cy=float(cy),
        a=float(semi[major]),
        b=float(semi[minor]),
        rotation=rotation,
    )


def _radial_rms(pts: np.ndarray, params: EllipseParams) -> float:
    dx = pts[:, 0] - params.cx
    dy = pts[:, 1] - params.cy
    r_pts = np.hypot(dx, dy)
    angles = np.arctan2(dy, dx)
    rel = angles - params.rotation
    r_ell = (params.a * params.b) / np.hypot(
        params.b * np.cos(rel), params.a * np.sin(rel)
    )
    return float(np.sqrt(np.mean((r_pts - r_ell) ** 2)))


@dataclass(frozen=True)
class CellDetection:
    """One detected white cell: geometry plus in-region stain pixel counts."""

    kind: str  # "circle" or "ellipse"
    center: tuple[float, float]
    radius: float | None  # circles
    ellipse: EllipseParams | None  # ellipses
    wbc_pixels: int
    nucleus_pixels: int
    granule_pixels: int

    def __post_init__(self):
        if self.kind not in ("circle", "ellipse"):
            raise ShapeError(f"unknown detection kind {self.kind!r}")
        if self.kind == "circle" and (self.radius is None or self.radius <= 0):
            raise ShapeError("circle detection needs a positive radius")
        if self.kind == "ellipse" and self.ellipse is None:
            raise ShapeError("ellipse detection needs ellipse parameters")
        if not 0 <= self.granule_pixels <= self.nucleus_pixels <= self.wbc_pixels:
            raise ShapeError(
                "pixel counts must nest: granule <= nucleus <= wbc, got "
                f"{self.granule_pixels}, {self.nucleus_pixels}, {self.wbc_pixels}"
            )


def disk_region(center: tuple[float, float], radius: float, shape: tuple[int, int]) -> np.ndarray:
    ys, xs = np.ogrid[: shape[0], : shape[1]]
    return (xs - center[0]) ** 2 + (ys - center[1]) ** 2 <= radius * radius


def ellipse_region(params: EllipseParams, shape: tuple[int, int]) -> np.ndarray:
    ys, xs = np.ogrid[: shape[0], : shape[1]]
    dx = xs - params.cx
    dy = ys - params.cy
    cos_r = math.cos(params.rotation)
    sin_r = math.sin(params.rotation)
    xr = dx * cos_r + dy * sin_r
    yr = -dx * sin_r + dy * cos_r
    return (xr / params.a) ** 2 + (yr / params.b) ** 2 <= 1.0


def _region_counts(
    region: np.ndarray,
    wbc: BinaryMask,
    nucleus: BinaryMask,
    granule: BinaryMask,
) -> tuple[int, int, int]:
    """Nested stain counts inside a detection region.

    Granule pixels count toward the nucleus, and nucleus pixels toward the
    cell body, so the returned triple always nests. A stained granule sits on
    the nucleus and a stained nucleus sits inside the cell whether or not the
    broader filters also matched those exact pixels.
    """
    g = granule.bits & region
    nu = (nucleus.bits & region) | g
    w = (wbc.bits & region) | nu
    return int(w.sum()), int(nu.sum()), int(g.sum())


def count_cells(
    edges: BinaryMask,
    wbc: BinaryMask,
    nucleus: BinaryMask,
    granule: BinaryMask,
    *,
    merge_params: MergeParams = MergeParams(),
    circle_tolerance_pct: float = 30.0,
    corner_window: int = 5,
    corner_angle_deg: float = 60.0,
    min_segment_points: int = 3,
    fit_residual_max: float = 2.0,
    diagnostics: list[str] | None = None,
) -> list[CellDetection]:
    """Detect white cells on an edge mask and count stain pixels per cell.

    Closed near-circular contours become circle detections directly. All
    remaining contours are split into curve segments which merge into groups
    across contours; each group with an acceptable ellipse fit becomes an
    ellipse detection. Groups that cannot be fitted (too few points, fit
    failure, or radial residual above `fit_residual_max` pixels) are dropped,
    with a line appended to `diagnostics` when a list is supplied.
    """
    shape = edges.bits.shape
    detections = []
    leftovers: list[CurveSegment] = []
    for raw in trace_contours(edges):
        contour = _clean_contour(raw)
        is_circle = False
        if contour.closed and contour.height > 0:
            is_circle = circle_test(contour, circle_tolerance_pct)
        if is_circle:
            min_x, min_y, max_x, max_y = contour.bbox
            center = ((min_x + max_x) / 2.0, (min_y + max_y) / 2.0)
            radius = contour.height / 2.0
            region = disk_region(center, radius, shape)
            w, nu, g = _region_counts(region, wbc, nucleus, granule)
            detections.append(
                CellDetection(
                    kind="circle",
                    center=center,
                    radius=radius,
                    ellipse=None,
                    wbc_pixels=w,
                    nucleus_pixels=nu,
                    granule_pixels=g,
                )
            )
            continue
        leftovers.extend(
            split_curve_segments(
                contour,
                corner_window=corner_window,
                corner_angle_deg=corner_angle_deg,
                min_points=min_segment_points,
            )
        )

    for group in merge_segments(leftovers, merge_params):
        pts = np.vstack([seg.points for seg in group])
        if len(pts) < 5:
            if diagnostics is not None:
                diagnostics.append(f"dropped group of {len(group)} segments: too few points")
            continue
        try:
            params, residual = fit_ellipse(pts)
        except EllipseFitError as exc:
            if diagnostics is not None:
                diagnostics.append(f"dropped group of {len(group)} segments: {exc}")
            continue
        if residual > fit_residual_max:
            if diagnostics is not None:
                diagnostics.append(
                    f"dropped group of {len(group)} segments: residual {residual:.2f}px"
                )
            continue
        region = ellipse_region(params, shape)
        w, nu, g = _region_counts(region, wbc, nucleus, granule)
        detections.append(
            CellDetection(
                kind="ellipse",
                center=(params.cx, params.cy),
                radius=None,
                ellipse=params,
                wbc_pixels=w,
                nucleus_pixels=nu,
                granule_pixels=g,
            )
        )
    return detections
