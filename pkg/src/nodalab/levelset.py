"""Level-set extraction and weighted (n-1)-dimensional quadrature.

Meshes for {f = t} are built on a uniform grid by simplicial marching
(triangles in 2D, Kuhn-split tetrahedra in 3D) with vertices refined by
bisection of f - t along crossing edges.  Domain clipping uses recursive
facet subdivision and centroid classification, an O(h) geometric error
model.  A coarea thin-shell Monte Carlo estimator covers any dimension.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .fields import FieldError, ScalarField

# irrational grid-origin shift: keeps level values off the grid nodes
_GRID_SHIFT = 0.2360679774997897
# first-order quadrature error model: |error| <= this * h * sum(area*|w|)
MESH_ERR_COEFF = 0.5
# facets with |grad f| below this fraction of the mesh gradient scale are flagged
NEAR_CRITICAL_FRACTION = 1e-6

_BISECT_STEPS = 30
_MC_CHUNK = 1 << 17


class LevelSetError(ValueError):
    """Raised on invalid level-set requests."""


# ---------------------------------------------------------------------------
# Domains


@dataclass(frozen=True)
class Domain:
    """Box, ball, or unit torus cell in R^n."""

    kind: str
    dimension: int
    lo: tuple = ()
    hi: tuple = ()
    center: tuple = ()
    radius: float = 0.0

    @classmethod
    def box(cls, lo, hi):
        lo = tuple(float(v) for v in np.atleast_1d(lo))
        hi = tuple(float(v) for v in np.atleast_1d(hi))
        if len(lo) != len(hi) or any(b <= a for a, b in zip(lo, hi)):
            raise LevelSetError("box needs lo < hi componentwise")
        return cls(kind="box", dimension=len(lo), lo=lo, hi=hi)

    @classmethod
    def ball(cls, center, radius):
        center = tuple(float(v) for v in np.atleast_1d(center))
        if radius <= 0:
            raise LevelSetError("ball radius must be positive")
        return cls(kind="ball", dimension=len(center), center=center, radius=float(radius))

    @classmethod
    def torus(cls, dimension):
        if dimension < 1:
            raise LevelSetError("dimension must be positive")
        return cls(
            kind="torus",
            dimension=dimension,
            lo=(0.0,) * dimension,
            hi=(1.0,) * dimension,
        )

    def bbox(self):
        if self.kind == "ball":
            c = np.array(self.center)
            return c - self.radius, c + self.radius
        return np.array(self.lo), np.array(self.hi)

    def volume(self):
        if self.kind == "ball":
            n = self.dimension
            return math.pi ** (n / 2) * self.radius**n / math.gamma(n / 2 + 1)
        lo, hi = self.bbox()
        return float(np.prod(hi - lo))

    def diameter(self):
        if self.kind == "ball":
            return 2.0 * self.radius
        lo, hi = self.bbox()
        return float(np.linalg.norm(hi - lo))

    def sample(self, n, rng):
        """n uniform points as an (n, dim) array."""
        d = self.dimension
        if self.kind == "ball":
            dirs = rng.standard_normal((n, d))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            radii = self.radius * rng.random(n) ** (1.0 / d)
            return np.array(self.center) + dirs * radii[:, None]
        lo, hi = self.bbox()
        return lo + rng.random((n, d)) * (hi - lo)

    def contains(self, X):
        X = np.atleast_2d(X)
        if self.kind == "torus":
            return np.ones(len(X), dtype=bool)
        return self.signed_distance(X) < 0

    def signed_distance(self, X):
        """Negative inside, positive outside; -inf everywhere for the torus."""
        X = np.atleast_2d(X)
        if self.kind == "torus":
            return np.full(len(X), -np.inf)
        if self.kind == "ball":
            return np.linalg.norm(X - np.array(self.center), axis=1) - self.radius
        lo, hi = self.bbox()
        return np.maximum(lo - X, X - hi).max(axis=1)

    def to_json(self):
        if self.kind == "ball":
            return {"kind": "ball", "center": list(self.center), "radius": self.radius}
        if self.kind == "torus":
            return {"kind": "torus", "dimension": self.dimension}
        return {"kind": "box", "lo": list(self.lo), "hi": list(self.hi)}

    @classmethod
    def from_json(cls, doc):
        kind = doc["kind"]
        if kind == "ball":
            return cls.ball(doc["center"], doc["radius"])
        if kind == "torus":
            return cls.torus(doc["dimension"])
        return cls.box(doc["lo"], doc["hi"])


# ---------------------------------------------------------------------------
# Monte Carlo estimates


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo value with a standard error from the sample variance."""

    value: float
    standard_error: float
    n_samples: int
    seed: int

    def to_json(self):
        return {
            "value": self.value,
            "standard_error": self.standard_error,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }


def _chunk_rng(seed, chunk):
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, chunk]))


def mc_mean(domain, integrand, n_samples, seed, workers=1):
    """Chunked MC mean of `integrand` over uniform points; worker-count independent."""
    n_samples = int(n_samples)
    chunks = [(i, min(_MC_CHUNK, n_samples - i * _MC_CHUNK)) for i in range((n_samples + _MC_CHUNK - 1) // _MC_CHUNK)]

    def run(args):
        idx, size = args
        pts = domain.sample(size, _chunk_rng(seed, idx))
        v = np.asarray(integrand(pts), dtype=float)
        return v.sum(), (v * v).sum()

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(c) for c in chunks]
    total = sum(r[0] for r in results)
    total_sq = sum(r[1] for r in results)
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    se = math.sqrt(var / n_samples)
    return mean, se


def thin_shell(field, t, g, domain, delta, n_samples, seed, workers=1):
    """Coarea thin-shell estimate of the level-set integral of g over {f = t}.

    Uses int_{Z_t} g ~= (2 delta)^{-1} int_{|f-t|<delta} g |grad f|; bias is
    O(delta^2) at regular values.  A delta so large that the shell is
    dominated by critical points is not detected.
    """
    if delta <= 0:
        raise LevelSetError("delta must be positive")
    n_samples = int(n_samples)
    if n_samples < 1000:
        raise LevelSetError("need at least 10^3 samples")
    vol = domain.volume()

    def integrand(pts):
        inside = np.abs(field.value(pts) - t) < delta
        out = np.zeros(len(pts))
        if inside.any():
            sub = pts[inside]
            grads = field.grad_norm(sub)
            gv = _weight_values(g, sub, gradnorms=grads)
            out[inside] = gv * grads
        return vol * out / (2.0 * delta)

    mean, se = mc_mean(domain, integrand, n_samples, seed, workers)
    return MCEstimate(value=mean, standard_error=se, n_samples=n_samples, seed=int(seed))


def default_shell_width(domain):
    """0.5e-3 of the domain diameter: O(delta^2) bias below MC noise at N=1e6."""
    return 0.5 * domain.diameter() * 1e-3


# ---------------------------------------------------------------------------
# Meshes


@dataclass
class LevelSetMesh:
    """Facets of {f = t} with areas, centroids and |grad f| samples."""

    level: float
    dimension: int
    resolution: float
    vertices: np.ndarray  # (F, verts_per_facet, dim)
    areas: np.ndarray  # (F,)
    centroids: np.ndarray  # (F, dim)
    gradnorms: np.ndarray  # (F,)
    n_flagged: int = 0
    h_min: float = dataclass_field(default=0.0)

    @property
    def n_facets(self):
        return len(self.areas)

    @property
    def total_area(self):
        return float(self.areas.sum())

    def is_empty(self):
        return self.n_facets == 0


def _weight_values(weight, pts, gradnorms=None):
    if weight is None:
        if gradnorms is not None:
            return gradnorms
        raise LevelSetError("weight=None needs stored gradient norms")
    if isinstance(weight, ScalarField):
        return np.asarray(weight.value(pts), dtype=float)
    if callable(weight):
        return np.asarray(weight(pts), dtype=float)
    return np.full(len(pts), float(weight))


def weighted_area(mesh, weight=None):
    """Sum of facet area times weight at the facet centroid.

    `weight=None` uses the stored |grad f| samples, so the result is the
    level-set integral of |grad f|.
    """
    if mesh.is_empty():
        return 0.0
    w = _weight_values(weight, mesh.centroids, mesh.gradnorms)
    return float((mesh.areas * w).sum())


def weighted_area_error_bound(mesh, weight=None):
    """Documented first-order bound: MESH_ERR_COEFF * h * sum(area * |w|)."""
    if mesh.is_empty():
        return 0.0
    w = _weight_values(weight, mesh.centroids, mesh.gradnorms)
    return MESH_ERR_COEFF * mesh.resolution * float((mesh.areas * np.abs(w)).sum())


def _facet_geometry(verts):
    """(areas, centroids) for segment (nv=2) or triangle (nv=3) facets."""
    centroids = verts.mean(axis=1)
    if verts.shape[1] == 2:
        areas = np.linalg.norm(verts[:, 1] - verts[:, 0], axis=1)
    else:
        cross = np.cross(verts[:, 1] - verts[:, 0], verts[:, 2] - verts[:, 0])
        areas = 0.5 * np.linalg.norm(cross, axis=-1) if verts.shape[2] == 3 else 0.5 * np.abs(cross)
    return areas, centroids


def _facet_diameters(verts):
    if verts.shape[1] == 2:
        return np.linalg.norm(verts[:, 1] - verts[:, 0], axis=1)
    a = np.linalg.norm(verts[:, 1] - verts[:, 0], axis=1)
    b = np.linalg.norm(verts[:, 2] - verts[:, 1], axis=1)
    c = np.linalg.norm(verts[:, 0] - verts[:, 2], axis=1)
    return np.maximum(a, np.maximum(b, c))


def _split_facets(verts):
    """Halve segments, quadrisect triangles."""
    if verts.shape[1] == 2:
        mid = 0.5 * (verts[:, 0] + verts[:, 1])
        return np.concatenate(
            [
                np.stack([verts[:, 0], mid], axis=1),
                np.stack([mid, verts[:, 1]], axis=1),
            ]
        )
    m01 = 0.5 * (verts[:, 0] + verts[:, 1])
    m12 = 0.5 * (verts[:, 1] + verts[:, 2])
    m02 = 0.5 * (verts[:, 0] + verts[:, 2])
    return np.concatenate(
        [
            np.stack([verts[:, 0], m01, m02], axis=1),
            np.stack([m01, verts[:, 1], m12], axis=1),
            np.stack([m02, m12, verts[:, 2]], axis=1),
            np.stack([m01, m12, m02], axis=1),
        ]
    )


def subdivide_facets(verts, h_min):
    """Recursively split facets until every diameter is at most h_min."""
    out = []
    work = verts
    while len(work):
        diam = _facet_diameters(work)
        done = diam <= h_min
        out.append(work[done])
        work = work[~done]
        if len(work):
            work = _split_facets(work)
    return np.concatenate(out) if out else verts[:0]


def streamed_radial_sums(field, mesh, center, r_grid, h_min, weight_fns, chunk=10_000):
    """Cumulative radial profiles without materializing the refined mesh.

    Facets are subdivided to diameter `h_min` one chunk at a time, binned by
    centroid distance from `center` into the cells of `r_grid`, and each
    callable in `weight_fns` (centroids, areas, gradnorms) -> contributions
    is accumulated.  Returns (list of cumulative arrays, n_flagged).
    """
    r_grid = np.asarray(r_grid, dtype=float)
    bins = len(r_grid)
    sums = [np.zeros(bins) for _ in weight_fns]
    scale = float(mesh.gradnorms.max()) if mesh.n_facets else 0.0
    flagged = 0
    for start in range(0, mesh.n_facets, chunk):
        verts = subdivide_facets(mesh.vertices[start:start + chunk], h_min)
        areas, cents = _facet_geometry(verts)
        gradnorms = field.grad_norm(cents)
        if scale > 0:
            flagged += int((gradnorms < NEAR_CRITICAL_FRACTION * scale).sum())
        radii = np.linalg.norm(cents - center, axis=1)
        idx = np.searchsorted(r_grid, radii, side="left")
        for s, fn in zip(sums, weight_fns):
            contrib = areas * fn(cents, areas, gradnorms)
            s += np.bincount(idx, weights=contrib, minlength=bins + 1)[:bins]
    return [np.cumsum(s) for s in sums], flagged


def _clip_facets(verts, domain, h_min):
    """Keep facet parts inside the domain: subdivide near the boundary,
    classify by centroid.  Geometric error is O(h_min) in the boundary band."""
    if domain.kind == "torus" or len(verts) == 0:
        return verts
    kept = []
    work = verts
    while len(work):
        diam = _facet_diameters(work)
        _, cents = _facet_geometry(work)
        sd = domain.signed_distance(cents)
        inside = sd < -diam
        outside = sd > diam
        boundary = ~(inside | outside)
        kept.append(work[inside])
        small = boundary & (diam <= h_min)
        kept.append(work[small & (sd < 0)])
        work = work[boundary & (diam > h_min)]
        if len(work):
            work = _split_facets(work)
    return np.concatenate(kept) if kept else verts[:0]


# -- grid + bisection -------------------------------------------------------


def _grid_axes(domain, h):
    lo, hi = domain.bbox()
    axes = []
    for d in range(domain.dimension):
        if domain.kind == "torus":
            cells = max(2, round((hi[d] - lo[d]) / h))
            step = (hi[d] - lo[d]) / cells
            start = lo[d] - _GRID_SHIFT * step
            axes.append(start + step * np.arange(cells + 1))
        else:
            start = lo[d] - _GRID_SHIFT * h
            cells = int(math.ceil((hi[d] - start) / h)) + 1
            axes.append(start + h * np.arange(cells + 1))
    return axes


def _bisect_edges(field, t, p0, p1, f0, f1):
    """Locate f = t along edges with opposite-sign endpoint values."""
    lo = np.where((f0 < 0)[:, None], p0, p1).copy()
    hi = np.where((f0 < 0)[:, None], p1, p0).copy()
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        neg = (field.value(mid) - t) < 0
        lo = np.where(neg[:, None], mid, lo)
        hi = np.where(neg[:, None], hi, mid)
    return 0.5 * (lo + hi)


def _nudge(values):
    # strict signs everywhere: exact zeros become positive denormals
    return np.where(values == 0.0, 5e-324, values)


def _extract_2d(field, t, axes):
    xs, ys = axes
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    V = _nudge(field.value(pts).reshape(X.shape) - t)
    S = V > 0

    def cross_points(mask, P0, P1, F0, F1):
        pts0 = np.full(mask.shape + (2,), np.nan)
        idx = np.nonzero(mask)
        if len(idx[0]):
            pts0[idx] = _bisect_edges(field, t, P0[idx], P1[idx], F0[idx], F1[idx])
        return pts0

    P = np.stack([X, Y], axis=-1)
    cH = S[:-1, :] != S[1:, :]
    ptH = cross_points(cH, P[:-1, :], P[1:, :], V[:-1, :], V[1:, :])
    cV = S[:, :-1] != S[:, 1:]
    ptV = cross_points(cV, P[:, :-1], P[:, 1:], V[:, :-1], V[:, 1:])
    cD = S[:-1, :-1] != S[1:, 1:]
    ptD = cross_points(cD, P[:-1, :-1], P[1:, 1:], V[:-1, :-1], V[1:, 1:])

    segments = []
    # cell (i,j) split along the (i,j)-(i+1,j+1) diagonal
    tri_edges = [
        (cH[:, :-1], ptH[:, :-1], cV[1:, :], ptV[1:, :], cD, ptD),  # lower triangle
        (cD, ptD, cH[:, 1:], ptH[:, 1:], cV[:-1, :], ptV[:-1, :]),  # upper triangle
    ]
    for m1, p1_, m2, p2_, m3, p3_ in tri_edges:
        masks = np.stack([m1, m2, m3])
        cnt = masks.sum(axis=0)
        sel = np.nonzero(cnt == 2)
        if not len(sel[0]):
            continue
        m3s = masks[:, sel[0], sel[1]]
        p3s = np.stack([p1_, p2_, p3_])[:, sel[0], sel[1]]
        order = np.cumsum(m3s, axis=0) * m3s
        e0 = np.where((order == 1)[..., None], p3s, 0.0).sum(axis=0)
        e1 = np.where((order == 2)[..., None], p3s, 0.0).sum(axis=0)
        segments.append(np.stack([e0, e1], axis=1))
    if not segments:
        return np.zeros((0, 2, 2))
    return np.concatenate(segments)


# Kuhn decomposition of the unit cube into 6 tetrahedra (consistent faces)
_KUHN_TETS = []
for _perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
    _c = [(0, 0, 0)]
    for _ax in _perm:
        _v = list(_c[-1])
        _v[_ax] += 1
        _c.append(tuple(_v))
    _KUHN_TETS.append(tuple(_c))

_PAIR_SPLITS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


def _extract_3d(field, t, axes):
    xs, ys, zs = axes
    nx, ny = len(xs), len(ys)
    XY = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)

    def slab_values(kz):
        pts = np.concatenate([XY, np.full((len(XY), 1), zs[kz])], axis=1)
        return _nudge(field.value(pts).reshape(nx, ny) - t)

    tri_e = []  # (S,3,2,3) endpoint pairs for 3-edge facets
    tri_f = []  # (S,3,2) endpoint values
    quad_e = []
    quad_f = []

    prev = slab_values(0)
    for kz in range(len(zs) - 1):
        cur = slab_values(kz + 1)
        slab = np.stack([prev, cur])  # (2, nx, ny)
        pos = slab > 0
        # mixed cubes in this slab
        corner_pos = np.stack(
            [pos[dz, dx : nx - 1 + dx, dy : ny - 1 + dy] for dz in (0, 1) for dx in (0, 1) for dy in (0, 1)]
        )
        mixed = corner_pos.any(axis=0) & ~corner_pos.all(axis=0)
        ii, jj = np.nonzero(mixed)
        prev_slab_vals = slab
        if len(ii):
            corner_val = {}
            corner_xyz = {}
            for dx in (0, 1):
                for dy in (0, 1):
                    for dz in (0, 1):
                        corner_val[(dx, dy, dz)] = prev_slab_vals[dz, ii + dx, jj + dy]
                        corner_xyz[(dx, dy, dz)] = np.stack(
                            [xs[ii + dx], ys[jj + dy], np.full(len(ii), zs[kz + dz])], axis=1
                        )
            for tet in _KUHN_TETS:
                vals = np.stack([corner_val[c] for c in tet], axis=1)  # (C,4)
                coords = np.stack([corner_xyz[c] for c in tet], axis=1)  # (C,4,3)
                tpos = vals > 0
                npos = tpos.sum(axis=1)
                # triangle: one vertex separated from the other three
                for lone in range(4):
                    mask = ((npos == 1) & tpos[:, lone]) | ((npos == 3) & ~tpos[:, lone])
                    if not mask.any():
                        continue
                    others = [j for j in range(4) if j != lone]
                    e = np.stack(
                        [np.stack([coords[mask, lone], coords[mask, j]], axis=1) for j in others],
                        axis=1,
                    )  # (S,3,2,3)
                    fv = np.stack(
                        [np.stack([vals[mask, lone], vals[mask, j]], axis=1) for j in others],
                        axis=1,
                    )
                    tri_e.append(e)
                    tri_f.append(fv)
                # quad: 2-2 sign split
                for (a0, a1), (b0, b1) in _PAIR_SPLITS:
                    mask = (npos == 2) & (tpos[:, a0] == tpos[:, a1]) & (tpos[:, a0] != tpos[:, b0])
                    if not mask.any():
                        continue
                    pairs = [(a0, b0), (a0, b1), (a1, b1), (a1, b0)]
                    e = np.stack(
                        [np.stack([coords[mask, p], coords[mask, q]], axis=1) for p, q in pairs],
                        axis=1,
                    )  # (S,4,2,3)
                    fv = np.stack(
                        [np.stack([vals[mask, p], vals[mask, q]], axis=1) for p, q in pairs],
                        axis=1,
                    )
                    quad_e.append(e)
                    quad_f.append(fv)
        prev = cur

    facets = []

    def bisect_grouped(edges, fvals, group):
        # edges (S, group, 2, 3) -> located points (S, group, 3)
        if not len(edges):
            return np.zeros((0, group, 3))
        flat_e = edges.reshape(-1, 2, 3)
        flat_f = fvals.reshape(-1, 2)
        out = np.empty((len(flat_e), 3))
        for start in range(0, len(flat_e), _MC_CHUNK):
            sl = slice(start, start + _MC_CHUNK)
            out[sl] = _bisect_edges(
                field, t, flat_e[sl, 0], flat_e[sl, 1], flat_f[sl, 0], flat_f[sl, 1]
            )
        return out.reshape(-1, group, 3)

    if tri_e:
        pts = bisect_grouped(np.concatenate(tri_e), np.concatenate(tri_f), 3)
        facets.append(pts)
    if quad_e:
        pts = bisect_grouped(np.concatenate(quad_e), np.concatenate(quad_f), 4)
        facets.append(pts[:, (0, 1, 2), :])
        facets.append(pts[:, (0, 2, 3), :])
    if not facets:
        return np.zeros((0, 3, 3))
    return np.concatenate(facets)


def extract(field, t, domain, h, h_min=None):
    """Mesh of {f = t} intersected with the domain at grid resolution h.

    Vertices are located by up to 30 bisection steps of f - t along grid
    edges; facet |grad f| is sampled at centroids.  Dimensions 2 and 3.
    """
    n = field.dimension
    if n != domain.dimension:
        raise FieldError("field/domain dimension mismatch")
    if n not in (2, 3):
        raise LevelSetError(f"mesh extraction supports dimensions 2 and 3, not {n}")
    if h <= 0:
        raise LevelSetError("resolution must be positive")
    if h_min is None:
        h_min = h / 4.0

    axes = _grid_axes(domain, h)
    verts = _extract_2d(field, t, axes) if n == 2 else _extract_3d(field, t, axes)
    verts = _clip_facets(verts, domain, h_min)

    if len(verts) == 0:
        return LevelSetMesh(
            level=float(t),
            dimension=n,
            resolution=float(h),
            vertices=np.zeros((0, 2 if n == 2 else 3, n)),
            areas=np.zeros(0),
            centroids=np.zeros((0, n)),
            gradnorms=np.zeros(0),
            n_flagged=0,
            h_min=float(h_min),
        )

    areas, centroids = _facet_geometry(verts)
    keep = areas > 0
    verts, areas, centroids = verts[keep], areas[keep], centroids[keep]
    gradnorms = field.grad_norm(centroids)
    scale = float(gradnorms.max()) if len(gradnorms) else 0.0
    n_flagged = int((gradnorms < NEAR_CRITICAL_FRACTION * scale).sum()) if scale > 0 else 0
    return LevelSetMesh(
        level=float(t),
        dimension=n,
        resolution=float(h),
        vertices=verts,
        areas=areas,
        centroids=centroids,
        gradnorms=gradnorms,
        n_flagged=n_flagged,
        h_min=float(h_min),
    )


# ---------------------------------------------------------------------------
# Radial profiles


def radial_profile(
    field,
    t,
    weight,
    r_grid,
    center=None,
    h=0.02,
    h_min=None,
    mc_delta=None,
    mc_samples=10**6,
    seed=0,
):
    """I(r_j) = integral of `weight` over {f = t} within the ball B(center, r_j).

    Mesh facets are subdivided to diameter h_min and binned by centroid
    radius (cumulative sums), so the profile is non-decreasing in j for
    non-negative weights.  Dimensions outside {2, 3} fall back to one
    thin-shell estimate per radius.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.ndim != 1 or len(r_grid) == 0 or np.any(np.diff(r_grid) <= 0) or r_grid[0] <= 0:
        raise LevelSetError("r-grid must be strictly increasing and positive")
    n = field.dimension
    if center is None:
        center = np.zeros(n)
    center = np.asarray(center, dtype=float)

    if n not in (2, 3):
        values = []
        delta = mc_delta
        for j, r in enumerate(r_grid):
            ball = Domain.ball(center, r)
            d = delta if delta is not None else default_shell_width(ball)
            est = thin_shell(field, t, weight, ball, d, mc_samples, seed + j)
            values.append(est.value)
        return np.array(values), {"mode": "thin_shell", "n_facets": 0, "n_flagged": 0}

    if h_min is None:
        h_min = h / 4.0
    mesh = extract(field, t, Domain.ball(center, float(r_grid[-1])), h, h_min=h_min)
    if mesh.is_empty():
        return np.zeros(len(r_grid)), {"mode": "mesh", "n_facets": 0, "n_flagged": 0}

    def weight_fn(cents, areas, gradnorms):
        return _weight_values(weight, cents, gradnorms)

    (values,), flagged = streamed_radial_sums(field, mesh, center, r_grid, h_min, [weight_fn])
    return values, {"mode": "mesh", "n_facets": mesh.n_facets, "n_flagged": flagged}


# ---------------------------------------------------------------------------
# Export


def mesh_to_csv(mesh, path):
    """Facet table: vertex coordinates, area, |grad f| sample."""
    n, nv = mesh.dimension, mesh.vertices.shape[1] if mesh.n_facets else (2 if mesh.dimension == 2 else 3)
    cols = [f"v{i}_{ax}" for i in range(nv) for ax in "xyz"[:n]] + ["area", "gradnorm"]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(mesh.n_facets):
            row = list(mesh.vertices[i].ravel()) + [mesh.areas[i], mesh.gradnorms[i]]
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def mesh_to_off(mesh, path):
    """OFF-like text export (vertices then facet index lists)."""
    nv = mesh.vertices.shape[1] if mesh.n_facets else 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("OFF\n")
        fh.write(f"{mesh.n_facets * nv} {mesh.n_facets} 0\n")
        for i in range(mesh.n_facets):
            for v in mesh.vertices[i]:
                fh.write(" ".join(f"{c:.17g}" for c in v) + "\n")
        for i in range(mesh.n_facets):
            idx = " ".join(str(i * nv + j) for j in range(nv))
            fh.write(f"{nv} {idx}\n")
