"""Value-distribution densities, identity checks and monotonicity reports.

Statistical pass/fail thresholds are uniformly 3x the combined standard
error (or the documented mesh error bound); the distribution mode is
pinned at zero, so unimodality is tested as monotonicity on each side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .fields import (
    ConstantWeight,
    FieldError,
    GradientNormField,
    ScalarField,
    SparsePolynomial,
    TrigEigenfunction,
    WeightedField,
    TORUS,
    BOX_DIRICHLET,
)
from .levelset import (
    Domain,
    LevelSetError,
    MESH_ERR_COEFF,
    _chunk_rng,
    _facet_geometry,
    _weight_values,
    default_shell_width,
    extract,
    mc_mean,
    radial_profile,
    streamed_radial_sums,
    subdivide_facets,
    thin_shell,
    weighted_area,
    weighted_area_error_bound,
)

_MC_CHUNK = 1 << 17


# ---------------------------------------------------------------------------
# Report records


@dataclass
class DensityEstimate:
    """Binned value-distribution density with per-bin standard errors.

    `density` integrates to ~1 over the bins; `raw_psi` is the
    un-normalized pushforward density (vol * mean weight per bin / width),
    which for the mu flavor estimates the level-set integral of |grad f|.
    """

    edges: np.ndarray
    density: np.ndarray
    density_se: np.ndarray
    raw_psi: np.ndarray
    raw_se: np.ndarray
    flavor: str
    normalization: float  # mu(M), the total measure
    n_samples: int
    seed: int

    @property
    def centers(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def bin_width(self):
        return float(self.edges[1] - self.edges[0])

    def to_json(self):
        return {
            "edges": self.edges.tolist(),
            "density": self.density.tolist(),
            "density_se": self.density_se.tolist(),
            "raw_psi": self.raw_psi.tolist(),
            "raw_se": self.raw_se.tolist(),
            "flavor": self.flavor,
            "normalization": self.normalization,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }


@dataclass
class UnimodalityReport:
    """Mode pinned at zero; V is the worst wrong-way jump on either side."""

    violation: float
    threshold: float
    passed: bool
    mode_location: float = 0.0

    def to_json(self):
        return {
            "mode_location": self.mode_location,
            "violation": self.violation,
            "threshold": self.threshold,
            "passed": self.passed,
        }


@dataclass
class MonotonicityReport:
    grid: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    direction: str  # "non-decreasing" | "non-increasing"
    max_violation: float
    tolerance: float
    passed: bool

    def to_json(self):
        return {
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
            "errors": self.errors.tolist(),
            "direction": self.direction,
            "max_violation": self.max_violation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class IdentityReport:
    lhs: float
    lhs_error: float
    rhs: float
    rhs_error: float
    discrepancy: float
    rel_discrepancy: float
    tolerance: float
    passed: bool
    skipped: bool = False
    details: dict = dataclass_field(default_factory=dict)

    def to_json(self):
        return {
            "lhs": self.lhs,
            "lhs_error": self.lhs_error,
            "rhs": self.rhs,
            "rhs_error": self.rhs_error,
            "discrepancy": self.discrepancy,
            "rel_discrepancy": self.rel_discrepancy,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "skipped": self.skipped,
            "details": _jsonable(self.details),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _identity_report(lhs, lhs_err, rhs, rhs_err, extra_tol=0.0, details=None):
    disc = abs(lhs - rhs)
    scale = max(abs(lhs), abs(rhs), 1e-300)
    tol = 3.0 * (lhs_err + rhs_err) + extra_tol
    return IdentityReport(
        lhs=float(lhs),
        lhs_error=float(lhs_err),
        rhs=float(rhs),
        rhs_error=float(rhs_err),
        discrepancy=float(disc),
        rel_discrepancy=float(disc / scale),
        tolerance=float(tol),
        passed=bool(disc <= tol),
        details=details or {},
    )


def default_domain(field):
    """Natural domain for preset checks: torus cell, unit box, or unit ball."""
    base = field.base if isinstance(field, WeightedField) else field
    if isinstance(base, TrigEigenfunction):
        if base.flavor == TORUS:
            return Domain.torus(base.dimension)
        return Domain.box([0.0] * base.dimension, [1.0] * base.dimension)
    if isinstance(field, WeightedField):
        return Domain.box([-3.0] * base.dimension, [3.0] * base.dimension)
    return Domain.ball([0.0] * base.dimension, 1.0)


# ---------------------------------------------------------------------------
# Value distribution density


def value_distribution_density(field, flavor, domain, bins, n_samples, seed, workers=1):
    """Monte Carlo pushforward histogram of f under sigma, mu, or the
    weighted measure |grad f|^2 rho.

    Sampling is uniform over the domain with per-sample weight 1 (sigma),
    |grad f|^2 (mu), or |grad f|^2 rho (weighted); chunked deterministic
    sub-seeding makes the result independent of worker count.
    """
    if flavor not in ("sigma", "mu", "weighted"):
        raise ValueError(f"unknown measure flavor {flavor!r}")
    if bins < 10:
        raise ValueError("need at least 10 bins")
    n_samples = int(n_samples)
    if n_samples < 10**4:
        raise ValueError("need at least 10^4 samples")
    if flavor == "weighted" and not isinstance(field, WeightedField):
        raise FieldError("weighted flavor requires a WeightedField")
    base = field.base if isinstance(field, WeightedField) else field
    rho = field.weight if isinstance(field, WeightedField) else None

    # seeded pre-pass fixes the bin range
    pre = domain.sample(10**5, _chunk_rng(seed, 1 << 31))
    pre_vals = base.value(pre)
    vmin, vmax = float(pre_vals.min()), float(pre_vals.max())
    if vmax - vmin < 1e-300:
        raise FieldError("degenerate value range: inf f = sup f")
    edges = np.linspace(vmin, vmax, bins + 1)
    width = edges[1] - edges[0]
    vol = domain.volume()

    n_chunks = (n_samples + _MC_CHUNK - 1) // _MC_CHUNK
    sums = np.zeros(bins)
    sums_sq = np.zeros(bins)
    total_w = 0.0
    for chunk in range(n_chunks):
        size = min(_MC_CHUNK, n_samples - chunk * _MC_CHUNK)
        pts = domain.sample(size, _chunk_rng(seed, chunk))
        vals = base.value(pts)
        if flavor == "sigma":
            w = np.ones(size)
        else:
            w = base.grad_norm(pts) ** 2
            if flavor == "weighted":
                w = w * field.weight_values(pts)
        total_w += w.sum()
        idx = np.floor((vals - vmin) / width).astype(np.int64)
        np.clip(idx, 0, bins - 1, out=idx)
        in_range = (vals >= vmin) & (vals <= vmax)
        iw = np.where(in_range, w, 0.0)
        sums += np.bincount(idx, weights=iw, minlength=bins)
        sums_sq += np.bincount(idx, weights=iw * iw, minlength=bins)

    mean = sums / n_samples
    var = np.maximum(sums_sq / n_samples - mean**2, 0.0)
    raw = vol * mean / width
    raw_se = vol * np.sqrt(var / n_samples) / width
    mu_M = vol * total_w / n_samples
    return DensityEstimate(
        edges=edges,
        density=raw / mu_M,
        density_se=raw_se / mu_M,
        raw_psi=raw,
        raw_se=raw_se,
        flavor=flavor,
        normalization=float(mu_M),
        n_samples=n_samples,
        seed=int(seed),
    )


def unimodality_check(d: DensityEstimate) -> UnimodalityReport:
    """Monotone-up on [min, 0], monotone-down on [0, max], mode fixed at 0.

    V is the largest wrong-direction pairwise gap of the normalized
    density; the threshold is 3x the largest pairwise combined SE.
    """
    centers = d.centers
    if not (d.edges[0] < 0.0 < d.edges[-1]):
        raise ValueError("bins must cover zero")
    psi = d.density
    se = d.density_se

    def worst_increase_violation(vals):
        # largest (earlier - later)_+ over pairs, for a non-decreasing claim
        run_max = np.maximum.accumulate(vals)
        return float(np.max(run_max[:-1] - vals[1:], initial=0.0))

    left = centers <= 0.0
    right = centers >= 0.0
    v_left = worst_increase_violation(psi[left]) if left.sum() > 1 else 0.0
    v_right = worst_increase_violation(psi[right][::-1]) if right.sum() > 1 else 0.0
    violation = max(v_left, v_right)

    top = np.sort(se)[-2:] if len(se) >= 2 else np.array([0.0, se.max(initial=0.0)])
    threshold = 3.0 * math.sqrt(float((top**2).sum()))
    return UnimodalityReport(
        violation=violation, threshold=threshold, passed=violation <= threshold
    )


# ---------------------------------------------------------------------------
# Curvature and level-set derivative identities


def curvature_identity_check(field, n_points=1000, seed=0, domain=None):
    """max |H_rho + Delta f| at random regular points, with rho = |grad f|.

    H_rho is assembled from the mean-curvature formula for implicit
    hypersurfaces, so the residual measures floating-point cancellation
    of the pointwise identity (machine precision for smooth fields).
    """
    base = field.base if isinstance(field, WeightedField) else field
    if domain is None:
        domain = default_domain(field)
    collected = 0
    max_resid = 0.0
    trials = 0
    chunk = 0
    while collected < n_points:
        if trials >= 10**5:
            raise FieldError("no regular points found after 10^5 trials")
        size = max(n_points - collected, 1024)
        pts = domain.sample(size, _chunk_rng(seed, chunk))
        chunk += 1
        trials += size
        g = base.gradient(pts)
        norms = np.linalg.norm(g, axis=1)
        scale = norms.max() if norms.max() > 0 else 1.0
        regular = norms >= 1e-6 * scale
        if not regular.any():
            continue
        pts, g, norms = pts[regular], g[regular], norms[regular]
        hess = base.hessian(pts)
        lap = base.laplacian(pts)
        N = g / norms[:, None]
        hNN = np.einsum("ni,nij,nj->n", N, hess, N)
        H = -(lap - hNN) / norms
        grad_rho_dot_N = hNN  # <grad|grad f|, N> = hess(N,N)
        H_rho = norms * H - grad_rho_dot_N
        resid = np.abs(H_rho + lap)
        max_resid = max(max_resid, float(resid.max()))
        collected += len(pts)

    tol = 1e-9
    return IdentityReport(
        lhs=max_resid,
        lhs_error=0.0,
        rhs=0.0,
        rhs_error=0.0,
        discrepancy=max_resid,
        rel_discrepancy=max_resid,
        tolerance=tol,
        passed=max_resid <= tol,
        details={"n_points": int(collected), "seed": int(seed)},
    )


def flag_near_critical(field, t, domain, seed=0, n_samples=200_000):
    """Heuristic near-critical level detector.

    A level is flagged when its thin shell cannot be populated (empty or
    extremal level), when the shell's median gradient norm drops below 5%
    of the global median (critical value), or when more than 1% of shell
    samples sit below 1e-3 of the global median (partial degeneracy).
    """
    delta = default_shell_width(domain)
    pts = domain.sample(n_samples, _chunk_rng(seed, 1 << 30))
    vals = field.value(pts)
    med_global = float(np.median(field.grad_norm(pts)))
    if t >= float(vals.max()) or t <= float(vals.min()):
        return True  # outside (or at the edge of) the observed range
    v_range = float(vals.max() - vals.min())
    for _ in range(8):
        shell = np.abs(vals - t) < delta
        if shell.sum() >= 100:
            norms = field.grad_norm(pts[shell])
            med = float(np.median(norms))
            if med_global == 0 or med < 0.05 * med_global:
                return True
            return float((norms < 1e-3 * med_global).mean()) > 0.01
        if delta > 0.05 * v_range:
            break
        delta *= 4.0
    return True  # empty or unresolvable shell: treat as suspicious


def _resolve_rho(field, rho):
    if rho is None:
        return ConstantWeight(field.dimension, 1.0)
    if isinstance(rho, str):
        if rho == "gradnorm":
            return GradientNormField(field)
        raise ValueError(f"unknown weight spec {rho!r}")
    if isinstance(rho, (int, float)):
        return ConstantWeight(field.dimension, float(rho))
    return rho


def levelset_derivative_check(field, rho, t, dt, domain=None, h=0.01, seed=0):
    """Central difference of A(s) = int_{Z_s} rho against the weighted
    mean curvature integral -int_{Z_t} H_rho / |grad f|.

    With rho = |grad f| this is the eigenfunction derivative identity
    dA/dt = int_{Z_t} Delta f / |grad f|.
    """
    base = field.base if isinstance(field, WeightedField) else field
    if domain is None:
        domain = default_domain(field)
    rho_f = _resolve_rho(base, rho)

    for s in (t - dt, t, t + dt):
        if flag_near_critical(base, s, domain, seed=seed):
            return IdentityReport(
                lhs=0.0, lhs_error=0.0, rhs=0.0, rhs_error=0.0,
                discrepancy=0.0, rel_discrepancy=0.0, tolerance=0.0,
                passed=True, skipped=True,
                details={"reason": f"level {s} flagged near-critical"},
            )

    def area_at(s):
        mesh = extract(base, s, domain, h)
        w = rho_f.value(mesh.centroids) if mesh.n_facets else np.zeros(0)
        val = float((mesh.areas * w).sum())
        err = MESH_ERR_COEFF * h * float((mesh.areas * np.abs(w)).sum())
        return val, err

    a_plus, e_plus = area_at(t + dt)
    a_minus, e_minus = area_at(t - dt)
    lhs = (a_plus - a_minus) / (2.0 * dt)
    lhs_err = (e_plus + e_minus) / (2.0 * dt)

    mesh = extract(base, t, domain, h)
    if mesh.is_empty():
        rhs, rhs_err = 0.0, 0.0
    else:
        pts = mesh.centroids
        g = base.gradient(pts)
        norms = np.linalg.norm(g, axis=1)
        hess = base.hessian(pts)
        lap = base.laplacian(pts)
        N = g / norms[:, None]
        hNN = np.einsum("ni,nij,nj->n", N, hess, N)
        H = -(lap - hNN) / norms
        rho_v = rho_f.value(pts)
        grho = rho_f.gradient(pts)
        H_rho = rho_v * H - np.einsum("ni,ni->n", grho, N)
        integrand = H_rho / norms
        rhs = -float((mesh.areas * integrand).sum())
        rhs_err = MESH_ERR_COEFF * h * float((mesh.areas * np.abs(integrand)).sum())

    # central-difference truncation, second-order
    scale = max(abs(lhs), abs(rhs), 1.0)
    return _identity_report(lhs, lhs_err, rhs, rhs_err, extra_tol=dt**2 * scale,
                            details={"t": t, "dt": dt, "h": h})


def divergence_identity_check(field, t1, t2, domain=None, n_samples=10**6, seed=0,
                              h=0.01, workers=1):
    """Flux balance across the slab {t1 < f < t2}: level-set integrals of
    |grad f| (times rho in the weighted case) versus the volume integral
    of Delta f (resp. L f d sigma)."""
    if not t1 < t2:
        raise ValueError("need t1 < t2")
    base = field.base if isinstance(field, WeightedField) else field
    weighted = isinstance(field, WeightedField)
    if domain is None:
        domain = default_domain(field)
    if (
        isinstance(base, TrigEigenfunction)
        and base.flavor == BOX_DIRICHLET
        and np.sign(t1) != np.sign(t2)
    ):
        raise ValueError("Dirichlet case requires sgn(t1) = sgn(t2)")

    rho = field.weight if weighted else None

    def lhs_weight(pts):
        w = base.grad_norm(pts)
        if weighted:
            w = w * field.weight_values(pts)
        return w

    if base.dimension in (2, 3):
        m1 = extract(base, t1, domain, h)
        m2 = extract(base, t2, domain, h)
        w1 = lhs_weight(m1.centroids) if m1.n_facets else np.zeros(0)
        w2 = lhs_weight(m2.centroids) if m2.n_facets else np.zeros(0)
        lhs = float((m2.areas * w2).sum() - (m1.areas * w1).sum())
        lhs_err = MESH_ERR_COEFF * h * float(
            (m2.areas * np.abs(w2)).sum() + (m1.areas * np.abs(w1)).sum()
        )
    else:
        delta = default_shell_width(domain)
        est1 = thin_shell(base, t1, lhs_weight, domain, delta, n_samples, seed + 101, workers)
        est2 = thin_shell(base, t2, lhs_weight, domain, delta, n_samples, seed + 102, workers)
        lhs = est2.value - est1.value
        lhs_err = math.hypot(est1.standard_error, est2.standard_error)

    vol = domain.volume()
    slab_hits = [0]

    def rhs_integrand(pts):
        vals = base.value(pts)
        inside = (vals > t1) & (vals < t2)
        slab_hits[0] += int(inside.sum())
        out = np.zeros(len(pts))
        if inside.any():
            sub = pts[inside]
            if weighted:
                out[inside] = field.weighted_laplacian(sub) * field.weight_values(sub)
            else:
                out[inside] = base.laplacian(sub)
        return vol * out

    mean, se = mc_mean(domain, rhs_integrand, n_samples, seed, workers)
    if slab_hits[0] == 0:
        raise LevelSetError(f"empty slab {{{t1} < f < {t2}}}")
    return _identity_report(lhs, lhs_err, mean, se,
                            details={"t1": t1, "t2": t2, "slab_samples": slab_hits[0]})


# ---------------------------------------------------------------------------
# Monotonicity formula machinery


def _monotone_report(grid, values, errors, direction):
    vals = np.asarray(values, dtype=float)
    if direction == "non-decreasing":
        run = np.maximum.accumulate(vals)
        violation = float(np.max(run[:-1] - vals[1:], initial=0.0))
    elif direction == "non-increasing":
        run = np.minimum.accumulate(vals)
        violation = float(np.max(vals[1:] - run[:-1], initial=0.0))
    else:
        raise ValueError(f"unknown direction {direction!r}")
    errors = np.asarray(errors, dtype=float)
    tolerance = 3.0 * float(errors.max(initial=0.0))
    return MonotonicityReport(
        grid=np.asarray(grid, dtype=float),
        values=vals,
        errors=errors,
        direction=direction,
        max_violation=violation,
        tolerance=tolerance,
        passed=violation <= tolerance,
    )


def monotonicity_report_from_values(grid, values, errors, direction="non-decreasing"):
    """Detector entry point for externally supplied sequences (sanity tests)."""
    return _monotone_report(grid, values, errors, direction)


def _homogeneous_data(P):
    k = P.homogeneous_degree()
    if k is None:
        raise FieldError("expected a homogeneous polynomial")
    return P.dimension, k


def _dual_radial_profiles(P, t, r_grid, h, h_min):
    """One mesh, two cumulative profiles: weight |grad P| and 1/(|x|^2 |grad P|)."""
    n = P.dimension
    r_max = float(r_grid[-1])
    if h_min is None:
        h_min = h / 8.0
    mesh = extract(P, t, Domain.ball([0.0] * n, r_max), h, h_min=h_min)
    if mesh.is_empty():
        z = np.zeros(len(r_grid))
        return z, z, 0
    scale = float(mesh.gradnorms.max())

    def w_I(cents, areas, gradnorms):
        return gradnorms

    def w_J(cents, areas, gradnorms):
        # bound the contribution of near-critical facets instead of failing
        safe = np.maximum(gradnorms, 1e-6 * scale)
        return 1.0 / ((cents**2).sum(axis=1) * safe)

    (I, J), flagged = streamed_radial_sums(
        P, mesh, np.zeros(n), r_grid, h_min, [w_I, w_J]
    )
    return I, J, flagged


def prop51_check(P, t0, r_grid, dr=None, h=0.01, h_min=None, rel_tol=0.03):
    """Sphere-flux identity on {P = t0}: central differences of
    I(r) - k^2 t0^2 J(r) against (n+k-2) I(r) / r."""
    n, k = _homogeneous_data(P)
    if t0 == 0:
        raise ValueError("t0 must be a nonzero regular value")
    r_grid = np.asarray(r_grid, dtype=float)
    steps = np.diff(r_grid)
    if len(r_grid) < 3 or np.any(steps <= 0):
        raise ValueError("need an increasing r-grid with at least 3 points")
    if dr is None:
        dr = float(steps[0])
    if not np.allclose(steps, dr, rtol=1e-9):
        raise ValueError("r-grid must be uniform for central differences")

    I, J, flagged = _dual_radial_profiles(P, t0, r_grid, h, h_min)
    G = I - k**2 * t0**2 * J
    dG = (G[2:] - G[:-2]) / (2.0 * dr)
    rhs = (n + k - 2) * I[1:-1] / r_grid[1:-1]
    scale = max(float(np.abs(rhs).max(initial=0.0)), 1e-300)
    rel = np.abs(dG - rhs) / np.maximum(np.abs(rhs), 1e-3 * scale)
    max_rel = float(rel.max(initial=0.0))
    return IdentityReport(
        lhs=float(dG[np.argmax(rel)]) if len(rel) else 0.0,
        lhs_error=0.0,
        rhs=float(rhs[np.argmax(rel)]) if len(rel) else 0.0,
        rhs_error=0.0,
        discrepancy=max_rel,
        rel_discrepancy=max_rel,
        tolerance=float(rel_tol),
        passed=max_rel <= rel_tol,
        details={
            "r": r_grid, "I": I, "J": J,
            "dG": dG, "rhs": rhs,
            "n_flagged_facets": flagged,
        },
    )


def monotonicity_check(P, t, r_grid, h=0.02, h_min=None):
    """F(r) = I(r) / r^(n+k-2) for the level set {P = t}, checked to be
    non-decreasing within the first-order quadrature error model."""
    n, k = _homogeneous_data(P)
    if k < 1:
        raise FieldError("degree must be at least 1")
    e = n + k - 2
    r_grid = np.asarray(r_grid, dtype=float)
    I, _ = radial_profile(P, t, None, r_grid, h=h, h_min=h_min)
    F = I / r_grid**e
    errors = MESH_ERR_COEFF * h * F + 1e-12 * max(float(F.max(initial=0.0)), 1.0)
    return _monotone_report(r_grid, F, errors, "non-decreasing")


def corollary_unimodality(P, t_grid, h=0.02):
    """psi(t) = int_{Z_t in B(0,1)} |grad P| over a t-grid: non-decreasing
    report on t <= 0, non-increasing on t >= 0."""
    n, k = _homogeneous_data(P)
    if k < 1:
        raise FieldError("degree must be at least 1")
    t_grid = np.asarray(t_grid, dtype=float)
    ball = Domain.ball([0.0] * n, 1.0)
    psi = np.empty(len(t_grid))
    err = np.empty(len(t_grid))
    for i, t in enumerate(t_grid):
        mesh = extract(P, float(t), ball, h)
        psi[i] = weighted_area(mesh)
        err[i] = weighted_area_error_bound(mesh) + 1e-12
    neg = t_grid <= 0.0
    pos = t_grid >= 0.0
    rep_neg = _monotone_report(t_grid[neg], psi[neg], err[neg], "non-decreasing")
    rep_pos = _monotone_report(t_grid[pos], psi[pos], err[pos], "non-increasing")
    return rep_neg, rep_pos


def spherical_monotonicity(P, eps_grid, n_samples=10**6, seed=0):
    """Superlevel functional of the spherical restriction p on S^2:
    eps^((n+k-2)/k) * int_{p >= eps} (|grad_S p|^2 + k^2 p^2) / p^((n+2k-2)/k),
    estimated with one shared Monte Carlo sample across the eps-grid."""
    n, k = _homogeneous_data(P)
    if n != 3:
        raise FieldError("sphere quadrature is implemented for n = 3")
    if k < 1:
        raise FieldError("degree must be at least 1")
    eps_grid = np.asarray(eps_grid, dtype=float)
    if np.any(eps_grid <= 0):
        raise ValueError("eps-grid must be positive")
    e_exp = (n + k - 2) / k
    gamma = (n + 2 * k - 2) / k
    area = 4.0 * math.pi

    n_samples = int(n_samples)
    n_chunks = (n_samples + _MC_CHUNK - 1) // _MC_CHUNK
    sums = np.zeros(len(eps_grid))
    sums_sq = np.zeros(len(eps_grid))
    for chunk in range(n_chunks):
        size = min(_MC_CHUNK, n_samples - chunk * _MC_CHUNK)
        rng = _chunk_rng(seed, chunk)
        dirs = rng.standard_normal((size, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        p = P.value(dirs)
        g2 = (P.gradient(dirs) ** 2).sum(axis=1) - k**2 * p**2
        g2 = np.maximum(g2, 0.0)
        positive = p > 0
        dens = np.zeros(size)
        dens[positive] = (g2[positive] + k**2 * p[positive] ** 2) / p[positive] ** gamma
        # (size, E) indicator matrix is fine at chunk granularity
        terms = dens[:, None] * (p[:, None] >= eps_grid[None, :])
        sums += terms.sum(axis=0)
        sums_sq += (terms**2).sum(axis=0)

    mean = sums / n_samples
    var = np.maximum(sums_sq / n_samples - mean**2, 0.0)
    values = eps_grid**e_exp * area * mean
    ses = eps_grid**e_exp * area * np.sqrt(var / n_samples)
    return _monotone_report(eps_grid, values, ses, "non-increasing")


# ---------------------------------------------------------------------------
# Robin boundary remark


def _sphere_band_integral(P, t_lo, t_hi, nodes):
    """Deterministic integral of P over {t_lo < P < t_hi} on the unit sphere
    (n = 3 equal-area grid) or unit circle (n = 2)."""
    n = P.dimension
    t_amp = max(abs(t_lo), abs(t_hi))
    if n == 3:
        # cylindrical-area grid (dsigma = dz dphi); cells cut by the band
        # boundary are refined, so the indicator error is O(cell / refine)
        mz = max(128, int(round(math.sqrt(nodes / 2))))
        mphi = 2 * mz
        refine = 16
        dz, dphi = 2.0 / mz, 2.0 * math.pi / mphi

        def sphere_eval(Z, PHI):
            s = np.sqrt(np.maximum(1.0 - Z**2, 0.0))
            pts = np.stack([s * np.cos(PHI), s * np.sin(PHI), Z], axis=-1)
            return P.value(pts.reshape(-1, 3)).reshape(Z.shape)

        z_mid = -1.0 + (np.arange(mz) + 0.5) * dz
        phi_mid = (np.arange(mphi) + 0.5) * dphi
        V = sphere_eval(*np.meshgrid(z_mid, phi_mid, indexing="ij"))
        z_edge = -1.0 + np.arange(mz + 1) * dz
        phi_edge = np.arange(mphi + 1) * dphi
        C = sphere_eval(*np.meshgrid(z_edge, phi_edge, indexing="ij"))
        corners = np.stack([C[:-1, :-1], C[1:, :-1], C[:-1, 1:], C[1:, 1:], V])
        cmin, cmax = corners.min(axis=0), corners.max(axis=0)
        spread = cmax - cmin
        strad = ((cmin - spread <= t_lo) & (t_lo <= cmax + spread)) | (
            (cmin - spread <= t_hi) & (t_hi <= cmax + spread)
        )
        inside = (cmin > t_lo) & (cmax < t_hi) & ~strad
        integral = float(V[inside].sum()) * dz * dphi

        iz, ip = np.nonzero(strad)
        if len(iz):
            off = (np.arange(refine) + 0.5) / refine
            Zs = z_edge[iz][:, None, None] + off[None, :, None] * dz
            Ps = phi_edge[ip][:, None, None] + off[None, None, :] * dphi
            Zs, Ps = np.broadcast_arrays(Zs, Ps)
            vals = sphere_eval(Zs, Ps)
            band = (vals > t_lo) & (vals < t_hi)
            integral += float(vals[band].sum()) * dz * dphi / refine**2
        err = 2.0 * (dz / refine) * t_amp * (2.0 * math.pi) + 4.0 * math.pi * dz * dphi
        return integral, err
    if n == 2:
        m = max(4096, int(nodes))
        theta = (np.arange(m) + 0.5) * (2.0 * math.pi / m)
        pts = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        wq = 2.0 * math.pi / m
        vals = P.value(pts)
        band = (vals > t_lo) & (vals < t_hi)
        integral = float(vals[band].sum() * wq)
        err = 4.0 * wq * t_amp
        return integral, err
    raise FieldError("sphere band quadrature supports n in {2, 3}")


def robin_identity_check(P, t1, t2, h=0.01, quad_nodes=10**6):
    """Robin-boundary flux identity on the unit ball for a solid harmonic:
    psi(t2) - psi(t1) = -k * int over the spherical band {t1 < P < t2}."""
    n, k = _homogeneous_data(P)
    if k < 1:
        raise FieldError("degree must be at least 1")
    if t1 == t2:
        return _identity_report(0.0, 0.0, 0.0, 0.0, details={"t1": t1, "t2": t2})
    if t1 * t2 <= 0:
        raise ValueError("t1 and t2 must have the same (nonzero) sign")
    lo, hi = min(t1, t2), max(t1, t2)
    ball = Domain.ball([0.0] * n, 1.0)

    def psi(t):
        mesh = extract(P, t, ball, h)
        return weighted_area(mesh), weighted_area_error_bound(mesh)

    psi2, err2 = psi(t2)
    psi1, err1 = psi(t1)
    lhs = psi2 - psi1
    band, band_err = _sphere_band_integral(P, lo, hi, quad_nodes)
    rhs = -k * band * (1.0 if t2 > t1 else -1.0)
    report = _identity_report(lhs, err1 + err2, rhs, k * band_err,
                              details={"t1": t1, "t2": t2, "psi_t1": psi1, "psi_t2": psi2})
    # the remark's sign statement: moving away from the nodal level shrinks psi
    expected_negative = 0 < t1 < t2
    expected_positive = t1 < t2 < 0
    sign_ok = (lhs < 0) if expected_negative else (lhs > 0) if expected_positive else True
    report.details["lhs_sign_ok"] = bool(sign_ok)
    if not sign_ok:
        report.passed = False
    return report


# ---------------------------------------------------------------------------
# Exploration: non-homogeneous harmonic nodal sets


def explore_general_monotonicity(f, x0, r_grid, exponents=None, h=0.02):
    """Tabulate r -> r^-e * int_{Z_0 in B(x0, r)} |grad f| for candidate
    exponents e, with local log-log slopes and monotone-violation counts.

    Exploratory output only; no pass/fail is attached.
    """
    if not isinstance(f, SparsePolynomial):
        raise FieldError("exploration requires a polynomial field")
    if not f.laplacian_poly().is_zero():
        raise FieldError("field must be exactly harmonic")
    x0 = np.asarray(x0, dtype=float)
    if abs(float(f.value(x0))) > 1e-10:
        raise FieldError("x0 must lie on the nodal set (|f(x0)| <= 1e-10)")
    n = f.dimension
    k_top = f.total_degree()
    if exponents is None:
        exponents = sorted({n - 1, n + k_top - 2})
    r_grid = np.asarray(r_grid, dtype=float)

    I, info = radial_profile(f, 0.0, None, r_grid, center=x0, h=h)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_r = np.log(r_grid)
        log_I = np.where(I > 0, np.log(np.maximum(I, 1e-300)), np.nan)
        slopes = np.diff(log_I) / np.diff(log_r)

    table = {
        "r": r_grid,
        "I": I,
        "loglog_slopes": slopes,
        "exponents": {},
        "n_facets": info["n_facets"],
        "n_flagged": info["n_flagged"],
    }
    for e in exponents:
        vals = I / r_grid ** float(e)
        drop = np.diff(vals)
        # count strict decreases beyond round-off
        tol = 1e-12 * max(float(np.abs(vals).max(initial=0.0)), 1.0)
        table["exponents"][float(e)] = {
            "values": vals,
            "violations": int((drop < -tol).sum()),
        }
    return table
