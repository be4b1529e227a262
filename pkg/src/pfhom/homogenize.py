"""Scale sweeps and stochastic averaging of cell values.

``f_hom_estimate`` and ``g_hom_estimate`` drive the r -> infinity sweep of
normalised cell minima and extrapolate the limit under the boundary-layer
model value(r) = L + C/r.  For stationary random coefficient fields,
``mc_estimate`` averages over realizations drawn from a counter-based
pseudo-random function, and ``stationarity_check`` / ``subadditivity_check``
probe the two structural properties that make the subadditive ergodic
argument tick: shift invariance of the law and subadditivity of the set
function I -> m^s(jump datum, I x (-c, c)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cell_problems import (
    DEFAULT_LAMBDA_LADDER,
    CellResult,
    bulk_cell_value,
    surface_cell_value,
    _surface_on_grid,
)
from .errors import ConfigurationError, InvalidInputError, SolverError
from .grid import build_box_grid, rotation_matrix
from .integrands import (
    BulkIntegrand,
    Homogeneous,
    PsiFunction,
    RandomCheckerboard,
    SurfaceIntegrand,
)
from .solvers import SolveOptions

__all__ = [
    "HomEstimate",
    "RandomFieldSpec",
    "FieldSample",
    "McReport",
    "StationarityReport",
    "SubadditivityReport",
    "cv_constant",
    "extrapolate_limit",
    "f_hom_estimate",
    "g_hom_estimate",
    "sample_random_checkerboard",
    "mc_estimate",
    "stationarity_check",
    "subadditivity_check",
]


def cv_constant(p: float = 2.0) -> float:
    """Transition cost of the competitor profile v(t) = clamp(2|t| - 1, 0, 1).

    Closed form of int (1 - v)^p + |v'|^p dt over (-1, 1): the plateau
    contributes 1, each ramp 1/(2(p+1)) + 2^(p-1).  Equals 16/3 at p = 2.
    """
    if p <= 1:
        raise InvalidInputError(f"need p > 1, got p = {p:g}")
    return 1.0 + 1.0 / (p + 1.0) + 2.0**p


def extrapolate_limit(scales, values):
    """Least-squares fit value = L + C/r over the tail half of the sweep.

    Returns (L, C, residual) where residual is the root-mean-square misfit
    of the fitted model on the tail points.
    """
    scales = np.asarray(scales, dtype=float)
    values = np.asarray(values, dtype=float)
    if scales.size != values.size:
        raise InvalidInputError("scales and values must have equal length")
    if scales.size < 3:
        raise InvalidInputError(f"need at least 3 scales, got {scales.size}")
    tail = int(np.ceil(scales.size / 2))
    r = scales[-tail:]
    v = values[-tail:]
    if np.ptp(r) < 1e-12 * max(1.0, abs(r[0])):
        raise InvalidInputError("degenerate fit: tail scales are all equal")
    design = np.stack([np.ones_like(r), 1.0 / r], axis=1)
    coef, *_ = np.linalg.lstsq(design, v, rcond=None)
    misfit = design @ coef - v
    residual = float(np.sqrt(np.mean(misfit**2)))
    return float(coef[0]), float(coef[1]), residual


@dataclass
class HomEstimate:
    """Scale sweep of normalised cell values with its extrapolated limit.

    ``tail_min`` / ``tail_max`` are finite-scale proxies for the liminf and
    limsup (min/max of the values over the tail half of the sweep); the
    extrapolated ``limit`` should sit inside that bracket up to ``residual``.
    """

    scales: list[float]
    values: list[float]
    limit: float
    rate_constant: float
    residual: float
    failed: list[tuple[float, str]] = field(default_factory=list)
    results: list[CellResult] = field(default_factory=list)

    @property
    def tail_min(self) -> float:
        tail = int(np.ceil(len(self.values) / 2))
        return float(min(self.values[-tail:]))

    @property
    def tail_max(self) -> float:
        tail = int(np.ceil(len(self.values) / 2))
        return float(max(self.values[-tail:]))


def _sweep(r_list, solve_one) -> HomEstimate:
    r_list = [float(r) for r in r_list]
    if len(r_list) < 3:
        raise InvalidInputError(f"need at least 3 scales, got {len(r_list)}")
    if any(b <= a for a, b in zip(r_list, r_list[1:])):
        raise InvalidInputError("scale list must be strictly increasing")
    scales, values, results, failed = [], [], [], []
    for r in r_list:
        try:
            res = solve_one(r)
        except (ConfigurationError, SolverError) as exc:
            failed.append((r, str(exc)))
            continue
        scales.append(r)
        values.append(res.normalised)
        results.append(res)
    if len(scales) < 3:
        raise SolverError(
            f"only {len(scales)} of {len(r_list)} scales solved; "
            f"failures: {failed}"
        )
    limit, rate, residual = extrapolate_limit(scales, values)
    return HomEstimate(
        scales=scales, values=values, limit=limit, rate_constant=rate,
        residual=residual, failed=failed, results=results,
    )


def _coefficient_period(integrand) -> float:
    period = getattr(integrand.field, "period", None)
    return 1.0 if period is None else float(period)


def f_hom_estimate(
    f: BulkIntegrand,
    xi,
    x,
    r_list,
    h_rule: int = 8,
    opts: SolveOptions = SolveOptions(),
) -> HomEstimate:
    """Estimate the homogenised bulk integrand at xi via the r-sweep.

    Each scale solves the affine-datum cell problem on Q_r(r x) with
    ``h_rule`` cells per coefficient period and normalises by r^n; the
    limit is the tail fit L + C/r.
    """
    if h_rule < 8:
        raise ConfigurationError(f"h_rule must be >= 8 cells per period, got {h_rule}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    period = _coefficient_period(f)
    h = period / h_rule

    def solve_one(r):
        return bulk_cell_value(f, xi, r * x, r, h, opts=opts)

    return _sweep(r_list, solve_one)


def g_hom_estimate(
    g: SurfaceIntegrand,
    nu,
    x,
    r_list,
    h_rule: int = 8,
    lam_ladder=DEFAULT_LAMBDA_LADDER,
    opts: SolveOptions = SolveOptions(),
    psi: PsiFunction | None = None,
    f: BulkIntegrand | None = None,
    mode: str = "dirichlet",
) -> HomEstimate:
    """Estimate the homogenised surface integrand at nu via the r-sweep.

    The transition length is pinned to eps = 1 (the r -> infinity sweep on
    Q^nu_r(r x) replaces the eps -> 0 limit), so ``h_rule`` sets the cells
    per unit length and each value is normalised by r^(n-1).
    """
    if h_rule < 8:
        raise ConfigurationError(f"h_rule must be >= 8 cells per period, got {h_rule}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if psi is None:
        psi = PsiFunction(q=2.0)
    h = _coefficient_period(g) / h_rule

    def solve_one(r):
        return surface_cell_value(
            g, f, psi, nu, r * x, r, eps=1.0, h=h, mode=mode,
            lam_ladder=lam_ladder, opts=opts,
        )

    return _sweep(r_list, solve_one)


@dataclass(frozen=True)
class RandomFieldSpec:
    """Distribution of an iid unit-lattice checkerboard coefficient field."""

    values: tuple[float, ...]
    probabilities: tuple[float, ...]
    master_seed: int = 0
    p: float = 2.0

    def __post_init__(self):
        probs = np.asarray(self.probabilities, dtype=float)
        if abs(probs.sum() - 1.0) > 1e-12 or (probs < 0).any():
            raise InvalidInputError("probabilities must be nonnegative and sum to 1")
        if len(self.values) != len(self.probabilities):
            raise InvalidInputError("values and probabilities must have equal length")
        if min(self.values) <= 0:
            raise InvalidInputError("coefficient values must be positive")

    def realization(self, seed: int) -> RandomCheckerboard:
        return RandomCheckerboard(
            tuple(float(v) for v in self.values),
            tuple(float(q) for q in self.probabilities),
            master_seed=self.master_seed,
            seed=int(seed),
        )


@dataclass
class FieldSample:
    """A realization restricted to a lattice window, plus the generating field."""

    field: RandomCheckerboard
    window: list[tuple[int, int]]
    values: np.ndarray


def sample_random_checkerboard(spec: RandomFieldSpec, seed: int, window) -> FieldSample:
    """Materialise one realization on a finite lattice window [lo, hi) per axis."""
    window = [(int(lo), int(hi)) for lo, hi in window]
    if any(hi <= lo for lo, hi in window):
        raise InvalidInputError("window must have positive extent on every axis")
    realization = spec.realization(seed)
    return FieldSample(
        field=realization, window=window, values=realization.values_on(window)
    )


@dataclass
class McReport:
    """Monte-Carlo aggregate of normalised cell values over seeds."""

    kind: str
    scale: float
    sample_count: int
    seeds: list[int]
    values: np.ndarray
    converged: list[bool]
    failed: list[tuple[int, str]]
    mean: float
    variance: float
    stderr: float


def mc_estimate(
    kind: str,
    spec: RandomFieldSpec,
    param,
    r: float,
    sample_count: int,
    opts: SolveOptions = SolveOptions(),
    shift=None,
    h_rule: int = 8,
    lam_ladder=DEFAULT_LAMBDA_LADDER,
) -> McReport:
    """Average the normalised cell value at scale r over fresh realizations.

    ``kind`` selects the bulk (affine datum, param = xi) or surface (jump
    datum, param = nu, eps = 1) problem; ``shift`` recenters the window at a
    lattice point z, i.e. Q_r(z).  Seeds run 1..sample_count; solve failures
    are recorded and excluded from the aggregate.
    """
    if kind not in ("bulk", "surface"):
        raise InvalidInputError(f"kind must be 'bulk' or 'surface', got '{kind}'")
    if sample_count < 2:
        raise InvalidInputError(f"sample_count must be >= 2, got {sample_count}")
    param = np.atleast_1d(np.asarray(param, dtype=float))
    n = param.shape[-1]
    center = np.zeros(n) if shift is None else np.asarray(shift, dtype=float)
    h = 1.0 / h_rule
    psi = PsiFunction(q=2.0)
    seeds, values, converged, failed = [], [], [], []
    for seed in range(1, sample_count + 1):
        realization = spec.realization(seed)
        try:
            if kind == "bulk":
                res = bulk_cell_value(
                    BulkIntegrand(realization, p=spec.p), param, center, r, h,
                    opts=opts,
                )
            else:
                res = surface_cell_value(
                    SurfaceIntegrand(realization, p=spec.p), None, psi, param,
                    center, r, eps=1.0, h=h, lam_ladder=lam_ladder, opts=opts,
                )
        except (ConfigurationError, SolverError) as exc:
            failed.append((seed, str(exc)))
            continue
        seeds.append(seed)
        values.append(res.normalised)
        converged.append(bool(res.diagnostics.converged))
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise SolverError(f"all {sample_count} samples failed; first: {failed[0]}")
    mean = float(values.mean())
    variance = float(values.var(ddof=1)) if values.size > 1 else 0.0
    stderr = float(np.sqrt(variance / values.size))
    return McReport(
        kind=kind, scale=float(r), sample_count=sample_count, seeds=seeds,
        values=values, converged=converged, failed=failed,
        mean=mean, variance=variance, stderr=stderr,
    )


@dataclass
class StationarityReport:
    """Per-shift Monte-Carlo means compared against the unshifted window."""

    shifts: list[tuple]
    reports: list[McReport]
    deviations: list[float]
    thresholds: list[float]
    flag: bool


def stationarity_check(
    spec: RandomFieldSpec,
    kind: str,
    param,
    r: float,
    z_list,
    sample_count: int,
    opts: SolveOptions = SolveOptions(),
    h_rule: int = 8,
) -> StationarityReport:
    """Test shift invariance of the Monte-Carlo mean over integer shifts.

    Runs mc_estimate on Q_r(z) for each z with the same seed set and flags
    success when every shifted mean stays within 3 pooled standard errors
    of the unshifted one.
    """
    z_list = [tuple(int(c) for c in np.atleast_1d(z)) for z in z_list]
    base = mc_estimate(
        kind, spec, param, r, sample_count, opts=opts, shift=None, h_rule=h_rule
    )
    reports, deviations, thresholds = [], [], []
    flag = True
    for z in z_list:
        rep = mc_estimate(
            kind, spec, param, r, sample_count, opts=opts, shift=z, h_rule=h_rule
        )
        pooled = float(np.sqrt(base.stderr**2 + rep.stderr**2))
        dev = abs(rep.mean - base.mean)
        reports.append(rep)
        deviations.append(dev)
        thresholds.append(3.0 * pooled)
        if dev > 3.0 * pooled and dev > 1e-12:
            flag = False
    return StationarityReport(
        shifts=z_list, reports=reports, deviations=deviations,
        thresholds=thresholds, flag=flag,
    )


@dataclass
class SubadditivityReport:
    """Surface cell values on a lattice rectangle versus its partition."""

    mu_whole: float
    mu_parts: list[float]
    mu_sum: float
    slack: float
    length: float
    bound: float
    bound_ok: bool


def _interval_surface_value(
    g: SurfaceIntegrand,
    psi: PsiFunction,
    nu,
    interval,
    half_height: float,
    h: float,
    lam_ladder,
    opts: SolveOptions,
) -> float:
    """Raw (unnormalised) surface minimum on interval x (-c, c), eps = 1."""
    nu = np.asarray(nu, dtype=float)
    a, b = float(interval[0]), float(interval[1])
    sides = np.array([b - a, 2.0 * half_height])
    # local frame: first axis tangent to the crack plane, last along nu
    center = rotation_matrix(nu) @ np.array([(a + b) / 2.0, 0.0])
    grid, mask = build_box_grid(center, sides, nu, h, eps=1.0, mode="dirichlet")
    f = BulkIntegrand(Homogeneous(1.0), p=g.p)
    ladder, _, _, _ = _surface_on_grid(
        grid, mask, g, f, psi, eps=1.0, lam_ladder=lam_ladder, opts=opts
    )
    return ladder[-1].value


def subadditivity_check(
    spec: RandomFieldSpec,
    seed: int,
    nu,
    interval,
    partition,
    half_height: float = 2.0,
    h_rule: int = 8,
    lam_ladder=DEFAULT_LAMBDA_LADDER,
    opts: SolveOptions = SolveOptions(),
) -> SubadditivityReport:
    """Compare mu(I) with sum_i mu(I_i) on one realization (eps = 1).

    I and the partition parts are lattice intervals on the crack plane; each
    mu is the raw surface minimum on part x (-c, c) with the jump datum, so
    subadditivity predicts mu(I) <= sum mu(I_i) up to discretisation.  Also
    reports the a-priori bound mu <= c4 * C_v * |I| (with 10% slack).
    """
    nu = np.asarray(nu, dtype=float)
    if not (np.abs(nu).max() == 1.0 and np.count_nonzero(nu) == 1):
        raise InvalidInputError(f"nu must be axis-aligned (+-e_i), got {nu}")
    interval = (int(interval[0]), int(interval[1]))
    parts = sorted((int(a), int(b)) for a, b in partition)
    if parts[0][0] != interval[0] or parts[-1][1] != interval[1] or any(
        p[1] != q[0] for p, q in zip(parts, parts[1:])
    ):
        raise InvalidInputError(
            f"partition {parts} does not exactly cover {interval}"
        )
    g = SurfaceIntegrand(spec.realization(seed), p=spec.p)
    psi = PsiFunction(q=2.0)
    h = 1.0 / h_rule
    mu_whole = _interval_surface_value(
        g, psi, nu, interval, half_height, h, lam_ladder, opts
    )
    mu_parts = [
        _interval_surface_value(g, psi, nu, part, half_height, h, lam_ladder, opts)
        for part in parts
    ]
    mu_sum = float(sum(mu_parts))
    slack = mu_whole - mu_sum
    length = float(interval[1] - interval[0])
    bound = g.c_hi * cv_constant(g.p) * length * 1.1
    bound_ok = 0.0 <= mu_whole <= bound
    return SubadditivityReport(
        mu_whole=mu_whole, mu_parts=mu_parts, mu_sum=mu_sum, slack=slack,
        length=length, bound=bound, bound_ok=bound_ok,
    )
