"""Fidelity-penalised minimisation and an exact 1D Mumford-Shah oracle.

``at_fidelity_minimize`` runs the phase-field solver with an L^q data term
over a decreasing list of transition lengths and records the minimum value
M_eps together with the L^p deviation of v from 1.  ``ms1d_dp_oracle``
computes the exact discrete 1D Mumford-Shah minimum

    min over (u, J)  of  alpha * sum_{i not in J} (u_{i+1} - u_i)^2 / dx
                         + sum_i (u_i - h_i)^2 dx + beta * |J|

by dynamic programming over the position of the last jump, with every
jump-free segment solved in closed form through a quadratic value-function
recursion.  The sharp surface weight matching a homogeneous phase-field
surface integrand b is beta = b * c_p.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .energy import evaluate_energy
from .errors import (
    ConfigurationError,
    InvalidInputError,
    UnsupportedConfigurationError,
)
from .grid import Grid, PhaseFieldState, build_box_grid
from .integrands import BulkIntegrand, Homogeneous, PsiFunction, SurfaceIntegrand
from .solvers import SolveOptions, alternating_minimize

__all__ = [
    "FidelityProblem",
    "FidelityResult",
    "at_fidelity_minimize",
    "ms1d_dp_oracle",
    "ms1d_brute_force",
    "fidelity_data_preset",
    "load_data_csv",
]


@dataclass
class FidelityProblem:
    """Data-fitting problem over a fixed grid and a decreasing eps list."""

    grid: Grid
    data: np.ndarray
    q: float = 2.0
    eps_list: tuple[float, ...] = ()
    f: BulkIntegrand = field(default_factory=lambda: BulkIntegrand(Homogeneous(1.0)))
    g: SurfaceIntegrand = field(default_factory=lambda: SurfaceIntegrand(Homogeneous(1.0)))
    psi: PsiFunction = field(default_factory=PsiFunction)
    opts: SolveOptions = field(default_factory=SolveOptions)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.shape[: self.grid.n] != self.grid.shape:
            raise InvalidInputError(
                f"data shape {self.data.shape} does not match grid {self.grid.shape}"
            )
        if self.data.ndim == self.grid.n:
            self.data = self.data[..., None]
        if self.q < 1:
            raise InvalidInputError(f"fidelity exponent must be >= 1, got {self.q}")
        eps = tuple(float(e) for e in self.eps_list)
        if len(eps) == 0:
            raise InvalidInputError("eps list must be non-empty")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise InvalidInputError("eps list must be strictly decreasing")
        if self.grid.h > min(eps) / 4.0 + 1e-12:
            raise ConfigurationError(
                f"resolution rule violated: h <= eps/4 requires "
                f"h <= {min(eps) / 4.0:g}, got h = {self.grid.h:g}"
            )
        self.eps_list = eps


@dataclass
class FidelityResult:
    """Per-eps minimum value with the minimiser and the v-deviation."""

    eps: float
    value: float
    state: PhaseFieldState
    v_deviation: float
    converged: bool


def at_fidelity_minimize(problem: FidelityProblem) -> list[FidelityResult]:
    """Minimise F_eps(u, v) + sum |u - data|^q h^n for each eps in the list.

    The boundary is natural (free); each solve starts from (u, v) = (data, 1).
    The v-deviation sum |1 - v|^p h^n tracks the collapse of the transition
    layers as eps shrinks.
    """
    grid = problem.grid
    hn = grid.h**grid.n
    results = []
    for eps in problem.eps_list:
        init = PhaseFieldState(problem.data.copy(), np.ones(grid.shape))
        state, breakdown, diag = alternating_minimize(
            grid, problem.f, problem.g, problem.psi, eps,
            boundary=None, init=init, opts=problem.opts,
            fidelity=(problem.data, problem.q),
        )
        v_dev = float(np.sum(np.abs(1.0 - state.v) ** problem.g.p) * hn)
        results.append(
            FidelityResult(
                eps=eps, value=breakdown.objective, state=state,
                v_deviation=v_dev, converged=diag.converged,
            )
        )
    return results


def _segment_costs(h: np.ndarray, alpha: float, dx: float) -> np.ndarray:
    """Optimal jump-free segment costs S[a, b] for all 0 <= a <= b < N.

    S[a, b] = min_u alpha * sum (u_{i+1} - u_i)^2 / dx + sum (u_i - h_i)^2 dx
    over nodes a..b.  Computed by sweeping b while carrying, for every start
    a, the value function min over interior nodes as a quadratic
    A u^2 + B u + C in the segment's right endpoint value u.
    """
    N = h.size
    k = alpha / dx
    S = np.full((N, N), np.inf)
    # quadratics indexed by segment start a (only entries a <= b are live)
    A = np.empty(N)
    B = np.empty(N)
    C = np.empty(N)
    for b in range(N):
        if b > 0:
            # extend segments a <= b-1 by the bond (b-1, b):
            # min_{u'} [A u'^2 + B u' + C + k (u - u')^2]
            a_slice, b_slice, c_slice = A[:b], B[:b], C[:b]
            denom = a_slice + k
            C[:b] = c_slice - b_slice**2 / (4.0 * denom)
            B[:b] = k * b_slice / denom
            A[:b] = k * a_slice / denom
        # start the singleton segment [b, b]
        A[b], B[b], C[b] = 0.0, 0.0, 0.0
        # fidelity of node b applies to every live segment
        A[: b + 1] += dx
        B[: b + 1] += -2.0 * dx * h[b]
        C[: b + 1] += dx * h[b] ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            minimum = C[: b + 1] - B[: b + 1] ** 2 / (4.0 * A[: b + 1])
        S[: b + 1, b] = minimum
    return S


def _segment_minimizer(h: np.ndarray, alpha: float, dx: float) -> np.ndarray:
    """Solve the tridiagonal optimality system of one jump-free segment."""
    N = h.size
    if N == 1:
        return h.copy()
    k = alpha / dx
    main = np.full(N, dx + 2.0 * k)
    main[0] = main[-1] = dx + k
    off = np.full(N - 1, -k)
    K = sp.diags([off, main, off], [-1, 0, 1], format="csc")
    return spla.spsolve(K, dx * h)


def ms1d_dp_oracle(h, q: float = 2.0, alpha: float = 1.0, beta: float = 2.0, p: float = 2.0):
    """Exact discrete 1D Mumford-Shah minimum by dynamic programming.

    ``h`` holds nodal samples on a uniform grid over (0, 1).  Returns
    (M, jump set, u*) where the jump set lists node indices i such that the
    bond (i-1, i) is broken.  Only p = q = 2 admit the closed-form segment
    recursion; anything else is unsupported.
    """
    if q != 2.0 or p != 2.0:
        raise UnsupportedConfigurationError(
            f"exact oracle requires p = q = 2, got p = {p:g}, q = {q:g}"
        )
    h = np.asarray(h, dtype=float).ravel()
    N = h.size
    if N < 2:
        raise InvalidInputError(f"need at least 2 samples, got {N}")
    if N > 2000:
        raise InvalidInputError(f"oracle limited to N <= 2000 samples, got {N}")
    if alpha <= 0 or beta <= 0:
        raise InvalidInputError("alpha and beta must be positive")
    dx = 1.0 / (N - 1)
    S = _segment_costs(h, alpha, dx)
    # P[b] = min cost of nodes 0..b; Q[a] = cost of everything left of a
    # segment starting at a (zero at a = 0, P[a-1] + beta otherwise)
    P = np.empty(N)
    argmin_start = np.empty(N, dtype=np.int64)
    Q = np.empty(N)
    Q[0] = 0.0
    for b in range(N):
        total = Q[: b + 1] + S[: b + 1, b]
        a = int(np.argmin(total))
        P[b] = total[a]
        argmin_start[b] = a
        if b + 1 < N:
            Q[b + 1] = P[b] + beta
    # recover segment boundaries right to left
    jumps = []
    b = N - 1
    while True:
        a = int(argmin_start[b])
        if a == 0:
            break
        jumps.append(a)
        b = a - 1
    jumps = sorted(jumps)
    u = np.empty(N)
    bounds = [0] + jumps + [N]
    for lo, hi in zip(bounds, bounds[1:]):
        u[lo:hi] = _segment_minimizer(h[lo:hi], alpha, dx)
    return float(P[N - 1]), jumps, u


def ms1d_brute_force(h, alpha: float = 1.0, beta: float = 2.0):
    """Exhaustive minimum over all jump subsets; exponential, N <= 14 only."""
    h = np.asarray(h, dtype=float).ravel()
    N = h.size
    if N > 14:
        raise InvalidInputError(f"brute force limited to N <= 14, got {N}")
    dx = 1.0 / (N - 1)
    S = _segment_costs(h, alpha, dx)
    best, best_jumps = np.inf, []
    for count in range(N):
        for jumps in combinations(range(1, N), count):
            bounds = [0, *jumps, N]
            cost = beta * count + sum(
                S[lo, hi - 1] for lo, hi in zip(bounds, bounds[1:])
            )
            if cost < best:
                best, best_jumps = cost, list(jumps)
    return float(best), best_jumps


def fidelity_data_preset(name: str, count: int) -> np.ndarray:
    """Canonical 1D data profiles on ``count`` nodes over (0, 1)."""
    x = np.linspace(0.0, 1.0, count)
    if name == "step":
        return (x > 0.5).astype(float)
    if name == "ramp":
        return x.copy()
    if name == "two-step":
        return (x > 0.25).astype(float) + (x > 0.75).astype(float)
    raise InvalidInputError(f"unknown data preset '{name}'")


def load_data_csv(path) -> np.ndarray:
    """Read nodal data from a CSV file with one value per line."""
    data = np.loadtxt(path, delimiter=",", dtype=float)
    return np.atleast_1d(data)
