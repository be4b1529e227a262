"""Bulk and surface integrand families with coefficient-form evaluation.

Both families share the same spatial coefficient variants (homogeneous,
laminate, checkerboard, random checkerboard).  A bulk density is
``a(x) * |xi|^p`` and a surface density is ``b(x) * (|1-v|^p + |w|^p)``,
so the declared growth constants are attained exactly by the coefficient
range and every class inequality is testable without slack.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "Homogeneous",
    "Laminate",
    "Checkerboard",
    "RandomCheckerboard",
    "BulkIntegrand",
    "SurfaceIntegrand",
    "PsiFunction",
    "ClassReport",
    "eval_bulk",
    "eval_surface",
    "eval_psi",
    "validate_classes",
    "integrand_to_json",
    "integrand_from_json",
]


# ---------------------------------------------------------------------------
# coefficient fields
# ---------------------------------------------------------------------------

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _splitmix64(z: np.ndarray) -> np.ndarray:
    """One round of the splitmix64 mixer, vectorised over uint64 arrays."""
    with np.errstate(over="ignore"):
        z = (z + np.uint64(0x9E3779B97F4A7C15)) & _MASK64
        z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK64
        z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK64
        return z ^ (z >> np.uint64(31))


def _counter_uniform(master_seed: int, seed: int, cells: np.ndarray) -> np.ndarray:
    """Deterministic uniform(0,1) per lattice cell, keyed by (seeds, cell index).

    Counter-based: the value at a cell depends only on the key, so any two
    windows that overlap see identical draws on the overlap.
    """
    h = _splitmix64(np.array(master_seed, dtype=np.int64).view(np.uint64))
    h = _splitmix64(h ^ np.array(seed, dtype=np.int64).view(np.uint64))
    h = np.broadcast_to(h, cells.shape[:-1]).copy()
    for k in range(cells.shape[-1]):
        h = _splitmix64(h ^ cells[..., k].astype(np.int64).view(np.uint64))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


@dataclass(frozen=True)
class Homogeneous:
    c: float

    def coefficient(self, x: np.ndarray) -> np.ndarray:
        return np.full(np.asarray(x).shape[:-1], float(self.c))

    @property
    def values(self) -> tuple[float, ...]:
        return (float(self.c),)

    params = property(lambda self: {"c": self.c})


@dataclass(frozen=True)
class Laminate:
    """Stripes of equal width cycling through ``values`` along ``direction``."""

    values_list: tuple[float, ...]
    direction: tuple[float, ...]
    period: float
    offset: float = 0.0

    def coefficient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t = x @ np.asarray(self.direction, dtype=float)
        k = len(self.values_list)
        phase = np.mod((t - self.offset) / self.period, 1.0)
        idx = np.minimum((phase * k).astype(int), k - 1)
        return np.asarray(self.values_list, dtype=float)[idx]

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.values_list)

    params = property(
        lambda self: {
            "values": list(self.values_list),
            "direction": list(self.direction),
            "period": self.period,
            "offset": self.offset,
        }
    )


@dataclass(frozen=True)
class Checkerboard:
    """Two-valued checkerboard on half-open cells [z, z+period)^n.

    Cell parity is (sum_i floor(x_i/period)) mod 2; parity 0 takes the first
    value.
    """

    values_pair: tuple[float, float]
    period: float = 1.0

    def coefficient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        parity = np.floor(x / self.period).astype(np.int64).sum(axis=-1) & 1
        return np.where(parity == 0, self.values_pair[0], self.values_pair[1])

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.values_pair)

    params = property(
        lambda self: {"values": list(self.values_pair), "period": self.period}
    )


@dataclass(frozen=True)
class RandomCheckerboard:
    """Iid draws per unit lattice cell from a finite distribution.

    The draw at a cell is a counter-based pseudo-random function of
    ``(master_seed, seed, cell index)``: shifted windows reproduce
    overlapping values exactly, which gives stationarity by construction.
    """

    values_list: tuple[float, ...]
    probabilities: tuple[float, ...]
    master_seed: int = 0
    seed: int = 0

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if abs(p.sum() - 1.0) > 1e-12 or (p < 0).any():
            raise InvalidInputError("probabilities must be nonnegative and sum to 1")
        if len(self.values_list) != len(self.probabilities):
            raise InvalidInputError("values and probabilities must have equal length")

    def coefficient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        cells = np.floor(x).astype(np.int64)
        u = _counter_uniform(self.master_seed, self.seed, cells)
        cum = np.cumsum(np.asarray(self.probabilities, dtype=float))
        idx = np.searchsorted(cum, u, side="right")
        idx = np.minimum(idx, len(self.values_list) - 1)
        return np.asarray(self.values_list, dtype=float)[idx]

    def values_on(self, window: Sequence[tuple[int, int]]) -> np.ndarray:
        """Materialise the field on a finite lattice window [lo, hi) per axis."""
        axes = [np.arange(lo, hi) for lo, hi in window]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return self.coefficient(mesh + 0.5)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.values_list)

    params = property(
        lambda self: {
            "values": list(self.values_list),
            "probabilities": list(self.probabilities),
            "master_seed": self.master_seed,
            "seed": self.seed,
        }
    )


_KINDS = {
    "homogeneous": Homogeneous,
    "laminate": Laminate,
    "checkerboard": Checkerboard,
    "random_checkerboard": RandomCheckerboard,
}


def _kind_name(fld) -> str:
    for name, cls in _KINDS.items():
        if isinstance(fld, cls):
            return name
    raise InvalidInputError(f"unknown coefficient field {type(fld).__name__}")


# ---------------------------------------------------------------------------
# integrands
# ---------------------------------------------------------------------------


def _frob(xi: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.square(xi), axis=(-2, -1)))


@dataclass(frozen=True)
class BulkIntegrand:
    """f(x, xi) = scale * a(x) * |xi|^p with declared class constants.

    ``c_lo``/``c_hi`` are the growth constants and ``lip`` the xi-Lipschitz
    modulus; the constructor defaults make the growth bounds exact
    (coefficient range) and take lip = p * c_hi from the derivative bound.
    """

    field: object
    p: float = 2.0
    c_lo: float | None = None
    c_hi: float | None = None
    lip: float | None = None
    scale: float = 1.0

    def __post_init__(self):
        if not self.p > 1:
            raise InvalidInputError("exponent p must exceed 1")
        vals = np.asarray(self.field.values, dtype=float) * self.scale
        if (vals <= 0).any():
            raise InvalidInputError("coefficient values must be positive")
        if self.c_lo is None:
            object.__setattr__(self, "c_lo", float(vals.min()))
        if self.c_hi is None:
            object.__setattr__(self, "c_hi", float(vals.max()))
        if self.lip is None:
            object.__setattr__(self, "lip", self.p * self.c_hi)

    def coefficient(self, x: np.ndarray) -> np.ndarray:
        return self.scale * self.field.coefficient(x)

    def __call__(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        if not np.isfinite(xi).all():
            raise InvalidInputError("non-finite gradient entries")
        return self.coefficient(np.asarray(x, dtype=float)) * _frob(xi) ** self.p

    def scaled(self, factor: float) -> "BulkIntegrand":
        """Rescale the coefficient (used for the penalty multiplier)."""
        return replace(
            self,
            scale=self.scale * factor,
            c_lo=self.c_lo * factor,
            c_hi=self.c_hi * factor,
            lip=self.lip * factor,
        )


@dataclass(frozen=True)
class SurfaceIntegrand:
    """g(x, v, w) = scale * b(x) * (|1-v|^p + |w|^p)."""

    field: object
    p: float = 2.0
    c_lo: float | None = None
    c_hi: float | None = None
    lip: float | None = None
    scale: float = 1.0

    __post_init__ = BulkIntegrand.__post_init__

    def coefficient(self, x: np.ndarray) -> np.ndarray:
        return self.scale * self.field.coefficient(x)

    def __call__(self, x: np.ndarray, v, w) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        w = np.asarray(w, dtype=float)
        if not (np.isfinite(v).all() and np.isfinite(w).all()):
            raise InvalidInputError("non-finite surface arguments")
        wn = np.sqrt(np.sum(np.square(w), axis=-1)) if w.ndim else np.abs(w)
        return self.coefficient(np.asarray(x, dtype=float)) * (
            np.abs(1.0 - v) ** self.p + wn**self.p
        )

    scaled = BulkIntegrand.scaled


@dataclass(frozen=True)
class PsiFunction:
    """Damage weight psi(v) = clamp(v, 0, 1)^q, or a tabulated monotone curve."""

    q: float = 2.0
    table: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.table is None and not self.q >= 1:
            raise InvalidInputError("power exponent q must be >= 1")
        if self.table is not None:
            pts = np.asarray(self.table, dtype=float)
            if (np.diff(pts[:, 0]) <= 0).any() or (np.diff(pts[:, 1]) < 0).any():
                raise InvalidInputError("table must be monotone in v and psi")

    def __call__(self, v: np.ndarray) -> np.ndarray:
        v = np.clip(np.asarray(v, dtype=float), 0.0, 1.0)
        if self.table is not None:
            pts = np.asarray(self.table, dtype=float)
            return np.interp(v, pts[:, 0], pts[:, 1])
        return v**self.q

    def derivative(self, v: np.ndarray) -> np.ndarray:
        """d psi / d v, with the clamp giving zero slope outside [0, 1]."""
        v = np.asarray(v, dtype=float)
        inside = (v > 0.0) & (v < 1.0) if self.q > 1 else (v >= 0.0) & (v <= 1.0)
        if self.table is not None:
            pts = np.asarray(self.table, dtype=float)
            slopes = np.diff(pts[:, 1]) / np.diff(pts[:, 0])
            idx = np.clip(np.searchsorted(pts[:, 0], np.clip(v, 0, 1)) - 1, 0, len(slopes) - 1)
            return np.where(inside, slopes[idx], 0.0)
        vc = np.clip(v, 0.0, 1.0)
        return np.where(inside, self.q * vc ** (self.q - 1.0), 0.0)


def eval_bulk(f: BulkIntegrand, x, xi) -> float:
    return float(f(x, xi))


def eval_surface(g: SurfaceIntegrand, x, v, w) -> float:
    return float(g(x, v, w))


def eval_psi(psi: PsiFunction, v) -> float:
    return float(psi(v))


# ---------------------------------------------------------------------------
# class-axiom validation
# ---------------------------------------------------------------------------


@dataclass
class AxiomCheck:
    name: str
    passed: bool
    worst_margin: float
    witness: dict = field(default_factory=dict)


@dataclass
class ClassReport:
    checks: list[AxiomCheck]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _record(checks, name, margins, witnesses):
    margins = np.asarray(margins, dtype=float)
    i = int(np.argmin(margins))
    checks.append(
        AxiomCheck(
            name=name,
            passed=bool(margins.min() >= -1e-12),
            worst_margin=float(margins.min()),
            witness=witnesses(i),
        )
    )


def validate_classes(
    integrand: BulkIntegrand | SurfaceIntegrand,
    sample_count: int = 200,
    seed: int = 0,
    n: int = 2,
    m: int = 1,
) -> ClassReport:
    """Sample the class inequalities and report pass/fail with worst witnesses."""
    if sample_count < 1:
        raise InvalidInputError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-10.0, 10.0, size=(sample_count, n))
    checks: list[AxiomCheck] = []
    p = integrand.p

    if isinstance(integrand, BulkIntegrand):
        xi = rng.standard_normal((sample_count, m, n)) * rng.uniform(
            0.1, 5.0, (sample_count, 1, 1)
        )
        vals = integrand(xs, xi)
        norm_p = _frob(xi) ** p
        _record(
            checks,
            "lower growth: c_lo |xi|^p <= f",
            vals - integrand.c_lo * norm_p,
            lambda i: {"x": xs[i].tolist(), "xi": xi[i].tolist()},
        )
        _record(
            checks,
            "upper growth: f <= c_hi |xi|^p",
            integrand.c_hi * norm_p - vals,
            lambda i: {"x": xs[i].tolist(), "xi": xi[i].tolist()},
        )
        _record(
            checks,
            "nondegeneracy: f(x,0)=0, f>0 otherwise",
            np.where(norm_p > 0, vals, -integrand(xs, np.zeros_like(xi))),
            lambda i: {"x": xs[i].tolist()},
        )
        xi2 = rng.standard_normal((sample_count, m, n)) * rng.uniform(
            0.1, 5.0, (sample_count, 1, 1)
        )
        lhs = np.abs(integrand(xs, xi) - integrand(xs, xi2))
        rhs = integrand.lip * (
            1.0 + _frob(xi) ** (p - 1) + _frob(xi2) ** (p - 1)
        ) * _frob(xi - xi2)
        _record(
            checks,
            "xi-Lipschitz modulus",
            rhs - lhs,
            lambda i: {"x": xs[i].tolist(), "xi1": xi[i].tolist(), "xi2": xi2[i].tolist()},
        )
    else:
        v = rng.uniform(-0.5, 1.5, sample_count)
        w = rng.standard_normal((sample_count, n)) * rng.uniform(
            0.1, 5.0, (sample_count, 1)
        )
        wn = np.sqrt(np.sum(w * w, axis=-1))
        ref = np.abs(1.0 - v) ** p + wn**p
        vals = integrand(xs, v, w)
        _record(
            checks,
            "lower growth: c_lo (|1-v|^p + |w|^p) <= g",
            vals - integrand.c_lo * ref,
            lambda i: {"x": xs[i].tolist(), "v": float(v[i]), "w": w[i].tolist()},
        )
        _record(
            checks,
            "upper growth: g <= c_hi (|1-v|^p + |w|^p)",
            integrand.c_hi * ref - vals,
            lambda i: {"x": xs[i].tolist(), "v": float(v[i]), "w": w[i].tolist()},
        )
        _record(
            checks,
            "minimum in w: g(x,v,0) <= g(x,v,w)",
            vals - integrand(xs, v, np.zeros_like(w)),
            lambda i: {"x": xs[i].tolist(), "v": float(v[i]), "w": w[i].tolist()},
        )
        _record(
            checks,
            "zero only at (v,w)=(1,0)",
            np.where(
                (np.abs(v - 1.0) > 1e-12) | (wn > 1e-12),
                np.where(vals > 0, 1.0, -1.0),
                np.abs(integrand(xs, np.ones_like(v), np.zeros_like(w))) * -1.0
                + 1e-15,
            ),
            lambda i: {"x": xs[i].tolist(), "v": float(v[i]), "w": w[i].tolist()},
        )
        # monotonicity in v away from/towards 1; keep each pair on one side
        # of v = 1, where the ordering is actually asserted
        v2 = v + rng.uniform(0.0, 0.5, sample_count)
        below = v <= 1.0
        v2 = np.where(below, np.minimum(v2, 1.0), v2)
        g1 = integrand(xs, v, np.zeros_like(w))
        g2 = integrand(xs, v2, np.zeros_like(w))
        _record(
            checks,
            "monotone in v (decreasing below 1, increasing above)",
            np.where(below, g1 - g2, g2 - g1),
            lambda i: {"x": xs[i].tolist(), "v1": float(v[i]), "v2": float(v2[i])},
        )
    return ClassReport(checks)


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------


def integrand_to_json(integrand: BulkIntegrand | SurfaceIntegrand) -> str:
    doc = {
        "kind": _kind_name(integrand.field),
        "p": integrand.p,
        "params": integrand.field.params,
        "constants": {
            "c_lo": integrand.c_lo,
            "c_hi": integrand.c_hi,
            "L": integrand.lip,
        },
        "role": "bulk" if isinstance(integrand, BulkIntegrand) else "surface",
    }
    return json.dumps(doc)


def field_from_description(kind: str, params: dict):
    if kind == "homogeneous":
        return Homogeneous(c=float(params["c"]))
    if kind == "laminate":
        return Laminate(
            values_list=tuple(params["values"]),
            direction=tuple(params["direction"]),
            period=float(params["period"]),
            offset=float(params.get("offset", 0.0)),
        )
    if kind == "checkerboard":
        return Checkerboard(
            values_pair=tuple(params["values"]), period=float(params.get("period", 1.0))
        )
    if kind == "random_checkerboard":
        return RandomCheckerboard(
            values_list=tuple(params["values"]),
            probabilities=tuple(params["probabilities"]),
            master_seed=int(params.get("master_seed", 0)),
            seed=int(params.get("seed", 0)),
        )
    raise InvalidInputError(f"unknown coefficient kind '{kind}'")


def integrand_from_json(text: str | dict):
    doc = json.loads(text) if isinstance(text, str) else text
    fld = field_from_description(doc["kind"], doc.get("params", {}))
    consts = doc.get("constants", {})
    cls = SurfaceIntegrand if doc.get("role") == "surface" else BulkIntegrand
    return cls(
        field=fld,
        p=float(doc.get("p", 2.0)),
        c_lo=consts.get("c_lo"),
        c_hi=consts.get("c_hi"),
        lip=consts.get("L"),
    )
