"""Density optimization: rearrangement steps, iterative eigenvalue descent,
the torsional fixed-point heuristic, the closed-form upper bound on
longitudinal eigenvalues, and the ratio study."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .config import PlateConfig
from .galerkin import expand_field, solve_parity, solve_weighted
from .spectrum import EVEN, ODD, HomSpectrum, build_spectrum, eval_eigenfunction
from .weights import (Cross, GridField, Sublevel, Uniform, Weight, XBands, YBands,
                      make_breve_p, make_doublebar_p, make_pbar_j, make_tilde_p,
                      make_uniform, sample_field, sublevel_split, validate,
                      weight_to_dict)


class OptimizeError(Exception):
    pass


CONVERGED = "converged"
MAX_ITERS = "max_iters"
DEGENERATE = "degenerate"

# Fraction of the newest eigenfunction density entering the thresholded field.
# The undamped map (fresh u^2 each step) flips large parts of the domain per
# iteration and can hang up short of the optimum from rough starting weights.
DEFAULT_RELAXATION = 0.5


@dataclass(frozen=True, eq=False)
class OptimizationTrace:
    """Accepted iterates of a density optimization run.

    For descent targets the eigenvalue sequence is non-increasing; an iterate
    that would increase it terminates the run at the best weight seen.
    """

    target: str
    iterates: tuple[tuple[Weight, float], ...]
    stop_reason: str
    epsilon: float
    resorted: bool = False  # mode re-identification fired at least once

    @property
    def eigenvalues(self) -> list[float]:
        return [v for _, v in self.iterates]

    @property
    def final_weight(self) -> Weight:
        return self.iterates[-1][0]

    @property
    def final_value(self) -> float:
        return self.iterates[-1][1]


# ---------------------------------------------------------------------------
# rearrangement (bang-bang alignment with the level sets of u^2)
# ---------------------------------------------------------------------------

def _check_rearrange_field(fld: GridField) -> None:
    v = fld.values
    if float(v.min()) < -1e-12 * max(1.0, float(np.max(np.abs(v)))):
        raise ValueError("rearrangement field must be nonnegative")
    resid = float(np.max(np.abs(v - v[:, ::-1])))
    if resid > 1e-10 * max(1.0, float(np.max(np.abs(v)))):
        raise ValueError(f"rearrangement field must be y-even (residual {resid:.3e})")


def rearrange_min(fld: GridField, cfg: PlateConfig) -> Weight:
    """Weight minimizing int p u^2 over the admissible class: the dense phase
    sits on the sublevel set {u^2 <= t} of measure (1-alpha)/(beta-alpha)|Omega|."""
    _check_rearrange_field(fld)
    target = (1.0 - cfg.alpha) / (cfg.beta - cfg.alpha) * cfg.area
    t, theta, degenerate = sublevel_split(fld, target, cfg.beta, cfg.alpha)
    return Weight(Sublevel(fld, t, cfg.beta, cfg.alpha, theta, degenerate),
                  cfg.alpha, cfg.beta)


def rearrange_max(fld: GridField, cfg: PlateConfig) -> Weight:
    """Weight maximizing int p u^2: the light phase sits on the sublevel set
    {u^2 <= t} of measure (beta-1)/(beta-alpha)|Omega|, the dense phase where
    u^2 is large."""
    _check_rearrange_field(fld)
    target = (cfg.beta - 1.0) / (cfg.beta - cfg.alpha) * cfg.area
    t, theta, degenerate = sublevel_split(fld, target, cfg.alpha, cfg.beta)
    return Weight(Sublevel(fld, t, cfg.alpha, cfg.beta, theta, degenerate),
                  cfg.alpha, cfg.beta)


def rearrangement_value(w: Weight, fld: GridField) -> float:
    """J(p) = int p u^2 in the field's grid measure (p sampled at cell centers)."""
    from .weights import eval_weight
    pv = eval_weight(w, fld.xs[:, None], fld.ys[None, :])
    return float(np.sum(pv * fld.values) * fld.cell_area)


def _same_sublevel(a: Weight, b: Weight) -> bool:
    va, vb = a.variant, b.variant
    if not (isinstance(va, Sublevel) and isinstance(vb, Sublevel)):
        return False
    return (va.threshold == vb.threshold
            and va.tie_fraction == vb.tie_fraction
            and np.array_equal(va.inside_mask(), vb.inside_mask()))


# ---------------------------------------------------------------------------
# iterative minimization of mu_j
# ---------------------------------------------------------------------------

def minimize_mu_j(j: int, cfg: PlateConfig, epsilon: float = 1e-4,
                  max_iters: int = 100, initial: Weight | None = None,
                  spectrum: HomSpectrum | None = None,
                  grid: tuple[int, int] = (2400, 31),
                  relaxation: float = DEFAULT_RELAXATION,
                  patience: int = 8) -> OptimizationTrace:
    """Alternating descent on the j-th longitudinal eigenvalue.

    Each round solves the weighted problem, reconstructs the j-th longitudinal
    eigenfunction, and re-aligns the dense phase with the superlevel set of a
    relaxed running average of its square. The trace records the improving
    iterates (non-increasing by construction); the loop keeps going through
    transient up-steps and stops once a new best improves by less than
    epsilon, the weight repeats, or no improvement arrives within `patience`
    rounds.

    The working grid is finer than the general sublevel default: the iteration
    can lock onto self-consistent band systems whose edges sit a cell or two
    off the optimum, and the residual spread scales with the cell width.
    """
    if j < 1:
        raise ValueError(f"j must be >= 1, got {j}")
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    if not 0.0 < relaxation <= 1.0:
        raise ValueError(f"relaxation must be in (0, 1], got {relaxation}")
    if spectrum is None:
        spectrum = build_spectrum(cfg)
    n = min(spectrum.config.n_modes, len(spectrum.mu))
    if j > n:
        raise ValueError(f"j={j} exceeds the truncation {n}")

    w = initial if initial is not None else make_uniform(cfg)
    iterates: list[tuple[Weight, float]] = []
    stop = MAX_ITERS
    resorted = False
    prev_vec: np.ndarray | None = None
    g_field: np.ndarray | None = None
    best_value = math.inf
    rounds_since_best = 0

    for _ in range(max_iters):
        lam, coeffs, mass = solve_parity(w, spectrum, EVEN, n, return_mass=True)
        idx = j - 1
        if prev_vec is not None and j > 1:
            overlaps = np.abs(prev_vec @ mass.a @ coeffs)
            closest = int(np.argmax(overlaps))
            norm_sq = float(prev_vec @ mass.a @ prev_vec)
            proj_sq = float(np.sum(overlaps[: j - 1] ** 2))
            residual = math.sqrt(max(0.0, 1.0 - proj_sq / norm_sq))
            if residual < 1e-6 or closest != idx:
                # tracked mode slid into the lower block: follow it
                idx = closest
                resorted = True
        value = float(lam[idx])

        if value < best_value * (1.0 - 1e-12):
            improvement = (best_value - value) / value if iterates else math.inf
            iterates.append((w, value))
            best_value = value
            rounds_since_best = 0
            if improvement < epsilon:
                stop = CONVERGED
                break
        else:
            rounds_since_best += 1
            if rounds_since_best >= patience:
                stop = CONVERGED
                break

        prev_vec = coeffs[:, idx]
        u = expand_field(spectrum, EVEN, coeffs[:, idx], grid)
        u_sq = u.values ** 2
        g_field = u_sq if g_field is None else (
            (1.0 - relaxation) * g_field + relaxation * u_sq)
        w_next = rearrange_max(GridField(g_field, cfg.ell, "even"), cfg)
        if isinstance(w_next.variant, Sublevel) and w_next.variant.degenerate:
            stop = DEGENERATE
            break
        if _same_sublevel(w_next, w):
            stop = CONVERGED
            break
        w = w_next

    return OptimizationTrace(target=f"min_mu_{j}", iterates=tuple(iterates),
                             stop_reason=stop, epsilon=epsilon, resorted=resorted)


# ---------------------------------------------------------------------------
# torsional fixed point
# ---------------------------------------------------------------------------

def make_pstar(cfg: PlateConfig, spectrum: HomSpectrum | None = None,
               grid: tuple[int, int] = (600, 31)) -> Weight:
    """Dense phase on the sublevel set of the first torsional eigenfunction
    squared of the uniform plate (the trial weight of the fixed point)."""
    if spectrum is None:
        spectrum = build_spectrum(cfg)
    theta1 = spectrum.nu[0]
    fld = sample_field(lambda x, y: eval_eigenfunction(theta1, x, y) ** 2,
                       cfg, grid[0], grid[1], parity="even")
    return rearrange_min(fld, cfg)


def symmetric_difference_area(a: Weight, b: Weight) -> float:
    """Grid measure of the symmetric difference of two sublevel dense-phase sets."""
    va, vb = a.variant, b.variant
    if not (isinstance(va, Sublevel) and isinstance(vb, Sublevel)):
        raise TypeError("both weights must be sublevel weights")
    if va.field.values.shape != vb.field.values.shape:
        raise ValueError("sublevel weights live on different grids")
    return float(np.count_nonzero(va.inside_mask() ^ vb.inside_mask())) * va.field.cell_area


def maximize_nu1_fixed_point(cfg: PlateConfig, max_iters: int = 100,
                             spectrum: HomSpectrum | None = None,
                             grid: tuple[int, int] = (600, 31),
                             area_tol: float = 0.01) -> OptimizationTrace:
    """Fixed-point iteration for the first torsional eigenvalue.

    Starts from the trial weight built on the uniform plate's first torsional
    eigenfunction; each round re-thresholds the current first torsional
    eigenfunction squared. Stops when consecutive dense-phase sets differ by
    less than area_tol * |Omega|.
    """
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    if spectrum is None:
        spectrum = build_spectrum(cfg)
    n = min(spectrum.config.n_modes, len(spectrum.nu))
    w = make_pstar(cfg, spectrum, grid)
    iterates: list[tuple[Weight, float]] = []
    stop = MAX_ITERS
    for _ in range(max_iters):
        nu, coeffs = solve_parity(w, spectrum, ODD, n)
        iterates.append((w, float(nu[0])))
        u = expand_field(spectrum, ODD, coeffs[:, 0], grid)
        fld = GridField(u.values ** 2, cfg.ell, "even")
        w_next = rearrange_min(fld, cfg)
        if isinstance(w_next.variant, Sublevel) and w_next.variant.degenerate:
            stop = DEGENERATE
            break
        if symmetric_difference_area(w, w_next) < area_tol * cfg.area:
            stop = CONVERGED
            break
        w = w_next
    return OptimizationTrace(target="max_nu1", iterates=tuple(iterates),
                             stop_reason=stop, epsilon=area_tol)


# ---------------------------------------------------------------------------
# closed-form upper bound on mu_j
# ---------------------------------------------------------------------------

def _sin4_antiderivative(u: float) -> float:
    return 0.375 * u - 0.25 * math.sin(2.0 * u) + math.sin(4.0 * u) / 32.0


def _sin4_integral(j: int, a: float, b: float) -> float:
    """int_a^b sin^4(j x) dx."""
    return (_sin4_antiderivative(j * b) - _sin4_antiderivative(j * a)) / j


def _clip_intervals(intervals, lo: float, hi: float):
    out = []
    for a, b in intervals:
        a2, b2 = max(a, lo), min(b, hi)
        if a2 < b2:
            out.append((a2, b2))
    return out


def _weighted_sin4_cell(w: Weight, j: int, x_lo: float, x_hi: float,
                        cfg: PlateConfig) -> float:
    """|| sqrt(p) sin^2(jx) ||^2 over (x_lo, x_hi) x (-ell, ell)."""
    v = w.variant
    if isinstance(v, Sublevel):
        f = v.field
        xs = f.xs
        cols = (xs >= x_lo) & (xs < x_hi)
        pv = v.node_values()
        sin4 = np.sin(j * xs[cols]) ** 4
        return float(np.sum(pv[cols, :] * sin4[:, None]) * f.cell_area)

    if isinstance(v, Uniform):
        terms = [(v.value, None, None)]
    elif isinstance(v, XBands):
        terms = [(v.outside, None, None), (v.inside - v.outside, v.intervals, None)]
    elif isinstance(v, YBands):
        terms = [(v.outside, None, None), (v.inside - v.outside, None, v.intervals)]
    elif isinstance(v, Cross):
        d = v.inside - v.outside
        terms = [(v.outside, None, None), (d, v.x_intervals, None),
                 (d, None, v.y_intervals), (-d, v.x_intervals, v.y_intervals)]
    else:
        raise TypeError(f"unknown weight variant {type(v).__name__}")

    total = 0.0
    for coeff, x_iv, y_iv in terms:
        if coeff == 0.0:
            continue
        xs = _clip_intervals(x_iv, x_lo, x_hi) if x_iv is not None else [(x_lo, x_hi)]
        x_part = sum(_sin4_integral(j, a, b) for a, b in xs)
        y_part = (sum(b - a for a, b in y_iv) if y_iv is not None else 2.0 * cfg.ell)
        total += coeff * x_part * y_part
    return total


def mu_upper_bound(w: Weight, j: int, cfg: PlateConfig) -> float:
    """Upper bound on mu_j(p) from disjointly supported sin^2(jx) trial
    functions: max over the j period cells of j^3 |Omega| / ||sqrt(p) w_m||^2."""
    if j < 2:
        raise ValueError(f"j must be >= 2, got {j}")
    cells = [(m * math.pi / j, (m + 1) * math.pi / j) for m in range(j)]
    norms = [_weighted_sin4_cell(w, j, a, b, cfg) for a, b in cells]
    if min(norms) <= 0.0:
        raise OptimizeError("degenerate weighted trial norm")
    return max(float(j) ** 3 * cfg.area / v for v in norms)


def mu_upper_bound_forms(w: Weight, j: int, cfg: PlateConfig,
                         periodic: bool = False) -> tuple[float, float | None]:
    """(general bound, periodic-form bound or None).

    For pi/j-periodic weights the two expressions agree: the total trial norm
    splits evenly over the period cells.
    """
    general = mu_upper_bound(w, j, cfg)
    if not periodic:
        return general, None
    total = _weighted_sin4_cell(w, j, 0.0, math.pi, cfg)
    per = float(j) ** 4 * cfg.area / total
    if abs(per - general) > 1e-10 * max(abs(per), abs(general)):
        raise OptimizeError(
            f"periodic-form bound {per!r} disagrees with the general bound "
            f"{general!r}; weight is not pi/{j}-periodic")
    return general, per


# ---------------------------------------------------------------------------
# ratio study
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatioRow:
    label: str
    mu: tuple[float, ...]  # first 12 longitudinal eigenvalues
    nu1: float
    nu2: float
    ratio: float           # nu1 / mu_{j0}


@dataclass(frozen=True)
class RatioReport:
    rows: tuple[RatioRow, ...]
    j0: int


def default_study_weights(cfg: PlateConfig, spectrum: HomSpectrum,
                          grid: tuple[int, int] = (600, 31)) -> list[tuple[str, Weight]]:
    """The six benchmark densities: uniform, banded, torsional-optimal trial,
    mid-line band, edge-loaded band, and the cross combination."""
    j0 = spectrum.j0
    return [
        ("uniform", make_uniform(cfg)),
        (f"pbar{j0}", make_pbar_j(j0, cfg)),
        ("pstar", make_pstar(cfg, spectrum, grid)),
        ("pbreve", make_breve_p(cfg)),
        ("pdoublebar", make_doublebar_p(cfg)),
        ("ptilde", make_tilde_p(cfg, j=j0)),
    ]


def ratio_study(weights: list[tuple[str, Weight]], cfg: PlateConfig,
                spectrum: HomSpectrum | None = None, n: int = 30) -> RatioReport:
    """Tabulate mu_1..mu_12, nu_1, nu_2 and the ratio nu_1/mu_j0 per weight."""
    if spectrum is None:
        spectrum = build_spectrum(cfg.with_(n_modes=max(cfg.n_modes, n)))
    j0 = spectrum.j0
    if n < 12 or j0 > n:
        raise ValueError(f"need truncation >= max(12, j0={j0}), got {n}")
    rows = []
    for label, w in weights:
        rep = validate(w, cfg)
        if not rep.passed:
            raise OptimizeError(f"weight {label!r} fails validation: {rep.detail}")
        gs = solve_weighted(w, spectrum, n)
        rows.append(RatioRow(
            label=label,
            mu=tuple(float(v) for v in gs.mu_p[:12]),
            nu1=float(gs.nu_p[0]),
            nu2=float(gs.nu_p[1]),
            ratio=float(gs.nu_p[0] / gs.mu_p[j0 - 1]),
        ))
    return RatioReport(rows=tuple(rows), j0=j0)


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------

def trace_to_jsonl(trace: OptimizationTrace) -> str:
    """One iterate per line: iteration index, eigenvalue, weight spec."""
    lines = []
    for i, (w, v) in enumerate(trace.iterates):
        lines.append(json.dumps({"iteration": i, "eigenvalue": v,
                                 "weight": weight_to_dict(w)}))
    return "\n".join(lines) + "\n"


def ratio_report_to_csv(report: RatioReport, fmt: str = "%.6e") -> str:
    """Rows mu_1..mu_12, nu_1, nu_2, R; one column per weight."""
    labels = [r.label for r in report.rows]
    lines = ["quantity," + ",".join(labels)]
    for i in range(12):
        lines.append(f"mu_{i+1}," + ",".join(fmt % r.mu[i] for r in report.rows))
    lines.append("nu_1," + ",".join(fmt % r.nu1 for r in report.rows))
    lines.append("nu_2," + ",".join(fmt % r.nu2 for r in report.rows))
    lines.append("R," + ",".join(fmt % r.ratio for r in report.rows))
    return "\n".join(lines) + "\n"
