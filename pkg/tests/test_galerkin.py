import math

import numpy as np
import pytest

from conftest import random_band_weight
from plate_spectra import PlateConfig
from plate_spectra.galerkin import (assemble_mass, expand_field, h2_energy,
                                    merged_eigenvalues, reconstruct, solve_parity,
                                    solve_weighted, weighted_l2_sq, weyl_diagnostic)
from plate_spectra.numerics import QuadratureRule, integrate_2d
from plate_spectra.spectrum import build_spectrum, eval_eigenfunction
from plate_spectra.weights import (Weight, XBands, eval_weight, make_breve_p,
                                   make_pbar_j, make_uniform, sqrt_mass_integral)


def sig3(x: float) -> str:
    return f"{x:.2e}"


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def test_uniform_mass_is_identity(ref_cfg, ref_spectrum):
    for parity in ("even", "odd"):
        c = assemble_mass(make_uniform(ref_cfg), ref_spectrum, parity, 30)
        assert np.abs(c.a - np.eye(30)).max() < 1e-8


def test_mass_matrix_symmetric_exactly(ref_cfg, ref_spectrum):
    c = assemble_mass(make_pbar_j(10, ref_cfg), ref_spectrum, "even", 20)
    assert np.array_equal(c.a, c.a.T)


def test_band_assembly_vs_brute_force(ref_cfg, ref_spectrum):
    # closed-form-in-x entries against midpoint integration on a fine grid
    w = Weight(XBands(((0.4, 1.1), (2.0, 2.9)), 1.3, 0.7), ref_cfg.alpha, ref_cfg.beta)
    n = 6
    c = assemble_mass(w, ref_spectrum, "even", n)
    pairs = ref_spectrum.mu[:n]
    rx = QuadratureRule(0.0, math.pi, kind="composite-midpoint", order=1500,
                        breakpoints=(0.4, 1.1, 2.0, 2.9))
    ry = QuadratureRule(-ref_cfg.ell, ref_cfg.ell, kind="composite-midpoint", order=200)
    for i in (0, 2, 5):
        for j in (0, 3, 5):
            brute = integrate_2d(
                lambda x, y, i=i, j=j: eval_weight(w, x, y)
                * eval_eigenfunction(pairs[i], x, y)
                * eval_eigenfunction(pairs[j], x, y), rx, ry)
            assert abs(c.a[i, j] - brute) <= 1e-6 * max(1.0, abs(brute))


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def test_uniform_solve_echoes_spectrum(ref_cfg, ref_spectrum):
    gs = solve_weighted(make_uniform(ref_cfg), ref_spectrum)
    mu1 = np.array([p.lam for p in ref_spectrum.mu])
    nu1 = np.array([p.lam for p in ref_spectrum.nu])
    assert np.abs(gs.mu_p / mu1 - 1.0).max() < 1e-10
    assert np.abs(gs.nu_p / nu1 - 1.0).max() < 1e-10


def test_banded_weight_reference_values(ref_cfg, ref_spectrum):
    gs = solve_weighted(make_pbar_j(10, ref_cfg), ref_spectrum)
    assert sig3(gs.mu_p[9]) == "7.28e+03"
    assert sig3(gs.nu_p[0]) == "1.09e+04"
    gs = solve_weighted(make_breve_p(ref_cfg), ref_spectrum)
    assert sig3(gs.nu_p[0]) == "1.75e+04"
    assert sig3(gs.mu_p[9]) == "9.62e+03"


def test_coefficients_weighted_orthonormal(ref_cfg, ref_spectrum):
    w = make_pbar_j(10, ref_cfg)
    c = assemble_mass(w, ref_spectrum, "even", 30).a
    gs = solve_weighted(w, ref_spectrum)
    gram = gs.a_coeffs.T @ c @ gs.a_coeffs
    assert np.abs(gram - np.eye(30)).max() < 1e-8


def test_stability_inequality_random_bands(ref_cfg, ref_spectrum):
    rng = np.random.default_rng(17)
    mu1 = np.array([p.lam for p in ref_spectrum.mu[:12]])
    nu1 = np.array([p.lam for p in ref_spectrum.nu[:12]])
    for _ in range(10):
        w = random_band_weight(rng, ref_cfg)
        gs = solve_weighted(w, ref_spectrum, 12)
        for lam_p, lam_1 in ((gs.mu_p, mu1), (gs.nu_p, nu1)):
            assert np.all(lam_p >= lam_1 / ref_cfg.beta * (1 - 1e-9))
            assert np.all(lam_p <= lam_1 / ref_cfg.alpha * (1 + 1e-9))


def test_truncation_monotone(ref_cfg, ref_spectrum):
    w = make_pbar_j(10, ref_cfg)
    lo = solve_weighted(w, ref_spectrum, 20)
    hi = solve_weighted(w, ref_spectrum, 30)
    assert np.all(lo.mu_p >= hi.mu_p[:20] * (1 - 1e-9))
    assert np.all(lo.nu_p >= hi.nu_p[:20] * (1 - 1e-9))


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------

def test_reconstruct_single_mode(ref_cfg, ref_spectrum):
    gs = solve_weighted(make_uniform(ref_cfg), ref_spectrum)
    fld = reconstruct(gs, ref_spectrum, ("even", 1), (150, 31))
    direct = eval_eigenfunction(ref_spectrum.mu[0], fld.xs[:, None], fld.ys[None, :])
    assert np.abs(fld.values - direct).max() < 1e-10


def test_reconstruct_parity(ref_cfg, ref_spectrum):
    gs = solve_weighted(make_pbar_j(10, ref_cfg), ref_spectrum)
    odd = reconstruct(gs, ref_spectrum, ("odd", 3), (100, 31))
    assert odd.parity == "odd"
    assert np.abs(odd.values + odd.values[:, ::-1]).max() < 1e-10
    even = reconstruct(gs, ref_spectrum, ("even", 4), (100, 31))
    assert np.abs(even.values - even.values[:, ::-1]).max() < 1e-10


def test_reconstructed_weighted_norm(ref_cfg, ref_spectrum):
    w = make_pbar_j(10, ref_cfg)
    gs = solve_weighted(w, ref_spectrum)
    pairs = list(ref_spectrum.mu[:30])
    val = weighted_l2_sq(pairs, gs.a_coeffs[:, 9], w, ref_cfg)
    assert abs(val - 1.0) < 1e-6


def test_rayleigh_quotient_of_reconstruction(ref_cfg, ref_spectrum):
    w = make_pbar_j(10, ref_cfg)
    gs = solve_weighted(w, ref_spectrum)
    pairs = list(ref_spectrum.mu[:30])
    for idx in (0, 9):
        coeffs = gs.a_coeffs[:, idx]
        quotient = h2_energy(pairs, coeffs, ref_cfg) / weighted_l2_sq(
            pairs, coeffs, w, ref_cfg)
        assert abs(quotient - gs.mu_p[idx]) <= 1e-4 * gs.mu_p[idx]


def test_expand_field_grid(ref_cfg, ref_spectrum):
    coeffs = np.zeros(5)
    coeffs[2] = 1.0
    fld = expand_field(ref_spectrum, "even", coeffs, (80, 31))
    direct = eval_eigenfunction(ref_spectrum.mu[2], fld.xs[:, None], fld.ys[None, :])
    assert np.abs(fld.values - direct).max() < 1e-12


# ---------------------------------------------------------------------------
# asymptotic diagnostic
# ---------------------------------------------------------------------------

def test_sqrt_mass_uniform(ref_cfg):
    s = sqrt_mass_integral(make_uniform(ref_cfg), ref_cfg)
    assert s ** 2 == pytest.approx(ref_cfg.area ** 2, rel=1e-14)


def test_weyl_window_and_relabeling():
    cfg = PlateConfig(ell=math.pi / 2, n_modes=60)
    spec = build_spectrum(cfg)
    merged = merged_eigenvalues(spec)
    assert merged.size >= 80
    assert np.all(np.diff(merged) >= 0)
    rep = weyl_diagnostic(make_uniform(cfg), merged, (40, 80), cfg)
    assert rep.h[0] == 40 and rep.h[-1] == 80
    # sorting makes the ratios invariant under any relabeling within ties
    rep2 = weyl_diagnostic(make_uniform(cfg), np.sort(merged), (40, 80), cfg)
    assert np.array_equal(rep.ratio, rep2.ratio)


def test_weyl_window_validation(ref_cfg, ref_spectrum):
    merged = merged_eigenvalues(ref_spectrum)
    with pytest.raises(ValueError):
        weyl_diagnostic(make_uniform(ref_cfg), merged, (10, 10 ** 6), ref_cfg)
