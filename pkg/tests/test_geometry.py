import math
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from app.branching.galton_watson import step_variance
from app.core.errors import InvalidParameterError, PreconditionError
from app.geometry import (
    Annulus,
    Norm,
    area,
    area_to_radius,
    cluster_overlap_area,
    contains,
    intersection_area,
    interval_overlap_integral,
    lemma3_functional,
    lower_bound_nc,
    min_overlap_ratio,
    overlap_kernel,
    overlap_mc,
    sample_annulus,
    square_overlap_integral,
    square_six_term_bound,
    sup_overlap_scaled,
    theorem5_rigorous,
    theorem5_threshold,
)


# === ANILLO ===


def test_area_formulas():
    assert area(Annulus(r=1.0, eps=1.0)) == pytest.approx(math.pi)
    assert area(Annulus(norm=Norm.SQUARE, r=1.0, eps=1.0)) == pytest.approx(4.0)
    assert area(Annulus(r=2.0, eps=0.5)) == pytest.approx(math.pi * 4 * 0.5 * 1.5)


@pytest.mark.parametrize("norm", [Norm.ROUND, Norm.SQUARE])
def test_area_to_radius_inverts_area(norm):
    r = area_to_radius(1.014, 0.25, norm)
    assert area(Annulus(norm=norm, r=r, eps=0.25)) == pytest.approx(1.014)


def test_area_to_radius_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        area_to_radius(-1.0, 0.5)
    with pytest.raises(InvalidParameterError):
        area_to_radius(1.0, 1.5)


def test_annulus_validation():
    with pytest.raises(ValidationError):
        Annulus(r=0.0, eps=0.5)
    with pytest.raises(ValidationError):
        Annulus(r=1.0, eps=0.0)


def test_contains_closed_boundaries(round_annulus, square_annulus):
    assert contains(round_annulus, (1.0, 0.0))
    assert contains(round_annulus, (0.5, 0.0))
    assert not contains(round_annulus, (0.49, 0.0))
    assert not contains(round_annulus, (0.8, 0.8))
    assert contains(square_annulus, (0.8, 0.8))
    assert list(contains(square_annulus, [[0.0, 0.0], [0.0, 0.75]])) == [False, True]


def test_lower_bound_nc():
    assert lower_bound_nc(1.0) == pytest.approx(1 + 1 / (math.pi * math.sqrt(3)))
    with pytest.raises(InvalidParameterError):
        lower_bound_nc(0.0)


# === MUESTREO ===


@pytest.mark.parametrize("norm", [Norm.ROUND, Norm.SQUARE])
def test_samples_stay_in_annulus(norm, gen):
    a = Annulus(norm=norm, r=1.0, eps=0.5)
    pts = sample_annulus(a, 50_000, gen)
    assert pts.shape == (50_000, 2)
    assert contains(a, pts).all()
    assert np.abs(pts.mean(axis=0)).max() < 0.02


def test_round_step_variance(round_annulus, gen):
    pts = sample_annulus(round_annulus, 200_000, gen)
    assert pts[:, 0].var() == pytest.approx(step_variance(round_annulus), abs=0.01)


def test_square_strips_weighted_by_area(square_annulus, gen):
    pts = sample_annulus(square_annulus, 200_000, gen)
    top = np.mean(pts[:, 1] >= square_annulus.inner)
    # franja superior: 2r·rε sobre 4r²ε(2-ε)
    assert top == pytest.approx(1.0 / 3.0, abs=0.01)


# === SOLAPAMIENTO EXACTO ===


@pytest.mark.parametrize("norm", [Norm.ROUND, Norm.SQUARE])
def test_overlap_limits(norm):
    a = Annulus(norm=norm, r=1.0, eps=0.3)
    assert intersection_area(a, 0.0).area == pytest.approx(area(a))
    assert intersection_area(a, 2.5).area == 0.0


def test_disk_lens_area():
    disk = Annulus(r=1.0, eps=1.0)
    assert intersection_area(disk, 1.0).area == pytest.approx(2 * math.pi / 3 - math.sqrt(3) / 2)


def test_square_overlap_is_rectangle():
    full = Annulus(norm=Norm.SQUARE, r=1.0, eps=1.0)
    assert intersection_area(full, 0.5).area == pytest.approx(3.0)
    assert intersection_area(full, (0.5, 0.5)).area == pytest.approx(1.5 * 1.5)


def test_intersection_area_inputs(round_annulus):
    assert intersection_area(round_annulus, (0.3, 0.4)).d == pytest.approx(0.5)
    with pytest.raises(InvalidParameterError):
        intersection_area(round_annulus, -1.0)
    with pytest.raises(InvalidParameterError):
        intersection_area(round_annulus, (1.0, 2.0, 3.0))


def test_kernel_is_symmetric(round_annulus, gen):
    disp = gen.uniform(-2, 2, size=(100, 2))
    assert np.allclose(overlap_kernel(round_annulus, disp), overlap_kernel(round_annulus, -disp))


@pytest.mark.parametrize(
    "norm,eps,d",
    [(Norm.ROUND, 0.5, 0.8), (Norm.ROUND, 0.1, 0.95), (Norm.SQUARE, 0.5, 0.8), (Norm.SQUARE, 0.2, (0.6, 0.9))],
)
def test_exact_overlap_matches_monte_carlo(norm, eps, d, gen):
    a = Annulus(norm=norm, r=1.0, eps=eps)
    exact = intersection_area(a, d).area
    mc = overlap_mc(a, d, 200_000, gen)
    assert mc.method == "monte_carlo"
    assert abs(mc.area - exact) <= 4 * mc.mc_stderr + 1e-12


@pytest.mark.slow
def test_overlap_oracle_suite(gen):
    for _ in range(50):
        norm = Norm.ROUND if gen.random() < 0.5 else Norm.SQUARE
        a = Annulus(norm=norm, r=1.0, eps=float(gen.uniform(0.05, 1.0)))
        d = float(gen.uniform(0.0, 2.0))
        mc = overlap_mc(a, d, 1_000_000, gen)
        assert abs(mc.area - intersection_area(a, d).area) <= 4 * mc.mc_stderr + 1e-9


# === EXTREMOS EN d ===


@pytest.mark.parametrize("eps", [0.05, 0.1, 0.2, 0.4])
def test_min_overlap_ratio_above_lower_bound(eps):
    ext = min_overlap_ratio(Annulus(r=1.0, eps=eps), grid_steps=512)
    assert ext.ratio >= eps / (math.pi * math.sqrt(3)) - 1e-9
    assert 1.0 - eps <= ext.d <= 1.0


def test_min_overlap_ratio_grid_guard():
    with pytest.raises(InvalidParameterError):
        min_overlap_ratio(Annulus(r=1.0, eps=0.1), grid_steps=1)


def test_sup_overlap_scaled(round_annulus):
    ext = sup_overlap_scaled(round_annulus)
    assert ext.ratio > 0
    assert round_annulus.ball_radius <= ext.d <= 2.0
    with pytest.raises(PreconditionError):
        sup_overlap_scaled(round_annulus, d_min=0.1)
    assert sup_overlap_scaled(round_annulus, d_min=2.0).ratio == 0.0


def test_square_sup_grows_as_eps_shrinks():
    ratios = [sup_overlap_scaled(Annulus(norm=Norm.SQUARE, r=1.0, eps=e)).ratio for e in (0.04, 0.01)]
    assert ratios[1] > ratios[0]


# === CÚMULOS ===


def test_cluster_overlap_trivial_cases(round_annulus, gen):
    assert cluster_overlap_area(round_annulus, [(0.0, 0.0)], 0, 1000, gen).area == 0.0
    far = cluster_overlap_area(round_annulus, [(0.0, 0.0), (10.0, 0.0)], 0, 1000, gen)
    assert far.area == 0.0
    assert far.d == pytest.approx(10.0)


def test_cluster_overlap_rejects_close_centers(round_annulus, gen):
    with pytest.raises(PreconditionError):
        cluster_overlap_area(round_annulus, [(0.0, 0.0), (0.1, 0.0)], 0, 1000, gen)
    with pytest.raises(InvalidParameterError):
        cluster_overlap_area(round_annulus, [(0.0, 0.0)], 3, 1000, gen)


def test_cluster_overlap_at_least_pair_overlap(round_annulus, gen):
    rep = cluster_overlap_area(round_annulus, [(0.0, 0.0), (1.0, 0.0)], 0, 100_000, gen)
    pair = intersection_area(round_annulus, 1.0).area
    assert rep.area >= pair - 4 * rep.mc_stderr
    assert rep.area <= area(round_annulus)


# === FUNCIONALES ===


@pytest.mark.parametrize("c", [0.25, 1.0, 2.0])
def test_interval_integral_closed_form(c):
    res = interval_overlap_integral(c)
    assert res.closed_form == pytest.approx(2 * c**3 / 3)
    assert res.rel_error < 1e-6


def test_theorem5_exact_arithmetic():
    ok, value = theorem5_rigorous("1.014")
    assert ok
    assert value == Fraction(1014, 1000) ** 3 * Fraction(23, 24)
    assert not theorem5_rigorous("1.02")[0]
    assert theorem5_threshold() == pytest.approx((24 / 23) ** (1 / 3))
    assert 1.014 < theorem5_threshold() < 1.0143


def test_six_term_bound():
    a = Annulus(norm=Norm.SQUARE, r=area_to_radius(1.014, 0.25, Norm.SQUARE), eps=0.25)
    assert square_six_term_bound(a) >= area(a) ** 3 / 24
    with pytest.raises(InvalidParameterError):
        square_six_term_bound(Annulus(r=1.0, eps=0.25))


def test_functional_decomposition(gen):
    a = Annulus(norm=Norm.SQUARE, r=area_to_radius(1.014, 0.25, Norm.SQUARE), eps=0.25)
    f = lemma3_functional(a, 50_000, np.random.default_rng(3))
    g = square_overlap_integral(a, 50_000, np.random.default_rng(3))
    assert f.value + g.value == pytest.approx(area(a) ** 3)
    assert f.annulus_area == pytest.approx(1.014)


@pytest.mark.slow
def test_square_functional_below_one_at_1014(gen):
    a = Annulus(norm=Norm.SQUARE, r=area_to_radius(1.014, 0.25, Norm.SQUARE), eps=0.25)
    est = lemma3_functional(a, 1_000_000, gen)
    assert est.value + 3 * est.stderr < 1.0


@pytest.mark.parametrize("eps", [0.1, 0.5, 1.0])
def test_round_functional_below_one_at_unit_area(eps, gen):
    a = Annulus(r=area_to_radius(1.0, eps), eps=eps)
    est = lemma3_functional(a, 20_000, gen)
    assert est.annulus_area == pytest.approx(1.0)
    assert est.value + 3 * est.stderr < 1.0


@pytest.mark.slow
@pytest.mark.parametrize("eps", [0.1, 0.3])
def test_square_integral_above_six_term_bound(eps, gen):
    a = Annulus(norm=Norm.SQUARE, r=area_to_radius(1.014, eps, Norm.SQUARE), eps=eps)
    six = square_six_term_bound(a)
    assert six >= area(a) ** 3 / 24.0
    est = square_overlap_integral(a, 200_000, gen)
    assert est.value + 3 * est.stderr >= six
