"""
Tests for the pointwise soliton identities and the verification sweep.
"""

import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from src.soliton_lab.bryant_solver import exact_series_coefficients, series_frame
from src.soliton_lab.errors import OriginLimitError, RangeError
from src.soliton_lab.exact_solitons import CigarSoliton, FlatSoliton
from src.soliton_lab.identity_lab import (
    DEFAULT_TOLERANCES,
    IdentityReport,
    Residual,
    bianchi_traced_residual,
    d_tensor_norm_sq,
    default_radii,
    evaluate_identities,
    first_integral_residual,
    gradR_ric_residual,
    lemma23_residual,
    lemma24_residual,
    summarize,
    verify_profile,
)
from src.soliton_lab.spec import IdentityName

BRYANT_DIMS = (3, 4, 5, 6)
EXACT = 10**6


class _Series:
    """Truncated Laurent series in r with exact coefficients.

    ``c[i]`` multiplies r^(low + i).  Every coefficient up to r^order is
    known; those past the stored list are zero.
    """

    def __init__(self, coeffs, low=0, order=EXACT):
        coeffs = [Fraction(x) for x in coeffs][: max(order - low + 1, 0)]
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
            low += 1
        if not coeffs:
            low = order + 1
        self.c, self.low, self.order = coeffs, low, order

    @staticmethod
    def of(value):
        return value if isinstance(value, _Series) else _Series([value])

    def coeff(self, k):
        assert k <= self.order, f"r^{k} is past the known order {self.order}"
        i = k - self.low
        return self.c[i] if 0 <= i < len(self.c) else Fraction(0)

    def _top(self):
        return self.low + len(self.c) - 1 if self.c else -EXACT

    def __add__(self, other):
        other = _Series.of(other)
        low, order = min(self.low, other.low), min(self.order, other.order)
        top = min(order, max(self._top(), other._top()))
        return _Series([self.coeff(k) + other.coeff(k) for k in range(low, top + 1)], low, order)

    __radd__ = __add__

    def __neg__(self):
        return _Series([-x for x in self.c], self.low, self.order)

    def __sub__(self, other):
        return self + -_Series.of(other)

    def __rsub__(self, other):
        return _Series.of(other) + -self

    def __mul__(self, other):
        other = _Series.of(other)
        low = self.low + other.low
        order = min(self.order + other.low, other.order + self.low)
        if not self.c or not other.c:
            return _Series([], low, order)
        top = min(order, self._top() + other._top())
        coeffs = [
            sum((x * other.coeff(k - self.low - i) for i, x in enumerate(self.c)), Fraction(0))
            for k in range(low, top + 1)
        ]
        return _Series(coeffs, low, order)

    __rmul__ = __mul__

    def __pow__(self, k):
        result = _Series([1])
        for _ in range(k):
            result = result * self
        return result

    def inverse(self):
        assert self.c, "no known nonzero coefficient"
        lead, prec = self.c[0], self.order - self.low
        if len(self.c) == 1:
            return _Series([1 / lead], -self.low, -self.low + prec)
        d = [x / lead for x in self.c]
        inv = [Fraction(1)]
        for k in range(1, prec + 1):
            terms = (d[j] * inv[k - j] for j in range(1, min(k, len(d) - 1) + 1))
            inv.append(-sum(terms, Fraction(0)))
        return _Series([x / lead for x in inv], -self.low, -self.low + prec)

    def __truediv__(self, other):
        return self * _Series.of(other).inverse()

    def __rtruediv__(self, other):
        return _Series.of(other) * self.inverse()

    def deriv(self):
        coeffs = [(self.low + i) * x for i, x in enumerate(self.c)]
        return _Series(coeffs, self.low - 1, self.order - 1)

    def __call__(self, r):
        return sum(float(x) * r ** (self.low + i) for i, x in enumerate(self.c))


def _identity_series(n: int) -> dict[str, _Series]:
    """Exact Taylor data substituted into both sides of each identity (c0 = 1)."""
    a3, a5, a7, b1, b3, b5 = exact_series_coefficients(n)
    N = Fraction(n)
    # w is odd through r^8, f' through r^6
    w = _Series([1, 0, a3, 0, a5, 0, a7, 0], low=1, order=8)
    g = _Series([b1, 0, b3, 0, b5, 0], low=1, order=6)

    wp = w.deriv()
    wpp = wp.deriv()
    k_rad = -wpp / w
    k_tan = (1 - wp * wp) / (w * w)
    ric_tan = k_rad + (N - 2) * k_tan
    R = (N - 1) * k_rad + (N - 1) * ric_tan
    Rp = R.deriv()
    lapR = Rp.deriv() + (N - 1) * (wp / w) * Rp

    combo = Rp + 2 * R * g
    d_sphere = -ric_tan * g / (N - 2) + combo / (2 * (N - 1) * (N - 2))
    d_sq = 2 * (N - 1) * d_sphere * d_sphere
    k = (N - 2) ** 2
    lemma23 = (
        d_sq
        + combo * combo / (2 * (N - 1) * k)
        + g * g * lapR / k
        + g**3 * Rp / k
        + Rp * Rp / (2 * k)
    )
    Y = Rp / g - 2 * g * g
    div_y = Y.deriv() + (N - 1) * (wp / w) * Y
    lemma24 = g**3 * div_y + k * d_sq + combo * combo / (2 * (N - 1)) + 2 * R * g**4
    return {
        "R": R,
        "lapR": lapR,
        "first_integral": R + g * g - 1,
        "lemma23": lemma23,
        "lemma24": lemma24,
    }


class TestFlatSolitons:
    """Every residual vanishes exactly on flat solitons."""

    @pytest.mark.parametrize("n", [3, 4, 6])
    def test_linear_potential_exact_zeros(self, n):
        reports = verify_profile(FlatSoliton(n, linear=True), [0.0, 0.5, 3.0, 40.0])
        for report in reports:
            assert report.limits == {}
            assert all(res.abs == 0.0 for res in report.residuals.values())

    def test_constant_potential_exact_zeros(self):
        report = evaluate_identities(FlatSoliton(3).frame_at(2.0))
        assert all(res.abs == 0.0 for res in report.residuals.values())
        assert report.limits[IdentityName.LEMMA24] == "origin"
        assert report.limits[IdentityName.BRENDLE_FORM] == "normalisation"

    def test_summary_passes(self):
        source = FlatSoliton(4, linear=True)
        summary = summarize(verify_profile(source, default_radii(source, 16)), source="flat", n=4)
        assert summary.passed
        assert all(row.max_abs == 0.0 for row in summary.identities)


class TestBryant:
    """Identity suite on integrated Bryant profiles."""

    @pytest.mark.parametrize("n", BRYANT_DIMS)
    def test_default_radii_pass(self, bryant_profiles, n):
        profile = bryant_profiles[n]
        reports = verify_profile(profile, default_radii(profile))
        summary = summarize(reports, source="bryant", n=n)
        failed = [row.identity for row in summary.identities if not row.passed]
        assert summary.passed, failed
        assert summary.origin_limits == [0.0]

    @pytest.mark.parametrize("r", [0.05, 1.0, 10.0, 90.0])
    def test_individual_residuals(self, bryant3, r):
        frame = bryant3.frame_at(r)
        assert abs(first_integral_residual(frame)) <= 1e-8
        assert abs(gradR_ric_residual(frame)) <= 1e-12 * abs(frame.Rp)
        assert d_tensor_norm_sq(frame) <= 1e-16 * frame.ric_norm_sq * frame.fp**2
        scale = abs(frame.lapR) + 2 * frame.ric_norm_sq
        assert abs(bianchi_traced_residual(frame)) <= 1e-6 * scale

    def test_perturbed_ricci_gives_positive_d_tensor(self, bryant3):
        frame = bryant3.frame_at(2.0)
        perturbed = replace(frame, ric_tan=frame.ric_tan * 1.1)
        report = evaluate_identities(perturbed)
        assert d_tensor_norm_sq(perturbed) > 0
        assert report.residuals[IdentityName.D_TENSOR_NORM].rel > DEFAULT_TOLERANCES[
            IdentityName.D_TENSOR_NORM
        ]

    def test_d_tensor_tolerance_applies_to_the_norm(self, bryant3):
        frame = bryant3.frame_at(2.0)
        perturbed = replace(frame, ric_tan=frame.ric_tan * (1.0 + 1e-6))
        residual = evaluate_identities(perturbed).residuals[IdentityName.D_TENSOR_NORM]
        expected = math.sqrt(d_tensor_norm_sq(perturbed) / (frame.ric_norm_sq * frame.fp**2))
        assert residual.rel == pytest.approx(expected, rel=1e-6)
        assert 1e-8 < residual.rel < 1e-5

    def test_fp_override(self, bryant3):
        frame = bryant3.frame_at(3.0)
        assert first_integral_residual(frame, fp=0.0) == pytest.approx(frame.R - 1.0)

    def test_origin_is_reported_as_limit(self, bryant3):
        report = evaluate_identities(bryant3.frame_at(0.0))
        assert report.origin_limit
        assert report.limits[IdentityName.LEMMA24] == "origin"
        assert report.residuals[IdentityName.FIRST_INTEGRAL].rel <= 1e-14
        assert report.residuals[IdentityName.LEMMA23].rel <= 1e-12

    def test_lemma24_refuses_vanishing_gradient(self, bryant3):
        with pytest.raises(OriginLimitError):
            lemma24_residual(bryant3.frame_at(0.0))

    def test_sweep_error_names_radius(self, bryant3):
        with pytest.raises(RangeError, match=r"^r=150.0: "):
            verify_profile(bryant3, [1.0, 150.0])


class TestSeriesCancellation:
    """Identities cancel power by power on the exact Taylor data at the origin."""

    @pytest.mark.parametrize("n", BRYANT_DIMS)
    @pytest.mark.parametrize("name", ["first_integral", "lemma23", "lemma24"])
    def test_cancels_through_fourth_order(self, n, name):
        series = _identity_series(n)[name]
        assert series.order >= 4
        assert [series.coeff(k) for k in range(-1, 5)] == [0] * 6

    @pytest.mark.parametrize("n", BRYANT_DIMS)
    def test_curvature_series_is_normalised(self, n):
        b1 = exact_series_coefficients(n)[3]
        R = _identity_series(n)["R"]
        assert b1 == Fraction(1, n)
        assert R.coeff(0) == 1
        assert R.coeff(2) == -b1 * b1

    @pytest.mark.parametrize("n", BRYANT_DIMS)
    def test_series_frame_matches_exact_series(self, n):
        r = 1e-3
        frame = series_frame(n, r)
        exact = _identity_series(n)
        assert frame.R == pytest.approx(exact["R"](r), rel=1e-11)
        assert frame.lapR == pytest.approx(exact["lapR"](r), rel=1e-9)


class TestCigarProducts:
    """Closed-form cigar and cigar × ℝ^k."""

    @pytest.mark.parametrize("k_extra", [1, 2, 3])
    @pytest.mark.parametrize("s", [0.1, 0.7, 2.0, 6.0, 15.0])
    def test_lemmas_hold(self, k_extra, s):
        frame = CigarSoliton(k_extra=k_extra).frame_at(s)
        report = evaluate_identities(frame)
        for name in (
            IdentityName.FIRST_INTEGRAL,
            IdentityName.GRADR_RIC,
            IdentityName.BIANCHI_TRACED,
            IdentityName.LEMMA23,
            IdentityName.LEMMA24,
            IdentityName.TRACE_SOLITON,
            IdentityName.POTENTIAL_DIVERGENCE,
        ):
            assert report.residuals[name].rel <= 1e-10, name
        assert report.limits == {IdentityName.BRENDLE_FORM: "normalisation"}

    def test_direct_lemma_values(self):
        frame = CigarSoliton(k_extra=1).frame_at(1.3)
        scale = d_tensor_norm_sq(frame)
        assert scale > 0
        assert abs(lemma23_residual(frame)) <= 1e-12 * scale
        assert abs(lemma24_residual(frame)) <= 1e-10 * frame.R * frame.fp**4

    @pytest.mark.parametrize("k_extra", [1, 2])
    def test_normalised_product_satisfies_expanded_form(self, k_extra):
        source = CigarSoliton(k_extra=k_extra, scale=4.0)
        for r in np.geomspace(0.1, 20.0, 12):
            report = evaluate_identities(source.frame_at(float(r)))
            assert IdentityName.BRENDLE_FORM not in report.limits
            assert report.residuals[IdentityName.BRENDLE_FORM].rel <= 1e-10

    def test_cigar_surface_skips_d_tensor(self):
        report = evaluate_identities(CigarSoliton().frame_at(1.0))
        assert report.limits[IdentityName.D_TENSOR_NORM] == "dimension"
        assert report.limits[IdentityName.LEMMA23] == "dimension"
        assert report.residuals[IdentityName.TRACE_SOLITON].rel <= 1e-12


class TestSummarize:
    """Aggregation of per-radius reports."""

    @staticmethod
    def _report(point: float, bad: float = 0.0) -> IdentityReport:
        residuals = {name: Residual(0.0, 0.0, 1.0) for name in IdentityName}
        residuals[IdentityName.LEMMA23] = Residual(bad, bad, 1.0)
        return IdentityReport(point=point, residuals=residuals)

    def test_worst_radius_and_failure(self):
        reports = [self._report(1.0, 1e-9), self._report(2.0, 1e-3), self._report(3.0)]
        summary = summarize(reports, source="synthetic", n=3)
        row = next(r for r in summary.identities if r.identity == "lemma23")
        assert row.worst_r == 2.0
        assert row.max_rel == 1e-3
        assert not row.passed
        assert not summary.passed

    def test_custom_tolerance(self):
        reports = [self._report(1.0, 1e-3)]
        summary = summarize(
            reports, source="synthetic", n=3, tolerances={IdentityName.LEMMA23: 1e-2}
        )
        assert summary.passed

    def test_rows_follow_identity_order(self):
        summary = summarize([self._report(1.0)], source="synthetic", n=3)
        assert [row.identity for row in summary.identities] == [m.value for m in IdentityName]
        assert summary.origin_limits == []

    def test_summary_serialises(self):
        summary = summarize([self._report(1.0)], source="synthetic", n=3)
        dumped = summary.model_dump()
        assert dumped["source"] == "synthetic"
        assert math.isclose(dumped["identities"][0]["tolerance"], 1e-8)
