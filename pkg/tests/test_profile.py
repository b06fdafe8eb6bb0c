import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lenscontact.errors import (InvalidRotationError, ProfileConstructionError,
                                UnsupportedOrderError)
from lenscontact.lens_atlas import make_lens
from lenscontact.profile import (BoundaryData, ProfileSpec, bumped_profile, default_profile,
                                 flat_end_profile, high_derivative, induced_a1, min_dP,
                                 validate_monotone, validate_smoothness)

from conftest import SQRT2, lenses, periods

PI = math.pi

# cubic coefficients from an exact sympy solve of the three linear conditions
L10_CUBIC = (0.20264236728467554289, -0.13046227257834062136, 0.086974848385560414238)
L73_CUBIC = (0.20264236728467554289, 4.0347963411300776480, -2.6618851551398175691)


@st.composite
def profiles(draw):
    return default_profile(draw(lenses()), draw(periods), draw(periods))


class TestDefaultProfile:
    def test_l10_unit_periods(self):
        prof = default_profile(make_lens(1, 0), 1.0, 1.0)
        assert prof.boundary.phi0 == 1.0
        assert prof.boundary.a_end == pytest.approx(1 / (2 * PI), abs=1e-15)
        assert prof.dP(0.0) == pytest.approx(2 / PI ** 2, abs=1e-15)
        assert prof.dP(1.0) == pytest.approx(2 / PI ** 2, abs=1e-15)
        np.testing.assert_allclose(prof.coeffs, L10_CUBIC, rtol=1e-13)

    def test_l73(self):
        prof = default_profile(make_lens(7, 3), 1.0, SQRT2)
        assert prof.boundary.phi0 == pytest.approx((1 / SQRT2 - 3) / 7, abs=1e-15)
        assert prof.boundary.a_end == pytest.approx(7 * SQRT2 / (2 * PI), abs=1e-14)
        assert prof.boundary.a_end == pytest.approx(1.5755535, abs=1e-7)
        np.testing.assert_allclose(prof.coeffs, L73_CUBIC, rtol=1e-13)

    @given(profiles())
    def test_structural(self, prof):
        assert prof(0.0) == 0.0
        assert abs(prof(1.0) - prof.boundary.a_end) < 1e-12 * max(1.0, prof.boundary.a_end)
        assert abs(prof(0.0, 2) - 1.0) < 1e-10
        assert abs(prof(1.0, 2) + prof.boundary.tau1 / prof.boundary.tau0) < 1e-10
        assert validate_monotone(prof)
        assert validate_smoothness(prof).passed

    def test_escalation_to_flat_ends(self):
        # cubic P' dips below the margin in a narrow window; degree 9 repairs it
        prof = default_profile(make_lens(3, 1), 1.0, 0.108)
        assert prof.degree == 9
        assert validate_monotone(prof) and validate_smoothness(prof).passed
        lo, hi = min_dP(prof.coeffs)
        assert lo > 1e-3 * hi

    def test_construction_error_beyond_budget(self):
        with pytest.raises(ProfileConstructionError):
            default_profile(make_lens(1, 0), 1.0, 0.2)

    def test_larger_budget_reaches_further(self):
        prof = default_profile(make_lens(1, 0), 1.0, 0.3, max_degree=15)
        assert validate_monotone(prof)

    def test_invalid_rotation(self):
        with pytest.raises(InvalidRotationError):
            BoundaryData(make_lens(7, 3), 1.0, -1.0)


class TestEval:
    def test_second_derivative_at_core(self):
        prof = default_profile(make_lens(1, 0), 1.0, 1.0)
        assert prof(0.0, 2) == pytest.approx(1.0, abs=1e-15)

    def test_order_limit(self):
        prof = default_profile(make_lens(1, 0), 1.0, 1.0)
        with pytest.raises(UnsupportedOrderError):
            prof(0.5, 5)

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_chain_rule_vs_central_differences(self, order):
        prof = default_profile(make_lens(7, 3), 1.0, SQRT2)
        r = np.linspace(0.02, 0.98, 50)
        h = 1e-3
        # 6th-order central difference of the next-lower analytic derivative
        w = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0
        fd = sum(c * prof(r + k * h, order - 1) for c, k in zip(w, range(-3, 4))) / h
        np.testing.assert_allclose(prof(r, order), fd, atol=1e-8 * max(1.0, np.max(np.abs(fd))))

    def test_fourth_derivative_vs_sympy(self):
        sp = pytest.importorskip("sympy")
        r = sp.symbols("r")
        prof = default_profile(make_lens(7, 3), 1.0, SQRT2)
        u = (1 - sp.cos(sp.pi * r)) / 2
        a = sum(c * u ** (k + 1) for k, c in enumerate(prof.coeffs))
        for order in range(5):
            expr = sp.diff(a, r, order)
            for x in (0.0, 0.3, 0.77, 1.0):
                assert prof(x, order) == pytest.approx(float(expr.subs(r, x)), rel=1e-12, abs=1e-12)

    def test_high_derivative_richardson(self):
        prof = default_profile(make_lens(7, 3), 1.0, SQRT2)
        for order in (5, 6):
            sp = pytest.importorskip("sympy")
            r = sp.symbols("r")
            u = (1 - sp.cos(sp.pi * r)) / 2
            a = sum(c * u ** (k + 1) for k, c in enumerate(prof.coeffs))
            exact = float(sp.diff(a, r, order).subs(r, 0.4))
            assert high_derivative(prof, 0.4, order) == pytest.approx(exact, rel=1e-6)

    def test_taylor_matches_jet(self):
        prof = default_profile(make_lens(7, 3), 1.0, SQRT2)
        for center in (0, 1):
            t = prof.taylor(center, 6)
            jet = prof.jet(float(center))
            for k in range(5):
                assert t[k] * math.factorial(k) == pytest.approx(jet[k], abs=1e-10)


class TestValidation:
    def test_linear_r_fails_odd_derivative(self):
        rep = validate_smoothness(lambda r: r, a_end=1.0)
        assert not rep.passed
        assert rep.checks["a^(1)(0)"]["value"] == pytest.approx(1.0, abs=1e-6)
        assert rep.checks["a(0)"]["passed"]

    def test_linear_p_passes_parity_fails_gauge(self):
        lens = make_lens(1, 0)
        bd = BoundaryData(lens, 1.0, 1.0)
        prof = ProfileSpec((bd.a_end,), bd)
        rep = validate_smoothness(prof)
        assert rep.passed
        assert not rep.gauge["passed"]
        assert rep.gauge["a''(0)"] == pytest.approx(bd.a_end * PI ** 2 / 2, rel=1e-14)

    def test_fd_path_on_structural_profile(self):
        prof = default_profile(make_lens(7, 3), 1.0, SQRT2)
        rep = validate_smoothness(lambda r: prof(r), a_end=prof.boundary.a_end)
        assert rep.passed, rep.checks

    def test_high_order_path(self):
        prof = default_profile(make_lens(7, 3), 1.0, SQRT2)
        rep = validate_smoothness(prof, K=7)
        assert "a^(5)(1)" in rep.checks and "a^(7)(0)" in rep.checks
        assert rep.passed

    def test_monotone_failures(self):
        bad = ProfileSpec((1.0, -2.0, 1.0))    # P' = 1 - 4u + 3u^2 < 0 at u = 1/2
        assert not validate_monotone(bad)
        assert not validate_monotone(ProfileSpec((0.0,)))
        with pytest.raises(ValueError):
            validate_monotone(bad, N=50)


class TestInducedA1:
    @given(profiles())
    def test_boundary_values(self, prof):
        g1 = induced_a1(prof)
        bd = prof.boundary
        assert abs(g1(0.0)) < 1e-12 * max(1.0, bd.lens.p)
        assert g1(1.0) == pytest.approx(bd.lens.p * bd.tau0 / (2 * PI), rel=1e-15)
        assert g1(0.0, 2) == pytest.approx(1.0, abs=1e-10)

    def test_derivatives_reflect(self):
        prof = default_profile(make_lens(7, 3), 1.0, SQRT2)
        g1 = induced_a1(prof)
        c = prof.boundary.rotation_factor
        for k in range(1, 5):
            assert g1(0.3, k) == pytest.approx(-c * (-1) ** k * prof(0.7, k), rel=1e-13)


class TestAlternatives:
    def test_bump_preserves_boundary(self):
        prof = default_profile(make_lens(7, 3), 1.0, SQRT2)
        for power in (0, 1, 2):
            alt = bumped_profile(prof, 0.3, power)
            for x in (0.0, 1.0):
                for k in (0, 2):
                    assert alt(x, k) == pytest.approx(prof(x, k), abs=1e-12)

    def test_flat_end_profile(self):
        alt = flat_end_profile(make_lens(7, 3), 1.0, SQRT2, 5)
        assert alt.degree == 5
        assert validate_smoothness(alt).passed and validate_monotone(alt)
        assert alt(0.0, 2) == pytest.approx(1.0, abs=1e-12)
