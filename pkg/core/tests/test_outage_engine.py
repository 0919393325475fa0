import itertools
import math
from dataclasses import replace

import numpy as np
from django.test import SimpleTestCase
from scipy import special

from core.errors import ComplexityError, DomainError, UnsupportedShapeError
from core.link_model import (
    FadingProfile,
    Scheme,
    SindrCoefficients,
    UserLink,
    build_sindr_coefficients,
    db_to_linear,
)
from core.outage_engine import (
    CompositionCursor,
    OutageQuery,
    count_closed_form_terms,
    count_compositions,
    enumerate_compositions,
    log_gamma,
    outage_binomial_k1,
    outage_closed_form,
    outage_floor,
    outage_for_user,
    regularized_lower_gamma,
    regularized_upper_gamma,
)

from .helpers import two_user_scenario

V_3DB = db_to_linear(3.0)


class SpecialFunctionTests(SimpleTestCase):
    def test_log_gamma_examples(self):
        self.assertEqual(log_gamma(1), 0.0)
        self.assertAlmostEqual(log_gamma(5), math.log(24), places=15)
        self.assertAlmostEqual(log_gamma(0.5), 0.5723649429247001, places=14)

    def test_log_gamma_factorials_exact(self):
        for n in range(0, 21):
            self.assertEqual(log_gamma(n + 1), math.log(math.factorial(n)))

    def test_log_gamma_domain(self):
        with self.assertRaises(DomainError):
            log_gamma(0.0)

    def test_upper_gamma_examples(self):
        self.assertEqual(regularized_upper_gamma(3, 0.0), 1.0)
        self.assertEqual(regularized_upper_gamma(2.5, 0.0), 1.0)
        self.assertAlmostEqual(regularized_upper_gamma(1, 1.0), math.exp(-1), places=15)
        self.assertAlmostEqual(regularized_upper_gamma(4, 4.0), 0.433470, delta=1e-6)
        self.assertAlmostEqual(regularized_upper_gamma(4, 4.0), math.exp(-4) * (1 + 4 + 8 + 32 / 3), places=14)

    def test_upper_gamma_exponential(self):
        for x in np.linspace(0.0, 30.0, 61):
            self.assertAlmostEqual(regularized_upper_gamma(1, float(x)), math.exp(-x), delta=1e-14)

    def test_upper_plus_lower_is_one(self):
        shapes = [0.5 * k for k in range(1, 41)]
        xs = np.linspace(0.0, 100.0, 201)
        for m in shapes:
            q = regularized_upper_gamma(m, xs)
            p = regularized_lower_gamma(m, xs)
            np.testing.assert_allclose(q + p, 1.0, rtol=0, atol=1e-13)

    def test_integer_path_matches_scipy(self):
        xs = np.linspace(0.0, 60.0, 121)
        for m in range(1, 21):
            np.testing.assert_allclose(regularized_upper_gamma(m, xs), special.gammaincc(m, xs), rtol=1e-12, atol=1e-15)

    def test_scalar_and_array_outputs(self):
        self.assertIsInstance(regularized_upper_gamma(4, 2.0), float)
        self.assertIsInstance(regularized_lower_gamma(4, 2.0), float)
        self.assertEqual(regularized_upper_gamma(4, np.array([1.0, 2.0])).shape, (2,))

    def test_upper_gamma_domain(self):
        with self.assertRaises(DomainError):
            regularized_upper_gamma(0.0, 1.0)
        with self.assertRaises(DomainError):
            regularized_upper_gamma(2.0, -1.0)


class CompositionTests(SimpleTestCase):
    def test_small_example(self):
        self.assertEqual(set(enumerate_compositions(2, 2)), {(0, 2), (1, 1), (2, 0)})

    def test_colex_order(self):
        self.assertEqual(list(enumerate_compositions(2, 2)), [(2, 0), (1, 1), (0, 2)])
        self.assertEqual(
            list(enumerate_compositions(2, 3)),
            [(2, 0, 0), (1, 1, 0), (0, 2, 0), (1, 0, 1), (0, 1, 1), (0, 0, 2)],
        )

    def test_zero_total(self):
        self.assertEqual(list(enumerate_compositions(0, 5)), [(0, 0, 0, 0, 0)])

    def test_single_part(self):
        self.assertEqual(list(enumerate_compositions(4, 1)), [(4,)])

    def test_large_count(self):
        self.assertEqual(sum(1 for _ in enumerate_compositions(3, 24)), 2600)

    def test_exhaustive_counts(self):
        for t in range(0, 7):
            for k in range(1, 11):
                comps = list(enumerate_compositions(t, k))
                self.assertEqual(len(comps), math.comb(t + k - 1, k - 1))
                self.assertEqual(len(set(comps)), len(comps))
                self.assertTrue(all(sum(c) == t and len(c) == k and min(c) >= 0 for c in comps))
                self.assertEqual(count_compositions(t, k), len(comps))

    def test_cursor_stops(self):
        cursor = CompositionCursor(1, 2)
        self.assertTrue(cursor.advance())
        self.assertEqual(cursor.current, [0, 1])
        self.assertFalse(cursor.advance())
        self.assertFalse(cursor.advance())

    def test_invalid(self):
        with self.assertRaises(DomainError):
            CompositionCursor(-1, 2)
        with self.assertRaises(DomainError):
            CompositionCursor(2, 0)

    def test_term_count(self):
        # m0 = 4, K = 24: sum_q sum_{t<=q} C(t+23, 23)
        self.assertEqual(count_closed_form_terms(4, 24), 4 * 1 + 3 * 24 + 2 * 300 + 2600)
        self.assertEqual(count_closed_form_terms(4, 0), 4)


def _coeffs(a=20.0, b=2.0, sigma=1.0, m0=4, beta0=0.25, interf=()):
    return SindrCoefficients(a=a, b=b, sigma_total=sigma, signal_gamma=(m0, beta0), interf_gammas=interf)


class ClosedFormTests(SimpleTestCase):
    def test_guard_margin(self):
        coeffs = _coeffs(a=2.0, b=1.0)
        self.assertEqual(outage_closed_form(OutageQuery(coeffs, 2.0)), 1.0)
        self.assertEqual(outage_closed_form(OutageQuery(coeffs, 5.0)), 1.0)

    def test_zero_threshold(self):
        self.assertEqual(outage_closed_form(OutageQuery(_coeffs(interf=((2, 0.1),)), 0.0)), 0.0)

    def test_single_exponential(self):
        coeffs = _coeffs(a=20.095, b=0.0, sigma=1.0, m0=1, beta0=1.0)
        p = outage_closed_form(OutageQuery(coeffs, 1.99526))
        self.assertAlmostEqual(p, 1 - math.exp(-1.99526 / 20.095), delta=1e-15)
        self.assertAlmostEqual(p, 0.0945, delta=1e-4)

    def test_no_interferers_is_lower_gamma(self):
        coeffs = _coeffs(a=20.0, b=2.0, sigma=3.0)
        v = 1.5
        expected = regularized_lower_gamma(4, v * 3.0 / (0.25 * (20.0 - 2.0 * v)))
        self.assertAlmostEqual(outage_closed_form(OutageQuery(coeffs, v)), expected, delta=1e-14)

    def test_non_integer_shape_rejected(self):
        with self.assertRaises(UnsupportedShapeError):
            OutageQuery(_coeffs(m0=2.5, beta0=0.4), 1.0)

    def test_complexity_guard(self):
        coeffs = _coeffs(interf=((4, 0.01),) * 24)
        with self.assertRaises(ComplexityError):
            outage_closed_form(OutageQuery(coeffs, 1.0), max_terms=100)

    def test_identical_interferers_collapse(self):
        # sum de 8 Gamma(4, beta) = Gamma(32, beta)
        beta = 0.0053
        eight = _coeffs(a=20.0, b=0.0, interf=((4, beta),) * 8)
        one = _coeffs(a=20.0, b=0.0, interf=((32, beta),))
        for v in (0.5, V_3DB, 8.0, 30.0):
            p8 = outage_closed_form(OutageQuery(eight, v))
            p1 = outage_closed_form(OutageQuery(one, v))
            self.assertAlmostEqual(p8, p1, delta=1e-13)

    def test_binomial_identity_randomized(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            m0 = int(rng.integers(1, 9))
            m1 = float(rng.integers(1, 7))
            a = 10 ** rng.uniform(-1, 2)
            v = 10 ** rng.uniform(-1, 1)
            b = a / v * rng.uniform(0.0, 0.95)
            coeffs = SindrCoefficients(
                a=a,
                b=b,
                sigma_total=10 ** rng.uniform(-1, 1),
                signal_gamma=(m0, 10 ** rng.uniform(-1, 1)),
                interf_gammas=((m1, 10 ** rng.uniform(-2, 1)),),
            )
            query = OutageQuery(coeffs, v)
            closed = outage_closed_form(query)
            direct = outage_binomial_k1(query)
            self.assertAlmostEqual(closed, direct, delta=1e-12)

    def test_range_randomized(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            k = int(rng.integers(0, 5))
            coeffs = SindrCoefficients(
                a=10 ** rng.uniform(-1, 2),
                b=10 ** rng.uniform(-2, 1),
                sigma_total=10 ** rng.uniform(-1, 1),
                signal_gamma=(int(rng.integers(1, 6)), 10 ** rng.uniform(-1, 1)),
                interf_gammas=tuple((float(rng.integers(1, 5)), 10 ** rng.uniform(-2, 1)) for _ in range(k)),
            )
            p = outage_closed_form(OutageQuery(coeffs, 10 ** rng.uniform(-2, 1)))
            self.assertGreaterEqual(p, 0.0)
            self.assertLessEqual(p, 1.0)

    def test_monotone_in_threshold(self):
        coeffs = _coeffs(a=20.0, b=2.0, interf=((4, 0.05), (2, 0.2), (3, 0.01)))
        values = [outage_closed_form(OutageQuery(coeffs, v)) for v in np.linspace(0.0, 12.0, 49)]
        for lo, hi in zip(values, values[1:]):
            self.assertLessEqual(lo, hi + 1e-15)
        self.assertEqual(outage_closed_form(OutageQuery(coeffs, 10.0)), 1.0)
        self.assertEqual(outage_closed_form(OutageQuery(coeffs, 11.5)), 1.0)

    def test_monotone_in_power(self):
        previous = 1.0
        for snr in range(0, 55, 5):
            p = outage_for_user(two_user_scenario(snr_db=snr, k=8, kappa=0.15, csi_var=0.02), 2, V_3DB)
            self.assertLessEqual(p, previous + 1e-12)
            previous = p


class ScenarioOutageTests(SimpleTestCase):
    def test_fig2_orderings(self):
        for snr in range(20, 55, 5):
            by_k = {
                k: {u: outage_for_user(two_user_scenario(snr_db=snr, k=k), u, V_3DB) for u in (1, 2)}
                for k in (0, 8, 24)
            }
            for k in (0, 8, 24):
                self.assertLess(by_k[k][2], by_k[k][1], f"U2 < U1 a {snr} dB, K={k}")
                oma_u1 = outage_for_user(two_user_scenario(snr_db=snr, k=k), 1, V_3DB, Scheme.OMA)
                self.assertLess(by_k[k][1], oma_u1, f"NOMA < OMA para U1 a {snr} dB, K={k}")
            for u in (1, 2):
                self.assertLess(by_k[0][u], by_k[8][u])
                self.assertLess(by_k[8][u], by_k[24][u])

    def test_oma_beats_noma_for_the_weak_allocation_user(self):
        # sin interferencia propia: v / alpha_2 = 9.98 > (1 + v)^2 - 1 = 7.97
        scenario = two_user_scenario(snr_db=30, k=8)
        self.assertLess(
            outage_for_user(scenario, 2, V_3DB, Scheme.OMA),
            outage_for_user(scenario, 2, V_3DB, Scheme.NOMA),
        )

    def test_fig3_total_outage(self):
        for xi in (0.0, 0.005):
            for snr in range(0, 85, 10):
                scenario = two_user_scenario(snr_db=snr, k=24, kappa=0.3, csi_var=0.2, xi=xi)
                self.assertGreaterEqual(outage_for_user(scenario, 2, V_3DB), 0.99)

    def test_fig3_outage_floor(self):
        for kappa, csi_var in itertools.product((0.15, 0.3), (0.02, 0.2)):
            op = {
                snr: outage_for_user(two_user_scenario(snr_db=snr, k=24, kappa=kappa, csi_var=csi_var), 2, V_3DB)
                for snr in (60, 80, 100)
            }
            self.assertLessEqual(abs(op[60] - op[80]), 1e-3)
            self.assertGreater(op[80], 0.0)
            floor = outage_floor(two_user_scenario(k=24, kappa=kappa, csi_var=csi_var), 2, V_3DB)
            self.assertAlmostEqual(op[100], floor, delta=1e-6)

    def test_fig3_no_floor_with_perfect_csi(self):
        for kappa in (0.0, 0.15, 0.3):
            p20 = outage_for_user(two_user_scenario(snr_db=20, k=24, kappa=kappa), 2, V_3DB)
            p50 = outage_for_user(two_user_scenario(snr_db=50, k=24, kappa=kappa), 2, V_3DB)
            p60 = outage_for_user(two_user_scenario(snr_db=60, k=24, kappa=kappa), 2, V_3DB)
            self.assertLess(p50, p20)
            self.assertLess(p60, 1e-4)

    def test_fig3_sic_residual_never_helps(self):
        for kappa, csi_var in itertools.product((0.0, 0.15, 0.3), (0.0, 0.02, 0.2)):
            for snr in range(0, 55, 10):
                p0 = outage_for_user(two_user_scenario(snr_db=snr, k=24, kappa=kappa, csi_var=csi_var), 2, V_3DB)
                p1 = outage_for_user(
                    two_user_scenario(snr_db=snr, k=24, kappa=kappa, csi_var=csi_var, xi=0.005), 2, V_3DB
                )
                self.assertGreaterEqual(p1 + 1e-12, p0)

    def test_floor_limits(self):
        # margen alpha - A v <= 0: outage segura
        self.assertEqual(outage_floor(two_user_scenario(kappa=0.5), 2, V_3DB), 1.0)
        # sin error de CSI no hay piso
        self.assertEqual(outage_floor(two_user_scenario(kappa=0.15), 2, V_3DB), 0.0)

    def test_non_integer_user_shape(self):
        base = two_user_scenario()
        fading = FadingProfile(shape=2.5)
        users = (base.users[0], UserLink(distance=50.0, fading=fading))
        scenario = replace(base, users=users)
        coeffs = build_sindr_coefficients(scenario, 2, 2)
        with self.assertRaises(UnsupportedShapeError):
            OutageQuery(coeffs, V_3DB)


class SmallOutageTests(SimpleTestCase):
    """Outages chicas: la cola se suma directo, sin restar de 1."""

    def test_no_interferers_matches_gammainc(self):
        for snr in (40, 45, 50):
            scenario = two_user_scenario(snr_db=snr, k=0)
            for user in (1, 2):
                coeffs = build_sindr_coefficients(scenario, user, user)
                query = OutageQuery(coeffs, V_3DB)
                expected = special.gammainc(4.0, query.rate * coeffs.sigma_total)
                self.assertAlmostEqual(outage_for_user(scenario, user, V_3DB), expected, delta=1e-12 * expected)

    def test_identical_interferers_collapse_in_the_tail(self):
        beta = 0.0053
        eight = _coeffs(a=20.0, b=0.0, interf=((4, beta),) * 8)
        one = _coeffs(a=20.0, b=0.0, interf=((32, beta),))
        for v in (1e-3, 1e-2, 0.05):
            p8 = outage_closed_form(OutageQuery(eight, v))
            p1 = outage_closed_form(OutageQuery(one, v))
            self.assertGreater(p8, 0.0)
            self.assertLess(p8, 1e-4)
            self.assertAlmostEqual(p8, p1, delta=1e-10 * p1)

    def test_vanishing_interferer_keeps_relative_precision(self):
        base = _coeffs(a=20.0, b=2.0, sigma=1.0)
        with_tiny = replace(base, interf_gammas=((3.0, 1e-14),))
        for v in (1e-3, 1e-2, 0.1):
            p0 = outage_closed_form(OutageQuery(base, v))
            self.assertLess(p0, 1e-3)
            self.assertAlmostEqual(outage_closed_form(OutageQuery(with_tiny, v)), p0, delta=1e-8 * p0)

    def test_fig3_tail_stays_positive(self):
        values = [
            outage_for_user(two_user_scenario(snr_db=snr, k=24, kappa=0.15), 2, V_3DB) for snr in (50, 60, 70, 80)
        ]
        for value in values:
            self.assertGreater(value, 0.0)
        for lo, hi in zip(values[1:], values):
            self.assertLess(lo, hi)

    def test_power_decade_scaling(self):
        # sin interferencia y P alto, P_out ~ (c Sigma)^m0 / m0!: 10 dB más divide por 10^4
        p60 = outage_for_user(two_user_scenario(snr_db=60, k=0), 2, V_3DB)
        p70 = outage_for_user(two_user_scenario(snr_db=70, k=0), 2, V_3DB)
        self.assertGreater(p70, 0.0)
        self.assertAlmostEqual(p60 / p70, 1e4, delta=1e4 * 1e-3)


class InterferenceStructureTests(SimpleTestCase):
    def _random_coeffs(self, rng, k):
        a = 10 ** rng.uniform(0, 2)
        return SindrCoefficients(
            a=a,
            b=a * rng.uniform(0.0, 0.05),
            sigma_total=10 ** rng.uniform(-1, 1),
            signal_gamma=(int(rng.integers(1, 6)), 10 ** rng.uniform(-0.5, 0.5)),
            interf_gammas=tuple((float(rng.integers(1, 5)), 10 ** rng.uniform(-2, 0.5)) for _ in range(k)),
        )

    def test_negligible_interferer_collapses(self):
        rng = np.random.default_rng(17)
        for _ in range(60):
            coeffs = self._random_coeffs(rng, int(rng.integers(0, 4)))
            extended = replace(coeffs, interf_gammas=coeffs.interf_gammas + ((3.0, 1e-12),))
            for v in (0.5, 2.0, 6.0):
                p = outage_closed_form(OutageQuery(coeffs, v))
                self.assertAlmostEqual(outage_closed_form(OutageQuery(extended, v)), p, delta=1e-8)

    def test_extra_interferer_never_helps(self):
        rng = np.random.default_rng(23)
        for _ in range(60):
            coeffs = self._random_coeffs(rng, int(rng.integers(0, 4)))
            extra = (float(rng.integers(1, 5)), 10 ** rng.uniform(-3, 0.5))
            extended = replace(coeffs, interf_gammas=coeffs.interf_gammas + (extra,))
            for v in (0.1, 0.5, 2.0, 6.0):
                p = outage_closed_form(OutageQuery(coeffs, v))
                self.assertGreaterEqual(outage_closed_form(OutageQuery(extended, v)), p * (1 - 1e-12))
