#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ssblab/analytics.hpp"

using namespace ssb;

namespace {

MotionState motion(double v, double theta, double d) {
    MotionState m;
    m.v = v;
    m.theta = theta;
    m.d = d;
    m.lambda_c = 0.1;
    return m;
}

// tau at which the exact drift first reaches delta_max (bisection on a monotone bracket)
double drift_time(const MotionState& ms, double delta_max) {
    double lo = 0.0, hi = 1e-6;
    while (std::abs(cfo_drift(ms, hi).exact) < delta_max) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (std::abs(cfo_drift(ms, mid).exact) < delta_max ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST(Drift, RadialMotionHasNoApproximateDrift) {
    const auto d = cfo_drift(motion(30.0, 0.0, 200.0), 0.0025);
    EXPECT_EQ(d.approx, 0.0);
    EXPECT_NEAR(cfo_drift(motion(30.0, 0.0, 1e6), 0.0025).exact, 0.0, 1e-9);
}

TEST(Drift, TwentyMetresPerSecondExample) {
    const auto d = cfo_drift(motion(20.0, kPi / 2, 100.0), 0.0025);
    EXPECT_NEAR(d.approx, 0.1, 1e-12);
    EXPECT_NEAR(d.exact, 0.1, 1e-4);
}

TEST(Drift, ApproximationErrorIsSecondOrder) {
    double worst = 0.0;
    for (double v : {5.0, 20.0, 60.0})
        for (double th : {0.3, 1.0, 2.0, 2.8})
            for (double d : {50.0, 200.0, 1000.0}) {
                const auto m = motion(v, th, d);
                const double tau = 0.0025;
                const double e = v * tau / d;
                const auto dr = cfo_drift(m, tau);
                worst = std::max(worst, std::abs(dr.exact - dr.approx) / (e * e * v / m.lambda_c));
            }
    // leading coefficient is 1.5|cos| sin^2 <= 0.58
    EXPECT_LT(worst, 1.0);
}

TEST(Drift, InvalidMotionRejected) {
    EXPECT_THROW(cfo_drift(motion(-1.0, 0.0, 1.0), 0.1), DomainError);
    EXPECT_THROW(cfo_drift(motion(1.0, 0.0, 0.0), 0.1), DomainError);
}

TEST(MaxSpeed, TwentyMetresPerSecond) {
    EXPECT_NEAR(max_speed(0.1, 0.1, 100.0, kPi / 2, 0.0025), 20.0, 1e-12);
}

TEST(MaxSpeed, RadialIsUnbounded) {
    EXPECT_TRUE(is_unbounded(max_speed(0.1, 0.1, 100.0, 0.0, 0.0025)));
    EXPECT_TRUE(is_unbounded(max_speed(0.1, 0.1, 100.0, kPi, 0.0025)));
}

TEST(MaxSpeed, InvertsApproximateDrift) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> th(0.1, 3.0), d(10.0, 2000.0), dm(0.01, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double t = th(rng), dist = d(rng), delta = dm(rng);
        const double v = max_speed(delta, 0.1, dist, t, 0.0025);
        EXPECT_NEAR(cfo_drift(motion(v, t, dist), 0.0025).approx, delta, 1e-9);
    }
}

TEST(Crlb, HalvesWhenSsbCountDoubles) {
    const double rho = 3.0;
    const double a = crlb_cfo({rho * 6, rho * 6, 254, 0.9});
    const double b = crlb_cfo({rho * 12, rho * 12, 254, 0.9});
    EXPECT_DOUBLE_EQ(a / b, 2.0);
}

TEST(Crlb, LimitOfOneLargeGamma) {
    EXPECT_NEAR(crlb_cfo({1e300, 4.0, 254, 0.5}) / (1.0 / 4.0 / (2 * 254.0 * 254.0 * 0.25)), 1.0, 1e-12);
}

TEST(Crlb, ZeroInformationIsUnbounded) {
    EXPECT_TRUE(is_unbounded(crlb_cfo({0.0, 1.0, 254, 1.0})));
    EXPECT_TRUE(is_unbounded(crlb_cfo({1.0, 1.0, 254, 0.0})));
    EXPECT_THROW(crlb_cfo({-1.0, 1.0, 254, 1.0}), DomainError);
}

TEST(Crlb, MatchesNumericFisherInformation) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        const int P = 1 + static_cast<int>(u(rng) * 12);
        const double mu = 0.3 + 2.0 * u(rng);
        const double tau_c = 100 + 300 * u(rng);
        const double r_mag = 0.2 + 0.8 * u(rng);
        const cplx gamma = std::polar(r_mag, 2 * kPi * u(rng));
        std::vector<cplx> alpha;
        std::vector<std::array<double, 2>> var;
        for (int p = 0; p < P; ++p) {
            alpha.push_back(std::polar(0.1 + u(rng), 2 * kPi * u(rng)));
            var.push_back({0.05 + u(rng), 0.05 + u(rng)});
        }
        const auto g = aggregated_sinr(alpha, var, mu);
        const double mine = crlb_cfo({g.gamma0, g.gamma1, tau_c, r_mag});
        const double ref = oracle::fim_crlb(alpha, var, mu, tau_c, gamma, 0.01 * u(rng));
        EXPECT_NEAR(mine / ref, 1.0, 1e-10) << "instance " << t;
    }
}

TEST(AggregatedSinr, SingleUnitSsb) {
    const auto g = aggregated_sinr({cplx(1, 0)}, {{1.0, 1.0}}, 1.0);
    EXPECT_EQ(g.gamma0, 1.0);
    EXPECT_EQ(g.gamma1, 1.0);
}

TEST(AggregatedSinr, EqualSinrSumsToP) {
    std::vector<cplx> a(9, std::polar(2.0, 0.4));
    std::vector<std::array<double, 2>> v(9, {0.5, 2.0});
    const auto g = aggregated_sinr(a, v, 1.5);
    EXPECT_NEAR(g.gamma0, 9 * 4.0 / 0.5, 1e-12);
    EXPECT_NEAR(g.gamma1, 9 * 2.25 * 4.0 / 2.0, 1e-12);
}

TEST(AggregatedSinr, InfiniteVarianceContributesNothing) {
    const auto g = aggregated_sinr({cplx(1, 0), cplx(3, 0)}, {{1.0, 1.0}, {kUnbounded, kUnbounded}}, 1.0);
    EXPECT_EQ(g.gamma0, 1.0);
    EXPECT_THROW(aggregated_sinr({cplx(1, 0)}, {}, 1.0), DomainError);
}

TEST(DriftLimited, StaticReceiverIsUnbounded) {
    const auto r = drift_limited({}, motion(0.0, 1.0, 100.0), {2.0, 2.0, 254, 1.0});
    EXPECT_TRUE(is_unbounded(r.P_eff));
    EXPECT_EQ(r.crlb, 0.0);
}

TEST(DriftLimited, DoublingDistance) {
    const CrlbInputs in{2.0, 3.0, 254, 0.9};
    const auto a = drift_limited({}, motion(30.0, 1.0, 100.0), in);
    const auto b = drift_limited({}, motion(30.0, 1.0, 200.0), in);
    EXPECT_NEAR(b.P_eff / a.P_eff, 2.0, 1e-12);
    EXPECT_NEAR(a.crlb / b.crlb, 2.0, 1e-12);
}

TEST(DriftLimited, EffectiveCountMatchesDriftInversion) {
    CoherenceSpec spec;
    for (double v : {10.0, 20.0, 40.0})
        for (double th : {0.7, kPi / 2, 2.2}) {
            const auto m = motion(v, th, 150.0);
            const double tau = drift_time(m, spec.delta_max);
            const double expect = tau / spec.tau_p * spec.P;
            EXPECT_NEAR(drift_limited(spec, m, {1.0, 1.0, 254, 1.0}).P_eff / expect, 1.0, 0.05);
        }
}

TEST(Units, HertzRoundTrip) {
    EXPECT_NEAR(cfo_to_hz(hz_to_cfo(1500.0, 30.72e6), 30.72e6), 1500.0, 1e-9);
    EXPECT_NEAR(cfo_to_hz(kPi, 2.0), 1.0, 1e-15);
}

TEST(AnalyticsProperty, RelativeErrorVanishesWithDistance) {
    const double th = kPi / 3;
    double prev = kUnbounded;
    for (double d = 10.0; d < 1e6; d *= 4.0) {
        const auto dr = cfo_drift(motion(20.0, th, d), 0.0025);
        const double rel = std::abs(dr.exact - dr.approx) / dr.approx;
        EXPECT_LT(rel, prev);
        prev = rel;
    }
    EXPECT_LT(prev, 1e-6);
}

TEST(AnalyticsProperty, ErrorSlopeIsQuadratic) {
    const double th = kPi / 3;
    std::vector<double> x, y;
    for (double d = 100.0; d <= 1e5; d *= 2.0) {
        const auto m = motion(20.0, th, d);
        const auto dr = cfo_drift(m, 0.0025);
        x.push_back(std::log(20.0 * 0.0025 / d));
        y.push_back(std::log(std::abs(dr.exact - dr.approx)));
    }
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    EXPECT_NEAR((n * sxy - sx * sy) / (n * sxx - sx * sx), 2.0, 0.1);
}

TEST(AnalyticsProperty, CrlbMonotone) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> g(0.1, 100.0), r(0.05, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double g0 = g(rng), g1 = g(rng), rm = r(rng);
        const double base = crlb_cfo({g0, g1, 254, rm});
        EXPECT_LT(crlb_cfo({g0 * 1.5, g1, 254, rm}), base);
        EXPECT_LT(crlb_cfo({g0, g1 * 1.5, 254, rm}), base);
        EXPECT_LT(crlb_cfo({g0, g1, 254, std::min(1.0, rm * 1.2)}), base);
    }
}
