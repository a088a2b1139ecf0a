#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "ssblab/scenario.hpp"

using namespace ssb;

namespace {

ScenarioConfig small(int K, int P) {
    ScenarioConfig c;
    c.K = K;
    c.P = P;
    return c;
}

}  // namespace

TEST(Scenario, DefaultsAreValid) {
    ScenarioConfig c;
    EXPECT_EQ(c.K, 12);
    EXPECT_EQ(c.P, 12);
    EXPECT_EQ(c.N, 127);
    EXPECT_NO_THROW(validate(c));
    EXPECT_GE(c.observation(), (c.P - 1) * c.N_f + c.tau_max + 2 * c.N + c.tau0);
}

TEST(Scenario, ValidatorRejectsBadLayouts) {
    auto c = small(2, 4);
    c.N_f = 300;
    EXPECT_THROW(validate(c), ConfigError);
    c = small(2, 4);
    c.N_o = 1000;
    EXPECT_THROW(validate(c), ConfigError);
    c = small(2, 4);
    c.omega_max = kPi / c.tau_c();
    EXPECT_THROW(validate(c), ConfigError);
    c = small(2, 4);
    c.mu_min = 0.0;
    EXPECT_THROW(validate(c), ConfigError);
}

TEST(Scenario, GroundTruthDeterministic) {
    const auto c = small(5, 4);
    const auto a = sample_ground_truth(c, 99), b = sample_ground_truth(c, 99);
    ASSERT_EQ(a.bs.size(), b.bs.size());
    for (std::size_t k = 0; k < a.bs.size(); ++k) {
        EXPECT_EQ(a.bs[k].pci(), b.bs[k].pci());
        EXPECT_EQ(a.bs[k].tau, b.bs[k].tau);
        EXPECT_EQ(a.bs[k].omega, b.bs[k].omega);
        EXPECT_EQ(a.bs[k].alpha, b.bs[k].alpha);
    }
}

TEST(Scenario, GroundTruthRangesAndDistinctIdentities) {
    auto c = small(12, 12);
    c.mu_min = 0.5;
    c.mu_max = 2.0;
    for (std::uint64_t s = 1; s < 20; ++s) {
        const auto gt = sample_ground_truth(c, s);
        std::set<int> ids;
        for (const auto& b : gt.bs) {
            EXPECT_GE(b.tau, 0);
            EXPECT_LE(b.tau, c.tau_max);
            EXPECT_LE(std::abs(b.omega), c.omega_max);
            EXPECT_GE(b.mu, 0.5);
            EXPECT_LE(b.mu, 2.0);
            EXPECT_TRUE(ids.insert(b.pci()).second);
        }
    }
}

TEST(Scenario, SinrTargetCalibration) {
    auto c = small(1, 1);
    c.profile = SinrProfile::Targets;
    c.sinr_targets_db = {0.0};
    double acc = 0.0;
    const int draws = 1000;
    for (int s = 0; s < draws; ++s) acc += std::norm(sample_ground_truth(c, s).bs[0].alpha[0]);
    const double ratio = acc / draws * c.N / c.sigma_n2;
    EXPECT_LT(std::abs(10.0 * std::log10(ratio)), 0.5);
}

TEST(Scenario, ZeroCfoRange) {
    auto c = small(6, 2);
    c.omega_max = 0.0;
    for (const auto& b : sample_ground_truth(c, 3).bs) EXPECT_EQ(b.omega, 0.0);
}

TEST(Scenario, InfeasibleTargetsRejected) {
    auto c = small(12, 2);
    c.profile = SinrProfile::Targets;
    c.sinr_targets_db.assign(12, 30.0);
    EXPECT_THROW(sample_ground_truth(c, 1), ConfigError);
}

TEST(Scenario, CorrelationSinrMeetsTargets) {
    auto c = small(4, 2);
    c.profile = SinrProfile::Targets;
    c.sinr_targets_db = {-10.0, 0.0, 5.0, -3.0};
    Rng rng(1);
    const auto p = solve_powers(c, rng);
    const auto s = correlation_sinr(c, p);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(10.0 * std::log10(s[k]), c.sinr_targets_db[k], 1e-9);
}

TEST(Synthesis, NoiselessSingleSourceIsScaledFrame) {
    auto c = small(1, 1);
    c.sigma_n2 = 0.0;
    c.omega_max = 0.0;
    const auto gt = sample_ground_truth(c, 5);
    const auto y = synthesize_received(c, gt, 5).samples;
    const auto& b = gt.bs[0];
    const auto f = frame_for(c, b);
    double worst = 0.0;
    for (long m = 0; m < static_cast<long>(y.size()); ++m)
        worst = std::max(worst, std::abs(y[m] / b.alpha[0] - f.at(m - b.tau)));
    EXPECT_LT(worst, 1e-12);
}

TEST(Synthesis, MatchesDirectSum) {
    auto c = small(4, 3);
    c.sigma_n2 = 0.0;
    c.mu_min = 0.6;
    c.mu_max = 1.7;
    const auto gt = sample_ground_truth(c, 8);
    const auto y = synthesize_received(c, gt, 8).samples;
    const auto ref = oracle::synthesize(c, gt);
    for (std::size_t m = 0; m < y.size(); ++m) ASSERT_LT(std::abs(y[m] - ref[m]), 1e-12);
}

TEST(Synthesis, PureNoiseVariance) {
    auto c = small(0, 1);
    c.N_o = 100000;
    c.sigma_n2 = 0.3;
    const auto y = synthesize_received(c, sample_ground_truth(c, 1), 1).samples;
    double e = 0.0;
    for (const auto& z : y) e += std::norm(z);
    EXPECT_NEAR(e / y.size(), c.sigma_n2, 0.05 * c.sigma_n2);
}

TEST(Synthesis, DisjointWindowsCarryTheirOwnEnergy) {
    auto c = small(2, 2);
    c.tau_max = 1000;
    c.N_f = 1500;
    c.sigma_n2 = 1e-4;
    auto gt = sample_ground_truth(c, 21);
    gt.bs[0].tau = 0;
    gt.bs[1].tau = 600;
    const auto y = synthesize_received(c, gt, 21).samples;
    for (const auto& b : gt.bs) {
        for (int p = 0; p < c.P; ++p) {
            double e = 0.0;
            const long s = p * c.N_f + b.tau;
            for (long m = s; m < s + c.N; ++m) e += std::norm(y[m]);
            const double expect = std::norm(b.alpha[p]) * c.N;
            const double tol = 6.0 * std::sqrt(c.N * c.sigma_n2 * (c.sigma_n2 + 2 * expect / c.N));
            EXPECT_NEAR(e, expect + c.N * c.sigma_n2, tol);
        }
    }
}

TEST(ScenarioProperty, Superposition) {
    auto c = small(6, 4);
    c.sigma_n2 = 0.5;
    c.mu_min = 0.5;
    c.mu_max = 1.5;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        const auto gt = sample_ground_truth(c, s);
        GroundTruth a, b;
        for (std::size_t k = 0; k < gt.bs.size(); ++k) (k % 2 ? a : b).bs.push_back(gt.bs[k]);
        const auto ya = synthesize_received(c, a, s, {false}).samples;
        const auto yb = synthesize_received(c, b, s, {false}).samples;
        const auto yab = synthesize_received(c, gt, s, {false}).samples;
        for (std::size_t m = 0; m < yab.size(); ++m) ASSERT_LT(std::abs(ya[m] + yb[m] - yab[m]), 1e-12);
    }
}

TEST(ScenarioProperty, CfoPhaseAcrossAdjacentSamples) {
    auto c = small(1, 2);
    c.family = SequenceFamily::ZadoffChu;
    c.sigma_n2 = 0.0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const auto gt = sample_ground_truth(c, s);
        const auto& b = gt.bs[0];
        const auto y = synthesize_received(c, gt, s).samples;
        const auto f = frame_for(c, b);
        for (int n = 0; n + 1 < c.N; ++n) {
            const long m = b.tau + n;
            const cplx d = (y[m + 1] / f.at(n + 1)) * std::conj(y[m] / f.at(n));
            ASSERT_NEAR(std::arg(d), -b.omega, 1e-9);
        }
    }
}

TEST(ScenarioProperty, EnergyOutsideSupportsIsNoise) {
    auto c = small(8, 6);
    c.sigma_n2 = 0.01;
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const auto gt = sample_ground_truth(c, s);
        const auto y = synthesize_received(c, gt, s).samples;
        std::vector<bool> inside(y.size(), false);
        for (const auto& b : gt.bs)
            for (int p = 0; p < c.P; ++p)
                for (long n = 0; n < c.frame_len(); ++n) inside[p * c.N_f + b.tau + n] = true;
        double e = 0.0;
        long count = 0;
        for (std::size_t m = 0; m < y.size(); ++m) {
            if (inside[m]) continue;
            e += std::norm(y[m]);
            ++count;
        }
        ASSERT_GT(count, 1000);
        // |noise|^2 is exponential with mean and std sigma_n2
        EXPECT_LT(e / count, c.sigma_n2 * (1.0 + 3.0 / std::sqrt(static_cast<double>(count))));
    }
}
