#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ssblab/analytics.hpp"
#include "ssblab/estimate.hpp"
#include "ssblab/scenario.hpp"

using namespace ssb;

namespace {

std::vector<CellState> states_from(const ScenarioConfig& c, const GroundTruth& gt, bool exact = true) {
    std::vector<CellState> out;
    for (const auto& b : gt.bs) {
        auto s = make_cell(reference_c0(c.family, c.N, b.nid1, b.nid2),
                           reference_c1(c.family, c.N, b.nid1, b.nid2), b.nid1, b.nid2, b.tau, c.P);
        if (exact) {
            s.omega = b.omega;
            s.mu = b.mu;
            s.alpha = b.alpha;
        }
        out.push_back(std::move(s));
    }
    return out;
}

DetectionResult genie_detection(const ScenarioConfig& c, const GroundTruth& gt) {
    DetectionResult d;
    for (const auto& b : gt.bs) {
        DetectedCell cell;
        cell.nid1 = b.nid1;
        cell.nid2 = b.nid2;
        cell.tau0 = b.tau;
        for (int p = 0; p < c.P; ++p) {
            cell.grid.push_back(b.tau + static_cast<long>(p) * c.N_f);
            cell.detected_ssbs.push_back(p);
        }
        d.cells.push_back(cell);
    }
    return d;
}

SicOptions sic_for(const ScenarioConfig& c) {
    SicOptions o;
    o.model = model_params(c);
    o.family = c.family;
    return o;
}

double residual_norm(const CVec& y, const std::vector<CellState>& cells, const ModelParams& mp) {
    const CVec r = reconstruct(cells, mp, static_cast<long>(y.size()));
    double e = 0.0;
    for (std::size_t m = 0; m < y.size(); ++m) e += std::norm(y[m] - r[m]);
    return e;
}

// r-level draws from the correlator model: r^{p,i} = alpha gamma (mu e^{-j w tau_c})^i + CN(0, var).
oracle::Observations draw_observations(Rng& rng, int P, double w, double mu, double snr_db,
                                       double tau_c, cplx gamma) {
    oracle::Observations o;
    o.mu = mu;
    o.tau_c = tau_c;
    const double snr = std::pow(10.0, snr_db / 10.0);
    for (int p = 0; p < P; ++p) {
        const cplx a = complex_normal(rng, 1.0);
        const double v0 = std::norm(a) / snr, v1 = mu * mu * std::norm(a) / snr;
        o.alpha.push_back(a);
        o.var.push_back({v0, v1});
        o.r.push_back({a * gamma + complex_normal(rng, v0),
                       a * gamma * mu * std::polar(1.0, -w * tau_c) + complex_normal(rng, v1)});
    }
    return o;
}

CorrelationSet to_set(const oracle::Observations& o) {
    CorrelationSet cs;
    cs.r = o.r;
    cs.sigma2 = o.var;
    return cs;
}

}  // namespace

TEST(Model, ReconstructionMatchesDirectSynthesis) {
    ScenarioConfig c;
    c.K = 5;
    c.P = 4;
    c.sigma_n2 = 0.0;
    c.mu_min = 0.5;
    c.mu_max = 2.0;
    const auto gt = sample_ground_truth(c, 3);
    const auto cells = states_from(c, gt);
    const auto mp = model_params(c);
    const auto ref = oracle::synthesize(c, gt);
    const auto a = reconstruct(build_model(cells, mp, c.observation()), cells);
    const auto b = reconstruct(cells, mp, c.observation());
    for (std::size_t m = 0; m < ref.size(); ++m) {
        ASSERT_LT(std::abs(a[m] - ref[m]), 1e-9);
        ASSERT_LT(std::abs(b[m] - ref[m]), 1e-9);
    }
}

TEST(ChannelGains, SingleNoiselessExact) {
    ScenarioConfig c;
    c.K = 1;
    c.sigma_n2 = 0.0;
    const auto gt = sample_ground_truth(c, 4);
    const auto y = synthesize_received(c, gt, 4).samples;
    const auto alpha = estimate_channel_gains(y, states_from(c, gt), model_params(c));
    for (int p = 0; p < c.P; ++p) EXPECT_LT(std::abs(alpha[0][p] - gt.bs[0].alpha[p]), 1e-10 * std::abs(gt.bs[0].alpha[p]));
}

TEST(ChannelGains, DisjointSupportsEqualPerWindowMatchedFilter) {
    ScenarioConfig c;
    c.K = 2;
    c.P = 3;
    c.tau_max = 900;
    c.N_f = 1400;
    c.sigma_n2 = 0.1;
    c.mu_min = 0.8;
    c.mu_max = 1.3;
    auto gt = sample_ground_truth(c, 5);
    gt.bs[0].tau = 10;
    gt.bs[1].tau = 500;
    const auto y = synthesize_received(c, gt, 5).samples;
    const auto cells = states_from(c, gt);
    const auto alpha = estimate_channel_gains(y, cells, model_params(c));
    for (int k = 0; k < 2; ++k) {
        const auto& b = gt.bs[k];
        const auto c0 = oracle::c0_of(c, b), c1 = oracle::c1_of(c, b);
        for (int p = 0; p < c.P; ++p) {
            cplx num{};
            double den = 0.0;
            const long s = b.tau + static_cast<long>(p) * c.N_f;
            for (int n = 0; n < c.N; ++n) {
                const cplx u0 = c0[n] * std::polar(1.0, -b.omega * (s + n));
                const cplx u1 = b.mu * c1[n] * std::polar(1.0, -b.omega * (s + c.tau_c() + n));
                num += std::conj(u0) * y[s + n] + std::conj(u1) * y[s + c.tau_c() + n];
                den += std::norm(u0) + std::norm(u1);
            }
            EXPECT_LT(std::abs(alpha[k][p] - num / den), 1e-10);
        }
    }
}

TEST(ChannelGains, MatchesDensePseudoinverseAndIsOrthogonal) {
    ScenarioConfig c;
    c.K = 4;
    c.P = 3;
    c.sigma_n2 = 0.05;
    c.mu_min = 0.7;
    c.mu_max = 1.4;
    const auto gt = sample_ground_truth(c, 6);
    const auto y = synthesize_received(c, gt, 6).samples;
    const auto alpha = estimate_channel_gains(y, states_from(c, gt), model_params(c));
    const Eigen::MatrixXcd A = oracle::dense_model(c, gt);
    Eigen::VectorXcd yv(y.size());
    for (std::size_t m = 0; m < y.size(); ++m) yv(m) = y[m];
    const Eigen::VectorXcd ref = oracle::pinv_solve(A, yv);
    Eigen::VectorXcd mine(A.cols());
    for (int k = 0; k < c.K; ++k)
        for (int p = 0; p < c.P; ++p) mine(k * c.P + p) = alpha[k][p];
    EXPECT_LT((mine - ref).norm(), 1e-9 * ref.norm());
    const Eigen::VectorXcd proj = A.adjoint() * (yv - A * mine);
    EXPECT_LT(proj.norm(), 1e-9 * A.norm() * yv.norm());
}

TEST(ChannelGains, CfoMismatchBiasFollowsProfile) {
    ScenarioConfig c;
    c.K = 1;
    c.sigma_n2 = 0.0;
    c.mu_min = c.mu_max = 1.3;
    const auto gt = sample_ground_truth(c, 7);
    const auto y = synthesize_received(c, gt, 7).samples;
    const auto c0 = gen_pss(gt.bs[0].nid2);
    const auto c1 = gen_sss(gt.bs[0].nid1, gt.bs[0].nid2);
    double prev = 1.0 + 1e-12;
    for (double d : {0.0, 0.0005, 0.001, 0.002, 0.004}) {
        auto cells = states_from(c, gt);
        cells[0].omega -= d;
        const auto alpha = estimate_channel_gains(y, cells, model_params(c));
        const double mu = gt.bs[0].mu;
        const double expect = std::abs(autocorr_profile(c0, d) +
                                       mu * mu * std::polar(1.0, -d * c.tau_c()) * autocorr_profile(c1, d)) /
                              (1.0 + mu * mu);
        for (int p = 0; p < c.P; ++p)
            EXPECT_NEAR(std::abs(alpha[0][p]) / std::abs(gt.bs[0].alpha[p]), expect, 1e-9);
        EXPECT_LE(expect, prev);
        prev = expect;
    }
}

TEST(ChannelGains, DuplicateSignatureIsDegenerate) {
    ScenarioConfig c;
    c.K = 1;
    const auto gt = sample_ground_truth(c, 8);
    const auto y = synthesize_received(c, gt, 8).samples;
    auto cells = states_from(c, gt);
    cells.push_back(cells[0]);
    try {
        estimate_channel_gains(y, cells, model_params(c));
        FAIL() << "expected DegeneracyError";
    } catch (const DegeneracyError& e) {
        EXPECT_NE(std::string(e.what()).find("colliding"), std::string::npos);
    }
}

TEST(Scaling, NoiselessTrueParameters) {
    ScenarioConfig c;
    c.K = 3;
    c.sigma_n2 = 0.0;
    c.mu_min = c.mu_max = 1.5;
    const auto gt = sample_ground_truth(c, 9);
    const auto y = synthesize_received(c, gt, 9).samples;
    const auto mu = estimate_scaling(y, states_from(c, gt), model_params(c));
    for (double m : mu) EXPECT_NEAR(m, 1.5, 1e-9);
}

TEST(Scaling, ZeroGainIsDegenerate) {
    ScenarioConfig c;
    c.K = 2;
    const auto gt = sample_ground_truth(c, 10);
    const auto y = synthesize_received(c, gt, 10).samples;
    auto cells = states_from(c, gt);
    cells[1].alpha.assign(c.P, cplx{});
    EXPECT_THROW(estimate_scaling(y, cells, model_params(c)), DegeneracyError);
}

TEST(Scaling, BeatsPerSsbRatioEstimator) {
    ScenarioConfig c;
    c.profile = SinrProfile::Probe;
    c.probe_sinr_db = 10.0;
    c.mu_min = 0.7;
    c.mu_max = 1.4;
    const auto mp = model_params(c);
    double mse_ls = 0.0, mse_ratio = 0.0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const auto gt = sample_ground_truth(c, 500 + t);
        const auto y = synthesize_received(c, gt, 500 + t).samples;
        auto cells = states_from(c, gt, false);
        for (std::size_t k = 0; k < cells.size(); ++k) cells[k].omega = gt.bs[k].omega;
        fit_gains_and_scaling(y, cells, mp, 8);
        const auto& b = gt.bs[0];
        mse_ls += std::pow(cells[0].mu - b.mu, 2);
        const auto cs = correlate_bs(y, cells[0].c0, cells[0].c1, b.tau, c.P, c.N_f, c.tau_c());
        double acc = 0.0;
        for (int p = 0; p < c.P; ++p) acc += std::abs(cs.r[p][1]) / std::abs(cs.r[p][0]);
        mse_ratio += std::pow(acc / c.P - b.mu, 2);
    }
    EXPECT_LT(mse_ls / trials, mse_ratio / trials);
}

TEST(CfoSingle, ExactPhases) {
    const cplx r0(0.3, -0.8);
    EXPECT_EQ(cfo_single(r0, r0, 254), 0.0);
    EXPECT_NEAR(cfo_single(r0, r0 * std::polar(1.0, -0.01 * 254), 254), 0.01, 1e-12);
    EXPECT_THROW(cfo_single(cplx{}, r0, 254), UndefinedError);
}

TEST(CfoSingle, MonteCarloNearSinglePairBound) {
    Rng rng(12);
    const double tau_c = 254, w = 0.002;
    const double snr = 10.0;
    double mae = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const cplx a = std::polar(1.0, 2 * kPi * t / trials);
        const cplx r0 = a + complex_normal(rng, 1.0 / snr);
        const cplx r1 = a * std::polar(1.0, -w * tau_c) + complex_normal(rng, 1.0 / snr);
        mae += std::abs(cfo_single(r0, r1, 254) - w);
    }
    mae /= trials;
    const double bound = crlb_cfo({snr, snr, tau_c, 1.0});
    const double gaussian_mae = std::sqrt(bound * 2.0 / kPi);
    EXPECT_GT(mae, 0.5 * gaussian_mae);
    EXPECT_LT(mae, 2.0 * gaussian_mae);
}

TEST(CfoMulti, SingleSsbAgreesWithSingle) {
    Rng rng(13);
    std::uniform_real_distribution<double> w(-0.012, 0.012), mu(0.5, 2.0);
    for (int t = 0; t < 100; ++t) {
        const double om = w(rng), m = mu(rng);
        const cplx a = complex_normal(rng, 1.0), g = std::polar(0.9, 0.3);
        CorrelationSet cs;
        cs.r = {{a * g, a * g * m * std::polar(1.0, -om * 254)}};
        cs.sigma2 = {{0.1, 0.1 * m * m}};
        EXPECT_NEAR(cfo_multi(cs, {a}, m, 254), cfo_single(cs.r[0][0], cs.r[0][1], 254), 1e-12);
        EXPECT_NEAR(cfo_multi(cs, {a}, m, 254), om, 1e-12);
    }
}

TEST(CfoMulti, VanishingWeightsUndefined) {
    CorrelationSet cs;
    cs.r = {{cplx(1, 0), cplx(1, 0)}};
    cs.sigma2 = {{1.0, 1.0}};
    EXPECT_THROW(cfo_multi(cs, {cplx{}}, 1.0, 254), UndefinedError);
}

TEST(CfoMulti, VarianceHalvesWhenSsbCountDoubles) {
    Rng rng(14);
    const double w = 0.003;
    auto variance = [&](int P) {
        double s = 0.0, s2 = 0.0;
        const int trials = 4000;
        for (int t = 0; t < trials; ++t) {
            const auto o = draw_observations(rng, P, w, 1.0, 0.0, 254, cplx(1.0, 0));
            const double e = cfo_multi(to_set(o), o.alpha, o.mu, 254) - w;
            s += e;
            s2 += e * e;
        }
        return s2 / trials - (s / trials) * (s / trials);
    };
    const double ratio = variance(6) / variance(12);
    EXPECT_GT(ratio, 2.0 * 0.8);
    EXPECT_LT(ratio, 2.0 * 1.2);
}

TEST(CfoMulti, MatchesLikelihoodGridSearch) {
    Rng rng(15);
    std::uniform_real_distribution<double> w(-0.01, 0.01), mu(0.6, 1.6), snr(-10.0, 10.0);
    const double step = 1e-6;
    for (int t = 0; t < 100; ++t) {
        const double om = w(rng);
        const auto o = draw_observations(rng, 12, om, mu(rng), snr(rng), 254, std::polar(0.95, 0.2));
        const double est = cfo_multi(to_set(o), o.alpha, o.mu, 254);
        const double grid = oracle::ml_grid(o, step);
        EXPECT_LE(std::abs(est - grid), step) << "instance " << t;
    }
}

TEST(Sic, SingleNoiselessConverges) {
    ScenarioConfig c;
    c.K = 1;
    c.sigma_n2 = 0.0;
    auto gt = sample_ground_truth(c, 16);
    gt.bs[0].omega = 0.003;
    const auto y = synthesize_received(c, gt, 16).samples;
    auto opts = sic_for(c);
    opts.epsilon = 1e-12;
    const auto rep = sic_joint_estimate(y, genie_detection(c, gt), opts);
    ASSERT_EQ(rep.cells.size(), 1u);
    EXPECT_TRUE(rep.converged);
    EXPECT_LE(rep.iterations, 5);
    EXPECT_LT(std::abs(rep.cells[0].omega - 0.003), 1e-8);
}

TEST(Sic, CancellationHelpsWeakBs) {
    ScenarioConfig c;
    c.K = 2;
    c.profile = SinrProfile::Targets;
    c.sinr_targets_db = {20.0, -10.0};
    const auto opts = sic_for(c);
    double with = 0.0, without = 0.0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        const auto gt = sample_ground_truth(c, 900 + t);
        const auto y = synthesize_received(c, gt, 900 + t).samples;
        const auto rep = sic_joint_estimate(y, genie_detection(c, gt), opts);
        for (const auto& e : rep.cells)
            if (e.pci() == gt.bs[1].pci()) with += std::abs(e.omega - gt.bs[1].omega);

        // same estimator with the strong BS left in the residual
        DetectionResult weak_only;
        weak_only.cells = {genie_detection(c, gt).cells[1]};
        const auto alone = sic_joint_estimate(y, weak_only, opts);
        without += std::abs(alone.cells[0].omega - gt.bs[1].omega);
    }
    EXPECT_LT(with * 10.0, without);
}

TEST(Sic, ResidualTraceMonotoneInRandomTrials) {
    ScenarioConfig c;
    const auto opts = sic_for(c);
    int monotone = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const auto gt = sample_ground_truth(c, 2000 + t);
        const auto y = synthesize_received(c, gt, 2000 + t).samples;
        const auto rep = sic_joint_estimate(y, genie_detection(c, gt), opts);
        monotone += trace_non_increasing(rep.residual_trace, 2);
    }
    EXPECT_GE(monotone, 190);
}

TEST(EstimateProperty, ModelFidelityOnRandomScenarios) {
    for (std::uint64_t s = 1; s <= 10; ++s) {
        ScenarioConfig c;
        c.K = 1 + static_cast<int>(s % 6);
        c.P = 1 + static_cast<int>(s % 4);
        c.sigma_n2 = 0.0;
        c.mu_min = 0.5;
        c.mu_max = 2.0;
        if (s % 2) c.family = SequenceFamily::ZadoffChu;
        const auto gt = sample_ground_truth(c, s);
        const auto ref = oracle::synthesize(c, gt);
        const auto cells = states_from(c, gt);
        const auto a = reconstruct(build_model(cells, model_params(c), c.observation()), cells);
        for (std::size_t m = 0; m < ref.size(); ++m) ASSERT_LT(std::abs(a[m] - ref[m]), 1e-9);
    }
}

TEST(EstimateProperty, LeastSquaresOptimality) {
    ScenarioConfig c;
    c.K = 4;
    c.P = 4;
    c.sigma_n2 = 0.2;
    const auto gt = sample_ground_truth(c, 17);
    const auto y = synthesize_received(c, gt, 17).samples;
    auto cells = states_from(c, gt);
    const auto mp = model_params(c);
    const auto alpha = estimate_channel_gains(y, cells, mp);
    for (std::size_t k = 0; k < cells.size(); ++k) cells[k].alpha = alpha[k];
    const double base = residual_norm(y, cells, mp);
    Rng rng(18);
    for (int d = 0; d < 20; ++d) {
        auto moved = cells;
        for (auto& cell : moved)
            for (auto& a : cell.alpha) a += complex_normal(rng, 1e-4);
        EXPECT_GT(residual_norm(y, moved, mp), base);
    }
}

TEST(EstimateProperty, NoWrapErrorsNearTheAmbiguityLimit) {
    ScenarioConfig c;
    c.K = 1;
    c.sigma_n2 = 1e-3;
    const double lim = 0.9 * kPi / c.tau_c();
    c.omega_max = lim;
    const auto opts = sic_for(c);
    for (int t = 0; t < 40; ++t) {
        auto gt = sample_ground_truth(c, 3000 + t);
        gt.bs[0].omega = (t % 2 ? 1.0 : -1.0) * lim * (0.8 + 0.2 * (t % 5) / 4.0);
        const auto y = synthesize_received(c, gt, 3000 + t).samples;
        const auto rep = sic_joint_estimate(y, genie_detection(c, gt), opts);
        EXPECT_LT(std::abs(rep.cells[0].omega - gt.bs[0].omega), kPi / c.tau_c());
    }
}
