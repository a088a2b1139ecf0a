#include "ssblab/scenario.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <tuple>

namespace ssb {

const char* to_string(SequenceFamily f) {
    return f == SequenceFamily::Nr ? "nr" : "zc";
}

const char* to_string(SinrProfile p) {
    switch (p) {
        case SinrProfile::Unit: return "unit";
        case SinrProfile::Random: return "random";
        case SinrProfile::Targets: return "targets";
        case SinrProfile::Probe: return "probe";
    }
    return "unknown";
}

long ScenarioConfig::min_observation() const {
    return static_cast<long>(P - 1) * N_f + tau_max + frame_len();
}

long ScenarioConfig::observation() const {
    if (N_o > 0) return N_o;
    return std::max(static_cast<long>(P) * N_f, min_observation());
}

double ScenarioConfig::leakage() const {
    if (sigma_c2 > 0.0) return sigma_c2;
    return calibrate_sigma_c2(family, N, tau_max);
}

void validate(const ScenarioConfig& c) {
    auto fail = [](const std::string& m) { throw ConfigError("scenario: " + m); };
    if (c.K < 0) fail("K must be >= 0");
    if (c.P < 1) fail("P must be >= 1");
    if (c.N < 2) fail("N must be >= 2");
    if (c.family == SequenceFamily::Nr && c.N != kNrSeqLen)
        fail("the nr family requires N = 127");
    if (c.family == SequenceFamily::Nr && c.K > 3 * kNumNid1)
        fail("K exceeds the number of distinct cell identities");
    if (c.tau0 < 0) fail("tau0 must be >= 0");
    if (c.tau_max < 0) fail("tau_max must be >= 0");
    // SSBs of neighbouring frames must not overlap for any timing offset.
    if (c.N_f < c.frame_len() + c.tau_max)
        fail("N_f must be >= 2N + tau0 + tau_max (got " + std::to_string(c.N_f) + ")");
    if (c.N_o != 0 && c.N_o < c.min_observation())
        fail("N_o must be >= (P-1)*N_f + tau_max + 2N + tau0 = " +
             std::to_string(c.min_observation()));
    if (!(c.omega_max >= 0.0)) fail("omega_max must be >= 0");
    if (!(c.omega_max < kPi / c.tau_c())) fail("omega_max must be < pi/tau_c");
    if (!(c.sigma_n2 >= 0.0) || !std::isfinite(c.sigma_n2)) fail("sigma_n2 must be >= 0");
    if (!(c.mu_min > 0.0) || !(c.mu_max >= c.mu_min)) fail("need 0 < mu_min <= mu_max");
    if (!(c.sample_rate > 0.0)) fail("sample_rate must be positive");
    if (!(c.interferer_power > 0.0)) fail("interferer_power must be positive");
    if (c.profile == SinrProfile::Targets && static_cast<int>(c.sinr_targets_db.size()) != c.K)
        fail("sinr_targets_db must list K values");
    if (c.profile == SinrProfile::Random && c.random_sinr_max_db < c.random_sinr_min_db)
        fail("random_sinr_max_db < random_sinr_min_db");
    if (c.profile == SinrProfile::Probe && c.K > 0 && (c.probe_index < 0 || c.probe_index >= c.K))
        fail("probe_index out of range");
    if (c.family == SequenceFamily::ZadoffChu) {
        int roots = 0;
        for (int r = 1; r < c.N; ++r) roots += std::gcd(r, c.N) == 1;
        if (static_cast<long>(roots) * (roots - 1) < c.K) fail("not enough Zadoff-Chu root pairs");
    }
}

SyncSequence reference_c0(SequenceFamily family, int N, int nid1, int nid2) {
    (void)nid1;
    if (family == SequenceFamily::Nr) return gen_pss(nid2);
    return gen_zc(nid2, N);
}

SyncSequence reference_c1(SequenceFamily family, int N, int nid1, int nid2) {
    if (family == SequenceFamily::Nr) return gen_sss(nid1, nid2);
    return gen_zc(nid1, N);
}

SsFrame frame_for(const ScenarioConfig& cfg, const BsTruth& bs) {
    return SsFrame(reference_c0(cfg.family, cfg.N, bs.nid1, bs.nid2),
                   reference_c1(cfg.family, cfg.N, bs.nid1, bs.nid2), bs.mu, cfg.tau0);
}

namespace {

// Mean of N*|r|^2 over all ordered pairs and lags, skipping the matched (same, lag 0) term.
double mean_leakage(const std::vector<SyncSequence>& set, int tau_max) {
    double acc = 0.0;
    long count = 0;
    for (std::size_t a = 0; a < set.size(); ++a) {
        for (std::size_t b = 0; b < set.size(); ++b) {
            const auto& x = set[a].samples;
            const auto& z = set[b].samples;
            const int n = static_cast<int>(x.size());
            for (int lag = -tau_max; lag <= tau_max; ++lag) {
                if (a == b && lag == 0) continue;
                cplx s{};
                for (int m = 0; m < n; ++m) {
                    const int j = m - lag;
                    if (j >= 0 && j < n) s += x[m] * std::conj(z[j]);
                }
                s /= static_cast<double>(n);
                acc += n * std::norm(s);
                ++count;
            }
        }
    }
    return count ? acc / count : 0.0;
}

}  // namespace

double calibrate_sigma_c2(SequenceFamily family, int N, int tau_max) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, int>, double> cache;
    const auto key = std::make_tuple(static_cast<int>(family), N, tau_max);
    {
        std::lock_guard<std::mutex> lk(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    std::vector<SyncSequence> first, second;
    Rng rng(0x5eedc0ffeeULL);
    if (family == SequenceFamily::Nr) {
        first = pss_bank();
        std::uniform_int_distribution<int> pci(0, 3 * kNumNid1 - 1);
        std::set<int> used;
        while (used.size() < 16) used.insert(pci(rng));
        for (int id : used) second.push_back(gen_sss(id / 3, id % 3));
    } else {
        std::vector<int> roots;
        for (int r = 1; r < N; ++r)
            if (std::gcd(r, N) == 1) roots.push_back(r);
        std::shuffle(roots.begin(), roots.end(), rng);
        for (std::size_t i = 0; i < roots.size() && i < 16; ++i) first.push_back(gen_zc(roots[i], N));
    }
    double v = mean_leakage(first, tau_max);
    if (!second.empty()) v = 0.5 * (v + mean_leakage(second, tau_max));
    std::lock_guard<std::mutex> lk(mu);
    cache[key] = v;
    return v;
}

std::vector<double> correlation_sinr(const ScenarioConfig& cfg, const std::vector<double>& power) {
    const double sc2 = cfg.leakage();
    const double total = std::accumulate(power.begin(), power.end(), 0.0);
    std::vector<double> out(power.size());
    for (std::size_t k = 0; k < power.size(); ++k)
        out[k] = cfg.N * power[k] / (sc2 * (total - power[k]) + cfg.sigma_n2);
    return out;
}

namespace {

std::vector<double> solve_targets(const ScenarioConfig& cfg, const std::vector<double>& t_db) {
    const int K = static_cast<int>(t_db.size());
    if (!(cfg.sigma_n2 > 0.0))
        throw ConfigError("scenario: SINR targets need sigma_n2 > 0 to fix the power scale");
    const double sc2 = cfg.leakage();
    Eigen::MatrixXd M(K, K);
    Eigen::VectorXd rhs(K);
    for (int k = 0; k < K; ++k) {
        const double t = std::pow(10.0, t_db[k] / 10.0);
        for (int q = 0; q < K; ++q) M(k, q) = (k == q) ? cfg.N : -sc2 * t;
        rhs(k) = cfg.sigma_n2 * t;
    }
    const Eigen::VectorXd s = M.colPivHouseholderQr().solve(rhs);
    std::vector<double> out(K);
    for (int k = 0; k < K; ++k) {
        if (!(s(k) > 0.0) || !std::isfinite(s(k)))
            throw ConfigError("scenario: SINR targets are infeasible (no positive power solution)");
        out[k] = s(k);
    }
    return out;
}

}  // namespace

std::vector<double> solve_powers(const ScenarioConfig& cfg, Rng& rng) {
    const int K = cfg.K;
    std::vector<double> s(K, cfg.interferer_power);
    switch (cfg.profile) {
        case SinrProfile::Unit:
            break;
        case SinrProfile::Targets:
            s = solve_targets(cfg, cfg.sinr_targets_db);
            break;
        case SinrProfile::Random: {
            std::uniform_real_distribution<double> u(cfg.random_sinr_min_db, cfg.random_sinr_max_db);
            std::vector<double> t(K);
            for (auto& x : t) x = u(rng);
            s = solve_targets(cfg, t);
            break;
        }
        case SinrProfile::Probe: {
            if (K == 0) break;
            const double sc2 = cfg.leakage();
            const double t = std::pow(10.0, cfg.probe_sinr_db / 10.0);
            const double others = cfg.interferer_power * (K - 1);
            const double denom = sc2 * others + cfg.sigma_n2;
            // without noise or interference every power is infinitely clean
            s[cfg.probe_index] = denom > 0.0 ? t * denom / cfg.N : cfg.interferer_power;
            break;
        }
    }
    return s;
}

GroundTruth sample_ground_truth(const ScenarioConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    Rng truth(derive_seed(seed, 1));
    Rng fading(derive_seed(seed, 2));
    Rng sinr(derive_seed(seed, 4));

    GroundTruth gt;
    gt.bs.resize(cfg.K);

    std::set<std::pair<int, int>> used;
    if (cfg.family == SequenceFamily::Nr) {
        std::uniform_int_distribution<int> pci(0, 3 * kNumNid1 - 1);
        for (auto& b : gt.bs) {
            int id;
            do id = pci(truth);
            while (!used.insert({id / 3, id % 3}).second);
            b.nid1 = id / 3;
            b.nid2 = id % 3;
        }
    } else {
        std::vector<int> roots;
        for (int r = 1; r < cfg.N; ++r)
            if (std::gcd(r, cfg.N) == 1) roots.push_back(r);
        std::uniform_int_distribution<std::size_t> pick(0, roots.size() - 1);
        for (auto& b : gt.bs) {
            int r0, r1;
            do {
                r0 = roots[pick(truth)];
                r1 = roots[pick(truth)];
            } while (r0 == r1 || !used.insert({r1, r0}).second);
            b.nid2 = r0;
            b.nid1 = r1;
        }
    }

    std::uniform_int_distribution<long> tau(0, cfg.tau_max);
    std::uniform_real_distribution<double> omega(-cfg.omega_max, cfg.omega_max);
    std::uniform_real_distribution<double> mu(cfg.mu_min, cfg.mu_max);
    for (auto& b : gt.bs) {
        b.tau = tau(truth);
        b.omega = cfg.omega_max > 0.0 ? omega(truth) : 0.0;
        b.mu = cfg.mu_max > cfg.mu_min ? mu(truth) : cfg.mu_min;
    }

    const auto power = solve_powers(cfg, sinr);
    for (int k = 0; k < cfg.K; ++k) {
        auto& b = gt.bs[k];
        b.power = power[k];
        b.alpha.resize(cfg.P);
        for (auto& a : b.alpha) a = complex_normal(fading, power[k]);
    }
    return gt;
}

SampleVector synthesize_received(const ScenarioConfig& cfg, const GroundTruth& gt,
                                 std::uint64_t seed, SynthOptions opts) {
    validate(cfg);
    const long n_o = cfg.observation();
    SampleVector out;
    out.sample_rate = cfg.sample_rate;
    out.samples.assign(n_o, cplx{});
    for (const auto& b : gt.bs) {
        if (static_cast<int>(b.alpha.size()) != cfg.P)
            throw DomainError("synthesize_received: BS gain count differs from P");
        if (b.tau < 0 || b.tau > cfg.tau_max)
            throw DomainError("synthesize_received: tau outside [0, tau_max]");
        const SsFrame frame = frame_for(cfg, b);
        const CVec c = frame.render();
        for (int p = 0; p < cfg.P; ++p) {
            const long start = static_cast<long>(p) * cfg.N_f + b.tau;
            for (long n = 0; n < static_cast<long>(c.size()); ++n) {
                if (c[n] == cplx{}) continue;
                const long m = start + n;
                out.samples[m] += b.alpha[p] * c[n] * cfo_rotation(b.omega, m);
            }
        }
    }
    if (opts.noise && cfg.sigma_n2 > 0.0) {
        Rng noise(derive_seed(seed, 3));
        for (auto& s : out.samples) s += complex_normal(noise, cfg.sigma_n2);
    }
    return out;
}

}  // namespace ssb
