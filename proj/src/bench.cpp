#include "ssblab/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

namespace ssb {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

const char* to_string(Method m) {
    switch (m) {
        case Method::ProposedMulti: return "proposed_multi";
        case Method::ProposedSingle: return "proposed_single";
        case Method::BaselineAutocorr: return "baseline_autocorr";
        case Method::BaselinePowerWeighted: return "baseline_power_weighted";
        case Method::ClassicalPipeline: return "classical_pipeline";
    }
    return "unknown";
}

Method method_from_string(const std::string& s) {
    for (Method m : all_methods())
        if (s == to_string(m)) return m;
    throw ConfigError("unknown method '" + s + "'");
}

std::vector<Method> all_methods() {
    return {Method::ProposedMulti, Method::ProposedSingle, Method::BaselineAutocorr,
            Method::BaselinePowerWeighted, Method::ClassicalPipeline};
}

void validate(const CampaignConfig& cfg) {
    if (cfg.trials < 1) throw ConfigError("campaign: trials must be >= 1");
    if (cfg.sinr_grid.empty()) throw ConfigError("campaign: sinr_grid must not be empty");
    if (cfg.methods.empty()) throw ConfigError("campaign: at least one method is required");
    if (cfg.scenario.K < 1) throw ConfigError("campaign: K must be >= 1");
    if (cfg.threads < 0) throw ConfigError("campaign: threads must be >= 0");
    validate(cfg.scenario);
}

double baseline_autocorr_cfo(const CVec& y, long tau, const SyncSequence& seq) {
    const long n = static_cast<long>(seq.size());
    const long L = n / 2;
    if (L < 1) throw DomainError("baseline_autocorr_cfo: sequence too short");
    if (tau < 0 || tau + n > static_cast<long>(y.size()))
        throw RangeError("baseline_autocorr_cfo: window outside the observation");
    cplx a{}, b{};
    for (long m = 0; m < L; ++m) {
        a += y[tau + m] * std::conj(seq.samples[m]);
        b += y[tau + L + m] * std::conj(seq.samples[L + m]);
    }
    if (a == cplx{}) throw UndefinedError("baseline_autocorr_cfo: first-half correlation is zero");
    return -std::arg(b * std::conj(a)) / static_cast<double>(L);
}

double baseline_power_weighted(const std::vector<double>& per_ssb_cfo,
                               const std::vector<double>& power, int tau_c) {
    if (per_ssb_cfo.size() != power.size()) throw DomainError("baseline_power_weighted: length mismatch");
    cplx acc{};
    double total = 0.0;
    for (std::size_t p = 0; p < power.size(); ++p) {
        if (power[p] < 0.0) throw DomainError("baseline_power_weighted: negative power");
        acc += power[p] * std::polar(1.0, per_ssb_cfo[p] * tau_c);
        total += power[p];
    }
    if (!(total > 0.0) || acc == cplx{}) throw UndefinedError("baseline_power_weighted: all powers vanish");
    return std::arg(acc) / tau_c;
}

const MethodResult* TrialResult::find(Method m) const {
    for (const auto& r : methods)
        if (r.method == m) return &r;
    return nullptr;
}

namespace {

double nmse_of(const std::vector<cplx>& est, const std::vector<cplx>& truth) {
    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < truth.size(); ++p) {
        num += std::norm(est[p] - truth[p]);
        den += std::norm(truth[p]);
    }
    return den > 0.0 ? num / den : kNaN;
}

// Per-SSB single-column LS with mu = 1 on the raw observation.
std::vector<cplx> raw_gains(const CVec& y, const ScenarioConfig& cfg, const BsTruth& b, double omega) {
    const SsFrame f = frame_for(cfg, b).with_mu(1.0);
    std::vector<cplx> out(cfg.P);
    for (int p = 0; p < cfg.P; ++p) {
        const long s = b.tau + static_cast<long>(p) * cfg.N_f;
        cplx num{};
        double den = 0.0;
        for (int n = 0; n < f.length(); ++n) {
            const cplx c = f.at(n);
            if (c == cplx{}) continue;
            const cplx col = c * cfo_rotation(omega, s + n);
            num += std::conj(col) * y[s + n];
            den += std::norm(col);
        }
        out[p] = num / den;
    }
    return out;
}

void score_report(MethodResult& r, const EstimateReport& rep, const BsTruth& probe, int P) {
    r.has_estimate = true;
    r.has_sic = true;
    r.sic_converged = rep.converged;
    r.sic_monotone = trace_non_increasing(rep.residual_trace, 2);
    const CellEstimate* hit = nullptr;
    for (const auto& c : rep.cells)
        if (c.pci() == probe.pci()) hit = &c;
    r.detected = hit && std::labs(hit->tau0 - probe.tau) <= 1 && static_cast<int>(hit->grid.size()) == P;
    if (hit) {
        r.omega_hat = hit->omega;
        r.cfo_abs_error = std::abs(hit->omega - probe.omega);
        r.nmse = nmse_of(hit->alpha, probe.alpha);
    } else {
        r.omega_hat = 0.0;
        r.cfo_abs_error = std::abs(probe.omega);
        r.nmse = 1.0;
    }
}

void score_missed(MethodResult& r, const BsTruth& probe, const std::string& err) {
    r.detected = false;
    r.has_estimate = true;
    r.omega_hat = 0.0;
    r.cfo_abs_error = std::abs(probe.omega);
    r.nmse = 1.0;
    r.error = err;
}

bool classical_detects(const CVec& y, const ScenarioConfig& cfg, const BsTruth& probe) {
    const auto pss = pss_bank();
    std::vector<CVec> corr(kNumNid2);
    for (int l = 0; l < kNumNid2; ++l) corr[l] = xcorr_all_fft(y, pss[l]);
    const int tau_c = cfg.tau_c();
    for (int p = 0; p < cfg.P; ++p) {
        const long lo = static_cast<long>(p) * cfg.N_f;
        const long hi = std::min<long>(lo + cfg.N_f - cfg.frame_len(),
                                       cfg.observation() - cfg.frame_len());
        long best_t = lo;
        int best_l = 0;
        double best = -1.0;
        for (int l = 0; l < kNumNid2; ++l)
            for (long t = lo; t <= hi; ++t)
                if (std::norm(corr[l][t]) > best) {
                    best = std::norm(corr[l][t]);
                    best_t = t;
                    best_l = l;
                }
        if (best_l != probe.nid2 || std::labs(best_t - (probe.tau + lo)) > 1) return false;
        double w = 0.0;
        try {
            w = baseline_autocorr_cfo(y, best_t, pss[best_l]);
        } catch (const UndefinedError&) {
        }
        int best_n1 = 0;
        double best_s = -1.0;
        for (int n1 = 0; n1 < kNumNid1; ++n1) {
            const SyncSequence s = gen_sss(n1, best_l);
            cplx acc{};
            const long base = best_t + tau_c;
            for (int n = 0; n < cfg.N; ++n)
                acc += y[base + n] * std::conj(s.samples[n] * cfo_rotation(w, base + n));
            if (std::norm(acc) > best_s) {
                best_s = std::norm(acc);
                best_n1 = n1;
            }
        }
        if (best_n1 != probe.nid1) return false;
    }
    return true;
}

}  // namespace

TrialResult run_trial(const CampaignConfig& cfg_in, double sinr_db, std::uint64_t seed) {
    CampaignConfig cfg = cfg_in;
    cfg.scenario.profile = SinrProfile::Probe;
    cfg.scenario.probe_sinr_db = sinr_db;
    const ScenarioConfig& sc = cfg.scenario;
    SicOptions sic = cfg.sic;
    sic.model = model_params(sc);
    sic.family = sc.family;

    const GroundTruth gt = sample_ground_truth(sc, seed);
    const SampleVector y = synthesize_received(sc, gt, seed);
    const BsTruth& probe = gt.bs.at(sc.probe_index);
    const int tau_c = sc.tau_c();

    TrialResult tr;
    tr.sinr_db = sinr_db;
    tr.seed = seed;
    tr.probe = sc.probe_index;
    tr.probe_omega = probe.omega;

    auto wants = [&](Method m) {
        return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
    };

    const bool need_pipeline = wants(Method::ProposedMulti) || wants(Method::ProposedSingle);
    PipelineResult pipe;
    std::string pipe_error;
    if (need_pipeline) {
        try {
            SicOptions multi = sic;
            multi.mode = CfoMode::Multi;
            pipe = detect_and_estimate(y.samples, sc, cfg.detector, multi);
        } catch (const std::exception& e) {
            pipe_error = e.what();
        }
    }

    for (Method m : cfg.methods) {
        MethodResult r;
        r.method = m;
        switch (m) {
            case Method::ProposedMulti:
                r.has_detection = true;
                if (pipe_error.empty()) score_report(r, pipe.report, probe, sc.P);
                else score_missed(r, probe, pipe_error);
                break;
            case Method::ProposedSingle: {
                r.has_detection = true;
                if (!pipe_error.empty()) {
                    score_missed(r, probe, pipe_error);
                    break;
                }
                try {
                    SicOptions single = sic;
                    single.mode = CfoMode::SingleBest;
                    score_report(r, sic_joint_estimate(y.samples, pipe.detection, single), probe, sc.P);
                } catch (const std::exception& e) {
                    score_missed(r, probe, e.what());
                }
                break;
            }
            case Method::BaselineAutocorr: {
                const SsFrame f = frame_for(sc, probe);
                int best = 0;
                double best_e = -1.0;
                for (int p = 0; p < sc.P; ++p) {
                    const double e = std::norm(xcorr(y.samples, f.c0(), probe.tau + static_cast<long>(p) * sc.N_f));
                    if (e > best_e) {
                        best_e = e;
                        best = p;
                    }
                }
                double w = 0.0;
                try {
                    w = baseline_autocorr_cfo(y.samples, probe.tau + static_cast<long>(best) * sc.N_f, f.c0());
                } catch (const UndefinedError& e) {
                    r.error = e.what();
                }
                r.has_estimate = true;
                r.omega_hat = w;
                r.cfo_abs_error = std::abs(w - probe.omega);
                r.nmse = nmse_of(raw_gains(y.samples, sc, probe, w), probe.alpha);
                break;
            }
            case Method::BaselinePowerWeighted: {
                const SsFrame f = frame_for(sc, probe);
                const CorrelationSet cs = correlate_bs(y.samples, f.c0(), f.c1(), probe.tau, sc.P, sc.N_f, tau_c);
                std::vector<double> w(sc.P, 0.0), pw(sc.P, 0.0);
                for (int p = 0; p < sc.P; ++p) {
                    pw[p] = std::norm(cs.r[p][0]);
                    try {
                        w[p] = cfo_single(cs.r[p][0], cs.r[p][1], tau_c);
                    } catch (const UndefinedError&) {
                        pw[p] = 0.0;
                    }
                }
                double est = 0.0;
                try {
                    est = baseline_power_weighted(w, pw, tau_c);
                } catch (const UndefinedError& e) {
                    r.error = e.what();
                }
                r.has_estimate = true;
                r.omega_hat = est;
                r.cfo_abs_error = std::abs(est - probe.omega);
                r.nmse = nmse_of(raw_gains(y.samples, sc, probe, est), probe.alpha);
                break;
            }
            case Method::ClassicalPipeline:
                r.has_detection = true;
                try {
                    r.detected = classical_detects(y.samples, sc, probe);
                } catch (const std::exception& e) {
                    r.detected = false;
                    r.error = e.what();
                }
                break;
        }
        tr.methods.push_back(std::move(r));
    }
    return tr;
}

const SummaryRow* CampaignSummary::find(double sinr_db, Method m) const {
    for (const auto& r : rows)
        if (r.method == m && std::abs(r.sinr_db - sinr_db) < 1e-9) return &r;
    return nullptr;
}

namespace {

void mean_se(const std::vector<double>& v, double& mean, double& se) {
    if (v.empty()) {
        mean = se = kNaN;
        return;
    }
    double s = 0.0;
    for (double x : v) s += x;
    mean = s / v.size();
    if (v.size() < 2) {
        se = 0.0;
        return;
    }
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / (v.size() - 1) / v.size());
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<TrialResult>& trials, double sinr_db,
                                  const std::vector<Method>& methods, std::uint64_t seed) {
    std::vector<SummaryRow> rows;
    for (Method m : methods) {
        SummaryRow row;
        row.sinr_db = sinr_db;
        row.method = m;
        row.trials = static_cast<int>(trials.size());
        row.seed = seed;
        std::vector<double> det, cfo, nmse, conv, mono;
        for (const auto& t : trials) {
            const MethodResult* r = t.find(m);
            if (!r) continue;
            if (r->has_detection) det.push_back(r->detected ? 1.0 : 0.0);
            if (r->has_estimate) {
                cfo.push_back(r->cfo_abs_error);
                nmse.push_back(r->nmse);
            }
            if (r->has_sic) {
                conv.push_back(r->sic_converged ? 1.0 : 0.0);
                mono.push_back(r->sic_monotone ? 1.0 : 0.0);
            }
        }
        mean_se(det, row.detection_rate, row.detection_stderr);
        mean_se(cfo, row.cfo_mae, row.cfo_stderr);
        mean_se(nmse, row.nmse, row.nmse_stderr);
        double dummy;
        mean_se(conv, row.sic_converged_rate, dummy);
        mean_se(mono, row.sic_monotone_rate, dummy);
        rows.push_back(row);
    }
    return rows;
}

CampaignSummary run_campaign(const CampaignConfig& cfg, std::vector<TrialResult>* keep) {
    validate(cfg);
    const std::size_t points = cfg.sinr_grid.size();
    const std::size_t total = points * static_cast<std::size_t>(cfg.trials);
    std::vector<TrialResult> results(total);

    unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            const std::size_t point = i / cfg.trials;
            const std::size_t trial = i % cfg.trials;
            results[i] = run_trial(cfg, cfg.sinr_grid[point], derive_seed(cfg.seed, point, trial));
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    CampaignSummary s;
    for (std::size_t point = 0; point < points; ++point) {
        const std::vector<TrialResult> slice(results.begin() + point * cfg.trials,
                                             results.begin() + (point + 1) * cfg.trials);
        auto rows = summarize(slice, cfg.sinr_grid[point], cfg.methods, cfg.seed);
        s.rows.insert(s.rows.end(), rows.begin(), rows.end());
    }
    if (keep) *keep = std::move(results);
    return s;
}

void write_results_csv(std::ostream& os, const CampaignSummary& s, const std::string& config_hash) {
    os << "sinr_db,method,detection_rate,detection_stderr,cfo_mae,cfo_stderr,nmse,nmse_stderr,"
          "trials,seed,sic_converged_rate,sic_monotone_rate,config_hash\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return std::string(buf);
    };
    for (const auto& r : s.rows) {
        os << num(r.sinr_db) << ',' << to_string(r.method) << ',' << num(r.detection_rate) << ','
           << num(r.detection_stderr) << ',' << num(r.cfo_mae) << ',' << num(r.cfo_stderr) << ','
           << num(r.nmse) << ',' << num(r.nmse_stderr) << ',' << r.trials << ',' << r.seed << ','
           << num(r.sic_converged_rate) << ',' << num(r.sic_monotone_rate) << ',' << config_hash
           << '\n';
    }
}

}  // namespace ssb
