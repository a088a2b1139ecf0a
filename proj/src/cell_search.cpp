#include "ssblab/cell_search.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ssb {

BurstPattern burst_pattern(const ScenarioConfig& cfg, const DetectorOptions& det) {
    BurstPattern b = BurstPattern::uniform(cfg.P, cfg.N_f, det.burst_period);
    b.origin = det.origin;
    return b;
}

namespace {

const std::vector<SyncSequence>& sss_bank(int nid2) {
    static const std::vector<std::vector<SyncSequence>> bank = [] {
        std::vector<std::vector<SyncSequence>> b(kNumNid2);
        for (int l = 0; l < kNumNid2; ++l)
            for (int n1 = 0; n1 < kNumNid1; ++n1) b[l].push_back(gen_sss(n1, l));
        return b;
    }();
    return bank.at(nid2);
}

struct Candidate {
    int burst = 0;
    long reference = 0;
    long anchor = 0;  // tau0 of the first marker, relative to the burst reference
    std::map<int, long> single;  // relative single-shot timings
};

struct Pending {
    int nid2 = 0;
    Candidate cand;
    long tau = 0;
    double energy = -1.0;
};

double grid_energy(const CVec& res, const SyncSequence& seq, const BurstPattern& pat, long tau,
                   long shift) {
    double e = 0.0;
    for (long eta : pat.eta) e += std::norm(xcorr(res, seq, tau + eta + shift));
    return e;
}

bool grid_fits(const ScenarioConfig& cfg, const BurstPattern& pat, long tau, long origin) {
    return tau >= origin && tau <= origin + cfg.tau_max &&
           tau + pat.eta.back() + cfg.frame_len() <= static_cast<long>(cfg.observation());
}

// |sum_p r1 conj(r0)| / sqrt(sum|r0|^2 sum|r1|^2); near one when both halves share a phase pattern
double pair_coherence(const CVec& res, const SyncSequence& c0, const SyncSequence& c1,
                      const BurstPattern& pat, long tau, int tau_c) {
    cplx acc{};
    double e0 = 0.0, e1 = 0.0;
    for (long eta : pat.eta) {
        const cplx r0 = xcorr(res, c0, tau + eta);
        const cplx r1 = xcorr(res, c1, tau + eta + tau_c);
        acc += r1 * std::conj(r0);
        e0 += std::norm(r0);
        e1 += std::norm(r1);
    }
    return e0 > 0.0 && e1 > 0.0 ? std::abs(acc) / std::sqrt(e0 * e1) : 0.0;
}

// Mean over SSBs of |<col, res>|^2 / (|col|^2 * residual power), col = c0 followed by c1.
double grid_snr(const CVec& res, const SyncSequence& c0, const SyncSequence& c1,
                const BurstPattern& pat, long tau, int tau_c) {
    double power = 0.0;
    for (const auto& v : res) power += std::norm(v);
    power /= static_cast<double>(res.size());
    if (!(power > 0.0)) return 0.0;
    double t = 0.0;
    for (long eta : pat.eta) {
        const cplx num = xcorr(res, c0, tau + eta) * static_cast<double>(c0.size()) +
                         xcorr(res, c1, tau + eta + tau_c) * static_cast<double>(c1.size());
        t += std::norm(num) / (static_cast<double>(c0.size() + c1.size()) * power);
    }
    return t / static_cast<double>(pat.eta.size());
}

}  // namespace

PipelineResult detect_and_estimate(const CVec& y, const ScenarioConfig& cfg,
                                   const DetectorOptions& det, const SicOptions& sic) {
    if (cfg.family != SequenceFamily::Nr)
        throw ConfigError("cell search requires the nr sequence family");
    if (static_cast<long>(y.size()) != cfg.observation())
        throw DomainError("detect_and_estimate: sample count differs from the configured N_o");
    const BurstPattern pattern = burst_pattern(cfg, det);
    pattern.check();
    const long guard = det.guard > 0 ? det.guard : pattern.default_guard();
    const double gamma = std::pow(10.0, det.threshold_db / 10.0);
    const auto pss = pss_bank();

    PipelineResult out;
    CVec res = y;
    std::set<int> known;
    SicOptions warm = sic;
    warm.max_iters = det.warm_iters;

    // the fine guard resolves same-root cells too close in power for the default one
    std::vector<long> guards{guard};
    if (det.fine_guard > 0 && det.fine_guard < guard) guards.push_back(det.fine_guard);

    for (int round = 1; round <= det.max_rounds; ++round) {
        out.rounds = round;
        bool added = false;
        for (long gw : guards) {
            if (added) break;
            std::vector<Pending> pending;
            for (int l = 0; l < kNumNid2; ++l) {
                Envelope env = root_envelope_fft(res, pss[l]);
                std::fill(env.root.begin(), env.root.end(), l);
                const double thr = gamma * envelope_median(env);
                const auto markers = extract_markers(env, gw, thr);
                if (markers.empty()) continue;

                std::vector<Candidate> cands;
                for (const auto& cl : cluster_bursts(markers, pattern)) {
                    for (const auto& cm : cl.members) {
                        if (cm.ssb < 0) continue;
                        const long rel = cm.marker.t - cl.reference;
                        const long anchor = rel - pattern.eta[cm.ssb];
                        auto it = std::find_if(cands.begin(), cands.end(), [&](const Candidate& c) {
                            return c.burst == cl.burst && std::labs(c.anchor - anchor) <= det.tau_tolerance;
                        });
                        if (it == cands.end()) {
                            cands.push_back({cl.burst, cl.reference, anchor, {}});
                            it = std::prev(cands.end());
                        }
                        it->single.emplace(cm.ssb, rel);
                    }
                }

                for (auto& c : cands) {
                    const TimingGrid g = cross_burst_timing(c.single, pattern);
                    const long tau = c.reference + g.tau0;
                    Pending pd{l, std::move(c), tau, -1.0};
                    for (long d = -det.refine; d <= det.refine; ++d) {
                        if (!grid_fits(cfg, pattern, tau + d, det.origin.value_or(pd.cand.reference))) continue;
                        const double e = grid_energy(res, pss[l], pattern, tau + d, 0);
                        if (e > pd.energy) {
                            pd.energy = e;
                            pd.tau = tau + d;
                        }
                    }
                    if (pd.energy >= 0.0) pending.push_back(std::move(pd));
                }
            }
            // strongest first; weaker hits may be leakage of a cell not yet cancelled
            std::sort(pending.begin(), pending.end(),
                      [](const Pending& a, const Pending& b) { return a.energy > b.energy; });

            double strongest = 0.0;
            for (const auto& st : out.states) strongest = std::max(strongest, st.power());
            const double floor = strongest * std::pow(10.0, -det.dynamic_range_db / 10.0);
            for (const auto& pd : pending) {
                if (pd.energy < floor) break;
                const int l = pd.nid2;
                const auto& sss = sss_bank(l);
                std::vector<cplx> r0;
                double e0 = 0.0;
                for (long eta : pattern.eta) {
                    r0.push_back(xcorr(res, pss[l], pd.tau + eta));
                    e0 += std::norm(r0.back());
                }
                // SSS energy along the channel pattern seen on the PSS
                std::vector<double> score(sss.size());
                for (std::size_t n1 = 0; n1 < sss.size(); ++n1) {
                    cplx acc{};
                    for (std::size_t p = 0; p < pattern.eta.size(); ++p)
                        acc += xcorr(res, sss[n1], pd.tau + pattern.eta[p] + cfg.tau_c()) * std::conj(r0[p]);
                    score[n1] = e0 > 0.0 ? std::norm(acc) / e0 : 0.0;
                }
                const int best = static_cast<int>(std::max_element(score.begin(), score.end()) - score.begin());
                std::vector<double> sorted = score;
                const auto mid = sorted.begin() + static_cast<long>(sorted.size() / 2);
                std::nth_element(sorted.begin(), mid, sorted.end());
                const double ratio = *mid > 0.0 ? score[best] / *mid : 0.0;
                if (ratio < det.sss_ratio) continue;
                if (pair_coherence(res, pss[l], sss[best], pattern, pd.tau, cfg.tau_c()) < det.coherence) continue;
                if (grid_snr(res, pss[l], sss[best], pattern, pd.tau, cfg.tau_c()) < det.min_snr) continue;
                if (!known.insert(3 * best + l).second) continue;

                out.states.push_back(make_cell(pss[l], sss[best], best, l, pd.tau, cfg.P));
                DetectedCell dc;
                dc.group = pd.cand.burst;
                dc.nid1 = best;
                dc.nid2 = l;
                for (const auto& [p, t] : pd.cand.single) {
                    dc.detected_ssbs.push_back(p);
                    dc.single[p] = pd.cand.reference + t;
                }
                dc.tau0 = pd.tau;
                for (long eta : pattern.eta) dc.grid.push_back(pd.tau + eta);
                dc.sss_ratio = ratio;
                out.detection.cells.push_back(std::move(dc));
                added = true;
                break;
            }
        }
        if (!added) break;
        try {
            sic_refine(y, out.states, warm);
        } catch (const DegeneracyError&) {
            // the new cell is not separable from the others; keep its PCI marked as seen
            out.states.pop_back();
            out.detection.cells.pop_back();
            if (!out.states.empty()) sic_refine(y, out.states, warm);
        }
        const CVec recon = reconstruct(out.states, sic.model, static_cast<long>(y.size()));
        for (std::size_t m = 0; m < y.size(); ++m) res[m] = y[m] - recon[m];
    }

    // Leakage of a cell still being refined can pass the checks above; cells whose final fit
    // is insignificant are dropped and the refinement repeated.
    for (;;) {
        out.report = sic_refine(y, out.states, sic);
        const CVec recon = reconstruct(out.states, sic.model, static_cast<long>(y.size()));
        double power = 0.0;
        for (std::size_t m = 0; m < y.size(); ++m) power += std::norm(y[m] - recon[m]);
        power /= static_cast<double>(y.size());
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < out.states.size(); ++i) {
            const auto& st = out.states[i];
            const double snr = st.power() / cfg.P * cfg.N * (1.0 + st.mu * st.mu) / power;
            if (!(power > 0.0) || snr >= det.min_snr) keep.push_back(i);
        }
        if (keep.size() == out.states.size()) break;
        std::vector<CellState> states;
        std::vector<DetectedCell> cells;
        for (std::size_t i : keep) {
            states.push_back(std::move(out.states[i]));
            cells.push_back(std::move(out.detection.cells[i]));
        }
        out.states = std::move(states);
        out.detection.cells = std::move(cells);
    }
    attach_detection(out.report, out.detection);
    return out;
}

}  // namespace ssb
