#include "ssblab/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ssb {

BurstPattern BurstPattern::uniform(int P, long stride, long period) {
    BurstPattern b;
    b.eta.resize(P);
    for (int p = 0; p < P; ++p) b.eta[p] = p * stride;
    b.period = period;
    return b;
}

long BurstPattern::min_spacing() const {
    long s = std::numeric_limits<long>::max();
    for (std::size_t p = 1; p < eta.size(); ++p) s = std::min(s, eta[p] - eta[p - 1]);
    if (s == std::numeric_limits<long>::max()) s = period > 0 ? period : s;
    return s;
}

long BurstPattern::max_spacing() const {
    long s = 0;
    for (std::size_t p = 1; p < eta.size(); ++p) s = std::max(s, eta[p] - eta[p - 1]);
    return s;
}

long BurstPattern::default_guard() const {
    const long s = min_spacing();
    return s == std::numeric_limits<long>::max() ? 1 : std::max(1L, s / 2);
}

void BurstPattern::check() const {
    if (eta.empty()) throw DomainError("BurstPattern: empty eta");
    if (eta[0] != 0) throw DomainError("BurstPattern: eta[0] must be 0");
    for (std::size_t p = 1; p < eta.size(); ++p)
        if (eta[p] <= eta[p - 1]) throw DomainError("BurstPattern: eta must be strictly increasing");
    if (period > 0 && period <= eta.back())
        throw DomainError("BurstPattern: period must exceed the burst span");
}

std::vector<TimingMarker> extract_markers(const Envelope& env, long guard, double threshold) {
    if (guard <= 0) throw DomainError("extract_markers: guard must be positive");
    const auto& v = env.values;
    const long n = static_cast<long>(v.size());
    std::vector<long> peaks;
    for (long t = 0; t < n; ++t) {
        const bool left = t == 0 || v[t] >= v[t - 1];
        const bool right = t == n - 1 || v[t] > v[t + 1];
        if (left && right && v[t] > 0.0) peaks.push_back(t);
    }
    std::vector<TimingMarker> out;
    std::size_t lo = 0;
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        const long t = peaks[i];
        if (!(v[t] >= threshold)) continue;
        while (peaks[lo] < t - guard) ++lo;
        bool dominant = true;
        for (std::size_t j = lo; j < peaks.size() && peaks[j] <= t + guard; ++j) {
            if (j == i) continue;
            if (v[t] < kDominanceRatio * v[peaks[j]]) {
                dominant = false;
                break;
            }
        }
        if (dominant) {
            const int root = env.root.empty() ? -1 : env.root[t];
            out.push_back({t, root, v[t]});
        }
    }
    return out;
}

namespace {

int nearest_index(const BurstPattern& pat, long rel, long& residual) {
    int best = 0;
    residual = std::numeric_limits<long>::max();
    for (std::size_t p = 0; p < pat.eta.size(); ++p) {
        const long r = std::labs(rel - pat.eta[p]);
        if (r < residual) {
            residual = r;
            best = static_cast<int>(p);
        }
    }
    return best;
}

}  // namespace

std::vector<BurstCluster> cluster_bursts(const std::vector<TimingMarker>& markers,
                                         const BurstPattern& pattern) {
    pattern.check();
    for (std::size_t i = 1; i < markers.size(); ++i)
        if (markers[i].t < markers[i - 1].t)
            throw DomainError("cluster_bursts: markers must be sorted by t");

    // Split where the gap is closer to the inter-burst gap than to the intra-burst spacing.
    double split = std::numeric_limits<double>::infinity();
    if (pattern.period > 0) {
        const double inter = static_cast<double>(pattern.period - pattern.eta.back());
        split = 0.5 * (static_cast<double>(pattern.max_spacing()) + inter);
    }
    std::vector<std::vector<TimingMarker>> groups;
    for (std::size_t i = 0; i < markers.size(); ++i) {
        if (i == 0 || static_cast<double>(markers[i].t - markers[i - 1].t) > split)
            groups.emplace_back();
        groups.back().push_back(markers[i]);
    }

    const long half = pattern.min_spacing() / 2;
    std::vector<BurstCluster> out;
    for (const auto& g : groups) {
        BurstCluster c;
        const long first = g.front().t;
        if (pattern.origin) {
            const long o = *pattern.origin;
            long b = 0;
            if (pattern.period > 0)
                b = std::lround(static_cast<double>(first - o) / static_cast<double>(pattern.period));
            c.burst = static_cast<int>(b);
            c.reference = o + b * std::max(0L, pattern.period);
        } else {
            long best_cost = std::numeric_limits<long>::max();
            for (std::size_t j = 0; j < pattern.eta.size(); ++j) {
                const long ref = first - pattern.eta[j];
                long cost = 0;
                for (const auto& m : g) {
                    long r;
                    nearest_index(pattern, m.t - ref, r);
                    cost += r;
                }
                if (cost < best_cost) {
                    best_cost = cost;
                    c.reference = ref;
                }
            }
            c.burst = static_cast<int>(out.size());
        }
        for (const auto& m : g) {
            long r;
            const int p = nearest_index(pattern, m.t - c.reference, r);
            c.members.push_back({m, r > half ? -1 : p});
        }
        out.push_back(std::move(c));
    }
    return out;
}

TimingGrid cross_burst_timing(const std::map<int, long>& single, const BurstPattern& pattern) {
    if (single.empty()) throw NoDetectionError("cross_burst_timing: no detected SSB");
    double acc = 0.0;
    for (const auto& [p, t] : single) {
        if (p < 0 || p >= static_cast<int>(pattern.eta.size()))
            throw RangeError("cross_burst_timing: SSB index " + std::to_string(p) + " outside pattern");
        acc += static_cast<double>(t - pattern.eta[p]);
    }
    TimingGrid g;
    g.tau0_mean = acc / static_cast<double>(single.size());
    g.tau0 = std::lround(g.tau0_mean);
    g.grid.resize(pattern.eta.size());
    for (std::size_t p = 0; p < pattern.eta.size(); ++p) g.grid[p] = g.tau0 + pattern.eta[p];
    return g;
}

double envelope_median(const Envelope& env) {
    if (env.values.empty()) return 0.0;
    std::vector<double> v = env.values;
    const auto mid = v.begin() + static_cast<long>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

}  // namespace ssb
