#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ssblab/corrlab.hpp"

namespace ssb {

struct TimingMarker {
    long t = 0;
    int root = -1;
    double score = 0.0;
};

/// Intra-burst SSB offsets eta (eta[0] == 0, strictly increasing) and the burst period.
struct BurstPattern {
    std::vector<long> eta;
    long period = 0;  // <= 0: a single burst
    /// Known arrival of eta[0] within a period, if the receiver has a frame reference.
    std::optional<long> origin;

    static BurstPattern uniform(int P, long stride, long period);
    long min_spacing() const;
    long max_spacing() const;
    /// Half the minimum inter-SSB spacing.
    long default_guard() const;
    void check() const;
};

/// Markers are local maxima >= threshold that dominate every other local maximum within
/// +-guard by at least 3 dB.
std::vector<TimingMarker> extract_markers(const Envelope& env, long guard, double threshold);

inline constexpr double kDominanceRatio = 1.9952623149688795;  // 10^(3/10)

struct ClusteredMarker {
    TimingMarker marker;
    int ssb = -1;  // -1: no grid position within half the minimum spacing
};

struct BurstCluster {
    int burst = 0;
    long reference = 0;  // sample where eta[0] of this burst falls
    std::vector<ClusteredMarker> members;
};

std::vector<BurstCluster> cluster_bursts(const std::vector<TimingMarker>& markers,
                                         const BurstPattern& pattern);

struct TimingGrid {
    double tau0_mean = 0.0;
    long tau0 = 0;
    std::vector<long> grid;  // tau0 + eta[p] for every p
};

/// Least-squares anchor from single-shot timings: tau0 = round(mean(tau_p - eta_p)).
TimingGrid cross_burst_timing(const std::map<int, long>& single, const BurstPattern& pattern);

struct DetectedCell {
    int group = 0;
    int nid1 = 0;
    int nid2 = 0;
    std::vector<int> detected_ssbs;
    std::map<int, long> single;
    long tau0 = 0;
    std::vector<long> grid;
    double sss_ratio = 0.0;

    int pci() const { return 3 * nid1 + nid2; }
};

struct DetectionResult {
    std::vector<DetectedCell> cells;
};

/// Median of the envelope values (0 for an empty envelope).
double envelope_median(const Envelope& env);

}  // namespace ssb
