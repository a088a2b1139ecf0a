#pragma once

#include <optional>
#include <vector>

#include "ssblab/detect.hpp"
#include "ssblab/estimate.hpp"
#include "ssblab/scenario.hpp"

namespace ssb {

struct DetectorOptions {
    double threshold_db = 12.0;  // envelope threshold above its median
    long guard = 0;              // <= 0: half the minimum SSB spacing
    long fine_guard = 4;         // retried when the default guard yields no new cell; <= 0 disables
    double sss_ratio = 3.0;      // best SSS score over the median score across N_ID1
    double coherence = 0.4;      // minimum PSS/SSS phase coherence across the burst
    double min_snr = 3.0;        // minimum mean matched-filter SNR per SSB on the residual
    double dynamic_range_db = 80.0;  // candidates this far below the strongest cell are ignored
    int refine = 2;              // +- samples searched around the cross-burst anchor
    int tau_tolerance = 2;       // markers whose anchors differ by at most this merge
    int max_rounds = 24;
    int warm_iters = 2;
    long burst_period = 614400;  // 20 ms at 30.72 MHz
    std::optional<long> origin = 0L;
};

struct PipelineResult {
    DetectionResult detection;
    EstimateReport report;
    std::vector<CellState> states;
    int rounds = 0;
};

BurstPattern burst_pattern(const ScenarioConfig& cfg, const DetectorOptions& det);

/// Iterative cross-burst cell search with SIC between rounds, followed by a full SIC run.
///
/// Each round extracts per-root markers from the envelope of the current residual, anchors
/// them on the burst grid, identifies N_ID1 by SSS correlation over the completed grid, and
/// adds the new cells before a short warm-started SIC pass.
PipelineResult detect_and_estimate(const CVec& y, const ScenarioConfig& cfg,
                                   const DetectorOptions& det, const SicOptions& sic);

}  // namespace ssb
