#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssblab/common.hpp"
#include "ssblab/seqgen.hpp"

namespace ssb {

enum class SequenceFamily { Nr, ZadoffChu };

enum class SinrProfile {
    Unit,     // every BS at interferer_power
    Random,   // per-BS target drawn uniformly in dB
    Targets,  // explicit per-BS targets
    Probe,    // one BS swept, the others at interferer_power
};

const char* to_string(SequenceFamily f);
const char* to_string(SinrProfile p);

struct ScenarioConfig {
    int K = 12;
    int P = 12;
    int N = kNrSeqLen;
    int tau0 = 127;
    int N_f = 1024;
    long N_o = 0;  // 0: derived from the frame layout
    int tau_max = 64;
    double omega_max = 0.006;
    double sigma_n2 = 1e-4;
    double sigma_c2 = 0.0;  // <= 0: calibrated from the sequence family
    double mu_min = 1.0;
    double mu_max = 1.0;
    double sample_rate = 30.72e6;
    SequenceFamily family = SequenceFamily::Nr;

    SinrProfile profile = SinrProfile::Unit;
    std::vector<double> sinr_targets_db;
    double random_sinr_min_db = -10.0;
    double random_sinr_max_db = 10.0;
    double interferer_power = 1.0;
    int probe_index = 0;
    double probe_sinr_db = 0.0;

    int tau_c() const { return N + tau0; }
    int frame_len() const { return 2 * N + tau0; }
    long min_observation() const;
    /// N_o with the automatic default applied.
    long observation() const;
    /// sigma_c2 with the calibration default applied.
    double leakage() const;
};

/// Throws ConfigError describing the first violated constraint.
void validate(const ScenarioConfig& cfg);

struct BsTruth {
    int nid1 = 0;  // NR: N_ID1; ZC: root of c1
    int nid2 = 0;  // NR: N_ID2; ZC: root of c0
    long tau = 0;
    double omega = 0.0;
    double mu = 1.0;
    double power = 1.0;  // E|alpha|^2 used for the draw
    std::vector<cplx> alpha;

    int pci() const { return 3 * nid1 + nid2; }
};

struct GroundTruth {
    std::vector<BsTruth> bs;
};

struct SampleVector {
    CVec samples;
    double sample_rate = 0.0;
};

/// c0/c1 reference pair for an identity under the configured family.
SyncSequence reference_c0(SequenceFamily family, int N, int nid1, int nid2);
SyncSequence reference_c1(SequenceFamily family, int N, int nid1, int nid2);
SsFrame frame_for(const ScenarioConfig& cfg, const BsTruth& bs);

/// Mean |xcorr|^2 times N over mismatched pairs and partial-overlap lags up to tau_max.
double calibrate_sigma_c2(SequenceFamily family, int N, int tau_max);

/// Per-BS mean SSB power E|alpha|^2 meeting the configured correlation-domain SINR profile.
std::vector<double> solve_powers(const ScenarioConfig& cfg, Rng& rng);

/// Correlation-domain SINR N*s_k / (sigma_c2 * sum_{q!=k} s_q + sigma_n2).
std::vector<double> correlation_sinr(const ScenarioConfig& cfg, const std::vector<double>& power);

GroundTruth sample_ground_truth(const ScenarioConfig& cfg, std::uint64_t seed);

struct SynthOptions {
    bool noise = true;
};

SampleVector synthesize_received(const ScenarioConfig& cfg, const GroundTruth& gt,
                                 std::uint64_t seed, SynthOptions opts = {});

}  // namespace ssb
