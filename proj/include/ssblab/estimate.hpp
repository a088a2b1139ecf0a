#pragma once

#include <Eigen/Dense>

#include <vector>

#include "ssblab/corrlab.hpp"
#include "ssblab/detect.hpp"
#include "ssblab/scenario.hpp"
#include "ssblab/seqgen.hpp"

namespace ssb {

struct ModelParams {
    int P = 12;
    int N_f = 1024;
    int tau0 = 127;
    double sigma_n2 = 1e-4;
    double sigma_c2 = 1.0;
    int N = kNrSeqLen;

    int tau_c() const { return N + tau0; }
    int frame_len() const { return 2 * N + tau0; }
};

ModelParams model_params(const ScenarioConfig& cfg);

/// Current hypothesis for one BS: identity, timing anchor, CFO, scaling and per-SSB gains.
struct CellState {
    int nid1 = 0;
    int nid2 = 0;
    SyncSequence c0;
    SyncSequence c1;
    long tau = 0;
    double omega = 0.0;
    double mu = 1.0;
    std::vector<cplx> alpha;

    int N() const { return static_cast<int>(c0.size()); }
    int tau_c(int tau0) const { return N() + tau0; }
    double power() const;
};

struct ColumnRef {
    int cell = 0;
    int ssb = 0;
};

/// One connected group of overlapping SSB supports.
struct ModelBlock {
    long row0 = 0;
    std::vector<ColumnRef> cols;
    Eigen::MatrixXcd A;   // full columns: c0 part + mu * c1 part, CFO applied
    Eigen::MatrixXcd A0;  // c0 part only
    Eigen::MatrixXcd A1;  // c1 part without mu
};

struct ModelMatrices {
    long n_obs = 0;
    std::vector<ModelBlock> blocks;
};

/// Block-diagonal observation operator for the current timing, CFO and scaling hypotheses.
ModelMatrices build_model(const std::vector<CellState>& cells, const ModelParams& mp, long n_obs);

/// A * alpha over the whole observation.
CVec reconstruct(const ModelMatrices& m, const std::vector<CellState>& cells);
CVec reconstruct(const std::vector<CellState>& cells, const ModelParams& mp, long n_obs);

/// Adds sign * (contribution of one cell) to target.
void add_contribution(CVec& target, const CellState& cell, const ModelParams& mp, double sign);

/// Joint least-squares gains, alpha[k][p]. Rank deficiency throws DegeneracyError.
std::vector<std::vector<cplx>> estimate_channel_gains(const CVec& y,
                                                      const std::vector<CellState>& cells,
                                                      const ModelParams& mp);

/// Real least-squares scaling from the second-sequence residual y - A0*alpha, floored at kMuFloor.
std::vector<double> estimate_scaling(const CVec& y, const std::vector<CellState>& cells,
                                     const ModelParams& mp);

inline constexpr double kMuFloor = 1e-6;

/// Alternates gain and scaling updates until mu settles or `passes` is reached.
void fit_gains_and_scaling(const CVec& y, std::vector<CellState>& cells, const ModelParams& mp,
                           int passes, bool fit_scaling = true);

/// Single-SSB estimate -angle(r1 / r0) / tau_c.
double cfo_single(cplx r0, cplx r1, int tau_c);

/// Multi-SSB ML estimate angle(psi1 * conj(psi0)) / tau_c with inverse-variance weights.
double cfo_multi(const CorrelationSet& cs, const std::vector<cplx>& alpha, double mu, int tau_c);

enum class CfoMode { Multi, SingleBest };

struct SicOptions {
    ModelParams model;
    SequenceFamily family = SequenceFamily::Nr;
    CfoMode mode = CfoMode::Multi;
    double epsilon = 0.0;  // <= 0: 1e-7 * K
    int max_iters = 20;
    int scaling_passes = 1;
    int final_scaling_passes = 8;
    bool fit_scaling = true;
};

struct CellEstimate {
    int state_index = 0;
    int nid1 = 0;
    int nid2 = 0;
    long tau0 = 0;
    std::vector<long> grid;
    std::vector<int> detected_ssbs;
    double omega = 0.0;
    double mu = 1.0;
    std::vector<cplx> alpha;
    double power = 0.0;
    std::vector<double> delta_trace;

    int pci() const { return 3 * nid1 + nid2; }
};

struct EstimateReport {
    std::vector<CellEstimate> cells;  // descending estimated power
    int iterations = 0;
    bool converged = false;
    double epsilon = 0.0;
    std::vector<double> residual_trace;  // sum_k |delta_k| per iteration
};

/// True when trace[i] <= trace[i-1] for every iteration index >= from (1-based).
bool trace_non_increasing(const std::vector<double>& trace, int from = 2);

/// SIC refinement starting from (and updating) the given states.
EstimateReport sic_refine(const CVec& y, std::vector<CellState>& cells, const SicOptions& opts);

/// Builds states from a detection result (CFO 0, mu 1) and runs SIC.
EstimateReport sic_joint_estimate(const CVec& y, const DetectionResult& det, const SicOptions& opts);

/// Fills grid and detection fields of a report from the detection that seeded the states.
void attach_detection(EstimateReport& rep, const DetectionResult& det);

CellState make_cell(const SyncSequence& c0, const SyncSequence& c1, int nid1, int nid2, long tau,
                    int P);

}  // namespace ssb
