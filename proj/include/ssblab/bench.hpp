#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ssblab/cell_search.hpp"
#include "ssblab/estimate.hpp"
#include "ssblab/scenario.hpp"

namespace ssb {

enum class Method {
    ProposedMulti,
    ProposedSingle,
    BaselineAutocorr,
    BaselinePowerWeighted,
    ClassicalPipeline,
};

const char* to_string(Method m);
Method method_from_string(const std::string& s);
std::vector<Method> all_methods();

struct CampaignConfig {
    ScenarioConfig scenario;  // profile is forced to Probe; probe_sinr_db follows the grid
    DetectorOptions detector;
    SicOptions sic;  // model is filled from the scenario
    std::vector<double> sinr_grid{-30, -25, -20, -15, -10, -5, 0, 5, 10};
    int trials = 200;
    std::vector<Method> methods = all_methods();
    std::uint64_t seed = 1;
    int threads = 0;  // 0: hardware concurrency
};

void validate(const CampaignConfig& cfg);

/// Split-sequence autocorrelation CFO: -angle(<second half, first half>) / (N/2) on the despread window.
double baseline_autocorr_cfo(const CVec& y, long tau, const SyncSequence& seq);

/// angle(sum_p power_p * exp(j*omega_p*tau_c)) / tau_c
double baseline_power_weighted(const std::vector<double>& per_ssb_cfo,
                               const std::vector<double>& power, int tau_c);

struct MethodResult {
    Method method = Method::ProposedMulti;
    bool has_detection = false;
    bool detected = false;
    bool has_estimate = false;
    double omega_hat = 0.0;
    double cfo_abs_error = 0.0;
    double nmse = 0.0;
    bool has_sic = false;
    bool sic_converged = false;
    bool sic_monotone = false;
    std::string error;
};

struct TrialResult {
    double sinr_db = 0.0;
    std::uint64_t seed = 0;
    int probe = 0;
    double probe_omega = 0.0;
    std::vector<MethodResult> methods;

    const MethodResult* find(Method m) const;
};

TrialResult run_trial(const CampaignConfig& cfg, double sinr_db, std::uint64_t seed);

struct SummaryRow {
    double sinr_db = 0.0;
    Method method = Method::ProposedMulti;
    double detection_rate = 0.0;
    double detection_stderr = 0.0;
    double cfo_mae = 0.0;
    double cfo_stderr = 0.0;
    double nmse = 0.0;
    double nmse_stderr = 0.0;
    int trials = 0;
    std::uint64_t seed = 0;
    double sic_converged_rate = 0.0;
    double sic_monotone_rate = 0.0;
};

struct CampaignSummary {
    std::vector<SummaryRow> rows;

    const SummaryRow* find(double sinr_db, Method m) const;
};

/// Runs every (grid point, trial) with seeds derive_seed(seed, point, trial).
CampaignSummary run_campaign(const CampaignConfig& cfg, std::vector<TrialResult>* trials = nullptr);

/// Aggregates trials of one grid point in trial order.
std::vector<SummaryRow> summarize(const std::vector<TrialResult>& trials, double sinr_db,
                                  const std::vector<Method>& methods, std::uint64_t seed);

void write_results_csv(std::ostream& os, const CampaignSummary& s, const std::string& config_hash);

}  // namespace ssb
