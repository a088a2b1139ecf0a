#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssblab/analytics.hpp"
#include "ssblab/bench.hpp"
#include "ssblab/cell_search.hpp"
#include "ssblab/estimate.hpp"
#include "ssblab/scenario.hpp"

namespace ssb {

struct AnalysisConfig {
    CoherenceSpec coherence;
    double lambda_c = 0.1;
    std::vector<double> speeds{5, 10, 20, 30};
    std::vector<double> theta_deg{0, 30, 60, 90};
    std::vector<double> distances{50, 100, 200};
    double rho0_db = 0.0;
    double rho1_db = 0.0;
    double tau_c = 254;
    double r_mag = 1.0;
    double sample_rate = 30.72e6;
};

/// The whole configuration document: scenario, detector, estimator, campaign, analysis.
struct AppConfig {
    std::uint64_t seed = 1;
    ScenarioConfig scenario;
    DetectorOptions detector;
    SicOptions estimator;
    CampaignConfig campaign;  // scenario/detector/estimator are copied in by resolve()
    AnalysisConfig analysis;
};

/// Parses a configuration document. Unknown keys and ill-typed values throw ConfigError.
AppConfig parse_config(const nlohmann::json& j);
AppConfig load_config(const std::string& path);

/// Copies shared sections into the campaign, applies the seed, fills derived model parameters.
void resolve(AppConfig& cfg);

/// The resolved configuration as a document; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const AppConfig& cfg);
nlohmann::json to_json(const ScenarioConfig& cfg);

SequenceFamily family_from_string(const std::string& s);
SinrProfile profile_from_string(const std::string& s);

}  // namespace ssb
