#include "ssblab/config_io.hpp"

#include <fstream>
#include <set>

namespace ssb {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::string& section, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(section + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError(section + ": unknown key '" + k + "'");
}

template <class T>
void get(const json& j, const std::string& section, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(section + "." + key + ": " + e.what());
    }
}

// Numbers, or the string "auto" mapped to `automatic`.
template <class T>
void get_auto(const json& j, const std::string& section, const char* key, T& out, T automatic) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (v.is_string()) {
        if (v.get<std::string>() != "auto")
            throw ConfigError(section + "." + key + ": expected a number or \"auto\"");
        out = automatic;
        return;
    }
    get(j, section, key, out);
}

ScenarioConfig parse_scenario(const json& j) {
    const std::string s = "scenario";
    only_keys(j, s, {"K", "P", "N", "tau0", "N_f", "N_o", "tau_max", "omega_max", "sigma_n2",
                     "sigma_c2", "mu_min", "mu_max", "sample_rate", "family", "sinr_profile",
                     "sinr_targets_db", "random_sinr_min_db", "random_sinr_max_db",
                     "interferer_power", "probe_index", "probe_sinr_db"});
    ScenarioConfig c;
    get(j, s, "K", c.K);
    get(j, s, "P", c.P);
    get(j, s, "N", c.N);
    get(j, s, "tau0", c.tau0);
    get(j, s, "N_f", c.N_f);
    get_auto(j, s, "N_o", c.N_o, 0L);
    get(j, s, "tau_max", c.tau_max);
    get(j, s, "omega_max", c.omega_max);
    get(j, s, "sigma_n2", c.sigma_n2);
    get_auto(j, s, "sigma_c2", c.sigma_c2, 0.0);
    get(j, s, "mu_min", c.mu_min);
    get(j, s, "mu_max", c.mu_max);
    get(j, s, "sample_rate", c.sample_rate);
    if (j.contains("family")) {
        std::string f;
        get(j, s, "family", f);
        c.family = family_from_string(f);
    }
    if (j.contains("sinr_profile")) {
        std::string p;
        get(j, s, "sinr_profile", p);
        c.profile = profile_from_string(p);
    }
    get(j, s, "sinr_targets_db", c.sinr_targets_db);
    get(j, s, "random_sinr_min_db", c.random_sinr_min_db);
    get(j, s, "random_sinr_max_db", c.random_sinr_max_db);
    get(j, s, "interferer_power", c.interferer_power);
    get(j, s, "probe_index", c.probe_index);
    get(j, s, "probe_sinr_db", c.probe_sinr_db);
    return c;
}

DetectorOptions parse_detector(const json& j) {
    const std::string s = "detector";
    only_keys(j, s, {"threshold_db", "guard", "fine_guard", "sss_ratio", "coherence", "min_snr", "dynamic_range_db", "refine",
                     "tau_tolerance", "max_rounds", "warm_iters", "burst_period", "origin"});
    DetectorOptions d;
    get(j, s, "threshold_db", d.threshold_db);
    get_auto(j, s, "guard", d.guard, 0L);
    get(j, s, "fine_guard", d.fine_guard);
    get(j, s, "sss_ratio", d.sss_ratio);
    get(j, s, "coherence", d.coherence);
    get(j, s, "min_snr", d.min_snr);
    get(j, s, "dynamic_range_db", d.dynamic_range_db);
    get(j, s, "refine", d.refine);
    get(j, s, "tau_tolerance", d.tau_tolerance);
    get(j, s, "max_rounds", d.max_rounds);
    get(j, s, "warm_iters", d.warm_iters);
    get(j, s, "burst_period", d.burst_period);
    if (j.contains("origin")) {
        if (j.at("origin").is_null()) d.origin.reset();
        else {
            long o = 0;
            get(j, s, "origin", o);
            d.origin = o;
        }
    }
    if (d.max_rounds < 1) throw ConfigError("detector.max_rounds must be >= 1");
    if (d.warm_iters < 1) throw ConfigError("detector.warm_iters must be >= 1");
    if (d.refine < 0 || d.tau_tolerance < 0) throw ConfigError("detector: refine and tau_tolerance must be >= 0");
    return d;
}

SicOptions parse_estimator(const json& j) {
    const std::string s = "estimator";
    only_keys(j, s, {"cfo_mode", "epsilon", "max_iters", "scaling_passes", "final_scaling_passes",
                     "fit_scaling"});
    SicOptions o;
    if (j.contains("cfo_mode")) {
        std::string m;
        get(j, s, "cfo_mode", m);
        if (m == "multi") o.mode = CfoMode::Multi;
        else if (m == "single") o.mode = CfoMode::SingleBest;
        else throw ConfigError("estimator.cfo_mode must be \"multi\" or \"single\"");
    }
    get_auto(j, s, "epsilon", o.epsilon, 0.0);
    get(j, s, "max_iters", o.max_iters);
    get(j, s, "scaling_passes", o.scaling_passes);
    get(j, s, "final_scaling_passes", o.final_scaling_passes);
    get(j, s, "fit_scaling", o.fit_scaling);
    if (o.max_iters < 1) throw ConfigError("estimator.max_iters must be >= 1");
    return o;
}

void parse_campaign(const json& j, CampaignConfig& c) {
    const std::string s = "campaign";
    only_keys(j, s, {"sinr_grid", "trials", "methods", "threads"});
    get(j, s, "sinr_grid", c.sinr_grid);
    get(j, s, "trials", c.trials);
    get(j, s, "threads", c.threads);
    if (j.contains("methods")) {
        std::vector<std::string> names;
        get(j, s, "methods", names);
        c.methods.clear();
        for (const auto& n : names) c.methods.push_back(method_from_string(n));
    }
}

AnalysisConfig parse_analysis(const json& j) {
    const std::string s = "analysis";
    only_keys(j, s, {"delta_max", "tau", "tau_p", "P", "lambda_c", "speeds", "theta_deg",
                     "distances", "rho0_db", "rho1_db", "tau_c", "r_mag", "sample_rate"});
    AnalysisConfig a;
    get(j, s, "delta_max", a.coherence.delta_max);
    get(j, s, "tau", a.coherence.tau);
    get(j, s, "tau_p", a.coherence.tau_p);
    get(j, s, "P", a.coherence.P);
    get(j, s, "lambda_c", a.lambda_c);
    get(j, s, "speeds", a.speeds);
    get(j, s, "theta_deg", a.theta_deg);
    get(j, s, "distances", a.distances);
    get(j, s, "rho0_db", a.rho0_db);
    get(j, s, "rho1_db", a.rho1_db);
    get(j, s, "tau_c", a.tau_c);
    get(j, s, "r_mag", a.r_mag);
    get(j, s, "sample_rate", a.sample_rate);
    if (!(a.lambda_c > 0.0)) throw ConfigError("analysis.lambda_c must be positive");
    if (!(a.coherence.delta_max > 0.0) || !(a.coherence.tau > 0.0) || !(a.coherence.tau_p > 0.0) ||
        !(a.coherence.P > 0.0))
        throw ConfigError("analysis: delta_max, tau, tau_p and P must be positive");
    for (double v : a.speeds)
        if (!(v >= 0.0)) throw ConfigError("analysis.speeds must be >= 0");
    for (double d : a.distances)
        if (!(d > 0.0)) throw ConfigError("analysis.distances must be positive");
    if (!(a.r_mag > 0.0) || a.r_mag > 1.0) throw ConfigError("analysis.r_mag must be in (0, 1]");
    if (!(a.tau_c > 0.0)) throw ConfigError("analysis.tau_c must be positive");
    return a;
}

}  // namespace

SequenceFamily family_from_string(const std::string& s) {
    if (s == "nr") return SequenceFamily::Nr;
    if (s == "zc") return SequenceFamily::ZadoffChu;
    throw ConfigError("scenario.family must be \"nr\" or \"zc\"");
}

SinrProfile profile_from_string(const std::string& s) {
    if (s == "unit") return SinrProfile::Unit;
    if (s == "random") return SinrProfile::Random;
    if (s == "targets") return SinrProfile::Targets;
    if (s == "probe") return SinrProfile::Probe;
    throw ConfigError("scenario.sinr_profile must be unit, random, targets or probe");
}

AppConfig parse_config(const json& j) {
    only_keys(j, "config", {"seed", "scenario", "detector", "estimator", "campaign", "analysis"});
    AppConfig c;
    get(j, "config", "seed", c.seed);
    if (j.contains("scenario")) c.scenario = parse_scenario(j.at("scenario"));
    if (j.contains("detector")) c.detector = parse_detector(j.at("detector"));
    if (j.contains("estimator")) c.estimator = parse_estimator(j.at("estimator"));
    if (j.contains("campaign")) parse_campaign(j.at("campaign"), c.campaign);
    if (j.contains("analysis")) c.analysis = parse_analysis(j.at("analysis"));
    validate(c.scenario);
    return c;
}

AppConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return parse_config(j);
}

void resolve(AppConfig& c) {
    if (c.scenario.N_o <= 0) c.scenario.N_o = c.scenario.observation();
    if (c.scenario.sigma_c2 <= 0.0) c.scenario.sigma_c2 = c.scenario.leakage();
    c.estimator.model = model_params(c.scenario);
    c.estimator.family = c.scenario.family;
    c.campaign.scenario = c.scenario;
    c.campaign.detector = c.detector;
    c.campaign.sic = c.estimator;
    c.campaign.seed = c.seed;
}

json to_json(const ScenarioConfig& c) {
    return json{{"K", c.K},
                {"P", c.P},
                {"N", c.N},
                {"tau0", c.tau0},
                {"N_f", c.N_f},
                {"N_o", c.observation()},
                {"tau_max", c.tau_max},
                {"omega_max", c.omega_max},
                {"sigma_n2", c.sigma_n2},
                {"sigma_c2", c.leakage()},
                {"mu_min", c.mu_min},
                {"mu_max", c.mu_max},
                {"sample_rate", c.sample_rate},
                {"family", to_string(c.family)},
                {"sinr_profile", to_string(c.profile)},
                {"sinr_targets_db", c.sinr_targets_db},
                {"random_sinr_min_db", c.random_sinr_min_db},
                {"random_sinr_max_db", c.random_sinr_max_db},
                {"interferer_power", c.interferer_power},
                {"probe_index", c.probe_index},
                {"probe_sinr_db", c.probe_sinr_db}};
}

json to_json(const AppConfig& c) {
    json det{{"threshold_db", c.detector.threshold_db},
             {"guard", c.detector.guard > 0 ? json(c.detector.guard) : json("auto")},
             {"fine_guard", c.detector.fine_guard},
             {"sss_ratio", c.detector.sss_ratio},
             {"coherence", c.detector.coherence},
             {"min_snr", c.detector.min_snr},
             {"dynamic_range_db", c.detector.dynamic_range_db},
             {"refine", c.detector.refine},
             {"tau_tolerance", c.detector.tau_tolerance},
             {"max_rounds", c.detector.max_rounds},
             {"warm_iters", c.detector.warm_iters},
             {"burst_period", c.detector.burst_period},
             {"origin", c.detector.origin ? json(*c.detector.origin) : json(nullptr)}};
    json est{{"cfo_mode", c.estimator.mode == CfoMode::Multi ? "multi" : "single"},
             {"epsilon", c.estimator.epsilon > 0.0 ? json(c.estimator.epsilon) : json("auto")},
             {"max_iters", c.estimator.max_iters},
             {"scaling_passes", c.estimator.scaling_passes},
             {"final_scaling_passes", c.estimator.final_scaling_passes},
             {"fit_scaling", c.estimator.fit_scaling}};
    std::vector<std::string> methods;
    for (Method m : c.campaign.methods) methods.push_back(to_string(m));
    json camp{{"sinr_grid", c.campaign.sinr_grid},
              {"trials", c.campaign.trials},
              {"methods", methods},
              {"threads", c.campaign.threads}};
    const auto& a = c.analysis;
    json ana{{"delta_max", a.coherence.delta_max}, {"tau", a.coherence.tau},
             {"tau_p", a.coherence.tau_p},         {"P", a.coherence.P},
             {"lambda_c", a.lambda_c},             {"speeds", a.speeds},
             {"theta_deg", a.theta_deg},           {"distances", a.distances},
             {"rho0_db", a.rho0_db},               {"rho1_db", a.rho1_db},
             {"tau_c", a.tau_c},                   {"r_mag", a.r_mag},
             {"sample_rate", a.sample_rate}};
    return json{{"seed", c.seed},     {"scenario", to_json(c.scenario)}, {"detector", det},
                {"estimator", est},   {"campaign", camp},                {"analysis", ana}};
}

}  // namespace ssb
