#include "ssblab/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ssblab/analytics.hpp"
#include "ssblab/bench.hpp"
#include "ssblab/cell_search.hpp"

#ifndef SSBLAB_VERSION
#define SSBLAB_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace ssb {

std::string version() {
    return SSBLAB_VERSION;
}

std::string config_hash(const json& resolved) {
    const std::string text = resolved.dump();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < 8 && i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

namespace {

struct Loaded {
    AppConfig cfg;
    json resolved;
    std::string hash;
};

Loaded load(const RunManifest& m) {
    Loaded l;
    l.cfg = load_config(m.config_path);
    if (m.seed) l.cfg.seed = *m.seed;
    resolve(l.cfg);
    l.resolved = to_json(l.cfg);
    l.hash = config_hash(l.resolved);
    return l;
}

fs::path out_dir(const RunManifest& m) {
    fs::path p(m.output_dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec || !fs::is_directory(p)) throw IoError("cannot create output directory '" + m.output_dir + "'");
    return p;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

json complex_list(const std::vector<cplx>& v) {
    json a = json::array();
    for (const auto& z : v) a.push_back({z.real(), z.imag()});
    return a;
}

std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void log(const RunManifest& m, const std::string& msg) {
    if (m.verbosity > 0) std::cerr << "[ssblab] " << msg << '\n';
}

}  // namespace

void cmd_simulate(const RunManifest& m) {
    const Loaded l = load(m);
    const fs::path dir = out_dir(m);
    const auto& sc = l.cfg.scenario;
    log(m, "simulating K=" + std::to_string(sc.K) + " P=" + std::to_string(sc.P));
    const GroundTruth gt = sample_ground_truth(sc, l.cfg.seed);
    const SampleVector y = synthesize_received(sc, gt, l.cfg.seed);

    const std::string wave = std::string("waveform.") + to_string(m.sample_format);
    write_waveform((dir / wave).string(), y.samples, m.sample_format);
    write_json(dir / "waveform.json", json{{"file", wave},
                                           {"format", to_string(m.sample_format)},
                                           {"byte_order", "little"},
                                           {"interleaving", "iq"},
                                           {"length", y.samples.size()},
                                           {"sample_rate", y.sample_rate},
                                           {"seed", l.cfg.seed},
                                           {"config_hash", l.hash}});

    json bs = json::array();
    for (const auto& b : gt.bs) {
        bs.push_back({{"pci", b.pci()},
                      {"nid1", b.nid1},
                      {"nid2", b.nid2},
                      {"tau", b.tau},
                      {"omega", b.omega},
                      {"omega_hz", cfo_to_hz(b.omega, sc.sample_rate)},
                      {"mu", b.mu},
                      {"power", b.power},
                      {"alpha", complex_list(b.alpha)}});
    }
    write_json(dir / "ground_truth.json",
               json{{"config_hash", l.hash}, {"seed", l.cfg.seed}, {"family", to_string(sc.family)}, {"bs", bs}});
}

void cmd_estimate(const RunManifest& m) {
    const Loaded l = load(m);
    const fs::path dir = out_dir(m);
    const auto& sc = l.cfg.scenario;
    SampleFormat fmt = m.sample_format;
    fs::path input = m.input.empty() ? dir / (std::string("waveform.") + to_string(fmt)) : fs::path(m.input);
    if (m.input.empty() && !fs::exists(input) && fs::exists(dir / "waveform.json")) {
        std::ifstream s(dir / "waveform.json");
        const json side = json::parse(s, nullptr, false);
        if (side.is_object() && side.contains("file")) input = dir / side["file"].get<std::string>();
    }
    double sample_rate = sc.sample_rate;
    const fs::path sidecar = fs::path(input).replace_extension(".json");
    std::size_t expect = 0;
    if (fs::exists(sidecar)) {
        std::ifstream s(sidecar);
        const json side = json::parse(s, nullptr, false);
        if (side.is_discarded() || !side.is_object()) throw IoError("malformed sidecar '" + sidecar.string() + "'");
        if (side.contains("format")) fmt = sample_format_from_string(side["format"].get<std::string>());
        if (side.contains("sample_rate")) sample_rate = side["sample_rate"].get<double>();
        if (side.contains("length")) expect = side["length"].get<std::size_t>();
    } else if (input.extension() == ".cf64") {
        fmt = SampleFormat::Cf64;
    }
    log(m, "reading " + input.string());
    const CVec y = read_waveform(input.string(), fmt);
    if (expect && y.size() != expect) throw IoError("waveform length differs from its sidecar");
    if (static_cast<long>(y.size()) != sc.observation())
        throw IoError("waveform has " + std::to_string(y.size()) + " samples, configuration expects " +
                      std::to_string(sc.observation()));

    const PipelineResult res = detect_and_estimate(y, sc, l.cfg.detector, l.cfg.estimator);
    if (res.report.cells.empty()) throw NoDetectionError("no cell detected in '" + input.string() + "'");
    log(m, "detected " + std::to_string(res.report.cells.size()) + " cells in " +
               std::to_string(res.rounds) + " rounds");

    json cells = json::array();
    for (const auto& c : res.report.cells) {
        cells.push_back({{"pci", c.pci()},
                         {"nid1", c.nid1},
                         {"nid2", c.nid2},
                         {"tau0", c.tau0},
                         {"tau_grid", c.grid},
                         {"detected_ssbs", c.detected_ssbs},
                         {"omega", c.omega},
                         {"omega_hz", cfo_to_hz(c.omega, sample_rate)},
                         {"mu", c.mu},
                         {"power", c.power},
                         {"alpha", complex_list(c.alpha)},
                         {"delta_trace", c.delta_trace}});
    }
    write_json(dir / "estimate.json", json{{"config_hash", l.hash},
                                           {"input", input.string()},
                                           {"sample_rate", sample_rate},
                                           {"iterations", res.report.iterations},
                                           {"converged", res.report.converged},
                                           {"epsilon", res.report.epsilon},
                                           {"residual_trace", res.report.residual_trace},
                                           {"detection_rounds", res.rounds},
                                           {"cells", cells}});
}

void cmd_campaign(const RunManifest& m) {
    const Loaded l = load(m);
    const fs::path dir = out_dir(m);
    log(m, "campaign: " + std::to_string(l.cfg.campaign.sinr_grid.size()) + " points x " +
               std::to_string(l.cfg.campaign.trials) + " trials");
    const CampaignSummary s = run_campaign(l.cfg.campaign);
    {
        std::ofstream out(dir / "results.csv", std::ios::trunc);
        if (!out) throw IoError("cannot open results.csv for writing");
        write_results_csv(out, s, l.hash);
        if (!out) throw IoError("write to results.csv failed");
    }
    write_json(dir / "run_metadata.json",
               json{{"config", l.resolved},
                    {"config_hash", l.hash},
                    {"version", version()},
                    {"timestamp", utc_timestamp()},
                    {"sinr_axis", "correlation-domain SINR of the probe BS (scenario.probe_index); "
                                  "other BSs stay at scenario.interferer_power"}});
}

void cmd_analyze(const RunManifest& m) {
    const Loaded l = load(m);
    const fs::path dir = out_dir(m);
    const AnalysisConfig& a = l.cfg.analysis;
    std::ofstream out(dir / "analytics.csv", std::ios::trunc);
    if (!out) throw IoError("cannot open analytics.csv for writing");
    out << "v_mps,theta_deg,d_m,drift_exact_hz,drift_approx_hz,max_speed_mps,p_eff,"
           "crlb_rad2,crlb_std_hz,config_hash\n";
    char buf[64];
    auto num = [&](double v) {
        if (is_unbounded(v)) return std::string("unbounded");
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return std::string(buf);
    };
    CrlbInputs rho;
    rho.gamma0 = std::pow(10.0, a.rho0_db / 10.0);
    rho.gamma1 = std::pow(10.0, a.rho1_db / 10.0);
    rho.tau_c = a.tau_c;
    rho.r_mag = a.r_mag;
    const double hz = a.sample_rate / (2.0 * kPi);
    for (double d : a.distances) {
        for (double th : a.theta_deg) {
            for (double v : a.speeds) {
                MotionState ms{v, th * kPi / 180.0, d, a.lambda_c};
                const Drift dr = cfo_drift(ms, a.coherence.tau);
                const double vmax = max_speed(a.coherence.delta_max, a.lambda_c, d, ms.theta, a.coherence.tau);
                const DriftLimited dl = drift_limited(a.coherence, ms, rho);
                const double std_hz = is_unbounded(dl.crlb) ? kUnbounded : std::sqrt(dl.crlb) * hz;
                out << num(v) << ',' << num(th) << ',' << num(d) << ',' << num(dr.exact) << ','
                    << num(dr.approx) << ',' << num(vmax) << ',' << num(dl.P_eff) << ','
                    << num(dl.crlb) << ',' << num(std_hz) << ',' << l.hash << '\n';
            }
        }
    }
    if (!out) throw IoError("write to analytics.csv failed");
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-cell SS-burst detection and CFO estimation laboratory", "ssblab"};
    app.set_version_flag("--version", version());
    app.require_subcommand(1);

    RunManifest m;
    std::string fmt = "cf32";
    std::uint64_t seed = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", m.config_path, "configuration document (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", m.output_dir, "output directory (default: $SSBLAB_OUT_DIR)");
        sub->add_option("--seed", seed, "override the configured seed");
        sub->add_flag("-v,--verbose", m.verbosity, "progress messages on stderr");
    };
    auto* sim = app.add_subcommand("simulate", "synthesize a waveform and its ground truth");
    add_common(sim);
    sim->add_option("--sample-format", fmt, "cf32 (default) or cf64")->check(CLI::IsMember({"cf32", "cf64"}));
    auto* est = app.add_subcommand("estimate", "detect cells and estimate CFO/channels from a waveform");
    add_common(est);
    est->add_option("--input", m.input, "waveform file (default: <out>/waveform.<format>)");
    est->add_option("--sample-format", fmt, "format when no sidecar is present")->check(CLI::IsMember({"cf32", "cf64"}));
    auto* camp = app.add_subcommand("campaign", "Monte Carlo comparison over the SINR grid");
    add_common(camp);
    auto* ana = app.add_subcommand("analyze", "motion and coherence analytics table");
    add_common(ana);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    if (app.got_subcommand(sim)) m.command = Command::Simulate;
    else if (app.got_subcommand(est)) m.command = Command::Estimate;
    else if (app.got_subcommand(camp)) m.command = Command::Campaign;
    else m.command = Command::Analyze;
    for (auto* sub : {sim, est, camp, ana})
        if (app.got_subcommand(sub) && sub->count("--seed")) m.seed = seed;
    m.sample_format = sample_format_from_string(fmt);
    if (m.output_dir.empty()) {
        if (const char* env = std::getenv("SSBLAB_OUT_DIR"); env && *env) m.output_dir = env;
        else {
            err << "error: no output directory (--out or SSBLAB_OUT_DIR)\n";
            return kExitUsage;
        }
    }

    try {
        switch (m.command) {
            case Command::Simulate: cmd_simulate(m); break;
            case Command::Estimate: cmd_estimate(m); break;
            case Command::Campaign: cmd_campaign(m); break;
            case Command::Analyze: cmd_analyze(m); break;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const NoDetectionError& e) {
        err << "no detection: " << e.what() << '\n';
        return kExitNoDetection;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitOk;
}

}  // namespace ssb
