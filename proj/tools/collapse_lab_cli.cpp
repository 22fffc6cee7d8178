// collapse-lab command line front end.
//
// Exit codes: 0 success, 2 usage, 3 domain (out-of-range parameter),
// 4 i/o failure, 1 unexpected runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "collapse_lab/experiments.hpp"
#include "collapse_lab/io.hpp"
#include "collapse_lab/version.hpp"

namespace {

using clab::json;

constexpr std::uint64_t kDefaultTrials = 10000;
constexpr double kDefaultDelta = 0.01;
constexpr std::uint64_t kDefaultSeed = 42;

struct ConfigFile {
    json parameters = json::object();
    std::optional<std::uint64_t> master_seed;
    std::optional<std::string> timestamp;
    std::optional<std::string> experiment;
};

ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw clab::IoError("cannot read config file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw clab::UsageError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw clab::UsageError("config file '" + path + "' must hold a JSON object");

    ConfigFile cfg;
    if (doc.contains("parameters")) {
        // full manifest (possibly wrapped in a summary document)
        if (doc.contains("manifest")) doc = doc.at("manifest");
        cfg.parameters = doc.value("parameters", json::object());
        if (doc.contains("master_seed")) cfg.master_seed = doc.at("master_seed").get<std::uint64_t>();
        if (doc.contains("timestamp_utc")) cfg.timestamp = doc.at("timestamp_utc").get<std::string>();
        if (doc.contains("experiment")) cfg.experiment = doc.at("experiment").get<std::string>();
    } else if (doc.contains("manifest")) {
        const json& m = doc.at("manifest");
        cfg.parameters = m.value("parameters", json::object());
        if (m.contains("master_seed")) cfg.master_seed = m.at("master_seed").get<std::uint64_t>();
        if (m.contains("timestamp_utc")) cfg.timestamp = m.at("timestamp_utc").get<std::string>();
        if (m.contains("experiment")) cfg.experiment = m.at("experiment").get<std::string>();
    } else {
        cfg.parameters = doc;  // flat key -> value document mirroring the flags
        if (doc.contains("seed")) cfg.master_seed = doc.at("seed").get<std::uint64_t>();
    }
    return cfg;
}

template <typename T>
T merge_param(const std::optional<T>& cli_value, const ConfigFile& cfg, const std::string& key,
              std::optional<T> fallback) {
    if (cli_value) return *cli_value;
    if (cfg.parameters.contains(key)) {
        try {
            return cfg.parameters.at(key).get<T>();
        } catch (const json::exception& e) {
            throw clab::UsageError("config key '" + key + "' has the wrong type: " + e.what());
        }
    }
    if (fallback) return *fallback;
    throw clab::UsageError("missing required parameter --" + key);
}

bool merge_flag(bool cli_given, bool cli_value, const ConfigFile& cfg, const std::string& key,
                bool fallback) {
    if (cli_given) return cli_value;
    if (cfg.parameters.contains(key)) {
        try {
            return cfg.parameters.at(key).get<bool>();
        } catch (const json::exception& e) {
            throw clab::UsageError("config key '" + key + "' has the wrong type: " + e.what());
        }
    }
    return fallback;
}

unsigned worker_count() {
    if (const char* env = std::getenv("COLLAPSE_LAB_THREADS")) {
        char* end = nullptr;
        const unsigned long n = std::strtoul(env, &end, 10);
        if (end == env || *end != '\0' || n < 1 || n > 4096)
            throw clab::UsageError("COLLAPSE_LAB_THREADS must be an integer in [1, 4096]");
        return static_cast<unsigned>(n);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Options shared by every subcommand.
struct CommonOpts {
    std::optional<std::uint64_t> trials;
    std::optional<double> delta;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::string> config_path;
    bool same_s = false;
    bool same_s_given = false;

    ConfigFile cfg;

    void add_to(CLI::App& cmd, bool wants_delta = true) {
        cmd.add_option("--trials", trials, "number of Monte Carlo trials");
        if (wants_delta) cmd.add_option("--delta", delta, "squared-amplitude step per interaction");
        cmd.add_option("--seed", seed, "64-bit master seed");
        cmd.add_option("--out", out, "write one record per trial to this file");
        cmd.add_option("--format", format, "record format: jsonl (default) or csv");
        cmd.add_option("--config", config_path, "JSON config or manifest; flags override its keys");
        cmd.add_flag("--same-s", [this](std::int64_t) { same_s = same_s_given = true; },
                     "sequence all interactions at one s value (suppresses every amplitude shift)");
    }

    void resolve(const std::string& experiment) {
        if (config_path) {
            cfg = load_config(*config_path);
            if (cfg.experiment && *cfg.experiment != experiment)
                throw clab::UsageError("config manifest is for experiment '" + *cfg.experiment +
                                       "', not '" + experiment + "'");
        }
    }

    std::uint64_t seed_value() const {
        if (seed) return *seed;
        if (cfg.parameters.contains("seed")) return cfg.parameters.at("seed").get<std::uint64_t>();
        if (cfg.master_seed) return *cfg.master_seed;
        return kDefaultSeed;
    }

    std::string timestamp() const { return cfg.timestamp ? *cfg.timestamp : clab::utc_timestamp_now(); }
};

void emit(const clab::RunManifest& manifest, const json& report,
          const std::vector<clab::TrialRecordLine>& records, const CommonOpts& opts) {
    const json summary = clab::make_summary(manifest, report);
    std::cout << summary.dump(2) << '\n';
    if (opts.out) {
        const clab::RecordFormat format =
            clab::parse_record_format(opts.format ? *opts.format
                                                  : merge_param<std::string>(std::nullopt, opts.cfg,
                                                                             "format", std::string("jsonl")));
        clab::write_results(manifest, report, records, *opts.out, format);
    }
}

clab::RunManifest base_manifest(const std::string& experiment, const CommonOpts& opts) {
    clab::RunManifest m;
    m.experiment = experiment;
    m.master_seed = opts.seed_value();
    m.tool_version = clab::kToolVersion;
    m.timestamp_utc = opts.timestamp();
    return m;
}

int run_bell_parity_cmd(const CommonOpts& opts, const std::optional<std::int64_t>& n_flag) {
    const auto n = merge_param<std::int64_t>(n_flag, opts.cfg, "n", std::nullopt);
    const auto trials = merge_param(opts.trials, opts.cfg, "trials", std::optional(kDefaultTrials));
    const auto delta = merge_param(opts.delta, opts.cfg, "delta", std::optional(kDefaultDelta));
    const bool same_s = merge_flag(opts.same_s_given, opts.same_s, opts.cfg, "same-s", false);

    clab::CollapseConfig config;
    config.delta_ave = delta;
    config.master_seed = opts.seed_value();
    config.sequencing_mode = same_s ? clab::SequencingMode::FORCED_SAME_S : clab::SequencingMode::DISTINCT_S;

    std::vector<clab::BellTrial> trial_records;
    const clab::BellParityReport report = clab::run_bell_parity(
        static_cast<int>(n), trials, config, worker_count(), opts.out ? &trial_records : nullptr);

    clab::RunManifest manifest = base_manifest("bell-parity", opts);
    manifest.parameters["n"] = n;
    manifest.parameters["trials"] = trials;
    manifest.parameters["delta"] = delta;
    manifest.parameters["same-s"] = same_s;

    emit(manifest, clab::report_to_json(report),
         clab::to_record_lines(trial_records, static_cast<int>(n) + 1), opts);
    return 0;
}

int run_epr_cmd(const CommonOpts& opts, const std::optional<std::int64_t>& n_flag, bool measure_a_given,
                bool measure_a) {
    const auto chain = merge_param<std::int64_t>(n_flag, opts.cfg, "n",
                                                 std::optional<std::int64_t>(clab::kDefaultEprChainLength));
    if (chain < 0) throw clab::DomainError("chain length must be nonnegative");
    const auto trials = merge_param(opts.trials, opts.cfg, "trials", std::optional(kDefaultTrials));
    const auto delta = merge_param(opts.delta, opts.cfg, "delta", std::optional(kDefaultDelta));
    const bool same_s = merge_flag(opts.same_s_given, opts.same_s, opts.cfg, "same-s", false);
    const bool measure = merge_flag(measure_a_given, measure_a, opts.cfg, "measure-a", true);

    clab::CollapseConfig config;
    config.delta_ave = delta;
    config.master_seed = opts.seed_value();
    config.sequencing_mode = same_s ? clab::SequencingMode::FORCED_SAME_S : clab::SequencingMode::DISTINCT_S;

    std::vector<clab::EprTrial> trial_records;
    const clab::EprReport report =
        clab::run_epr_no_signaling(trials, config, measure, worker_count(),
                                   static_cast<std::uint64_t>(chain), opts.out ? &trial_records : nullptr);

    clab::RunManifest manifest = base_manifest("epr", opts);
    manifest.parameters["n"] = chain;
    manifest.parameters["trials"] = trials;
    manifest.parameters["delta"] = delta;
    manifest.parameters["measure-a"] = measure;
    manifest.parameters["same-s"] = same_s;

    emit(manifest, clab::report_to_json(report), clab::to_record_lines(trial_records), opts);
    return 0;
}

int run_emzi_cmd(const CommonOpts& opts, const std::optional<double>& r_flag) {
    const auto r_branch = merge_param<double>(r_flag, opts.cfg, "r-branch", std::nullopt);
    const auto trials = merge_param(opts.trials, opts.cfg, "trials", std::optional(kDefaultTrials));
    const auto delta = merge_param(opts.delta, opts.cfg, "delta", std::optional(kDefaultDelta));
    const bool same_s = merge_flag(opts.same_s_given, opts.same_s, opts.cfg, "same-s", false);

    clab::CollapseConfig config;
    config.delta_ave = delta;
    config.master_seed = opts.seed_value();
    config.sequencing_mode = same_s ? clab::SequencingMode::FORCED_SAME_S : clab::SequencingMode::DISTINCT_S;

    std::vector<clab::EmziTrial> trial_records;
    const clab::EmziReport report = clab::run_emzi_mc(r_branch, delta, trials, config, worker_count(),
                                                      opts.out ? &trial_records : nullptr);

    clab::RunManifest manifest = base_manifest("emzi", opts);
    manifest.parameters["r-branch"] = r_branch;
    manifest.parameters["delta"] = delta;
    manifest.parameters["trials"] = trials;
    manifest.parameters["same-s"] = same_s;

    emit(manifest, clab::report_to_json(report), clab::to_record_lines(trial_records), opts);
    return 0;
}

int run_emzi_analytic_cmd(const CommonOpts& opts, const std::optional<double>& r_flag) {
    const auto r_branch = merge_param<double>(r_flag, opts.cfg, "r-branch", std::nullopt);
    const double cross = clab::emzi_analytic_cross_fraction(r_branch);

    clab::RunManifest manifest = base_manifest("emzi-analytic", opts);
    manifest.parameters["r-branch"] = r_branch;

    json report = json::object();
    report["r_branch"] = r_branch;
    report["cross_fraction"] = cross;
    report["alt_cross_fraction"] = cross * r_branch;  // denominator 4 instead of 4r
    emit(manifest, report, {}, opts);
    return 0;
}

int run_walk_cmd(const CommonOpts& opts, const std::optional<double>& p0_flag,
                 const std::optional<std::uint64_t>& max_steps_flag) {
    const auto p0 = merge_param<double>(p0_flag, opts.cfg, "p0", std::nullopt);
    const auto trials = merge_param(opts.trials, opts.cfg, "trials", std::optional(kDefaultTrials));
    const auto delta = merge_param(opts.delta, opts.cfg, "delta", std::optional(kDefaultDelta));
    const auto max_steps =
        merge_param(max_steps_flag, opts.cfg, "max-steps", std::optional(clab::kDefaultWalkStepBudget));

    clab::CollapseConfig config;
    config.delta_ave = delta;
    config.master_seed = opts.seed_value();

    std::vector<clab::WalkTrial> trial_records;
    const clab::WalkReport report = clab::run_walk_ensemble(p0, trials, config, worker_count(), max_steps,
                                                            opts.out ? &trial_records : nullptr);

    clab::RunManifest manifest = base_manifest("walk", opts);
    manifest.parameters["p0"] = p0;
    manifest.parameters["delta"] = delta;
    manifest.parameters["trials"] = trials;
    manifest.parameters["max-steps"] = max_steps;

    emit(manifest, clab::report_to_json(report), clab::to_record_lines(trial_records), opts);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"collapse-lab: Monte Carlo experiments for an amplitude-transfer collapse model"};
    app.set_version_flag("--version", clab::kToolVersion);
    app.require_subcommand(1);

    CommonOpts bell_opts, epr_opts, emzi_opts, analytic_opts, walk_opts;
    std::optional<std::int64_t> bell_n, epr_n;
    std::optional<double> emzi_r, analytic_r, walk_p0;
    std::optional<std::uint64_t> walk_max_steps;
    bool epr_measure_a = true;

    CLI::App* bell = app.add_subcommand("bell-parity", "N-detector parity experiment");
    bell->add_option("--n", bell_n, "number of detector particles");
    bell_opts.add_to(*bell);

    CLI::App* epr = app.add_subcommand("epr", "singlet no-signaling check");
    epr->add_option("--n", epr_n, "a-side interaction chain length");
    CLI::Option* measure_opt =
        epr->add_flag("--measure-a,!--no-measure-a", epr_measure_a, "run the a-side interaction chain");
    epr_opts.add_to(*epr);

    CLI::App* emzi = app.add_subcommand("emzi", "coupled-eraser collapse signal");
    emzi->add_option("--r-branch", emzi_r, "interacting-branch mass in units of delta (>= 1)");
    emzi_opts.add_to(*emzi);

    CLI::App* analytic = app.add_subcommand("emzi-analytic", "closed-form eraser cross fraction");
    analytic->add_option("--r-branch", analytic_r, "interacting-branch mass in units of delta (>= 1)");
    analytic_opts.add_to(*analytic, /*wants_delta=*/false);

    CLI::App* walk = app.add_subcommand("walk", "absorbing mass walk ensemble");
    walk->add_option("--p0", walk_p0, "initial interacting-branch mass in (0, 1)");
    walk->add_option("--max-steps", walk_max_steps, "per-walk step budget");
    walk_opts.add_to(*walk);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (bell->parsed()) {
            bell_opts.resolve("bell-parity");
            return run_bell_parity_cmd(bell_opts, bell_n);
        }
        if (epr->parsed()) {
            epr_opts.resolve("epr");
            return run_epr_cmd(epr_opts, epr_n, measure_opt->count() > 0, epr_measure_a);
        }
        if (emzi->parsed()) {
            emzi_opts.resolve("emzi");
            return run_emzi_cmd(emzi_opts, emzi_r);
        }
        if (analytic->parsed()) {
            analytic_opts.resolve("emzi-analytic");
            return run_emzi_analytic_cmd(analytic_opts, analytic_r);
        }
        if (walk->parsed()) {
            walk_opts.resolve("walk");
            return run_walk_cmd(walk_opts, walk_p0, walk_max_steps);
        }
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const clab::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const clab::DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 3;
    } catch (const clab::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
