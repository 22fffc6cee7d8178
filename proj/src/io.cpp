#include "collapse_lab/io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "collapse_lab/version.hpp"

namespace clab {

RecordFormat parse_record_format(const std::string& name) {
    if (name == "jsonl") return RecordFormat::JSONL;
    if (name == "csv") return RecordFormat::CSV;
    throw UsageError("unknown record format '" + name + "' (expected jsonl or csv)");
}

json RunManifest::to_json() const {
    json j = json::object();
    j["experiment"] = experiment;
    j["parameters"] = parameters;
    j["master_seed"] = master_seed;
    j["tool_version"] = tool_version;
    j["timestamp_utc"] = timestamp_utc;
    return j;
}

RunManifest RunManifest::from_json(const json& j) {
    RunManifest m;
    m.experiment = j.at("experiment").get<std::string>();
    m.parameters = j.value("parameters", json::object());
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.tool_version = j.value("tool_version", std::string(kToolVersion));
    m.timestamp_utc = j.value("timestamp_utc", std::string());
    return m;
}

json TrialRecordLine::to_json() const {
    json j = json::object();
    j["trial_index"] = trial_index;
    j["outcome"] = outcome;
    j["parity"] = parity ? json(to_string(*parity)) : json(nullptr);
    j["q"] = q ? json(*q) : json(nullptr);
    j["steps_to_absorption"] = steps_to_absorption ? json(*steps_to_absorption) : json(nullptr);
    j["s_history_length"] = s_history_length;
    return j;
}

const char* TrialRecordLine::csv_header() {
    return "trial_index,outcome,parity,q,steps_to_absorption,s_history_length";
}

std::string TrialRecordLine::to_csv_row() const {
    std::ostringstream row;
    row << trial_index << ',' << outcome << ',';
    if (parity) row << to_string(*parity);
    row << ',';
    if (q) row << *q;
    row << ',';
    if (steps_to_absorption) row << *steps_to_absorption;
    row << ',' << s_history_length;
    return row.str();
}

std::string utc_timestamp_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::vector<TrialRecordLine> to_record_lines(const std::vector<BellTrial>& trials, int n_particles) {
    std::vector<TrialRecordLine> lines;
    lines.reserve(trials.size());
    for (const BellTrial& t : trials) {
        TrialRecordLine line;
        line.trial_index = t.trial_index;
        std::string bits(static_cast<std::size_t>(n_particles), '0');
        for (int p = 0; p < n_particles; ++p)
            if (PureState::bit_is_down(t.outcome, p)) bits[static_cast<std::size_t>(p)] = '1';
        line.outcome = std::move(bits);
        line.parity = t.parity;
        line.q = t.q;
        if (t.steps_to_absorption) line.steps_to_absorption = *t.steps_to_absorption;
        line.s_history_length = t.s_count;
        lines.push_back(std::move(line));
    }
    return lines;
}

std::vector<TrialRecordLine> to_record_lines(const std::vector<EprTrial>& trials) {
    std::vector<TrialRecordLine> lines;
    lines.reserve(trials.size());
    for (const EprTrial& t : trials) {
        TrialRecordLine line;
        line.trial_index = t.trial_index;
        line.outcome = {PureState::bit_is_down(t.outcome, 0) ? '1' : '0',
                        PureState::bit_is_down(t.outcome, 1) ? '1' : '0'};
        if (t.steps_to_absorption) line.steps_to_absorption = *t.steps_to_absorption;
        line.s_history_length = t.s_count;
        lines.push_back(std::move(line));
    }
    return lines;
}

std::vector<TrialRecordLine> to_record_lines(const std::vector<EmziTrial>& trials) {
    std::vector<TrialRecordLine> lines;
    lines.reserve(trials.size());
    for (const EmziTrial& t : trials) {
        TrialRecordLine line;
        line.trial_index = t.trial_index;
        line.outcome = to_string(t.channel);
        line.s_history_length = t.s_count;
        lines.push_back(std::move(line));
    }
    return lines;
}

std::vector<TrialRecordLine> to_record_lines(const std::vector<WalkTrial>& trials) {
    std::vector<TrialRecordLine> lines;
    lines.reserve(trials.size());
    for (const WalkTrial& t : trials) {
        TrialRecordLine line;
        line.trial_index = t.trial_index;
        line.outcome = to_string(t.absorbed_branch);
        line.steps_to_absorption = t.steps;
        line.s_history_length = t.steps;
        lines.push_back(std::move(line));
    }
    return lines;
}

json report_to_json(const BellParityReport& report) {
    json j = json::object();
    j["n_detectors"] = report.n_detectors;
    j["trials"] = report.trials;
    j["count_consistent"] = report.count_consistent;
    j["count_collapse_signature"] = report.count_collapse_signature;
    j["r_sup"] = report.r_sup;
    j["collapse_fraction"] = report.collapse_fraction;
    j["confidence_interval"] = {report.confidence_interval.first, report.confidence_interval.second};
    return j;
}

json report_to_json(const EprReport& report) {
    json j = json::object();
    j["trials"] = report.trials;
    j["measured_side_a"] = report.measured_side_a;
    j["chain_length"] = report.chain_length;
    j["count_b_up"] = report.count_b_up;
    j["count_b_down"] = report.count_b_down;
    j["count_anticorrelated"] = report.count_anticorrelated;
    const auto marginal = report.b_marginal();
    j["b_marginal"] = {marginal[0], marginal[1]};
    return j;
}

json report_to_json(const EmziReport& report) {
    json j = json::object();
    j["trials"] = report.trials;
    j["r_branch"] = report.r_branch;
    j["delta_ave"] = report.delta_ave;
    j["counts"] = {{"SS", report.channel_counts[0]},
                   {"AA", report.channel_counts[1]},
                   {"SA", report.channel_counts[2]},
                   {"AS", report.channel_counts[3]},
                   {"noninteracting", report.channel_counts[4]}};
    j["p_SS"] = report.p_SS;
    j["p_AA"] = report.p_AA;
    j["p_SA"] = report.p_SA;
    j["p_AS"] = report.p_AS;
    j["p_noninteracting"] = report.p_noninteracting;
    j["detection_probability"] = report.detection_probability;
    j["cross_fraction"] = report.cross_fraction;
    j["analytic_cross_fraction"] = report.analytic_cross_fraction;
    return j;
}

json report_to_json(const WalkReport& report) {
    json j = json::object();
    j["trials"] = report.trials;
    j["p0"] = report.p0;
    j["delta_ave"] = report.delta_ave;
    j["count_interacting"] = report.count_interacting;
    j["freq_interacting"] = report.freq_interacting;
    j["total_steps"] = report.total_steps;
    j["mean_steps"] = report.mean_steps;
    j["expected_steps"] = report.expected_steps;
    return j;
}

json make_summary(const RunManifest& manifest, const json& report) {
    json j = json::object();
    j["manifest"] = manifest.to_json();
    j["report"] = report;
    return j;
}

std::string render_records(const std::vector<TrialRecordLine>& records, RecordFormat format) {
    std::ostringstream out;
    if (format == RecordFormat::CSV) {
        out << TrialRecordLine::csv_header() << '\n';
        for (const TrialRecordLine& rec : records) out << rec.to_csv_row() << '\n';
    } else {
        for (const TrialRecordLine& rec : records) out << rec.to_json().dump() << '\n';
    }
    return out.str();
}

std::filesystem::path write_results(const RunManifest& manifest, const json& report,
                                    const std::vector<TrialRecordLine>& records,
                                    const std::filesystem::path& out_path, RecordFormat format) {
    {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw IoError("cannot open '" + out_path.string() + "' for writing");
        out << render_records(records, format);
        if (!out) throw IoError("write to '" + out_path.string() + "' failed");
    }
    std::filesystem::path summary_path = out_path;
    summary_path.replace_extension(".summary.json");
    {
        std::ofstream out(summary_path, std::ios::binary);
        if (!out) throw IoError("cannot open '" + summary_path.string() + "' for writing");
        out << make_summary(manifest, report).dump(2) << '\n';
        if (!out) throw IoError("write to '" + summary_path.string() + "' failed");
    }
    return summary_path;
}

}  // namespace clab
