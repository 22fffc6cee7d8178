// Run manifests and persistent result records. A manifest captures everything
// a run needs to be replayed bit-for-bit; replaying one reproduces identical
// summaries and record streams regardless of worker count.

#ifndef COLLAPSE_LAB_IO_HPP
#define COLLAPSE_LAB_IO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "collapse_lab/experiments.hpp"
#include "collapse_lab/state.hpp"

namespace clab {

using json = nlohmann::ordered_json;

enum class RecordFormat : std::uint8_t { JSONL, CSV };

RecordFormat parse_record_format(const std::string& name);  // "jsonl" | "csv"

struct RunManifest {
    std::string experiment;  // bell-parity | epr | emzi | emzi-analytic | walk
    json parameters = json::object();  // keys mirror the CLI flags
    std::uint64_t master_seed = 0;
    std::string tool_version;
    std::string timestamp_utc;

    json to_json() const;
    static RunManifest from_json(const json& j);
};

struct TrialRecordLine {
    std::uint64_t trial_index = 0;
    std::string outcome;  // bitstring (particle 0 first) or channel label
    std::optional<ParityClass> parity;
    std::optional<int> q;
    std::optional<std::uint64_t> steps_to_absorption;
    std::uint64_t s_history_length = 0;

    json to_json() const;
    std::string to_csv_row() const;
    static const char* csv_header();
};

std::string utc_timestamp_now();

// Record-line builders for each experiment's trial records.
std::vector<TrialRecordLine> to_record_lines(const std::vector<BellTrial>& trials, int n_particles);
std::vector<TrialRecordLine> to_record_lines(const std::vector<EprTrial>& trials);
std::vector<TrialRecordLine> to_record_lines(const std::vector<EmziTrial>& trials);
std::vector<TrialRecordLine> to_record_lines(const std::vector<WalkTrial>& trials);

// Report serializers used by the summary document.
json report_to_json(const BellParityReport& report);
json report_to_json(const EprReport& report);
json report_to_json(const EmziReport& report);
json report_to_json(const WalkReport& report);

json make_summary(const RunManifest& manifest, const json& report);

// Writes one record per line to out_path and the summary document next to it
// (out_path with a ".summary.json" extension). Throws IoError on failure.
// Returns the summary path.
std::filesystem::path write_results(const RunManifest& manifest, const json& report,
                                    const std::vector<TrialRecordLine>& records,
                                    const std::filesystem::path& out_path, RecordFormat format);

std::string render_records(const std::vector<TrialRecordLine>& records, RecordFormat format);

}  // namespace clab

#endif
