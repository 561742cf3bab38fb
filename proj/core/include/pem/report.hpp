#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pem/runner.hpp"

namespace pem {

// Line-delimited report records: one "episode" line per run plus one
// trailing "aggregate" line recomputable from the episode lines.
std::string episode_to_line(const EpisodeResult& result, std::int64_t budget);
EpisodeResult episode_from_line(const std::string& line, std::int64_t* budget_out = nullptr);

std::string aggregate_to_line(const std::vector<EpisodeResult>& results);

struct ReportCheck {
    bool ok = true;
    std::string message = "ok";
};

// Strict validation of a report file: schema tags and keys (unknown keys
// rejected), invariant checks (success rate range, durations vs budget),
// and the aggregate line recomputed from the episode lines.
ReportCheck check_report_lines(const std::vector<std::string>& lines);

// Flat tab-separated export of the episode lines, for plotting.
std::string table_from_lines(const std::vector<std::string>& lines);

}  // namespace pem
