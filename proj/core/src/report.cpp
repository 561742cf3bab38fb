#include "pem/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pem {

using nlohmann::json;

namespace {

constexpr const char* kSchema = "pem-report-v1";

void require_keys(const json& j, const std::string& path,
                  std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw std::runtime_error("report: '" + path + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw std::runtime_error("report: unknown key '" + path + "." + key + "'");
    }
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

json aggregate_json(const std::vector<EpisodeResult>& results) {
    json a;
    a["type"] = "aggregate";
    a["schema"] = kSchema;
    a["scenario"] = results.empty() ? "" : results.front().scenario;
    a["episodes"] = results.size();

    std::int64_t tasks_total = 0, tasks_solved = 0;
    std::vector<double> coverage, revisit;
    std::size_t max_positions = 0;
    for (const auto& r : results) {
        tasks_total += static_cast<std::int64_t>(r.tasks.size());
        tasks_solved += r.successes();
        coverage.push_back(r.coverage);
        revisit.push_back(r.revisit);
        max_positions = std::max(max_positions, r.tasks.size());
    }
    a["tasks_total"] = tasks_total;
    a["tasks_solved"] = tasks_solved;
    a["success_rate"] =
        tasks_total == 0 ? 0.0 : static_cast<double>(tasks_solved) / tasks_total;
    a["mean_tasks_solved"] =
        results.empty() ? 0.0 : static_cast<double>(tasks_solved) / results.size();
    a["mean_coverage"] = mean_of(coverage);
    a["mean_revisit"] = mean_of(revisit);

    json mean_dur = json::array(), median_dur = json::array(), pos_rate = json::array();
    for (std::size_t p = 0; p < max_positions; ++p) {
        std::vector<double> durations;
        int n = 0, wins = 0;
        for (const auto& r : results) {
            if (p >= r.tasks.size()) continue;
            ++n;
            wins += r.tasks[p].success ? 1 : 0;
            durations.push_back(static_cast<double>(r.tasks[p].duration));
        }
        mean_dur.push_back(mean_of(durations));
        median_dur.push_back(median_of(durations));
        pos_rate.push_back(n == 0 ? 0.0 : static_cast<double>(wins) / n);
    }
    a["mean_duration_by_position"] = std::move(mean_dur);
    a["median_duration_by_position"] = std::move(median_dur);
    a["success_rate_by_position"] = std::move(pos_rate);
    return a;
}

}  // namespace

std::string episode_to_line(const EpisodeResult& r, std::int64_t budget) {
    json j;
    j["type"] = "episode";
    j["schema"] = kSchema;
    j["scenario"] = r.scenario;
    j["seed"] = r.seed;
    j["budget"] = budget;
    j["steps"] = r.steps;
    json tasks = json::array();
    for (const auto& t : r.tasks) {
        json tj;
        tj["id"] = t.id;
        tj["success"] = t.success;
        tj["duration"] = t.duration;
        tj["start"] = t.start_clock;
        if (t.goal_tick >= 0) {
            tj["goal_tick"] = t.goal_tick;
            tj["goal_retained"] = t.goal_retained_at_issue;
        }
        tasks.push_back(std::move(tj));
    }
    j["tasks"] = std::move(tasks);
    j["coverage"] = r.coverage;
    j["revisit"] = r.revisit;
    j["memory"] = {{"frames", r.memory_frames},
                   {"clusters", r.memory_clusters},
                   {"buffered", r.memory_buffered},
                   {"evictions", r.memory_evictions}};
    // Query wall time stays out of the line: report lines are
    // byte-identical per seed, and timing is not. The bench-query
    // artifact carries the wall-clock numbers.
    j["query"] = {{"reads", r.reads},
                  {"clusters_scored", r.clusters_scored},
                  {"frames_scored", r.frames_scored}};
    return j.dump();
}

EpisodeResult episode_from_line(const std::string& line, std::int64_t* budget_out) {
    json j = json::parse(line);
    require_keys(j, "$",
                 {"type", "schema", "scenario", "seed", "budget", "steps", "tasks", "coverage",
                  "revisit", "memory", "query"});
    if (j.at("type").get<std::string>() != "episode")
        throw std::runtime_error("report: not an episode line");
    if (j.at("schema").get<std::string>() != kSchema)
        throw std::runtime_error("report: unknown schema tag");

    EpisodeResult r;
    r.scenario = j.at("scenario").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.steps = j.at("steps").get<std::int64_t>();
    if (budget_out) *budget_out = j.at("budget").get<std::int64_t>();
    for (const auto& tj : j.at("tasks")) {
        require_keys(tj, "$.tasks[]",
                     {"id", "success", "duration", "start", "goal_tick", "goal_retained"});
        TaskResult t;
        t.id = tj.at("id").get<std::string>();
        t.success = tj.at("success").get<bool>();
        t.duration = tj.at("duration").get<std::int64_t>();
        t.start_clock = tj.at("start").get<std::int64_t>();
        if (tj.contains("goal_tick")) {
            t.goal_tick = tj.at("goal_tick").get<std::int64_t>();
            t.goal_retained_at_issue = tj.at("goal_retained").get<bool>();
        }
        r.tasks.push_back(std::move(t));
    }
    r.coverage = j.at("coverage").get<double>();
    r.revisit = j.at("revisit").get<double>();
    const json& m = j.at("memory");
    require_keys(m, "$.memory", {"frames", "clusters", "buffered", "evictions"});
    r.memory_frames = m.at("frames").get<std::int64_t>();
    r.memory_clusters = m.at("clusters").get<std::int64_t>();
    r.memory_buffered = m.at("buffered").get<std::int64_t>();
    r.memory_evictions = m.at("evictions").get<std::int64_t>();
    const json& q = j.at("query");
    require_keys(q, "$.query", {"reads", "clusters_scored", "frames_scored"});
    r.reads = q.at("reads").get<std::int64_t>();
    r.clusters_scored = q.at("clusters_scored").get<std::int64_t>();
    r.frames_scored = q.at("frames_scored").get<std::int64_t>();
    return r;
}

std::string aggregate_to_line(const std::vector<EpisodeResult>& results) {
    return aggregate_json(results).dump();
}

ReportCheck check_report_lines(const std::vector<std::string>& lines) {
    ReportCheck out;
    std::vector<EpisodeResult> episodes;
    json seen_aggregate;
    try {
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            const json j = json::parse(lines[i]);
            const std::string type = j.at("type").get<std::string>();
            if (type == "episode") {
                std::int64_t budget = 0;
                EpisodeResult r = episode_from_line(lines[i], &budget);
                if (r.steps > budget)
                    throw std::runtime_error("report: steps exceed budget at line " +
                                             std::to_string(i));
                for (const auto& t : r.tasks)
                    if (t.duration < 0 || t.duration > budget)
                        throw std::runtime_error("report: task duration out of range at line " +
                                                 std::to_string(i));
                episodes.push_back(std::move(r));
            } else if (type == "aggregate") {
                seen_aggregate = j;
            } else {
                throw std::runtime_error("report: unknown record type '" + type + "'");
            }
        }
        if (!seen_aggregate.is_null()) {
            const json expected = aggregate_json(episodes);
            if (expected != seen_aggregate)
                throw std::runtime_error("report: aggregate does not match episode lines");
            const double rate = seen_aggregate.at("success_rate").get<double>();
            if (rate < 0.0 || rate > 1.0)
                throw std::runtime_error("report: success rate out of [0, 1]");
        }
    } catch (const std::exception& e) {
        out.ok = false;
        out.message = e.what();
    }
    return out;
}

std::string table_from_lines(const std::vector<std::string>& lines) {
    std::ostringstream os;
    os << "scenario\tseed\tsteps\ttasks\tsolved\tsuccess_rate\tcoverage\trevisit"
          "\tframes\tclusters\tevictions\treads\tclusters_scored\tframes_scored\n";
    for (const auto& line : lines) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        if (j.at("type").get<std::string>() != "episode") continue;
        const EpisodeResult r = episode_from_line(line);
        os << r.scenario << '\t' << r.seed << '\t' << r.steps << '\t' << r.tasks.size() << '\t'
           << r.successes() << '\t' << r.success_rate() << '\t' << r.coverage << '\t'
           << r.revisit << '\t' << r.memory_frames << '\t' << r.memory_clusters << '\t'
           << r.memory_evictions << '\t' << r.reads << '\t' << r.clusters_scored << '\t'
           << r.frames_scored << '\n';
    }
    return os.str();
}

}  // namespace pem
