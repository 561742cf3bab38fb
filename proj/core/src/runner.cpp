#include "pem/runner.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "pem/navigation.hpp"

namespace pem {

using nlohmann::json;

int EpisodeResult::successes() const {
    int n = 0;
    for (const auto& t : tasks) n += t.success ? 1 : 0;
    return n;
}

double EpisodeResult::success_rate() const {
    return tasks.empty() ? 0.0 : static_cast<double>(successes()) / tasks.size();
}

TourDriver::TourDriver(std::vector<TourStop> stops) : stops_(std::move(stops)) {}

Action TourDriver::next(const World& world) {
    if (stop_ >= stops_.size()) return Action::noop_action();
    const TourStop& stop = stops_[stop_];
    const Cell pos{static_cast<int>(std::llround(world.agent().x)),
                   static_cast<int>(std::llround(world.agent().y))};

    if (!dwelling_) {
        if (pos == stop.waypoint) {
            dwelling_ = true;
            turned_ = false;
            dwell_left_ = stop.dwell;
            arrivals_.push_back(world.clock());
            path_valid_ = false;
        } else {
            if (!path_valid_) {
                PlanResult p = plan_toward(world.terrain(), pos, stop.waypoint);
                path_ = std::move(p.path);
                path_index_ = 1;
                path_valid_ = true;
            }
            if (path_index_ < path_.size() && path_[path_index_] == pos) ++path_index_;
            if (path_index_ >= path_.size()) {
                // Path exhausted short of the waypoint (unreachable);
                // treat here as arrived so the tour keeps moving.
                dwelling_ = true;
                turned_ = false;
                dwell_left_ = stop.dwell;
                arrivals_.push_back(world.clock());
                path_valid_ = false;
            } else {
                const Cell nxt = path_[path_index_];
                return Action::move(nxt.x - pos.x, nxt.y - pos.y);
            }
        }
    }

    if (dwell_left_ > 0) {
        --dwell_left_;
        if (!turned_) {
            turned_ = true;
            return Action::turn(stops_[stop_].yaw, 0.0);
        }
        return Action::noop_action();
    }
    ++stop_;
    dwelling_ = false;
    path_valid_ = false;
    return next(world);
}

namespace {

struct CapturedFrame {
    Pose pose;
    Embedding embedding;
};

json step_line(const World& world, const Agent::StepOutcome& out,
               const EpisodicMemory& memory) {
    json j;
    j["type"] = "step";
    j["t"] = world.clock();
    j["x"] = world.agent().x;
    j["y"] = world.agent().y;
    j["yaw"] = world.agent().yaw;
    j["pitch"] = world.agent().pitch;
    j["mode"] = mode_name(out.mode);
    j["action"] = action_name(out.action.kind);
    j["gain"] = out.events.item_gained;
    j["mem"] = memory.frame_count();
    j["clu"] = memory.cluster_count();
    return j;
}

TaskSpec make_resource_task(const std::string& kind, const EncoderOracle& oracle,
                            std::int64_t limit) {
    TaskSpec t;
    t.id = kind;
    t.image_goal = false;
    t.query_embedding = oracle.encode_task(kind, PromptRole::query);
    t.execute_embedding = oracle.encode_task(kind, PromptRole::execute);
    t.target_kind = kind;
    t.time_limit = limit;
    return t;
}

}  // namespace

EpisodeResult run_episode(const ScenarioSpec& spec, std::uint64_t episode_seed,
                          std::vector<std::string>* log_lines,
                          EpisodicMemory* final_memory) {
    spec.validate();

    EncoderOracle oracle(spec.oracle);
    register_world_kinds(oracle);

    WorldBlueprint bp = make_blueprint(spec, episode_seed);

    WorldOptions wopts;
    wopts.fov_radius = spec.explore.fov_radius;
    wopts.fov_half_angle = spec.explore.fov_half_angle;
    wopts.interact_radius = spec.agent.interact_radius;
    wopts.interact_steps = spec.agent.interact_steps;
    wopts.window = spec.oracle.window;

    // Scripts timed off tour arrivals need a dry run over a scratch
    // world to learn the actual arrival ticks.
    if (!bp.pending_scripts.empty()) {
        World scratch(bp.terrain, bp.entities, oracle, wopts);
        TourDriver driver(bp.tour);
        while (scratch.clock() < bp.tour_length) scratch.step(driver.next(scratch));
        const auto& arrivals = driver.arrival_ticks();
        for (const auto& ps : bp.pending_scripts) {
            if (ps.stop >= arrivals.size())
                throw std::runtime_error("scenario: tour never reached a scripted stop");
            bp.entities[ps.entity].script[ps.phase].t_start = arrivals[ps.stop] + ps.offset;
        }
    }

    World world(bp.terrain, bp.entities, oracle, wopts);
    EpisodicMemory memory(spec.memory);
    VisitationMap map(spec.explore);
    WindowEncoder encoder(oracle);
    Agent agent(spec, world, memory, map, encoder, episode_seed);

    EpisodeResult result;
    result.scenario = to_string(spec.kind);
    result.seed = episode_seed;

    if (log_lines) {
        json header;
        header["type"] = "header";
        header["schema"] = "pem-log-v1";
        header["episode_seed"] = episode_seed;
        header["scenario"] = json::parse(scenario_to_json_text(spec));
        log_lines->push_back(header.dump());
    }

    std::vector<std::pair<double, double>> trajectory;
    trajectory.reserve(static_cast<std::size_t>(std::min<std::int64_t>(spec.budget, 1 << 20)));

    auto record = [&](const Agent::StepOutcome& out) {
        trajectory.emplace_back(world.agent().x, world.agent().y);
        if (log_lines) log_lines->push_back(step_line(world, out, memory).dump());
    };

    // Scripted exploration phase.
    std::vector<CapturedFrame> captured;
    std::vector<std::int64_t> arrivals;
    if (!bp.tour.empty()) {
        captured.reserve(static_cast<std::size_t>(bp.tour_length));
        TourDriver driver(bp.tour);
        agent.set_capture(true);
        while (world.clock() < bp.tour_length) {
            const Action a = driver.next(world);
            auto out = agent.step_scripted(a);
            captured.push_back({out.frame.pose, std::move(out.frame.embedding)});
            record(out);
        }
        agent.set_capture(false);
        arrivals = driver.arrival_ticks();
    }

    // Task phase.
    Rng goal_rng(fnv1a_value(episode_seed, 0x676f616cULL));
    TaskStream stream(spec, episode_seed);
    if (spec.kind == ScenarioKind::exploration_only) {
        while (world.clock() < spec.budget) record(agent.step());
    } else {
        while (world.clock() < spec.budget) {
            auto req = stream.next(world.clock());
            if (!req) break;

            TaskResult tr;
            tr.id = req->kind;
            tr.start_clock = world.clock();
            const std::int64_t limit =
                std::min<std::int64_t>(req->time_limit, spec.budget - world.clock());

            TaskSpec task;
            int inventory_before = 0;
            if (req->kind.rfind("goal:", 0) == 0) {
                const int landmark = std::stoi(req->kind.substr(5));
                std::int64_t tick = 0;
                if (!bp.goal_frame_ticks.empty()) {
                    tick = bp.goal_frame_ticks[static_cast<std::size_t>(landmark) %
                                               bp.goal_frame_ticks.size()];
                } else {
                    if (static_cast<std::size_t>(landmark) >= arrivals.size())
                        throw std::runtime_error("scenario: missing tour arrival for goal");
                    const std::int64_t lo = arrivals[static_cast<std::size_t>(landmark)];
                    tick = lo + static_cast<std::int64_t>(goal_rng.next_below(500));
                }
                if (tick >= static_cast<std::int64_t>(captured.size()))
                    throw std::runtime_error("scenario: goal tick outside captured phase");
                task.id = req->kind;
                task.image_goal = true;
                task.query_embedding = captured[static_cast<std::size_t>(tick)].embedding;
                task.goal_pose = captured[static_cast<std::size_t>(tick)].pose;
                task.time_limit = limit;
                tr.goal_tick = tick;
                tr.goal_retained_at_issue = memory.has_frame_at(tick);
            } else {
                task = make_resource_task(req->kind, oracle, limit);
                inventory_before = world.inventory_count(target_for(req->kind).item);
            }

            agent.begin_task(task);
            bool success = false;
            const std::int64_t t0 = world.clock();
            while (world.clock() - t0 < limit) {
                record(agent.step());
                if (task.image_goal) {
                    if (distance2d(world.agent(), task.goal_pose) <= kSuccessRadius) {
                        success = true;
                        break;
                    }
                } else if (world.inventory_count(target_for(task.id).item) >
                           inventory_before) {
                    success = true;
                    break;
                }
            }
            agent.clear_task();
            tr.success = success;
            tr.duration = world.clock() - t0;
            result.tasks.push_back(std::move(tr));
        }
    }

    result.steps = world.clock();
    if (!trajectory.empty()) {
        const CoverageStats cov = coverage_and_revisits(
            trajectory, world.terrain().min_coord(), world.terrain().min_coord(),
            world.terrain().side());
        result.coverage = cov.coverage_percent;
        result.revisit = cov.revisit_count;
    }
    result.memory_frames = memory.frame_count();
    result.memory_clusters = memory.cluster_count();
    result.memory_buffered = memory.buffered_count();
    result.memory_evictions = memory.eviction_count();
    result.reads = agent.reads();
    result.clusters_scored = agent.total_query_cost().clusters_scored;
    result.frames_scored = agent.total_query_cost().frames_scored;
    result.query_wall_ms = agent.query_wall_ms();
    result.inventory = world.inventory();

    if (log_lines) {
        json end;
        end["type"] = "end";
        end["clock"] = world.clock();
        end["inventory"] = world.inventory();
        json tasks = json::array();
        for (const auto& t : result.tasks)
            tasks.push_back({{"id", t.id}, {"success", t.success}, {"duration", t.duration}});
        end["tasks"] = std::move(tasks);
        log_lines->push_back(end.dump());
    }
    if (final_memory) *final_memory = memory;
    return result;
}

std::vector<EpisodeResult> run_episodes(const ScenarioSpec& spec, std::uint64_t seed_base,
                                        int episodes, int jobs) {
    if (episodes < 1) return {};
    jobs = std::max(1, std::min(jobs, episodes));
    std::vector<EpisodeResult> results(static_cast<std::size_t>(episodes));
    std::atomic<int> cursor{0};
    auto worker = [&] {
        for (;;) {
            const int i = cursor.fetch_add(1);
            if (i >= episodes) return;
            results[static_cast<std::size_t>(i)] =
                run_episode(spec, seed_base + static_cast<std::uint64_t>(i));
        }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return results;
}

ReplayVerdict replay_verify(const std::vector<std::string>& log_lines) {
    ReplayVerdict v;
    if (log_lines.empty()) {
        v.message = "empty log";
        return v;
    }
    ScenarioSpec spec;
    std::uint64_t seed = 0;
    try {
        const json header = json::parse(log_lines[0]);
        if (header.at("type").get<std::string>() != "header" ||
            header.at("schema").get<std::string>() != "pem-log-v1") {
            v.message = "not a trajectory log header";
            return v;
        }
        seed = header.at("episode_seed").get<std::uint64_t>();
        spec = scenario_from_json_text(header.at("scenario").dump());
    } catch (const std::exception& e) {
        v.message = std::string("bad header: ") + e.what();
        return v;
    }

    std::vector<std::string> replayed;
    run_episode(spec, seed, &replayed);

    const std::size_t n = std::min(log_lines.size(), replayed.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (log_lines[i] != replayed[i]) {
            v.divergence_line = i;
            v.message = "mismatch at line " + std::to_string(i);
            return v;
        }
    }
    if (log_lines.size() != replayed.size()) {
        v.divergence_line = n;
        v.message = "log length mismatch";
        return v;
    }
    v.ok = true;
    v.message = "ok";
    return v;
}

}  // namespace pem
