#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "pem/report.hpp"
#include "pem/rng.hpp"
#include "pem/runner.hpp"
#include "pem/scenario.hpp"
#include "pem/snapshot.hpp"

using namespace pem;

namespace {

Embedding random_unit(Rng& rng, int dim) {
    std::vector<float> v(static_cast<std::size_t>(dim));
    for (float& x : v) x = static_cast<float>(rng.next_gaussian());
    return Embedding::from_unnormalized(std::move(v));
}

EpisodicMemory populated_memory(MemoryVariant v, std::uint64_t seed) {
    MemoryConfig cfg;
    cfg.variant = v;
    cfg.capacity = 120;
    cfg.update_frequency = 7;
    EpisodicMemory m(cfg);
    Rng rng(seed);
    for (std::int64_t t = 0; t < 300; ++t) {
        ExperienceFrame f;
        f.time = t;
        f.pose.x = static_cast<double>(rng.next_below(40)) - 20.0;
        f.pose.y = static_cast<double>(rng.next_below(40)) - 20.0;
        f.pose.yaw = 45.0 * static_cast<double>(rng.next_below(8)) - 180.0;
        f.pose.pitch = rng.next_double() * 10.0;
        f.embedding = random_unit(rng, 12);
        m.write(std::move(f));
    }
    return m;
}

ScenarioSpec quick_scenario() {
    ScenarioSpec spec = default_scenario(ScenarioKind::memory_task_water);
    spec.oracle.dimension = 16;
    spec.budget = 3300;
    return spec;
}

}  // namespace

TEST_CASE("snapshots round-trip byte-identically for every variant") {
    for (MemoryVariant v : {MemoryVariant::fifo, MemoryVariant::place, MemoryVariant::event,
                            MemoryVariant::place_event}) {
        CAPTURE(to_string(v));
        const EpisodicMemory m = populated_memory(v, 1 + static_cast<std::uint64_t>(v));
        const std::string snap = save_snapshot(m);
        EpisodicMemory loaded = load_snapshot(snap);
        CHECK(save_snapshot(loaded) == snap);
        CHECK(loaded.frame_count() == m.frame_count());
        CHECK(loaded.cluster_count() == m.cluster_count());
        CHECK(loaded.eviction_count() == m.eviction_count());
    }
}

TEST_CASE("a loaded memory keeps working like the original") {
    EpisodicMemory m = populated_memory(MemoryVariant::place_event, 5);
    EpisodicMemory loaded = load_snapshot(save_snapshot(m));
    Rng rng(9);
    const Embedding q = random_unit(rng, 12);
    const ReadResult a = m.read(q);
    const ReadResult b = loaded.read(q);
    REQUIRE(a.candidates.size() == b.candidates.size());
    for (std::size_t i = 0; i < a.candidates.size(); ++i) {
        CHECK(a.candidates[i].time == b.candidates[i].time);
        CHECK(a.candidates[i].score == b.candidates[i].score);
    }
    // Writes continue from the stored clock.
    ExperienceFrame f;
    f.time = loaded.last_time() + 1;
    f.embedding = random_unit(rng, 12);
    CHECK_NOTHROW(loaded.write(std::move(f)));
}

TEST_CASE("snapshot corruption is rejected") {
    const EpisodicMemory m = populated_memory(MemoryVariant::place_event, 6);
    std::string snap = save_snapshot(m);
    CHECK_THROWS_AS(load_snapshot("not json"), std::runtime_error);
    // Flip a digit inside a center digest.
    const auto pos = snap.find("\"center_digest\":\"");
    REQUIRE(pos != std::string::npos);
    snap[pos + 18] = snap[pos + 18] == 'a' ? 'b' : 'a';
    CHECK_THROWS_AS(load_snapshot(snap), std::runtime_error);
}

TEST_CASE("scenario config parsing is strict about keys") {
    CHECK_THROWS_WITH_AS(scenario_from_json_text(R"({"scenario":"aba_sparse","typo":1})"),
                         doctest::Contains("$.typo"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        scenario_from_json_text(R"({"scenario":"aba_sparse","memory":{"cap":5}})"),
        doctest::Contains("$.memory.cap"), std::invalid_argument);
    CHECK_THROWS_AS(scenario_from_json_text(R"({"budget":100})"), std::invalid_argument);
    CHECK_THROWS_AS(scenario_from_json_text(R"({"scenario":"nope"})"), std::invalid_argument);
}

TEST_CASE("scenario config round-trips through json") {
    ScenarioSpec spec = default_scenario(ScenarioKind::aba_sparse);
    spec.task_a = "wool";
    spec.task_b = "dirt";
    spec.memory.variant = MemoryVariant::event;
    spec.seed = 99;
    const std::string text = scenario_to_json_text(spec);
    const ScenarioSpec back = scenario_from_json_text(text);
    CHECK(back.kind == spec.kind);
    CHECK(back.task_a == "wool");
    CHECK(back.memory.variant == MemoryVariant::event);
    CHECK(back.seed == 99);
    CHECK(scenario_to_json_text(back) == text);
}

TEST_CASE("reference defaults are wired into the config") {
    const ScenarioSpec s = default_scenario(ScenarioKind::memory_task_water);
    CHECK(s.memory.place_size == 6.0);
    CHECK(s.memory.yaw_window == 60.0);
    CHECK(s.memory.update_frequency == 100);
    CHECK(s.memory.top_k == 30);
    CHECK(s.memory.merge_score == 73.5);
    CHECK(s.memory.task_threshold == 22.74);
    CHECK(s.memory.capacity == 2000);
    CHECK(s.agent.mode_timeout == 600);
    CHECK(s.explore.map_side == 120);
    CHECK(s.explore.super_cell == 15);
    CHECK(default_scenario(ScenarioKind::long_instruction).explore.map_side == 240);
    CHECK(default_scenario(ScenarioKind::long_instruction).explore.super_cell == 30);
    CHECK(default_scenario(ScenarioKind::long_instruction).memory.capacity == 20000);
    CHECK(default_scenario(ScenarioKind::long_instruction).budget == 500000);
    CHECK(s.memory.dp_penalty() == doctest::Approx(0.265));
}

TEST_CASE("episode report lines round-trip and check out") {
    const ScenarioSpec spec = quick_scenario();
    const EpisodeResult r = run_episode(spec, 3);

    const std::string line = episode_to_line(r, spec.budget);
    std::int64_t budget = 0;
    const EpisodeResult back = episode_from_line(line, &budget);
    CHECK(budget == spec.budget);
    CHECK(back.seed == r.seed);
    CHECK(back.tasks.size() == r.tasks.size());
    CHECK(episode_to_line(back, budget) == line);

    std::vector<std::string> lines = {line, aggregate_to_line({r})};
    CHECK(check_report_lines(lines).ok);

    // Unknown key in an episode line is rejected.
    std::string bad = line;
    bad.insert(bad.size() - 1, ",\"bogus\":1");
    CHECK(!check_report_lines({bad}).ok);

    // An aggregate that does not match its episodes is rejected.
    std::vector<std::string> wrong = {line, aggregate_to_line({})};
    CHECK(!check_report_lines(wrong).ok);

    const std::string table = table_from_lines(lines);
    CHECK(table.find("scenario\tseed") == 0);
    CHECK(table.find(to_string(spec.kind)) != std::string::npos);
}

TEST_CASE("episodes replay bit-identically from their logs") {
    const ScenarioSpec spec = quick_scenario();
    std::vector<std::string> log;
    run_episode(spec, 11, &log);
    REQUIRE(log.size() > 3);

    const ReplayVerdict ok = replay_verify(log);
    CHECK(ok.ok);

    // Corrupting any line pins the divergence to that index.
    std::vector<std::string> corrupted = log;
    corrupted[100][corrupted[100].size() - 2] ^= 1;
    const ReplayVerdict bad = replay_verify(corrupted);
    CHECK(!bad.ok);
    CHECK(bad.divergence_line == 100);
}

TEST_CASE("identical seeds produce byte-identical report lines") {
    const ScenarioSpec spec = quick_scenario();
    const EpisodeResult a = run_episode(spec, 21);
    const EpisodeResult b = run_episode(spec, 21);
    CHECK(episode_to_line(a, spec.budget) == episode_to_line(b, spec.budget));
    const EpisodeResult c = run_episode(spec, 22);
    CHECK(episode_to_line(a, spec.budget) != episode_to_line(c, spec.budget));
}
