#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "pem/embedding.hpp"
#include "pem/rng.hpp"
#include "pem/world.hpp"

using namespace pem;

namespace {

constexpr double kMergeThreshold = 73.5;
constexpr double kTaskThreshold = 22.74;

EncoderOracle test_oracle(int dim = 64, double noise = 0.0) {
    OracleConfig cfg;
    cfg.seed = 7;
    cfg.dimension = dim;
    cfg.noise_angle = noise;
    EncoderOracle oracle(cfg);
    register_world_kinds(oracle);
    return oracle;
}

Embedding random_unit(Rng& rng, int dim) {
    std::vector<float> v(static_cast<std::size_t>(dim));
    for (float& x : v) x = static_cast<float>(rng.next_gaussian());
    return Embedding::from_unnormalized(std::move(v));
}

// A scene standing next to a water pond: several water tiles ahead on
// otherwise flat ground.
SceneDescriptor water_scene(const EncoderOracle& o) {
    SceneDescriptor d;
    const KindId water = o.kind_id("water");
    for (int dx = 2; dx <= 4; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
            d.entities.push_back({water, static_cast<std::int16_t>(dx),
                                  static_cast<std::int16_t>(dy)});
    d.terrain.push_back({o.kind_id("terrain.flat"), 50});
    d.terrain.push_back({o.kind_id("terrain.water"), 9});
    d.pose_bucket = 4;
    d.canonicalize();
    return d;
}

SceneDescriptor plain_scene(const EncoderOracle& o, int bucket = 4) {
    SceneDescriptor d;
    d.terrain.push_back({o.kind_id("terrain.flat"), 59});
    d.pose_bucket = bucket;
    d.canonicalize();
    return d;
}

SceneDescriptor entity_scene(const EncoderOracle& o, const char* kind, int dist = 1) {
    SceneDescriptor d = plain_scene(o);
    d.entities.push_back({o.kind_id(kind), static_cast<std::int16_t>(dist), 0});
    d.canonicalize();
    return d;
}

}  // namespace

TEST_CASE("alignment score basics") {
    Rng rng(11);
    const Embedding v = random_unit(rng, 32);
    CHECK(alignment_score(v, v) == doctest::Approx(100.0).epsilon(1e-6));

    std::vector<float> neg(v.values().begin(), v.values().end());
    for (float& x : neg) x = -x;
    const Embedding nv = Embedding::from_unit(std::move(neg));
    CHECK(alignment_score(v, nv) == doctest::Approx(-100.0).epsilon(1e-6));

    const Embedding w = random_unit(rng, 16);
    CHECK_THROWS_AS(alignment_score(v, w), std::invalid_argument);
}

TEST_CASE("alignment score equals brute-force dot for random pairs") {
    Rng rng(23);
    for (int i = 0; i < 200; ++i) {
        const Embedding a = random_unit(rng, 48);
        const Embedding b = random_unit(rng, 48);
        // Independent recomputation of the dot product.
        double dot = 0.0;
        for (int k = 0; k < 48; ++k)
            dot += static_cast<double>(a.values()[static_cast<std::size_t>(k)]) *
                   b.values()[static_cast<std::size_t>(k)];
        CHECK(alignment_score(a, b) == doctest::Approx(100.0 * dot).epsilon(1e-12));
        CHECK(alignment_score(a, b) == doctest::Approx(alignment_score(b, a)).epsilon(1e-12));
        CHECK(std::abs(alignment_score(a, b)) <= 100.0 + 1e-9);
    }
}

TEST_CASE("embeddings are unit norm and validated") {
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const Embedding e = random_unit(rng, 40);
        double n2 = 0.0;
        for (float x : e.values()) n2 += static_cast<double>(x) * x;
        CHECK(std::abs(std::sqrt(n2) - 1.0) <= 1e-6);
    }
    CHECK_THROWS_AS(Embedding::from_unnormalized({}), std::invalid_argument);
    CHECK_THROWS_AS(Embedding::from_unnormalized({0.0f, 0.0f}), std::invalid_argument);
    CHECK_THROWS_AS(Embedding::from_unit({0.5f, 0.5f}), std::invalid_argument);
}

TEST_CASE("registered kinds are pairwise separated") {
    const EncoderOracle o = test_oracle(64);
    for (KindId a = 0; a < o.kind_count(); ++a) {
        for (KindId b = static_cast<KindId>(a + 1); b < o.kind_count(); ++b) {
            const Embedding ea = Embedding::from_unit(o.base(a));
            const Embedding eb = Embedding::from_unit(o.base(b));
            CHECK(alignment_score(ea, eb) < kMergeThreshold);
            CHECK(alignment_score(ea, eb) < o.config().separation_score);
        }
    }
}

TEST_CASE("encode_scene is deterministic and rejects empty windows") {
    const EncoderOracle o = test_oracle(64);
    const SceneDescriptor d = water_scene(o);
    const std::vector<SceneDescriptor> window(8, d);
    const Embedding a = o.encode_scene(window);
    const Embedding b = o.encode_scene(window);
    CHECK(alignment_score(a, b) == doctest::Approx(100.0).epsilon(1e-6));
    CHECK(a == b);
    CHECK_THROWS_AS(o.encode_scene({}), std::invalid_argument);
}

TEST_CASE("noise rotation stays pure per window and bounded") {
    const EncoderOracle o = test_oracle(64, 0.3);
    const EncoderOracle clean = test_oracle(64, 0.0);
    const std::vector<SceneDescriptor> window(4, water_scene(o));
    const Embedding a = o.encode_scene(window);
    const Embedding b = o.encode_scene(window);
    CHECK(a == b);  // same window, same noise
    const Embedding base = clean.encode_scene(window);
    const double cos = a.dot(base);
    CHECK(cos >= std::cos(0.3) - 1e-9);
}

TEST_CASE("windows of disjoint entity kinds score below the merge threshold") {
    const EncoderOracle o = test_oracle(64);
    const std::vector<SceneDescriptor> wa(4, entity_scene(o, "cow"));
    const std::vector<SceneDescriptor> wb(4, entity_scene(o, "tree"));
    CHECK(alignment_score(o.encode_scene(wa), o.encode_scene(wb)) < kMergeThreshold);
}

TEST_CASE("a scene loses its event when the entity vanishes") {
    // Burning zombies in view, then the same spot after they are gone:
    // the two encodings must separate below the merge threshold.
    const EncoderOracle o = test_oracle(64);
    const std::vector<SceneDescriptor> burning(4, entity_scene(o, "zombie_burning"));
    const std::vector<SceneDescriptor> gone(4, plain_scene(o));
    const double s = alignment_score(o.encode_scene(burning), o.encode_scene(gone));
    CHECK(s < kMergeThreshold);
    // And below the task threshold, so the burning query cannot be
    // satisfied by the empty scene.
    CHECK(s < kTaskThreshold);
}

TEST_CASE("task query calibration against water frames") {
    const EncoderOracle o = test_oracle(64);
    const Embedding q = o.encode_task("water", PromptRole::query);

    const std::vector<SceneDescriptor> at_water(4, water_scene(o));
    CHECK(alignment_score(q, o.encode_scene(at_water)) > kTaskThreshold);

    const std::vector<SceneDescriptor> plains(4, plain_scene(o));
    CHECK(alignment_score(q, o.encode_scene(plains)) <= kTaskThreshold);
}

TEST_CASE("task query rejects 1000 sampled non-water frames") {
    const EncoderOracle o = test_oracle(64);
    const Embedding q = o.encode_task("water", PromptRole::query);
    const char* other_kinds[] = {"tree", "cow", "sheep", "house", "zombie_burning",
                                 "sugarcane", "spider"};
    const char* terrains[] = {"terrain.flat", "terrain.grass", "terrain.mountain",
                              "terrain.sand"};
    Rng rng(99);
    double worst = -100.0;
    for (int i = 0; i < 1000; ++i) {
        SceneDescriptor d;
        const int n_entities = static_cast<int>(rng.next_below(4));
        for (int e = 0; e < n_entities; ++e) {
            const char* kind = other_kinds[rng.next_below(7)];
            d.entities.push_back({o.kind_id(kind),
                                  static_cast<std::int16_t>(1 + rng.next_below(7)),
                                  static_cast<std::int16_t>(static_cast<int>(rng.next_below(9)) - 4)});
        }
        const int n_terr = 1 + static_cast<int>(rng.next_below(3));
        for (int t = 0; t < n_terr; ++t)
            d.terrain.push_back({o.kind_id(terrains[rng.next_below(4)]),
                                 static_cast<std::uint16_t>(5 + rng.next_below(40))});
        d.pose_bucket = static_cast<int>(rng.next_below(8));
        d.canonicalize();
        const std::vector<SceneDescriptor> w(1, d);
        worst = std::max(worst, alignment_score(q, o.encode_scene(w)));
    }
    CHECK(worst <= kTaskThreshold);
}

TEST_CASE("task encodings are deterministic and roles differ") {
    const EncoderOracle o = test_oracle(64);
    CHECK(o.encode_task("water", PromptRole::query) ==
          o.encode_task("water", PromptRole::query));
    CHECK(o.encode_task("water", PromptRole::execute) ==
          o.encode_task("water", PromptRole::execute));
    CHECK(alignment_score(o.encode_task("water", PromptRole::query),
                          o.encode_task("water", PromptRole::execute)) < 99.0);
    CHECK_THROWS_AS(o.encode_task("diamond", PromptRole::query), std::invalid_argument);
}

TEST_CASE("window pooling matches the cached fast path") {
    const EncoderOracle o = test_oracle(64, 0.2);
    std::deque<SceneDescriptor> window;
    window.push_back(water_scene(o));
    window.push_back(plain_scene(o));
    window.push_back(entity_scene(o, "tree"));

    WindowEncoder enc(o);
    const Embedding fast = enc.encode(window);
    const std::vector<SceneDescriptor> copy(window.begin(), window.end());
    const Embedding slow = o.encode_scene(copy);
    CHECK(fast == slow);
}
