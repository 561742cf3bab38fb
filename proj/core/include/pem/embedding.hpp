#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pem/rng.hpp"

namespace pem {

// Unit-norm vector in the shared scene/task embedding space.
class Embedding {
public:
    Embedding() = default;

    // Normalizes the input. Throws std::invalid_argument on empty or
    // zero-norm input.
    static Embedding from_unnormalized(std::vector<float> values);

    // Accepts an already-unit vector; throws if the norm is off by more
    // than 1e-6.
    static Embedding from_unit(std::vector<float> values);

    int dimension() const { return static_cast<int>(values_.size()); }
    std::span<const float> values() const { return values_; }
    bool empty() const { return values_.empty(); }

    // Plain dot product; dimensions must match.
    double dot(const Embedding& other) const;

    std::uint64_t digest() const;

    friend bool operator==(const Embedding&, const Embedding&) = default;

private:
    std::vector<float> values_;
};

// Task-alignment score between two embeddings: 100 x cosine, so the
// usual similarity thresholds on the 0..100 logit scale apply directly.
// Symmetric, range [-100, 100]. Throws on dimension mismatch.
double alignment_score(const Embedding& a, const Embedding& b);

using KindId = std::uint16_t;

struct VisibleEntity {
    KindId kind = 0;
    std::int16_t dx = 0;  // cell offset from the agent, world axes
    std::int16_t dy = 0;

    friend auto operator<=>(const VisibleEntity&, const VisibleEntity&) = default;
};

struct TerrainCount {
    KindId kind = 0;
    std::uint16_t count = 0;

    friend auto operator<=>(const TerrainCount&, const TerrainCount&) = default;
};

// What the agent can see from one pose: entity kinds at relative cells,
// the terrain mix inside the field of view, and the discretized heading.
// A pure function of (world, pose, FoV geometry) — the world produces
// these in canonical (sorted) order so equal scenes hash equally.
struct SceneDescriptor {
    std::vector<VisibleEntity> entities;
    std::vector<TerrainCount> terrain;
    int pose_bucket = 0;

    void canonicalize();
    std::uint64_t hash() const;

    friend bool operator==(const SceneDescriptor&, const SceneDescriptor&) = default;
};

enum class PromptRole { query, execute };

struct OracleConfig {
    std::uint64_t seed = 7;
    int dimension = 512;
    double noise_angle = 0.0;    // radians, per-call rotation bound
    int window = 16;             // H frames pooled per scene encoding
    // Registered kinds stay below this pairwise score. Kept well under
    // the task threshold (not merely under the merge threshold) so a
    // frame without a task's resource cannot clear its query.
    double separation_score = 15.0;
};

// Deterministic synthetic encoder for scenes and task prompts.
//
// Scene embedding = normalized sum of
//   * base vector per visible entity, weighted 1/max(1, distance),
//   * terrain-kind vectors weighted by their FoV fraction,
//   * a small heading component,
// pooled over the descriptor window (mean of per-descriptor embeddings,
// then renormalized). With noise_angle > 0 the result is rotated by a
// window-content-seeded angle, so encoding stays a pure function of
// (seed, window) and episodes replay exactly.
//
// Registration must complete before the oracle is shared across threads;
// after that every operation is const and re-entrant.
class EncoderOracle {
public:
    explicit EncoderOracle(OracleConfig cfg);

    const OracleConfig& config() const { return cfg_; }

    // Registers an entity or terrain kind. Base vectors are re-sampled
    // until the pairwise score against every prior kind is below
    // separation_score. Registering the same name twice returns the
    // existing id.
    KindId register_kind(const std::string& name);

    // Maps a task to the kind whose presence should make a frame a
    // retrieval candidate for it.
    void register_task(const std::string& task_kind, const std::string& query_anchor_kind);

    bool has_kind(std::string_view name) const;
    KindId kind_id(std::string_view name) const;  // throws on unknown
    const std::string& kind_name(KindId id) const;
    const std::vector<float>& base(KindId id) const;
    std::size_t kind_count() const { return bases_.size(); }

    // Embedding of a single descriptor (already unit norm).
    Embedding descriptor_embedding(const SceneDescriptor& d) const;

    // Pools a window of at most `window` descriptors. Throws on empty
    // input.
    Embedding encode_scene(std::span<const SceneDescriptor> window) const;

    // Same pooling applied to precomputed per-descriptor embeddings;
    // the agent caches descriptor embeddings and uses this fast path.
    Embedding pool_window(std::span<const Embedding* const> frames,
                          std::uint64_t window_hash) const;

    // Task prompt embedding. The query role is anchored to the task's
    // registered kind so that frames showing the resource score above
    // the retrieval threshold; the execute role is an unrelated
    // deterministic vector (it is handed to the skill executor, never
    // scored against memory). Throws on unregistered task_kind.
    Embedding encode_task(std::string_view task_kind, PromptRole role) const;

private:
    std::vector<float> seeded_unit_vector(std::string_view tag, std::uint64_t salt) const;
    const std::vector<float>& pose_vector(int bucket) const;
    Embedding finalize(std::vector<float> sum, std::uint64_t window_hash) const;

    OracleConfig cfg_;
    std::unordered_map<std::string, KindId> kind_ids_;
    std::vector<std::string> kind_names_;
    std::vector<std::vector<float>> bases_;
    std::unordered_map<std::string, KindId> task_anchor_;
    mutable std::unordered_map<int, std::vector<float>> pose_cache_;
};

// Relative weight of each descriptor channel inside a scene embedding.
// Entities dominate close up; terrain keeps resource-free frames of the
// same biome similar; the heading term separates opposite viewpoints of
// one cell. Combined background weight stays below the task threshold
// (sqrt(0.18^2 + 0.08^2) < 0.2274) so two views of one spot that differ
// by a vanished entity do not satisfy each other's queries.
inline constexpr double kTerrainWeight = 0.18;
inline constexpr double kPoseWeight = 0.08;

}  // namespace pem
