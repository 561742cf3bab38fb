#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "pem/embedding.hpp"
#include "pem/pose.hpp"

namespace pem {

// The memory atom: one embedded observation with where and when.
struct ExperienceFrame {
    Embedding embedding;
    Pose pose;
    std::int64_t time = 0;
};

enum class MemoryVariant { fifo, place, event, place_event, none };

std::string to_string(MemoryVariant v);
MemoryVariant memory_variant_from_string(const std::string& s);

struct MemoryConfig {
    MemoryVariant variant = MemoryVariant::place_event;
    std::int64_t capacity = 2000;   // N, frames including recency buffers
    double place_size = 6.0;        // C, blocks per place cell side
    double yaw_window = 60.0;       // W, degrees per yaw bin
    int update_frequency = 100;     // R, buffer length between clustering passes
    int top_k = 30;                 // K clusters fetched per read
    double merge_score = 73.5;      // c, clusters scoring above this are one event
    double task_threshold = 22.74;  // h, frames scoring above this are candidates
    int dp_init_clusters = 5;
    int dp_max_iters = 50;
    bool search_buffer = false;     // also scan not-yet-clustered frames on read

    // New-cluster penalty for DP-means, tied to the merge threshold so
    // "new event" and "distinct clusters" share one notion of distance.
    double dp_penalty() const { return 1.0 - merge_score / 100.0; }

    void validate() const;  // throws std::invalid_argument
};

// Lattice index of a place cluster: cell of side C anchored at the
// episode origin plus a yaw bin of width W. Poses use half-open ranges
// [center - C/2, center + C/2) so assignment is a partition.
struct PlaceKeyIndex {
    std::int64_t ix = 0;
    std::int64_t iy = 0;
    std::int64_t iyaw = 0;

    friend bool operator==(const PlaceKeyIndex&, const PlaceKeyIndex&) = default;
};

PlaceKeyIndex place_key_index(const Pose& pose, double place_size, double yaw_window);

// Center of the place cell the pose falls in: (cell center x, cell
// center y, bin center yaw). The initial pose (0, 0, yaw 0) maps to the
// cell centered at the origin.
Pose place_key(const Pose& pose, const MemoryConfig& config);

struct WriteReport {
    bool created_place = false;
    int created_event_clusters = 0;
    int merged_event_clusters = 0;
    bool clustering_ran = false;
    std::optional<ExperienceFrame> evicted;
};

struct QueryCost {
    std::int64_t clusters_scored = 0;
    std::int64_t frames_scored = 0;

    std::int64_t total() const { return clusters_scored + frames_scored; }
};

// Identity of a matching frame: where and when it was taken plus its
// score. The embedding itself stays in the store (the agent navigates
// to the pose and re-orients from it; nothing downstream re-reads the
// vector, and copying it per candidate would dominate large reads).
struct ReadCandidate {
    Pose pose;
    std::int64_t time = 0;
    double score = 0.0;
};

struct ReadResult {
    std::vector<ReadCandidate> candidates;  // score descending, recent-first ties
    QueryCost cost;
};

// One event cluster: a visually coherent, time-ordered run of frames
// with center = normalized mean of member embeddings.
struct EventCluster {
    std::deque<ExperienceFrame> frames;
    std::vector<double> center_sum;
    Embedding center;
    std::int64_t creation_index = 0;
    std::int64_t owner_place = -1;  // -1 for the global (event-variant) store

    void add(ExperienceFrame frame);
    ExperienceFrame pop_oldest();
    std::int64_t size() const { return static_cast<std::int64_t>(frames.size()); }

private:
    void refresh_center();
};

// One place cluster. The place variant stores frames directly; the
// place-event variant stores a recency buffer plus event-cluster ids.
struct PlaceCluster {
    PlaceKeyIndex key;
    Pose center_pose;
    std::int64_t creation_index = 0;

    std::deque<ExperienceFrame> frames;  // place variant only
    std::deque<ExperienceFrame> buffer;  // place-event recency buffer
    std::vector<std::int64_t> event_ids;
    int timer = 0;  // r_k, resets when the buffer is clustered

    // Center embedding = embedding of the member frame whose (x, y) is
    // nearest to center_pose (earliest frame wins ties). Maintained
    // lazily: eviction of the center frame marks it dirty.
    mutable Embedding center_embedding;
    mutable std::int64_t center_frame_time = -1;
    mutable double center_frame_dist = 0.0;
    mutable bool center_dirty = false;
};

// The four memory variants of the write / read / evict contract, plus a
// "none" stub for the memoryless baseline. Single-writer: writes must
// be externally serialized; reads only mutate the recorded query cost.
class EpisodicMemory {
public:
    explicit EpisodicMemory(MemoryConfig config);

    const MemoryConfig& config() const { return config_; }
    MemoryVariant variant() const { return config_.variant; }

    // Appends one frame. frame.time must exceed every stored time.
    // Evicts exactly one frame when the write pushes the store over
    // capacity.
    WriteReport write(ExperienceFrame frame);

    ReadResult read(const Embedding& query) const;
    ReadResult read(const Embedding& query, int top_k, double threshold) const;

    // Exact scoring counts of the most recent read.
    QueryCost last_query_cost() const { return last_cost_; }

    std::int64_t frame_count() const { return total_frames_; }
    std::int64_t buffered_count() const;
    std::int64_t cluster_count() const;  // retrieval clusters of this variant
    std::int64_t place_count() const;
    std::int64_t eviction_count() const { return evictions_; }
    std::int64_t last_time() const { return last_time_; }

    bool has_frame_at(std::int64_t time) const;
    // Visits every stored frame; `clustered` is false for frames still
    // sitting in a recency buffer.
    void for_each_frame(
        const std::function<void(const ExperienceFrame&, bool clustered)>& fn) const;

    const std::map<std::int64_t, PlaceCluster>& places() const { return places_; }
    const std::map<std::int64_t, EventCluster>& events() const { return events_; }
    const std::deque<ExperienceFrame>& fifo_frames() const { return fifo_; }

private:
    friend struct SnapshotAccess;

    struct PlaceKeyHash {
        std::size_t operator()(const PlaceKeyIndex& k) const {
            std::uint64_t h = fnv1a_value(k.ix);
            h = fnv1a_value(k.iy, h);
            return static_cast<std::size_t>(fnv1a_value(k.iyaw, h));
        }
    };

    PlaceCluster& find_or_create_place(const Pose& pose, WriteReport& report);
    void flush_buffer(std::deque<ExperienceFrame>& buffer, std::int64_t owner_place,
                      std::vector<std::int64_t>& target_events, WriteReport& report);
    void evict_one(WriteReport& report);
    void remove_event_cluster(std::int64_t event_id);
    void maybe_remove_place(std::int64_t place_id);

    void place_note_add(PlaceCluster& place, const ExperienceFrame& frame) const;
    void place_note_remove(PlaceCluster& place, const ExperienceFrame& frame) const;
    const Embedding& place_center(const PlaceCluster& place) const;

    void event_size_changed(const EventCluster& ec, std::int64_t old_size);
    void place_size_changed(const PlaceCluster& pc, std::int64_t old_size);
    std::int64_t place_frame_total(const PlaceCluster& pc) const;

    ReadResult read_fifo(const Embedding& query, double threshold) const;
    ReadResult read_clustered(const Embedding& query, int top_k, double threshold) const;
    void scan_buffers(const Embedding& query, double threshold, ReadResult& out) const;

    MemoryConfig config_;

    std::deque<ExperienceFrame> fifo_;                   // fifo variant
    std::map<std::int64_t, PlaceCluster> places_;        // place & place-event
    std::unordered_map<PlaceKeyIndex, std::int64_t, PlaceKeyHash> place_index_;
    std::map<std::int64_t, EventCluster> events_;        // event & place-event
    std::deque<ExperienceFrame> global_buffer_;          // event variant
    int global_timer_ = 0;

    // Eviction order: (-size, creation index) so begin() is the largest,
    // oldest-created cluster of the variant's eviction unit.
    std::set<std::pair<std::int64_t, std::int64_t>> event_order_;
    std::set<std::pair<std::int64_t, std::int64_t>> place_order_;
    // Lazy heap of (front time, place id) over non-empty place buffers,
    // for the fallback eviction path when no cluster exists yet.
    std::set<std::pair<std::int64_t, std::int64_t>> buffer_fronts_;

    std::int64_t total_frames_ = 0;
    std::int64_t evictions_ = 0;
    std::int64_t last_time_ = std::numeric_limits<std::int64_t>::min();
    std::int64_t next_place_index_ = 0;
    std::int64_t next_event_index_ = 0;

    mutable QueryCost last_cost_;
};

}  // namespace pem
