#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pem/memory.hpp"

namespace pem {

struct QueryBenchConfig {
    std::vector<MemoryVariant> variants = {MemoryVariant::fifo, MemoryVariant::place,
                                           MemoryVariant::event, MemoryVariant::place_event};
    std::int64_t frames = 100000;
    int queries = 1000;
    int warmup = 50;  // measured queries exclude these
    int dimension = 512;
    int top_k = 30;
    std::uint64_t seed = 42;
};

struct QueryBenchRow {
    MemoryVariant variant = MemoryVariant::fifo;
    std::int64_t frames = 0;
    std::int64_t clusters = 0;
    std::int64_t max_cluster = 0;
    std::int64_t buffered = 0;
    double median_ms = 0.0;
    double mean_ms = 0.0;
    double mean_clusters_scored = 0.0;
    double mean_frames_scored = 0.0;
    std::int64_t min_total_scored = 0;
    std::int64_t max_total_scored = 0;
};

// Builds each memory variant from one identical synthetic trajectory (a
// seeded waypoint wanderer with dwell pauses over a 200x200 world), then
// times `queries` reads with embeddings sampled from the stored stream.
// Scoring counts are exact; wall times are medians after warmup.
std::vector<QueryBenchRow> run_query_bench(const QueryBenchConfig& config);

std::string query_bench_to_json(const std::vector<QueryBenchRow>& rows);

}  // namespace pem
