#pragma once

#include <span>
#include <vector>

#include "pem/embedding.hpp"

namespace pem {

struct ClusterResult {
    std::vector<int> assignments;    // one cluster index per input point
    std::vector<Embedding> centers;  // normalized mean of each cluster's members
    std::vector<int> sizes;
    bool converged = true;           // false when max_iters ran out

    int cluster_count() const { return static_cast<int>(centers.size()); }
};

struct DpMeansOptions {
    double penalty = 0.265;  // cosine distance (1 - dot) above which a point spawns a cluster
    int init_clusters = 5;
    int max_iters = 50;
};

// Nonparametric clustering in cosine-distance space. Seeding is
// farthest-point (k-means++ style but deterministic: first point, then
// repeatedly the point farthest from its nearest seed, stopping early
// once every remaining point sits within `penalty` of a seed). Each
// pass assigns points sequentially, spawning a new cluster whenever a
// point is further than `penalty` from every current center, then
// recomputes centers as normalized means; stops when assignments
// stabilize. Nearest-center ties break toward the lowest cluster index.
// Throws std::invalid_argument on empty input or bad options.
ClusterResult dp_means(std::span<const Embedding> points, const DpMeansOptions& opts);

// Transitively merges clusters whose centers score above merge_score
// (union-find per round, centers recomputed, repeated to fixpoint, so
// the outcome is independent of pair order). Merged center = normalized
// size-weighted mean. Surviving clusters keep the relative order of
// their lowest original index.
ClusterResult merge_clusters(const ClusterResult& result,
                             std::span<const Embedding> points,
                             double merge_score);

}  // namespace pem
