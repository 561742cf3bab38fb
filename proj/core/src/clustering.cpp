#include "pem/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pem {

namespace {

double cosine_distance(const Embedding& a, const Embedding& b) {
    return 1.0 - a.dot(b);
}

// Recomputes centers as normalized member sums and drops empty clusters,
// remapping assignment indices to stay dense. Returns false if any
// center collapsed to zero norm (cannot happen with unit inputs unless
// they cancel exactly; treated as keep-first-member).
void rebuild_centers(ClusterResult& r, std::span<const Embedding> points) {
    const int k = r.cluster_count();
    const int dim = points.empty() ? 0 : points[0].dimension();
    std::vector<std::vector<float>> sums(static_cast<std::size_t>(k),
                                         std::vector<float>(static_cast<std::size_t>(dim), 0.0f));
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    std::vector<int> first_member(static_cast<std::size_t>(k), -1);

    for (std::size_t i = 0; i < points.size(); ++i) {
        const int c = r.assignments[i];
        auto v = points[i].values();
        auto& s = sums[static_cast<std::size_t>(c)];
        for (int d = 0; d < dim; ++d) s[static_cast<std::size_t>(d)] += v[static_cast<std::size_t>(d)];
        if (sizes[static_cast<std::size_t>(c)]++ == 0) first_member[static_cast<std::size_t>(c)] = static_cast<int>(i);
    }

    std::vector<int> remap(static_cast<std::size_t>(k), -1);
    std::vector<Embedding> centers;
    std::vector<int> kept_sizes;
    for (int c = 0; c < k; ++c) {
        if (sizes[static_cast<std::size_t>(c)] == 0) continue;
        remap[static_cast<std::size_t>(c)] = static_cast<int>(centers.size());
        double n2 = 0.0;
        for (float x : sums[static_cast<std::size_t>(c)]) n2 += static_cast<double>(x) * x;
        if (n2 > 1e-24) {
            centers.push_back(Embedding::from_unnormalized(std::move(sums[static_cast<std::size_t>(c)])));
        } else {
            centers.push_back(points[static_cast<std::size_t>(first_member[static_cast<std::size_t>(c)])]);
        }
        kept_sizes.push_back(sizes[static_cast<std::size_t>(c)]);
    }
    for (int& a : r.assignments) a = remap[static_cast<std::size_t>(a)];
    r.centers = std::move(centers);
    r.sizes = std::move(kept_sizes);
}

}  // namespace

ClusterResult dp_means(std::span<const Embedding> points, const DpMeansOptions& opts) {
    if (points.empty()) throw std::invalid_argument("dp_means: empty input");
    if (!(opts.penalty > 0.0 && opts.penalty < 2.0))
        throw std::invalid_argument("dp_means: penalty must be in (0, 2)");
    if (opts.init_clusters < 1)
        throw std::invalid_argument("dp_means: init_clusters must be >= 1");
    const int dim = points[0].dimension();
    for (const auto& p : points)
        if (p.dimension() != dim) throw std::invalid_argument("dp_means: mixed dimensions");

    const std::size_t n = points.size();
    const std::size_t n_seeds = std::min<std::size_t>(static_cast<std::size_t>(opts.init_clusters), n);

    // Farthest-point seeding from point 0. A candidate seed within the
    // spawn penalty of an existing one adds nothing (its points would
    // never spawn a cluster anyway), so seeding stops early then.
    std::vector<Embedding> centers;
    centers.push_back(points[0]);
    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = cosine_distance(points[i], centers[0]);
    while (centers.size() < n_seeds) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (nearest[i] > nearest[far]) far = i;
        if (nearest[far] <= opts.penalty) break;
        centers.push_back(points[far]);
        for (std::size_t i = 0; i < n; ++i)
            nearest[i] = std::min(nearest[i], cosine_distance(points[i], centers.back()));
    }

    ClusterResult result;
    result.assignments.assign(n, -1);
    result.centers = std::move(centers);

    std::vector<int> previous;
    bool converged = false;
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        // Assignment pass; a point beyond the penalty from every center
        // becomes a center itself, immediately visible to later points.
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = cosine_distance(points[i], result.centers[0]);
            for (std::size_t c = 1; c < result.centers.size(); ++c) {
                const double d = cosine_distance(points[i], result.centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(c);
                }
            }
            if (best_d > opts.penalty) {
                best = static_cast<int>(result.centers.size());
                result.centers.push_back(points[i]);
            }
            result.assignments[i] = best;
        }
        rebuild_centers(result, points);
        if (result.assignments == previous) {
            converged = true;
            break;
        }
        previous = result.assignments;
    }
    result.converged = converged;
    return result;
}

ClusterResult merge_clusters(const ClusterResult& result,
                             std::span<const Embedding> points,
                             double merge_score) {
    if (!(merge_score > -100.0 && merge_score <= 100.0))
        throw std::invalid_argument("merge_clusters: merge_score must be in (-100, 100]");
    if (result.assignments.size() != points.size())
        throw std::invalid_argument("merge_clusters: result does not match points");

    ClusterResult merged = result;
    for (;;) {
        const int k = merged.cluster_count();
        if (k <= 1) break;

        // Union-find over every qualifying pair of current centers.
        std::vector<int> parent(static_cast<std::size_t>(k));
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int a) {
            while (parent[static_cast<std::size_t>(a)] != a) {
                parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
                a = parent[static_cast<std::size_t>(a)];
            }
            return a;
        };
        bool any = false;
        for (int a = 0; a < k; ++a) {
            for (int b = a + 1; b < k; ++b) {
                if (alignment_score(merged.centers[static_cast<std::size_t>(a)],
                                    merged.centers[static_cast<std::size_t>(b)]) > merge_score) {
                    const int ra = find(a), rb = find(b);
                    if (ra != rb) {
                        parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
                        any = true;
                    }
                }
            }
        }
        if (!any) break;
        for (int& a : merged.assignments) a = find(a);
        rebuild_centers(merged, points);
    }
    return merged;
}

}  // namespace pem
