#include "pem/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pem {

namespace {

double norm_of(std::span<const float> v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

void scale_into_unit(std::vector<float>& v, double norm) {
    const double inv = 1.0 / norm;
    for (float& x : v) x = static_cast<float>(x * inv);
}

}  // namespace

Embedding Embedding::from_unnormalized(std::vector<float> values) {
    if (values.empty()) throw std::invalid_argument("embedding: empty vector");
    const double n = norm_of(values);
    if (!(n > 0.0) || !std::isfinite(n))
        throw std::invalid_argument("embedding: zero or non-finite norm");
    scale_into_unit(values, n);
    Embedding e;
    e.values_ = std::move(values);
    return e;
}

Embedding Embedding::from_unit(std::vector<float> values) {
    if (values.empty()) throw std::invalid_argument("embedding: empty vector");
    const double n = norm_of(values);
    if (std::abs(n - 1.0) > 1e-6)
        throw std::invalid_argument("embedding: vector is not unit norm");
    Embedding e;
    e.values_ = std::move(values);
    return e;
}

double Embedding::dot(const Embedding& other) const {
    if (dimension() != other.dimension())
        throw std::invalid_argument("embedding: dimension mismatch");
    const float* a = values_.data();
    const float* b = other.values_.data();
    const std::size_t n = values_.size();
    // Four accumulators break the FP dependency chain; accumulation
    // stays in double for precision and determinism.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += static_cast<double>(a[i]) * b[i];
        s1 += static_cast<double>(a[i + 1]) * b[i + 1];
        s2 += static_cast<double>(a[i + 2]) * b[i + 2];
        s3 += static_cast<double>(a[i + 3]) * b[i + 3];
    }
    for (; i < n; ++i) s0 += static_cast<double>(a[i]) * b[i];
    return (s0 + s1) + (s2 + s3);
}

std::uint64_t Embedding::digest() const {
    return fnv1a(values_.data(), values_.size() * sizeof(float));
}

double alignment_score(const Embedding& a, const Embedding& b) {
    return 100.0 * a.dot(b);
}

void SceneDescriptor::canonicalize() {
    std::sort(entities.begin(), entities.end());
    entities.erase(std::unique(entities.begin(), entities.end()), entities.end());
    std::sort(terrain.begin(), terrain.end());
}

std::uint64_t SceneDescriptor::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& e : entities) {
        h = fnv1a_value(e.kind, h);
        h = fnv1a_value(e.dx, h);
        h = fnv1a_value(e.dy, h);
    }
    h = fnv1a_value(std::uint64_t{0x5eed}, h);
    for (const auto& t : terrain) {
        h = fnv1a_value(t.kind, h);
        h = fnv1a_value(t.count, h);
    }
    h = fnv1a_value(pose_bucket, h);
    return h;
}

EncoderOracle::EncoderOracle(OracleConfig cfg) : cfg_(cfg) {
    if (cfg_.dimension < 2) throw std::invalid_argument("oracle: dimension must be >= 2");
    if (cfg_.window < 1) throw std::invalid_argument("oracle: window must be >= 1");
    if (cfg_.noise_angle < 0.0) throw std::invalid_argument("oracle: negative noise_angle");
}

std::vector<float> EncoderOracle::seeded_unit_vector(std::string_view tag,
                                                     std::uint64_t salt) const {
    std::uint64_t h = fnv1a(tag.data(), tag.size());
    h = fnv1a_value(salt, h);
    h = fnv1a_value(cfg_.seed, h);
    Rng rng(h);
    std::vector<float> v(static_cast<std::size_t>(cfg_.dimension));
    double n2 = 0.0;
    for (float& x : v) {
        x = static_cast<float>(rng.next_gaussian());
        n2 += static_cast<double>(x) * x;
    }
    scale_into_unit(v, std::sqrt(n2));
    return v;
}

KindId EncoderOracle::register_kind(const std::string& name) {
    if (auto it = kind_ids_.find(name); it != kind_ids_.end()) return it->second;
    if (bases_.size() >= 0xffffu) throw std::runtime_error("oracle: kind registry full");

    const double max_dot = cfg_.separation_score / 100.0;
    for (std::uint64_t attempt = 0;; ++attempt) {
        std::vector<float> candidate = seeded_unit_vector(name, attempt);
        bool separated = true;
        for (const auto& existing : bases_) {
            double d = 0.0;
            for (int i = 0; i < cfg_.dimension; ++i)
                d += static_cast<double>(candidate[static_cast<std::size_t>(i)]) *
                     existing[static_cast<std::size_t>(i)];
            if (d >= max_dot) {
                separated = false;
                break;
            }
        }
        if (separated) {
            const KindId id = static_cast<KindId>(bases_.size());
            kind_ids_.emplace(name, id);
            kind_names_.push_back(name);
            bases_.push_back(std::move(candidate));
            return id;
        }
        if (attempt > 200000)
            throw std::runtime_error("oracle: cannot separate kind '" + name +
                                     "' at this dimension");
    }
}

void EncoderOracle::register_task(const std::string& task_kind,
                                  const std::string& query_anchor_kind) {
    task_anchor_[task_kind] = kind_id(query_anchor_kind);
}

bool EncoderOracle::has_kind(std::string_view name) const {
    return kind_ids_.find(std::string(name)) != kind_ids_.end();
}

KindId EncoderOracle::kind_id(std::string_view name) const {
    auto it = kind_ids_.find(std::string(name));
    if (it == kind_ids_.end())
        throw std::invalid_argument("oracle: unknown kind '" + std::string(name) + "'");
    return it->second;
}

const std::string& EncoderOracle::kind_name(KindId id) const {
    return kind_names_.at(id);
}

const std::vector<float>& EncoderOracle::base(KindId id) const {
    return bases_.at(id);
}

const std::vector<float>& EncoderOracle::pose_vector(int bucket) const {
    auto it = pose_cache_.find(bucket);
    if (it != pose_cache_.end()) return it->second;
    auto v = seeded_unit_vector("pose.bucket", static_cast<std::uint64_t>(bucket) + 1);
    return pose_cache_.emplace(bucket, std::move(v)).first->second;
}

Embedding EncoderOracle::descriptor_embedding(const SceneDescriptor& d) const {
    const auto dim = static_cast<std::size_t>(cfg_.dimension);
    std::vector<float> sum(dim, 0.0f);

    for (const auto& e : d.entities) {
        const double dist = std::sqrt(static_cast<double>(e.dx) * e.dx +
                                      static_cast<double>(e.dy) * e.dy);
        const double w = 1.0 / std::max(1.0, dist);
        const auto& b = base(e.kind);
        for (std::size_t i = 0; i < dim; ++i)
            sum[i] += static_cast<float>(w * b[i]);
    }

    std::uint32_t total = 0;
    for (const auto& t : d.terrain) total += t.count;
    if (total > 0) {
        for (const auto& t : d.terrain) {
            const double w = kTerrainWeight * t.count / total;
            const auto& b = base(t.kind);
            for (std::size_t i = 0; i < dim; ++i)
                sum[i] += static_cast<float>(w * b[i]);
        }
    }

    const auto& pv = pose_vector(d.pose_bucket);
    for (std::size_t i = 0; i < dim; ++i)
        sum[i] += static_cast<float>(kPoseWeight * pv[i]);

    return Embedding::from_unnormalized(std::move(sum));
}

Embedding EncoderOracle::finalize(std::vector<float> sum, std::uint64_t window_hash) const {
    Embedding pooled = Embedding::from_unnormalized(std::move(sum));
    if (cfg_.noise_angle <= 0.0) return pooled;

    // Noise = rotation by a content-seeded angle toward a content-seeded
    // orthogonal direction. Same window, same result.
    std::uint64_t h = fnv1a_value(cfg_.seed, window_hash);
    Rng rng(h);
    const double theta = cfg_.noise_angle * rng.next_double();
    if (theta == 0.0) return pooled;

    const auto dim = static_cast<std::size_t>(cfg_.dimension);
    std::vector<float> r(dim);
    for (float& x : r) x = static_cast<float>(rng.next_gaussian());
    // Orthogonalize r against the pooled direction.
    double proj = 0.0;
    auto pv = pooled.values();
    for (std::size_t i = 0; i < dim; ++i) proj += static_cast<double>(r[i]) * pv[i];
    double rn2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        r[i] = static_cast<float>(r[i] - proj * pv[i]);
        rn2 += static_cast<double>(r[i]) * r[i];
    }
    const double rn = std::sqrt(rn2);
    if (!(rn > 1e-12)) return pooled;

    const double c = std::cos(theta), s = std::sin(theta) / rn;
    std::vector<float> rotated(dim);
    for (std::size_t i = 0; i < dim; ++i)
        rotated[i] = static_cast<float>(c * pv[i] + s * r[i]);
    return Embedding::from_unnormalized(std::move(rotated));
}

Embedding EncoderOracle::encode_scene(std::span<const SceneDescriptor> window) const {
    if (window.empty()) throw std::invalid_argument("encode_scene: empty window");
    if (window.size() > static_cast<std::size_t>(cfg_.window))
        window = window.subspan(window.size() - static_cast<std::size_t>(cfg_.window));

    const auto dim = static_cast<std::size_t>(cfg_.dimension);
    std::vector<float> sum(dim, 0.0f);
    std::uint64_t wh = 0xcbf29ce484222325ULL;
    for (const auto& d : window) {
        const Embedding e = descriptor_embedding(d);
        auto ev = e.values();
        for (std::size_t i = 0; i < dim; ++i) sum[i] += ev[i];
        wh = fnv1a_value(d.hash(), wh);
    }
    return finalize(std::move(sum), wh);
}

Embedding EncoderOracle::pool_window(std::span<const Embedding* const> frames,
                                     std::uint64_t window_hash) const {
    if (frames.empty()) throw std::invalid_argument("pool_window: empty window");
    const auto dim = static_cast<std::size_t>(cfg_.dimension);
    std::vector<float> sum(dim, 0.0f);
    for (const Embedding* e : frames) {
        auto ev = e->values();
        for (std::size_t i = 0; i < dim; ++i) sum[i] += ev[i];
    }
    return finalize(std::move(sum), window_hash);
}

Embedding EncoderOracle::encode_task(std::string_view task_kind, PromptRole role) const {
    auto it = task_anchor_.find(std::string(task_kind));
    if (it == task_anchor_.end())
        throw std::invalid_argument("oracle: unknown task kind '" + std::string(task_kind) + "'");
    if (role == PromptRole::query) {
        return Embedding::from_unit(base(it->second));
    }
    std::string tag = "task.execute|";
    tag += task_kind;
    return Embedding::from_unit(seeded_unit_vector(tag, 0));
}

}  // namespace pem
