#include "pem/memory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pem/clustering.hpp"

namespace pem {

std::string to_string(MemoryVariant v) {
    switch (v) {
        case MemoryVariant::fifo: return "fifo";
        case MemoryVariant::place: return "place";
        case MemoryVariant::event: return "event";
        case MemoryVariant::place_event: return "place_event";
        case MemoryVariant::none: return "none";
    }
    return "?";
}

MemoryVariant memory_variant_from_string(const std::string& s) {
    if (s == "fifo") return MemoryVariant::fifo;
    if (s == "place") return MemoryVariant::place;
    if (s == "event") return MemoryVariant::event;
    if (s == "place_event") return MemoryVariant::place_event;
    if (s == "none") return MemoryVariant::none;
    throw std::invalid_argument("unknown memory variant '" + s + "'");
}

void MemoryConfig::validate() const {
    if (capacity < 1) throw std::invalid_argument("memory: capacity must be >= 1");
    if (!(place_size > 0.0)) throw std::invalid_argument("memory: place_size must be > 0");
    if (!(yaw_window > 0.0 && yaw_window < 180.0))
        throw std::invalid_argument("memory: yaw_window must be in (0, 180)");
    if (update_frequency < 1) throw std::invalid_argument("memory: update_frequency must be >= 1");
    if (top_k < 1) throw std::invalid_argument("memory: top_k must be >= 1");
    if (!(merge_score > -100.0 && merge_score <= 100.0))
        throw std::invalid_argument("memory: merge_score out of range");
}

PlaceKeyIndex place_key_index(const Pose& pose, double place_size, double yaw_window) {
    PlaceKeyIndex k;
    k.ix = static_cast<std::int64_t>(std::floor((pose.x + place_size / 2.0) / place_size));
    k.iy = static_cast<std::int64_t>(std::floor((pose.y + place_size / 2.0) / place_size));
    const double yaw = normalize_yaw(pose.yaw);
    std::int64_t iyaw =
        static_cast<std::int64_t>(std::floor((yaw + yaw_window / 2.0) / yaw_window));
    // Collapse the wrap-around bin (e.g. +180 and -180 are one bin).
    const double center = normalize_yaw(static_cast<double>(iyaw) * yaw_window);
    k.iyaw = static_cast<std::int64_t>(std::llround(center / yaw_window));
    return k;
}

Pose place_key(const Pose& pose, const MemoryConfig& config) {
    const PlaceKeyIndex k = place_key_index(pose, config.place_size, config.yaw_window);
    Pose center;
    center.x = static_cast<double>(k.ix) * config.place_size;
    center.y = static_cast<double>(k.iy) * config.place_size;
    center.yaw = normalize_yaw(static_cast<double>(k.iyaw) * config.yaw_window);
    return center;
}

void EventCluster::add(ExperienceFrame frame) {
    auto v = frame.embedding.values();
    if (center_sum.empty()) center_sum.assign(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) center_sum[i] += v[i];
    frames.push_back(std::move(frame));
    refresh_center();
}

ExperienceFrame EventCluster::pop_oldest() {
    ExperienceFrame out = std::move(frames.front());
    frames.pop_front();
    auto v = out.embedding.values();
    for (std::size_t i = 0; i < v.size(); ++i) center_sum[i] -= v[i];
    if (!frames.empty()) refresh_center();
    return out;
}

void EventCluster::refresh_center() {
    double n2 = 0.0;
    for (double x : center_sum) n2 += x * x;
    if (n2 > 1e-24) {
        std::vector<float> f(center_sum.size());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<float>(center_sum[i]);
        center = Embedding::from_unnormalized(std::move(f));
    } else {
        center = frames.back().embedding;
    }
}

EpisodicMemory::EpisodicMemory(MemoryConfig config) : config_(config) {
    config_.validate();
}

std::int64_t EpisodicMemory::place_frame_total(const PlaceCluster& pc) const {
    std::int64_t n = static_cast<std::int64_t>(pc.frames.size() + pc.buffer.size());
    for (std::int64_t id : pc.event_ids) n += events_.at(id).size();
    return n;
}

void EpisodicMemory::place_note_add(PlaceCluster& place, const ExperienceFrame& frame) const {
    const double d = distance2d(frame.pose.x, frame.pose.y, place.center_pose.x,
                                place.center_pose.y);
    if (place.center_frame_time < 0 || d < place.center_frame_dist) {
        place.center_embedding = frame.embedding;
        place.center_frame_time = frame.time;
        place.center_frame_dist = d;
    }
}

void EpisodicMemory::place_note_remove(PlaceCluster& place, const ExperienceFrame& frame) const {
    if (frame.time == place.center_frame_time) place.center_dirty = true;
}

const Embedding& EpisodicMemory::place_center(const PlaceCluster& place) const {
    if (!place.center_dirty && place.center_frame_time >= 0) return place.center_embedding;
    place.center_frame_time = -1;
    auto consider = [&](const ExperienceFrame& f) {
        const double d =
            distance2d(f.pose.x, f.pose.y, place.center_pose.x, place.center_pose.y);
        if (place.center_frame_time < 0 || d < place.center_frame_dist ||
            (d == place.center_frame_dist && f.time < place.center_frame_time)) {
            place.center_embedding = f.embedding;
            place.center_frame_time = f.time;
            place.center_frame_dist = d;
        }
    };
    for (const auto& f : place.frames) consider(f);
    for (const auto& f : place.buffer) consider(f);
    for (std::int64_t id : place.event_ids)
        for (const auto& f : events_.at(id).frames) consider(f);
    place.center_dirty = false;
    return place.center_embedding;
}

void EpisodicMemory::event_size_changed(const EventCluster& ec, std::int64_t old_size) {
    if (old_size > 0) event_order_.erase({-old_size, ec.creation_index});
    if (ec.size() > 0) event_order_.insert({-ec.size(), ec.creation_index});
}

void EpisodicMemory::place_size_changed(const PlaceCluster& pc, std::int64_t old_size) {
    if (old_size > 0) place_order_.erase({-old_size, pc.creation_index});
    const std::int64_t now = place_frame_total(pc);
    if (now > 0) place_order_.insert({-now, pc.creation_index});
}

PlaceCluster& EpisodicMemory::find_or_create_place(const Pose& pose, WriteReport& report) {
    const PlaceKeyIndex key = place_key_index(pose, config_.place_size, config_.yaw_window);
    if (auto it = place_index_.find(key); it != place_index_.end())
        return places_.at(it->second);

    PlaceCluster pc;
    pc.key = key;
    pc.center_pose = place_key(pose, config_);
    pc.creation_index = next_place_index_++;
    place_index_.emplace(key, pc.creation_index);
    report.created_place = true;
    return places_.emplace(pc.creation_index, std::move(pc)).first->second;
}

void EpisodicMemory::flush_buffer(std::deque<ExperienceFrame>& buffer, std::int64_t owner_place,
                                  std::vector<std::int64_t>& target_events,
                                  WriteReport& report) {
    if (buffer.empty()) return;
    report.clustering_ran = true;

    std::vector<Embedding> points;
    points.reserve(buffer.size());
    for (const auto& f : buffer) points.push_back(f.embedding);

    DpMeansOptions opts;
    opts.penalty = config_.dp_penalty();
    opts.init_clusters = config_.dp_init_clusters;
    opts.max_iters = config_.dp_max_iters;
    ClusterResult groups = merge_clusters(dp_means(points, opts), points, config_.merge_score);

    // Existing clusters only; groups from this flush are mutually
    // distinct already, so they are never merge targets for each other.
    const std::vector<std::int64_t> existing = target_events;

    std::vector<std::vector<std::size_t>> members(
        static_cast<std::size_t>(groups.cluster_count()));
    for (std::size_t i = 0; i < buffer.size(); ++i)
        members[static_cast<std::size_t>(groups.assignments[i])].push_back(i);

    for (int g = 0; g < groups.cluster_count(); ++g) {
        const Embedding& gc = groups.centers[static_cast<std::size_t>(g)];
        std::int64_t target = -1;
        for (std::int64_t id : existing) {
            if (alignment_score(gc, events_.at(id).center) > config_.merge_score) {
                target = id;
                break;
            }
        }
        if (target >= 0) {
            EventCluster& ec = events_.at(target);
            const std::int64_t old = ec.size();
            for (std::size_t i : members[static_cast<std::size_t>(g)])
                ec.add(std::move(buffer[i]));
            event_size_changed(ec, old);
            ++report.merged_event_clusters;
        } else {
            EventCluster ec;
            ec.creation_index = next_event_index_++;
            ec.owner_place = owner_place;
            for (std::size_t i : members[static_cast<std::size_t>(g)])
                ec.add(std::move(buffer[i]));
            const std::int64_t id = ec.creation_index;
            event_size_changed(ec, 0);
            events_.emplace(id, std::move(ec));
            target_events.push_back(id);
            ++report.created_event_clusters;
        }
    }
    buffer.clear();
}

void EpisodicMemory::remove_event_cluster(std::int64_t event_id) {
    auto it = events_.find(event_id);
    const std::int64_t owner = it->second.owner_place;
    events_.erase(it);
    if (owner >= 0) {
        auto& ids = places_.at(owner).event_ids;
        ids.erase(std::remove(ids.begin(), ids.end(), event_id), ids.end());
    }
}

void EpisodicMemory::maybe_remove_place(std::int64_t place_id) {
    auto it = places_.find(place_id);
    if (it == places_.end()) return;
    const PlaceCluster& pc = it->second;
    if (pc.frames.empty() && pc.buffer.empty() && pc.event_ids.empty()) {
        place_index_.erase(pc.key);
        places_.erase(it);
    }
}

WriteReport EpisodicMemory::write(ExperienceFrame frame) {
    WriteReport report;
    if (config_.variant == MemoryVariant::none) return report;
    if (frame.time <= last_time_)
        throw std::invalid_argument("memory: frame times must be strictly increasing");
    last_time_ = frame.time;
    frame.pose.yaw = normalize_yaw(frame.pose.yaw);

    switch (config_.variant) {
        case MemoryVariant::fifo: {
            fifo_.push_back(std::move(frame));
            ++total_frames_;
            break;
        }
        case MemoryVariant::place: {
            PlaceCluster& pc = find_or_create_place(frame.pose, report);
            const std::int64_t old = place_frame_total(pc);
            place_note_add(pc, frame);
            pc.frames.push_back(std::move(frame));
            place_size_changed(pc, old);
            ++total_frames_;
            break;
        }
        case MemoryVariant::event: {
            global_buffer_.push_back(std::move(frame));
            ++global_timer_;
            ++total_frames_;
            if (global_timer_ >= config_.update_frequency) {
                std::vector<std::int64_t> existing;
                existing.reserve(events_.size());
                for (const auto& [id, ec] : events_) existing.push_back(id);
                flush_buffer(global_buffer_, -1, existing, report);
                global_timer_ = 0;
            }
            break;
        }
        case MemoryVariant::place_event: {
            PlaceCluster& pc = find_or_create_place(frame.pose, report);
            place_note_add(pc, frame);
            if (pc.buffer.empty())
                buffer_fronts_.insert({frame.time, pc.creation_index});
            pc.buffer.push_back(std::move(frame));
            ++pc.timer;
            ++total_frames_;
            if (pc.timer >= config_.update_frequency) {
                buffer_fronts_.erase({pc.buffer.front().time, pc.creation_index});
                flush_buffer(pc.buffer, pc.creation_index, pc.event_ids, report);
                pc.timer = 0;
            }
            break;
        }
        case MemoryVariant::none:
            break;
    }

    if (total_frames_ > config_.capacity) evict_one(report);
    return report;
}

void EpisodicMemory::evict_one(WriteReport& report) {
    switch (config_.variant) {
        case MemoryVariant::fifo: {
            report.evicted = std::move(fifo_.front());
            fifo_.pop_front();
            break;
        }
        case MemoryVariant::place: {
            const std::int64_t pid = place_order_.begin()->second;
            PlaceCluster& pc = places_.at(pid);
            const std::int64_t old = place_frame_total(pc);
            report.evicted = std::move(pc.frames.front());
            pc.frames.pop_front();
            place_note_remove(pc, *report.evicted);
            place_size_changed(pc, old);
            maybe_remove_place(pid);
            break;
        }
        case MemoryVariant::event:
        case MemoryVariant::place_event: {
            if (!event_order_.empty()) {
                const std::int64_t eid = event_order_.begin()->second;
                EventCluster& ec = events_.at(eid);
                const std::int64_t old = ec.size();
                report.evicted = ec.pop_oldest();
                event_size_changed(ec, old);
                const std::int64_t owner = ec.owner_place;
                if (owner >= 0) place_note_remove(places_.at(owner), *report.evicted);
                if (ec.size() == 0) {
                    remove_event_cluster(eid);
                    if (owner >= 0) maybe_remove_place(owner);
                }
            } else if (config_.variant == MemoryVariant::event) {
                // No cluster exists yet; fall back to the globally oldest
                // buffered frame so capacity still holds.
                report.evicted = std::move(global_buffer_.front());
                global_buffer_.pop_front();
                --global_timer_;
            } else {
                while (!buffer_fronts_.empty()) {
                    auto [t, pid] = *buffer_fronts_.begin();
                    buffer_fronts_.erase(buffer_fronts_.begin());
                    auto it = places_.find(pid);
                    if (it == places_.end() || it->second.buffer.empty() ||
                        it->second.buffer.front().time != t)
                        continue;  // stale entry
                    PlaceCluster& pc = it->second;
                    report.evicted = std::move(pc.buffer.front());
                    pc.buffer.pop_front();
                    --pc.timer;
                    place_note_remove(pc, *report.evicted);
                    if (!pc.buffer.empty())
                        buffer_fronts_.insert({pc.buffer.front().time, pid});
                    maybe_remove_place(pid);
                    break;
                }
            }
            break;
        }
        case MemoryVariant::none:
            return;
    }
    --total_frames_;
    ++evictions_;
}

ReadResult EpisodicMemory::read(const Embedding& query) const {
    return read(query, config_.top_k, config_.task_threshold);
}

ReadResult EpisodicMemory::read(const Embedding& query, int top_k, double threshold) const {
    if (top_k < 1) throw std::invalid_argument("memory: read top_k must be >= 1");
    ReadResult out;
    if (config_.variant == MemoryVariant::none) {
        last_cost_ = out.cost;
        return out;
    }
    if (config_.variant == MemoryVariant::fifo) {
        out = read_fifo(query, threshold);
    } else {
        out = read_clustered(query, top_k, threshold);
        if (config_.search_buffer) scan_buffers(query, threshold, out);
    }
    std::sort(out.candidates.begin(), out.candidates.end(),
              [](const ReadCandidate& a, const ReadCandidate& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.time > b.time;
              });
    last_cost_ = out.cost;
    return out;
}

ReadResult EpisodicMemory::read_fifo(const Embedding& query, double threshold) const {
    ReadResult out;
    for (const auto& f : fifo_) {
        const double s = alignment_score(query, f.embedding);
        ++out.cost.frames_scored;
        if (s > threshold) out.candidates.push_back({f.pose, f.time, s});
    }
    return out;
}

ReadResult EpisodicMemory::read_clustered(const Embedding& query, int top_k,
                                          double threshold) const {
    ReadResult out;
    // Stage 1: score every cluster center of this variant's retrieval
    // unit (place centers for place memory, event centers otherwise).
    std::vector<std::pair<double, std::int64_t>> scored;
    const bool place_level = config_.variant == MemoryVariant::place;
    if (place_level) {
        scored.reserve(places_.size());
        for (const auto& [id, pc] : places_) {
            scored.emplace_back(alignment_score(query, place_center(pc)), id);
            ++out.cost.clusters_scored;
        }
    } else {
        scored.reserve(events_.size());
        for (const auto& [id, ec] : events_) {
            scored.emplace_back(alignment_score(query, ec.center), id);
            ++out.cost.clusters_scored;
        }
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (scored.size() > static_cast<std::size_t>(top_k))
        scored.resize(static_cast<std::size_t>(top_k));

    // Stage 2: score member frames of the selected clusters.
    auto scan = [&](const std::deque<ExperienceFrame>& frames) {
        for (const auto& f : frames) {
            const double s = alignment_score(query, f.embedding);
            ++out.cost.frames_scored;
            if (s > threshold) out.candidates.push_back({f.pose, f.time, s});
        }
    };
    for (const auto& [score, id] : scored) {
        if (place_level)
            scan(places_.at(id).frames);
        else
            scan(events_.at(id).frames);
    }
    return out;
}

void EpisodicMemory::scan_buffers(const Embedding& query, double threshold,
                                  ReadResult& out) const {
    auto scan = [&](const std::deque<ExperienceFrame>& frames) {
        for (const auto& f : frames) {
            const double s = alignment_score(query, f.embedding);
            ++out.cost.frames_scored;
            if (s > threshold) out.candidates.push_back({f.pose, f.time, s});
        }
    };
    if (config_.variant == MemoryVariant::event) scan(global_buffer_);
    if (config_.variant == MemoryVariant::place_event)
        for (const auto& [id, pc] : places_) scan(pc.buffer);
}

std::int64_t EpisodicMemory::buffered_count() const {
    switch (config_.variant) {
        case MemoryVariant::event:
            return static_cast<std::int64_t>(global_buffer_.size());
        case MemoryVariant::place_event: {
            std::int64_t n = 0;
            for (const auto& [id, pc] : places_) n += static_cast<std::int64_t>(pc.buffer.size());
            return n;
        }
        default:
            return 0;
    }
}

std::int64_t EpisodicMemory::cluster_count() const {
    switch (config_.variant) {
        case MemoryVariant::place:
            return static_cast<std::int64_t>(places_.size());
        case MemoryVariant::event:
        case MemoryVariant::place_event:
            return static_cast<std::int64_t>(events_.size());
        default:
            return 0;
    }
}

std::int64_t EpisodicMemory::place_count() const {
    return static_cast<std::int64_t>(places_.size());
}

bool EpisodicMemory::has_frame_at(std::int64_t time) const {
    bool found = false;
    for_each_frame([&](const ExperienceFrame& f, bool) {
        if (f.time == time) found = true;
    });
    return found;
}

void EpisodicMemory::for_each_frame(
    const std::function<void(const ExperienceFrame&, bool)>& fn) const {
    for (const auto& f : fifo_) fn(f, true);
    for (const auto& [id, pc] : places_) {
        for (const auto& f : pc.frames) fn(f, true);
        for (const auto& f : pc.buffer) fn(f, false);
    }
    for (const auto& [id, ec] : events_)
        for (const auto& f : ec.frames) fn(f, true);
    for (const auto& f : global_buffer_) fn(f, false);
}

}  // namespace pem
