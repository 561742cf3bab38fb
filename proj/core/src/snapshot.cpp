#include "pem/snapshot.hpp"

#include <cinttypes>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace pem {

using nlohmann::json;

// Backdoor into EpisodicMemory internals for state transfer.
struct SnapshotAccess {
    static json save(const EpisodicMemory& m);
    static EpisodicMemory load(const json& j);
};

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
    return std::string(buf);
}

json frame_to_json(const ExperienceFrame& f) {
    json j;
    j["t"] = f.time;
    j["p"] = {f.pose.x, f.pose.y, f.pose.yaw, f.pose.pitch, f.pose.z};
    json e = json::array();
    for (float x : f.embedding.values()) e.push_back(static_cast<double>(x));
    j["e"] = std::move(e);
    return j;
}

ExperienceFrame frame_from_json(const json& j) {
    ExperienceFrame f;
    f.time = j.at("t").get<std::int64_t>();
    const auto& p = j.at("p");
    if (!p.is_array() || p.size() != 5) throw std::runtime_error("snapshot: bad pose");
    f.pose.x = p[0].get<double>();
    f.pose.y = p[1].get<double>();
    f.pose.yaw = p[2].get<double>();
    f.pose.pitch = p[3].get<double>();
    f.pose.z = p[4].get<double>();
    std::vector<float> e;
    for (const auto& x : j.at("e")) e.push_back(static_cast<float>(x.get<double>()));
    f.embedding = Embedding::from_unit(std::move(e));
    return f;
}

json config_to_json(const MemoryConfig& c) {
    json j;
    j["variant"] = to_string(c.variant);
    j["capacity"] = c.capacity;
    j["place_size"] = c.place_size;
    j["yaw_window"] = c.yaw_window;
    j["update_frequency"] = c.update_frequency;
    j["top_k"] = c.top_k;
    j["merge_score"] = c.merge_score;
    j["task_threshold"] = c.task_threshold;
    j["dp_init_clusters"] = c.dp_init_clusters;
    j["dp_max_iters"] = c.dp_max_iters;
    j["search_buffer"] = c.search_buffer;
    return j;
}

MemoryConfig config_from_json(const json& j) {
    MemoryConfig c;
    c.variant = memory_variant_from_string(j.at("variant").get<std::string>());
    c.capacity = j.at("capacity").get<std::int64_t>();
    c.place_size = j.at("place_size").get<double>();
    c.yaw_window = j.at("yaw_window").get<double>();
    c.update_frequency = j.at("update_frequency").get<int>();
    c.top_k = j.at("top_k").get<int>();
    c.merge_score = j.at("merge_score").get<double>();
    c.task_threshold = j.at("task_threshold").get<double>();
    c.dp_init_clusters = j.at("dp_init_clusters").get<int>();
    c.dp_max_iters = j.at("dp_max_iters").get<int>();
    c.search_buffer = j.at("search_buffer").get<bool>();
    return c;
}

json pose_to_json(const Pose& p) {
    return json{{"x", p.x}, {"y", p.y}, {"yaw", p.yaw}};
}

}  // namespace

json SnapshotAccess::save(const EpisodicMemory& m) {
    json j;
    j["format"] = "pem-snapshot-v1";
    j["config"] = config_to_json(m.config_);
    j["last_time"] = m.last_time_;
    j["total_frames"] = m.total_frames_;
    j["evictions"] = m.evictions_;
    j["next_place_index"] = m.next_place_index_;
    j["next_event_index"] = m.next_event_index_;
    j["global_timer"] = m.global_timer_;

    json fifo = json::array();
    for (const auto& f : m.fifo_) fifo.push_back(frame_to_json(f));
    j["fifo"] = std::move(fifo);

    json gbuf = json::array();
    for (const auto& f : m.global_buffer_) gbuf.push_back(frame_to_json(f));
    j["global_buffer"] = std::move(gbuf);

    json events = json::array();
    for (const auto& [id, ec] : m.events_) {
        json e;
        e["id"] = id;
        e["owner"] = ec.owner_place;
        e["center_digest"] = hex64(ec.center.digest());
        json frames = json::array();
        for (const auto& f : ec.frames) frames.push_back(frame_to_json(f));
        e["frames"] = std::move(frames);
        events.push_back(std::move(e));
    }
    j["events"] = std::move(events);

    json places = json::array();
    for (const auto& [id, pc] : m.places_) {
        json p;
        p["id"] = id;
        p["key"] = {pc.key.ix, pc.key.iy, pc.key.iyaw};
        p["center_pose"] = pose_to_json(pc.center_pose);
        p["timer"] = pc.timer;
        p["center_digest"] = hex64(m.place_center(pc).digest());
        p["event_ids"] = pc.event_ids;
        json frames = json::array();
        for (const auto& f : pc.frames) frames.push_back(frame_to_json(f));
        p["frames"] = std::move(frames);
        json buffer = json::array();
        for (const auto& f : pc.buffer) buffer.push_back(frame_to_json(f));
        p["buffer"] = std::move(buffer);
        places.push_back(std::move(p));
    }
    j["places"] = std::move(places);
    return j;
}

EpisodicMemory SnapshotAccess::load(const json& j) {
    if (j.at("format").get<std::string>() != "pem-snapshot-v1")
        throw std::runtime_error("snapshot: unknown format tag");
    EpisodicMemory m(config_from_json(j.at("config")));
    m.last_time_ = j.at("last_time").get<std::int64_t>();
    m.total_frames_ = j.at("total_frames").get<std::int64_t>();
    m.evictions_ = j.at("evictions").get<std::int64_t>();
    m.next_place_index_ = j.at("next_place_index").get<std::int64_t>();
    m.next_event_index_ = j.at("next_event_index").get<std::int64_t>();
    m.global_timer_ = j.at("global_timer").get<int>();

    for (const auto& fj : j.at("fifo")) m.fifo_.push_back(frame_from_json(fj));
    for (const auto& fj : j.at("global_buffer")) m.global_buffer_.push_back(frame_from_json(fj));

    for (const auto& ej : j.at("events")) {
        EventCluster ec;
        ec.creation_index = ej.at("id").get<std::int64_t>();
        ec.owner_place = ej.at("owner").get<std::int64_t>();
        for (const auto& fj : ej.at("frames")) ec.add(frame_from_json(fj));
        if (hex64(ec.center.digest()) != ej.at("center_digest").get<std::string>())
            throw std::runtime_error("snapshot: event center digest mismatch");
        m.event_size_changed(ec, 0);
        m.events_.emplace(ec.creation_index, std::move(ec));
    }

    for (const auto& pj : j.at("places")) {
        PlaceCluster pc;
        pc.creation_index = pj.at("id").get<std::int64_t>();
        const auto& kj = pj.at("key");
        pc.key = {kj[0].get<std::int64_t>(), kj[1].get<std::int64_t>(),
                  kj[2].get<std::int64_t>()};
        pc.center_pose.x = pj.at("center_pose").at("x").get<double>();
        pc.center_pose.y = pj.at("center_pose").at("y").get<double>();
        pc.center_pose.yaw = pj.at("center_pose").at("yaw").get<double>();
        pc.timer = pj.at("timer").get<int>();
        pc.event_ids = pj.at("event_ids").get<std::vector<std::int64_t>>();
        for (const auto& fj : pj.at("frames")) pc.frames.push_back(frame_from_json(fj));
        for (const auto& fj : pj.at("buffer")) pc.buffer.push_back(frame_from_json(fj));
        pc.center_dirty = true;

        const std::int64_t id = pc.creation_index;
        m.place_index_.emplace(pc.key, id);
        if (!pc.buffer.empty()) m.buffer_fronts_.insert({pc.buffer.front().time, id});
        auto& stored = m.places_.emplace(id, std::move(pc)).first->second;
        if (m.config_.variant == MemoryVariant::place) m.place_size_changed(stored, 0);
        if (hex64(m.place_center(stored).digest()) !=
            pj.at("center_digest").get<std::string>())
            throw std::runtime_error("snapshot: place center digest mismatch");
    }
    return m;
}

std::string save_snapshot(const EpisodicMemory& memory) {
    return SnapshotAccess::save(memory).dump();
}

EpisodicMemory load_snapshot(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("snapshot: parse error: ") + e.what());
    }
    try {
        return SnapshotAccess::load(j);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("snapshot: malformed document: ") + e.what());
    }
}

}  // namespace pem
