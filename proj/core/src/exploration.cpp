#include "pem/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace pem {

void ExploreConfig::validate() const {
    if (map_side < 1) throw std::invalid_argument("explore: map_side must be >= 1");
    if (super_cell < 1) throw std::invalid_argument("explore: super_cell must be >= 1");
    if (map_side % super_cell != 0)
        throw std::invalid_argument("explore: map_side must be divisible by super_cell");
    if (!(fov_radius >= 0.0)) throw std::invalid_argument("explore: bad fov_radius");
    if (!(fov_half_angle >= 0.0 && fov_half_angle <= 180.0))
        throw std::invalid_argument("explore: bad fov_half_angle");
}

VisitationMap::VisitationMap(ExploreConfig config) : config_(config) {
    config_.validate();
    width_ = config_.map_side;
    height_ = config_.map_side;
    min_x_ = -width_ / 2;
    min_y_ = -height_ / 2;
    counts_.assign(static_cast<std::size_t>(width_) * height_, 0);
    super_sums_.assign(static_cast<std::size_t>(width_ / config_.super_cell) *
                           (height_ / config_.super_cell),
                       0);
}

std::int64_t& VisitationMap::cell(int cx, int cy) {
    return counts_[static_cast<std::size_t>(cy) * width_ + cx];
}

void VisitationMap::bump(int cx, int cy) {
    if (cx < 0 || cy < 0 || cx >= width_ || cy >= height_) return;
    ++cell(cx, cy);
    const int g = config_.super_cell;
    super_sums_[static_cast<std::size_t>(cy / g) * (width_ / g) + (cx / g)] += 1;
    ++total_marks_;
}

bool VisitationMap::in_bounds(double x, double y) const {
    const int cx = static_cast<int>(std::floor(x)) - min_x_;
    const int cy = static_cast<int>(std::floor(y)) - min_y_;
    return cx >= 0 && cy >= 0 && cx < width_ && cy < height_;
}

std::int64_t VisitationMap::count_at(double x, double y) const {
    const int cx = static_cast<int>(std::floor(x)) - min_x_;
    const int cy = static_cast<int>(std::floor(y)) - min_y_;
    if (cx < 0 || cy < 0 || cx >= width_ || cy >= height_) return 0;
    return counts_[static_cast<std::size_t>(cy) * width_ + cx];
}

void VisitationMap::mark(const Pose& pose) {
    if (!in_bounds(pose.x, pose.y)) expand(pose.x, pose.y);
    const int ax = static_cast<int>(std::floor(pose.x)) - min_x_;
    const int ay = static_cast<int>(std::floor(pose.y)) - min_y_;
    bump(ax, ay);

    const int r = static_cast<int>(std::ceil(config_.fov_radius));
    const double r2 = config_.fov_radius * config_.fov_radius;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (static_cast<double>(dx) * dx + static_cast<double>(dy) * dy > r2) continue;
            const double ang = std::atan2(static_cast<double>(dy), static_cast<double>(dx)) *
                               (180.0 / 3.14159265358979323846);
            if (std::abs(normalize_yaw(ang - pose.yaw)) > config_.fov_half_angle) continue;
            bump(ax + dx, ay + dy);
        }
    }
}

void VisitationMap::expand(double x, double y) {
    const int g = config_.super_cell;
    int grow_left = 0, grow_right = 0, grow_down = 0, grow_up = 0;
    const int cx = static_cast<int>(std::floor(x));
    const int cy = static_cast<int>(std::floor(y));
    while (cx < min_x_ - grow_left) grow_left += g;
    while (cx >= min_x_ + width_ + grow_right) grow_right += g;
    while (cy < min_y_ - grow_down) grow_down += g;
    while (cy >= min_y_ + height_ + grow_up) grow_up += g;
    if (grow_left + grow_right + grow_down + grow_up == 0) return;

    const int new_w = width_ + grow_left + grow_right;
    const int new_h = height_ + grow_down + grow_up;
    std::vector<std::int64_t> next(static_cast<std::size_t>(new_w) * new_h, 0);
    for (int yy = 0; yy < height_; ++yy)
        for (int xx = 0; xx < width_; ++xx)
            next[static_cast<std::size_t>(yy + grow_down) * new_w + (xx + grow_left)] =
                counts_[static_cast<std::size_t>(yy) * width_ + xx];
    counts_ = std::move(next);
    min_x_ -= grow_left;
    min_y_ -= grow_down;
    width_ = new_w;
    height_ = new_h;

    super_sums_.assign(static_cast<std::size_t>(new_w / g) * (new_h / g), 0);
    for (int yy = 0; yy < height_; ++yy)
        for (int xx = 0; xx < width_; ++xx)
            super_sums_[static_cast<std::size_t>(yy / g) * (new_w / g) + (xx / g)] +=
                counts_[static_cast<std::size_t>(yy) * width_ + xx];
}

GoalSelection VisitationMap::select_goal(double current_x, double current_y) const {
    const int g = config_.super_cell;
    const int cols = width_ / g;
    const int rows = height_ / g;

    GoalSelection best;
    bool first = true;
    double best_dist = 0.0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const std::int64_t sum = super_sums_[static_cast<std::size_t>(r) * cols + c];
            const double center_x = min_x_ + c * g + g / 2.0;
            const double center_y = min_y_ + r * g + g / 2.0;
            const double dist = distance2d(current_x, current_y, center_x, center_y);
            if (first || sum < best.min_count ||
                (sum == best.min_count && dist < best_dist)) {
                best.min_count = sum;
                best.goal_x = center_x;
                best.goal_y = center_y;
                best.super_row = r;
                best.super_col = c;
                best_dist = dist;
                first = false;
            }
        }
    }
    return best;
}

CoverageStats coverage_and_revisits(std::span<const std::pair<double, double>> trajectory,
                                    double map_min_x, double map_min_y, double map_side,
                                    int eval_grid, std::int64_t occupancy_threshold) {
    if (trajectory.empty()) throw std::invalid_argument("coverage: empty trajectory");
    const double cell_w = map_side / eval_grid;
    const int n = eval_grid * eval_grid;
    std::vector<std::int64_t> occupancy(static_cast<std::size_t>(n), 0);
    std::vector<std::int64_t> segments(static_cast<std::size_t>(n), 0);

    int prev = -1;
    for (const auto& [x, y] : trajectory) {
        int cx = static_cast<int>(std::floor((x - map_min_x) / cell_w));
        int cy = static_cast<int>(std::floor((y - map_min_y) / cell_w));
        cx = std::clamp(cx, 0, eval_grid - 1);
        cy = std::clamp(cy, 0, eval_grid - 1);
        const int idx = cy * eval_grid + cx;
        ++occupancy[static_cast<std::size_t>(idx)];
        if (idx != prev) ++segments[static_cast<std::size_t>(idx)];
        prev = idx;
    }

    int covered = 0;
    std::int64_t qualifying = 0;
    std::int64_t extra_segments = 0;
    for (int i = 0; i < n; ++i) {
        if (occupancy[static_cast<std::size_t>(i)] > 0) ++covered;
        if (occupancy[static_cast<std::size_t>(i)] > occupancy_threshold) {
            ++qualifying;
            extra_segments += segments[static_cast<std::size_t>(i)] - 1;
        }
    }

    CoverageStats out;
    out.coverage_percent = 100.0 * covered / n;
    out.revisit_count =
        qualifying == 0 ? 0.0 : static_cast<double>(extra_segments) / qualifying;
    return out;
}

}  // namespace pem
