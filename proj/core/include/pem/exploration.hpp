#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pem/pose.hpp"

namespace pem {

struct ExploreConfig {
    int map_side = 120;           // L, cells (1 block per cell)
    int super_cell = 15;          // G, cells per goal-selection block side
    double fov_radius = 8.0;      // cells
    double fov_half_angle = 30.0; // degrees either side of yaw

    void validate() const;
};

struct GoalSelection {
    double goal_x = 0.0;  // world coordinates of the super-cell center
    double goal_y = 0.0;
    int super_row = 0;
    int super_col = 0;
    std::int64_t min_count = 0;
};

// L x L grid of visit counts centered on the episode start, partitioned
// into G x G super-cells for goal selection. Counts only ever grow; the
// grid expands by whole super-cell rows/columns when the agent leaves
// it, so the partition stays anchored at the original origin.
class VisitationMap {
public:
    explicit VisitationMap(ExploreConfig config);

    const ExploreConfig& config() const { return config_; }

    // Increments the agent's cell and every cell in the field-of-view
    // sector (radius fov_radius, half-angle fov_half_angle around yaw),
    // each at most once. Expands the grid first if the pose is outside.
    void mark(const Pose& pose);

    // Least-visited super-cell; ties go to the one whose center is
    // closest to `current`, then to the lowest row-major index.
    GoalSelection select_goal(double current_x, double current_y) const;

    // Grows the grid until (x, y) is interior. Existing counts keep
    // their world positions.
    void expand(double x, double y);

    bool in_bounds(double x, double y) const;
    std::int64_t count_at(double x, double y) const;

    int width() const { return width_; }
    int height() const { return height_; }
    int min_x() const { return min_x_; }
    int min_y() const { return min_y_; }
    std::int64_t total_marks() const { return total_marks_; }

private:
    std::int64_t& cell(int cx, int cy);
    void bump(int cx, int cy);

    ExploreConfig config_;
    int width_ = 0;
    int height_ = 0;
    int min_x_ = 0;  // world coordinate of cell column 0
    int min_y_ = 0;
    std::vector<std::int64_t> counts_;
    std::vector<std::int64_t> super_sums_;
    std::int64_t total_marks_ = 0;
};

struct CoverageStats {
    double coverage_percent = 0.0;
    double revisit_count = 0.0;
};

// Evaluation metrics over a trajectory of (x, y) positions. The map is
// divided into eval_grid x eval_grid cells; coverage is the percentage
// entered at least once. Revisit counts, for each cell occupied more
// than occupancy_threshold steps in total, the number of maximal
// contiguous occupancy runs minus one, averaged over qualifying cells.
CoverageStats coverage_and_revisits(std::span<const std::pair<double, double>> trajectory,
                                    double map_min_x, double map_min_y, double map_side,
                                    int eval_grid = 11,
                                    std::int64_t occupancy_threshold = 300);

}  // namespace pem
