#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pem/pose.hpp"

namespace pem {

enum class Terrain : std::uint8_t { flat, grass, sand, water, mountain, wall };

const char* terrain_name(Terrain t);

// Ticks consumed per move into the cell; wall is impassable.
inline double terrain_cost(Terrain t) {
    switch (t) {
        case Terrain::flat:
        case Terrain::grass:
        case Terrain::sand: return 1.0;
        case Terrain::mountain: return 3.0;
        case Terrain::water: return 4.0;
        case Terrain::wall: return std::numeric_limits<double>::infinity();
    }
    return std::numeric_limits<double>::infinity();
}

// Square grid of terrain cells covering [-side/2, side/2) on both axes.
// Out-of-bounds queries read as wall.
class TerrainGrid {
public:
    explicit TerrainGrid(int side, Terrain fill = Terrain::flat);

    int side() const { return side_; }
    int min_coord() const { return -side_ / 2; }
    int max_coord() const { return -side_ / 2 + side_ - 1; }

    Terrain at(int x, int y) const;
    void set(int x, int y, Terrain t);
    bool traversable(int x, int y) const { return at(x, y) != Terrain::wall; }
    double cost(int x, int y) const { return terrain_cost(at(x, y)); }

private:
    int side_;
    std::vector<Terrain> cells_;
};

struct PlanResult {
    bool reachable = false;
    std::vector<Cell> path;  // start cell first, goal cell last
    double cost = 0.0;
};

// Minimum-cost 8-connected path; entering a cell costs its terrain cost
// (x sqrt(2) diagonally), diagonal moves cannot cut wall corners.
// Deterministic: the open list breaks f-ties by lower heuristic, then
// (y, x) order. Throws std::invalid_argument if the start is on a wall.
PlanResult plan(const TerrainGrid& world, Cell start, Cell goal);

// Best-effort variant for exploration: when the goal is unreachable,
// returns the path to the reachable cell nearest to it (possibly the
// start itself). Never returns reachable = false.
PlanResult plan_toward(const TerrainGrid& world, Cell start, Cell goal);

// Distance-delta shaping plus the one-time success bonus of 100 on the
// transition that first brings the agent within the 3-block radius.
double step_reward(double prev_x, double prev_y, double next_x, double next_y,
                   double goal_x, double goal_y);

inline constexpr double kSuccessRadius = 3.0;

struct NavOutcome {
    std::vector<Cell> path;  // cells actually visited, start included
    bool reached = false;    // final position within kSuccessRadius of goal
    std::int64_t steps = 0;  // moves executed
    double cumulative_reward = 0.0;
};

// Plans and walks the path to the goal cell, accumulating step rewards;
// stops at max_steps. The success bonus of 100 is included exactly when
// the final position is within the success radius, so
//   cumulative_reward = dist(start, goal) - dist(end, goal) + 100 * reached.
// Replans if the grid changed underneath the path; aborts early (steps
// may be 0) when the goal is unreachable.
NavOutcome navigate(const TerrainGrid& world, Cell start, Cell goal,
                    std::int64_t max_steps);

// Per-episode success-weighted-by-path-length term:
// success * optimal / max(optimal, realized); average the terms over
// episodes for the aggregate metric.
double spl_term(double optimal_cost, double realized_cost, bool success);

}  // namespace pem
