#include "pem/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace pem {

const char* terrain_name(Terrain t) {
    switch (t) {
        case Terrain::flat: return "flat";
        case Terrain::grass: return "grass";
        case Terrain::sand: return "sand";
        case Terrain::water: return "water";
        case Terrain::mountain: return "mountain";
        case Terrain::wall: return "wall";
    }
    return "?";
}

TerrainGrid::TerrainGrid(int side, Terrain fill) : side_(side) {
    if (side < 1) throw std::invalid_argument("terrain: side must be >= 1");
    cells_.assign(static_cast<std::size_t>(side) * side, fill);
}

Terrain TerrainGrid::at(int x, int y) const {
    const int cx = x - min_coord();
    const int cy = y - min_coord();
    if (cx < 0 || cy < 0 || cx >= side_ || cy >= side_) return Terrain::wall;
    return cells_[static_cast<std::size_t>(cy) * side_ + cx];
}

void TerrainGrid::set(int x, int y, Terrain t) {
    const int cx = x - min_coord();
    const int cy = y - min_coord();
    if (cx < 0 || cy < 0 || cx >= side_ || cy >= side_)
        throw std::out_of_range("terrain: set outside grid");
    cells_[static_cast<std::size_t>(cy) * side_ + cx] = t;
}

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

double octile(Cell a, Cell b) {
    const double dx = std::abs(a.x - b.x);
    const double dy = std::abs(a.y - b.y);
    return std::max(dx, dy) + (kSqrt2 - 1.0) * std::min(dx, dy);
}

struct SearchGrid {
    int min, side;
    std::vector<double> dist;
    std::vector<int> parent;  // index of predecessor, -1 at start

    SearchGrid(const TerrainGrid& w)
        : min(w.min_coord()), side(w.side()),
          dist(static_cast<std::size_t>(side) * side,
               std::numeric_limits<double>::infinity()),
          parent(static_cast<std::size_t>(side) * side, -1) {}

    int index(Cell c) const { return (c.y - min) * side + (c.x - min); }
    Cell cell(int idx) const { return {idx % side + min, idx / side + min}; }
    bool contains(Cell c) const {
        return c.x >= min && c.y >= min && c.x < min + side && c.y < min + side;
    }
};

struct QueueEntry {
    double f;
    double h;
    int y, x;
    int idx;

    bool operator>(const QueueEntry& o) const {
        if (f != o.f) return f > o.f;
        if (h != o.h) return h > o.h;
        if (y != o.y) return y > o.y;
        return x > o.x;
    }
};

std::vector<Cell> backtrack(const SearchGrid& g, int idx) {
    std::vector<Cell> path;
    while (idx >= 0) {
        path.push_back(g.cell(idx));
        idx = g.parent[static_cast<std::size_t>(idx)];
    }
    std::reverse(path.begin(), path.end());
    return path;
}

// Shared best-first search. With use_heuristic the search is A* toward
// `goal` and stops there; otherwise it is Dijkstra over the whole
// reachable component.
void search(const TerrainGrid& world, SearchGrid& g, Cell start, Cell goal,
            bool use_heuristic) {
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
    g.dist[static_cast<std::size_t>(g.index(start))] = 0.0;
    open.push({use_heuristic ? octile(start, goal) : 0.0,
               use_heuristic ? octile(start, goal) : 0.0, start.y, start.x,
               g.index(start)});

    while (!open.empty()) {
        const QueueEntry top = open.top();
        open.pop();
        const Cell c = g.cell(top.idx);
        const double d = g.dist[static_cast<std::size_t>(top.idx)];
        if (top.f > d + top.h + 1e-12) continue;  // stale entry
        if (use_heuristic && c == goal) return;

        for (int k = 0; k < 8; ++k) {
            const Cell n{c.x + kDx[k], c.y + kDy[k]};
            if (!g.contains(n) || !world.traversable(n.x, n.y)) continue;
            const bool diagonal = k >= 4;
            if (diagonal &&
                (!world.traversable(c.x + kDx[k], c.y) || !world.traversable(c.x, c.y + kDy[k])))
                continue;  // no corner cutting
            const double step = world.cost(n.x, n.y) * (diagonal ? kSqrt2 : 1.0);
            const double nd = d + step;
            const int ni = g.index(n);
            if (nd < g.dist[static_cast<std::size_t>(ni)] - 1e-12) {
                g.dist[static_cast<std::size_t>(ni)] = nd;
                g.parent[static_cast<std::size_t>(ni)] = top.idx;
                const double h = use_heuristic ? octile(n, goal) : 0.0;
                open.push({nd + h, h, n.y, n.x, ni});
            }
        }
    }
}

}  // namespace

PlanResult plan(const TerrainGrid& world, Cell start, Cell goal) {
    if (!world.traversable(start.x, start.y))
        throw std::invalid_argument("plan: start cell is not traversable");
    PlanResult out;
    SearchGrid g(world);
    if (!g.contains(goal) || !world.traversable(goal.x, goal.y)) return out;

    search(world, g, start, goal, true);
    const int gi = g.index(goal);
    if (!std::isfinite(g.dist[static_cast<std::size_t>(gi)])) return out;
    out.reachable = true;
    out.cost = g.dist[static_cast<std::size_t>(gi)];
    out.path = backtrack(g, gi);
    return out;
}

PlanResult plan_toward(const TerrainGrid& world, Cell start, Cell goal) {
    if (!world.traversable(start.x, start.y))
        throw std::invalid_argument("plan_toward: start cell is not traversable");
    if (PlanResult direct = plan(world, start, goal); direct.reachable) return direct;

    SearchGrid g(world);
    search(world, g, start, goal, false);

    int best = g.index(start);
    double best_goal_dist = distance2d(start.x, start.y, goal.x, goal.y);
    double best_cost = 0.0;
    for (int idx = 0; idx < g.side * g.side; ++idx) {
        const double d = g.dist[static_cast<std::size_t>(idx)];
        if (!std::isfinite(d)) continue;
        const Cell c = g.cell(idx);
        const double gd = distance2d(c.x, c.y, goal.x, goal.y);
        if (gd < best_goal_dist - 1e-12 ||
            (std::abs(gd - best_goal_dist) <= 1e-12 && d < best_cost - 1e-12)) {
            best = idx;
            best_goal_dist = gd;
            best_cost = d;
        }
    }
    PlanResult out;
    out.reachable = true;
    out.cost = g.dist[static_cast<std::size_t>(best)];
    out.path = backtrack(g, best);
    return out;
}

double spl_term(double optimal_cost, double realized_cost, bool success) {
    if (!success) return 0.0;
    if (optimal_cost <= 0.0) return 1.0;
    return optimal_cost / std::max(optimal_cost, realized_cost);
}

double step_reward(double prev_x, double prev_y, double next_x, double next_y,
                   double goal_x, double goal_y) {
    const double before = distance2d(prev_x, prev_y, goal_x, goal_y);
    const double after = distance2d(next_x, next_y, goal_x, goal_y);
    double reward = before - after;
    if (before > kSuccessRadius && after <= kSuccessRadius) reward += 100.0;
    return reward;
}

NavOutcome navigate(const TerrainGrid& world, Cell start, Cell goal,
                    std::int64_t max_steps) {
    if (max_steps < 1) throw std::invalid_argument("navigate: max_steps must be >= 1");
    NavOutcome out;
    out.path.push_back(start);

    Cell pos = start;
    PlanResult p = plan(world, pos, goal);
    std::size_t next = 1;
    while (out.steps < max_steps) {
        if (!p.reachable) break;
        if (next >= p.path.size()) break;  // arrived at goal cell
        Cell step_to = p.path[next];
        if (!world.traversable(step_to.x, step_to.y)) {
            // World changed underneath the plan; replan from here.
            p = plan(world, pos, goal);
            next = 1;
            continue;
        }
        out.cumulative_reward +=
            distance2d(pos.x, pos.y, goal.x, goal.y) -
            distance2d(step_to.x, step_to.y, goal.x, goal.y);
        pos = step_to;
        out.path.push_back(pos);
        ++out.steps;
        ++next;
    }

    out.reached = distance2d(pos.x, pos.y, goal.x, goal.y) <= kSuccessRadius;
    if (out.reached) out.cumulative_reward += 100.0;
    return out;
}

}  // namespace pem
