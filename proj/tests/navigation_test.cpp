#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <queue>

#include "pem/navigation.hpp"
#include "pem/rng.hpp"

using namespace pem;

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Independent shortest-path oracle: plain Dijkstra with a linear-scan
// extract-min, over the same 8-connected, no-corner-cutting graph.
double dijkstra_cost(const TerrainGrid& w, Cell start, Cell goal) {
    const int side = w.side(), min = w.min_coord();
    const auto idx = [&](Cell c) { return (c.y - min) * side + (c.x - min); };
    std::vector<double> dist(static_cast<std::size_t>(side) * side,
                             std::numeric_limits<double>::infinity());
    std::vector<bool> done(dist.size(), false);
    dist[static_cast<std::size_t>(idx(start))] = 0.0;
    const int dxs[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    const int dys[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    for (;;) {
        int u = -1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < dist.size(); ++i)
            if (!done[i] && dist[i] < best) {
                best = dist[i];
                u = static_cast<int>(i);
            }
        if (u < 0) break;
        done[static_cast<std::size_t>(u)] = true;
        const Cell c{u % side + min, u / side + min};
        for (int k = 0; k < 8; ++k) {
            const Cell n{c.x + dxs[k], c.y + dys[k]};
            if (n.x < min || n.y < min || n.x >= min + side || n.y >= min + side) continue;
            if (!w.traversable(n.x, n.y)) continue;
            const bool diag = k >= 4;
            if (diag && (!w.traversable(c.x + dxs[k], c.y) || !w.traversable(c.x, c.y + dys[k])))
                continue;
            const double nd = best + w.cost(n.x, n.y) * (diag ? kSqrt2 : 1.0);
            if (nd < dist[static_cast<std::size_t>(idx(n))])
                dist[static_cast<std::size_t>(idx(n))] = nd;
        }
    }
    return dist[static_cast<std::size_t>(idx(goal))];
}

TerrainGrid random_map(Rng& rng, int side) {
    TerrainGrid w(side);
    const Terrain kinds[5] = {Terrain::flat, Terrain::grass, Terrain::sand, Terrain::water,
                              Terrain::mountain};
    for (int y = w.min_coord(); y <= w.max_coord(); ++y)
        for (int x = w.min_coord(); x <= w.max_coord(); ++x) {
            const std::uint64_t roll = rng.next_below(10);
            if (roll < 6)
                w.set(x, y, kinds[rng.next_below(5)]);
            else if (roll < 7)
                w.set(x, y, Terrain::wall);
        }
    return w;
}

double path_cost(const TerrainGrid& w, const std::vector<Cell>& path) {
    double cost = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const bool diag = path[i].x != path[i - 1].x && path[i].y != path[i - 1].y;
        cost += w.cost(path[i].x, path[i].y) * (diag ? kSqrt2 : 1.0);
    }
    return cost;
}

}  // namespace

TEST_CASE("plan on an open grid walks straight") {
    TerrainGrid w(20);
    const PlanResult p = plan(w, {0, 0}, {5, 0});
    REQUIRE(p.reachable);
    CHECK(p.path.size() == 6);
    CHECK(p.cost == doctest::Approx(5.0));
    CHECK(p.path.front() == Cell{0, 0});
    CHECK(p.path.back() == Cell{5, 0});
}

TEST_CASE("plan reports enclosed goals as unreachable") {
    TerrainGrid w(20);
    for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
            if (dx != 0 || dy != 0) w.set(5 + dx, 5 + dy, Terrain::wall);
    const PlanResult p = plan(w, {0, 0}, {5, 5});
    CHECK(!p.reachable);
    CHECK_THROWS_AS(plan(w, {5, 4}, {0, 0}), std::invalid_argument);  // start on wall
}

TEST_CASE("plan matches the independent shortest-path oracle on random maps") {
    Rng rng(404);
    int compared = 0;
    for (int trial = 0; trial < 200; ++trial) {
        TerrainGrid w = random_map(rng, 24);
        w.set(-10, -10, Terrain::flat);
        w.set(9, 9, Terrain::grass);
        const PlanResult p = plan(w, {-10, -10}, {9, 9});
        const double oracle = dijkstra_cost(w, {-10, -10}, {9, 9});
        if (!p.reachable) {
            CHECK(!std::isfinite(oracle));
            continue;
        }
        ++compared;
        CHECK(p.cost == doctest::Approx(oracle).epsilon(1e-9));
        CHECK(path_cost(w, p.path) == doctest::Approx(p.cost).epsilon(1e-9));
    }
    CHECK(compared > 50);  // most random maps connect the corners
}

TEST_CASE("step_reward is the distance delta plus the crossing bonus") {
    CHECK(step_reward(10, 0, 9, 0, 0, 0) == doctest::Approx(1.0));
    CHECK(step_reward(4, 0, 3, 0, 0, 0) == doctest::Approx(101.0));
    CHECK(step_reward(5, 5, 5, 5, 0, 0) == doctest::Approx(0.0));
    // No repeat bonus once inside the radius.
    CHECK(step_reward(3, 0, 2, 0, 0, 0) == doctest::Approx(1.0));
}

TEST_CASE("navigate walks the plan and scores the success bonus") {
    TerrainGrid w(30);
    SUBCASE("reachable goal with a generous budget") {
        const NavOutcome nav = navigate(w, {0, 0}, {7, 0}, 1000);
        CHECK(nav.reached);
        CHECK(nav.steps == 7);
        CHECK(nav.cumulative_reward == doctest::Approx(7.0 + 100.0));
    }
    SUBCASE("unreachable goal aborts") {
        TerrainGrid walled(30);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                if (dx != 0 || dy != 0) walled.set(8 + dx, 8 + dy, Terrain::wall);
        const NavOutcome nav = navigate(walled, {0, 0}, {8, 8}, 1000);
        CHECK(!nav.reached);
        CHECK(nav.steps == 0);
    }
    SUBCASE("success boundary sits at exactly 3 blocks") {
        // Walk toward (10, 0) with tight budgets: final distances 4, 3,
        // and 2 blocks straddle the success radius.
        for (const auto& [budget, expect] :
             {std::pair<std::int64_t, bool>{6, false}, {7, true}, {8, true}}) {
            const NavOutcome nav = navigate(w, {0, 0}, {10, 0}, budget);
            CHECK(nav.reached == expect);
            const double end_dist = distance2d(nav.path.back().x, nav.path.back().y, 10, 0);
            CHECK(nav.cumulative_reward ==
                  doctest::Approx(10.0 - end_dist + (expect ? 100.0 : 0.0)).epsilon(1e-9));
        }
    }
}

TEST_CASE("navigate cost matches plan cost on random static maps") {
    Rng rng(505);
    int compared = 0;
    for (int trial = 0; trial < 200; ++trial) {
        TerrainGrid w = random_map(rng, 20);
        w.set(-8, -8, Terrain::flat);
        w.set(7, 7, Terrain::grass);
        const PlanResult p = plan(w, {-8, -8}, {7, 7});
        if (!p.reachable) continue;
        ++compared;
        const NavOutcome nav = navigate(w, {-8, -8}, {7, 7}, 100000);
        CHECK(path_cost(w, nav.path) == doctest::Approx(p.cost).epsilon(1e-9));
        CHECK(nav.reached);
    }
    CHECK(compared > 50);
}

TEST_CASE("reward telescoping on random trajectories") {
    Rng rng(606);
    for (int trial = 0; trial < 100; ++trial) {
        const double gx = static_cast<double>(rng.next_below(20)) - 10.0;
        const double gy = static_cast<double>(rng.next_below(20)) - 10.0;
        double x = 0.0, y = 0.0;
        double deltas = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double nx = x + static_cast<double>(rng.next_below(3)) - 1.0;
            const double ny = y + static_cast<double>(rng.next_below(3)) - 1.0;
            deltas += distance2d(x, y, gx, gy) - distance2d(nx, ny, gx, gy);
            x = nx;
            y = ny;
        }
        const double expected = distance2d(0.0, 0.0, gx, gy) - distance2d(x, y, gx, gy);
        CHECK(deltas == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("spl terms follow the success-weighted path-length shape") {
    CHECK(spl_term(10.0, 10.0, true) == doctest::Approx(1.0));
    CHECK(spl_term(10.0, 20.0, true) == doctest::Approx(0.5));
    CHECK(spl_term(10.0, 5.0, true) == doctest::Approx(1.0));  // never above 1
    CHECK(spl_term(10.0, 10.0, false) == 0.0);

    // An on-plan navigation scores a perfect term.
    TerrainGrid w(20);
    const PlanResult p = plan(w, {0, 0}, {6, 4});
    const NavOutcome nav = navigate(w, {0, 0}, {6, 4}, 1000);
    CHECK(spl_term(p.cost, path_cost(w, nav.path), nav.reached) == doctest::Approx(1.0));
}

TEST_CASE("plan_toward reaches the nearest reachable cell when blocked") {
    TerrainGrid w(20);
    for (int y = w.min_coord(); y <= w.max_coord(); ++y) w.set(4, y, Terrain::wall);
    const PlanResult p = plan_toward(w, {0, 0}, {8, 0});
    REQUIRE(p.reachable);
    CHECK(p.path.back() == Cell{3, 0});  // up against the wall, closest to the goal
    // And it degrades to {start} when nothing is closer.
    TerrainGrid boxed(10);
    for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
            if (dx != 0 || dy != 0) boxed.set(dx, dy, Terrain::wall);
    const PlanResult q = plan_toward(boxed, {0, 0}, {4, 4});
    REQUIRE(q.reachable);
    CHECK(q.path.back() == Cell{0, 0});
}
