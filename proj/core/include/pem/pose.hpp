#pragma once

#include <cmath>
#include <cstdint>

namespace pem {

// Normalizes an angle in degrees to [-180, 180).
inline double normalize_yaw(double yaw) {
    double y = std::fmod(yaw + 180.0, 360.0);
    if (y < 0.0) y += 360.0;
    return y - 180.0;
}

// Agent pose. Coordinates are in blocks, relative to the episode start
// (worlds spawn the agent at the origin). yaw 0 faces +x, degrees, CCW.
// coord_z and pitch are carried for camera bookkeeping; place assignment
// and navigation only ever look at (x, y, yaw).
struct Pose {
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;    // [-180, 180)
    double pitch = 0.0;
    double z = 0.0;

    friend bool operator==(const Pose&, const Pose&) = default;
};

inline double distance2d(double ax, double ay, double bx, double by) {
    const double dx = ax - bx, dy = ay - by;
    return std::sqrt(dx * dx + dy * dy);
}

inline double distance2d(const Pose& a, const Pose& b) {
    return distance2d(a.x, a.y, b.x, b.y);
}

// Integer grid cell.
struct Cell {
    int x = 0;
    int y = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

}  // namespace pem
