#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gpocc/geometry.hpp"
#include "gpocc/scan.hpp"

namespace gpocc {

/// Polygon world for the lidar simulator. Polygons are closed (last vertex
/// connects back to the first), polylines are open wall chains.
struct World {
    std::vector<std::vector<Point2>> polygons;
    std::vector<std::vector<Point2>> polylines;
    Box2 bounds;

    std::vector<Segment2> segments() const;
    void validate() const;  // positive-length segments, sane bounds
};

World load_world(std::istream& in);
void save_world(const World& world, std::ostream& out);

/// Distance to the nearest obstacle along the ray, or r_max when nothing
/// is hit within r_max.
double raycast(const std::vector<Segment2>& segments, Point2 origin, double angle, double r_max);

struct TrajectoryPose {
    Point2 position;
    double heading{0.0};
};

std::vector<TrajectoryPose> load_trajectory(std::istream& in);

struct SensorModel {
    int n_rays{720};
    double fov_half_angle{M_PI};
    double r_max{5.0};
    double noise_sigma{0.0};
};

/// Deterministic scan generation: evenly spaced bearings over the FoV, hit
/// ranges perturbed by zero-mean Gaussian noise (clamped so a hit stays a
/// hit), misses never perturbed. Identical seeds give bit-identical scans.
std::vector<SensorScan> simulate_trajectory(const World& world,
                                            const std::vector<TrajectoryPose>& poses,
                                            const SensorModel& sensor, std::uint64_t seed);

// Line-delimited scan log. Field order per record:
//   x y theta angle_min angle_increment r_max fov_half_angle n r_0 ... r_{n-1}
void save_scans(const std::vector<SensorScan>& scans, std::ostream& out);
std::vector<SensorScan> load_scans(std::istream& in);

}  // namespace gpocc
