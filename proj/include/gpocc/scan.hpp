#pragma once

#include <vector>

#include "gpocc/geometry.hpp"

namespace gpocc {

struct SensorPose {
    Point2 position;
    double heading{0.0};         // radians, world frame
    double fov_half_angle{M_PI}; // (0, pi]; pi = omnidirectional
    double r_max{5.0};           // meters, > 0
};

/// One lidar scan. Angles are in the sensor frame, strictly increasing and
/// evenly spaced; a range equal to r_max encodes a max-range miss.
struct SensorScan {
    SensorPose pose;
    std::vector<double> angles;
    std::vector<double> ranges;
    double noise_sigma{0.0};

    bool is_miss(std::size_t i) const { return ranges[i] >= pose.r_max; }
};

/// Hit points in the world frame; max-range misses are excluded.
std::vector<Point2> scan_to_points(const SensorScan& scan);

/// Measured range along a sensor-frame bearing, linearly interpolated
/// between the two adjacent beams (misses contribute r_max). Returns a
/// negative value when the bearing falls outside the angular FoV.
double range_at_bearing(const SensorScan& scan, double bearing);

}  // namespace gpocc
