#include "gpocc/scan.hpp"

#include <algorithm>
#include <cmath>

#include "gpocc/errors.hpp"

namespace gpocc {

std::vector<Point2> scan_to_points(const SensorScan& scan) {
    std::vector<Point2> points;
    points.reserve(scan.ranges.size());
    for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
        if (scan.is_miss(i)) continue;
        const double a = scan.pose.heading + scan.angles[i];
        points.push_back(scan.pose.position + scan.ranges[i] * Point2{std::cos(a), std::sin(a)});
    }
    return points;
}

double range_at_bearing(const SensorScan& scan, double bearing) {
    if (scan.angles.empty()) throw ContractViolation("range_at_bearing: scan has no rays");
    bearing = wrap_angle(bearing);
    const double fov = scan.pose.fov_half_angle;
    if (std::abs(bearing) > fov + 1e-12) return -1.0;

    const auto range_or_max = [&](std::size_t i) {
        return scan.is_miss(i) ? scan.pose.r_max : scan.ranges[i];
    };

    const bool omni = fov >= M_PI - 1e-9;
    if (bearing <= scan.angles.front() || bearing >= scan.angles.back()) {
        if (!omni) {
            // Sector scans sample the FoV edges; clamp to the outermost beam.
            return bearing <= scan.angles.front() ? range_or_max(0)
                                                  : range_or_max(scan.angles.size() - 1);
        }
        // Wrap across +-pi between the last and first beam.
        const double gap = (scan.angles.front() + 2.0 * M_PI) - scan.angles.back();
        double offset = bearing - scan.angles.back();
        if (offset < 0.0) offset += 2.0 * M_PI;
        const double t = gap > 0.0 ? offset / gap : 0.0;
        return (1.0 - t) * range_or_max(scan.angles.size() - 1) + t * range_or_max(0);
    }

    const auto it = std::upper_bound(scan.angles.begin(), scan.angles.end(), bearing);
    const std::size_t hi = static_cast<std::size_t>(it - scan.angles.begin());
    const std::size_t lo = hi - 1;
    const double span = scan.angles[hi] - scan.angles[lo];
    const double t = span > 0.0 ? (bearing - scan.angles[lo]) / span : 0.0;
    return (1.0 - t) * range_or_max(lo) + t * range_or_max(hi);
}

}  // namespace gpocc
