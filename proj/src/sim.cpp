#include "gpocc/sim.hpp"

#include <cmath>
#include <iostream>
#include <random>
#include <sstream>

#include "gpocc/errors.hpp"
#include "gpocc/io_text.hpp"

namespace gpocc {

std::vector<Segment2> World::segments() const {
    std::vector<Segment2> segs;
    for (const auto& poly : polygons) {
        for (std::size_t i = 0; i < poly.size(); ++i)
            segs.push_back({poly[i], poly[(i + 1) % poly.size()]});
    }
    for (const auto& line : polylines) {
        for (std::size_t i = 0; i + 1 < line.size(); ++i) segs.push_back({line[i], line[i + 1]});
    }
    return segs;
}

void World::validate() const {
    for (const Segment2& s : segments()) {
        if (!(segment_length(s) > 0.0))
            throw IoError("World: zero-length obstacle segment");
        if (!is_finite(s.a) || !is_finite(s.b)) throw IoError("World: non-finite vertex");
    }
    if (bounds.empty()) throw IoError("World: empty bounds");
}

double raycast(const std::vector<Segment2>& segments, Point2 origin, double angle, double r_max) {
    const Point2 dir{std::cos(angle), std::sin(angle)};
    double best = r_max;
    for (const Segment2& seg : segments) {
        const Point2 v = seg.b - seg.a;
        const Point2 w = seg.a - origin;
        const double denom = cross(dir, v);
        if (std::abs(denom) < 1e-15) continue;  // parallel
        const double t = cross(w, v) / denom;
        const double u = cross(w, dir) / denom;
        if (t >= 0.0 && u >= -1e-12 && u <= 1.0 + 1e-12 && t < best) best = t;
    }
    return best;
}

std::vector<SensorScan> simulate_trajectory(const World& world,
                                            const std::vector<TrajectoryPose>& poses,
                                            const SensorModel& sensor, std::uint64_t seed) {
    if (sensor.n_rays < 8) throw ContractViolation("simulate_trajectory: n_rays must be >= 8");
    if (!(sensor.r_max > 0.0)) throw ContractViolation("simulate_trajectory: r_max must be > 0");
    if (!(sensor.fov_half_angle > 0.0 && sensor.fov_half_angle <= M_PI + 1e-12))
        throw ContractViolation("simulate_trajectory: fov_half_angle must be in (0, pi]");

    const auto segments = world.segments();
    const bool omni = sensor.fov_half_angle >= M_PI - 1e-9;
    const int n = sensor.n_rays;

    std::vector<double> angles(n);
    if (omni) {
        const double inc = 2.0 * M_PI / n;
        for (int k = 0; k < n; ++k) angles[k] = -M_PI + k * inc;
    } else {
        const double inc = 2.0 * sensor.fov_half_angle / (n - 1);
        for (int k = 0; k < n; ++k) angles[k] = -sensor.fov_half_angle + k * inc;
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double hit_cap = std::nextafter(sensor.r_max, 0.0);

    std::vector<SensorScan> scans;
    scans.reserve(poses.size());
    for (const TrajectoryPose& tp : poses) {
        if (!world.bounds.contains(tp.position))
            std::cerr << "gpocc: warning: pose (" << tp.position.x << ", " << tp.position.y
                      << ") outside world bounds\n";
        SensorScan scan;
        scan.pose = {tp.position, tp.heading, sensor.fov_half_angle, sensor.r_max};
        scan.angles = angles;
        scan.noise_sigma = sensor.noise_sigma;
        scan.ranges.resize(angles.size());
        for (std::size_t k = 0; k < angles.size(); ++k) {
            const double truth =
                raycast(segments, tp.position, tp.heading + angles[k], sensor.r_max);
            if (truth >= sensor.r_max) {
                scan.ranges[k] = sensor.r_max;  // miss, never perturbed
                continue;
            }
            double r = truth;
            if (sensor.noise_sigma > 0.0) {
                r += sensor.noise_sigma * gauss(rng);
                r = std::clamp(r, 1e-6, hit_cap);  // a noisy hit stays a hit
            }
            scan.ranges[k] = r;
        }
        scans.push_back(std::move(scan));
    }
    return scans;
}

World load_world(std::istream& in) {
    World world;
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (tag != "gpocc-world" || version != 1) throw IoError("load_world: bad header");
    in >> tag >> world.bounds.min.x >> world.bounds.min.y >> world.bounds.max.x >>
        world.bounds.max.y;
    if (!in || tag != "bounds") throw IoError("load_world: missing bounds");

    const auto read_chains = [&](const char* name, std::vector<std::vector<Point2>>& out) {
        std::size_t count = 0;
        in >> tag >> count;
        if (!in || tag != name) throw IoError(std::string("load_world: missing ") + name);
        out.resize(count);
        for (auto& chain : out) {
            std::size_t verts = 0;
            in >> verts;
            chain.resize(verts);
            for (Point2& p : chain) in >> p.x >> p.y;
            if (!in) throw IoError("load_world: truncated vertex list");
        }
    };
    read_chains("polygons", world.polygons);
    read_chains("polylines", world.polylines);
    world.validate();
    return world;
}

void save_world(const World& world, std::ostream& out) {
    out << "gpocc-world 1\n";
    out << "bounds " << io::format_double(world.bounds.min.x) << ' '
        << io::format_double(world.bounds.min.y) << ' ' << io::format_double(world.bounds.max.x)
        << ' ' << io::format_double(world.bounds.max.y) << "\n";
    const auto write_chains = [&](const char* name, const std::vector<std::vector<Point2>>& chains) {
        out << name << ' ' << chains.size() << "\n";
        for (const auto& chain : chains) {
            out << chain.size();
            for (const Point2& p : chain)
                out << ' ' << io::format_double(p.x) << ' ' << io::format_double(p.y);
            out << "\n";
        }
    };
    write_chains("polygons", world.polygons);
    write_chains("polylines", world.polylines);
}

std::vector<TrajectoryPose> load_trajectory(std::istream& in) {
    std::vector<TrajectoryPose> poses;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        TrajectoryPose tp;
        row >> tp.position.x >> tp.position.y >> tp.heading;
        if (!row) throw IoError("load_trajectory: expected 'x y theta' per line");
        poses.push_back(tp);
    }
    return poses;
}

void save_scans(const std::vector<SensorScan>& scans, std::ostream& out) {
    for (const SensorScan& s : scans) {
        if (s.angles.size() < 2) throw ContractViolation("save_scans: need >= 2 rays");
        const double inc = s.angles[1] - s.angles[0];
        out << io::format_double(s.pose.position.x) << ' ' << io::format_double(s.pose.position.y)
            << ' ' << io::format_double(s.pose.heading) << ' ' << io::format_double(s.angles.front())
            << ' ' << io::format_double(inc) << ' ' << io::format_double(s.pose.r_max) << ' '
            << io::format_double(s.pose.fov_half_angle) << ' ' << s.ranges.size();
        for (const double r : s.ranges) out << ' ' << io::format_double(r);
        out << "\n";
    }
}

std::vector<SensorScan> load_scans(std::istream& in) {
    std::vector<SensorScan> scans;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        SensorScan s;
        double angle_min = 0.0, inc = 0.0;
        std::size_t n = 0;
        row >> s.pose.position.x >> s.pose.position.y >> s.pose.heading >> angle_min >> inc >>
            s.pose.r_max >> s.pose.fov_half_angle >> n;
        if (!row) {
            std::ostringstream msg;
            msg << "load_scans: bad record header at line " << line_no;
            throw IoError(msg.str());
        }
        s.angles.resize(n);
        s.ranges.resize(n);
        for (std::size_t i = 0; i < n; ++i) s.angles[i] = angle_min + static_cast<double>(i) * inc;
        for (std::size_t i = 0; i < n; ++i) row >> s.ranges[i];
        if (!row) {
            std::ostringstream msg;
            msg << "load_scans: truncated ranges at line " << line_no << " (expected " << n << ")";
            throw IoError(msg.str());
        }
        scans.push_back(std::move(s));
    }
    return scans;
}

}  // namespace gpocc
