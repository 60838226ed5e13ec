#include "gpocc/prior.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <ostream>

#include "gpocc/errors.hpp"
#include "gpocc/io_text.hpp"
#include "gpocc/simd/kernels.hpp"

namespace gpocc {

void PriorParams::validate() const {
    if (!(level_set_c > 0.0)) throw ContractViolation("PriorParams: level_set_c must be > 0");
    if (!(lengthscale > 0.0)) throw ContractViolation("PriorParams: lengthscale must be > 0");
    if (!(clearance > 0.0)) throw ContractViolation("PriorParams: clearance must be > 0");
    if (!(r_min > 0.0 && r_min < r_max_bubble))
        throw ContractViolation("PriorParams: need 0 < r_min < r_max_bubble");
    if (boundary_samples < 8) throw ContractViolation("PriorParams: boundary_samples must be >= 8");
    if (!(overlap_factor > 0.0 && overlap_factor < 1.0))
        throw ContractViolation("PriorParams: overlap_factor must be in (0, 1)");
    if (!(prior_floor_eps > 0.0)) throw ContractViolation("PriorParams: prior_floor_eps must be > 0");
}

double PriorParams::pruning_radius(double r_effective) const {
    return r_effective + lengthscale * std::log(level_set_c / prior_floor_eps);
}

double gamma_scale(double r_effective, const PriorParams& params) {
    if (!(r_effective >= 0.0)) throw ContractViolation("gamma_scale: r_effective must be >= 0");
    return params.level_set_c * std::exp(r_effective / params.lengthscale);
}

double pose_prior_mean(Point2 x, std::span<const SensorPose> poses, const PriorParams& params) {
    if (poses.empty()) return 0.0;
    thread_local std::vector<double> sx, sy, sg;
    sx.clear();
    sy.clear();
    sg.clear();
    for (const SensorPose& pose : poses) {
        const double prune = params.pruning_radius(pose.r_max);
        if (squared_distance(x, pose.position) > prune * prune) continue;
        sx.push_back(pose.position.x);
        sy.push_back(pose.position.y);
        sg.push_back(gamma_scale(pose.r_max, params));
    }
    if (sx.empty()) return 0.0;
    const double m = simd::active().max_scaled_kernel(sx.data(), sy.data(), sg.data(), sx.size(),
                                                      x.x, x.y, 1.0 / params.lengthscale);
    return std::max(m, 0.0);
}

BubbleCoverage::BubbleCoverage(double grid_cell) : grid_cell_(grid_cell) {
    if (!(grid_cell > 0.0)) throw ContractViolation("BubbleCoverage: grid cell must be > 0");
}

std::int64_t BubbleCoverage::grid_key(double v) const {
    return static_cast<std::int64_t>(std::floor(v / grid_cell_));
}

std::uint64_t BubbleCoverage::grid_cell_key(Point2 p) const {
    const auto ux = static_cast<std::uint64_t>(static_cast<std::uint32_t>(grid_key(p.x)));
    const auto uy = static_cast<std::uint64_t>(static_cast<std::uint32_t>(grid_key(p.y)));
    return (ux << 32) | uy;
}

std::uint32_t BubbleCoverage::add(const Bubble& bubble, const PriorParams& params) {
    if (!(bubble.radius > 0.0)) throw ContractViolation("BubbleCoverage::add: radius must be > 0");
    const auto id = static_cast<std::uint32_t>(xs_.size());
    xs_.push_back(bubble.center.x);
    ys_.push_back(bubble.center.y);
    radii_.push_back(bubble.radius);
    gammas_.push_back(gamma_scale(bubble.radius + 2.0 * params.clearance, params));
    states_.push_back(bubble.state);
    grid_[grid_cell_key(bubble.center)].push_back(id);
    max_radius_ = std::max(max_radius_, bubble.radius);
    return id;
}

Bubble BubbleCoverage::bubble(std::size_t id) const {
    return {{xs_[id], ys_[id]}, radii_[id], states_[id]};
}

std::vector<std::uint32_t> BubbleCoverage::gather(Point2 p, double radius) const {
    std::vector<std::uint32_t> ids;
    if (empty()) return ids;
    const std::int64_t x0 = grid_key(p.x - radius), x1 = grid_key(p.x + radius);
    const std::int64_t y0 = grid_key(p.y - radius), y1 = grid_key(p.y + radius);
    const double r2 = radius * radius;
    for (std::int64_t gx = x0; gx <= x1; ++gx) {
        for (std::int64_t gy = y0; gy <= y1; ++gy) {
            const auto ux = static_cast<std::uint64_t>(static_cast<std::uint32_t>(gx));
            const auto uy = static_cast<std::uint64_t>(static_cast<std::uint32_t>(gy));
            const auto it = grid_.find((ux << 32) | uy);
            if (it == grid_.end()) continue;
            for (const std::uint32_t id : it->second) {
                const double dx = p.x - xs_[id];
                const double dy = p.y - ys_[id];
                if (dx * dx + dy * dy <= r2) ids.push_back(id);
            }
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

double BubbleCoverage::prior_mean(Point2 x, const PriorParams& params) const {
    if (empty()) return 0.0;
    const double prune = params.pruning_radius(params.r_max_bubble + 2.0 * params.clearance);
    thread_local std::vector<double> bx, by, bg;
    bx.clear();
    by.clear();
    bg.clear();
    const std::int64_t x0 = grid_key(x.x - prune), x1 = grid_key(x.x + prune);
    const std::int64_t y0 = grid_key(x.y - prune), y1 = grid_key(x.y + prune);
    const double r2 = prune * prune;
    for (std::int64_t gx = x0; gx <= x1; ++gx) {
        for (std::int64_t gy = y0; gy <= y1; ++gy) {
            const auto ux = static_cast<std::uint64_t>(static_cast<std::uint32_t>(gx));
            const auto uy = static_cast<std::uint64_t>(static_cast<std::uint32_t>(gy));
            const auto it = grid_.find((ux << 32) | uy);
            if (it == grid_.end()) continue;
            for (const std::uint32_t id : it->second) {
                const double dx = x.x - xs_[id];
                const double dy = x.y - ys_[id];
                if (dx * dx + dy * dy <= r2) {
                    bx.push_back(xs_[id]);
                    by.push_back(ys_[id]);
                    bg.push_back(gammas_[id]);
                }
            }
        }
    }
    if (bx.empty()) return 0.0;
    const double m = simd::active().max_scaled_kernel(bx.data(), by.data(), bg.data(), bx.size(),
                                                      x.x, x.y, 1.0 / params.lengthscale);
    return std::max(m, 0.0);
}

void BubbleCoverage::save(std::ostream& out) const {
    out << "gpocc-coverage 1\n";
    out << "bubbles " << size() << "\n";
    for (std::size_t i = 0; i < size(); ++i) {
        out << io::format_double(xs_[i]) << ' ' << io::format_double(ys_[i]) << ' '
            << io::format_double(radii_[i]) << ' '
            << (states_[i] == BubbleState::active ? 'a' : 'f') << "\n";
    }
}

BubbleCoverage BubbleCoverage::load(std::istream& in, const PriorParams& params) {
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "gpocc-coverage" || version != 1) throw IoError("BubbleCoverage::load: bad header");
    std::string tag;
    std::size_t count = 0;
    in >> tag >> count;
    if (tag != "bubbles") throw IoError("BubbleCoverage::load: missing bubble count");
    BubbleCoverage coverage;
    for (std::size_t i = 0; i < count; ++i) {
        Bubble b;
        char state = 0;
        in >> b.center.x >> b.center.y >> b.radius >> state;
        if (!in) throw IoError("BubbleCoverage::load: truncated bubble table");
        b.state = state == 'a' ? BubbleState::active : BubbleState::fixed;
        coverage.add(b, params);
    }
    return coverage;
}

bool fov_contains(const SensorScan& scan, Point2 x, double margin) {
    const Point2 d = x - scan.pose.position;
    const double dist = norm(d);
    const double bearing =
        dist < 1e-12 ? 0.0 : wrap_angle(std::atan2(d.y, d.x) - scan.pose.heading);
    const double range = range_at_bearing(scan, bearing);
    if (range < 0.0) return false;  // outside the angular FoV
    return dist + margin <= range;
}

std::vector<std::uint32_t> reactivate_for_scan(BubbleCoverage& coverage, const SensorScan& scan) {
    std::vector<std::uint32_t> requeued;
    const double bound = scan.pose.r_max + coverage.max_radius();
    for (const std::uint32_t id : coverage.gather(scan.pose.position, bound)) {
        const Bubble b = coverage.bubble(id);
        if (b.state != BubbleState::fixed) continue;
        if (distance(b.center, scan.pose.position) <= scan.pose.r_max + b.radius) {
            coverage.set_state(id, BubbleState::active);
            requeued.push_back(id);
        }
    }
    return requeued;
}

GrowthResult grow_bubbles(BubbleCoverage& coverage, const SensorScan& scan,
                          const VoxelStore& store, const PriorParams& params) {
    params.validate();
    GrowthResult result;
    const Point2 s = scan.pose.position;

    reactivate_for_scan(coverage, scan);

    std::deque<std::uint32_t> queue;
    std::uint32_t seed_id = 0;
    bool has_seed = false;

    // Seed at the sensor position unless an existing bubble already contains it.
    bool contained = false;
    for (const std::uint32_t id : coverage.gather(s, coverage.max_radius())) {
        const Bubble b = coverage.bubble(id);
        if (distance(b.center, s) <= b.radius) {
            contained = true;
            break;
        }
    }
    if (!contained) {
        const double slack = store.edf(s) - params.clearance;
        if (slack < params.r_min) {
            result.seed_failed = true;
        } else {
            const double radius = std::clamp(slack, params.r_min, params.r_max_bubble);
            seed_id = coverage.add({s, radius, BubbleState::active}, params);
            has_seed = true;
            result.seeded = true;
            result.added.push_back(seed_id);
            queue.push_back(seed_id);
        }
    }

    // Existing bubbles intersecting the FoV disc join the queue (id order).
    for (const std::uint32_t id : coverage.gather(s, scan.pose.r_max + coverage.max_radius())) {
        if (has_seed && id == seed_id) continue;
        const Bubble b = coverage.bubble(id);
        if (distance(b.center, s) <= scan.pose.r_max + b.radius) queue.push_back(id);
    }

    const double two_pi = 2.0 * M_PI;
    const int k_samples = params.boundary_samples;
    while (!queue.empty()) {
        const std::uint32_t id = queue.front();
        queue.pop_front();
        const Bubble b = coverage.bubble(id);
        bool accepted_any = false;
        for (int k = 0; k < k_samples; ++k) {
            const double ang = two_pi * static_cast<double>(k) / static_cast<double>(k_samples);
            const Point2 cand = b.center + b.radius * Point2{std::cos(ang), std::sin(ang)};
            if (!fov_contains(scan, cand, params.clearance)) continue;
            const double r_new =
                std::min(store.edf(cand) - params.clearance, params.r_max_bubble);
            if (r_new < params.r_min) continue;
            bool overlapped = false;
            for (const std::uint32_t other :
                 coverage.gather(cand, params.overlap_factor * params.r_max_bubble)) {
                const Bubble ob = coverage.bubble(other);
                if (distance(cand, ob.center) < params.overlap_factor * ob.radius) {
                    overlapped = true;
                    break;
                }
            }
            if (overlapped) continue;
            const std::uint32_t child =
                coverage.add({cand, r_new, BubbleState::active}, params);
            result.added.push_back(child);
            queue.push_back(child);
            accepted_any = true;
        }
        if (!accepted_any) {
            coverage.set_state(id, BubbleState::fixed);
            result.fixed.push_back(id);
        }
    }
    return result;
}

}  // namespace gpocc
