#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "gpocc/geometry.hpp"
#include "gpocc/scan.hpp"
#include "gpocc/voxel_store.hpp"

namespace gpocc {

/// Parameters shaping the prior mean. level_set_c is the free/unknown
/// threshold; gamma scales each pose/bubble contribution so the prior hits
/// exactly c at the effective range.
struct PriorParams {
    double level_set_c{1.0};
    double lengthscale{0.3};      // meters
    double clearance{0.2};        // meters, distance bubbles keep from obstacles
    double r_min{0.15};           // meters, smallest admissible bubble
    double r_max_bubble{2.0};     // meters, growth cap
    int boundary_samples{16};     // candidate centers per bubble boundary
    double overlap_factor{0.7};   // reject candidates inside this fraction of a radius
    double prior_floor_eps{1e-3}; // latent units; contributions below this are prunable

    void validate() const;

    /// Pruning radius around a contributor with effective range r_eff:
    /// beyond it the contribution is provably below prior_floor_eps.
    double pruning_radius(double r_effective) const;
};

/// gamma = c / kappa(r_effective) = c * exp(r_effective / l).
double gamma_scale(double r_effective, const PriorParams& params);

/// m(x) = max_i gamma_i * kappa(|x - s_i|) over the sensor poses
/// (gamma_i from each pose's r_max). Empty pose set gives 0.
double pose_prior_mean(Point2 x, std::span<const SensorPose> poses, const PriorParams& params);

enum class BubbleState : std::uint8_t { active, fixed };

struct Bubble {
    Point2 center;
    double radius{0.0};
    BubbleState state{BubbleState::active};
};

/// Bubble set acting as pseudo-poses in the prior mean, with a uniform-grid
/// index over the centers for radius searches. Append-only.
class BubbleCoverage {
public:
    explicit BubbleCoverage(double grid_cell = 2.0);

    std::uint32_t add(const Bubble& bubble, const PriorParams& params);
    std::size_t size() const { return xs_.size(); }
    bool empty() const { return xs_.empty(); }
    Bubble bubble(std::size_t id) const;
    void set_state(std::size_t id, BubbleState state) { states_[id] = state; }
    double max_radius() const { return max_radius_; }

    /// m(x) = max_b gamma_b * kappa(|x - center_b|), gamma_b from
    /// radius_b + 2*clearance. Evaluated over the bubbles found by a radius
    /// search with the pruning radius; exact to within prior_floor_eps.
    double prior_mean(Point2 x, const PriorParams& params) const;

    /// Ids of bubbles with |center - p| <= radius, ascending by id.
    std::vector<std::uint32_t> gather(Point2 p, double radius) const;

    void save(std::ostream& out) const;
    static BubbleCoverage load(std::istream& in, const PriorParams& params);

private:
    std::int64_t grid_key(double v) const;
    std::uint64_t grid_cell_key(Point2 p) const;

    double grid_cell_;
    double max_radius_{0.0};
    std::vector<double> xs_, ys_, radii_, gammas_;
    std::vector<BubbleState> states_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid_;
};

/// True iff x lies in the scan's observed region with the given margin:
/// inside the angular FoV and |x - s| + margin within the measured range
/// along that bearing (misses count as r_max).
bool fov_contains(const SensorScan& scan, Point2 x, double margin);

struct GrowthResult {
    std::vector<std::uint32_t> added;   // includes the seed, creation order
    std::vector<std::uint32_t> fixed;   // bubbles that accepted no candidate
    bool seeded{false};
    bool seed_failed{false};  // pose too close to obstacles; caller falls back to pose prior
};

/// Deterministic incremental coverage expansion for one scan. The store
/// must already contain the scan's points (the distance field has to see
/// the current obstacles).
GrowthResult grow_bubbles(BubbleCoverage& coverage, const SensorScan& scan,
                          const VoxelStore& store, const PriorParams& params);

/// Flips fixed bubbles whose discs intersect the scan's FoV disc back to
/// active so the expansion pass re-queues them. Returns the flipped ids.
std::vector<std::uint32_t> reactivate_for_scan(BubbleCoverage& coverage, const SensorScan& scan);

}  // namespace gpocc
