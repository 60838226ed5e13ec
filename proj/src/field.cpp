#include "gpocc/field.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "gpocc/io_text.hpp"
#include "gpocc/simd/kernels.hpp"

namespace gpocc {

void FieldConfig::validate() const {
    if (!(level_set_c > 0.0)) throw ContractViolation("FieldConfig: level_set_c must be > 0");
    if (!(lengthscale > 0.0)) throw ContractViolation("FieldConfig: lengthscale must be > 0");
    if (!(obs_noise_sigma2 >= 0.0))
        throw ContractViolation("FieldConfig: obs_noise_sigma2 must be >= 0");
    if (!(neighborhood_radius >= 3.0 * lengthscale))
        throw ContractViolation("FieldConfig: neighborhood_radius must be >= 3 * lengthscale");
    if (!(variance_wall_threshold > 0.0 && variance_wall_threshold < 1.0))
        throw ContractViolation("FieldConfig: variance_wall_threshold must be in (0, 1)");
    if (local_gp_cap == 0) throw ContractViolation("FieldConfig: local_gp_cap must be > 0");
}

FieldView::FieldView(const Map& map, FieldConfig config, PriorParams prior)
    : map_(map), config_(config), prior_(prior), bound_revision_(map.store.revision()) {
    config_.validate();
    prior_.validate();
}

double FieldView::prior_mean(Point2 x) const {
    if (config_.prior_mode == PriorMode::pose_only)
        return pose_prior_mean(x, map_.poses, prior_);
    const double from_bubbles = map_.coverage.prior_mean(x, prior_);
    if (map_.fallback_poses.empty()) return from_bubbles;
    return std::max(from_bubbles, pose_prior_mean(x, map_.fallback_poses, prior_));
}

FieldSample FieldView::classify(double mean, double variance) const {
    FieldSample s;
    s.mean = mean;
    s.variance = variance;
    s.occupancy = mean > config_.level_set_c ? OccClass::free : OccClass::unknown;
    return s;
}

std::shared_ptr<const FieldView::LocalGp> FieldView::local_gp(std::span<const Point2> points) const {
    const auto n = static_cast<Eigen::Index>(points.size());
    std::vector<double> xs(points.size()), ys(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        xs[i] = points[i].x;
        ys[i] = points[i].y;
    }
    const double inv_l = 1.0 / config_.lengthscale;
    const auto& ops = simd::active();

    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        ops.kernel_row(xs.data(), ys.data(), xs.size(), xs[i], ys[i], inv_l, gram.data() + i * n);
    gram.diagonal().array() += config_.obs_noise_sigma2;

    Eigen::VectorXd residual(n);
    for (Eigen::Index i = 0; i < n; ++i)
        residual[i] = config_.level_set_c - prior_mean({xs[i], ys[i]});

    SpdSolver solver(std::move(gram), {.jitter = config_.jitter, .max_n = config_.local_gp_cap});
    Eigen::VectorXd alpha = solver.solve(residual);
    return std::make_shared<LocalGp>(std::move(xs), std::move(ys), std::move(solver),
                                     std::move(alpha));
}

FieldSample FieldView::evaluate(Point2 x, const LocalGp& gp, double prior_at_x) const {
    const auto n = static_cast<Eigen::Index>(gp.xs.size());
    Eigen::VectorXd k_star(n);
    simd::active().kernel_row(gp.xs.data(), gp.ys.data(), gp.xs.size(), x.x, x.y,
                              1.0 / config_.lengthscale, k_star.data());
    const double mean = prior_at_x + k_star.dot(gp.alpha);
    double variance = KernelParams::signal_variance - gp.solver.solve_lower(k_star).squaredNorm();
    variance = std::clamp(variance, 0.0, KernelParams::signal_variance + config_.jitter);
    return classify(mean, variance);
}

FieldSample FieldView::query(Point2 x) const {
    const double prior = prior_mean(x);
    const auto nearest = map_.store.nearest_centroid(x);
    if (!nearest || nearest->dist > config_.neighborhood_radius) {
        return classify(prior, KernelParams::signal_variance);
    }

    try {
        // A cached factorization exists only for voxels whose neighborhood
        // fit the cap, so a hit is always usable.
        const auto key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(nearest->cell.ix))
                          << 32) |
                         static_cast<std::uint32_t>(nearest->cell.iy);
        std::shared_ptr<const LocalGp> cached;
        {
            std::lock_guard lock(cache_mu_);
            const auto it = cache_.find(key);
            if (it != cache_.end()) cached = it->second;
        }
        if (cached) return evaluate(x, *cached, prior);

        auto hits = map_.store.radius_search(nearest->centroid, config_.neighborhood_radius);
        if (hits.size() <= config_.local_gp_cap) {
            std::vector<Point2> pts;
            pts.reserve(hits.size());
            for (const auto& h : hits) pts.push_back(h.centroid);
            auto gp = local_gp(pts);
            {
                std::lock_guard lock(cache_mu_);
                cache_.emplace(key, gp);
            }
            return evaluate(x, *gp, prior);
        }

        // Over the cap: keep the local_gp_cap centroids nearest to the query.
        std::sort(hits.begin(), hits.end(),
                  [&](const VoxelStore::CentroidHit& a, const VoxelStore::CentroidHit& b) {
                      const double da = squared_distance(a.centroid, x);
                      const double db = squared_distance(b.centroid, x);
                      if (da != db) return da < db;
                      return a.cell < b.cell;
                  });
        hits.resize(config_.local_gp_cap);
        std::vector<Point2> pts;
        pts.reserve(hits.size());
        for (const auto& h : hits) pts.push_back(h.centroid);
        const auto gp = local_gp(pts);
        return evaluate(x, *gp, prior);
    } catch (const NumericalError& err) {
        std::ostringstream msg;
        msg << err.what() << " [query at (" << io::format_double(x.x) << ", "
            << io::format_double(x.y) << ")]";
        throw NumericalError(msg.str());
    }
}

std::vector<FieldSample> FieldView::batch_query(std::span<const Point2> points, int threads) const {
    std::vector<FieldSample> out(points.size());
    const auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                out[i] = query(points[i]);
            } catch (const NumericalError&) {
                out[i] = FieldSample{};
                out[i].ok = false;
            }
        }
    };
    if (threads <= 1 || points.size() < 64) {
        run(0, points.size());
        return out;
    }
    const auto n_workers = static_cast<std::size_t>(threads);
    std::atomic<std::size_t> next{0};
    constexpr std::size_t kChunk = 256;
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        workers.emplace_back([&] {
            while (true) {
                const std::size_t begin = next.fetch_add(kChunk);
                if (begin >= points.size()) return;
                run(begin, std::min(points.size(), begin + kChunk));
            }
        });
    }
    for (auto& t : workers) t.join();
    return out;
}

CrossingKind FieldView::classify_crossing(const FieldSample& a, const FieldSample& b,
                                          const FieldConfig& config) {
    const double c = config.level_set_c;
    const bool straddles = (a.mean > c && b.mean < c) || (a.mean < c && b.mean > c);
    if (!straddles)
        throw ContractViolation("classify_crossing: samples must straddle the level set");
    return std::max(a.variance, b.variance) < config.variance_wall_threshold
               ? CrossingKind::wall
               : CrossingKind::frontier;
}

FieldView::Probe FieldView::probe(Point2 x) const {
    Probe p;
    p.prior = prior_mean(x);
    p.has_neighbor = map_.store.edf(x) <= config_.neighborhood_radius;
    return p;
}

std::size_t FieldView::cache_size() const {
    std::lock_guard lock(cache_mu_);
    return cache_.size();
}

FieldRaster render_field(const FieldView& field, Box2 bbox, double resolution, int threads) {
    if (!(resolution > 0.0)) throw ContractViolation("render_field: resolution must be > 0");
    if (bbox.empty()) throw ContractViolation("render_field: empty bbox");
    FieldRaster raster;
    raster.bbox = bbox;
    raster.resolution = resolution;
    raster.width = static_cast<int>(std::floor((bbox.max.x - bbox.min.x) / resolution)) + 1;
    raster.height = static_cast<int>(std::floor((bbox.max.y - bbox.min.y) / resolution)) + 1;

    std::vector<Point2> nodes;
    nodes.reserve(static_cast<std::size_t>(raster.width) * raster.height);
    for (int row = 0; row < raster.height; ++row)
        for (int col = 0; col < raster.width; ++col) nodes.push_back(raster.node(col, row));

    const auto samples = field.batch_query(nodes, threads);
    raster.mean.resize(samples.size());
    raster.variance.resize(samples.size());
    raster.occupancy.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        raster.mean[i] = samples[i].mean;
        raster.variance[i] = samples[i].variance;
        raster.occupancy[i] = samples[i].occupancy == OccClass::free ? 1 : 0;
    }
    return raster;
}

void write_raster_pgm(const std::string& path, int width, int height,
                      std::span<const double> values, double lo, double hi) {
    std::ostringstream out;
    out << "P5\n" << width << ' ' << height << "\n255\n";
    const double span = hi > lo ? hi - lo : 1.0;
    for (const double v : values) {
        const double t = std::clamp((v - lo) / span, 0.0, 1.0);
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0))));
    }
    io::write_file(path, out.str());
}

void write_raster_txt(const std::string& path, int width, int height,
                      std::span<const double> values) {
    std::ostringstream out;
    for (int row = 0; row < height; ++row) {
        for (int col = 0; col < width; ++col) {
            if (col) out << ' ';
            out << io::format_double(values[static_cast<std::size_t>(row) * width + col]);
        }
        out << "\n";
    }
    io::write_file(path, out.str());
}

}  // namespace gpocc
