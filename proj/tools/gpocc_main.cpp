// gpocc command-line pipeline: simulate -> map -> reconstruct -> eval,
// plus a standalone raster render. Exit codes: 0 success, 1 numerical or
// internal failure, 2 input/config error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpocc/contour.hpp"
#include "gpocc/errors.hpp"
#include "gpocc/eval.hpp"
#include "gpocc/field.hpp"
#include "gpocc/io_text.hpp"
#include "gpocc/map.hpp"
#include "gpocc/sim.hpp"
#include "gpocc/simd/kernels.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gpocc;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct RunConfig {
    std::uint64_t seed{1};
    int threads{1};
    std::string world;
    std::string trajectory;
    std::string out{"out"};
    std::string environment{"run"};

    SensorModel sensor{720, M_PI, 5.0, 0.01};
    double store_resolution{0.05};
    KernelParams kernel;
    PriorParams prior;
    FieldConfig field;
    double grid_h{0.05};
    std::optional<Box2> grid_bbox;
    double grid_padding{0.5};
    OccGridConfig baseline;
    double sample_spacing{0.05};

    json echo;  // fully resolved values, copied into every output
};

json resolve_echo(const RunConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["world"] = c.world;
    j["trajectory"] = c.trajectory;
    j["environment"] = c.environment;
    j["sensor"] = {{"n_rays", c.sensor.n_rays},
                   {"fov_half_angle", c.sensor.fov_half_angle},
                   {"r_max", c.sensor.r_max},
                   {"noise_sigma", c.sensor.noise_sigma}};
    j["store"] = {{"resolution", c.store_resolution}};
    j["kernel"] = {{"lengthscale", c.kernel.lengthscale}, {"jitter", c.kernel.jitter}};
    j["prior"] = {{"level_set_c", c.prior.level_set_c},
                  {"clearance", c.prior.clearance},
                  {"r_min", c.prior.r_min},
                  {"r_max_bubble", c.prior.r_max_bubble},
                  {"boundary_samples", c.prior.boundary_samples},
                  {"overlap_factor", c.prior.overlap_factor},
                  {"prior_floor_eps", c.prior.prior_floor_eps},
                  {"mode", c.field.prior_mode == PriorMode::bubbles ? "bubbles" : "pose_only"}};
    j["field"] = {{"obs_noise_sigma2", c.field.obs_noise_sigma2},
                  {"neighborhood_radius", c.field.neighborhood_radius},
                  {"variance_wall_threshold", c.field.variance_wall_threshold},
                  {"local_gp_cap", c.field.local_gp_cap}};
    j["grid"] = {{"h", c.grid_h}, {"padding", c.grid_padding}};
    if (c.grid_bbox) {
        j["grid"]["bbox"] = {c.grid_bbox->min.x, c.grid_bbox->min.y, c.grid_bbox->max.x,
                             c.grid_bbox->max.y};
    }
    j["baseline"] = {{"resolution", c.baseline.resolution},
                     {"hit", c.baseline.hit_logodds},
                     {"miss", c.baseline.miss_logodds},
                     {"occupied_threshold", c.baseline.occupied_threshold},
                     {"free_threshold", c.baseline.free_threshold},
                     {"min_logodds", c.baseline.min_logodds},
                     {"max_logodds", c.baseline.max_logodds}};
    j["eval"] = {{"sample_spacing", c.sample_spacing}};
    return j;
}

void apply_config_file(RunConfig& c, const std::string& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw IoError("config parse error in " + path + ": " + e.what());
    }
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.world = j.value("world", c.world);
    c.trajectory = j.value("trajectory", c.trajectory);
    c.out = j.value("out", c.out);
    c.environment = j.value("environment", c.environment);
    if (j.contains("sensor")) {
        const auto& s = j["sensor"];
        c.sensor.n_rays = s.value("n_rays", c.sensor.n_rays);
        c.sensor.fov_half_angle = s.value("fov_half_angle", c.sensor.fov_half_angle);
        c.sensor.r_max = s.value("r_max", c.sensor.r_max);
        c.sensor.noise_sigma = s.value("noise_sigma", c.sensor.noise_sigma);
    }
    if (j.contains("store")) c.store_resolution = j["store"].value("resolution", c.store_resolution);
    if (j.contains("kernel")) {
        c.kernel.lengthscale = j["kernel"].value("lengthscale", c.kernel.lengthscale);
        c.kernel.jitter = j["kernel"].value("jitter", c.kernel.jitter);
    }
    if (j.contains("prior")) {
        const auto& p = j["prior"];
        c.prior.level_set_c = p.value("level_set_c", c.prior.level_set_c);
        c.prior.clearance = p.value("clearance", c.prior.clearance);
        c.prior.r_min = p.value("r_min", c.prior.r_min);
        c.prior.r_max_bubble = p.value("r_max_bubble", c.prior.r_max_bubble);
        c.prior.boundary_samples = p.value("boundary_samples", c.prior.boundary_samples);
        c.prior.overlap_factor = p.value("overlap_factor", c.prior.overlap_factor);
        c.prior.prior_floor_eps = p.value("prior_floor_eps", c.prior.prior_floor_eps);
        const std::string mode = p.value("mode", std::string("bubbles"));
        if (mode != "bubbles" && mode != "pose_only")
            throw IoError("config: prior.mode must be 'bubbles' or 'pose_only'");
        c.field.prior_mode = mode == "bubbles" ? PriorMode::bubbles : PriorMode::pose_only;
    }
    if (j.contains("field")) {
        const auto& f = j["field"];
        c.field.obs_noise_sigma2 = f.value("obs_noise_sigma2", c.field.obs_noise_sigma2);
        c.field.neighborhood_radius = f.value("neighborhood_radius", c.field.neighborhood_radius);
        c.field.variance_wall_threshold =
            f.value("variance_wall_threshold", c.field.variance_wall_threshold);
        c.field.local_gp_cap = f.value("local_gp_cap", c.field.local_gp_cap);
    }
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        c.grid_h = g.value("h", c.grid_h);
        c.grid_padding = g.value("padding", c.grid_padding);
        if (g.contains("bbox")) {
            const auto& b = g["bbox"];
            if (!b.is_array() || b.size() != 4)
                throw IoError("config: grid.bbox must be [x0, y0, x1, y1]");
            c.grid_bbox = Box2{{b[0].get<double>(), b[1].get<double>()},
                               {b[2].get<double>(), b[3].get<double>()}};
        }
    }
    if (j.contains("baseline")) {
        const auto& b = j["baseline"];
        c.baseline.resolution = b.value("resolution", c.baseline.resolution);
        c.baseline.hit_logodds = b.value("hit", c.baseline.hit_logodds);
        c.baseline.miss_logodds = b.value("miss", c.baseline.miss_logodds);
        c.baseline.occupied_threshold = b.value("occupied_threshold", c.baseline.occupied_threshold);
        c.baseline.free_threshold = b.value("free_threshold", c.baseline.free_threshold);
        c.baseline.min_logodds = b.value("min_logodds", c.baseline.min_logodds);
        c.baseline.max_logodds = b.value("max_logodds", c.baseline.max_logodds);
    }
    if (j.contains("eval")) c.sample_spacing = j["eval"].value("sample_spacing", c.sample_spacing);
}

void finalize(RunConfig& c) {
    // Shared scales flow from their single configuration source.
    c.field.lengthscale = c.kernel.lengthscale;
    c.field.jitter = c.kernel.jitter;
    c.prior.lengthscale = c.kernel.lengthscale;
    c.field.level_set_c = c.prior.level_set_c;
    c.kernel.validate();
    c.prior.validate();
    c.field.validate();
    c.echo = resolve_echo(c);
}

World load_world_file(const std::string& path) {
    if (path.empty()) throw IoError("no world file given (config key 'world' or --world)");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open world file: " + path);
    return load_world(in);
}

std::vector<SensorScan> load_scan_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scan log: " + path);
    return load_scans(in);
}

void write_json(const std::string& path, const json& j) {
    io::write_file(path, j.dump(2) + "\n");
}

Box2 reconstruction_bbox(const RunConfig& cfg, const Map& map) {
    if (cfg.grid_bbox) return *cfg.grid_bbox;
    Box2 box = map.store.bounds();
    for (std::size_t i = 0; i < map.coverage.size(); ++i) {
        const Bubble b = map.coverage.bubble(static_cast<std::uint32_t>(i));
        box.extend(b.center + Point2{b.radius, b.radius});
        box.extend(b.center - Point2{b.radius, b.radius});
    }
    for (const SensorPose& p : map.poses) box.extend(p.position);
    if (box.empty())
        throw IoError("cannot derive a reconstruction bbox from an empty map; set grid.bbox");
    box.pad(cfg.grid_padding);
    return box;
}

int cmd_simulate(const RunConfig& cfg) {
    const World world = load_world_file(cfg.world);
    if (cfg.trajectory.empty()) throw IoError("no trajectory file given (config key 'trajectory')");
    std::ifstream tin(cfg.trajectory, std::ios::binary);
    if (!tin) throw IoError("cannot open trajectory: " + cfg.trajectory);
    const auto poses = load_trajectory(tin);

    const auto scans = simulate_trajectory(world, poses, cfg.sensor, cfg.seed);
    fs::create_directories(cfg.out);
    std::ostringstream buf;
    save_scans(scans, buf);
    io::write_file((fs::path(cfg.out) / "scans.log").string(), buf.str());
    write_json((fs::path(cfg.out) / "run_config.json").string(), cfg.echo);
    std::cout << "simulate: " << scans.size() << " scans -> " << cfg.out << "/scans.log\n";
    return 0;
}

int cmd_map(const RunConfig& cfg, const std::string& scans_path, const std::string& resume) {
    const auto scans = load_scan_log(scans_path);
    Map map(cfg.store_resolution);
    if (!resume.empty()) map = Map::load(resume, cfg.prior);

    std::vector<double> per_scan_ms;
    per_scan_ms.reserve(scans.size());
    const bool grow = cfg.field.prior_mode == PriorMode::bubbles;
    std::size_t seed_failures = 0;
    for (const SensorScan& scan : scans) {
        const auto t0 = Clock::now();
        const auto report = map.ingest(scan, cfg.prior, grow);
        per_scan_ms.push_back(seconds_since(t0) * 1e3);
        if (report.growth.seed_failed) ++seed_failures;
    }

    const fs::path out(cfg.out);
    fs::create_directories(out);
    map.save((out / "snapshot").string());
    write_json((out / "run_config.json").string(), cfg.echo);

    const TimingStats stats = timing_report(per_scan_ms);
    json timing;
    timing["per_scan_update_ms"] = {{"n", stats.n},     {"mean", stats.mean}, {"median", stats.median},
                                    {"p95", stats.p95}, {"min", stats.min},   {"max", stats.max}};
    write_json((out / "timing_map.json").string(), timing);

    std::cout << "map: " << scans.size() << " scans, " << map.store.cell_count() << " voxels, "
              << map.coverage.size() << " bubbles";
    if (seed_failures > 0)
        std::cout << " (" << seed_failures << " pose(s) fell back to the pose prior)";
    std::cout << " -> " << (out / "snapshot").string() << "\n";
    return 0;
}

int cmd_reconstruct(const RunConfig& cfg, const std::string& snapshot, bool rasters_only) {
    const Map map = Map::load(snapshot, cfg.prior);
    const FieldView field(map, cfg.field, cfg.prior);
    const Box2 bbox = reconstruction_bbox(cfg, map);
    const fs::path out(cfg.out);
    fs::create_directories(out);

    const auto t0 = Clock::now();
    std::size_t n_queries = 0;

    if (!rasters_only) {
        const GridSpec grid{bbox.min, bbox.max, cfg.grid_h};
        FieldAccessor accessor = make_accessor(field, cfg.threads);
        auto counting = accessor;
        counting.evaluate = [&](std::span<const Point2> pts) {
            n_queries += pts.size();
            return accessor.evaluate(pts);
        };
        const auto segments = extract_contour(grid, counting, cfg.field);
        std::ostringstream buf;
        save_contour(segments, buf);
        io::write_file((out / "contour.txt").string(), buf.str());
        if (map.store.empty())
            std::cout << "reconstruct: empty snapshot, rasters show the pure prior\n";
        std::cout << "reconstruct: " << segments.size() << " segments -> "
                  << (out / "contour.txt").string() << "\n";
    }

    const FieldRaster raster = render_field(field, bbox, cfg.grid_h, cfg.threads);
    n_queries += raster.mean.size();
    const double total_s = seconds_since(t0);

    const double c = cfg.field.level_set_c;
    write_raster_pgm((out / "mean.pgm").string(), raster.width, raster.height, raster.mean, 0.0,
                     2.0 * c);
    write_raster_txt((out / "mean.txt").string(), raster.width, raster.height, raster.mean);
    write_raster_pgm((out / "variance.pgm").string(), raster.width, raster.height, raster.variance,
                     0.0, 1.0);
    write_raster_txt((out / "variance.txt").string(), raster.width, raster.height, raster.variance);
    std::vector<double> occupancy(raster.occupancy.begin(), raster.occupancy.end());
    write_raster_pgm((out / "class.pgm").string(), raster.width, raster.height, occupancy, 0.0, 1.0);
    write_raster_txt((out / "class.txt").string(), raster.width, raster.height, occupancy);

    json timing;
    timing["reconstruction_s"] = total_s;
    timing["per_query_us"] = {{"n", n_queries},
                              {"mean", n_queries > 0 ? total_s * 1e6 / static_cast<double>(n_queries)
                                                     : 0.0}};
    write_json((out / "timing_reconstruct.json").string(), timing);
    write_json((out / "run_config.json").string(), cfg.echo);
    std::cout << (rasters_only ? "render: " : "reconstruct: ") << raster.width << "x"
              << raster.height << " rasters -> " << out.string() << "\n";
    return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& contour_path, const std::string& scans_path,
             const std::string& run_dir) {
    const World world = load_world_file(cfg.world);
    std::ifstream cin_(contour_path, std::ios::binary);
    if (!cin_) throw IoError("cannot open contour: " + contour_path);
    const auto segments = load_contour(cin_);
    const auto scans = load_scan_log(scans_path);

    json rows;

    // Ours: metric samples along wall-kind segments only.
    const SurfacePartition parts = filter_surface(segments, cfg.field);
    const auto ours_samples = sample_reconstruction(parts.walls, cfg.sample_spacing);
    if (!ours_samples.empty()) {
        const ReconError e = point_to_surface_errors(ours_samples, world);
        rows["ours"] = {{"mean_mm", e.mean_abs_mm}, {"rmse_mm", e.rmse_mm}, {"n_samples", e.n_samples}};
    } else {
        rows["ours"] = {{"mean_mm", nullptr}, {"rmse_mm", nullptr}, {"n_samples", 0}};
    }

    // Raw data: the noisy hit points themselves.
    std::vector<Point2> raw;
    for (const SensorScan& s : scans) {
        const auto pts = scan_to_points(s);
        raw.insert(raw.end(), pts.begin(), pts.end());
    }
    if (!raw.empty()) {
        const ReconError e = point_to_surface_errors(raw, world);
        rows["raw_data"] = {{"mean_mm", e.mean_abs_mm}, {"rmse_mm", e.rmse_mm}, {"n_samples", e.n_samples}};
    } else {
        rows["raw_data"] = {{"mean_mm", nullptr}, {"rmse_mm", nullptr}, {"n_samples", 0}};
    }

    // Log-odds occupancy grid baseline over the same scan stream.
    Box2 grid_bounds = world.bounds;
    grid_bounds.pad(cfg.grid_padding);
    OccGrid grid(grid_bounds, cfg.baseline);
    for (const SensorScan& s : scans) grid.integrate(s);
    const auto occupied = grid.occupied_cell_centers();
    if (!occupied.empty()) {
        const ReconError e = point_to_surface_errors(occupied, world);
        rows["occupancy_grid"] = {{"mean_mm", e.mean_abs_mm}, {"rmse_mm", e.rmse_mm}, {"n_samples", e.n_samples}};
    } else {
        rows["occupancy_grid"] = {{"mean_mm", nullptr}, {"rmse_mm", nullptr}, {"n_samples", 0}};
    }

    json metrics;
    metrics["schema_version"] = 1;
    metrics["environment"] = cfg.environment;
    metrics["rows"] = rows;
    metrics["params"] = cfg.echo;

    json timing = json::object();
    for (const char* name : {"timing_map.json", "timing_reconstruct.json"}) {
        const fs::path p = fs::path(run_dir) / name;
        if (fs::exists(p)) {
            const json t = json::parse(io::read_file(p.string()));
            timing.update(t);
        }
    }
    metrics["timing"] = timing;

    fs::create_directories(cfg.out);
    const std::string path = (fs::path(cfg.out) / "metrics.json").string();
    write_json(path, metrics);
    std::cout << "eval: " << path << "\n";
    if (rows["ours"]["mean_mm"].is_number()) {
        std::cout << "  ours           " << rows["ours"]["mean_mm"].get<double>() << " / "
                  << rows["ours"]["rmse_mm"].get<double>() << " mm (mean/rmse)\n";
        std::cout << "  raw_data       " << rows["raw_data"]["mean_mm"].get<double>() << " / "
                  << rows["raw_data"]["rmse_mm"].get<double>() << " mm\n";
        std::cout << "  occupancy_grid " << rows["occupancy_grid"]["mean_mm"].get<double>() << " / "
                  << rows["occupancy_grid"]["rmse_mm"].get<double>() << " mm\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous occupancy mapping with a shaped GP latent field"};
    app.require_subcommand(1);

    std::string config_path, world_flag, scans_flag, out_flag, snapshot_flag, contour_flag,
        resume_flag, run_dir_flag, trajectory_flag;
    std::optional<std::uint64_t> seed_flag;
    std::optional<int> threads_flag;
    std::optional<double> grid_h_flag, noise_flag;
    bool no_simd = false;

    app.add_option("--config", config_path, "JSON run configuration")->expected(1);
    app.add_option("--world", world_flag, "world file (overrides config)");
    app.add_option("--scans", scans_flag, "scan log path");
    app.add_option("--out", out_flag, "output directory (overrides config)");
    app.add_option("--seed", seed_flag, "RNG seed (overrides config)");
    app.add_option("--threads", threads_flag, "query parallelism (overrides config)");
    app.add_option("--grid-h", grid_h_flag, "reconstruction grid step (overrides config)");
    app.add_option("--noise-sigma", noise_flag, "sensor range noise sigma (overrides config)");
    app.add_flag("--no-simd", no_simd, "force the scalar kernel variant");

    auto* sim = app.add_subcommand("simulate", "ray-cast a trajectory into a scan log");
    sim->add_option("--trajectory", trajectory_flag, "trajectory file (overrides config)");
    auto* map_cmd = app.add_subcommand("map", "ingest a scan log into a map snapshot");
    map_cmd->add_option("--resume", resume_flag, "existing snapshot to continue from");
    auto* rec = app.add_subcommand("reconstruct", "extract contours and rasters from a snapshot");
    rec->add_option("--snapshot", snapshot_flag, "snapshot directory");
    auto* render = app.add_subcommand("render", "rasters only, no contour");
    render->add_option("--snapshot", snapshot_flag, "snapshot directory");
    auto* eval_cmd = app.add_subcommand("eval", "reconstruction metrics vs ground truth");
    eval_cmd->add_option("--contour", contour_flag, "contour file");
    eval_cmd->add_option("--run-dir", run_dir_flag, "directory holding the timing files");
    for (CLI::App* sub : {sim, map_cmd, rec, render, eval_cmd}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) apply_config_file(cfg, config_path);
        if (!world_flag.empty()) cfg.world = world_flag;
        if (!out_flag.empty()) cfg.out = out_flag;
        if (!trajectory_flag.empty()) cfg.trajectory = trajectory_flag;
        if (seed_flag) cfg.seed = *seed_flag;
        if (threads_flag) cfg.threads = *threads_flag;
        if (grid_h_flag) cfg.grid_h = *grid_h_flag;
        if (noise_flag) cfg.sensor.noise_sigma = *noise_flag;
        finalize(cfg);
        if (no_simd) simd::select(simd::scalar_kernels());

        const std::string scans_path =
            !scans_flag.empty() ? scans_flag : (fs::path(cfg.out) / "scans.log").string();
        const std::string snapshot_path =
            !snapshot_flag.empty() ? snapshot_flag : (fs::path(cfg.out) / "snapshot").string();
        const std::string contour_path =
            !contour_flag.empty() ? contour_flag : (fs::path(cfg.out) / "contour.txt").string();
        const std::string run_dir = !run_dir_flag.empty() ? run_dir_flag : cfg.out;

        if (sim->parsed()) return cmd_simulate(cfg);
        if (map_cmd->parsed()) return cmd_map(cfg, scans_path, resume_flag);
        if (rec->parsed()) return cmd_reconstruct(cfg, snapshot_path, false);
        if (render->parsed()) return cmd_reconstruct(cfg, snapshot_path, true);
        if (eval_cmd->parsed()) return cmd_eval(cfg, contour_path, scans_path, run_dir);
        std::cerr << "gpocc: no subcommand\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "gpocc: " << e.what() << "\n";
        return 2;
    } catch (const ContractViolation& e) {
        std::cerr << "gpocc: invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "gpocc: numerical failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "gpocc: internal error: " << e.what() << "\n";
        return 1;
    }
}
