#include "gpocc/map.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gpocc/errors.hpp"
#include "gpocc/io_text.hpp"

namespace gpocc {

Map::IngestReport Map::ingest(const SensorScan& scan, const PriorParams& prior, bool grow) {
    IngestReport report;
    const auto points = scan_to_points(scan);
    report.insert = store.insert(points);
    if (grow) {
        report.growth = grow_bubbles(coverage, scan, store, prior);
        if (report.growth.seed_failed) fallback_poses.push_back(scan.pose);
    }
    poses.push_back(scan.pose);
    ++version;
    return report;
}

void Map::save(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream out(fs::path(dir) / "store.txt", std::ios::binary);
        if (!out) throw IoError("Map::save: cannot write store.txt");
        store.save(out);
    }
    {
        std::ofstream out(fs::path(dir) / "coverage.txt", std::ios::binary);
        if (!out) throw IoError("Map::save: cannot write coverage.txt");
        coverage.save(out);
    }
    {
        std::ofstream out(fs::path(dir) / "poses.txt", std::ios::binary);
        if (!out) throw IoError("Map::save: cannot write poses.txt");
        out << "gpocc-poses 1\n";
        out << "version " << version << "\n";
        out << "poses " << poses.size() << "\n";
        const auto write_pose = [&](const SensorPose& p, int fallback) {
            out << io::format_double(p.position.x) << ' ' << io::format_double(p.position.y) << ' '
                << io::format_double(p.heading) << ' ' << io::format_double(p.fov_half_angle)
                << ' ' << io::format_double(p.r_max) << ' ' << fallback << "\n";
        };
        for (const SensorPose& p : poses) write_pose(p, 0);
        out << "fallback_poses " << fallback_poses.size() << "\n";
        for (const SensorPose& p : fallback_poses) write_pose(p, 1);
    }
}

Map Map::load(const std::string& dir, const PriorParams& prior) {
    namespace fs = std::filesystem;
    const auto open = [&](const char* name) {
        std::ifstream in(fs::path(dir) / name, std::ios::binary);
        if (!in) throw IoError(std::string("Map::load: missing ") + name + " in " + dir);
        return in;
    };

    Map map(0.05);
    {
        auto in = open("store.txt");
        map.store = VoxelStore::load(in);
    }
    {
        auto in = open("coverage.txt");
        map.coverage = BubbleCoverage::load(in, prior);
    }
    {
        auto in = open("poses.txt");
        std::string magic, tag;
        int version_tag = 0;
        in >> magic >> version_tag;
        if (magic != "gpocc-poses" || version_tag != 1) throw IoError("Map::load: bad poses header");
        in >> tag >> map.version;
        if (tag != "version") throw IoError("Map::load: missing version");
        std::size_t n = 0;
        in >> tag >> n;
        if (tag != "poses") throw IoError("Map::load: missing pose count");
        const auto read_pose = [&](SensorPose& p) {
            int fallback = 0;
            in >> p.position.x >> p.position.y >> p.heading >> p.fov_half_angle >> p.r_max >>
                fallback;
            if (!in) throw IoError("Map::load: truncated pose table");
        };
        map.poses.resize(n);
        for (SensorPose& p : map.poses) read_pose(p);
        in >> tag >> n;
        if (tag != "fallback_poses") throw IoError("Map::load: missing fallback pose count");
        map.fallback_poses.resize(n);
        for (SensorPose& p : map.fallback_poses) read_pose(p);
    }
    return map;
}

}  // namespace gpocc
