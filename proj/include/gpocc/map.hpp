#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gpocc/prior.hpp"
#include "gpocc/scan.hpp"
#include "gpocc/voxel_store.hpp"

namespace gpocc {

/// The persistent mapping state: voxelized point measurements, the bubble
/// coverage, and every ingested pose. Ingestion is single-writer; queries
/// run against a fixed version between ingests.
struct Map {
    VoxelStore store;
    BubbleCoverage coverage;
    std::vector<SensorPose> poses;
    std::vector<SensorPose> fallback_poses;  // poses whose bubble seed failed
    std::uint64_t version{0};

    explicit Map(double resolution = 0.05) : store(resolution) {}

    struct IngestReport {
        VoxelStore::InsertReport insert;
        GrowthResult growth;
    };

    /// One scan: insert the hit points, then expand the bubble coverage
    /// against the updated distance field, then bump the version.
    IngestReport ingest(const SensorScan& scan, const PriorParams& prior, bool grow = true);

    /// Snapshot directory: store.txt, coverage.txt, poses.txt. Round-trip
    /// exact; resuming ingestion from a snapshot matches a single run.
    void save(const std::string& dir) const;
    static Map load(const std::string& dir, const PriorParams& prior);
};

}  // namespace gpocc
