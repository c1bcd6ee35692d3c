#pragma once

#include <filesystem>
#include <string>

#include "fastconv/grid.hpp"

namespace fastconv {

/// On-disk field snapshot: a flat array of 64-bit little-endian IEEE doubles
/// in row-major order (x' axes first, x_N last), plus a structured-text
/// sidecar (same basename, .meta extension) carrying grid geometry, time,
/// and run id. Round trip is bit-exact.
struct SnapshotMeta {
    Grid grid;
    double time = 0.0;
    std::string run_id;
    std::string written_at;  // ISO-8601 UTC, informational only
};

void write_snapshot(const std::filesystem::path& data_path, const Field& f, double time,
                    const std::string& run_id);

struct LoadedSnapshot {
    Field field;
    SnapshotMeta meta;
};

LoadedSnapshot read_snapshot(const std::filesystem::path& data_path);

}  // namespace fastconv
