#pragma once

// File output shared by the tools: CSV tables, JSON documents and the
// metadata sidecar written next to every artifact.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gibbsmix/chain.hpp"
#include "gibbsmix/grid.hpp"

namespace gibbsmix::io {

/// Writes `text` to `path`, replacing it. Throws std::runtime_error naming
/// the path on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

/// Pretty-printed JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

/// CSV with header `t,tv`.
void write_tv_curve_csv(const std::filesystem::path& path,
                        std::span<const std::pair<std::size_t, double>> curve);

/// CSV of a stored path; columns depend on the process (step,u,v for 2-D
/// processes, step,value for W, step,value,unreflected for Z).
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& record);

/// CSV with header `time,count`, distinct times ascending; trajectories that
/// never decoupled are counted on a final `never` row.
void write_time_histogram_csv(const std::filesystem::path& path,
                              std::span<const std::optional<std::size_t>> times);

/// Writes `<artifact>.meta.json` with {kind, a, n, version}.
void write_sidecar(const std::filesystem::path& artifact, const std::string& kind, double a,
                   std::optional<std::size_t> n);

nlohmann::json to_json(const MixingResult& result);
nlohmann::json to_json(const TrajectoryRecord& record);

}  // namespace gibbsmix::io
