#pragma once

// On-disk formats: trace and event CSVs, JSON summaries, and the run manifest.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vch/config.hpp"
#include "vch/sim.hpp"

namespace vch::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kTraceHeader = "k,agent_id,x_true,y_true,x_est,y_est,err";

// 17 significant digits; parses back to the same double.
std::string fmt(double v);

// One row per (k, agent); `err` is the network error at k.
void write_trace(std::ostream& out, const std::vector<ltv::TraceFrame>& frames, const Region& region);

struct Trace {
  std::vector<ltv::TraceFrame> frames;  // index k
  std::vector<double> error;            // err column, one value per k
  std::size_t agents = 0;
};

// Throws FormatError on malformed content or an unreadable path. An empty or
// header-only input yields an empty trace.
Trace read_trace(std::istream& in);
Trace read_trace(const std::filesystem::path& path);

void write_events(std::ostream& out, const std::vector<UpdateEvent>& events);
std::vector<UpdateEvent> read_events(std::istream& in);
std::vector<UpdateEvent> read_events(const std::filesystem::path& path);

nlohmann::json to_json(const TrialSummary& s);
nlohmann::json to_json(const Aggregate& a);
nlohmann::json slices_json(const ltv::SliceReport& r, const ltv::GrowthBoundParams& p);

struct Manifest {
  std::string version;
  SimConfig config;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0.0;
};

nlohmann::json to_json(const Manifest& m);
// Throws FormatError or ConfigError.
Manifest manifest_from_json(const nlohmann::json& j);
Manifest read_manifest(const std::filesystem::path& path);

// Companion file names for a trace: trace_007.csv -> events_007.csv, etc.
std::filesystem::path companion(const std::filesystem::path& trace, const std::string& stem,
                                const std::string& ext);

// "trace.csv" for a single trial, "trace_007.csv" inside a batch.
std::string trial_file(const std::string& stem, const std::string& ext, std::size_t trial, bool batch);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace vch::io
