#include "vch/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace vch::io {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw FormatError("line " + std::to_string(line) + ": bad number '" + s + "'");
}

std::size_t to_index(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used == s.size() && s.find('-') == std::string::npos) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw FormatError("line " + std::to_string(line) + ": bad integer '" + s + "'");
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  return in;
}

}  // namespace

void write_trace(std::ostream& out, const std::vector<ltv::TraceFrame>& frames, const Region& region) {
  out << kTraceHeader << '\n';
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto& f = frames[k];
    const std::string err = fmt(error_norm(f.estimate, f.truth, region));
    for (std::size_t i = 0; i < f.truth.size(); ++i) {
      out << k << ',' << i << ',' << fmt(f.truth[i].x) << ',' << fmt(f.truth[i].y) << ','
          << fmt(f.estimate[i].x) << ',' << fmt(f.estimate[i].y) << ',' << err << '\n';
    }
  }
}

Trace read_trace(std::istream& in) {
  Trace t;
  std::string line;
  if (!std::getline(in, line)) return t;
  strip_cr(line);
  if (line != kTraceHeader) throw FormatError("trace header mismatch: '" + line + "'");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 7) throw FormatError("line " + std::to_string(lineno) + ": expected 7 columns");
    const std::size_t k = to_index(cells[0], lineno);
    const std::size_t id = to_index(cells[1], lineno);
    const Vec2 truth{to_double(cells[2], lineno), to_double(cells[3], lineno)};
    const Vec2 est{to_double(cells[4], lineno), to_double(cells[5], lineno)};
    const double err = to_double(cells[6], lineno);
    if (k == t.frames.size()) {
      if (id != 0) throw FormatError("line " + std::to_string(lineno) + ": step must start at agent 0");
      if (k > 0 && t.frames.back().truth.size() != t.agents) {
        throw FormatError("line " + std::to_string(lineno) + ": previous step is incomplete");
      }
      t.frames.emplace_back();
      t.error.push_back(err);
    } else if (k + 1 != t.frames.size()) {
      throw FormatError("line " + std::to_string(lineno) + ": steps out of order");
    }
    auto& f = t.frames.back();
    if (id != f.truth.size()) throw FormatError("line " + std::to_string(lineno) + ": agents out of order");
    if (err != t.error.back()) throw FormatError("line " + std::to_string(lineno) + ": err differs within a step");
    f.truth.push_back(truth);
    f.estimate.push_back(est);
    if (k == 0) t.agents = f.truth.size();
    else if (f.truth.size() > t.agents) throw FormatError("line " + std::to_string(lineno) + ": too many agents");
  }
  if (!t.frames.empty() && t.frames.back().truth.size() != t.agents) {
    throw FormatError("last step is incomplete");
  }
  return t;
}

Trace read_trace(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_trace(in);
}

namespace {

constexpr const char* kEventHead =
    "step,agent,self_weight,self_floor,anchor_min,agent_min,agent_floor,zero_self_allowed,relative_error";
constexpr std::size_t kEventFixed = 9;
constexpr std::size_t kVertexCols = 7;

}  // namespace

void write_events(std::ostream& out, const std::vector<UpdateEvent>& events) {
  out << kEventHead;
  for (int v = 0; v < 3; ++v) {
    const std::string p = ",v" + std::to_string(v) + "_";
    out << p << "node" << p << "anchor" << p << "barycentric" << p << "weight" << p << "source_step" << p
        << "x" << p << "y";
  }
  out << '\n';
  for (const auto& e : events) {
    out << e.step << ',' << e.agent << ',' << fmt(e.self_weight) << ',' << fmt(e.self_floor) << ','
        << fmt(e.anchor_min) << ',' << fmt(e.agent_min) << ',' << int(e.agent_floor) << ','
        << int(e.zero_self_allowed) << ',' << fmt(e.relative_error);
    for (const auto& w : e.vertices) {
      out << ',' << w.node << ',' << int(w.anchor) << ',' << fmt(w.barycentric) << ',' << fmt(w.weight) << ','
          << w.source_step << ',' << fmt(w.value.x) << ',' << fmt(w.value.y);
    }
    out << '\n';
  }
}

std::vector<UpdateEvent> read_events(std::istream& in) {
  std::vector<UpdateEvent> events;
  std::string line;
  if (!std::getline(in, line)) return events;
  strip_cr(line);
  if (line.rfind(kEventHead, 0) != 0) throw FormatError("events header mismatch");
  std::size_t lineno = 1;
  auto flag = [&](const std::string& s) {
    if (s == "0") return false;
    if (s == "1") return true;
    throw FormatError("line " + std::to_string(lineno) + ": bad flag '" + s + "'");
  };
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != kEventFixed + 3 * kVertexCols) {
      throw FormatError("line " + std::to_string(lineno) + ": expected " +
                        std::to_string(kEventFixed + 3 * kVertexCols) + " columns");
    }
    UpdateEvent e;
    e.step = to_index(c[0], lineno);
    e.agent = to_index(c[1], lineno);
    e.self_weight = to_double(c[2], lineno);
    e.self_floor = to_double(c[3], lineno);
    e.anchor_min = to_double(c[4], lineno);
    e.agent_min = to_double(c[5], lineno);
    e.agent_floor = flag(c[6]);
    e.zero_self_allowed = flag(c[7]);
    e.relative_error = to_double(c[8], lineno);
    for (std::size_t v = 0; v < 3; ++v) {
      const std::size_t b = kEventFixed + v * kVertexCols;
      auto& w = e.vertices[v];
      w.node = to_index(c[b], lineno);
      w.anchor = flag(c[b + 1]);
      w.barycentric = to_double(c[b + 2], lineno);
      w.weight = to_double(c[b + 3], lineno);
      w.source_step = to_index(c[b + 4], lineno);
      w.value = {to_double(c[b + 5], lineno), to_double(c[b + 6], lineno)};
    }
    events.push_back(e);
  }
  return events;
}

std::vector<UpdateEvent> read_events(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_events(in);
}

json to_json(const TrialSummary& s) {
  json j;
  j["seed"] = s.seed;
  j["steps"] = s.steps;
  j["initial_error"] = s.initial_error;
  j["final_error"] = s.final_error;
  j["first_below_tolerance"] = s.first_below ? json(*s.first_below) : json(nullptr);
  j["updates"] = s.updates;
  j["anchored_updates"] = s.anchored_updates;
  j["barycentric_sums_exact"] = s.barycentric_sums_exact;
  j["max_row_sum_defect"] = s.max_row_sum_defect;
  j["slice_count"] = s.slice_count;
  j["mean_slice_length"] = s.mean_slice_length;
  j["max_slice_length"] = s.max_slice_length;
  j["max_slice_norm"] = s.max_slice_norm;
  j["growth_fraction_satisfied"] = s.growth_fraction;
  j["final_product_norm"] = s.final_product_norm;
  j["min_product_norm"] = s.min_product_norm;
  j["max_product_norm"] = s.max_product_norm;
  j["tail_median_error"] = tail_median(s.error_curve);
  return j;
}

json to_json(const Aggregate& a) {
  return json{{"median_final_error", a.median_final_error},
              {"mean_final_error", a.mean_final_error},
              {"median_tail_error", a.median_tail_error},
              {"converged", a.converged}};
}

json slices_json(const ltv::SliceReport& r, const ltv::GrowthBoundParams& p) {
  json j;
  j["agents"] = r.n;
  j["matrices"] = r.processed;
  j["growth_params"] = {{"beta1", p.beta1}, {"beta2", p.beta2}, {"gamma1", p.gamma1}, {"gamma2", p.gamma2}};
  const ltv::GrowthReport g = ltv::check_growth_bound(r, p);
  j["fraction_satisfying_bound"] = g.fraction_satisfied;
  json slices = json::array();
  for (std::size_t s = 0; s < r.slices.size(); ++s) {
    const auto& sl = r.slices[s];
    slices.push_back({{"number", sl.number},
                      {"start", sl.start},
                      {"end", sl.end},
                      {"length", sl.length},
                      {"norm", sl.norm},
                      {"bound", g.verdicts[s].bound},
                      {"within_bound", g.verdicts[s].satisfied}});
  }
  j["slices"] = std::move(slices);
  json segs = json::array();
  for (const auto& sg : r.segments) {
    const char* kind = sg.kind == ltv::SegmentKind::Slice ? "slice" : sg.kind == ltv::SegmentKind::Gap ? "gap" : "tail";
    segs.push_back({{"kind", kind}, {"start", sg.start}, {"end", sg.end}, {"norm", sg.norm}});
  }
  j["segments"] = std::move(segs);
  return j;
}

json to_json(const Manifest& m) {
  json cfg = json::object();
  for (const auto& [k, v] : to_key_values(m.config)) cfg[k] = v;
  return json{{"version", m.version},
              {"config", cfg},
              {"seed", m.seed},
              {"outputs", m.outputs},
              {"wall_clock_seconds", m.wall_clock_seconds}};
}

Manifest manifest_from_json(const json& j) {
  try {
    Manifest m;
    m.version = j.at("version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    SimConfig c;
    for (const auto& [k, v] : j.at("config").items()) apply_key(c, k, v.get<std::string>());
    c.validate();
    m.config = c;
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

Manifest read_manifest(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return manifest_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::filesystem::path companion(const std::filesystem::path& trace, const std::string& stem,
                                const std::string& ext) {
  std::string name = trace.stem().string();
  const auto us = name.find('_');
  const std::string suffix = us == std::string::npos ? "" : name.substr(us);
  return trace.parent_path() / (stem + suffix + ext);
}

std::string trial_file(const std::string& stem, const std::string& ext, std::size_t trial, bool batch) {
  if (!batch) return stem + ext;
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%03zu", trial);
  return stem + buf + ext;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace vch::io
