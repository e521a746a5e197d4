#include "vch/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>

#include "vch/io.hpp"

namespace vch::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDynamicsTol = 1e-10;
constexpr double kErrColumnTol = 1e-12;

SimConfig build_config(const RunRequest& req) {
  SimConfig cfg = req.preset ? preset(*req.preset) : SimConfig{};
  if (req.config) {
    std::ifstream in(*req.config);
    if (!in) throw ConfigError("cannot read config file " + req.config->string());
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = parse_config_text(ss.str(), cfg);
  }
  if (req.seed) cfg.seed = *req.seed;
  if (req.trials) cfg.trials = *req.trials;
  if (req.max_steps) cfg.max_steps = *req.max_steps;
  if (req.noise_range) cfg.noise.range_frac = *req.noise_range;
  if (req.noise_motion) cfg.noise.motion_frac = *req.noise_motion;
  if (req.modifications) cfg.modifications = *req.modifications;
  cfg.validate();
  return cfg;
}

std::string trace_text(const TrialResult& r, const SimConfig& cfg) {
  std::ostringstream ss;
  io::write_trace(ss, r.frames, cfg.region);
  return ss.str();
}

std::string events_text(const TrialResult& r) {
  std::ostringstream ss;
  io::write_events(ss, r.events);
  return ss.str();
}

}  // namespace

int cmd_run(const RunRequest& req, std::ostream& out, std::ostream& err) {
  SimConfig cfg;
  try {
    cfg = build_config(req);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(req.out);
    const bool batch = cfg.trials > 1;
    std::vector<std::string> outputs;
    std::mutex lock;
    const auto params = cfg.growth_params();

    auto write_trial = [&](std::size_t t, const TrialResult& r) {
      const std::string trace = io::trial_file("trace", ".csv", t, batch);
      const std::string events = io::trial_file("events", ".csv", t, batch);
      const std::string slices = io::trial_file("slices", ".json", t, batch);
      io::write_text(req.out / trace, trace_text(r, cfg));
      io::write_text(req.out / events, events_text(r));
      io::write_text(req.out / slices, io::slices_json(r.slices, params).dump(1) + "\n");
      std::lock_guard g(lock);
      outputs.insert(outputs.end(), {trace, events, slices});
    };

    std::vector<TrialSummary> summaries;
    Aggregate agg;
    if (batch) {
      MonteCarloResult mc = run_monte_carlo(cfg, cfg.trials, req.threads, write_trial);
      summaries = std::move(mc.trials);
      agg = std::move(mc.aggregate);
    } else {
      TrialResult r = run_trial(cfg);
      write_trial(0, r);
      summaries.push_back(r.summary);
      agg = aggregate(summaries);
    }
    std::sort(outputs.begin(), outputs.end());

    json summary;
    summary["trials"] = json::array();
    for (const auto& s : summaries) summary["trials"].push_back(io::to_json(s));
    summary["aggregate"] = io::to_json(agg);
    io::write_text(req.out / "summary.json", summary.dump(1) + "\n");
    outputs.push_back("summary.json");
    outputs.push_back("manifest.json");

    io::Manifest m;
    m.version = VCH_VERSION;
    m.config = cfg;
    m.seed = cfg.seed;
    m.outputs = outputs;
    m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    io::write_text(req.out / "manifest.json", io::to_json(m).dump(1) + "\n");

    out << "trials " << summaries.size() << ", median final error " << agg.median_final_error
        << ", median tail error " << agg.median_tail_error << ", converged " << agg.converged << "/"
        << summaries.size() << "\n";
    out << "wrote " << outputs.size() << " files to " << req.out.string() << "\n";

    if (req.verify) {
      const int rc = cmd_verify({req.out}, out, err);
      if (rc != 0) return 1;
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
    return 1;
  }
}

std::vector<fs::path> expand_traces(const std::vector<fs::path>& paths) {
  std::vector<fs::path> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && name.rfind("trace", 0) == 0 && e.path().extension() == ".csv") {
          found.push_back(e.path());
        }
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

namespace {

struct Checks {
  std::ostream& out;
  bool ok = true;
  void line(bool pass, const std::string& what) {
    out << "  " << (pass ? "PASS " : "FAIL ") << what << '\n';
    ok = ok && pass;
  }
};

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << v;
  return ss.str();
}

// Returns false when some check failed.
bool verify_one(const fs::path& path, std::ostream& out) {
  out << path.string() << '\n';
  Checks c{out};

  const io::Trace trace = io::read_trace(path);
  if (trace.frames.empty()) {
    c.line(false, "trace has no rows");
    return false;
  }
  const fs::path events_path = io::companion(path, "events", ".csv");
  const std::vector<UpdateEvent> events = fs::exists(events_path) ? io::read_events(events_path)
                                                                   : std::vector<UpdateEvent>{};
  if (!fs::exists(events_path)) out << "  note: no events file; assuming no updates\n";

  std::optional<SimConfig> cfg;
  if (const fs::path mpath = path.parent_path() / "manifest.json"; fs::exists(mpath)) {
    cfg = io::read_manifest(mpath).config;
  }
  const std::size_t n = trace.agents;
  std::size_t m = cfg ? cfg->anchors : 0;
  if (!cfg) {
    for (const auto& e : events) {
      for (const auto& w : e.vertices) {
        if (w.anchor && w.node >= n) m = std::max(m, w.node - n + 1);
      }
    }
  }
  if (cfg && cfg->agents != n) {
    c.line(false, "trace agent count matches the manifest");
    return false;
  }
  const Region region = cfg ? cfg->region : Region{};

  double col_dev = 0.0;
  for (std::size_t k = 0; k < trace.frames.size(); ++k) {
    const double e = error_norm(trace.frames[k].estimate, trace.frames[k].truth, region);
    col_dev = std::max(col_dev, std::abs(e - trace.error[k]));
  }
  c.line(col_dev <= kErrColumnTol, "err column matches the positions (max deviation " + num(col_dev) + ")");

  const bool noiseless = !cfg || (cfg->noise.range_frac == 0.0 && cfg->noise.motion_frac == 0.0);
  if (noiseless) {
    const auto rep = ltv::verify_error_dynamics(events, trace.frames);
    c.line(rep.max_deviation <= kDynamicsTol && rep.updates == events.size(),
           "error recursion e(k+1) = P e(k): " + std::to_string(rep.updates) + " updates, max deviation " +
               num(rep.max_deviation));
  } else {
    out << "  skip error recursion (noisy run: odometry noise enters the error directly)\n";
  }

  // Rebuild the matrix stream, one slot per (step, agent).
  const std::size_t steps = trace.frames.size() - 1;
  ltv::SliceDecomposer slicer(n);
  ltv::ProductTracker product(n);
  std::size_t next = 0;
  bool malformed = false;
  std::string why;
  try {
    for (std::size_t k = 0; k < steps; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const UpdateEvent* ev = nullptr;
        if (next < events.size() && events[next].step == k && events[next].agent == i) ev = &events[next++];
        const auto s = ltv::capture_step(ev, n, m, k * n + i, k);
        slicer.push(s);
        product.push(s);
      }
    }
    if (next != events.size()) throw MalformedEvent("events out of order or beyond the trace");
  } catch (const MalformedEvent& e) {
    malformed = true;
    why = e.what();
  }
  c.line(!malformed, malformed ? "update rows admissible: " + why : "update rows admissible (floors, row sums)");
  if (malformed) return false;

  const auto rep = slicer.report();
  bool slices_ok = true;
  for (const auto& s : rep.slices) slices_ok = slices_ok && s.norm < 1.0;
  c.line(slices_ok, std::to_string(rep.slices.size()) + " completed slices, each with norm < 1");
  const double pnorm = product.norm();
  c.line(pnorm <= 1.0 + 1e-12, "running product norm <= 1 (final " + num(pnorm) + ")");

  if (m == 0 || rep.slices.empty()) {
    out << "  WARNING product norm = 1, no convergence certificate\n";
  } else if (cfg) {
    try {
      const auto g = ltv::check_growth_bound(rep, cfg->growth_params());
      out << "  info growth bound holds for " << num(100.0 * g.fraction_satisfied) << "% of slices\n";
    } catch (const InvalidParams& e) {
      out << "  info growth bound not evaluated: " << e.what() << '\n';
    }
  }
  return c.ok;
}

}  // namespace

int cmd_verify(const std::vector<fs::path>& paths, std::ostream& out, std::ostream& err) {
  const auto traces = expand_traces(paths);
  if (traces.empty()) {
    err << "verify: no traces found\n";
    return 1;
  }
  bool ok = true;
  for (const auto& t : traces) {
    try {
      ok = verify_one(t, out) && ok;
    } catch (const std::exception& e) {
      out << "  FAIL " << e.what() << '\n';
      ok = false;
    }
  }
  out << (ok ? "verify: PASS" : "verify: FAIL") << '\n';
  return ok ? 0 : 1;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

int cmd_plotdata(const PlotRequest& req, std::ostream& out, std::ostream& err) {
  std::vector<std::pair<std::string, io::Trace>> traces;
  std::ostringstream body;
  try {
    for (const auto& p : expand_traces(req.traces)) {
      if (!fs::is_regular_file(p)) throw io::FormatError("cannot read " + p.string());
      traces.emplace_back(p.stem().string(), io::read_trace(p));
    }
    body << "k,series,value\n";
    std::size_t longest = 0;
    for (const auto& [label, t] : traces) {
      longest = std::max(longest, t.error.size());
      for (std::size_t k = 0; k < t.error.size(); ++k) body << k << ",error/" << label << ',' << io::fmt(t.error[k]) << '\n';
    }
    if (traces.size() > 1) {
      std::vector<double> col;
      for (std::size_t k = 0; k < longest; ++k) {
        col.clear();
        for (const auto& [label, t] : traces) {
          if (!t.error.empty()) col.push_back(t.error[std::min(k, t.error.size() - 1)]);
        }
        body << k << ",error/median," << io::fmt(median(col)) << '\n';
      }
    }
    if (req.trajectories) {
      for (const auto& [label, t] : traces) {
        for (std::size_t k = 0; k < t.frames.size(); ++k) {
          for (std::size_t i = 0; i < t.agents; ++i) {
            const auto& f = t.frames[k];
            const std::string a = label + "/agent" + std::to_string(i);
            body << k << ",x_true/" << a << ',' << io::fmt(f.truth[i].x) << '\n'
                 << k << ",y_true/" << a << ',' << io::fmt(f.truth[i].y) << '\n'
                 << k << ",x_est/" << a << ',' << io::fmt(f.estimate[i].x) << '\n'
                 << k << ",y_est/" << a << ',' << io::fmt(f.estimate[i].y) << '\n';
          }
        }
      }
    }
    if (req.slices) {
      // The k column carries the slice number here.
      for (const auto& p : expand_traces(req.traces)) {
        const fs::path sp = io::companion(p, "slices", ".json");
        if (!fs::exists(sp)) continue;
        std::ifstream in(sp);
        const json j = json::parse(in);
        for (const auto& s : j.at("slices")) {
          body << s.at("number").get<std::size_t>() << ",slice_length/" << p.stem().string() << ','
               << s.at("length").get<std::size_t>() << '\n';
        }
      }
    }
  } catch (const std::exception& e) {
    err << "plotdata: " << e.what() << '\n';
    return 2;
  }
  try {
    if (req.out.empty() || req.out == "-") {
      out << body.str();
    } else {
      if (req.out.has_parent_path()) fs::create_directories(req.out.parent_path());
      io::write_text(req.out, body.str());
    }
  } catch (const std::exception& e) {
    err << "plotdata: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace vch::cli
