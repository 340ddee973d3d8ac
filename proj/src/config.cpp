#include "heatlab/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "heatlab/errors.hpp"

namespace heatlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

IniDocument IniDocument::parse(std::istream& in, const std::string& source) {
  IniDocument doc;
  doc.source_ = source;
  std::string section;
  std::string raw;
  int line = 0;
  std::set<std::pair<std::string, std::string>> seen;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(raw);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']') fail("unterminated section header");
      section = lower(trim(text.substr(1, text.size() - 2)));
      if (section.empty()) fail("empty section name");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    Entry e{section, lower(trim(text.substr(0, eq))), trim(text.substr(eq + 1)), line};
    if (e.key.empty()) fail("missing key before '='");
    if (!seen.insert({e.section, e.key}).second) {
      fail("duplicate key '" + (e.section.empty() ? "" : e.section + ".") + e.key + "'");
    }
    doc.entries_.push_back(std::move(e));
  }
  return doc;
}

IniDocument IniDocument::parse_string(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  return parse(in, source);
}

const IniDocument::Entry* IniDocument::find(const std::string& section, const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.section == section && e.key == key) return &e;
  }
  return nullptr;
}

std::string IniDocument::canonical() const {
  std::vector<std::string> lines;
  for (const auto& e : entries_) lines.push_back(e.section + "." + e.key + "=" + e.value);
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::simulate:
      return "simulate";
    case Experiment::verify:
      return "verify";
    case Experiment::decay_sweep:
      return "decay-sweep";
    case Experiment::decompose:
      return "decompose";
  }
  return "unknown";
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

namespace {

using Entry = IniDocument::Entry;

class Reader {
 public:
  explicit Reader(const IniDocument& doc) : doc_(doc) {}

  [[noreturn]] void fail(const Entry& e, const std::string& msg) const {
    throw ConfigError(doc_.source() + ":" + std::to_string(e.line) + ": " + e.section + "." + e.key + ": " + msg);
  }

  // Reports a validation failure at the entry if present, else at the section.
  [[noreturn]] void fail_field(const std::string& section, const std::string& key, const std::string& msg) const {
    if (const Entry* e = doc_.find(section, key)) fail(*e, msg);
    throw ConfigError(doc_.source() + ": " + section + "." + key + " (default): " + msg);
  }

  double real(const Entry& e) const {
    double v = 0.0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    auto [ptr, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) fail(e, "expected a finite number, got '" + e.value + "'");
    return v;
  }

  long long integer(const Entry& e) const {
    long long v = 0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    auto [ptr, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || ptr != end) fail(e, "expected an integer, got '" + e.value + "'");
    return v;
  }

  bool boolean(const Entry& e) const {
    const std::string v = lower(e.value);
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    fail(e, "expected a boolean, got '" + e.value + "'");
  }

  std::vector<std::string> items(const Entry& e) const {
    std::vector<std::string> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(e, "empty list item");
      out.push_back(item);
    }
    if (out.empty()) fail(e, "expected a non-empty list");
    return out;
  }

  std::vector<double> reals(const Entry& e) const {
    std::vector<double> out;
    for (const auto& s : items(e)) out.push_back(real(Entry{e.section, e.key, s, e.line}));
    return out;
  }

 private:
  const IniDocument& doc_;
};

using Handler = std::function<void(const Reader&, const Entry&, RunConfig&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = [] {
    std::map<std::string, Handler> h;
    h["run.experiment"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      const std::string v = lower(e.value);
      if (v == "simulate") c.experiment = Experiment::simulate;
      else if (v == "verify") c.experiment = Experiment::verify;
      else if (v == "decay-sweep") c.experiment = Experiment::decay_sweep;
      else if (v == "decompose") c.experiment = Experiment::decompose;
      else r.fail(e, "unknown experiment '" + e.value + "'");
    };
    h["run.output_dir"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      if (e.value.empty()) r.fail(e, "empty path");
      c.output_dir = e.value;
    };
    h["run.emit_plots"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.emit_plots = r.boolean(e); };

    h["grid.d"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.dimension = static_cast<int>(r.integer(e)); };
    h["grid.l"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.period = r.real(e); };
    h["grid.m"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.points = static_cast<int>(r.integer(e)); };

    h["data.kind"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      const std::string v = lower(e.value);
      if (v == "rough") c.data.kind = DataConfig::Kind::rough;
      else if (v == "gaussian") c.data.kind = DataConfig::Kind::gaussian;
      else r.fail(e, "unknown data kind '" + e.value + "' (rough, gaussian)");
    };
    h["data.gamma0"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.data.rough.gamma0 = r.real(e); };
    h["data.amplitude"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.data.rough.amplitude = r.real(e); };
    h["data.epsilon0"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.data.rough.epsilon0 = r.real(e); };
    h["data.k_lo"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.data.rough.k_lo = r.real(e); };
    h["data.k_hi"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.data.rough.k_hi = r.real(e); };
    h["data.signs"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      const std::string v = lower(e.value);
      if (v == "radius") c.data.rough.signs = SignGranularity::radius;
      else if (v == "dyadic") c.data.rough.signs = SignGranularity::dyadic;
      else r.fail(e, "unknown sign granularity '" + e.value + "' (radius, dyadic)");
    };
    h["data.width"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.data.width = r.real(e); };

    h["solver.mu"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.solver.mu = r.real(e); };
    h["solver.t_end"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.solver.t_end = r.real(e); };
    h["solver.dt_policy"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      const std::string v = lower(e.value);
      if (v == "fixed") c.solver.dt_policy.kind = DtPolicy::Kind::fixed;
      else if (v == "geometric") c.solver.dt_policy.kind = DtPolicy::Kind::geometric;
      else r.fail(e, "unknown dt policy '" + e.value + "' (fixed, geometric)");
    };
    h["solver.dt"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.solver.dt_policy.dt = r.real(e); };
    h["solver.dt0"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.solver.dt_policy.dt0 = r.real(e); };
    h["solver.ratio"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.solver.dt_policy.ratio = r.real(e); };
    h["solver.dt_max"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.solver.dt_policy.dt_max = r.real(e); };
    h["solver.samples"] = [](const Reader&, const Entry&, RunConfig&) {};  // applied after parsing
    h["solver.sample_t_first"] = [](const Reader&, const Entry&, RunConfig&) {};
    h["solver.blowup_threshold"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.solver.blowup_threshold = r.real(e);
    };
    h["solver.snapshots"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.solver.record_snapshots = r.boolean(e);
    };
    h["solver.nonlinear"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.solver.nonlinear = r.boolean(e); };
    h["solver.dt_guard"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.solver.nonlinear_dt_guard = r.real(e);
    };

    h["schedule.kind"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      const std::string v = lower(e.value);
      if (v == "none") c.schedule.kind = CutoffSchedule::Kind::none;
      else if (v == "sqrt") c.schedule.kind = CutoffSchedule::Kind::sqrt_schedule;
      else r.fail(e, "unknown schedule '" + e.value + "' (none, sqrt)");
    };
    h["schedule.alpha"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.schedule.alpha = r.real(e); };

    h["ensemble.seeds"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.seeds.clear();
      for (const auto& s : r.items(e)) {
        const long long v = r.integer(Entry{e.section, e.key, s, e.line});
        if (v < 0) r.fail(e, "seeds must be non-negative");
        c.seeds.push_back(static_cast<std::uint64_t>(v));
      }
    };
    h["ensemble.count"] = [](const Reader&, const Entry&, RunConfig&) {};
    h["ensemble.base_seed"] = [](const Reader&, const Entry&, RunConfig&) {};

    h["verify.horizon"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.verify.horizon = r.real(e); };
    h["verify.strichartz_spread"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.verify.strichartz_spread = r.real(e);
    };
    h["verify.tail_fraction"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.verify.tail_fraction = r.real(e);
    };
    h["verify.embedding_spread"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.verify.embedding_spread = r.real(e);
    };
    h["verify.embedding_s"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.verify.embedding_s = r.real(e); };
    h["verify.bernstein_spread"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.verify.bernstein_spread = r.real(e);
    };
    h["verify.bernstein_l"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.verify.bernstein_L = r.real(e); };
    h["verify.bernstein_m"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.verify.bernstein_M = static_cast<int>(r.integer(e));
    };
    h["verify.bernstein_points"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.verify.bernstein_points = static_cast<int>(r.integer(e));
    };
    h["verify.mismatch_l"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.verify.mismatch_L = r.real(e); };
    h["verify.mismatch_m"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.verify.mismatch_M = static_cast<int>(r.integer(e));
    };
    h["verify.mismatch_slope"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.verify.mismatch_slope = r.real(e);
    };
    h["verify.mismatch_spread"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.verify.mismatch_spread = r.real(e);
    };
    h["verify.duhamel_spread"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.verify.duhamel_spread = r.real(e);
    };
    h["verify.smoothing_slack"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.verify.smoothing_slack = r.real(e);
    };

    h["sweep.gamma0"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.sweep.gamma0s = r.reals(e); };
    h["sweep.amplitudes"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.sweep.amplitudes = r.reals(e); };
    h["sweep.focusing"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.sweep.focusing = r.boolean(e); };
    h["sweep.focusing_amplitude"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.sweep.focusing_amplitude = r.real(e);
    };
    h["sweep.fit_t_a"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.sweep.fit_t_a = r.real(e); };
    h["sweep.fit_t_b"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.sweep.fit_t_b = r.real(e); };
    h["sweep.slope_tol"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.sweep.slope_tol = r.real(e); };
    h["sweep.zero_slope_tol"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.sweep.zero_slope_tol = r.real(e);
    };
    h["sweep.r2_min"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.sweep.r2_min = r.real(e); };

    h["decompose.scales"] = [](const Reader& r, const Entry& e, RunConfig& c) { c.decompose.scales = r.reals(e); };
    h["decompose.leak_slope_max"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.decompose.leak_slope_max = r.real(e);
    };
    h["decompose.w0_slope_slack"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.decompose.w0_slope_slack = r.real(e);
    };
    h["decompose.control_max"] = [](const Reader& r, const Entry& e, RunConfig& c) {
      c.decompose.control_max = r.real(e);
    };
    return h;
  }();
  return table;
}

void check_grid(const Reader& r, const std::string& section, const std::string& l_key, const std::string& m_key,
                double period, int points) {
  if (!(period > 0.0)) r.fail_field(section, l_key, "must be positive");
  if (points < 4 || points % 2 != 0) r.fail_field(section, m_key, "must be an even integer >= 4");
  // The spatial cutoffs at radius 1 must fit inside the box.
  if (!(1.1 < 0.5 * period)) r.fail_field(section, l_key, "box too small for the unit-radius cutoff (need L > 2.2)");
}

void validate(const Reader& r, const IniDocument& doc, RunConfig& c) {
  if (c.dimension != 2 && c.dimension != 3) r.fail_field("grid", "d", "must be 2 or 3");
  check_grid(r, "grid", "l", "m", c.period, c.points);

  auto& rough = c.data.rough;
  rough.dimension = c.dimension;
  if (c.data.kind == DataConfig::Kind::rough) {
    try {
      check_gamma0(rough.gamma0, c.dimension);
    } catch (const ConfigError& err) {
      r.fail_field("data", "gamma0", err.what());
    }
    if (!(rough.epsilon0 > 0.0)) r.fail_field("data", "epsilon0", "must be positive");
    if (rough.k_lo < 0.0) r.fail_field("data", "k_lo", "must be non-negative");
    if (rough.k_hi < 0.0) r.fail_field("data", "k_hi", "must be non-negative");
    if (rough.k_hi > 0.0 && rough.k_lo > rough.k_hi) r.fail_field("data", "k_lo", "exceeds k_hi");
  }
  if (!(rough.amplitude > 0.0)) r.fail_field("data", "amplitude", "must be positive");
  if (!(c.data.width > 0.0)) r.fail_field("data", "width", "must be positive");

  auto& s = c.solver;
  if (s.mu != 1.0 && s.mu != -1.0) r.fail_field("solver", "mu", "must be +1 or -1");
  if (!(s.t_end > 0.0)) r.fail_field("solver", "t_end", "must be positive");
  auto& p = s.dt_policy;
  if (p.kind == DtPolicy::Kind::fixed) {
    if (!(p.dt > 0.0)) r.fail_field("solver", "dt", "must be positive");
  } else {
    if (!(p.dt0 > 0.0)) r.fail_field("solver", "dt0", "must be positive");
    if (!(p.ratio >= 1.0)) r.fail_field("solver", "ratio", "must be >= 1");
    if (!(p.dt_max >= p.dt0)) r.fail_field("solver", "dt_max", "must be >= dt0");
  }
  if (!(s.blowup_threshold > 0.0)) r.fail_field("solver", "blowup_threshold", "must be positive");
  if (s.nonlinear_dt_guard < 0.0) r.fail_field("solver", "dt_guard", "must be non-negative");
  long long samples = 60;
  double t_first = 1e-3;
  if (const Entry* e = doc.find("solver", "samples")) {
    samples = r.integer(*e);
    if (samples < 1) r.fail(*e, "must be >= 1");
  }
  if (const Entry* e = doc.find("solver", "sample_t_first")) {
    t_first = r.real(*e);
    if (!(t_first > 0.0)) r.fail(*e, "must be positive");
  }
  s.sample_times = default_sample_times(s.t_end, static_cast<int>(samples), t_first);

  if (c.schedule.active() && !(c.schedule.alpha > 0.0)) r.fail_field("schedule", "alpha", "must be positive");
  if (!c.schedule.active() && doc.find("schedule", "alpha") && c.schedule.alpha <= 0.0) {
    r.fail_field("schedule", "alpha", "must be positive");
  }

  const Entry* count = doc.find("ensemble", "count");
  const Entry* base = doc.find("ensemble", "base_seed");
  if (count || base) {
    if (doc.find("ensemble", "seeds")) r.fail(count ? *count : *base, "give either seeds or count/base_seed");
    const long long n = count ? r.integer(*count) : 1;
    const long long b = base ? r.integer(*base) : 1;
    if (n < 1) r.fail(*count, "must be >= 1");
    if (b < 0) r.fail(*base, "must be non-negative");
    c.seeds.clear();
    for (long long i = 0; i < n; ++i) c.seeds.push_back(static_cast<std::uint64_t>(b + i));
  }
  std::vector<std::uint64_t> sorted = c.seeds;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    r.fail_field("ensemble", "seeds", "seeds must be distinct");
  }

  auto& v = c.verify;
  if (!(v.horizon > 0.0)) r.fail_field("verify", "horizon", "must be positive");
  check_grid(r, "verify", "bernstein_l", "bernstein_m", v.bernstein_L, v.bernstein_M);
  check_grid(r, "verify", "mismatch_l", "mismatch_m", v.mismatch_L, v.mismatch_M);
  if (v.bernstein_points < 1) r.fail_field("verify", "bernstein_points", "must be >= 1");
  const double rel = 0.5 * c.dimension;
  if (!(v.embedding_s >= 0.0 && v.embedding_s < rel)) {
    r.fail_field("verify", "embedding_s", "must lie in [0, d/2)");
  }

  auto& w = c.sweep;
  for (double g : w.gamma0s) {
    try {
      check_gamma0(g, c.dimension);
    } catch (const ConfigError& err) {
      r.fail_field("sweep", "gamma0", err.what());
    }
  }
  for (double a : w.amplitudes) {
    if (!(a > 0.0)) r.fail_field("sweep", "amplitudes", "must be positive");
  }
  if (!(w.focusing_amplitude > 0.0)) r.fail_field("sweep", "focusing_amplitude", "must be positive");
  if (!(w.fit_t_a >= 1.0)) r.fail_field("sweep", "fit_t_a", "fit windows start at t >= 1");
  const double t_b = w.fit_t_b > 0.0 ? w.fit_t_b : s.t_end;
  if (!(t_b > w.fit_t_a && t_b <= s.t_end)) r.fail_field("sweep", "fit_t_b", "must lie in (fit_t_a, t_end]");

  for (double n : c.decompose.scales) {
    if (!(n > 0.0)) r.fail_field("decompose", "scales", "must be positive");
  }
  if (c.decompose.scales.size() < 2) r.fail_field("decompose", "scales", "need at least two scales for a slope");
}

}  // namespace

RunConfig load_run_config(const IniDocument& doc) {
  Reader reader(doc);
  RunConfig cfg;
  for (const auto& e : doc.entries()) {
    const auto it = handlers().find(e.section + "." + e.key);
    if (it == handlers().end()) {
      throw ConfigError(doc.source() + ":" + std::to_string(e.line) + ": unknown field '" +
                        (e.section.empty() ? "" : e.section + ".") + e.key + "'");
    }
    it->second(reader, e, cfg);
  }
  validate(reader, doc, cfg);
  cfg.canonical_text = doc.canonical();
  cfg.digest = sha256_hex(cfg.canonical_text);
  return cfg;
}

RunConfig load_run_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  return load_run_config(IniDocument::parse(in, path));
}

}  // namespace heatlab
