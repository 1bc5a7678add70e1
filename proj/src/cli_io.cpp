#include "edsim/cli_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <set>
#include <sstream>

namespace edsim::io {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Typed, path-aware view into the config tree.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  Node object(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_object()) throw ConfigError(child(key), "expected an object");
    return {v, child(key)};
  }
  std::optional<Node> optional_object(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return object(key);
  }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  void allow_only(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!allowed.contains(k)) throw ConfigError(child(k), "unknown key");
  }

  double number(const std::string& key, bool allow_inf = false) const {
    return to_number(at(key), child(key), allow_inf);
  }
  double number_or(const std::string& key, double fallback, bool allow_inf = false) const {
    return has(key) ? number(key, allow_inf) : fallback;
  }
  std::int64_t integer(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(child(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
  }
  std::uint64_t unsigned_integer(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw ConfigError(child(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  std::string string(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(child(key), "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& key, bool allow_inf = false) const {
    const json& v = at(key);
    if (!v.is_array()) throw ConfigError(child(key), "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i)
      out.push_back(to_number(v[i], child(key) + "[" + std::to_string(i) + "]", allow_inf));
    return out;
  }
  std::vector<int> integers(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array()) throw ConfigError(child(key), "expected an array");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer())
        throw ConfigError(child(key) + "[" + std::to_string(i) + "]", "expected an integer");
      out.push_back(v[i].get<int>());
    }
    return out;
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& at(const std::string& key) const {
    if (!has(key)) throw ConfigError(child(key), "required key missing");
    return j_.at(key);
  }

  static double to_number(const json& v, const std::string& path, bool allow_inf) {
    if (v.is_number()) {
      const double d = v.get<double>();
      if (!std::isfinite(d)) throw ConfigError(path, "expected a finite number");
      return d;
    }
    if (allow_inf && v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf" || s == "+inf" || s == "infinity") return kInf;
    }
    throw ConfigError(path, allow_inf ? "expected a number or \"inf\"" : "expected a number");
  }

  const json& j_;
  std::string path_;
};

// Re-raises a domain validation failure as a config error at `path`.
template <typename Fn>
auto at_path(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

ChannelPlan parse_plan(const Node& n) {
  n.allow_only({"num_channels", "dft_size", "bins_per_channel", "sample_rate"});
  const auto k = n.integer("num_channels");
  const double fs = n.number_or("sample_rate", 1.0);
  if (n.has("dft_size") == n.has("bins_per_channel"))
    throw ConfigError(n.path(), "give exactly one of dft_size or bins_per_channel");
  return at_path(n.path(), [&] {
    if (n.has("dft_size")) return ChannelPlan(static_cast<int>(k), static_cast<int>(n.integer("dft_size")), fs);
    return ChannelPlan::with_bins(static_cast<int>(k), static_cast<int>(n.integer("bins_per_channel")), fs);
  });
}

ScenarioConfig parse_scenario(const Node& n, const ChannelPlan& plan) {
  n.allow_only({"occupied", "snr_db", "noise_psd"});
  ScenarioConfig s{plan, {}, n.number_or("snr_db", 0.0), n.number_or("noise_psd", 1.0)};
  const auto occupied = n.has("occupied") ? n.integers("occupied") : std::vector<int>{};
  s.occupancy = at_path(n.child("occupied"), [&] { return OccupancyMap(plan, occupied); });
  at_path(n.path(), [&] {
    validate(s);
    return 0;
  });
  return s;
}

ImpairmentConfig parse_impairments(const std::optional<Node>& maybe, const ScenarioConfig& scenario) {
  ImpairmentConfig c;
  if (!maybe) return c;
  const Node& n = *maybe;
  n.allow_only({"nonlinearity", "phase_noise", "iqi"});
  if (auto nl = n.optional_object("nonlinearity")) {
    nl->allow_only({"a1", "iip3", "input_backoff_db"});
    c.nonlinearity.a1 = nl->number_or("a1", 1.0);
    if (nl->has("iip3") && nl->has("input_backoff_db"))
      throw ConfigError(nl->path(), "give at most one of iip3 or input_backoff_db");
    if (nl->has("iip3")) c.nonlinearity.iip3 = nl->number("iip3", true);
    if (nl->has("input_backoff_db")) {
      // IIP3 placed this many dB above the mean antenna power.
      const double ibo = nl->number("input_backoff_db");
      c.nonlinearity.iip3 = std::sqrt(scenario.expected_input_power() * std::pow(10.0, ibo / 10.0));
    }
    at_path(nl->path(), [&] {
      c.nonlinearity.validate();
      return 0;
    });
  }
  if (auto pn = n.optional_object("phase_noise")) {
    pn->allow_only({"beta"});
    c.phase_noise.beta = pn->number_or("beta", 0.0);
    at_path(pn->path(), [&] {
      c.phase_noise.validate();
      return 0;
    });
  }
  if (auto iq = n.optional_object("iqi")) {
    iq->allow_only({"g", "phi", "irr_db"});
    if (iq->has("irr_db")) {
      if (iq->has("g") || iq->has("phi")) throw ConfigError(iq->path(), "give either irr_db or (g, phi)");
      const double irr = iq->number("irr_db", true);
      c.iqi = at_path(iq->child("irr_db"), [&] { return mismatch_from_irr(irr); });
    } else {
      c.iqi.g = iq->number_or("g", 1.0);
      c.iqi.phi = iq->number_or("phi", 0.0);
    }
    at_path(iq->path(), [&] {
      c.iqi.validate();
      return 0;
    });
  }
  return c;
}

std::vector<double> probabilities(const Node& n, const std::string& key) {
  auto v = n.numbers(key);
  if (v.empty()) throw ConfigError(n.child(key), "must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!(v[i] > 0.0 && v[i] < 1.0))
      throw ConfigError(n.child(key) + "[" + std::to_string(i) + "]", "probability must lie in (0, 1)");
  return v;
}

void check_channel(const ChannelPlan& plan, int k, const std::string& path) {
  if (!plan.has_channel(k)) throw ConfigError(path, "channel " + std::to_string(k) + " not in plan");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("$", "config root must be an object");
  Node root(doc, "");
  root.allow_only({"plan", "scenario", "impairments", "n_trials", "seed", "workers", "spectra", "roc",
                   "calibrate"});
  ExperimentConfig cfg{ScenarioConfig{parse_plan(root.object("plan")), {}, 0.0, 1.0}, {}, 10000, 0, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
  const ChannelPlan& plan = cfg.scenario.plan;
  if (auto sc = root.optional_object("scenario"))
    cfg.scenario = parse_scenario(*sc, plan);
  else
    cfg.scenario.occupancy = OccupancyMap(plan, {});
  cfg.impairments = parse_impairments(root.optional_object("impairments"), cfg.scenario);

  const auto n_trials = root.integer_or("n_trials", 10000);
  if (n_trials < 1) throw ConfigError("n_trials", "must be >= 1");
  cfg.n_trials = static_cast<std::size_t>(n_trials);
  if (root.has("seed")) cfg.seed = root.unsigned_integer("seed");
  if (root.has("workers")) {
    const auto w = root.integer("workers");
    if (w < 1) throw ConfigError("workers", "must be >= 1");
    cfg.workers = static_cast<unsigned>(w);
  }

  if (auto sp = root.optional_object("spectra")) {
    sp->allow_only({"n_avg"});
    const auto n = sp->integer_or("n_avg", 200);
    if (n < 1) throw ConfigError(sp->child("n_avg"), "must be >= 1");
    cfg.spectra = SpectraSpec{static_cast<std::size_t>(n)};
  }

  if (auto r = root.optional_object("roc")) {
    r->allow_only({"channel", "parameter", "values", "target_pfa"});
    RocSpec spec;
    spec.channel = static_cast<int>(r->integer("channel"));
    check_channel(plan, spec.channel, r->child("channel"));
    const auto param = r->string("parameter");
    if (param == "beta")
      spec.parameter = SweepParameter::Beta;
    else if (param == "irr_db")
      spec.parameter = SweepParameter::IrrDb;
    else
      throw ConfigError(r->child("parameter"), "expected \"beta\" or \"irr_db\"");
    spec.values = r->numbers("values", spec.parameter == SweepParameter::IrrDb);
    if (spec.values.empty()) throw ConfigError(r->child("values"), "must not be empty");
    spec.target_pfa = probabilities(*r, "target_pfa");
    cfg.roc = spec;
  }

  if (auto c = root.optional_object("calibrate")) {
    c->allow_only({"target_pfa", "channels", "holdout_seed"});
    CalibrateSpec spec;
    spec.target_pfa = probabilities(*c, "target_pfa");
    if (c->has("channels")) {
      spec.channels = c->integers("channels");
      for (std::size_t i = 0; i < spec.channels.size(); ++i) {
        const std::string path = c->child("channels") + "[" + std::to_string(i) + "]";
        check_channel(plan, spec.channels[i], path);
        if (cfg.scenario.occupancy.occupied(spec.channels[i]))
          throw ConfigError(path, "calibration channel must be idle in the scenario");
      }
    }
    if (c->has("holdout_seed")) spec.holdout_seed = c->unsigned_integer("holdout_seed");
    cfg.calibrate = spec;
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("JSON parse error: ") + e.what());
  }
  return parse_config(doc);
}

AtomicFile::AtomicFile(std::filesystem::path target) : target_(std::move(target)) {
  temp_ = target_;
  temp_ += ".tmp";
  if (target_.has_parent_path()) std::filesystem::create_directories(target_.parent_path());
  out_.open(temp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw DataError("cannot open " + temp_.string() + " for writing");
}

AtomicFile::~AtomicFile() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(temp_, ec);
  }
}

void AtomicFile::commit() {
  out_.flush();
  if (!out_) throw DataError("write failed for " + temp_.string());
  out_.close();
  std::filesystem::rename(temp_, target_);
  committed_ = true;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  // shortest form that round-trips
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_spectrum_csv(std::ostream& os, const ChannelPlan& plan, const Eigen::VectorXd& power) {
  const int n = plan.dft_size();
  os << kSpectrumHeader << '\n';
  for (int i = 0; i < n; ++i) {
    const int m = (i + n / 2) % n;  // DC centred: -N/2 .. N/2-1
    const double db = 10.0 * std::log10(std::max(power[m], 1e-300));
    os << format_number(plan.bin_frequency(m)) << ',' << format_number(db) << '\n';
  }
}

void write_roc_csv(std::ostream& os, const std::vector<SweepEntry>& sweep) {
  std::vector<const SweepEntry*> order;
  for (const auto& e : sweep) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(),
                   [](const SweepEntry* a, const SweepEntry* b) { return a->value < b->value; });
  os << kRocHeader << '\n';
  for (const SweepEntry* e : order) {
    for (const RocPoint& p : e->curve.points) {
      os << format_number(e->value) << ',' << format_number(p.lambda) << ',' << format_number(p.pfa) << ','
         << format_number(p.pfa_ci.lo) << ',' << format_number(p.pfa_ci.hi) << ',' << format_number(p.pd)
         << ',' << format_number(p.pd_ci.lo) << ',' << format_number(p.pd_ci.hi) << '\n';
    }
  }
}

void write_threshold_csv(std::ostream& os, const std::vector<ThresholdRow>& rows) {
  os << kThresholdHeader << '\n';
  for (const auto& r : rows)
    os << r.channel << ',' << format_number(r.target_pfa) << ',' << format_number(r.lambda) << ','
       << format_number(r.achieved_pfa) << ',' << format_number(r.ci.lo) << ',' << format_number(r.ci.hi)
       << '\n';
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  if (s == "inf") return kInf;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw DataError(where + ": not a number: '" + s + "'");
  }
}

}  // namespace

std::vector<ThresholdRow> read_threshold_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open thresholds file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kThresholdHeader)
    throw DataError(path.string() + ": expected header '" + std::string(kThresholdHeader) + "'");
  std::vector<ThresholdRow> rows;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (cells.size() != 6) throw DataError(where + ": expected 6 columns");
    ThresholdRow r;
    r.channel = static_cast<int>(parse_double(cells[0], where));
    r.target_pfa = parse_double(cells[1], where);
    r.lambda = parse_double(cells[2], where);
    r.achieved_pfa = parse_double(cells[3], where);
    r.ci = {parse_double(cells[4], where), parse_double(cells[5], where)};
    if (!(r.lambda >= 0.0) || !std::isfinite(r.lambda)) throw DataError(where + ": lambda must be finite and >= 0");
    rows.push_back(r);
  }
  return rows;
}

ThresholdVector select_thresholds(const std::vector<ThresholdRow>& rows, const ChannelPlan& plan,
                                  std::optional<double> target_pfa) {
  ThresholdVector t = ThresholdVector::uniform(plan, 0.0);
  std::vector<int> missing;
  for (int k : plan.channels()) {
    std::vector<const ThresholdRow*> found;
    for (const auto& r : rows)
      if (r.channel == k && (!target_pfa || r.target_pfa == *target_pfa)) found.push_back(&r);
    if (found.empty()) {
      missing.push_back(k);
      continue;
    }
    if (found.size() > 1)
      throw DataError("channel " + std::to_string(k) +
                      " has several thresholds; select one with --target-pfa");
    t.at(k) = found.front()->lambda;
  }
  if (!missing.empty()) {
    std::string list;
    for (int k : missing) list += (list.empty() ? "" : " ") + std::to_string(k);
    throw DataError("thresholds missing for channels: " + list);
  }
  return t;
}

std::filesystem::path sidecar_path(const std::filesystem::path& recording) {
  auto p = recording;
  p += ".json";
  return p;
}

namespace {

void put_le32(char* dst, float v) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  std::memcpy(dst, &bits, 4);
}

float get_le32(const char* src) {
  std::uint32_t bits;
  std::memcpy(&bits, src, 4);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  return std::bit_cast<float>(bits);
}

}  // namespace

void write_recording(const std::filesystem::path& path, const ChannelPlan& plan,
                     const std::vector<Baseband>& windows) {
  AtomicFile data(path);
  std::vector<char> buf(static_cast<std::size_t>(plan.dft_size()) * 8);
  for (const auto& w : windows) {
    if (w.size() != plan.dft_size()) throw std::invalid_argument("window length does not match dft_size");
    for (Eigen::Index n = 0; n < w.size(); ++n) {
      put_le32(&buf[static_cast<std::size_t>(n) * 8], static_cast<float>(w.samples[n].real()));
      put_le32(&buf[static_cast<std::size_t>(n) * 8 + 4], static_cast<float>(w.samples[n].imag()));
    }
    data.stream().write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  json side = {{"format", "cf32_le"},
               {"sample_rate", plan.sample_rate()},
               {"num_channels", plan.num_channels()},
               {"dft_size", plan.dft_size()}};
  AtomicFile meta(sidecar_path(path));
  meta.stream() << side.dump(2) << '\n';
  data.commit();
  meta.commit();
}

ChannelPlan read_sidecar(const std::filesystem::path& recording) {
  const auto path = sidecar_path(recording);
  std::ifstream in(path);
  if (!in) throw DataError("missing recording header " + path.string());
  json side;
  try {
    in >> side;
  } catch (const json::exception& e) {
    throw DataError("malformed recording header " + path.string() + ": " + e.what());
  }
  const auto fail = [&](const std::string& what) -> DataError {
    return DataError("malformed recording header " + path.string() + ": " + what);
  };
  if (!side.is_object()) throw fail("expected an object");
  for (const auto& [k, v] : side.items())
    if (k != "format" && k != "sample_rate" && k != "num_channels" && k != "dft_size")
      throw fail("unknown key '" + k + "'");
  if (!side.contains("format") || side["format"] != "cf32_le") throw fail("format must be \"cf32_le\"");
  if (!side.contains("sample_rate") || !side["sample_rate"].is_number()) throw fail("sample_rate missing");
  if (!side.contains("num_channels") || !side["num_channels"].is_number_integer())
    throw fail("num_channels missing");
  if (!side.contains("dft_size") || !side["dft_size"].is_number_integer()) throw fail("dft_size missing");
  try {
    return ChannelPlan(side["num_channels"].get<int>(), side["dft_size"].get<int>(),
                       side["sample_rate"].get<double>());
  } catch (const std::invalid_argument& e) {
    throw fail(e.what());
  }
}

RecordingReader::RecordingReader(const std::filesystem::path& path) : plan_(read_sidecar(path)) {
  in_.open(path, std::ios::binary);
  if (!in_) throw DataError("cannot open recording " + path.string());
  const auto bytes = std::filesystem::file_size(path);
  const auto window_bytes = static_cast<std::uintmax_t>(plan_.dft_size()) * 8;
  if (bytes % 8 != 0) throw DataError("recording size is not a whole number of complex float32 samples");
  if (bytes % window_bytes != 0)
    throw DataError("recording holds " + std::to_string(bytes / 8) + " samples, not divisible by dft_size " +
                    std::to_string(plan_.dft_size()));
  num_windows_ = bytes / window_bytes;
  buffer_.resize(static_cast<std::size_t>(window_bytes));
}

bool RecordingReader::next(Baseband& window) {
  if (!in_.read(buffer_.data(), static_cast<std::streamsize>(buffer_.size()))) return false;
  window.sample_rate = plan_.sample_rate();
  window.samples.resize(plan_.dft_size());
  for (Eigen::Index n = 0; n < plan_.dft_size(); ++n) {
    const float re = get_le32(&buffer_[static_cast<std::size_t>(n) * 8]);
    const float im = get_le32(&buffer_[static_cast<std::size_t>(n) * 8 + 4]);
    if (!std::isfinite(re) || !std::isfinite(im)) throw DataError("recording contains non-finite samples");
    window.samples[n] = {re, im};
  }
  return true;
}

Baseband quantize_to_recording(const Baseband& window) {
  Baseband out = window;
  for (auto& s : out.samples)
    s = {static_cast<double>(static_cast<float>(s.real())), static_cast<double>(static_cast<float>(s.imag()))};
  return out;
}

namespace {

ExperimentConfig load_with_overrides(const std::filesystem::path& config_path, const CommandOptions& opts) {
  ExperimentConfig cfg = load_config(config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.workers) cfg.workers = *opts.workers;
  return cfg;
}

void warn_overdrive(const CommandOptions& opts, std::int64_t count) {
  if (opts.log && count > 0)
    *opts.log << "warning: " << count << " LNA input samples exceeded IIP3/2; the cubic model is past its turnover\n";
}

}  // namespace

std::vector<std::filesystem::path> cmd_spectra(const std::filesystem::path& config_path,
                                               const CommandOptions& opts) {
  const ExperimentConfig cfg = load_with_overrides(config_path, opts);
  if (!cfg.spectra) throw ConfigError("spectra", "required key missing");
  const StageSpectra spectra = psd_stages(cfg.scenario, cfg.impairments, cfg.spectra->n_avg, cfg.seed);
  std::vector<std::filesystem::path> written;
  const auto dir = opts.out.empty() ? std::filesystem::path(".") : opts.out;
  for (SpectrumStage s : kSpectrumStages) {
    const auto path = dir / ("spectrum_" + stage_name(s) + ".csv");
    AtomicFile f(path);
    write_spectrum_csv(f.stream(), spectra.plan, spectra.at(s));
    f.commit();
    written.push_back(path);
  }
  return written;
}

std::filesystem::path cmd_roc(const std::filesystem::path& config_path, const CommandOptions& opts) {
  const ExperimentConfig cfg = load_with_overrides(config_path, opts);
  if (!cfg.roc) throw ConfigError("roc", "required key missing");
  SweepSpec spec{cfg.roc->parameter, cfg.roc->values, cfg.roc->target_pfa, cfg.roc->channel,
                 cfg.n_trials,       cfg.seed,         cfg.worker_count()};
  const auto sweep = at_path("roc", [&] { return sweep_impairment(cfg.scenario, cfg.impairments, spec); });
  std::int64_t overdriven = 0;
  for (const auto& e : sweep) overdriven += e.overdriven_samples;
  warn_overdrive(opts, overdriven);
  const auto path = opts.out.empty() ? std::filesystem::path("roc.csv") : opts.out;
  AtomicFile f(path);
  write_roc_csv(f.stream(), sweep);
  f.commit();
  return path;
}

std::filesystem::path cmd_calibrate(const std::filesystem::path& config_path, const CommandOptions& opts) {
  const ExperimentConfig cfg = load_with_overrides(config_path, opts);
  if (!cfg.calibrate) throw ConfigError("calibrate", "required key missing");
  std::vector<int> channels = cfg.calibrate->channels;
  if (channels.empty())
    for (int k : cfg.scenario.plan.channels())
      if (!cfg.scenario.occupancy.occupied(k)) channels.push_back(k);
  if (channels.empty()) throw ConfigError("scenario.occupied", "no idle channel to calibrate");

  const unsigned workers = cfg.worker_count();
  const auto h0 = run_trials(cfg.scenario, cfg.impairments, cfg.n_trials, cfg.seed, workers);
  const std::uint64_t holdout_seed = cfg.calibrate->holdout_seed.value_or(splitmix64(cfg.seed ^ 0x5eedULL));
  const auto holdout = run_trials(cfg.scenario, cfg.impairments, cfg.n_trials, holdout_seed, workers);
  warn_overdrive(opts, h0.overdriven_samples + holdout.overdriven_samples);

  std::vector<ThresholdRow> rows;
  for (int k : channels) {
    for (double target : cfg.calibrate->target_pfa) {
      ThresholdRow r;
      r.channel = k;
      r.target_pfa = target;
      r.lambda = calibrate_threshold(h0, k, target);
      std::size_t hits = 0;
      r.achieved_pfa = exceed_fraction(holdout, k, r.lambda, &hits);
      r.ci = wilson_interval(hits, holdout.n_trials());
      rows.push_back(r);
    }
  }
  const auto path = opts.out.empty() ? std::filesystem::path("thresholds.csv") : opts.out;
  AtomicFile f(path);
  write_threshold_csv(f.stream(), rows);
  f.commit();
  return path;
}

std::filesystem::path cmd_record(const std::filesystem::path& config_path, std::size_t n_windows,
                                 const CommandOptions& opts) {
  const ExperimentConfig cfg = load_with_overrides(config_path, opts);
  if (n_windows == 0) throw ConfigError("windows", "must be >= 1");
  std::vector<Baseband> windows;
  windows.reserve(n_windows);
  for (std::size_t t = 0; t < n_windows; ++t)
    windows.push_back(simulate_window(cfg.scenario, cfg.impairments, cfg.seed, t));
  const auto path = opts.out.empty() ? std::filesystem::path("recording.cf32") : opts.out;
  write_recording(path, cfg.scenario.plan, windows);
  return path;
}

DetectSummary cmd_detect(const std::filesystem::path& recording_path,
                         const std::filesystem::path& thresholds_path, const std::filesystem::path& out,
                         std::optional<double> target_pfa) {
  RecordingReader reader(recording_path);
  const ChannelPlan& plan = reader.plan();
  const ThresholdVector thresholds = select_thresholds(read_threshold_csv(thresholds_path), plan, target_pfa);

  DetectSummary summary;
  for (int k : plan.channels()) summary.busy_count[k] = 0;
  AtomicFile f(out.empty() ? std::filesystem::path("decisions.csv") : out);
  auto& os = f.stream();
  os << kDecisionHeader << '\n';
  Baseband window;
  while (reader.next(window)) {
    const EnergyVector e = channelize(window, plan);
    const DecisionVector d = decide(e, thresholds);
    for (std::size_t i = 0; i < plan.channels().size(); ++i) {
      const int k = plan.channels()[i];
      const bool busy = d.decisions[i] == Decision::Busy;
      if (busy) ++summary.busy_count[k];
      os << summary.windows << ',' << k << ',' << format_number(e.values[static_cast<Eigen::Index>(i)]) << ','
         << format_number(thresholds.values[static_cast<Eigen::Index>(i)]) << ',' << (busy ? "busy" : "idle")
         << '\n';
    }
    ++summary.windows;
  }
  f.commit();
  return summary;
}

}  // namespace edsim::io
