#include "rotospec/config_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace rotospec {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Typed, path-aware access to one JSON object.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_, "expected an object");
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    const std::set<std::string_view> allowed(keys);
    for (const auto& [key, value] : node_.items()) {
      if (!allowed.contains(key)) throw ConfigError(child(key), "unknown key");
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }
  std::string child(std::string_view key) const { return path_ + "." + std::string(key); }
  const json& raw(const std::string& key) const { return node_.at(key); }
  const std::string& path() const { return path_; }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    if (!has(key)) return require(key, fallback);
    const auto& v = node_.at(key);
    if (!v.is_number()) throw ConfigError(child(key), "expected a number");
    return v.get<double>();
  }

  long long integer(const std::string& key, std::optional<long long> fallback = std::nullopt) const {
    if (!has(key)) return require(key, fallback);
    const auto& v = node_.at(key);
    if (!v.is_number_integer()) throw ConfigError(child(key), "expected an integer");
    return v.get<long long>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) {
      return static_cast<std::uint64_t>(v.get<long long>());
    }
    throw ConfigError(child(key), "expected a non-negative integer");
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_boolean()) throw ConfigError(child(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) const {
    if (!has(key)) return require(key, fallback);
    const auto& v = node_.at(key);
    if (!v.is_string()) throw ConfigError(child(key), "expected a string");
    return v.get<std::string>();
  }

  const json& array(const std::string& key) const {
    const auto& v = node_.at(key);
    if (!v.is_array()) throw ConfigError(child(key), "expected an array");
    return v;
  }

 private:
  template <typename T>
  T require(const std::string& key, const std::optional<T>& fallback) const {
    if (!fallback) throw ConfigError(child(key), "missing required key");
    return *fallback;
  }

  const json& node_;
  std::string path_;
};

void check(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw ConfigError(path, message);
}

MachineSpec parse_machine(const Section& s, double sample_rate) {
  s.allow_only({"rotation_speed_rpm", "topological_charge", "reflection_coefficient",
                "radial_offset_m", "axial_offset_m", "tx_rx_separation_m", "target"});
  const MachineSpec defaults;
  MachineSpec m;
  const double rpm = s.number("rotation_speed_rpm");
  check(rpm > 0.0 && std::isfinite(rpm), s.child("rotation_speed_rpm"), "must be > 0");
  const long long l = s.integer("topological_charge", defaults.topological_charge);
  check(l >= 1 && l <= 1000, s.child("topological_charge"), "must be an integer >= 1");
  m.topological_charge = static_cast<int>(l);
  m.rotation_speed = rpm_to_rad_per_s(rpm);
  const double nyquist_rpm = 60.0 * (sample_rate / 2.0) / static_cast<double>(l);
  check(rpm <= nyquist_rpm, s.child("rotation_speed_rpm"),
        "exceeds the " + std::to_string(nyquist_rpm) +
            " rpm limit implied by the baseband sample rate");
  m.reflection_coefficient = s.number("reflection_coefficient", defaults.reflection_coefficient);
  check(m.reflection_coefficient >= 0.0, s.child("reflection_coefficient"), "must be >= 0");
  m.radial_offset = s.number("radial_offset_m", defaults.radial_offset);
  check(m.radial_offset >= 0.0, s.child("radial_offset_m"), "must be >= 0");
  m.axial_offset = s.number("axial_offset_m", defaults.axial_offset);
  check(m.axial_offset >= 0.0, s.child("axial_offset_m"), "must be >= 0");
  m.tx_rx_separation = s.number("tx_rx_separation_m", defaults.tx_rx_separation);
  check(m.tx_rx_separation >= 0.0, s.child("tx_rx_separation_m"), "must be >= 0");
  m.target = s.boolean("target", true);
  return m;
}

SubcarrierPlan parse_plan(const Section& s) {
  s.allow_only({"subcarrier_count", "subcarrier_bandwidth_hz", "total_band_hz",
                "carrier_frequency_hz", "sample_rate_hz", "window_duration_s"});
  const SubcarrierPlan d;
  SubcarrierPlan p;
  const long long count = s.integer("subcarrier_count", static_cast<long long>(d.count));
  check(count >= 1, s.child("subcarrier_count"), "must be >= 1");
  p.count = static_cast<std::size_t>(count);
  p.subcarrier_bandwidth = s.number("subcarrier_bandwidth_hz", d.subcarrier_bandwidth);
  check(p.subcarrier_bandwidth > 0.0, s.child("subcarrier_bandwidth_hz"), "must be > 0");
  p.total_band = s.number("total_band_hz", d.total_band);
  check(p.total_band > 0.0, s.child("total_band_hz"), "must be > 0");
  p.carrier_frequency = s.number("carrier_frequency_hz", d.carrier_frequency);
  check(p.carrier_frequency > 0.0, s.child("carrier_frequency_hz"), "must be > 0");
  p.sample_rate = s.number("sample_rate_hz", d.sample_rate);
  check(p.sample_rate > 0.0, s.child("sample_rate_hz"), "must be > 0");
  p.window_duration = s.number("window_duration_s", d.window_duration);
  check(p.window_duration > 0.0, s.child("window_duration_s"), "must be > 0");
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(s.path(), e.what());
  }
  return p;
}

NoiseSpec parse_noise(const Section& s) {
  const std::string kind = s.string("kind");
  NoiseSpec n;
  if (kind == "awgn") {
    s.allow_only({"kind", "snr_db", "snr_bandwidth_hz", "rng_seed", "subcarriers",
                  "corrupted_fraction"});
    n.kind = NoiseKind::awgn;
    n.snr_db = s.number("snr_db");
    check(std::isfinite(n.snr_db), s.child("snr_db"), "must be finite");
    n.snr_bandwidth = s.number("snr_bandwidth_hz", 0.0);
    check(n.snr_bandwidth >= 0.0, s.child("snr_bandwidth_hz"), "must be >= 0");
  } else if (kind == "narrowband") {
    s.allow_only({"kind", "center_frequency_hz", "bandwidth_hz", "power_linear", "rng_seed",
                  "subcarriers", "corrupted_fraction"});
    n.kind = NoiseKind::narrowband;
    n.center_frequency = s.number("center_frequency_hz");
    n.bandwidth = s.number("bandwidth_hz", n.bandwidth);
    check(n.bandwidth >= 0.0, s.child("bandwidth_hz"), "must be >= 0");
    n.power = s.number("power_linear");
    check(n.power >= 0.0, s.child("power_linear"), "must be >= 0");
  } else {
    throw ConfigError(s.child("kind"), "expected \"awgn\" or \"narrowband\"");
  }
  n.rng_seed = s.unsigned_integer("rng_seed", 0);
  if (s.has("subcarriers")) {
    const auto& arr = s.array("subcarriers");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto& v = arr[i];
      const std::string p = s.child("subcarriers") + "[" + std::to_string(i) + "]";
      check(v.is_number_integer() && v.get<long long>() >= 0, p, "expected a subcarrier index");
      n.subcarriers.push_back(static_cast<std::size_t>(v.get<long long>()));
    }
  }
  n.corrupted_fraction = s.number("corrupted_fraction", 0.0);
  check(n.corrupted_fraction >= 0.0 && n.corrupted_fraction <= 1.0,
        s.child("corrupted_fraction"), "must lie in [0, 1]");
  return n;
}

EstimatorSettings parse_estimator(const Section& s) {
  s.allow_only({"fine_enabled", "max_harmonic", "min_harmonics", "tolerance_floor_bins",
                "tolerance_scales_with_harmonic", "zone_halfwidth_rpm", "reliable_loc_ratio"});
  EstimatorSettings e;
  auto& x = e.extraction;
  x.fine_enabled = s.boolean("fine_enabled", x.fine_enabled);
  x.coarse.max_harmonic = static_cast<int>(s.integer("max_harmonic", x.coarse.max_harmonic));
  check(x.coarse.max_harmonic >= 1, s.child("max_harmonic"), "must be >= 1");
  x.coarse.min_harmonics = static_cast<int>(s.integer("min_harmonics", x.coarse.min_harmonics));
  check(x.coarse.min_harmonics >= 1, s.child("min_harmonics"), "must be >= 1");
  x.coarse.tolerance.floor_bins =
      static_cast<int>(s.integer("tolerance_floor_bins", x.coarse.tolerance.floor_bins));
  check(x.coarse.tolerance.floor_bins >= 0, s.child("tolerance_floor_bins"), "must be >= 0");
  x.coarse.tolerance.scale_with_index =
      s.boolean("tolerance_scales_with_harmonic", x.coarse.tolerance.scale_with_index);
  auto& a = e.aggregation;
  a.zone_halfwidth_rpm = s.number("zone_halfwidth_rpm", a.zone_halfwidth_rpm);
  check(a.zone_halfwidth_rpm >= 0.0, s.child("zone_halfwidth_rpm"), "must be >= 0");
  a.reliable_loc_ratio = s.number("reliable_loc_ratio", a.reliable_loc_ratio);
  check(a.reliable_loc_ratio >= 0.0 && a.reliable_loc_ratio <= 1.0,
        s.child("reliable_loc_ratio"), "must lie in [0, 1]");
  return e;
}

Sweep parse_sweep(const Section& s) {
  s.allow_only({"parameter", "values"});
  Sweep sw;
  const std::string name = s.string("parameter");
  const auto p = parse_sweep_parameter(name);
  if (!p) {
    throw ConfigError(s.child("parameter"),
                      "expected one of snr_db, subcarrier_count, window_duration, "
                      "threshold, rotation_speed");
  }
  sw.parameter = *p;
  if (!s.has("values")) throw ConfigError(s.child("values"), "missing required key");
  const auto& arr = s.array("values");
  check(!arr.empty(), s.child("values"), "must be non-empty");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = s.child("values") + "[" + std::to_string(i) + "]";
    check(arr[i].is_number(), path, "expected a number");
    const double v = arr[i].get<double>();
    check(std::isfinite(v), path, "must be finite");
    if (sw.parameter != SweepParameter::snr_db) check(v > 0.0, path, "must be > 0");
    sw.values.push_back(v);
  }
  return sw;
}

Scenario parse_scenario_section(const Section& s) {
  s.allow_only({"name", "machines", "plan", "noise", "threshold_linear", "threshold_dbm",
                "machine_count", "estimator", "sweep", "trials", "rng_seed"});
  Scenario sc;
  sc.name = s.string("name");
  check(!sc.name.empty(), s.child("name"), "must be non-empty");

  if (s.has("plan")) sc.plan = parse_plan(Section(s.raw("plan"), s.child("plan")));

  if (!s.has("machines")) throw ConfigError(s.child("machines"), "missing required key");
  const auto& machines = s.array("machines");
  check(!machines.empty(), s.child("machines"), "must list at least one machine");
  for (std::size_t i = 0; i < machines.size(); ++i) {
    sc.machines.push_back(parse_machine(
        Section(machines[i], s.child("machines") + "[" + std::to_string(i) + "]"),
        sc.plan.sample_rate));
  }

  if (s.has("noise")) {
    const auto& noise = s.array("noise");
    for (std::size_t i = 0; i < noise.size(); ++i) {
      sc.noise.push_back(
          parse_noise(Section(noise[i], s.child("noise") + "[" + std::to_string(i) + "]")));
    }
  }

  if (s.has("threshold_linear") && s.has("threshold_dbm")) {
    throw ConfigError(s.child("threshold_dbm"), "conflicts with threshold_linear");
  }
  if (s.has("threshold_dbm")) {
    sc.threshold = dbm_to_linear(s.number("threshold_dbm"));
  } else {
    sc.threshold = s.number("threshold_linear", sc.threshold);
  }
  check(sc.threshold > 0.0 && std::isfinite(sc.threshold), s.child("threshold_linear"),
        "must be > 0");

  const long long m = s.integer("machine_count", 1);
  check(m >= 1, s.child("machine_count"), "must be >= 1");
  sc.machine_count = static_cast<std::size_t>(m);

  if (s.has("estimator")) {
    sc.estimator = parse_estimator(Section(s.raw("estimator"), s.child("estimator")));
  }
  if (s.has("sweep")) sc.sweep = parse_sweep(Section(s.raw("sweep"), s.child("sweep")));

  const long long trials = s.integer("trials", 1);
  check(trials >= 1, s.child("trials"), "must be >= 1");
  sc.trials = static_cast<std::size_t>(trials);
  sc.rng_seed = s.unsigned_integer("rng_seed", sc.rng_seed);

  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(s.path(), e.what());
  }
  return sc;
}

std::string noise_kind_name(NoiseKind k) { return k == NoiseKind::awgn ? "awgn" : "narrowband"; }

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("bad numeric field '" + s + "'");
  }
  return v;
}

std::size_t parse_size(const std::string& s) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("bad integer field '" + s + "'");
  }
  return v;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
  }
  const Section root(doc, "$");
  root.allow_only({"schema_version", "scenario"});
  const long long version = root.integer("schema_version");
  if (version > kScenarioSchemaVersion) {
    throw ConfigError(root.child("schema_version"),
                      "version " + std::to_string(version) +
                          " is newer than this build supports (" +
                          std::to_string(kScenarioSchemaVersion) + ")");
  }
  check(version >= 1, root.child("schema_version"), "must be >= 1");
  if (!root.has("scenario")) throw ConfigError(root.child("scenario"), "missing required key");
  return parse_scenario_section(Section(root.raw("scenario"), "scenario"));
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& sc) {
  ordered_json s;
  s["name"] = sc.name;
  ordered_json machines = ordered_json::array();
  for (const auto& m : sc.machines) {
    ordered_json j;
    j["rotation_speed_rpm"] = m.rpm();
    j["topological_charge"] = m.topological_charge;
    j["reflection_coefficient"] = m.reflection_coefficient;
    j["radial_offset_m"] = m.radial_offset;
    j["axial_offset_m"] = m.axial_offset;
    j["tx_rx_separation_m"] = m.tx_rx_separation;
    j["target"] = m.target;
    machines.push_back(std::move(j));
  }
  s["machines"] = std::move(machines);

  ordered_json plan;
  plan["subcarrier_count"] = sc.plan.count;
  plan["subcarrier_bandwidth_hz"] = sc.plan.subcarrier_bandwidth;
  plan["total_band_hz"] = sc.plan.total_band;
  plan["carrier_frequency_hz"] = sc.plan.carrier_frequency;
  plan["sample_rate_hz"] = sc.plan.sample_rate;
  plan["window_duration_s"] = sc.plan.window_duration;
  s["plan"] = std::move(plan);

  ordered_json noise = ordered_json::array();
  for (const auto& n : sc.noise) {
    ordered_json j;
    j["kind"] = noise_kind_name(n.kind);
    if (n.kind == NoiseKind::awgn) {
      j["snr_db"] = n.snr_db;
      j["snr_bandwidth_hz"] = n.snr_bandwidth;
    } else {
      j["center_frequency_hz"] = n.center_frequency;
      j["bandwidth_hz"] = n.bandwidth;
      j["power_linear"] = n.power;
    }
    j["rng_seed"] = n.rng_seed;
    if (!n.subcarriers.empty()) j["subcarriers"] = n.subcarriers;
    j["corrupted_fraction"] = n.corrupted_fraction;
    noise.push_back(std::move(j));
  }
  s["noise"] = std::move(noise);

  s["threshold_linear"] = sc.threshold;
  s["machine_count"] = sc.machine_count;

  const auto& x = sc.estimator.extraction;
  ordered_json est;
  est["fine_enabled"] = x.fine_enabled;
  est["max_harmonic"] = x.coarse.max_harmonic;
  est["min_harmonics"] = x.coarse.min_harmonics;
  est["tolerance_floor_bins"] = x.coarse.tolerance.floor_bins;
  est["tolerance_scales_with_harmonic"] = x.coarse.tolerance.scale_with_index;
  est["zone_halfwidth_rpm"] = sc.estimator.aggregation.zone_halfwidth_rpm;
  est["reliable_loc_ratio"] = sc.estimator.aggregation.reliable_loc_ratio;
  s["estimator"] = std::move(est);

  if (sc.sweep) {
    ordered_json sw;
    sw["parameter"] = std::string(to_string(sc.sweep->parameter));
    sw["values"] = sc.sweep->values;
    s["sweep"] = std::move(sw);
  }
  s["trials"] = sc.trials;
  s["rng_seed"] = sc.rng_seed;

  ordered_json doc;
  doc["schema_version"] = kScenarioSchemaVersion;
  doc["scenario"] = std::move(s);
  return doc.dump(2) + "\n";
}

std::vector<std::string> results_columns() {
  return {"scenario_name", "sweep_param", "sweep_value", "trial",     "machine",
          "true_rpm",      "fused_rpm",   "abs_error_rpm", "pct_error", "loc",
          "loc_ratio",     "detection_failed", "wall_time_ms"};
}

void write_results(std::span<const TrialResult> results, ResultFormat format,
                   std::ostream& out) {
  const auto cols = results_columns();
  if (format == ResultFormat::csv) {
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& r : results) {
      out << csv_field(r.scenario_name) << ',' << csv_field(r.sweep_param) << ','
          << shortest(r.sweep_value) << ',' << r.trial << ',' << r.machine << ','
          << shortest(r.true_rpm) << ',' << shortest(r.fused_rpm) << ','
          << shortest(r.abs_error_rpm) << ',' << shortest(r.pct_error) << ',' << r.loc << ','
          << shortest(r.loc_ratio) << ',' << (r.detection_failed ? "true" : "false") << ','
          << shortest(r.wall_time_ms) << '\n';
    }
    return;
  }
  ordered_json arr = ordered_json::array();
  for (const auto& r : results) {
    ordered_json j;
    j[cols[0]] = r.scenario_name;
    j[cols[1]] = r.sweep_param;
    j[cols[2]] = r.sweep_value;
    j[cols[3]] = r.trial;
    j[cols[4]] = r.machine;
    j[cols[5]] = r.true_rpm;
    j[cols[6]] = r.fused_rpm;
    j[cols[7]] = r.abs_error_rpm;
    j[cols[8]] = r.pct_error;
    j[cols[9]] = r.loc;
    j[cols[10]] = r.loc_ratio;
    j[cols[11]] = r.detection_failed;
    j[cols[12]] = r.wall_time_ms;
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

void write_results(std::span<const TrialResult> results, ResultFormat format,
                   const std::filesystem::path& destination) {
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + destination.string() + " for writing");
  write_results(results, format, out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + destination.string());
}

std::vector<TrialResult> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty results CSV");
  const auto header = split_csv_line(line);
  if (header != results_columns()) throw std::runtime_error("unexpected results CSV header");
  std::vector<TrialResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) throw std::runtime_error("wrong field count in results CSV");
    TrialResult r;
    r.scenario_name = f[0];
    r.sweep_param = f[1];
    r.sweep_value = parse_double(f[2]);
    r.trial = parse_size(f[3]);
    r.machine = parse_size(f[4]);
    r.true_rpm = parse_double(f[5]);
    r.fused_rpm = parse_double(f[6]);
    r.abs_error_rpm = parse_double(f[7]);
    r.pct_error = parse_double(f[8]);
    r.loc = parse_size(f[9]);
    r.loc_ratio = parse_double(f[10]);
    if (f[11] != "true" && f[11] != "false") throw std::runtime_error("bad boolean field");
    r.detection_failed = f[11] == "true";
    r.wall_time_ms = parse_double(f[12]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace rotospec
