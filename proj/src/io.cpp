#include "cqed/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cqed/rng.hpp"
#include "cqed/units.hpp"

namespace cqed {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error(what); }

// Factor from the named unit to the internal representation of its dimension:
// rad/s for rates and detunings, seconds for times, Hz for real frequencies,
// and 1 for pure numbers. Unknown units return 0.
double unit_factor(const std::string& u) {
  if (u == "MHz_over_2pi") return rad_from_mhz(1.0);
  if (u == "s") return 1.0;
  if (u == "ns") return 1e-9;
  if (u == "ps") return 1e-12;
  if (u == "Hz") return 1.0;
  if (u == "MHz") return 1e6;
  if (u == "GHz") return 1e9;
  if (u == "1") return 1.0;
  return 0.0;
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) known = known || it.key() == k;
    if (!known) fail("unknown key '" + path + "." + it.key() + "'");
  }
}

double quantity_at(const json& node, const std::string& path,
                   std::initializer_list<const char*> allowed) {
  if (node.is_number())
    fail("'" + path + "' is a bare number; write {\"value\": ..., \"unit\": ...}");
  if (!node.is_object()) fail("'" + path + "' must be a {\"value\", \"unit\"} object");
  check_keys(node, path, {"value", "unit"});
  if (!node.contains("value") || !node["value"].is_number())
    fail("'" + path + ".value' must be a number");
  if (!node.contains("unit") || !node["unit"].is_string())
    fail("'" + path + ".unit' must be a string");
  const std::string u = node["unit"].get<std::string>();
  for (const char* a : allowed)
    if (u == a) return node["value"].get<double>() * unit_factor(u);
  std::string list;
  for (const char* a : allowed) list += list.empty() ? std::string("\"") + a + "\""
                                                     : std::string(", \"") + a + "\"";
  fail("'" + path + "' has unit \"" + u + "\"; expected one of " + list);
}

int count_at(const json& node, const std::string& path) {
  const double v = quantity_at(node, path, {"1"});
  const int n = static_cast<int>(std::lround(v));
  if (std::abs(v - n) > 1e-9) fail("'" + path + "' must be an integer count");
  return n;
}

}  // namespace

double quantity(const nlohmann::json& node, const std::string& key,
                std::initializer_list<const char*> allowed) {
  if (!node.is_object() || !node.contains(key)) fail("missing parameter '" + key + "'");
  return quantity_at(node[key], key, allowed);
}

nlohmann::json quantity_json(double internal_value, const std::string& unit) {
  const double f = unit_factor(unit);
  if (f <= 0.0) fail("unknown unit \"" + unit + "\"");
  return json{{"value", internal_value / f}, {"unit", unit}};
}

ParamSet params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail("parameter document must be a JSON object");
  check_keys(j, "params", {"system", "detection", "coupling_spread", "geometry"});
  if (!j.contains("system")) fail("missing 'system' block");

  ParamSet p;
  {
    const json& s = j["system"];
    if (!s.is_object()) fail("'system' must be an object");
    check_keys(s, "system", {"g", "kappa", "gamma", "delta_a", "delta_c", "omega_drive"});
    p.system.g = quantity(s, "g", {"MHz_over_2pi"});
    p.system.kappa = quantity(s, "kappa", {"MHz_over_2pi"});
    p.system.gamma = quantity(s, "gamma", {"MHz_over_2pi"});
    p.system.delta_a = s.contains("delta_a") ? quantity(s, "delta_a", {"MHz_over_2pi"}) : 0.0;
    p.system.delta_c = s.contains("delta_c") ? quantity(s, "delta_c", {"MHz_over_2pi"}) : 0.0;
    p.system.omega_drive =
        s.contains("omega_drive") ? quantity(s, "omega_drive", {"MHz_over_2pi"}) : 0.0;
    validate(p.system);
  }
  if (j.contains("detection")) {
    const json& d = j["detection"];
    if (!d.is_object()) fail("'detection' must be an object");
    check_keys(d, "detection", {"eta_ht", "eta_c", "eta_fs", "jitter_sigma", "tick"});
    if (d.contains("eta_ht")) p.detection.eta_ht = quantity(d, "eta_ht", {"1"});
    if (d.contains("eta_c")) p.detection.eta_c = quantity(d, "eta_c", {"1"});
    if (d.contains("eta_fs")) p.detection.eta_fs = quantity(d, "eta_fs", {"1"});
    if (d.contains("jitter_sigma"))
      p.detection.jitter_sigma = quantity(d, "jitter_sigma", {"ns", "ps", "s"});
    if (d.contains("tick")) p.detection.tick = quantity(d, "tick", {"ps", "ns", "s"});
    validate(p.detection);
    p.has_detection = true;
  }
  if (j.contains("coupling_spread")) {
    const json& c = j["coupling_spread"];
    if (!c.is_object()) fail("'coupling_spread' must be an object");
    check_keys(c, "coupling_spread", {"g_mean", "g_sigma", "nodes"});
    p.spread.g_mean =
        c.contains("g_mean") ? quantity(c, "g_mean", {"MHz_over_2pi"}) : p.system.g;
    p.spread.g_sigma = quantity(c, "g_sigma", {"MHz_over_2pi"});
    if (c.contains("nodes")) p.spread.nodes = count_at(c["nodes"], "coupling_spread.nodes");
    validate(p.spread);
    p.has_spread = true;
  }
  if (j.contains("geometry")) {
    const json& g = j["geometry"];
    if (!g.is_object()) fail("'geometry' must be an object");
    check_keys(g, "geometry", {"free_spectral_range", "t_ht", "t_lt", "losses"});
    p.geometry.free_spectral_range =
        quantity(g, "free_spectral_range", {"GHz", "MHz", "Hz"});
    p.geometry.t_ht = quantity(g, "t_ht", {"1"});
    p.geometry.t_lt = quantity(g, "t_lt", {"1"});
    p.geometry.losses = quantity(g, "losses", {"1"});
    validate(p.geometry);
    p.has_geometry = true;
  }
  return p;
}

nlohmann::json params_to_json(const ParamSet& p) {
  json j;
  j["system"] = {{"g", quantity_json(p.system.g, "MHz_over_2pi")},
                 {"kappa", quantity_json(p.system.kappa, "MHz_over_2pi")},
                 {"gamma", quantity_json(p.system.gamma, "MHz_over_2pi")},
                 {"delta_a", quantity_json(p.system.delta_a, "MHz_over_2pi")},
                 {"delta_c", quantity_json(p.system.delta_c, "MHz_over_2pi")},
                 {"omega_drive", quantity_json(p.system.omega_drive, "MHz_over_2pi")}};
  if (p.has_detection)
    j["detection"] = {{"eta_ht", quantity_json(p.detection.eta_ht, "1")},
                      {"eta_c", quantity_json(p.detection.eta_c, "1")},
                      {"eta_fs", quantity_json(p.detection.eta_fs, "1")},
                      {"jitter_sigma", quantity_json(p.detection.jitter_sigma, "ns")},
                      {"tick", quantity_json(p.detection.tick, "ps")}};
  if (p.has_spread)
    j["coupling_spread"] = {{"g_mean", quantity_json(p.spread.g_mean, "MHz_over_2pi")},
                            {"g_sigma", quantity_json(p.spread.g_sigma, "MHz_over_2pi")},
                            {"nodes", quantity_json(p.spread.nodes, "1")}};
  if (p.has_geometry)
    j["geometry"] = {{"free_spectral_range",
                      quantity_json(p.geometry.free_spectral_range, "GHz")},
                     {"t_ht", quantity_json(p.geometry.t_ht, "1")},
                     {"t_lt", quantity_json(p.geometry.t_lt, "1")},
                     {"losses", quantity_json(p.geometry.losses, "1")}};
  return j;
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail("'" + path + "': " + e.what());
  }
}

void save_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) fail("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) fail("write to '" + path + "' failed");
}

ParamSet load_params(const std::string& path) { return params_from_json(load_json(path)); }

void save_params(const std::string& path, const ParamSet& p) {
  save_json(path, params_to_json(p));
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return columns[i];
  fail("no column '" + name + "'");
}

void write_csv(const std::string& path, const CsvTable& t) {
  if (t.header.size() != t.columns.size()) fail("csv: header/column count mismatch");
  for (const auto& c : t.columns)
    if (c.size() != t.rows()) fail("csv: ragged columns");
  std::ofstream out(path);
  if (!out) fail("cannot write '" + path + "'");
  for (std::size_t i = 0; i < t.header.size(); ++i)
    out << (i ? "," : "") << t.header[i];
  out << '\n';
  char buf[40];
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.12g", t.columns[c][r]);
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) fail("write to '" + path + "' failed");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto a = cell.find_first_not_of(" \t\r");
      const auto b = cell.find_last_not_of(" \t\r");
      out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (t.header.empty()) {
      t.header = cells;
      t.columns.assign(cells.size(), {});
      continue;
    }
    if (cells.size() != t.header.size()) fail("'" + path + "': ragged row '" + line + "'");
    for (std::size_t c = 0; c < cells.size(); ++c) {
      char* end = nullptr;
      const double v = std::strtod(cells[c].c_str(), &end);
      if (end == cells[c].c_str() || *end != '\0')
        fail("'" + path + "': non-numeric cell '" + cells[c] + "'");
      t.columns[c].push_back(v);
    }
  }
  if (t.header.empty()) fail("'" + path + "': no header line");
  return t;
}

namespace {

void put_le(std::string& b, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(const std::string& b, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[at + i])) << (8 * i);
  return v;
}

constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 1 + 8;
constexpr std::size_t kRecordBytes = 8 + 1;

}  // namespace

void validate(const TimeTagFile& f) {
  if (f.tick_ps == 0) fail("cqtt: tick_ps must be > 0");
  if (f.channels == 0) fail("cqtt: channel count must be > 0");
  if (f.ticks.size() != f.channel.size()) fail("cqtt: ticks/channel size mismatch");
  std::vector<std::uint64_t> last(f.channels, 0);
  for (std::size_t i = 0; i < f.ticks.size(); ++i) {
    if (f.channel[i] >= f.channels) fail("cqtt: record on channel out of range");
    if (f.ticks[i] < last[f.channel[i]]) fail("cqtt: ticks decrease within a channel");
    last[f.channel[i]] = f.ticks[i];
  }
}

void write_cqtt(const std::string& path, const TimeTagFile& f) {
  validate(f);
  std::string buf;
  buf.reserve(kHeaderBytes + kRecordBytes * f.size());
  buf += "CQTT";
  put_le(buf, f.version, 2);
  put_le(buf, f.tick_ps, 4);
  put_le(buf, f.channels, 1);
  put_le(buf, f.start_epoch, 8);
  for (std::size_t i = 0; i < f.size(); ++i) {
    put_le(buf, f.ticks[i], 8);
    put_le(buf, f.channel[i], 1);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write '" + path + "'");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) fail("write to '" + path + "' failed");
}

TimeTagFile read_cqtt(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path + "'");
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < kHeaderBytes) fail("'" + path + "': truncated header");
  if (buf.compare(0, 4, "CQTT") != 0) fail("'" + path + "': bad magic");
  TimeTagFile f;
  f.version = static_cast<std::uint16_t>(get_le(buf, 4, 2));
  f.tick_ps = static_cast<std::uint32_t>(get_le(buf, 6, 4));
  f.channels = static_cast<std::uint8_t>(get_le(buf, 10, 1));
  f.start_epoch = get_le(buf, 11, 8);
  const std::size_t body = buf.size() - kHeaderBytes;
  if (body % kRecordBytes != 0) fail("'" + path + "': truncated record");
  const std::size_t n = body / kRecordBytes;
  f.ticks.resize(n);
  f.channel.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = kHeaderBytes + i * kRecordBytes;
    f.ticks[i] = get_le(buf, at, 8);
    f.channel[i] = static_cast<std::uint8_t>(get_le(buf, at + 8, 1));
  }
  validate(f);
  return f;
}

ClickStream channel_stream(const TimeTagFile& f, int channel) {
  validate(f);
  if (channel < 0 || channel >= f.channels) fail("cqtt: no such channel");
  ClickStream s;
  s.detector = channel;
  s.tick = static_cast<double>(f.tick_ps) * 1e-12;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.channel[i] == channel) s.ticks.push_back(f.ticks[i]);
  return s;
}

TimeTagFile tags_from_streams(const std::vector<ClickStream>& streams,
                              std::uint64_t start_epoch) {
  if (streams.empty() || streams.size() > 255) fail("cqtt: need 1..255 streams");
  const double tick = streams.front().tick;
  const double ps = tick * 1e12;
  if (std::abs(ps - std::round(ps)) > 1e-6 * ps || std::round(ps) < 1.0)
    fail("cqtt: tick is not a whole number of picoseconds");
  TimeTagFile f;
  f.tick_ps = static_cast<std::uint32_t>(std::llround(ps));
  f.channels = static_cast<std::uint8_t>(streams.size());
  f.start_epoch = start_epoch;
  std::size_t total = 0;
  for (const auto& s : streams) {
    validate(s);
    if (s.tick != tick) fail("cqtt: streams disagree on tick");
    total += s.ticks.size();
  }
  f.ticks.reserve(total);
  f.channel.reserve(total);
  for (std::size_t c = 0; c < streams.size(); ++c)
    for (std::uint64_t t : streams[c].ticks) {
      f.ticks.push_back(t);
      f.channel.push_back(static_cast<std::uint8_t>(c));
    }
  // stable sort on the tick alone: equal ticks keep channel order, so the
  // merge is deterministic and per-channel monotonicity survives.
  std::vector<std::size_t> idx(total);
  for (std::size_t i = 0; i < total; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return f.ticks[a] < f.ticks[b]; });
  TimeTagFile out = f;
  for (std::size_t i = 0; i < total; ++i) {
    out.ticks[i] = f.ticks[idx[i]];
    out.channel[i] = f.channel[idx[i]];
  }
  validate(out);
  return out;
}

double apply_detection_chain(double rate, double eta) {
  if (!(rate >= 0.0)) fail("detection: rate must be >= 0");
  if (!(eta >= 0.0 && eta <= 1.0)) fail("detection: eta must be in [0, 1]");
  return eta * rate;
}

ClickStream apply_detection_chain(const ClickStream& s, double eta, double jitter_sigma,
                                  std::uint64_t seed) {
  validate(s);
  if (!(eta >= 0.0 && eta <= 1.0)) fail("detection: eta must be in [0, 1]");
  if (!(jitter_sigma >= 0.0)) fail("detection: jitter_sigma must be >= 0");
  if (eta == 1.0 && jitter_sigma == 0.0) return s;
  auto rng = make_rng(seed, static_cast<std::uint64_t>(s.detector));
  std::bernoulli_distribution keep(eta);
  std::normal_distribution<double> noise(0.0, jitter_sigma);
  std::vector<double> times;
  times.reserve(s.ticks.size());
  for (std::uint64_t t : s.ticks) {
    if (!keep(rng)) continue;
    double tt = static_cast<double>(t) * s.tick;
    if (jitter_sigma > 0.0) tt = std::max(0.0, tt + noise(rng));
    times.push_back(tt);
  }
  std::sort(times.begin(), times.end());
  return stream_from_times(times, s.tick, s.detector);
}

}  // namespace cqed
