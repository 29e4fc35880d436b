#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "cqed/ensemble.hpp"
#include "cqed/params.hpp"
#include "cqed/photostat.hpp"

namespace cqed {

// ---------------------------------------------------------------------------
// Unit-tagged JSON quantities.
//
// Every numeric leaf in a parameter file is an object {"value": v, "unit": u};
// bare numbers are rejected so a detuning can never silently change meaning.
// Units understood here:
//   "MHz_over_2pi" -> rad/s          "ns", "ps", "s" -> seconds
//   "GHz", "MHz", "Hz" -> Hz         "1" -> dimensionless (also counts)
// ---------------------------------------------------------------------------

// Reads node[key], checks the unit is one of `allowed`, returns the value
// converted to the internal unit of the first entry in `allowed`. Throws
// std::runtime_error naming the key on any malformed leaf.
double quantity(const nlohmann::json& node, const std::string& key,
                std::initializer_list<const char*> allowed);

// {"value": ..., "unit": ...} leaf in the given unit, converting from the
// internal representation that `quantity` produces for that unit.
nlohmann::json quantity_json(double internal_value, const std::string& unit);

// Full parameter document: a required "system" block plus optional
// "detection", "coupling_spread" and "geometry" blocks.
struct ParamSet {
  SystemParams system;
  DetectionChain detection;
  CouplingDistribution spread;  // g_mean mirrors system.g unless given
  CavityGeometry geometry;
  bool has_detection = false;
  bool has_spread = false;
  bool has_geometry = false;
};

// Strict parse: unknown keys at any level, missing units, or bare numbers all
// throw with the offending path in the message. Loaded values are validated.
ParamSet params_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const ParamSet& p);

ParamSet load_params(const std::string& path);
void save_params(const std::string& path, const ParamSet& p);

nlohmann::json load_json(const std::string& path);
void save_json(const std::string& path, const nlohmann::json& j);

// ---------------------------------------------------------------------------
// CSV tables: one header line, comma separators, numeric cells. Lines that
// start with '#' are comments.
// ---------------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // equal lengths

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  const std::vector<double>& column(const std::string& name) const;  // throws if absent
};

void write_csv(const std::string& path, const CsvTable& t);
CsvTable read_csv(const std::string& path);

// ---------------------------------------------------------------------------
// CQTT click-stream container. Little-endian layout:
//   "CQTT" | u16 version | u32 tick_ps | u8 channels | u64 start_epoch
// followed by one 9-byte record per click: u64 tick, u8 channel. Records keep
// file order; ticks must be nondecreasing within each channel.
// ---------------------------------------------------------------------------

struct TimeTagFile {
  std::uint16_t version = 1;
  std::uint32_t tick_ps = 81;
  std::uint8_t channels = 2;
  std::uint64_t start_epoch = 0;  // unix seconds, 0 = unset
  std::vector<std::uint64_t> ticks;
  std::vector<std::uint8_t> channel;  // parallel to ticks

  std::size_t size() const { return ticks.size(); }
};

void validate(const TimeTagFile& f);

// Both ends validate, so a file on disk is well-formed by construction and a
// write -> read round trip is bitwise lossless.
void write_cqtt(const std::string& path, const TimeTagFile& f);
TimeTagFile read_cqtt(const std::string& path);

// One channel unpacked into a ClickStream (tick = tick_ps in seconds).
ClickStream channel_stream(const TimeTagFile& f, int channel);

// Merge streams into file records ordered by (tick, stream index). All
// streams must share one tick that is a whole number of picoseconds.
TimeTagFile tags_from_streams(const std::vector<ClickStream>& streams,
                              std::uint64_t start_epoch = 0);

// ---------------------------------------------------------------------------
// Detection chain applied to model outputs.
// ---------------------------------------------------------------------------

// Mean detected rate out of a mean emitted rate.
double apply_detection_chain(double rate, double eta);

// Bernoulli(eta) thinning plus Gaussian timestamp jitter (then re-sorted and
// re-quantized; clicks jittered below zero are clamped). eta = 1 with zero
// jitter returns the input unchanged. The RNG stream is derived from
// (seed, detector id), so two detectors fed the same seed stay independent.
ClickStream apply_detection_chain(const ClickStream& s, double eta, double jitter_sigma,
                                  std::uint64_t seed);

}  // namespace cqed
