#include "cqed/level_scheme.hpp"

#include <cmath>
#include <json.hpp>
#include <stdexcept>

namespace cqed {

using nlohmann::json;

std::string polarization_name(Polarization q) {
  switch (q) {
    case Polarization::sigma_minus: return "sigma-";
    case Polarization::pi: return "pi";
    default: return "sigma+";
  }
}

Polarization polarization_from_name(const std::string& name) {
  if (name == "sigma-") return Polarization::sigma_minus;
  if (name == "pi") return Polarization::pi;
  if (name == "sigma+") return Polarization::sigma_plus;
  throw std::invalid_argument("unknown polarization: " + name);
}

void validate(const LevelScheme& s) {
  if (s.ground.empty() || s.excited.empty()) throw std::invalid_argument("scheme: empty manifold");
  double top = 0.0;
  std::vector<double> branch(s.excited.size(), 0.0);
  for (const auto& c : s.couplings) {
    if (c.ground < 0 || c.ground >= static_cast<int>(s.ground.size()) || c.excited < 0 ||
        c.excited >= static_cast<int>(s.excited.size()))
      throw std::invalid_argument("scheme: coupling index out of range");
    const int dm = s.excited[c.excited].m_f - s.ground[c.ground].m_f;
    if (dm != static_cast<int>(c.pol))
      throw std::invalid_argument("scheme: polarization inconsistent with m_f change");
    top = std::max(top, std::abs(c.amplitude));
    branch[c.excited] += c.amplitude * c.amplitude;
  }
  if (std::abs(top - 1.0) > 1e-9)
    throw std::invalid_argument("scheme: strongest amplitude must be 1");
  for (double b : branch)
    if (std::abs(b - 1.0) > 1e-9)
      throw std::invalid_argument("scheme: branching ratios out of an excited state must sum to 1");
}

namespace {
// F=2 -> F'=3 relative strengths, cycling-normalized. Indexed by the ground
// m_f; dm = +1, 0, -1.
double cg_sigma_plus(int m) { return std::sqrt((3.0 + m) * (4.0 + m) / 30.0); }
double cg_pi(int m) { return std::sqrt((3.0 - m) * (3.0 + m) / 15.0); }
double cg_sigma_minus(int m) { return std::sqrt((3.0 - m) * (4.0 - m) / 30.0); }
}  // namespace

LevelScheme rb87_d2_scheme() {
  LevelScheme s;
  for (int m = -2; m <= 2; ++m) s.ground.push_back({"g" + std::to_string(m), m, 0.0});
  for (int m = -3; m <= 3; ++m) s.excited.push_back({"e" + std::to_string(m), m, 0.0, 0.0});
  auto gi = [](int m) { return m + 2; };
  auto ei = [](int m) { return m + 3; };
  for (int m = -2; m <= 2; ++m) {
    s.couplings.push_back({gi(m), ei(m + 1), Polarization::sigma_plus, cg_sigma_plus(m)});
    s.couplings.push_back({gi(m), ei(m), Polarization::pi, cg_pi(m)});
    s.couplings.push_back({gi(m), ei(m - 1), Polarization::sigma_minus, cg_sigma_minus(m)});
  }
  validate(s);
  return s;
}

LevelScheme two_level_scheme() {
  LevelScheme s;
  s.ground.push_back({"g", 0, 0.0});
  s.excited.push_back({"e", 1, 0.0, 0.0});
  s.couplings.push_back({0, 0, Polarization::sigma_plus, 1.0});
  validate(s);
  return s;
}

std::string scheme_to_json(const LevelScheme& s) {
  json j;
  for (const auto& g : s.ground)
    j["ground"].push_back({{"label", g.label}, {"m_f", g.m_f}, {"energy", g.energy}});
  for (const auto& e : s.excited)
    j["excited"].push_back({{"label", e.label},
                            {"m_f", e.m_f},
                            {"energy", e.energy},
                            {"stark_shift", e.stark_shift}});
  for (const auto& c : s.couplings)
    j["couplings"].push_back({{"ground", c.ground},
                              {"excited", c.excited},
                              {"polarization", polarization_name(c.pol)},
                              {"amplitude", c.amplitude}});
  return j.dump(2);
}

LevelScheme scheme_from_json(const std::string& text) {
  const json j = json::parse(text);
  LevelScheme s;
  for (const auto& g : j.at("ground"))
    s.ground.push_back({g.at("label").get<std::string>(), g.at("m_f").get<int>(),
                        g.at("energy").get<double>()});
  for (const auto& e : j.at("excited"))
    s.excited.push_back({e.at("label").get<std::string>(), e.at("m_f").get<int>(),
                         e.at("energy").get<double>(), e.at("stark_shift").get<double>()});
  for (const auto& c : j.at("couplings"))
    s.couplings.push_back({c.at("ground").get<int>(), c.at("excited").get<int>(),
                           polarization_from_name(c.at("polarization").get<std::string>()),
                           c.at("amplitude").get<double>()});
  validate(s);
  return s;
}

}  // namespace cqed
