#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "cfmimo/campaign.hpp"
#include "cfmimo/scenario.hpp"

// JSON text formats for scenarios and campaign configurations. Keys are the
// C++ field names; doubles are written with round-trip precision.

namespace cfmimo {

using json = nlohmann::json;

namespace detail {

template <class T>
void read_field(const json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid configuration: field '") + key + "': " + e.what());
  }
}

inline void reject_unknown(const json& j, const std::set<std::string>& known) {
  if (!j.is_object()) throw ConfigError("invalid configuration: expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("invalid configuration: unknown field '" + key + "'");
}

inline json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("invalid scenario: position must have three coordinates");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace detail

// ----- enums ----------------------------------------------------------------

inline Architecture parse_architecture(const std::string& s) {
  if (s == "ap_centric") return Architecture::ap_centric;
  if (s == "ue_centric") return Architecture::ue_centric;
  if (s == "fully_connected") return Architecture::fully_connected;
  if (s == "mmimo") return Architecture::mmimo;
  throw ConfigError("invalid configuration: unknown architecture '" + s + "'");
}

inline Processing parse_processing(const std::string& s) {
  if (s == "cen") return Processing::centralized;
  if (s == "dec") return Processing::decentralized;
  throw ConfigError("invalid configuration: unknown processing '" + s + "'");
}

inline CombinerKind parse_combiner(const std::string& s) {
  if (s == "mr") return CombinerKind::mr;
  if (s == "przf") return CombinerKind::przf;
  throw ConfigError("invalid configuration: unknown combiner '" + s + "'");
}

inline CsiKind parse_csi(const std::string& s) {
  if (s == "perfect") return CsiKind::perfect;
  if (s == "uce") return CsiKind::uce;
  if (s == "sce") return CsiKind::sce;
  throw ConfigError("invalid configuration: unknown csi '" + s + "'");
}

// ----- GlobalConfig ---------------------------------------------------------

inline json to_json(const GlobalConfig& g) {
  return {{"area_side", g.area_side},         {"carrier_freq", g.carrier_freq}, {"bandwidth", g.bandwidth},
          {"spacing", g.spacing},             {"tx_power", g.tx_power},         {"noise_figure", g.noise_figure},
          {"pilot_length", g.pilot_length},   {"uplink_length", g.uplink_length}, {"num_aps", g.num_aps},
          {"antennas_per_ap", g.antennas_per_ap}, {"num_ues", g.num_ues}};
}

inline const std::set<std::string>& global_keys() {
  static const std::set<std::string> keys{"area_side",    "carrier_freq",  "bandwidth", "spacing",
                                          "tx_power",     "noise_figure",  "pilot_length", "uplink_length",
                                          "num_aps",      "antennas_per_ap", "num_ues"};
  return keys;
}

inline void read_global(const json& j, GlobalConfig& g) {
  detail::read_field(j, "area_side", g.area_side);
  detail::read_field(j, "carrier_freq", g.carrier_freq);
  detail::read_field(j, "bandwidth", g.bandwidth);
  detail::read_field(j, "spacing", g.spacing);
  detail::read_field(j, "tx_power", g.tx_power);
  detail::read_field(j, "noise_figure", g.noise_figure);
  detail::read_field(j, "pilot_length", g.pilot_length);
  detail::read_field(j, "uplink_length", g.uplink_length);
  detail::read_field(j, "num_aps", g.num_aps);
  detail::read_field(j, "antennas_per_ap", g.antennas_per_ap);
  detail::read_field(j, "num_ues", g.num_ues);
}

// ----- CampaignConfig -------------------------------------------------------

/// Flat object: the deployment fields followed by the campaign fields.
inline json to_json(const CampaignConfig& c) {
  json j = to_json(c.global);
  j["arch"] = to_string(c.arch);
  j["ues_per_ap"] = c.ues_per_ap;
  j["aps_per_ue"] = c.aps_per_ue;
  j["processing"] = to_string(c.processing);
  j["combiner"] = to_string(c.combiner);
  j["csi"] = to_string(c.csi);
  j["placements"] = c.placements;
  j["inner_draws"] = c.inner_draws;
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["threads"] = c.threads;
  j["sce_grid_points"] = c.grids.coarse_points;
  j["sce_refine_levels"] = c.grids.refine_levels;
  j["sce_refine_factor"] = c.grids.refine_factor;
  j["sce_tolerance"] = c.grids.tolerance;
  j["sce_max_iterations"] = c.grids.max_iterations;
  return j;
}

/// Overlay the fields present in `j` onto `c`. Unknown keys are rejected.
inline void apply_json(const json& j, CampaignConfig& c) {
  std::set<std::string> known = global_keys();
  known.insert({"arch", "ues_per_ap", "aps_per_ue", "processing", "combiner", "csi", "placements", "inner_draws",
                "seed", "out", "threads", "sce_grid_points", "sce_refine_levels", "sce_refine_factor",
                "sce_tolerance", "sce_max_iterations"});
  detail::reject_unknown(j, known);
  read_global(j, c.global);
  std::string s;
  if (j.contains("arch")) { detail::read_field(j, "arch", s); c.arch = parse_architecture(s); }
  if (j.contains("processing")) { detail::read_field(j, "processing", s); c.processing = parse_processing(s); }
  if (j.contains("combiner")) { detail::read_field(j, "combiner", s); c.combiner = parse_combiner(s); }
  if (j.contains("csi")) { detail::read_field(j, "csi", s); c.csi = parse_csi(s); }
  detail::read_field(j, "ues_per_ap", c.ues_per_ap);
  detail::read_field(j, "aps_per_ue", c.aps_per_ue);
  detail::read_field(j, "placements", c.placements);
  detail::read_field(j, "inner_draws", c.inner_draws);
  detail::read_field(j, "seed", c.seed);
  detail::read_field(j, "out", c.out);
  detail::read_field(j, "threads", c.threads);
  detail::read_field(j, "sce_grid_points", c.grids.coarse_points);
  detail::read_field(j, "sce_refine_levels", c.grids.refine_levels);
  detail::read_field(j, "sce_refine_factor", c.grids.refine_factor);
  detail::read_field(j, "sce_tolerance", c.grids.tolerance);
  detail::read_field(j, "sce_max_iterations", c.grids.max_iterations);
}

inline CampaignConfig parse_campaign_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  CampaignConfig c;
  apply_json(j, c);
  return c;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline CampaignConfig load_campaign_config(const std::string& path) {
  return parse_campaign_config(read_text_file(path));
}

// ----- Scenario -------------------------------------------------------------

inline json to_json(const Scenario& s) {
  json aps = json::array();
  for (const auto& ap : s.aps)
    aps.push_back({{"position", detail::vec3_json(ap.position)},
                   {"orientation", ap.orientation},
                   {"rows", ap.rows},
                   {"cols", ap.cols}});
  json ues = json::array();
  for (const auto& ue : s.ues) ues.push_back({{"position", detail::vec3_json(ue.position)}});
  return {{"seed", s.seed}, {"config", to_json(s.config)}, {"aps", aps}, {"ues", ues}};
}

inline Scenario scenario_from_json(const json& j) {
  Scenario s;
  try {
    detail::reject_unknown(j, {"seed", "config", "aps", "ues"});
    detail::reject_unknown(j.at("config"), global_keys());
    read_global(j.at("config"), s.config);
    s.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& a : j.at("aps")) {
      ApDescriptor ap;
      ap.position = detail::vec3_from(a.at("position"));
      ap.orientation = a.at("orientation").get<double>();
      ap.rows = a.at("rows").get<int>();
      ap.cols = a.at("cols").get<int>();
      s.aps.push_back(ap);
    }
    for (const auto& u : j.at("ues")) s.ues.push_back({detail::vec3_from(u.at("position"))});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
  return s;
}

inline std::string scenario_to_text(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

inline Scenario scenario_from_text(const std::string& text) {
  try {
    return scenario_from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
}

}  // namespace cfmimo
