#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cfmimo/common.hpp"

namespace cfmimo {

/// System-wide constants shared by every link of a deployment.
///
/// Derived quantities (wavelength, noise floor, coherence length) are
/// computed on demand so the stored fields never disagree with each other.
struct GlobalConfig {
  double area_side = 500.0;               // m, square deployment area
  double carrier_freq = 30e9;             // Hz
  double bandwidth = 20e6;                // Hz
  double spacing = 0.0;                   // m, 0 selects half a wavelength
  double tx_power = dbm_to_watt(13.0);    // W per channel use
  double noise_figure = 7.0;              // dB
  int pilot_length = 0;                   // channel uses, 0 selects num_ues
  int uplink_length = 100;                // channel uses
  int num_aps = 25;
  int antennas_per_ap = 4;
  int num_ues = 40;

  double wavelength() const { return kSpeedOfLight / carrier_freq; }
  double element_spacing() const { return spacing > 0.0 ? spacing : wavelength() / 2.0; }

  /// Thermal floor at 290 K over the bandwidth, raised by the noise figure.
  double noise_power() const {
    return kBoltzmann * kReferenceTemperature * bandwidth * db_to_linear(noise_figure);
  }

  int pilots() const { return pilot_length > 0 ? pilot_length : num_ues; }
  int coherence_length() const { return pilots() + uplink_length; }

  /// Side of the square planar array; only meaningful after validate().
  int array_side() const { return static_cast<int>(std::lround(std::sqrt(double(antennas_per_ap)))); }

  void validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("invalid configuration: " + what); };
    if (!(area_side > 0.0)) fail("area_side must be positive");
    if (!(carrier_freq > 0.0)) fail("carrier_freq must be positive");
    if (!(bandwidth > 0.0)) fail("bandwidth must be positive");
    if (!(spacing >= 0.0)) fail("spacing must be non-negative");
    if (!(tx_power > 0.0)) fail("tx_power must be positive");
    if (!std::isfinite(noise_figure)) fail("noise_figure must be finite");
    if (num_aps < 1) fail("num_aps must be at least 1");
    if (num_ues < 1) fail("num_ues must be at least 1");
    if (antennas_per_ap < 1) fail("antennas_per_ap must be at least 1");
    const int side = array_side();
    if (side * side != antennas_per_ap) fail("antennas_per_ap must be a perfect square");
    if (pilot_length < 0) fail("pilot_length must be non-negative");
    if (pilots() < num_ues) fail("pilot_length must be at least num_ues (no pilot reuse)");
    if (uplink_length < 1) fail("uplink_length must be at least 1");
  }
};

/// Access point with a wall-mounted rows x cols planar array. Element 0 is
/// the reference element and sits at `position`; the array plane spans the
/// horizontal axis (cos o, sin o, 0) and the global vertical axis.
struct ApDescriptor {
  Vec3 position = Vec3::Zero();
  double orientation = 0.0;  // rad, rotation about the vertical axis
  int rows = 1;
  int cols = 1;

  int antennas() const { return rows * cols; }
  Vec3 horizontal_axis() const { return {std::cos(orientation), std::sin(orientation), 0.0}; }
  Vec3 normal_axis() const { return {-std::sin(orientation), std::cos(orientation), 0.0}; }
};

struct UeDescriptor {
  Vec3 position = Vec3::Zero();
};

struct Scenario {
  GlobalConfig config;
  std::vector<ApDescriptor> aps;
  std::vector<UeDescriptor> ues;
  std::uint64_t seed = 0;
};

/// Element layout plus the carrier needed to evaluate array responses.
struct ArrayGeometry {
  int rows = 1;
  int cols = 1;
  double spacing = 0.0;
  double wavelength = 0.0;

  int size() const { return rows * cols; }
};

inline ArrayGeometry array_geometry(const ApDescriptor& ap, const GlobalConfig& cfg) {
  return {ap.rows, ap.cols, cfg.element_spacing(), cfg.wavelength()};
}

/// Position of element `n` (0-based; n = 0 is the reference element).
/// Element n sits at lattice point p = n mod cols along the horizontal axis
/// and q = n / cols along the vertical axis.
inline Vec3 element_position(const ApDescriptor& ap, int n, double spacing) {
  if (n < 0 || n >= ap.antennas()) {
    throw IndexError("element index " + std::to_string(n) + " outside array of " +
                     std::to_string(ap.antennas()));
  }
  const int p = n % ap.cols;
  const int q = n / ap.cols;
  return ap.position + (p * spacing) * ap.horizontal_axis() + Vec3(0.0, 0.0, q * spacing);
}

struct LinkGeometry {
  double distance = 0.0;   // m, reference element to UE
  double azimuth = 0.0;    // rad, in the array frame; 0 is broadside
  double elevation = 0.0;  // rad, above the array's horizontal plane

  /// Direction cosines (u, v) against the horizontal and vertical array axes.
  double u() const { return std::cos(elevation) * std::sin(azimuth); }
  double v() const { return std::sin(elevation); }
};

inline LinkGeometry link_geometry(const ApDescriptor& ap, const UeDescriptor& ue) {
  const Vec3 delta = ue.position - ap.position;
  const double d = delta.norm();
  if (!(d > 0.0)) throw DegenerateGeometryError("UE coincides with the AP reference element");
  const Vec3 e = delta / d;
  LinkGeometry g;
  g.distance = d;
  g.elevation = std::asin(std::clamp(e.z(), -1.0, 1.0));
  g.azimuth = std::atan2(e.dot(ap.horizontal_axis()), e.dot(ap.normal_axis()));
  return g;
}

/// Random deployment: UEs and APs uniform over the square area, UE heights in
/// [1, 2] m, AP heights in [12, 13] m, orientations uniform on [0, 2 pi).
/// A single AP is a cellular base station at the area centre, 12.5 m high.
///
/// UEs and APs draw from separate sub-streams of `seed`, so deployments that
/// differ only in the AP layout share the same UE drop.
inline Scenario generate_scenario(const GlobalConfig& config, std::uint64_t seed) {
  config.validate();
  Scenario s;
  s.config = config;
  s.seed = seed;

  Rng ue_rng = substream(seed, 1);
  Rng ap_rng = substream(seed, 2);
  std::uniform_real_distribution<double> horizontal(0.0, config.area_side);

  s.ues.reserve(config.num_ues);
  for (int k = 0; k < config.num_ues; ++k) {
    UeDescriptor ue;
    const double x = horizontal(ue_rng);
    const double y = horizontal(ue_rng);
    const double z = std::uniform_real_distribution<double>(1.0, 2.0)(ue_rng);
    ue.position = {x, y, z};
    s.ues.push_back(ue);
  }

  const int side = config.array_side();
  s.aps.reserve(config.num_aps);
  for (int m = 0; m < config.num_aps; ++m) {
    ApDescriptor ap;
    ap.rows = side;
    ap.cols = side;
    if (config.num_aps == 1) {
      ap.position = {config.area_side / 2.0, config.area_side / 2.0, 12.5};
    } else {
      const double x = horizontal(ap_rng);
      const double y = horizontal(ap_rng);
      const double z = std::uniform_real_distribution<double>(12.0, 13.0)(ap_rng);
      ap.position = {x, y, z};
    }
    ap.orientation = uniform_phase(ap_rng);
    s.aps.push_back(ap);
  }
  return s;
}

}  // namespace cfmimo
