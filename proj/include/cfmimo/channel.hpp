#pragma once

#include <cmath>
#include <string>

#include "cfmimo/common.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

/// Free-space amplitude gain lambda / (4 pi d).
inline double attenuation(double distance, double wavelength) {
  if (!(distance > 0.0)) throw DomainError("attenuation: distance must be positive");
  return wavelength / (4.0 * kPi * distance);
}

/// Unwrapped propagation phase -2 pi d / lambda.
inline double prop_phase(double distance, double wavelength) {
  if (!(distance > 0.0)) throw DomainError("prop_phase: distance must be positive");
  return -kTwoPi * distance / wavelength;
}

/// Spherical-wavefront line-of-sight channel from one UE to every element of
/// an AP array. Each element sees its own distance, so wavefront curvature
/// across the aperture is kept exactly.
inline Cvec exact_channel(const ApDescriptor& ap, const UeDescriptor& ue, double sync_phase,
                          const GlobalConfig& cfg) {
  const double lambda = cfg.wavelength();
  const double spacing = cfg.element_spacing();
  Cvec h(ap.antennas());
  for (int n = 0; n < ap.antennas(); ++n) {
    const double d = (ue.position - element_position(ap, n, spacing)).norm();
    if (!(d > 0.0)) throw DegenerateGeometryError("UE coincides with AP element " + std::to_string(n));
    h(n) = attenuation(d, lambda) * path_phasor(d, lambda, sync_phase);
  }
  return h;
}

/// Plane-wave array response for direction cosines (u, v). Element (p, q)
/// carries exp(i 2 pi / lambda * spacing * (p u + q v)); the reference element
/// is exactly 1.
inline Cvec steering_from_cosines(const ArrayGeometry& g, double u, double v) {
  const double k = kTwoPi / g.wavelength * g.spacing;
  Cvec a(g.size());
  for (int q = 0; q < g.rows; ++q) {
    for (int p = 0; p < g.cols; ++p) {
      a(q * g.cols + p) = (p == 0 && q == 0) ? cdouble(1.0, 0.0) : std::polar(1.0, k * (p * u + q * v));
    }
  }
  return a;
}

inline Cvec steering_farfield(const ArrayGeometry& g, double azimuth, double elevation) {
  return steering_from_cosines(g, std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
}

/// Far-field local model rho(d) exp(i phi(d)) exp(i psi) alpha(theta).
inline Cvec local_channel(double distance, double azimuth, double elevation, double sync_phase,
                          const ArrayGeometry& g) {
  const double rho = attenuation(distance, g.wavelength);
  return (rho * path_phasor(distance, g.wavelength, sync_phase)) * steering_farfield(g, azimuth, elevation);
}

/// Conventional far-field boundary 2 D^2 / lambda with D the aperture diagonal.
inline double fraunhofer_distance(const ArrayGeometry& g) {
  const double w = (g.cols - 1) * g.spacing;
  const double h = (g.rows - 1) * g.spacing;
  return 2.0 * (w * w + h * h) / g.wavelength;
}

}  // namespace cfmimo
