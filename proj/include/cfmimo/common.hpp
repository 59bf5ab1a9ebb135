#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cfmimo {

using cdouble = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Cvec = Eigen::VectorXcd;
using Cmat = Eigen::MatrixXcd;
using Rvec = Eigen::VectorXd;

/// Pseudo-random engine used by every stochastic operation.
using Rng = std::mt19937_64;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kReferenceTemperature = 290.0;

// ----- errors ---------------------------------------------------------------

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct DegenerateGeometryError : std::domain_error {
  using std::domain_error::domain_error;
};

struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ----- random streams -------------------------------------------------------

/// Engine for sub-stream (a, b) of a master seed. The mapping is a pure
/// function of its arguments, so a placement's randomness never depends on
/// which thread processes it or in which order.
inline Rng substream(std::uint64_t master_seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

/// Circularly-symmetric complex Gaussian with total variance `variance`
/// (each of the real and imaginary parts carries variance/2).
template <class Urbg>
cdouble complex_normal(Urbg& rng, double variance) {
  if (variance <= 0.0) return {0.0, 0.0};
  std::normal_distribution<double> n(0.0, 1.0);
  const double scale = std::sqrt(variance / 2.0);
  const double re = n(rng);
  const double im = n(rng);
  return {scale * re, scale * im};
}

template <class Urbg>
double uniform_phase(Urbg& rng) {
  return std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
}

/// exp(-i 2 pi d / lambda) * exp(i extra), with the path phase reduced modulo
/// one wavelength before exponentiation.
inline cdouble path_phasor(double distance, double wavelength, double extra_phase = 0.0) {
  const double cycles = distance / wavelength;
  const double frac = cycles - std::floor(cycles);
  return std::polar(1.0, -kTwoPi * frac + extra_phase);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watt(double dbm) { return 1e-3 * db_to_linear(dbm); }

}  // namespace cfmimo
