#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "cfmimo/common.hpp"

namespace cfmimo {

/// T_p mutually orthogonal pilot sequences stored as the columns of a
/// T_p x T_p matrix; every column has squared norm T_p.
struct PilotBook {
  Cmat pilots;

  int length() const { return static_cast<int>(pilots.rows()); }
  auto pilot(int n) const { return pilots.col(n); }
};

/// De-spread training observation of UE `ue` at AP `ap`.
struct PilotObservation {
  Cvec y_tilde;
  int ue = 0;
  int ap = 0;
};

/// Unit-modulus discrete-Fourier pilots, p_n[t] = exp(-i 2 pi n t / T_p).
inline PilotBook make_pilot_book(int length) {
  if (length < 1) throw ConfigError("pilot length must be at least 1");
  PilotBook book;
  book.pilots.resize(length, length);
  for (int n = 0; n < length; ++n) {
    for (int t = 0; t < length; ++t) {
      // Reduce n*t modulo the length first so large books keep exact phases.
      const int r = static_cast<int>((static_cast<long long>(n) * t) % length);
      book.pilots(t, n) = std::polar(1.0, -kTwoPi * r / length);
    }
  }
  return book;
}

/// Orthogonal assignment without reuse: UE k transmits pilot k.
inline std::vector<int> assign_pilots(int num_ues, int length) {
  if (length < num_ues) {
    throw ConfigError("pilot length " + std::to_string(length) + " cannot serve " +
                      std::to_string(num_ues) + " UEs without pilot reuse");
  }
  std::vector<int> assignment(num_ues);
  std::iota(assignment.begin(), assignment.end(), 0);
  return assignment;
}

/// Received training block at one AP:
///   Y = sum_k sqrt(P) h_k p_{n_k}^T + Z,   Z entries iid CN(0, noise_power).
/// `channels` holds h_k for every UE in column k.
template <class Urbg>
Cmat rx_pilot_matrix(const Cmat& channels, const std::vector<int>& assignment, const PilotBook& book,
                     double tx_power, double noise_power, Urbg& rng) {
  const Eigen::Index antennas = channels.rows();
  const int length = book.length();
  Cmat y(antennas, length);
  for (Eigen::Index t = 0; t < length; ++t) {
    for (Eigen::Index n = 0; n < antennas; ++n) y(n, t) = complex_normal(rng, noise_power);
  }
  const double amp = std::sqrt(tx_power);
  for (Eigen::Index k = 0; k < channels.cols(); ++k) {
    y.noalias() += (amp * channels.col(k)) * book.pilot(assignment[k]).transpose();
  }
  return y;
}

/// Correlate the training block with the conjugate of one pilot.
template <class Pilot>
Cvec despread(const Cmat& rx, const Pilot& pilot) {
  if (rx.cols() != pilot.size()) throw DomainError("despread: pilot length does not match the block");
  return rx * pilot.conjugate();
}

inline PilotObservation despread(const Cmat& rx, const PilotBook& book, int pilot_index, int ue, int ap) {
  return {despread(rx, book.pilot(pilot_index)), ue, ap};
}

}  // namespace cfmimo
