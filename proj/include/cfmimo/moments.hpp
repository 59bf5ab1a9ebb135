#pragma once

#include <vector>

#include "cfmimo/common.hpp"

namespace cfmimo {

/// Monte Carlo estimates of the expectations entering the uplink SINR
/// bounds of one UE k, taken over synchronisation phases and pilot noise.
///
/// Decentralized part (per AP, length M):
///   zeta_mean       E{zeta_kk},            zeta_kj[m] = v_km^H A_km h_jm
///   zeta_second[j]  E{zeta_kj zeta_kj^H}   (M x M)
///   local_power     E{||A_km v_km||^2}
/// Centralized part:
///   xi_mean         E{xi_kk},              xi_kj = v_k^H A_k h_j
///   xi_power[j]     E{|xi_kj|^2}
///   central_power   E{||A_k v_k||^2}
struct MomentSet {
  int samples = 0;
  double noise_to_power = 0.0;  // noise_power / tx_power
  Rvec complement;              // diagonal of the complement mask, 1 on non-serving APs

  Cvec zeta_mean;
  std::vector<Cmat> zeta_second;
  Rvec local_power;

  cdouble xi_mean{0.0, 0.0};
  Rvec xi_power;
  double central_power = 0.0;

  bool has_decentralized() const { return zeta_mean.size() > 0; }
  bool has_centralized() const { return xi_power.size() > 0; }

  /// Diagonal uplink-noise term (noise_power / tx_power) E{||A_km v_km||^2}.
  Cmat noise_matrix() const {
    return (noise_to_power * local_power).cast<cdouble>().asDiagonal();
  }

  /// Sum over every UE j of E{zeta_kj zeta_kj^H}.
  Cmat total_second() const {
    Cmat s = Cmat::Zero(zeta_mean.size(), zeta_mean.size());
    for (const auto& c : zeta_second) s += c;
    return s;
  }

  /// Interference-plus-noise matrix of the decentralized bound:
  /// sum_j E{zeta zeta^H} - E{zeta_kk} E{zeta_kk}^H + F.
  Cmat interference_plus_noise() const {
    return total_second() - zeta_mean * zeta_mean.adjoint() + noise_matrix();
  }
};

}  // namespace cfmimo
