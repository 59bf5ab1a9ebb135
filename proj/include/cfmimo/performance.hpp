#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfmimo/association.hpp"
#include "cfmimo/channel.hpp"
#include "cfmimo/combining.hpp"
#include "cfmimo/common.hpp"
#include "cfmimo/estimation.hpp"
#include "cfmimo/moments.hpp"
#include "cfmimo/scenario.hpp"
#include "cfmimo/training.hpp"

namespace cfmimo {

enum class Processing { centralized, decentralized };

inline std::string to_string(Processing p) { return p == Processing::centralized ? "cen" : "dec"; }

/// One combining chain whose moments are gathered during a Monte Carlo pass.
struct Pipeline {
  CombinerKind combiner = CombinerKind::mr;
  Processing processing = Processing::centralized;
};

struct Sinr {
  double gamma = 0.0;
  bool degenerate = false;  // zero interference-plus-noise with a nonzero signal
};

// ----- SINR bounds ----------------------------------------------------------

/// Use-and-then-forget bound of the decentralized receiver for weights eta:
///   |eta^H E{zeta_kk}|^2 / (eta^H Xi_k eta).
inline Sinr sinr_decentralized(const MomentSet& mom, const Cvec& eta) {
  if (eta.size() != mom.zeta_mean.size()) throw DomainError("sinr_decentralized: weight length mismatch");
  const double num = std::norm(eta.dot(mom.zeta_mean));
  const double den = std::real(eta.dot(mom.interference_plus_noise() * eta));
  if (num == 0.0) return {0.0, false};
  if (!(den > 0.0)) return {std::numeric_limits<double>::infinity(), true};
  return {num / den, false};
}

/// Decentralized bound at the optimal LSFD weights,
///   E{zeta_kk}^H (Xi_k + Abar_k / P)^{-1} E{zeta_kk},
/// evaluated on the serving block (the complement mask only touches
/// non-serving APs, where the mean is zero).
inline Sinr sinr_decentralized_opt(const MomentSet& mom, double tx_power) {
  if (!(tx_power > 0.0)) throw SingularSystemError("sinr_decentralized_opt: tx_power must be positive");
  std::vector<Eigen::Index> aps;
  for (Eigen::Index m = 0; m < mom.complement.size(); ++m)
    if (mom.complement(m) == 0.0) aps.push_back(m);
  if (aps.empty()) return {0.0, false};

  const Cmat xi = mom.interference_plus_noise();
  const Eigen::Index s = static_cast<Eigen::Index>(aps.size());
  Cmat sys(s, s);
  Cvec b(s);
  for (Eigen::Index a = 0; a < s; ++a) {
    b(a) = mom.zeta_mean(aps[a]);
    for (Eigen::Index c = 0; c < s; ++c) sys(a, c) = xi(aps[a], aps[c]);
  }
  if (b.squaredNorm() == 0.0) return {0.0, false};
  const Cvec x = solve_hpd(sys, b);
  return {std::max(0.0, std::real(b.dot(x))), false};
}

/// Use-and-then-forget bound of the centralized receiver:
///   |E{xi_kk}|^2 / (sum_j E{|xi_kj|^2} - |E{xi_kk}|^2 + (noise/P) E{||A_k v_k||^2}).
inline Sinr sinr_centralized(const MomentSet& mom) {
  const double num = std::norm(mom.xi_mean);
  const double den = mom.xi_power.sum() - num + mom.noise_to_power * mom.central_power;
  if (num == 0.0) return {0.0, false};
  if (!(den > 0.0)) return {std::numeric_limits<double>::infinity(), true};
  return {num / den, false};
}

inline double spectral_efficiency(double gamma, int uplink_length, int coherence_length) {
  if (!(gamma >= 0.0)) throw DomainError("spectral_efficiency: SINR must be non-negative");
  return double(uplink_length) / double(coherence_length) * std::log2(1.0 + gamma);
}

// ----- Monte Carlo moments --------------------------------------------------

/// Fixed per-placement inputs of the inner Monte Carlo loop.
struct MomentInputs {
  const Scenario* scenario = nullptr;
  const ServiceMap* map = nullptr;
  CsiKind csi = CsiKind::perfect;
  int inner_draws = 100;
  SceGrids grids{};
  /// Hold every synchronisation phase at zero instead of redrawing it.
  bool freeze_sync_phase = false;
  /// Override of the scenario noise power (e.g. 0 for noiseless checks).
  std::optional<double> noise_power;
};

/// Monte Carlo estimate of the SINR moments with the geometry held fixed.
/// Each inner draw redraws every UE's synchronisation phase and the pilot
/// noise at every AP, re-estimates the channels, rebuilds the combiners of
/// each requested pipeline and accumulates zeta / xi.
///
/// Randomness consumed per draw is independent of the service map and of the
/// pipelines, so runs that differ only in those see identical channels and
/// noise. Returns moments indexed [pipeline][ue].
template <class Urbg>
std::vector<std::vector<MomentSet>> estimate_moments(const MomentInputs& in, std::span<const Pipeline> pipelines,
                                                     Urbg& rng) {
  const Scenario& sc = *in.scenario;
  const ServiceMap& map = *in.map;
  const GlobalConfig& cfg = sc.config;
  if (in.inner_draws < 2) throw ConfigError("estimate_moments: need at least two inner draws");
  const int K = static_cast<int>(sc.ues.size());
  const int M = static_cast<int>(sc.aps.size());
  if (map.num_aps() != M || map.num_ues() != K) throw ConfigError("estimate_moments: map does not match scenario");
  const int N = sc.aps.front().antennas();
  const double power = cfg.tx_power;
  const double noise = in.noise_power.value_or(cfg.noise_power());
  const int tp = cfg.pilots();

  const PilotBook book = make_pilot_book(tp);
  const auto assignment = assign_pilots(K, tp);

  // Channels without synchronisation phase; a draw only rotates them.
  std::vector<LinkMatrix> base(K, LinkMatrix(N, M));
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < M; ++m) base[k].col(m) = exact_channel(sc.aps[m], sc.ues[k], 0.0, cfg);

  bool need_central_przf = false;
  for (const auto& p : pipelines)
    need_central_przf |= (p.processing == Processing::centralized && p.combiner == CombinerKind::przf);

  // Links whose estimate some combiner reads.
  std::vector<unsigned char> needed(static_cast<std::size_t>(K) * M, 0);
  for (int k = 0; k < K; ++k) {
    const auto aps = map.serving_aps(k);
    for (int m : aps) needed[k * M + m] = 1;
    if (need_central_przf && !aps.empty())
      for (int j : strong_interferers(map, k))
        for (int m : aps) needed[j * M + m] = 1;
  }

  std::optional<SceEstimator> sce_est;
  if (in.csi == CsiKind::sce) sce_est.emplace(array_geometry(sc.aps.front(), cfg), in.grids);

  std::vector<std::vector<MomentSet>> out(pipelines.size(), std::vector<MomentSet>(K));
  for (std::size_t p = 0; p < pipelines.size(); ++p) {
    for (int k = 0; k < K; ++k) {
      MomentSet& ms = out[p][k];
      ms.noise_to_power = noise / power;
      ms.complement = complement_diagonal(map, k);
      if (pipelines[p].processing == Processing::decentralized) {
        ms.zeta_mean = Cvec::Zero(M);
        ms.zeta_second.assign(K, Cmat::Zero(M, M));
        ms.local_power = Rvec::Zero(M);
      } else {
        ms.xi_power = Rvec::Zero(K);
      }
    }
  }

  std::vector<LinkMatrix> h(K, LinkMatrix(N, M));
  std::vector<LinkMatrix> est(K, LinkMatrix::Zero(N, M));
  Cmat at_ap(N, K);
  std::vector<Cmat> zeta(K, Cmat::Zero(M, K));  // zeta[k].col(j) = zeta_kj

  for (int draw = 0; draw < in.inner_draws; ++draw) {
    for (int k = 0; k < K; ++k) {
      const double phase = uniform_phase(rng);
      h[k] = in.freeze_sync_phase ? base[k] : LinkMatrix(base[k] * std::polar(1.0, phase));
    }

    for (int m = 0; m < M; ++m) {
      for (int k = 0; k < K; ++k) at_ap.col(k) = h[k].col(m);
      const Cmat rx = rx_pilot_matrix(at_ap, assignment, book, power, noise, rng);
      for (int k = 0; k < K; ++k) {
        if (!needed[k * M + m]) continue;
        switch (in.csi) {
          case CsiKind::perfect:
            est[k].col(m) = h[k].col(m);
            break;
          case CsiKind::uce:
            est[k].col(m) = uce(despread(rx, book, assignment[k], k, m), tp, power).h_hat;
            break;
          case CsiKind::sce:
            est[k].col(m) = (*sce_est)(despread(rx, book, assignment[k], k, m), tp, power).h_hat;
            break;
        }
      }
    }

    for (std::size_t p = 0; p < pipelines.size(); ++p) {
      const Pipeline& pl = pipelines[p];
      if (pl.processing == Processing::decentralized) {
        for (int m = 0; m < M; ++m) {
          Cmat v;
          if (pl.combiner == CombinerKind::przf) {
            v = przf_decentralized_at_ap(est, map, m, power, noise);
          } else {
            v = Cmat::Zero(N, K);
            for (int k = 0; k < K; ++k)
              if (map.serves(m, k)) v.col(k) = est[k].col(m);
          }
          for (int k = 0; k < K; ++k) {
            at_ap.col(k) = h[k].col(m);
            out[p][k].local_power(m) += v.col(k).squaredNorm();
          }
          const Cmat z = v.adjoint() * at_ap;  // z(k, j) = v_km^H h_jm
          for (int k = 0; k < K; ++k) zeta[k].row(m) = z.row(k);
        }
        for (int k = 0; k < K; ++k) {
          if (!map.is_served(k)) continue;
          MomentSet& ms = out[p][k];
          ms.zeta_mean += zeta[k].col(k);
          for (int j = 0; j < K; ++j) ms.zeta_second[j].noalias() += zeta[k].col(j) * zeta[k].col(j).adjoint();
        }
      } else {
        Cmat v;
        if (pl.combiner == CombinerKind::przf) {
          v = przf_centralized_all(est, map, power, noise);
        } else {
          v = Cmat::Zero(static_cast<Eigen::Index>(N) * M, K);
          for (int k = 0; k < K; ++k) v.col(k) = mr_centralized(est, map, k);
        }
        Cmat hs(static_cast<Eigen::Index>(N) * M, K);
        for (int k = 0; k < K; ++k) hs.col(k) = stacked(h[k]);
        const Cmat xi = v.adjoint() * hs;  // xi(k, j) = v_k^H h_j
        for (int k = 0; k < K; ++k) {
          MomentSet& ms = out[p][k];
          ms.xi_mean += xi(k, k);
          for (int j = 0; j < K; ++j) ms.xi_power(j) += std::norm(xi(k, j));
          ms.central_power += v.col(k).squaredNorm();
        }
      }
    }
  }

  const double inv = 1.0 / in.inner_draws;
  for (auto& per_pipeline : out) {
    for (auto& ms : per_pipeline) {
      ms.samples = in.inner_draws;
      if (ms.has_decentralized()) {
        ms.zeta_mean *= inv;
        for (auto& c : ms.zeta_second) c *= inv;
        ms.local_power *= inv;
      } else {
        ms.xi_mean *= inv;
        ms.xi_power *= inv;
        ms.central_power *= inv;
      }
    }
  }
  return out;
}

}  // namespace cfmimo
