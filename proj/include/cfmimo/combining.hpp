#pragma once

#include <map>
#include <string>
#include <vector>

#include "cfmimo/association.hpp"
#include "cfmimo/common.hpp"
#include "cfmimo/moments.hpp"

namespace cfmimo {

enum class CombinerKind { mr, przf };

inline std::string to_string(CombinerKind c) { return c == CombinerKind::mr ? "mr" : "przf"; }

/// Channel (or channel estimate) of one UE towards every AP:
/// antennas x aps, column m is the link to AP m. The column-major storage is
/// exactly the stacked vector [h_1; ...; h_M] used by centralized processing.
using LinkMatrix = Cmat;

inline Eigen::Map<const Cvec> stacked(const LinkMatrix& h) { return {h.data(), h.size()}; }

/// Solve G x = rhs for Hermitian positive-definite G via Cholesky. Throws when
/// G is not numerically positive definite.
inline Cmat solve_hpd(const Cmat& gram, const Cmat& rhs) {
  Eigen::LLT<Cmat> llt(gram);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14 * gram.rows()))
    throw SingularSystemError("combining: Gram matrix is not positive definite");
  return llt.solve(rhs);
}

// ----- maximum ratio --------------------------------------------------------

inline Cvec mr_decentralized(const std::vector<LinkMatrix>& est, const ServiceMap& map, int k, int m) {
  return apply_link_mask(map, k, m, est[k].col(m));
}

inline Cvec mr_centralized(const std::vector<LinkMatrix>& est, const ServiceMap& map, int k) {
  return apply_block_mask(map, k, stacked(est[k]));
}

// ----- partial regularized zero-forcing -------------------------------------

/// Local P-RZF combiners of every UE served by AP m, as columns of an
/// antennas x K matrix (zero columns for UEs the AP does not serve):
///   v_km = P (sum_{j in K_m} P h_jm h_jm^H + noise I)^{-1} h_km.
/// The Gram matrix is shared by all UEs of the AP and factored once.
inline Cmat przf_decentralized_at_ap(const std::vector<LinkMatrix>& est, const ServiceMap& map, int m,
                                     double tx_power, double noise_power) {
  const int K = map.num_ues();
  const Eigen::Index n = est.front().rows();
  Cmat out = Cmat::Zero(n, K);
  const auto served = map.served_ues(m);
  if (served.empty()) return out;

  Cmat hs(n, static_cast<Eigen::Index>(served.size()));
  for (std::size_t i = 0; i < served.size(); ++i) hs.col(i) = est[served[i]].col(m);
  Cmat gram = tx_power * hs * hs.adjoint();
  gram.diagonal().array() += noise_power;
  const Cmat v = tx_power * solve_hpd(gram, hs);
  for (std::size_t i = 0; i < served.size(); ++i) out.col(served[i]) = v.col(i);
  return out;
}

inline Cvec przf_decentralized(const std::vector<LinkMatrix>& est, const ServiceMap& map, int k, int m,
                               double tx_power, double noise_power) {
  if (!map.serves(m, k)) return Cvec::Zero(est[k].rows());
  return przf_decentralized_at_ap(est, map, m, tx_power, noise_power).col(k);
}

namespace detail {
// Rows of the stacked vector that belong to the serving APs of `aps`.
inline Cmat gather_blocks(const LinkMatrix& h, const std::vector<int>& aps) {
  Cmat out(h.rows(), static_cast<Eigen::Index>(aps.size()));
  for (std::size_t i = 0; i < aps.size(); ++i) out.col(i) = h.col(aps[i]);
  return out;
}
}  // namespace detail

/// Centralized P-RZF over the serving blocks of UE k:
///   v_k = P (sum_{j in Z_k} P A_k h_j h_j^H A_k + noise I)^{-1} A_k h_k.
/// Blocks outside the serving set only see the noise term and a zero
/// right-hand side, so they are zero; the system is solved on the serving
/// blocks alone.
inline Cvec przf_centralized(const std::vector<LinkMatrix>& est, const ServiceMap& map, int k, double tx_power,
                             double noise_power) {
  const Eigen::Index n = est[k].rows();
  const int M = map.num_aps();
  Cvec out = Cvec::Zero(n * M);
  const auto aps = map.serving_aps(k);
  if (aps.empty()) return out;
  const auto zk = strong_interferers(map, k);

  const Eigen::Index dim = n * static_cast<Eigen::Index>(aps.size());
  Cmat hz(dim, static_cast<Eigen::Index>(zk.size()));
  for (std::size_t i = 0; i < zk.size(); ++i) {
    const Cmat blocks = detail::gather_blocks(est[zk[i]], aps);
    hz.col(i) = Eigen::Map<const Cvec>(blocks.data(), dim);
  }
  Cmat gram = tx_power * hz * hz.adjoint();
  gram.diagonal().array() += noise_power;
  const Cmat own = detail::gather_blocks(est[k], aps);
  const Cvec v = tx_power * solve_hpd(gram, Eigen::Map<const Cvec>(own.data(), dim));
  for (std::size_t i = 0; i < aps.size(); ++i) out.segment(aps[i] * n, n) = v.segment(i * n, n);
  return out;
}

/// Centralized P-RZF combiners for every UE, as columns of an (N M) x K
/// matrix. UEs with the same serving set share the same Gram matrix, which
/// is then factored once.
inline Cmat przf_centralized_all(const std::vector<LinkMatrix>& est, const ServiceMap& map, double tx_power,
                                 double noise_power) {
  const int K = map.num_ues();
  const int M = map.num_aps();
  const Eigen::Index n = est.front().rows();
  Cmat out = Cmat::Zero(n * M, K);

  std::map<std::vector<int>, std::vector<int>> groups;
  for (int k = 0; k < K; ++k) {
    auto aps = map.serving_aps(k);
    if (!aps.empty()) groups[aps].push_back(k);
  }
  for (const auto& [aps, members] : groups) {
    const auto zk = strong_interferers(map, members.front());
    const Eigen::Index dim = n * static_cast<Eigen::Index>(aps.size());
    Cmat hz(dim, static_cast<Eigen::Index>(zk.size()));
    for (std::size_t i = 0; i < zk.size(); ++i) {
      const Cmat blocks = detail::gather_blocks(est[zk[i]], aps);
      hz.col(i) = Eigen::Map<const Cvec>(blocks.data(), dim);
    }
    Cmat gram = tx_power * hz * hz.adjoint();
    gram.diagonal().array() += noise_power;

    Cmat rhs(dim, static_cast<Eigen::Index>(members.size()));
    for (std::size_t i = 0; i < members.size(); ++i) {
      const Cmat own = detail::gather_blocks(est[members[i]], aps);
      rhs.col(i) = Eigen::Map<const Cvec>(own.data(), dim);
    }
    const Cmat v = tx_power * solve_hpd(gram, rhs);
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t b = 0; b < aps.size(); ++b)
        out.col(members[i]).segment(aps[b] * n, n) = v.col(i).segment(b * n, n);
  }
  return out;
}

// ----- large-scale fading decoding ------------------------------------------

/// Optimal LSFD weights
///   eta = P (sum_j E{zeta_kj zeta_kj^H} + F_k + Abar_k)^{-1} E{zeta_kk}.
/// Non-serving APs decouple (zero moments, unit diagonal, zero right-hand
/// side) and receive weight 0, so only the serving block is solved.
inline Cvec lsfd_weights(const MomentSet& mom, const ServiceMap& map, int k, double tx_power) {
  if (!(tx_power > 0.0)) throw SingularSystemError("lsfd_weights: tx_power must be positive");
  const int M = map.num_aps();
  Cvec eta = Cvec::Zero(M);
  const auto aps = map.serving_aps(k);
  if (aps.empty()) return eta;

  const Cmat full = mom.total_second() + mom.noise_matrix();
  const Eigen::Index s = static_cast<Eigen::Index>(aps.size());
  Cmat sys(s, s);
  Cvec rhs(s);
  for (Eigen::Index a = 0; a < s; ++a) {
    rhs(a) = mom.zeta_mean(aps[a]);
    for (Eigen::Index b = 0; b < s; ++b) sys(a, b) = full(aps[a], aps[b]);
  }
  const Cvec w = tx_power * solve_hpd(sys, rhs);
  for (Eigen::Index a = 0; a < s; ++a) eta(aps[a]) = w(a);
  return eta;
}

}  // namespace cfmimo
