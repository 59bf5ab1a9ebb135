#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "cfmimo/common.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

/// Which AP serves which UE. Stored as an M x K boolean relation; the
/// per-UE and per-AP views are derived from it on demand.
class ServiceMap {
 public:
  ServiceMap() = default;
  ServiceMap(int num_aps, int num_ues, bool value = false)
      : aps_(num_aps), ues_(num_ues), serve_(static_cast<std::size_t>(num_aps) * num_ues, value ? 1 : 0) {}

  int num_aps() const { return aps_; }
  int num_ues() const { return ues_; }

  bool serves(int m, int k) const { return serve_[index(m, k)] != 0; }
  void set(int m, int k, bool value = true) { serve_[index(m, k)] = value ? 1 : 0; }

  /// APs serving UE k, ascending.
  std::vector<int> serving_aps(int k) const {
    std::vector<int> out;
    for (int m = 0; m < aps_; ++m)
      if (serves(m, k)) out.push_back(m);
    return out;
  }

  /// UEs served by AP m, ascending.
  std::vector<int> served_ues(int m) const {
    std::vector<int> out;
    for (int k = 0; k < ues_; ++k)
      if (serves(m, k)) out.push_back(k);
    return out;
  }

  bool is_served(int k) const {
    for (int m = 0; m < aps_; ++m)
      if (serves(m, k)) return true;
    return false;
  }

  bool operator==(const ServiceMap&) const = default;

 private:
  std::size_t index(int m, int k) const {
    if (m < 0 || m >= aps_ || k < 0 || k >= ues_) throw IndexError("service map index out of range");
    return static_cast<std::size_t>(m) * ues_ + k;
  }

  int aps_ = 0;
  int ues_ = 0;
  std::vector<unsigned char> serve_;
};

/// Reference-element distance for every (AP, UE) pair, row m = AP m.
inline Eigen::MatrixXd link_distances(const Scenario& s) {
  Eigen::MatrixXd d(s.aps.size(), s.ues.size());
  for (std::size_t m = 0; m < s.aps.size(); ++m)
    for (std::size_t k = 0; k < s.ues.size(); ++k) d(m, k) = (s.ues[k].position - s.aps[m].position).norm();
  return d;
}

namespace detail {
// Indices 0..count-1 ordered by distance, ties by lower index.
template <class Dist>
std::vector<int> nearest_first(int count, Dist dist) {
  std::vector<int> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return dist(a) < dist(b); });
  return idx;
}
}  // namespace detail

inline ServiceMap fully_connected(int num_aps, int num_ues) { return ServiceMap(num_aps, num_ues, true); }

/// Every AP serves its `ues_per_ap` closest UEs. Some UEs may end up unserved.
inline ServiceMap ap_centric(const Scenario& s, int ues_per_ap) {
  const int M = static_cast<int>(s.aps.size());
  const int K = static_cast<int>(s.ues.size());
  if (ues_per_ap < 1 || ues_per_ap > K) throw ConfigError("ap_centric: UEs per AP must lie in [1, K]");
  const Eigen::MatrixXd d = link_distances(s);
  ServiceMap map(M, K);
  for (int m = 0; m < M; ++m) {
    const auto order = detail::nearest_first(K, [&](int k) { return d(m, k); });
    for (int i = 0; i < ues_per_ap; ++i) map.set(m, order[i]);
  }
  return map;
}

/// Every UE picks its `aps_per_ue` closest APs. AP loads may be unbalanced.
inline ServiceMap ue_centric(const Scenario& s, int aps_per_ue) {
  const int M = static_cast<int>(s.aps.size());
  const int K = static_cast<int>(s.ues.size());
  if (aps_per_ue < 1 || aps_per_ue > M) throw ConfigError("ue_centric: APs per UE must lie in [1, M]");
  const Eigen::MatrixXd d = link_distances(s);
  ServiceMap map(M, K);
  for (int k = 0; k < K; ++k) {
    const auto order = detail::nearest_first(M, [&](int m) { return d(m, k); });
    for (int i = 0; i < aps_per_ue; ++i) map.set(order[i], k);
  }
  return map;
}

/// UEs whose serving set overlaps that of UE k (trace(A_k A_j) != 0).
inline std::vector<int> strong_interferers(const ServiceMap& map, int k) {
  std::vector<int> out;
  for (int j = 0; j < map.num_ues(); ++j) {
    for (int m = 0; m < map.num_aps(); ++m) {
      if (map.serves(m, k) && map.serves(m, j)) {
        out.push_back(j);
        break;
      }
    }
  }
  return out;
}

// ----- selection masks ------------------------------------------------------

/// A_{k,m} x: x itself when AP m serves UE k, zero otherwise.
inline Cvec apply_link_mask(const ServiceMap& map, int k, int m, const Cvec& x) {
  return map.serves(m, k) ? x : Cvec::Zero(x.size());
}

/// A_k x for a stacked vector of `map.num_aps()` equal blocks.
inline Cvec apply_block_mask(const ServiceMap& map, int k, const Cvec& stacked) {
  const Eigen::Index block = stacked.size() / map.num_aps();
  Cvec out = stacked;
  for (int m = 0; m < map.num_aps(); ++m)
    if (!map.serves(m, k)) out.segment(m * block, block).setZero();
  return out;
}

/// Diagonal of the complement mask: 0 where AP m serves UE k, 1 elsewhere.
inline Rvec complement_diagonal(const ServiceMap& map, int k) {
  Rvec d(map.num_aps());
  for (int m = 0; m < map.num_aps(); ++m) d(m) = map.serves(m, k) ? 0.0 : 1.0;
  return d;
}

}  // namespace cfmimo
