#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cfmimo/channel.hpp"
#include "cfmimo/common.hpp"
#include "cfmimo/scenario.hpp"
#include "cfmimo/training.hpp"

namespace cfmimo {

enum class CsiKind { perfect, uce, sce };

inline std::string to_string(CsiKind k) {
  switch (k) {
    case CsiKind::perfect: return "perfect";
    case CsiKind::uce: return "uce";
    case CsiKind::sce: return "sce";
  }
  return "?";
}

/// Parameters recovered by the structured estimator.
struct SceParams {
  double distance = 0.0;
  double azimuth = 0.0;
  double elevation = 0.0;
  double sync_phase = 0.0;
  double u = 0.0;  // direction cosines of the selected grid point
  double v = 0.0;
  int iterations = 0;
  std::vector<double> residuals;  // ||y - T_p sqrt(P) h_L||^2 after each outer iteration
  bool degenerate = false;
};

struct ChannelEstimate {
  Cvec h_hat;
  CsiKind kind = CsiKind::perfect;
  std::optional<SceParams> params;
};

/// Search settings for the structured estimator. The angular search scans a
/// coarse_points x coarse_points grid of direction cosines over [-1, 1]^2,
/// then zooms `refine_levels` times around the best point, shrinking the cell
/// by `refine_factor` each time.
struct SceGrids {
  int coarse_points = 64;
  int refine_levels = 2;
  int refine_factor = 8;
  double tolerance = 1e-6;  // relative residual improvement that stops the loop
  int max_iterations = 10;

  void validate() const {
    if (coarse_points < 2 || refine_factor < 2) throw ConfigError("SCE grid resolutions must be at least 2");
    if (refine_levels < 0) throw ConfigError("SCE refinement levels must be non-negative");
    if (!(tolerance > 0.0)) throw ConfigError("SCE tolerance must be positive");
    if (max_iterations < 1) throw ConfigError("SCE needs at least one iteration");
  }

  double coarse_cell() const { return 2.0 / (coarse_points - 1); }
  double final_cell() const { return coarse_cell() / std::pow(double(refine_factor), refine_levels); }
};

inline ChannelEstimate perfect_csi(const Cvec& h) { return {h, CsiKind::perfect, std::nullopt}; }

/// Unstructured estimate y / (T_p sqrt(P)); its error covariance is
/// noise_power / (T_p P) times the identity.
inline ChannelEstimate uce(const PilotObservation& obs, int pilot_length, double tx_power) {
  if (!(tx_power > 0.0)) throw DomainError("uce: tx_power must be positive");
  if (pilot_length < 1) throw DomainError("uce: pilot length must be at least 1");
  return {obs.y_tilde / (pilot_length * std::sqrt(tx_power)), CsiKind::uce, std::nullopt};
}

/// Distance whose attenuation satisfies ||y||^2 = (N T_p sqrt(P) rho(d))^2,
/// i.e. rho(d) = ||y|| / (N T_p sqrt(P)).
inline double amplitude_match_distance(double y_norm, int antennas, int pilot_length, double tx_power,
                                       double wavelength) {
  return wavelength * antennas * pilot_length * std::sqrt(tx_power) / (4.0 * kPi * y_norm);
}

/// Structured maximum-likelihood estimator fitting the far-field model
/// rho(d) exp(i phi(d)) exp(i psi) alpha(u, v) to a de-spread observation.
///
/// Holds the phase tables of the coarse angular grid so that one instance can
/// be reused across every link with the same array geometry.
class SceEstimator {
 public:
  SceEstimator(const ArrayGeometry& geometry, const SceGrids& grids = {}) : geo_(geometry), grids_(grids) {
    grids_.validate();
    if (geo_.size() < 1) throw ConfigError("SCE: empty array");
    wavenumber_spacing_ = kTwoPi / geo_.wavelength * geo_.spacing;
    const int g = grids_.coarse_points;
    coarse_.resize(g);
    for (int i = 0; i < g; ++i) coarse_[i] = -1.0 + i * grids_.coarse_cell();
    coarse_u_ = conj_phase_table(coarse_, geo_.cols);
    coarse_v_ = conj_phase_table(coarse_, geo_.rows);
  }

  const ArrayGeometry& geometry() const { return geo_; }
  const SceGrids& grids() const { return grids_; }

  ChannelEstimate operator()(const PilotObservation& obs, int pilot_length, double tx_power) const {
    const Cvec& y = obs.y_tilde;
    if (y.size() != geo_.size()) throw DomainError("SCE: observation length does not match the array");
    const int n_ant = geo_.size();
    const double gain = pilot_length * std::sqrt(tx_power);
    const double lambda = geo_.wavelength;

    ChannelEstimate est;
    est.kind = CsiKind::sce;
    SceParams par;
    const double y_norm = y.norm();
    if (!(y_norm > 0.0)) {
      par.degenerate = true;
      par.distance = std::numeric_limits<double>::infinity();
      est.h_hat = Cvec::Zero(n_ant);
      est.params = par;
      return est;
    }

    // The angular objective |y^H alpha|^2 does not involve d or psi, so the
    // scan result is identical on every outer iteration and is computed once.
    const auto [u, v] = angle_search(y);
    const double elevation = std::asin(std::clamp(v, -1.0, 1.0));
    const double cos_el = std::cos(elevation);
    const double azimuth = cos_el > 0.0 ? std::asin(std::clamp(u / cos_el, -1.0, 1.0)) : 0.0;
    const Cvec alpha = steering_farfield(geo_, azimuth, elevation);
    const cdouble corr = alpha.dot(y);  // alpha^H y

    if (!(std::abs(corr) > 0.0)) {
      par.degenerate = true;
      par.distance = std::numeric_limits<double>::infinity();
      par.u = u;
      par.v = v;
      est.h_hat = Cvec::Zero(n_ant);
      est.params = par;
      return est;
    }

    auto phase_step = [&](double d) {
      // arg(alpha^H y) - phi(d), with phi(d) reduced modulo one wavelength.
      const double cycles = d / lambda;
      return wrap_phase(std::arg(corr) + kTwoPi * (cycles - std::floor(cycles)));
    };
    auto residual = [&](double d, double psi) {
      return (y - gain * local_channel(d, azimuth, elevation, psi, geo_)).squaredNorm();
    };

    double d_hat = 0.0;
    double psi_hat = 0.0;
    double previous = std::numeric_limits<double>::infinity();
    for (int it = 0; it < grids_.max_iterations; ++it) {
      d_hat = amplitude_match_distance(y_norm, n_ant, pilot_length, tx_power, lambda);
      psi_hat = phase_step(d_hat);
      // Range refinement: with the phase re-fitted, the residual in d is
      // minimised by the least-squares amplitude |alpha^H y| / (N T_p sqrt(P)).
      const double rho_ls = std::abs(corr) / (gain * n_ant);
      d_hat = lambda / (4.0 * kPi * rho_ls);
      psi_hat = phase_step(d_hat);

      const double r = residual(d_hat, psi_hat);
      par.residuals.push_back(r);
      par.iterations = it + 1;
      if (previous - r < grids_.tolerance * previous) break;
      previous = r;
    }

    par.distance = d_hat;
    par.azimuth = azimuth;
    par.elevation = elevation;
    par.sync_phase = psi_hat;
    par.u = u;
    par.v = v;
    est.h_hat = local_channel(d_hat, azimuth, elevation, psi_hat, geo_);
    est.params = std::move(par);
    return est;
  }

  /// Grid-then-refine maximisation of |y^H alpha(u, v)|^2 over the visible
  /// region u^2 + v^2 <= 1.
  std::pair<double, double> angle_search(const Cvec& y) const {
    // y is stored element-major as n = q * cols + p: view it as cols x rows.
    const Eigen::Map<const Cmat> ymat(y.data(), geo_.cols, geo_.rows);

    double best = -1.0;
    double bu = 0.0, bv = 0.0;
    scan(ymat.transpose().lazyProduct(coarse_u_), coarse_v_, coarse_, coarse_, best, bu, bv);

    double cell = grids_.coarse_cell();
    const int f = grids_.refine_factor;
    std::vector<double> us(2 * f + 1), vs(2 * f + 1);
    for (int level = 0; level < grids_.refine_levels; ++level) {
      cell /= f;
      for (int j = -f; j <= f; ++j) {
        us[j + f] = bu + j * cell;
        vs[j + f] = bv + j * cell;
      }
      const Cmat pu = conj_phase_table(us, geo_.cols);
      const Cmat pv = conj_phase_table(vs, geo_.rows);
      double cu = bu, cv = bv;
      scan(ymat.transpose().lazyProduct(pu), pv, us, vs, best, cu, cv);
      bu = cu;
      bv = cv;
    }
    return {bu, bv};
  }

 private:
  static bool visible(double u, double v) { return u * u + v * v <= 1.0 + 1e-12; }

  static double wrap_phase(double x) {
    x = std::fmod(x, kTwoPi);
    return x < 0.0 ? x + kTwoPi : x;
  }

  // Column i holds exp(-i k spacing * idx * c_i) for idx = 0..count-1.
  Cmat conj_phase_table(const std::vector<double>& cosines, int count) const {
    Cmat t(count, static_cast<Eigen::Index>(cosines.size()));
    for (std::size_t i = 0; i < cosines.size(); ++i) {
      for (int idx = 0; idx < count; ++idx) t(idx, i) = std::polar(1.0, -wavenumber_spacing_ * idx * cosines[i]);
    }
    return t;
  }

  // Visits the visible (us[i], vs[j]) in v-major order and keeps the point
  // with the largest |sum_q partial(q, i) pv(q, j)|^2 above `best`.
  static void scan(const Cmat& partial, const Cmat& pv, const std::vector<double>& us, const std::vector<double>& vs,
                   double& best, double& bu, double& bv) {
    for (std::size_t j = 0; j < vs.size(); ++j) {
      const auto col = pv.col(j);
      for (std::size_t i = 0; i < us.size(); ++i) {
        if (!visible(us[i], vs[j])) continue;
        const double s = std::norm(partial.col(i).cwiseProduct(col).sum());
        if (s > best) {
          best = s;
          bu = us[i];
          bv = vs[j];
        }
      }
    }
  }

  ArrayGeometry geo_;
  SceGrids grids_;
  double wavenumber_spacing_ = 0.0;
  std::vector<double> coarse_;
  Cmat coarse_u_;
  Cmat coarse_v_;
};

inline ChannelEstimate sce(const PilotObservation& obs, int pilot_length, double tx_power,
                           const ArrayGeometry& geometry, const SceGrids& grids = {}) {
  return SceEstimator(geometry, grids)(obs, pilot_length, tx_power);
}

/// Normalised squared error ||h_hat - h||^2 / ||h||^2.
inline double nmse(const Cvec& h_hat, const Cvec& h) { return (h_hat - h).squaredNorm() / h.squaredNorm(); }

}  // namespace cfmimo
