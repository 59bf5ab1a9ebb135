#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cfmimo/association.hpp"
#include "cfmimo/combining.hpp"
#include "cfmimo/common.hpp"
#include "cfmimo/estimation.hpp"
#include "cfmimo/performance.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

enum class Architecture { ap_centric, ue_centric, fully_connected, mmimo };

inline std::string to_string(Architecture a) {
  switch (a) {
    case Architecture::ap_centric: return "ap_centric";
    case Architecture::ue_centric: return "ue_centric";
    case Architecture::fully_connected: return "fully_connected";
    case Architecture::mmimo: return "mmimo";
  }
  return "?";
}

/// Everything that defines one Monte Carlo campaign. Defaults are the
/// desk-scale setting: 250 m area, 10 UEs, 9 APs with 2x2 arrays.
struct CampaignConfig {
  GlobalConfig global = [] {
    GlobalConfig g;
    g.area_side = 250.0;
    g.num_aps = 9;
    g.antennas_per_ap = 4;
    g.num_ues = 10;
    return g;
  }();
  Architecture arch = Architecture::fully_connected;
  int ues_per_ap = 1;  // AP-centric: UEs served by each AP
  int aps_per_ue = 1;  // UE-centric: APs serving each UE
  Processing processing = Processing::centralized;
  CombinerKind combiner = CombinerKind::przf;
  CsiKind csi = CsiKind::sce;
  int placements = 200;
  int inner_draws = 100;
  std::uint64_t seed = 1;
  std::string out = "out";
  int threads = 0;  // 0 uses every hardware thread
  SceGrids grids{};

  /// Deployment actually simulated. The cellular architecture collapses all
  /// antennas into one base station: one AP with num_aps * antennas_per_ap
  /// elements, keeping the total antenna count.
  GlobalConfig deployment() const {
    GlobalConfig g = global;
    if (arch == Architecture::mmimo) {
      g.antennas_per_ap = global.num_aps * global.antennas_per_ap;
      g.num_aps = 1;
    }
    return g;
  }

  void validate() const {
    const GlobalConfig g = deployment();
    g.validate();
    grids.validate();
    if (placements < 1) throw ConfigError("invalid configuration: placements must be at least 1");
    if (inner_draws < 2) throw ConfigError("invalid configuration: inner_draws must be at least 2");
    if (threads < 0) throw ConfigError("invalid configuration: threads must be non-negative");
    if (arch == Architecture::ap_centric && (ues_per_ap < 1 || ues_per_ap > g.num_ues))
      throw ConfigError("invalid configuration: ues_per_ap must lie in [1, num_ues]");
    if (arch == Architecture::ue_centric && (aps_per_ue < 1 || aps_per_ue > g.num_aps))
      throw ConfigError("invalid configuration: aps_per_ue must lie in [1, num_aps]");
  }
};

/// One UE of one placement.
struct SeSample {
  int placement = 0;
  int ue = 0;
  double se = 0.0;  // bit/s/Hz
  bool served = false;
  double gamma = 0.0;
  bool degenerate = false;
};

struct CampaignResult {
  std::vector<SeSample> samples;    // ordered by (placement, ue)
  std::vector<ServiceMap> service;  // one per placement

  double unserved_share() const {
    if (samples.empty()) return 0.0;
    const auto n = std::count_if(samples.begin(), samples.end(), [](const SeSample& s) { return !s.served; });
    return double(n) / double(samples.size());
  }

  std::vector<double> se_values() const {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& s : samples) v.push_back(s.se);
    return v;
  }
};

inline ServiceMap build_service_map(const CampaignConfig& cfg, const Scenario& s) {
  const int M = static_cast<int>(s.aps.size());
  const int K = static_cast<int>(s.ues.size());
  switch (cfg.arch) {
    case Architecture::ap_centric: return ap_centric(s, cfg.ues_per_ap);
    case Architecture::ue_centric: return ue_centric(s, cfg.aps_per_ue);
    case Architecture::fully_connected:
    case Architecture::mmimo: return fully_connected(M, K);
  }
  return fully_connected(M, K);
}

/// Seed of placement i's geometry; the inner Monte Carlo loop of the same
/// placement uses substream(master, i, 1).
inline std::uint64_t placement_seed(std::uint64_t master, int placement) {
  return substream(master, static_cast<std::uint64_t>(placement), 0)();
}

/// Per-UE SINR and SE of a placement from its Monte Carlo moments.
inline std::vector<SeSample> placement_samples(int placement, const std::vector<MomentSet>& moments,
                                               const ServiceMap& map, Processing proc, const GlobalConfig& g) {
  std::vector<SeSample> out;
  out.reserve(moments.size());
  for (int k = 0; k < static_cast<int>(moments.size()); ++k) {
    SeSample s;
    s.placement = placement;
    s.ue = k;
    s.served = map.is_served(k);
    if (s.served) {
      try {
        const Sinr r = proc == Processing::decentralized ? sinr_decentralized_opt(moments[k], g.tx_power)
                                                         : sinr_centralized(moments[k]);
        s.gamma = r.gamma;
        s.degenerate = r.degenerate;
      } catch (const SingularSystemError&) {
        s.gamma = 0.0;
        s.degenerate = true;
      }
      s.se = std::isfinite(s.gamma) ? spectral_efficiency(s.gamma, g.uplink_length, g.coherence_length())
                                    : std::numeric_limits<double>::infinity();
    }
    out.push_back(s);
  }
  return out;
}

/// Run the campaign for several combining pipelines at once. All pipelines
/// see the same geometries, phases and pilot noise, so each result equals a
/// separate run of `cfg` with that pipeline's combiner and processing.
inline std::vector<CampaignResult> run_campaign_pipelines(const CampaignConfig& cfg,
                                                          std::span<const Pipeline> pipelines) {
  cfg.validate();
  const GlobalConfig g = cfg.deployment();
  const int P = cfg.placements;
  std::vector<std::vector<std::vector<SeSample>>> per_placement(P);
  std::vector<ServiceMap> maps(P);

  auto work = [&](int i) {
    const Scenario sc = generate_scenario(g, placement_seed(cfg.seed, i));
    ServiceMap map = build_service_map(cfg, sc);
    MomentInputs in;
    in.scenario = &sc;
    in.map = &map;
    in.csi = cfg.csi;
    in.inner_draws = cfg.inner_draws;
    in.grids = cfg.grids;
    Rng rng = substream(cfg.seed, static_cast<std::uint64_t>(i), 1);
    const auto moments = estimate_moments(in, pipelines, rng);
    per_placement[i].resize(pipelines.size());
    for (std::size_t p = 0; p < pipelines.size(); ++p)
      per_placement[i][p] = placement_samples(i, moments[p], map, pipelines[p].processing, g);
    maps[i] = std::move(map);
  };

  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, P);
  if (threads <= 1) {
    for (int i = 0; i < P; ++i) work(i);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int i = next++; i < P; i = next++) {
          try {
            work(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<CampaignResult> out(pipelines.size());
  for (std::size_t p = 0; p < pipelines.size(); ++p) {
    out[p].service = maps;
    for (int i = 0; i < P; ++i)
      out[p].samples.insert(out[p].samples.end(), per_placement[i][p].begin(), per_placement[i][p].end());
  }
  return out;
}

inline CampaignResult run_campaign(const CampaignConfig& cfg) {
  const Pipeline p{cfg.combiner, cfg.processing};
  return std::move(run_campaign_pipelines(cfg, std::span<const Pipeline>(&p, 1)).front());
}

// ----- empirical CDF --------------------------------------------------------

struct CdfPoint {
  double value = 0.0;
  double probability = 0.0;
};

/// Sorted distinct values with cumulative probability i / n (ties collapse
/// onto their highest rank). Zero-SE outage mass is kept as-is.
inline std::vector<CdfPoint> empirical_cdf(std::span<const double> samples) {
  if (samples.empty()) throw DomainError("empirical_cdf: no samples");
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  const double n = double(v.size());
  std::vector<CdfPoint> cdf;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    cdf.push_back({v[i], double(i + 1) / n});
  }
  return cdf;
}

/// Smallest value whose cumulative probability reaches p.
inline double cdf_quantile(const std::vector<CdfPoint>& cdf, double p) {
  for (const auto& pt : cdf)
    if (pt.probability >= p - 1e-12) return pt.value;
  return cdf.back().value;
}

inline double median(std::span<const double> samples) { return cdf_quantile(empirical_cdf(samples), 0.5); }

// ----- output ---------------------------------------------------------------

inline std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

inline void write_samples_csv(std::ostream& os, const CampaignConfig& cfg, const CampaignResult& r) {
  os << "placement_id,ue_id,arch,proc,combiner,csi,served,gamma,se_bits_per_hz,degenerate_flag\n";
  const std::string tag = to_string(cfg.arch) + "," + to_string(cfg.processing) + "," + to_string(cfg.combiner) +
                          "," + to_string(cfg.csi) + ",";
  for (const auto& s : r.samples) {
    os << s.placement << ',' << s.ue << ',' << tag << (s.served ? 1 : 0) << ',' << format_double(s.gamma) << ','
       << format_double(s.se) << ',' << (s.degenerate ? 1 : 0) << '\n';
  }
}

inline void write_cdf_csv(std::ostream& os, const CampaignResult& r) {
  os << "se_bits_per_hz,cumulative_probability\n";
  const auto values = r.se_values();
  for (const auto& pt : empirical_cdf(values)) os << format_double(pt.value) << ',' << format_double(pt.probability) << '\n';
}

/// Serving APs of every UE, space separated; empty for unserved UEs.
inline void write_service_csv(std::ostream& os, const CampaignResult& r) {
  os << "placement_id,ue_id,serving_aps\n";
  for (std::size_t i = 0; i < r.service.size(); ++i) {
    const ServiceMap& map = r.service[i];
    for (int k = 0; k < map.num_ues(); ++k) {
      os << i << ',' << k << ',';
      const auto aps = map.serving_aps(k);
      for (std::size_t a = 0; a < aps.size(); ++a) os << (a ? " " : "") << aps[a];
      os << '\n';
    }
  }
}

}  // namespace cfmimo
