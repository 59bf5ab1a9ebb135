// Acceptance suite. Each criterion prints exactly one line:
//   criterion <n>: PASS|FAIL <details>
// and the process exits non-zero if any selected criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cfmimo/cfmimo.hpp"

using namespace cfmimo;

namespace {

// ----- pinned tolerances ----------------------------------------------------

constexpr std::uint64_t kMasterSeed = 20240601;

constexpr int kUceDraws = 10000;
constexpr double kUceVarianceTolerance = 0.05;
constexpr double kUceRuntime = 10.0;

constexpr int kSceLinks = 100;
constexpr int kSceRequiredGood = 99;
constexpr double kSceChannelError = 1e-2;
constexpr double kSceRuntime = 30.0;

constexpr int kNmseLinks = 200;
constexpr double kNmseRuntime = 60.0;

constexpr int kPlacements = 200;
constexpr int kBootstrapResamples = 1000;
constexpr double kBootstrapLevel = 0.05;  // one-sided lower quantile
constexpr double kCampaignRuntime = 600.0;

constexpr double kOracleLsfd = 1e-10;
constexpr double kOracleSingleAp = 1e-6;
constexpr double kOracleMatchedFilter = 1e-9;
constexpr double kOracleRuntime = 10.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(clock::now() - start_).count(); }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_ = clock::now();
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Desk-scale deployment with the antenna total fixed at 36.
CampaignConfig desk(int aps, Architecture arch, CsiKind csi) {
  CampaignConfig c;
  c.global.area_side = 250.0;
  c.global.num_ues = 10;
  c.global.num_aps = aps;
  c.global.antennas_per_ap = 36 / aps;
  c.arch = arch;
  c.csi = csi;
  c.placements = kPlacements;
  c.inner_draws = 100;
  c.seed = kMasterSeed;
  c.threads = 0;
  return c;
}

// Per-placement SE values so resampling keeps the UEs of a placement together.
std::vector<std::vector<double>> by_placement(const CampaignResult& r, int placements) {
  std::vector<std::vector<double>> out(placements);
  for (const auto& s : r.samples) out[s.placement].push_back(s.se);
  return out;
}

double pooled_median(const std::vector<std::vector<double>>& groups, const std::vector<int>& pick) {
  std::vector<double> v;
  for (int i : pick) v.insert(v.end(), groups[i].begin(), groups[i].end());
  return median(v);
}

// Lower kBootstrapLevel quantile of median(a) - median(b) under a paired
// bootstrap over placements.
double bootstrap_lower(const CampaignResult& a, const CampaignResult& b, int placements) {
  const auto ga = by_placement(a, placements);
  const auto gb = by_placement(b, placements);
  Rng rng(substream(kMasterSeed, 99, 0));
  std::uniform_int_distribution<int> pick_one(0, placements - 1);
  std::vector<double> diff;
  diff.reserve(kBootstrapResamples);
  std::vector<int> pick(placements);
  for (int r = 0; r < kBootstrapResamples; ++r) {
    for (auto& p : pick) p = pick_one(rng);
    diff.push_back(pooled_median(ga, pick) - pooled_median(gb, pick));
  }
  std::sort(diff.begin(), diff.end());
  return diff[static_cast<std::size_t>(kBootstrapLevel * kBootstrapResamples)];
}

double median_se(const CampaignResult& r) {
  const auto v = r.se_values();
  return median(v);
}

std::string samples_csv(const CampaignConfig& c, const CampaignResult& r) {
  std::ostringstream os;
  write_samples_csv(os, c, r);
  return os.str();
}

// ----- criteria -------------------------------------------------------------

Outcome uce_statistics() {
  Stopwatch sw;
  GlobalConfig g;  // full-scale operating point, T_p = K = 40
  const Scenario sc = generate_scenario(g, kMasterSeed);
  const int K = g.num_ues, T = g.pilots(), N = g.antennas_per_ap;
  const double sigma2 = g.noise_power(), power = g.tx_power;
  const double target = sigma2 / (T * power);

  const PilotBook book = make_pilot_book(T);
  const auto assign = assign_pilots(K, T);
  Cmat channels(N, K);
  for (int k = 0; k < K; ++k) channels.col(k) = exact_channel(sc.aps[0], sc.ues[k], 0.0, g);

  Rng rng(substream(kMasterSeed, 1, 0));
  const int ue = 7;
  Rvec var = Rvec::Zero(N);
  for (int i = 0; i < kUceDraws; ++i) {
    const Cmat y = rx_pilot_matrix(channels, assign, book, power, sigma2, rng);
    const Cvec err = uce(despread(y, book, assign[ue], ue, 0), T, power).h_hat - channels.col(ue);
    var += err.cwiseAbs2();
  }
  var /= kUceDraws;
  double worst = 0.0;
  for (int n = 0; n < N; ++n) worst = std::max(worst, rel(var(n), target));
  const double secs = sw.seconds();
  return {worst < kUceVarianceTolerance && secs < kUceRuntime,
          "noise " + fmt(sigma2) + " W, target variance " + fmt(target) + ", worst per-entry deviation " +
              fmt(100 * worst, 3) + "% (< " + fmt(100 * kUceVarianceTolerance) + "%), " + fmt(secs, 3) + " s"};
}

Outcome sce_consistency() {
  Stopwatch sw;
  const double lambda = GlobalConfig{}.wavelength();
  const std::vector<ArrayGeometry> arrays{{2, 2, lambda / 2, lambda}, {3, 3, lambda / 2, lambda},
                                          {4, 4, lambda / 2, lambda}, {6, 6, lambda / 2, lambda},
                                          {10, 10, lambda / 2, lambda}};
  const int T = 10;
  const double power = dbm_to_watt(13);
  Rng rng(substream(kMasterSeed, 2, 0));
  std::uniform_real_distribution<double> dist(20.0, 350.0), az(-1.3, 1.3), el(-1.2, 0.3), ph(0.0, kTwoPi);

  int good = 0, monotone = 0;
  double worst_err = 0.0;
  for (int i = 0; i < kSceLinks; ++i) {
    const ArrayGeometry& geo = arrays[i % arrays.size()];
    const SceEstimator est(geo);
    const double d = dist(rng), a = az(rng), e = el(rng), psi = ph(rng);
    const Cvec h = local_channel(d, a, e, psi, geo);
    const auto r = est({T * std::sqrt(power) * h, 0, 0}, T, power);
    const auto& p = *r.params;
    const double u = std::cos(e) * std::sin(a), v = std::sin(e);
    const double cell = est.grids().final_cell();
    const double err = (r.h_hat - h).norm() / h.norm();
    worst_err = std::max(worst_err, err);
    if (std::abs(p.u - u) <= cell && std::abs(p.v - v) <= cell && err < kSceChannelError) ++good;
    bool ok = true;
    for (std::size_t it = 1; it < p.residuals.size(); ++it) ok &= p.residuals[it] <= p.residuals[it - 1];
    monotone += ok;
  }
  const double secs = sw.seconds();
  return {good >= kSceRequiredGood && monotone == kSceLinks && secs < kSceRuntime,
          std::to_string(good) + "/" + std::to_string(kSceLinks) + " links within one refined cell and " +
              fmt(kSceChannelError) + " channel error (worst " + fmt(worst_err) + "), residual non-increasing on " +
              std::to_string(monotone) + "/" + std::to_string(kSceLinks) + ", " + fmt(secs, 3) + " s"};
}

Outcome sce_vs_uce() {
  Stopwatch sw;
  GlobalConfig g;  // full-scale operating point
  const int T = g.pilots();
  const double power = g.tx_power, sigma2 = g.noise_power();
  Rng rng(substream(kMasterSeed, 3, 0));
  std::vector<double> nmse_sce, nmse_uce;
  int placement = 0;
  while (static_cast<int>(nmse_sce.size()) < kNmseLinks) {
    const Scenario sc = generate_scenario(g, placement_seed(kMasterSeed, placement++));
    const SceEstimator est(array_geometry(sc.aps[0], g));
    std::uniform_int_distribution<int> pick_ap(0, g.num_aps - 1), pick_ue(0, g.num_ues - 1);
    for (int l = 0; l < 20; ++l) {
      const int m = pick_ap(rng), k = pick_ue(rng);
      const Cvec h = exact_channel(sc.aps[m], sc.ues[k], uniform_phase(rng), g);
      Cvec y = T * std::sqrt(power) * h;
      for (auto& x : y) x += complex_normal(rng, T * sigma2);
      const PilotObservation obs{y, k, m};
      nmse_uce.push_back(nmse(uce(obs, T, power).h_hat, h));
      nmse_sce.push_back(nmse(est(obs, T, power).h_hat, h));
    }
  }
  const double ms = median(nmse_sce), mu = median(nmse_uce);
  const double secs = sw.seconds();
  return {ms < mu && secs < kNmseRuntime,
          "median NMSE over " + std::to_string(nmse_sce.size()) + " links: SCE " + fmt(ms) + " < UCE " + fmt(mu) +
              ", " + fmt(secs, 3) + " s"};
}

Outcome density_ordering() {
  Stopwatch sw;
  const std::vector<int> aps{1, 4, 9};
  const std::vector<CsiKind> csis{CsiKind::perfect, CsiKind::sce, CsiKind::uce};
  std::map<std::pair<int, CsiKind>, CampaignResult> runs;
  for (int m : aps) {
    for (auto csi : csis) {
      auto c = desk(m, Architecture::fully_connected, csi);
      c.processing = Processing::centralized;
      c.combiner = CombinerKind::przf;
      runs[{m, csi}] = run_campaign(c);
    }
  }

  bool pass = true;
  std::ostringstream os;
  os << "medians";
  for (auto csi : csis) {
    os << " " << to_string(csi) << "[";
    for (int m : aps) os << (m == 1 ? "" : " ") << "M" << m << "=" << fmt(median_se(runs[{m, csi}]));
    os << "]";
  }
  auto check = [&](const CampaignResult& hi, const CampaignResult& lo, bool strict, const std::string& label) {
    const double point = median_se(hi) - median_se(lo);
    const double lower = bootstrap_lower(hi, lo, kPlacements);
    const bool ok = strict ? (point > 0.0 && lower > 0.0) : (point >= 0.0 && lower >= 0.0);
    pass &= ok;
    os << "; " << label << " lower5%=" << fmt(lower, 3) << (ok ? "" : " VIOLATED");
  };
  for (auto csi : csis) {
    check(runs[{4, csi}], runs[{1, csi}], true, to_string(csi) + " M4>M1");
    check(runs[{9, csi}], runs[{4, csi}], true, to_string(csi) + " M9>M4");
  }
  for (int m : aps) {
    check(runs[{m, CsiKind::perfect}], runs[{m, CsiKind::sce}], false, "M" + std::to_string(m) + " perfect>=sce");
    check(runs[{m, CsiKind::sce}], runs[{m, CsiKind::uce}], false, "M" + std::to_string(m) + " sce>=uce");
  }
  const double secs = sw.seconds();
  pass &= secs < kCampaignRuntime;
  os << "; " << fmt(secs, 4) << " s";
  return {pass, os.str()};
}

Outcome processing_ordering() {
  Stopwatch sw;
  const std::vector<Pipeline> cf_pipes{{CombinerKind::mr, Processing::decentralized},
                                       {CombinerKind::mr, Processing::centralized},
                                       {CombinerKind::przf, Processing::decentralized},
                                       {CombinerKind::przf, Processing::centralized}};
  const std::vector<Pipeline> bs_pipes{{CombinerKind::mr, Processing::centralized},
                                       {CombinerKind::przf, Processing::centralized}};
  const auto cf = run_campaign_pipelines(desk(9, Architecture::fully_connected, CsiKind::sce), cf_pipes);
  const auto bs = run_campaign_pipelines(desk(9, Architecture::mmimo, CsiKind::sce), bs_pipes);

  const double mr_dec = median_se(cf[0]), mr_cen = median_se(cf[1]), mr_bs = median_se(bs[0]);
  const double rzf_dec = median_se(cf[2]), rzf_cen = median_se(cf[3]), rzf_bs = median_se(bs[1]);
  const bool mr_ok = mr_dec > mr_cen && mr_cen > mr_bs;
  const bool rzf_ok = rzf_cen > rzf_dec && rzf_cen > rzf_bs;
  const double secs = sw.seconds();
  std::ostringstream os;
  os << "MR medians dec " << fmt(mr_dec) << " > cen " << fmt(mr_cen) << " > mmimo " << fmt(mr_bs)
     << (mr_ok ? "" : " VIOLATED") << "; P-RZF medians cen " << fmt(rzf_cen) << " vs dec " << fmt(rzf_dec)
     << ", mmimo " << fmt(rzf_bs) << (rzf_ok ? "" : " VIOLATED") << "; bootstrap lower5% MR dec-cen "
     << fmt(bootstrap_lower(cf[0], cf[1], kPlacements), 3) << ", MR cen-mmimo "
     << fmt(bootstrap_lower(cf[1], bs[0], kPlacements), 3) << ", P-RZF cen-dec "
     << fmt(bootstrap_lower(cf[3], cf[2], kPlacements), 3) << "; " << fmt(secs, 4) << " s";
  return {mr_ok && rzf_ok && secs < kCampaignRuntime, os.str()};
}

Outcome clustering_behaviour() {
  Stopwatch sw;
  auto base = desk(9, Architecture::fully_connected, CsiKind::sce);
  base.processing = Processing::decentralized;
  base.combiner = CombinerKind::przf;
  const auto fc = run_campaign(base);

  auto run_with = [&](Architecture arch, int param) {
    auto c = base;
    c.arch = arch;
    (arch == Architecture::ap_centric ? c.ues_per_ap : c.aps_per_ue) = param;
    return run_campaign(c);
  };
  auto identical = [&](const CampaignResult& r) {
    if (r.samples.size() != fc.samples.size()) return false;
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
      const auto &a = r.samples[i], &b = fc.samples[i];
      if (a.gamma != b.gamma || a.se != b.se || a.served != b.served || a.degenerate != b.degenerate) return false;
    }
    return true;
  };

  bool pass = true;
  std::ostringstream os;
  for (auto [arch, params, limit, name] :
       {std::tuple{Architecture::ap_centric, std::vector<int>{3, 6, 9}, 10, "K_n"},
        std::tuple{Architecture::ue_centric, std::vector<int>{2, 5, 8}, 9, "M_n"}}) {
    double prev = -1.0;
    os << name << " medians";
    for (int p : params) {
      const double med = median_se(run_with(arch, p));
      const bool ok = med >= prev;
      pass &= ok;
      os << " " << p << ":" << fmt(med) << (ok ? "" : " VIOLATED");
      prev = med;
    }
    const bool same = identical(run_with(arch, limit));
    pass &= same;
    os << ", " << name << "=" << limit << (same ? " identical to" : " DIFFERS from") << " fully connected ("
       << fmt(median_se(fc)) << "); ";
  }
  const double secs = sw.seconds();
  pass &= secs < kCampaignRuntime;
  os << fmt(secs, 4) << " s";
  return {pass, os.str()};
}

Outcome oracle_identities() {
  Stopwatch sw;
  double worst_a = 0.0, worst_b = 0.0, worst_c = 0.0;

  auto moments = [](const Scenario& sc, const ServiceMap& map, CsiKind csi, std::vector<Pipeline> pipes,
                    std::uint64_t stream) {
    MomentInputs in;
    in.scenario = &sc;
    in.map = &map;
    in.csi = csi;
    in.inner_draws = 100;
    Rng rng(substream(kMasterSeed, 7, stream));
    return estimate_moments(in, std::span<const Pipeline>(pipes), rng);
  };

  // (a) closed form at the optimal LSFD weights.
  for (int i = 0; i < 5; ++i) {
    CampaignConfig c = desk(9, Architecture::ue_centric, i % 2 ? CsiKind::uce : CsiKind::sce);
    c.aps_per_ue = 2 + i;
    const Scenario sc = generate_scenario(c.deployment(), placement_seed(kMasterSeed, i));
    const ServiceMap map = build_service_map(c, sc);
    const auto mom = moments(sc, map, c.csi,
                             {{CombinerKind::mr, Processing::decentralized},
                              {CombinerKind::przf, Processing::decentralized}},
                             i);
    for (const auto& per : mom)
      for (int k = 0; k < sc.config.num_ues; ++k) {
        const double p = sc.config.tx_power;
        const double closed = sinr_decentralized_opt(per[k], p).gamma;
        const double bound = sinr_decentralized(per[k], lsfd_weights(per[k], map, k, p)).gamma;
        worst_a = std::max(worst_a, rel(closed, bound));
      }
  }

  // (b) one AP: decentralized with optimal weights equals centralized.
  for (int i = 0; i < 3; ++i) {
    const CampaignConfig c = desk(1, Architecture::fully_connected, CsiKind::perfect);
    const Scenario sc = generate_scenario(c.deployment(), placement_seed(kMasterSeed, 10 + i));
    const ServiceMap map = fully_connected(1, sc.config.num_ues);
    for (auto comb : {CombinerKind::mr, CombinerKind::przf}) {
      const auto mom = moments(sc, map, CsiKind::perfect,
                               {{comb, Processing::decentralized}, {comb, Processing::centralized}}, 10 + i);
      for (int k = 0; k < sc.config.num_ues; ++k)
        worst_b = std::max(worst_b, rel(sinr_decentralized_opt(mom[0][k], sc.config.tx_power).gamma,
                                        sinr_centralized(mom[1][k]).gamma));
    }
  }

  // (c) single UE, perfect CSI, MR.
  for (int aps : {1, 4, 9}) {
    CampaignConfig c = desk(aps, Architecture::fully_connected, CsiKind::perfect);
    c.global.num_ues = 1;
    const Scenario sc = generate_scenario(c.deployment(), placement_seed(kMasterSeed, 20 + aps));
    const ServiceMap map = fully_connected(aps, 1);
    double norm2 = 0.0;
    for (int m = 0; m < aps; ++m) norm2 += exact_channel(sc.aps[m], sc.ues[0], 0.0, sc.config).squaredNorm();
    const double snr = sc.config.tx_power * norm2 / sc.config.noise_power();
    const auto mom = moments(sc, map, CsiKind::perfect, {{CombinerKind::mr, Processing::centralized}}, 20 + aps);
    worst_c = std::max(worst_c, rel(sinr_centralized(mom[0][0]).gamma, snr));
  }

  const double secs = sw.seconds();
  const bool pass =
      worst_a < kOracleLsfd && worst_b < kOracleSingleAp && worst_c < kOracleMatchedFilter && secs < kOracleRuntime;
  return {pass, "closed-form vs weighted bound " + fmt(worst_a, 3) + " (< " + fmt(kOracleLsfd) +
                    "), one-AP dec vs cen " + fmt(worst_b, 3) + " (< " + fmt(kOracleSingleAp) +
                    "), matched-filter SNR " + fmt(worst_c, 3) + " (< " + fmt(kOracleMatchedFilter) + "), " +
                    fmt(secs, 3) + " s"};
}

Outcome determinism() {
  Stopwatch sw;
  auto c = desk(4, Architecture::ue_centric, CsiKind::sce);
  c.aps_per_ue = 2;
  c.processing = Processing::decentralized;
  c.combiner = CombinerKind::przf;

  auto render = [](const CampaignConfig& cfg) {
    const auto r = run_campaign(cfg);
    std::ostringstream samples, cdf, service;
    write_samples_csv(samples, cfg, r);
    write_cdf_csv(cdf, r);
    write_service_csv(service, r);
    return samples.str() + cdf.str() + service.str();
  };
  c.threads = 1;
  const auto first = render(c);
  const auto second = render(c);
  c.threads = 4;
  const auto parallel = render(c);
  const bool pass = first == second && first == parallel;
  return {pass, std::string("repeat run ") + (first == second ? "byte-identical" : "DIFFERS") + ", 4-thread run " +
                    (first == parallel ? "byte-identical" : "DIFFERS") + " (" + std::to_string(first.size()) +
                    " bytes), " + fmt(sw.seconds(), 4) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criteria to run (default: all)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> criteria{uce_statistics,      sce_consistency,  sce_vs_uce,
                                                       density_ordering,    processing_ordering,
                                                       clustering_behaviour, oracle_identities, determinism};
  if (selected.empty())
    for (int i = 1; i <= 8; ++i) selected.push_back(i);

  bool all = true;
  for (int n : selected) {
    Outcome o;
    try {
      o = criteria[n - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << ' ' << o.detail << std::endl;
    all &= o.pass;
  }
  return all ? 0 : 1;
}
