// Campaign driver: runs one Monte Carlo configuration and writes per-UE
// spectral efficiency samples, their empirical CDF and the service maps.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "cfmimo/cfmimo.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

void write_outputs(const cfmimo::CampaignConfig& cfg, const cfmimo::CampaignResult& result, bool save_scenarios) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw cfmimo::IoError("cannot create output directory '" + cfg.out + "': " + ec.message());

  const fs::path dir(cfg.out);
  std::ostringstream samples, cdf, service;
  cfmimo::write_samples_csv(samples, cfg, result);
  cfmimo::write_cdf_csv(cdf, result);
  cfmimo::write_service_csv(service, result);
  cfmimo::write_text_file((dir / "se_samples.csv").string(), samples.str());
  cfmimo::write_text_file((dir / "se_cdf.csv").string(), cdf.str());
  cfmimo::write_text_file((dir / "service_map.csv").string(), service.str());
  cfmimo::write_text_file((dir / "config.json").string(), cfmimo::to_json(cfg).dump(2) + "\n");

  if (save_scenarios) {
    const fs::path sdir = dir / "scenarios";
    fs::create_directories(sdir, ec);
    if (ec) throw cfmimo::IoError("cannot create '" + sdir.string() + "': " + ec.message());
    const auto g = cfg.deployment();
    for (int i = 0; i < cfg.placements; ++i) {
      const auto sc = cfmimo::generate_scenario(g, cfmimo::placement_seed(cfg.seed, i));
      cfmimo::write_text_file((sdir / ("placement_" + std::to_string(i) + ".json")).string(),
                              cfmimo::scenario_to_text(sc));
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uplink cell-free massive MIMO line-of-sight campaign simulator"};

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> placements, inner_draws, threads, ues_per_ap, aps_per_ue;
  std::optional<std::string> arch, combiner, proc, csi, out;
  bool save_scenarios = false;
  bool quiet = false;

  app.add_option("--config", config_path, "JSON campaign configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--placements", placements, "Number of random AP/UE placements");
  app.add_option("--arch", arch, "ap_centric | ue_centric | fully_connected | mmimo");
  app.add_option("--combiner", combiner, "mr | przf");
  app.add_option("--proc", proc, "cen | dec");
  app.add_option("--csi", csi, "perfect | uce | sce");
  app.add_option("--out", out, "Output directory");
  app.add_option("--ues-per-ap", ues_per_ap, "UEs served by each AP (ap_centric)");
  app.add_option("--aps-per-ue", aps_per_ue, "APs serving each UE (ue_centric)");
  app.add_option("--inner-draws", inner_draws, "Monte Carlo draws per placement for the SINR moments");
  app.add_option("--threads", threads, "Worker threads (0 = all hardware threads)");
  app.add_flag("--save-scenarios", save_scenarios, "Also write every placement geometry as JSON");
  app.add_flag("--quiet", quiet, "Suppress the summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  cfmimo::CampaignConfig cfg;
  try {
    if (!config_path.empty()) cfg = cfmimo::load_campaign_config(config_path);
    if (seed) cfg.seed = *seed;
    if (placements) cfg.placements = *placements;
    if (inner_draws) cfg.inner_draws = *inner_draws;
    if (threads) cfg.threads = *threads;
    if (ues_per_ap) cfg.ues_per_ap = *ues_per_ap;
    if (aps_per_ue) cfg.aps_per_ue = *aps_per_ue;
    if (arch) cfg.arch = cfmimo::parse_architecture(*arch);
    if (combiner) cfg.combiner = cfmimo::parse_combiner(*combiner);
    if (proc) cfg.processing = cfmimo::parse_processing(*proc);
    if (csi) cfg.csi = cfmimo::parse_csi(*csi);
    if (out) cfg.out = *out;
    cfg.validate();
  } catch (const cfmimo::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const cfmimo::IoError& e) {
    std::cerr << e.what() << '\n';
    return kExitIo;
  }

  try {
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = cfmimo::run_campaign(cfg);
    write_outputs(cfg, result, save_scenarios);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!quiet) {
      const auto se = result.se_values();
      std::cout << cfmimo::to_string(cfg.arch) << ' ' << cfmimo::to_string(cfg.processing) << ' '
                << cfmimo::to_string(cfg.combiner) << ' ' << cfmimo::to_string(cfg.csi) << ": " << se.size()
                << " samples, median SE " << cfmimo::median(se) << " bit/s/Hz, unserved share "
                << result.unserved_share() << ", " << secs << " s -> " << cfg.out << '\n';
    }
  } catch (const cfmimo::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const cfmimo::IoError& e) {
    std::cerr << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
