#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hemorom/config.hpp"
#include "hemorom/errors.hpp"
#include "hemorom/io.hpp"
#include "hemorom/nn.hpp"
#include "hemorom/pipeline.hpp"
#include "hemorom/snapshot_db.hpp"
#include "hemorom/windkessel.hpp"

namespace {

using namespace hemorom;

PipelineConfig load_config(const std::string& path) {
  return PipelineConfig::from(Config::from_file(path));
}

Stabilization parse_stab(const std::string& s) {
  if (s == "sup") return Stabilization::Supremizer;
  if (s == "ppe") return Stabilization::Ppe;
  throw ConfigError("--stab must be 'sup' or 'ppe'");
}

int cmd_wk_check(const PipelineConfig& cfg) {
  const WindkesselParams& wk = cfg.fom.wk[0];
  const double area = 3.14159265358979323846 * cfg.radius * cfg.radius;
  const std::vector<double> dts = {1e-3, 5e-4, 2.5e-4, 1.25e-4};
  const auto sweep = wk_convergence_sweep(dts, cfg.time.T, cfg.fom.u0, area, wk,
                                          cfg.wk_decaying_exponential);
  std::printf("windkessel convergence, Q(t) = area * u(t), area = %.6g\n", area);
  std::printf("%12s  %14s  %8s  %16s  %8s\n", "dt", "err(exact)", "ratio",
              "err(closed-form)", "ratio");
  for (size_t i = 0; i < sweep.size(); ++i) {
    const double r_ex =
        i > 0 ? sweep[i - 1].error_vs_exact / sweep[i].error_vs_exact : 0.0;
    const double r_an =
        i > 0 ? sweep[i - 1].error_vs_analytic / sweep[i].error_vs_analytic : 0.0;
    std::printf("%12.6g  %14.8g  %8.4g  %16.8g  %8.4g\n", sweep[i].dt,
                sweep[i].error_vs_exact, r_ex, sweep[i].error_vs_analytic, r_an);
  }
  std::printf(
      "exact: ODE response of the outlet model; closed-form: the published\n"
      "estimate (decaying exponential: %s)\n",
      cfg.wk_decaying_exponential ? "on" : "off");
  bool first_order = true;
  for (size_t i = 1; i < sweep.size(); ++i) {
    const double r = sweep[i - 1].error_vs_exact / sweep[i].error_vs_exact;
    if (r < 1.7 || r > 2.3) first_order = false;
  }
  std::printf("first-order convergence to the exact response: %s\n",
              first_order ? "yes" : "NO");
  return first_order ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hemorom: finite-volume channel flow with a lumped outlet model "
               "and a POD-Galerkin reduced-order pipeline"};
  app.require_subcommand(1);

  std::string config_path, bundle_path, manifest_path, out_path, times_spec,
      stab_str = "sup", report_dir, fields_dir;
  bool with_fom = false;

  CLI::App* fom_cmd = app.add_subcommand("fom", "run the full-order solver");
  fom_cmd->add_option("--config", config_path, "config file")->required();

  CLI::App* offline_cmd =
      app.add_subcommand("offline", "build the reduced-order bundle");
  offline_cmd->add_option("--config", config_path, "config file")->required();
  offline_cmd->add_flag("--with-fom", with_fom,
                        "run the full-order solver first");

  CLI::App* online_cmd =
      app.add_subcommand("online", "evaluate the reduced model");
  online_cmd->add_option("--bundle", bundle_path, "bundle directory")->required();
  online_cmd->add_option("--times", times_spec,
                         "comma-separated times or a file with one per line")
      ->required();
  online_cmd->add_option("--stab", stab_str, "stabilization: sup | ppe");
  online_cmd->add_option("--report-dir", report_dir, "report output directory");
  online_cmd->add_option("--save-fields", fields_dir,
                         "directory for reconstructed fields");

  CLI::App* train_cmd =
      app.add_subcommand("train-nn", "train the outflow-pressure network");
  train_cmd->add_option("--manifest", manifest_path, "snapshot database dir")
      ->required();
  train_cmd->add_option("--out", out_path, "model output file")->required();
  train_cmd->add_option("--config", config_path, "config file (nn block)");

  CLI::App* wk_cmd =
      app.add_subcommand("wk-check", "outlet-model convergence study");
  wk_cmd->add_option("--config", config_path, "config file");

  CLI::App* report_cmd =
      app.add_subcommand("report", "re-print a stored report");
  report_cmd->add_option("--bundle", bundle_path, "bundle directory")->required();
  report_cmd->add_option("--report-dir", report_dir, "report directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (fom_cmd->parsed()) {
      run_fom(load_config(config_path), std::cout);
    } else if (offline_cmd->parsed()) {
      run_offline(load_config(config_path), with_fom, std::cout);
    } else if (online_cmd->parsed()) {
      const RomBundle bundle = load_bundle(bundle_path);
      const std::vector<double> times = parse_time_list(times_spec);
      OnlineResult result =
          run_online(bundle, times, parse_stab(stab_str), std::cout);
      const std::filesystem::path rdir =
          report_dir.empty() ? bundle.config.report_dir
                             : std::filesystem::path(report_dir);
      write_report(rdir, result.report, bundle, std::cout);
      if (!fields_dir.empty()) {
        std::filesystem::create_directories(fields_dir);
        for (size_t k = 0; k < result.report.times.size(); ++k) {
          char name[48];
          std::snprintf(name, sizeof(name), "rom_u_%04zu.fld", k);
          write_field(std::filesystem::path(fields_dir) / name,
                      result.u_fields[k], bundle.mesh.nx(), bundle.mesh.ny());
          std::snprintf(name, sizeof(name), "rom_p_%04zu.fld", k);
          write_field(std::filesystem::path(fields_dir) / name,
                      result.p_fields[k], bundle.mesh.nx(), bundle.mesh.ny());
        }
      }
    } else if (train_cmd->parsed()) {
      const SnapshotDatabase db = SnapshotDatabase::load(manifest_path);
      if (db.size() < 2)
        throw NumericalError("train-nn: need at least two snapshots");
      NetworkConfig nn_cfg;
      bool per_outlet = false;
      if (!config_path.empty()) {
        const PipelineConfig cfg = load_config(config_path);
        nn_cfg = cfg.nn;
        per_outlet = cfg.nn_per_outlet;
      }
      DenseMatrix targets(db.size(), db.n_outlets());
      for (int s = 0; s < db.size(); ++s)
        for (int j = 0; j < db.n_outlets(); ++j) targets(s, j) = db[s].g_p[j];
      TrainHistory hist;
      const OutflowModel model =
          fit_outflow_model(db.times(), targets, nn_cfg, per_outlet, &hist);
      model.save(out_path);
      std::cout << "train-nn: " << db.size() << " samples, final train mse = "
                << hist.train_loss.back()
                << ", test mse = " << hist.test_loss.back() << "\n";
    } else if (wk_cmd->parsed()) {
      const PipelineConfig cfg =
          config_path.empty() ? PipelineConfig::from(Config::from_string(""))
                              : load_config(config_path);
      return cmd_wk_check(cfg);
    } else if (report_cmd->parsed()) {
      const RomBundle bundle = load_bundle(bundle_path);
      ErrorReport report =
          read_errors_csv(std::filesystem::path(report_dir) / "errors.csv");
      {
        std::ifstream timing(std::filesystem::path(report_dir) / "timings.txt");
        std::string key, eq;
        double v;
        while (timing >> key >> eq >> v) {
          if (key == "offline_seconds") report.offline_seconds = v;
          if (key == "online_seconds") report.online_seconds = v;
          if (key == "fom_seconds") report.fom_seconds = v;
          if (key == "speedup") report.speedup = v;
        }
      }
      write_report(report_dir, report, bundle, std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
