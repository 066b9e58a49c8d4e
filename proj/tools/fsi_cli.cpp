// Command-line front end: single runs and the two studies.
#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fsi/error.hpp"
#include "fsi/harness.hpp"

using namespace fsi;

namespace {

std::vector<double> parse_dts(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw InvalidConfig("bad time step '" + tok + "' in --dts");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monolithic fluid-structure interaction solver"};
  app.require_subcommand(1);
  bool dump_mortar = false, oracle = false;
  app.add_flag("--dump-mortar", dump_mortar, "write D, M, P in coordinate format next to the diagnostics");
  app.add_flag("--oracle-check", oracle, "cross-check every Newton increment against the dense saddle system");

  std::string run_cfg, out_csv;
  auto* run = app.add_subcommand("run", "run one case");
  run->add_option("config", run_cfg, "YAML case file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", out_csv, "diagnostics CSV (overrides the config)");

  auto* study = app.add_subcommand("study", "parameter studies");
  study->require_subcommand(1);
  std::string conv_cfg, dts = "2e-2,1e-2,5e-3,2.5e-3", conv_out = "convergence.csv";
  auto* conv = study->add_subcommand("convergence", "temporal convergence on the column case");
  conv->add_option("config", conv_cfg, "YAML case file")->required()->check(CLI::ExistingFile);
  conv->add_option("--dts", dts, "comma-separated halving time steps");
  conv->add_option("-o,--output", conv_out, "study CSV");
  std::string pred_cfg, pred_out = "predictors.csv";
  auto* pred = study->add_subcommand("predictor", "linear-iteration comparison of solid predictors");
  pred->add_option("config", pred_cfg, "YAML case file")->required()->check(CLI::ExistingFile);
  pred->add_option("-o,--output", pred_out, "study CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      CaseConfig cfg = load_case_config(run_cfg);
      if (!out_csv.empty()) cfg.diagnostics_csv = out_csv;
      cfg.dump_mortar = cfg.dump_mortar || dump_mortar;
      cfg.newton.oracle_check = cfg.newton.oracle_check || oracle;
      RunResult r = run_case(cfg, [&](const StepRecord& s, const CoupledState&) {
        std::cout << "step " << s.step << " t=" << s.time << " newton=" << s.diag.newton_iters
                  << " linear=" << s.diag.linear_iters << " constraint=" << s.diag.constraint_norm
                  << " energy=" << s.diag.interface_energy;
        if (s.diag.oracle_max_rel_diff >= 0.0) std::cout << " oracle=" << s.diag.oracle_max_rel_diff;
        std::cout << "\n";
      });
      if (cfg.kind == CaseKind::Column)
        std::cout << "L2 error u=" << r.err_u_l2 << " (rel " << r.rel_err_u_l2 << ") p=" << r.err_p_l2 << " (rel "
                  << r.rel_err_p_l2 << ")\n";
      std::cout << "cumulative linear iterations " << r.cumulative_linear_iters() << "\n";
    } else if (conv->parsed()) {
      CaseConfig cfg = load_case_config(conv_cfg);
      ConvergenceStudy s = temporal_convergence_study(cfg, parse_dts(dts), conv_out);
      write_study_csv(s, std::cout);
    } else if (pred->parsed()) {
      CaseConfig cfg = load_case_config(pred_cfg);
      PredictorStudy s = predictor_study(
          cfg, {PredictorKind::ConstDis, PredictorKind::ConstVel, PredictorKind::ConstAcc});
      std::ofstream out(pred_out);
      write_predictor_csv(s, out);
      for (const auto& r : s.runs)
        std::cout << to_string(r.kind) << ": " << r.cumulative_linear << " linear iterations ("
                  << r.reduction_pct << "% vs " << to_string(s.runs.front().kind) << ")\n";
      std::cout << "max final-state difference " << s.max_state_diff << "\n";
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
