// Copyright 2026 The cqm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// cqm: command-line front end.
//
// Exit codes: 0 success / EB-consistent, 1 semantic failure / counterexample,
// 2 usage or parse error. Machine-readable output goes to stdout,
// diagnostics to stderr.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cqm/cqm.hpp"

namespace {

using cqm::io::Json;

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

/// Thrown for semantic failures that should exit with 1.
struct SemanticFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit(const Json& j) { std::cout << j.dump(2) << "\n"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

// --- povm -----------------------------------------------------------------

int cmd_povm(
    const std::string& action, const std::string& path,
    std::optional<double> tol) {
  cqm::Povm p = cqm::io::povm_from_json(cqm::io::read_file(path));
  if (tol) p.tol = *tol;
  if (action == "validate") {
    const auto report = cqm::validate_povm(p);
    emit(cqm::io::to_json(report));
    return report.passed ? kOk : kFail;
  }
  const auto report = cqm::validate_povm(p);
  if (!report.passed) {
    std::cerr << "cqm: invalid POVM (normalization residual "
              << report.normalization_residual << ")\n";
    emit(cqm::io::to_json(report));
    return kFail;
  }
  if (action == "refine") {
    emit(cqm::io::to_json(cqm::maximally_refine(p)));
    return kOk;
  }
  const auto ic = cqm::is_informationally_complete(p);
  emit(Json{{"ic", ic.informationally_complete}, {"span", ic.span_dimension}});
  return kOk;
}

// --- instrument -------------------------------------------------------------

int cmd_instrument(
    const std::string& kind, const std::string& path, std::optional<double> tol,
    const std::string& name) {
  cqm::Povm p = cqm::io::povm_from_json(cqm::io::read_file(path));
  if (tol) p.tol = *tol;
  if (!cqm::validate_povm(p).passed) {
    std::cerr << "cqm: invalid POVM\n";
    return kFail;
  }
  const cqm::Instrument inst = kind == "luders" ? cqm::luders_instrument(p)
                                                : cqm::complete_measurement(p);
  emit(cqm::io::to_json(inst, name.empty() ? kind : name));
  return kOk;
}

// --- ebcheck ----------------------------------------------------------------

int cmd_ebcheck(
    const std::string& path, std::size_t trials, std::uint64_t seed,
    std::optional<std::size_t> env_dim, std::optional<double> tol) {
  const Json j = cqm::io::read_file(path);
  cqm::Instrument inst = cqm::io::instrument_from_json(j);
  if (tol)
    inst = cqm::Instrument(
        inst.input_dim(), inst.output_dim(), inst.outcomes(), *tol);
  const std::string name =
      j.contains("name") && j.at("name").is_string()
          ? j.at("name").get<std::string>()
          : std::filesystem::path(path).filename().string();
  const auto cert = cqm::certify_entanglement_breaking(
      inst, env_dim.value_or(inst.input_dim()), trials, seed, name);
  emit(cqm::io::to_json(cert));
  return cert.verdict == cqm::Verdict::entanglement_breaking_consistent ? kOk
                                                                         : kFail;
}

// --- scenario ---------------------------------------------------------------

struct ScenarioOptions {
  std::string config;
  std::string out;
  std::optional<std::size_t> grid_points;
  std::optional<double> grid_halfwidth;
  std::optional<std::size_t> steps;
  std::optional<double> time;
  std::optional<std::string> mode;
};

Json branch_json(const cqm::SpinBranchReport& b) {
  return Json{
      {"joint_probability", b.joint_probability},
      {"conditional_probability", b.conditional_probability},
      {"negativity", b.negativity},
      {"product", b.product},
      {"distance_to_target", b.distance_to_target},
      {"reduced_distance_to_target", b.reduced_distance_to_target}};
}

int run_position(const ScenarioOptions& opt) {
  std::size_t points = 64;
  double halfwidth = 6.0;
  double width = 1.0;
  if (!opt.config.empty()) {
    const Json j = cqm::io::read_file(opt.config);
    if (j.contains("grid_points")) points = j.at("grid_points").get<std::size_t>();
    if (j.contains("grid_halfwidth")) halfwidth = j.at("grid_halfwidth").get<double>();
    if (j.contains("vacuum_width")) width = j.at("vacuum_width").get<double>();
  }
  if (opt.grid_points) points = *opt.grid_points;
  if (opt.grid_halfwidth) halfwidth = *opt.grid_halfwidth;

  cqm::PositionSpinExample ex = [&] {
    try {
      return cqm::build_position_spin_example(
          cqm::Grid::uniform(points, halfwidth), width);
    } catch (const cqm::NormalizationError& e) {
      throw SemanticFailure(e.what());
    }
  }();

  Json events = Json::array();
  bool passed = true;
  for (const auto& [event, bins] :
       {std::pair<std::string, std::vector<std::size_t>>{"all", ex.grid.all_bins()},
        {"nonnegative", ex.grid.nonnegative_bins()}}) {
    const auto r = cqm::run_position_example(ex, bins);
    passed = passed && r.passed;
    events.push_back(
        {{"event", event},
         {"bins", bins.size()},
         {"probability", r.probability},
         {"expected_probability", r.expected_probability},
         {"distance_to_bell", r.distance_to_bell},
         {"negativity", r.negativity},
         {"bell_preserved", r.distance_to_bell < 1e-7},
         {"spin_up", branch_json(r.up)},
         {"spin_down", branch_json(r.down)},
         {"entanglement_broken",
          r.up.negativity < cqm::kNegativityThreshold &&
              r.down.negativity < cqm::kNegativityThreshold},
         {"passed", r.passed}});
  }
  const Json summary{
      {"scenario", "position-example"},
      {"grid_points", points},
      {"grid_halfwidth", halfwidth},
      {"vacuum_width", width},
      {"raw_vacuum_mass", ex.raw_vacuum_mass},
      {"events", std::move(events)},
      {"passed", passed}};

  if (!opt.out.empty()) {
    std::filesystem::create_directories(opt.out);
    std::string csv = "bin,x,weight,probability\n";
    for (std::size_t j = 0; j < ex.bins; ++j) {
      const double a = std::abs(ex.vacuum(static_cast<Eigen::Index>(j)));
      csv += std::to_string(j) + "," + fmt_double(ex.grid.points()[j]) + "," +
             fmt_double(ex.grid.weights()[j]) + "," + fmt_double(a * a) + "\n";
    }
    write_text(std::filesystem::path(opt.out) / "position-example.csv", csv);
    write_text(
        std::filesystem::path(opt.out) / "position-example_summary.json",
        summary.dump(2) + "\n");
  }
  emit(summary);
  return passed ? kOk : kFail;
}

int run_zeno(const ScenarioOptions& opt) {
  cqm::ZenoConfig cfg =
      opt.config.empty()
          ? cqm::canonical_zeno_config()
          : cqm::io::zeno_config_from_json(cqm::io::read_file(opt.config));
  if (opt.steps) cfg.steps = *opt.steps;
  if (opt.time) cfg.total_time = *opt.time;
  if (opt.mode) cfg.mode = cqm::io::zeno_mode_from_string(*opt.mode);

  cqm::ZenoResult r;
  try {
    r = cqm::zeno_simulate(cfg);
  } catch (const cqm::CommutantViolationError& e) {
    throw SemanticFailure(std::string("commutant violation: ") + e.what());
  } catch (const cqm::ZeroProbabilityBranchError& e) {
    throw SemanticFailure(e.what());
  }

  bool in_unit = true, monotone = true, broken = true;
  for (std::size_t s = 0; s < r.survival.size(); ++s) {
    in_unit = in_unit && r.survival[s] >= -cfg.tol && r.survival[s] <= 1 + cfg.tol;
    if (s > 0) monotone = monotone && r.survival[s] <= r.survival[s - 1] + cfg.tol;
    broken = broken && r.negativity[s] < cqm::kNegativityThreshold;
  }
  Json checks{{"survival_in_unit_interval", in_unit}};
  bool passed = in_unit;
  if (cfg.mode == cqm::ZenoMode::complete) {
    checks["survival_monotone"] = monotone;
    checks["entanglement_broken_every_step"] = broken;
    passed = passed && monotone && broken;
  }
  const Json summary{
      {"scenario", "zeno"},
      {"mode", cqm::to_string(cfg.mode)},
      {"steps", cfg.steps},
      {"total_time", cfg.total_time},
      {"preparation_probability", r.preparation_probability},
      {"final_survival", r.final_survival()},
      {"final_fidelity", r.final_fidelity},
      {"max_negativity", r.max_negativity()},
      {"checks", std::move(checks)},
      {"passed", passed}};

  if (!opt.out.empty()) {
    std::filesystem::create_directories(opt.out);
    std::string csv = "step,survival,negativity\n";
    for (std::size_t s = 0; s < r.survival.size(); ++s)
      csv += std::to_string(s + 1) + "," + fmt_double(r.survival[s]) + "," +
             fmt_double(r.negativity[s]) + "\n";
    write_text(std::filesystem::path(opt.out) / "zeno.csv", csv);
    write_text(
        std::filesystem::path(opt.out) / "zeno_summary.json",
        summary.dump(2) + "\n");
  }
  emit(summary);
  return passed ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complete quantum measurements: POVM refinement, instruments, "
               "entanglement-breaking checks and scenarios"};
  app.require_subcommand(1);

  std::optional<double> tol;
  auto check_tol = CLI::PositiveNumber;

  // povm
  auto* povm = app.add_subcommand("povm", "Validate, refine or IC-test a POVM file");
  std::string povm_action, povm_path;
  povm->add_option("action", povm_action, "validate | refine | ic")
      ->required()
      ->check(CLI::IsMember({"validate", "refine", "ic"}));
  povm->add_option("input", povm_path, "POVM JSON file")->required();
  povm->add_option("--tol", tol, "Override the file's tolerance")->check(check_tol);

  // instrument
  auto* instrument =
      app.add_subcommand("instrument", "Build an instrument JSON from a POVM file");
  std::string inst_kind, inst_path, inst_name;
  instrument->add_option("kind", inst_kind, "luders | complete")
      ->required()
      ->check(CLI::IsMember({"luders", "complete"}));
  instrument->add_option("input", inst_path, "POVM JSON file")->required();
  instrument->add_option("--name", inst_name, "Instrument name recorded in the file");
  instrument->add_option("--tol", tol, "Override the file's tolerance")->check(check_tol);

  // ebcheck
  auto* eb = app.add_subcommand("ebcheck", "Monte Carlo entanglement-breaking check");
  std::string eb_path;
  std::size_t trials = 200;
  std::uint64_t seed = 42;
  std::optional<std::size_t> env_dim;
  eb->add_option("input", eb_path, "Instrument JSON file")->required();
  eb->add_option("--trials", trials, "Random entangled inputs")->capture_default_str();
  eb->add_option("--seed", seed, "RNG seed")->capture_default_str();
  eb->add_option("--env-dim", env_dim, "Environment dimension (default: system dim)")
      ->check(CLI::Range(std::size_t{2}, std::size_t{64}));
  eb->add_option("--tol", tol, "Override the instrument tolerance")->check(check_tol);

  // scenario
  auto* scenario = app.add_subcommand("scenario", "Run a built-in scenario");
  std::string scenario_name;
  ScenarioOptions sopt;
  scenario->add_option("name", scenario_name, "position-example | zeno")
      ->required()
      ->check(CLI::IsMember({"position-example", "zeno"}));
  scenario->add_option("config", sopt.config, "Scenario JSON config (optional)");
  scenario->add_option("--out", sopt.out, "Directory for CSV and summary JSON");
  scenario->add_option("--grid-points", sopt.grid_points, "Position grid points")
      ->check(CLI::PositiveNumber);
  scenario->add_option("--grid-halfwidth", sopt.grid_halfwidth, "Grid covers [-L, L]")
      ->check(CLI::PositiveNumber);
  scenario->add_option("--steps", sopt.steps, "Zeno measurement steps")
      ->check(CLI::PositiveNumber);
  scenario->add_option("--time", sopt.time, "Zeno total time")->check(check_tol);
  scenario->add_option("--mode", sopt.mode, "complete | incomplete")
      ->check(CLI::IsMember({"complete", "incomplete"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*povm) return cmd_povm(povm_action, povm_path, tol);
    if (*instrument) return cmd_instrument(inst_kind, inst_path, tol, inst_name);
    if (*eb) return cmd_ebcheck(eb_path, trials, seed, env_dim, tol);
    if (*scenario)
      return scenario_name == "zeno" ? run_zeno(sopt) : run_position(sopt);
  } catch (const cqm::io::FormatError& e) {
    std::cerr << "cqm: parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const cqm::io::Json::exception& e) {
    std::cerr << "cqm: parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const SemanticFailure& e) {
    std::cerr << "cqm: " << e.what() << "\n";
    return kFail;
  } catch (const cqm::DimensionError& e) {
    std::cerr << "cqm: dimension error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "cqm: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
