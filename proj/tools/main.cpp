// Command-line interface for latent class models with one continuous
// external variable: simulate, fit, select, compare, wald, study.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lcmix/diagnostics.hpp"
#include "lcmix/estimation.hpp"
#include "lcmix/inference.hpp"
#include "lcmix/io.hpp"
#include "lcmix/model.hpp"
#include "lcmix/report.hpp"
#include "lcmix/simulation.hpp"
#include "lcmix/special_functions.hpp"
#include "lcmix/types.hpp"

namespace fs = std::filesystem;
using namespace lcmix;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitEstimation = 2;
constexpr int kExitStrictWarning = 3;

struct CommonOptions {
  std::string data_path;
  std::string spec_path;
  std::string model = "lcdist";
  int classes = 2;
  int starts = 50;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string variance = "hetero";
  std::string slopes_path;
  bool log_external = false;
  bool strict = false;
  bool no_se = false;
};

std::vector<SlopeConstraint> read_slope_constraints(const std::string& path,
                                                    const ColumnSpec& cols) {
  const auto indicators = cols.indicators();
  std::vector<SlopeConstraint> out(indicators.size(), SlopeConstraint::Free);
  if (path.empty()) return out;
  std::ifstream in(path);
  if (!in) throw InputError("cannot open slope constraint file: " + path);
  std::string line;
  int line_no = 0;
  std::map<std::string, SlopeConstraint> by_name;
  std::optional<SlopeConstraint> default_constraint;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string name, eq, value;
    if (!(ls >> name)) continue;
    if (!(ls >> eq >> value) || eq != "=")
      throw InputError("malformed slope constraint at " + path + ":" + std::to_string(line_no) +
                       " (expected 'item = free|equal|zero')");
    if (name == "*") {
      default_constraint = slope_constraint_from_string(value);
    } else {
      by_name[name] = slope_constraint_from_string(value);
    }
  }
  for (std::size_t i = 0; i < indicators.size(); ++i) {
    if (default_constraint.has_value()) out[i] = *default_constraint;
    const auto it = by_name.find(indicators[i]->name);
    if (it != by_name.end()) {
      out[i] = it->second;
      by_name.erase(it);
    }
  }
  if (!by_name.empty())
    throw InputError("slope constraint for unknown item '" + by_name.begin()->first + "'");
  return out;
}

ModelSpec build_model_spec(const CommonOptions& opt, const ColumnSpec& cols) {
  const ModelVariant variant = model_variant_from_string(opt.model);
  std::vector<int> cards;
  for (const auto* col : cols.indicators()) cards.push_back(col->cardinality);
  if (variant == ModelVariant::LCdist && !opt.slopes_path.empty())
    throw InputError("lcdist has no direct effects; --slopes does not apply");
  std::vector<SlopeConstraint> slopes;
  if (variant != ModelVariant::LCdist) slopes = read_slope_constraints(opt.slopes_path, cols);
  return ModelSpec::make(variant, opt.classes, std::move(cards),
                         variance_mode_from_string(opt.variance), std::move(slopes));
}

FitConfig build_fit_config(const CommonOptions& opt) {
  FitConfig config;
  config.n_starts = opt.starts;
  config.rng_seed = opt.seed;
  return config;
}

Dataset load_dataset(const CommonOptions& opt, ColumnSpec& cols_out) {
  cols_out = ColumnSpec::parse_file(opt.spec_path);
  IngestReport report;
  Dataset data = ingest(opt.data_path, cols_out, &report, opt.log_external);
  std::cout << "read " << report.rows_read << " rows, dropped " << report.dropped_missing
            << " with missing values";
  if (report.dropped_nonpositive_log > 0)
    std::cout << ", dropped " << report.dropped_nonpositive_log
              << " with non-positive values under the log transform";
  std::cout << "; using n = " << data.n << "\n";
  return data;
}

std::vector<std::string> item_names_of(const Dataset& data) {
  return {data.column_names.begin(), data.column_names.begin() + data.j};
}

// Gaussian + direct-effect + profile tables for one fit.
void print_fit_tables(const FitResult& fit, const Dataset& data) {
  std::cout << format_fit_summary(fit);
  const ModelSpec& spec = fit.spec;
  const std::vector<std::string> items = item_names_of(data);

  if (spec.models_z()) {
    std::optional<WaldResult> wm, wv;
    if (fit.covariance.has_value() && spec.n_classes >= 2) {
      wm = wald_equal_means(fit);
      if (spec.variance_mode == VarianceMode::Heteroscedastic) wv = wald_equal_variances(fit);
    }
    std::cout << "\nexternal variable by class\n"
              << format_gaussian_table(fit, wm.has_value() ? &*wm : nullptr,
                                       wv.has_value() ? &*wv : nullptr);
  }

  if (spec.has_slopes()) {
    std::vector<std::pair<int, DirectEffectTests>> tests;
    if (fit.covariance.has_value() && spec.n_classes >= 2) {
      for (int item = 0; item < spec.n_items(); ++item)
        if (spec.slope_constraints[item] == SlopeConstraint::Free)
          tests.emplace_back(item, wald_direct_effects(fit, item));
    }
    std::cout << "\ndirect effects of " << data.column_names[data.j] << "\n"
              << format_direct_effects(fit, items, tests);
  }

  std::vector<double> z_ref(spec.n_classes);
  if (spec.models_z()) {
    for (int s = 0; s < spec.n_classes; ++s) z_ref[s] = fit.params.mu[s];
  } else {
    const double mean = std::accumulate(data.z.begin(), data.z.end(), 0.0) / data.n;
    std::fill(z_ref.begin(), z_ref.end(), mean);
  }
  std::cout << "\nclass profiles (response probabilities at the class reference z)\n"
            << format_profile_table(fit, items, z_ref);
}

int finish(const FitResult& fit, bool strict) {
  if (strict && !fit.flags.empty()) {
    std::cerr << "strict mode: numerical warnings present\n";
    return kExitStrictWarning;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const CommonOptions& opt, int n, double intercept_b, bool calibrate,
                 double target_r2) {
  StudyDesign design = StudyDesign::preset(model_variant_from_string(opt.model), n);
  if (calibrate || intercept_b <= 0.0) {
    FitConfig config;
    config.n_starts = std::min(opt.starts, 10);
    config.rng_seed = opt.seed;
    const CalibrationResult cal = calibrate_separation(design, target_r2, opt.seed, config);
    design.intercept_magnitude = cal.intercept_magnitude;
    std::cout << "calibrated intercept magnitude b = " << cal.intercept_magnitude
              << " (achieved entropy R2 " << cal.achieved_r2 << ")\n";
  } else {
    design.intercept_magnitude = intercept_b;
  }
  const GeneratedStudy gen = generate(design, opt.seed);
  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);
  write_dataset_csv((dir / "data.csv").string(), gen.data);
  column_spec_for(gen.data).write_file((dir / "columns.spec").string());
  write_truth_file((dir / "truth.txt").string(), design, opt.seed, gen.truth);
  std::cout << "wrote " << (dir / "data.csv").string() << " (n = " << gen.data.n << ", J = "
            << gen.data.j << "), columns.spec, truth.txt\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit

int cmd_fit(const CommonOptions& opt) {
  ColumnSpec cols;
  const Dataset data = load_dataset(opt, cols);
  const ModelSpec spec = build_model_spec(opt, cols);
  FitResult fit = lcmix::fit(spec, data, build_fit_config(opt));
  if (!opt.no_se) add_standard_errors(fit, data);
  fs::create_directories(opt.out_dir);
  const std::string result_path = save_fit_result(opt.out_dir, fit, data.column_names, opt.seed);
  print_fit_tables(fit, data);
  std::cout << "\nresult document: " << result_path << "\n";
  return finish(fit, opt.strict);
}

// ---------------------------------------------------------------------------
// select

int cmd_select(const CommonOptions& opt, const std::vector<std::string>& models, int s_min,
               int s_max) {
  if (s_min < 1 || s_max < s_min) throw InputError("invalid class range");
  ColumnSpec cols;
  const Dataset data = load_dataset(opt, cols);

  bool has_lcreg = false, has_z_model = false;
  for (const auto& m : models) {
    if (model_variant_from_string(m) == ModelVariant::LCreg) has_lcreg = true;
    else has_z_model = true;
  }

  std::ostringstream all;
  for (const auto& model : models) {
    CommonOptions mopt = opt;
    mopt.model = model;
    std::vector<SelectRow> rows;
    for (int s = s_min; s <= s_max; ++s) {
      mopt.classes = s;
      const ModelSpec spec = build_model_spec(mopt, cols);
      const FitResult fit = lcmix::fit(spec, data, build_fit_config(mopt));
      rows.push_back({s, bic(fit.loglik, fit.n_params, data.n), fit.n_params,
                      classification_error(fit.posteriors),
                      entropy_r2(fit.posteriors, fit.params.class_proportions()),
                      fit.converged});
    }
    all << format_select_table("model " + model, rows) << "\n";
  }
  std::cout << all.str();
  if (has_lcreg && has_z_model) {
    std::cout << "note: BIC cannot rank lcreg against lcdist/lccw. lcreg conditions on the\n"
                 "external variable instead of modeling it, so the likelihoods are not on\n"
                 "a common scale; compare lcreg sweeps only against other lcreg sweeps.\n";
  }
  fs::create_directories(opt.out_dir);
  std::ofstream out(fs::path(opt.out_dir) / "select.txt");
  out << all.str();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// compare

int cmd_compare(const std::string& fit_a, const std::string& fit_b, const std::string& truth) {
  const LoadedFit a = load_fit_result(fit_a);
  const LoadedFit b = load_fit_result(fit_b);
  const Partition pa = modal_assignment(a.fit.posteriors);
  const Partition pb = modal_assignment(b.fit.posteriors);
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"comparison", "ARI"});
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", adjusted_rand_index(pa, pb));
  rows.push_back({"fit A vs fit B", buf});
  if (!truth.empty()) {
    const TruthFile t = read_truth_file(truth);
    std::snprintf(buf, sizeof(buf), "%.4f", adjusted_rand_index(pa, t.labels));
    rows.push_back({"fit A vs truth", buf});
    std::snprintf(buf, sizeof(buf), "%.4f", adjusted_rand_index(pb, t.labels));
    rows.push_back({"fit B vs truth", buf});
  }
  std::cout << "A: " << fit_a << " (" << to_string(a.fit.spec.variant)
            << ", S = " << a.fit.spec.n_classes << ")\n";
  std::cout << "B: " << fit_b << " (" << to_string(b.fit.spec.variant)
            << ", S = " << b.fit.spec.n_classes << ")\n";
  std::cout << format_table(rows);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// wald

int cmd_wald(const std::string& fit_path, const std::string& test, const std::string& item_name) {
  const LoadedFit loaded = load_fit_result(fit_path);
  const FitResult& fit = loaded.fit;
  if (!fit.covariance.has_value())
    throw InputError("result document has no covariance; re-run fit without --no-se");

  auto print_result = [](const WaldResult& w) {
    std::cout << w.constraint_description << ": W = " << w.statistic << ", df = " << w.df
              << ", p = " << w.p_value << " " << significance_stars(w.p_value) << "\n";
  };

  const bool all = test == "all";
  if ((all && fit.spec.models_z() && fit.spec.n_classes >= 2) || test == "means")
    print_result(wald_equal_means(fit));
  if ((all && fit.spec.models_z() && fit.spec.n_classes >= 2 &&
       fit.spec.variance_mode == VarianceMode::Heteroscedastic) ||
      test == "variances")
    print_result(wald_equal_variances(fit));
  if (all || test == "effects") {
    if (!fit.spec.has_slopes()) {
      if (!all) throw InputError("model has no direct effects");
      return kExitOk;
    }
    const std::vector<std::string> items(loaded.column_names.begin(),
                                         loaded.column_names.end() - 1);
    for (int item = 0; item < fit.spec.n_items(); ++item) {
      if (fit.spec.slope_constraints[item] != SlopeConstraint::Free) continue;
      const std::string name = item < static_cast<int>(items.size())
                                   ? items[item]
                                   : "item" + std::to_string(item + 1);
      if (!item_name.empty() && name != item_name) continue;
      const DirectEffectTests t = wald_direct_effects(fit, item);
      print_result(t.zero_test);
      print_result(t.equality_test);
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// study

struct StudyFits {
  std::map<std::string, FitResult> at_s2;       // variant -> S=2 fit (with SEs)
  std::map<std::string, std::vector<SelectRow>> sweeps;
};

double cached_calibration(const std::string& out_dir, const StudyDesign& design,
                          std::uint64_t seed, double target_r2, int starts) {
  fs::create_directories(out_dir);
  const fs::path cache =
      fs::path(out_dir) / ("calibration_" + to_string(design.generator) + ".txt");
  if (fs::exists(cache)) {
    std::ifstream in(cache);
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      if (line.substr(0, eq).find("intercept_magnitude") != std::string::npos) {
        const double b = std::stod(line.substr(eq + 1));
        std::cout << "using cached calibration b = " << b << " (" << cache.string() << ")\n";
        return b;
      }
    }
  }
  FitConfig config;
  config.n_starts = std::min(starts, 10);
  config.rng_seed = seed;
  const CalibrationResult cal = calibrate_separation(design, target_r2, seed, config);
  std::ofstream out(cache);
  out << "design = " << to_string(design.generator) << "\n";
  out << "target_r2 = " << target_r2 << "\n";
  out << "intercept_magnitude = " << cal.intercept_magnitude << "\n";
  out << "achieved_r2 = " << cal.achieved_r2 << "\n";
  out << "seed = " << seed << "\n";
  std::cout << "calibrated b = " << cal.intercept_magnitude << " (achieved R2 "
            << cal.achieved_r2 << ") cached at " << cache.string() << "\n";
  return cal.intercept_magnitude;
}

int run_one_study(const std::string& study, const CommonOptions& opt, int n, int s_max,
                  double target_r2, double intercept_b) {
  const ModelVariant generator = model_variant_from_string(study);
  StudyDesign design = StudyDesign::preset(generator, n);
  design.intercept_magnitude =
      intercept_b > 0.0 ? intercept_b
                        : cached_calibration(opt.out_dir, design, opt.seed, target_r2, opt.starts);

  const GeneratedStudy gen = generate(design, opt.seed);
  const fs::path dir = fs::path(opt.out_dir) / study;
  fs::create_directories(dir);
  write_dataset_csv((dir / "data.csv").string(), gen.data);
  column_spec_for(gen.data).write_file((dir / "columns.spec").string());
  write_truth_file((dir / "truth.txt").string(), design, opt.seed, gen.truth);

  const std::vector<std::string> variants = {"lcreg", "lcdist", "lccw"};
  StudyFits fits;
  std::ostringstream report;
  report << "study " << study << ": n = " << n << ", seed = " << opt.seed
         << ", intercept magnitude b = " << design.intercept_magnitude << "\n\n";

  for (const auto& variant : variants) {
    CommonOptions vopt = opt;
    vopt.model = variant;
    std::vector<SelectRow> rows;
    for (int s = 1; s <= s_max; ++s) {
      vopt.classes = s;
      const ModelSpec spec =
          ModelSpec::make(model_variant_from_string(variant), s, gen.data.cardinalities);
      FitResult fit = lcmix::fit(spec, gen.data, build_fit_config(vopt));
      rows.push_back({s, bic(fit.loglik, fit.n_params, gen.data.n), fit.n_params,
                      classification_error(fit.posteriors),
                      entropy_r2(fit.posteriors, fit.params.class_proportions()),
                      fit.converged});
      if (s == 2) {
        add_standard_errors(fit, gen.data);
        save_fit_result((dir / ("fit_" + variant)).string(), fit, gen.data.column_names,
                        opt.seed);
        fits.at_s2.emplace(variant, std::move(fit));
      }
    }
    fits.sweeps.emplace(variant, std::move(rows));
  }

  // Class proportions / separation at S = 2 for each variant.
  {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"model"};
    for (int s = 0; s < 2; ++s) header.push_back("prop" + std::to_string(s + 1));
    header.push_back("Entr.R2");
    header.push_back("#par");
    rows.push_back(std::move(header));
    char buf[32];
    for (const auto& variant : variants) {
      const FitResult& fit = fits.at_s2.at(variant);
      std::vector<std::string> row{variant};
      for (double p : fit.params.class_proportions()) {
        std::snprintf(buf, sizeof(buf), "%.4f", p);
        row.push_back(buf);
      }
      std::snprintf(buf, sizeof(buf), "%.4f",
                    entropy_r2(fit.posteriors, fit.params.class_proportions()));
      row.push_back(buf);
      row.push_back(std::to_string(fit.n_params));
      rows.push_back(std::move(row));
    }
    report << "class proportions at S = 2 (correct model: " << study << ")\n"
           << format_table(rows) << "\n";
  }

  // Gaussian component tables for the z-modeling variants.
  for (const auto& variant : {std::string("lcdist"), std::string("lccw")}) {
    const FitResult& fit = fits.at_s2.at(variant);
    const WaldResult wm = wald_equal_means(fit);
    const WaldResult wv = wald_equal_variances(fit);
    report << "external variable by class, model " << variant << "\n"
           << format_gaussian_table(fit, &wm, &wv) << "\n";
  }

  // Partition agreement against the correctly specified fit and the truth.
  {
    const Partition reference = modal_assignment(fits.at_s2.at(study).posteriors);
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"model", "ARI vs correct fit", "ARI vs truth"});
    char buf[32];
    for (const auto& variant : variants) {
      const Partition part = modal_assignment(fits.at_s2.at(variant).posteriors);
      std::vector<std::string> row{variant};
      std::snprintf(buf, sizeof(buf), "%.4f", adjusted_rand_index(reference, part));
      row.push_back(buf);
      std::snprintf(buf, sizeof(buf), "%.4f", adjusted_rand_index(gen.truth, part));
      row.push_back(buf);
      rows.push_back(std::move(row));
    }
    report << "partition agreement at S = 2\n" << format_table(rows) << "\n";
  }

  for (const auto& variant : variants)
    report << format_select_table("BIC sweep, model " + variant, fits.sweeps.at(variant))
           << "\n";

  std::cout << report.str();
  std::ofstream out(dir / "study_report.txt");
  out << report.str();
  std::cout << "study artifacts under " << dir.string() << "\n";
  return kExitOk;
}

int cmd_study(const std::string& study, const CommonOptions& opt, int n, int s_max,
              double target_r2, double intercept_b) {
  if (study == "all") {
    for (const auto& s : {"lcreg", "lcdist", "lccw"}) {
      const int rc = run_one_study(s, opt, n, s_max, target_r2, intercept_b);
      if (rc != kExitOk) return rc;
    }
    return kExitOk;
  }
  return run_one_study(study, opt, n, s_max, target_r2, intercept_b);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent class models with a continuous external variable (LCreg, LCdist, LCcw)"};
  app.require_subcommand(1);

  CommonOptions opt;

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a population-study dataset");
  int sim_n = 30000;
  double sim_b = 0.0;
  bool sim_calibrate = false;
  double target_r2 = 0.7;
  sim->add_option("--model", opt.model, "Generating model: lcreg|lcdist|lccw")->required();
  sim->add_option("--n", sim_n, "Sample size");
  sim->add_option("--seed", opt.seed, "RNG seed");
  sim->add_option("--out", opt.out_dir, "Output directory");
  sim->add_option("--starts", opt.starts, "EM starts used during calibration");
  sim->add_option("--intercept-b", sim_b, "Intercept magnitude b (skips calibration)");
  sim->add_flag("--calibrate", sim_calibrate, "Calibrate b to the target entropy R2");
  sim->add_option("--target-r2", target_r2, "Calibration target entropy R2");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit one model by maximum likelihood (EM)");
  fit_cmd->add_option("--data", opt.data_path, "CSV data file")->required();
  fit_cmd->add_option("--spec", opt.spec_path, "Column spec file")->required();
  fit_cmd->add_option("--model", opt.model, "lcreg|lcdist|lccw")->required();
  fit_cmd->add_option("--classes", opt.classes, "Number of latent classes S");
  fit_cmd->add_option("--starts", opt.starts, "Random EM starts");
  fit_cmd->add_option("--seed", opt.seed, "RNG seed");
  fit_cmd->add_option("--out", opt.out_dir, "Output directory");
  fit_cmd->add_option("--variance", opt.variance, "hetero|common class variances of z");
  fit_cmd->add_option("--slopes", opt.slopes_path, "Per-item slope constraint file");
  fit_cmd->add_flag("--log-external", opt.log_external, "Log-transform the external column");
  fit_cmd->add_flag("--strict", opt.strict, "Exit 3 on numerical warnings");
  fit_cmd->add_flag("--no-se", opt.no_se, "Skip standard errors and Wald tests");

  // select
  auto* sel = app.add_subcommand("select", "BIC sweep over the number of classes");
  std::string sel_models = "lcdist";
  int s_min = 1, s_max = 5;
  sel->add_option("--data", opt.data_path, "CSV data file")->required();
  sel->add_option("--spec", opt.spec_path, "Column spec file")->required();
  sel->add_option("--model", sel_models, "Comma-separated list: lcreg,lcdist,lccw");
  sel->add_option("--min-classes", s_min, "Smallest S");
  sel->add_option("--max-classes", s_max, "Largest S");
  sel->add_option("--starts", opt.starts, "Random EM starts");
  sel->add_option("--seed", opt.seed, "RNG seed");
  sel->add_option("--out", opt.out_dir, "Output directory");
  sel->add_option("--variance", opt.variance, "hetero|common");
  sel->add_option("--slopes", opt.slopes_path, "Per-item slope constraint file");
  sel->add_flag("--log-external", opt.log_external, "Log-transform the external column");

  // compare
  auto* cmp = app.add_subcommand("compare", "Adjusted Rand index between two fits");
  std::string fit_a, fit_b, truth_path;
  cmp->add_option("--fit-a", fit_a, "result.json of the first fit")->required();
  cmp->add_option("--fit-b", fit_b, "result.json of the second fit")->required();
  cmp->add_option("--truth", truth_path, "Optional truth sidecar for ARI against true labels");

  // wald
  auto* wald_cmd = app.add_subcommand("wald", "Wald tests from a saved fit");
  std::string wald_fit, wald_test_name = "all", wald_item;
  wald_cmd->add_option("--fit", wald_fit, "result.json of a fit with covariance")->required();
  wald_cmd->add_option("--test", wald_test_name, "means|variances|effects|all");
  wald_cmd->add_option("--item", wald_item, "Restrict --test effects to one item");

  // study
  auto* study_cmd =
      app.add_subcommand("study", "Reproduce a population study end to end");
  std::string study_name = "all";
  int study_n = 30000;
  int study_smax = 5;
  int study_starts = 10;
  double study_b = 0.0;
  study_cmd->add_option("--study", study_name, "lcreg|lcdist|lccw|all");
  study_cmd->add_option("--n", study_n, "Sample size");
  study_cmd->add_option("--seed", opt.seed, "RNG seed");
  study_cmd->add_option("--out", opt.out_dir, "Output directory");
  study_cmd->add_option("--starts", study_starts, "Random EM starts per fit");
  study_cmd->add_option("--max-classes", study_smax, "Largest S in the BIC sweep");
  study_cmd->add_option("--target-r2", target_r2, "Calibration target entropy R2");
  study_cmd->add_option("--intercept-b", study_b,
                        "Intercept magnitude b (skips calibration when > 0)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(opt, sim_n, sim_b, sim_calibrate, target_r2);
    if (fit_cmd->parsed()) return cmd_fit(opt);
    if (sel->parsed()) {
      std::vector<std::string> models;
      std::stringstream ss(sel_models);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) models.push_back(tok);
      if (models.empty()) throw InputError("no models given");
      return cmd_select(opt, models, s_min, s_max);
    }
    if (cmp->parsed()) return cmd_compare(fit_a, fit_b, truth_path);
    if (wald_cmd->parsed()) return cmd_wald(wald_fit, wald_test_name, wald_item);
    if (study_cmd->parsed()) {
      opt.starts = study_starts;
      return cmd_study(study_name, opt, study_n, study_smax, target_r2, study_b);
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const EstimationError& e) {
    std::cerr << "estimation failed: " << e.what() << "\n";
    return kExitEstimation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitEstimation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEstimation;
  }
  return kExitOk;
}
