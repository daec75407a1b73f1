#include "lcmix/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lcmix/diagnostics.hpp"
#include "lcmix/model.hpp"
#include "lcmix/param_layout.hpp"
#include "lcmix/special_functions.hpp"

namespace lcmix {

namespace {

std::string num(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string significance_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

std::string format_table(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return "";
  std::size_t n_cols = 0;
  for (const auto& row : rows) n_cols = std::max(n_cols, row.size());
  std::vector<std::size_t> width(n_cols, 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      const std::string pad(width[c] - row[c].size(), ' ');
      line += (c == 0) ? row[c] + pad : pad + row[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
  }
  return out.str();
}

std::string format_fit_summary(const FitResult& fit) {
  const int n = static_cast<int>(fit.posteriors.rows());
  const std::vector<double> props = fit.params.class_proportions();
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"class", "proportion"});
  for (std::size_t s = 0; s < props.size(); ++s)
    rows.push_back({std::to_string(s + 1), num(props[s])});
  std::ostringstream out;
  out << "model " << to_string(fit.spec.variant) << ", S = " << fit.spec.n_classes
      << ", n = " << n << "\n";
  out << format_table(rows);
  out << "loglik " << num(fit.loglik, 4) << ", BIC " << num(bic(fit.loglik, fit.n_params, n), 2)
      << ", #par " << fit.n_params << "\n";
  if (fit.spec.n_classes > 1) {
    out << "entropy R2 " << num(entropy_r2(fit.posteriors, props)) << ", classification error "
        << num(classification_error(fit.posteriors)) << "\n";
  }
  out << (fit.converged ? "converged" : "NOT converged") << " after " << fit.n_iterations
      << " EM iterations (best start " << fit.start_index << ")\n";
  for (const auto& flag : fit.flags) out << "note: " << flag << "\n";
  return out.str();
}

std::string format_gaussian_table(const FitResult& fit, const WaldResult* equal_means,
                                  const WaldResult* equal_variances) {
  const ModelSpec& spec = fit.spec;
  if (!spec.models_z()) return "";
  const ParameterLayout layout(spec);
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"class", "mean", "(SE)", "variance", "(SE)"});
  for (int s = 0; s < spec.n_classes; ++s) {
    const double mu = fit.params.mu[s];
    std::string mean_cell = num(mu);
    std::string mean_se = "-";
    std::string var_se = "-";
    if (fit.se.has_value()) {
      const double se_mu = (*fit.se)[layout.mu_index(s)];
      if (se_mu > 0.0) {
        const double z2 = mu * mu / (se_mu * se_mu);
        mean_cell += significance_stars(chi_square_upper_tail(z2, 1));
      }
      mean_se = "(" + num(se_mu) + ")";
      var_se = "(" + num((*fit.se)[layout.sigma2_index(s)]) + ")";
    }
    rows.push_back({std::to_string(s + 1), mean_cell, mean_se, num(fit.params.sigma2_of(s)),
                    var_se});
  }
  std::ostringstream out;
  out << format_table(rows);
  if (equal_means != nullptr)
    out << "Wald(=) means:     W = " << num(equal_means->statistic, 3)
        << ", df = " << equal_means->df << ", p = " << num(equal_means->p_value) << "\n";
  if (equal_variances != nullptr)
    out << "Wald(=) variances: W = " << num(equal_variances->statistic, 3)
        << ", df = " << equal_variances->df << ", p = " << num(equal_variances->p_value) << "\n";
  return out.str();
}

std::string format_direct_effects(const FitResult& fit,
                                  const std::vector<std::string>& item_names,
                                  const std::vector<std::pair<int, DirectEffectTests>>& tests) {
  const ModelSpec& spec = fit.spec;
  const ParameterLayout layout(spec);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"item"};
  for (int s = 0; s < spec.n_classes; ++s) header.push_back("class " + std::to_string(s + 1));
  header.push_back("Wald(0) p");
  header.push_back("Wald(=) p");
  rows.push_back(std::move(header));
  for (int item = 0; item < spec.n_items(); ++item) {
    if (!spec.has_slopes() || spec.slope_constraints[item] == SlopeConstraint::Zero) continue;
    const DirectEffectTests* de = nullptr;
    for (const auto& [i, t] : tests)
      if (i == item) de = &t;
    const int K = spec.cardinalities[item];
    const bool shared = spec.slope_constraints[item] == SlopeConstraint::EqualAcrossClasses;
    for (int k = 1; k < K; ++k) {
      std::string label = item < static_cast<int>(item_names.size())
                              ? item_names[item]
                              : "item" + std::to_string(item + 1);
      if (K > 2) label += " (k=" + std::to_string(k) + ")";
      if (shared) label += " (shared)";
      std::vector<std::string> row{label};
      for (int s = 0; s < spec.n_classes; ++s) {
        const double b = fit.params.beta_at(item, s, k, spec);
        std::string cell = num(b);
        if (fit.se.has_value()) {
          const int idx = layout.beta_index(item, s, k);
          const double se = idx >= 0 ? (*fit.se)[idx] : 0.0;
          if (se > 0.0)
            cell += significance_stars(chi_square_upper_tail(b * b / (se * se), 1));
          cell += " (" + num(se) + ")";
        }
        row.push_back(std::move(cell));
      }
      if (k == 1 && de != nullptr) {
        row.push_back(num(de->zero_test.p_value));
        row.push_back(num(de->equality_test.p_value));
      } else {
        row.push_back("");
        row.push_back("");
      }
      rows.push_back(std::move(row));
    }
  }
  return format_table(rows);
}

std::string format_profile_table(const FitResult& fit, const std::vector<std::string>& item_names,
                                 const std::vector<double>& z_ref) {
  const ModelSpec& spec = fit.spec;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"item", "category"};
  for (int s = 0; s < spec.n_classes; ++s) header.push_back("class " + std::to_string(s + 1));
  rows.push_back(std::move(header));
  for (int item = 0; item < spec.n_items(); ++item) {
    const int K = spec.cardinalities[item];
    std::vector<std::vector<double>> probs(spec.n_classes);
    for (int s = 0; s < spec.n_classes; ++s)
      probs[s] = item_response_prob(fit.params, spec, item, s, z_ref[s]);
    for (int k = 0; k < K; ++k) {
      std::vector<std::string> row;
      row.push_back(k == 0 ? (item < static_cast<int>(item_names.size())
                                  ? item_names[item]
                                  : "item" + std::to_string(item + 1))
                           : "");
      row.push_back(std::to_string(k));
      for (int s = 0; s < spec.n_classes; ++s) row.push_back(num(probs[s][k]));
      rows.push_back(std::move(row));
    }
  }
  return format_table(rows);
}

std::string format_select_table(const std::string& label, const std::vector<SelectRow>& rows) {
  int best = -1;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (best < 0 || rows[i].bic_value < rows[best].bic_value) best = static_cast<int>(i);
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"S", "", "BIC", "#par", "Class.Err", "Entr.R2", ""});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SelectRow& r = rows[i];
    cells.push_back({std::to_string(r.s), static_cast<int>(i) == best ? "*" : " ",
                     num(r.bic_value, 2), std::to_string(r.n_params),
                     r.s == 1 ? "-" : num(r.class_err), r.s == 1 ? "-" : num(r.entropy),
                     r.converged ? "" : "(not converged)"});
  }
  std::ostringstream out;
  out << label << "\n" << format_table(cells);
  return out.str();
}

}  // namespace lcmix
