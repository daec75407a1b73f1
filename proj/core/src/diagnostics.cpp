#include "lcmix/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace lcmix {

double bic(double loglik, int n_params, int n) {
  if (n < 1) throw InputError("bic requires n >= 1");
  return -2.0 * loglik + n_params * std::log(static_cast<double>(n));
}

namespace {

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

double entropy_r2(const Eigen::MatrixXd& posteriors, std::span<const double> class_proportions) {
  const int S = static_cast<int>(posteriors.cols());
  if (static_cast<int>(class_proportions.size()) != S)
    throw InputError("class proportion length does not match posterior columns");
  if (S == 1) return 1.0;
  double base = 0.0;
  for (double p : class_proportions) base -= xlogx(p);
  base *= static_cast<double>(posteriors.rows());
  if (base <= 0.0) return 1.0;  // degenerate proportions carry no entropy
  double post = 0.0;
  for (Eigen::Index i = 0; i < posteriors.rows(); ++i)
    for (int s = 0; s < S; ++s) post -= xlogx(posteriors(i, s));
  return 1.0 - post / base;
}

double classification_error(const Eigen::MatrixXd& posteriors) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < posteriors.rows(); ++i)
    total += 1.0 - posteriors.row(i).maxCoeff();
  return total / static_cast<double>(posteriors.rows());
}

Partition modal_assignment(const Eigen::MatrixXd& posteriors) {
  Partition out;
  out.labels.resize(posteriors.rows());
  for (Eigen::Index i = 0; i < posteriors.rows(); ++i) {
    int best = 0;
    for (int s = 1; s < posteriors.cols(); ++s)
      if (posteriors(i, s) > posteriors(i, best)) best = s;  // strict: ties keep lowest
    out.labels[i] = best;
  }
  return out;
}

Partition proportional_assignment(const Eigen::MatrixXd& posteriors, Rng& rng) {
  Partition out;
  out.labels.resize(posteriors.rows());
  std::vector<double> row(posteriors.cols());
  for (Eigen::Index i = 0; i < posteriors.rows(); ++i) {
    for (int s = 0; s < posteriors.cols(); ++s) row[s] = posteriors(i, s);
    out.labels[i] = rng.categorical(row);
  }
  return out;
}

double adjusted_rand_index(const Partition& a, const Partition& b) {
  if (a.n() != b.n()) throw InputError("partitions have different lengths");
  const int n = a.n();
  if (n < 2) throw InputError("adjusted Rand index needs at least two observations");
  const int ka = 1 + *std::max_element(a.labels.begin(), a.labels.end());
  const int kb = 1 + *std::max_element(b.labels.begin(), b.labels.end());
  for (int v : a.labels)
    if (v < 0) throw InputError("negative class label");
  for (int v : b.labels)
    if (v < 0) throw InputError("negative class label");

  std::vector<long long> table(static_cast<std::size_t>(ka) * kb, 0);
  std::vector<long long> row(ka, 0), col(kb, 0);
  for (int i = 0; i < n; ++i) {
    ++table[static_cast<std::size_t>(a.labels[i]) * kb + b.labels[i]];
    ++row[a.labels[i]];
    ++col[b.labels[i]];
  }
  auto choose2 = [](long long m) -> long double {
    return static_cast<long double>(m) * (m - 1) / 2.0L;
  };
  long double index = 0.0L, row_sum = 0.0L, col_sum = 0.0L;
  for (long long v : table) index += choose2(v);
  for (long long v : row) row_sum += choose2(v);
  for (long long v : col) col_sum += choose2(v);
  const long double total = choose2(n);
  const long double expected = row_sum * col_sum / total;
  const long double max_index = 0.5L * (row_sum + col_sum);
  const long double denom = max_index - expected;
  if (denom == 0.0L) return 1.0;  // both partitions trivial and identical in pair structure
  return static_cast<double>((index - expected) / denom);
}

}  // namespace lcmix
