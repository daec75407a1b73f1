#include "lcmix/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <atomic>

#include "lcmix/model.hpp"
#include "parallel_util.hpp"

namespace lcmix {

std::atomic<long> g_eval_calls{0}, g_obj_calls{0}, g_newton_calls{0}, g_eval_rows{0};
std::atomic<long> g_full_acc{0}, g_half_acc{0}, g_tiny_acc{0}, g_entry_conv{0}, g_iter_conv{0};

namespace {

// Measurement logits are confined to this box; reaching it means the weighted
// subsample is (quasi-)separated and the MLE diverges.
constexpr double kCoefBound = 30.0;

double sample_mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  const double m = sample_mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size());
}

// Baseline-category logits of responsibility-weighted category frequencies.
// Writes the K-length block for one (item, class); returns true if clamped.
bool closed_form_intercepts(const Eigen::MatrixXd& post, const Dataset& data, int item, int cls,
                            double* b0) {
  const int K = data.cardinalities[item];
  std::vector<double> counts(K, 0.0);
  for (int row = 0; row < data.n; ++row) counts[data.code(row, item)] += post(row, cls);
  b0[0] = 0.0;
  bool clamped = false;
  for (int k = 1; k < K; ++k) {
    double v;
    if (counts[k] > 0.0 && counts[0] > 0.0) {
      v = std::log(counts[k] / counts[0]);
    } else if (counts[k] == counts[0]) {
      v = 0.0;  // both empty; the class itself is degenerate and caught elsewhere
    } else {
      v = counts[k] == 0.0 ? -kCoefBound : kCoefBound;
    }
    if (v > kCoefBound) v = kCoefBound;
    if (v < -kCoefBound) v = -kCoefBound;
    clamped = clamped || std::fabs(v) >= kCoefBound;
    b0[k] = v;
  }
  return clamped;
}

// Weighted multinomial-logit problem for one item: class-specific intercepts
// for every class in `classes` plus one slope vector shared by all of them.
// A single-class problem is the per-class (free-slope) case. Dichotomous
// items run on vectorized array kernels; general K falls back to row loops.
//
// x layout: [ b0(classes[0], k=1..K-1), b0(classes[1], ...), ..., slope(k=1..K-1) ]
struct ItemLogitProblem {
  const Eigen::MatrixXd& post;
  const Dataset& data;
  int item;
  const std::vector<int>& classes;
  int K;
  const Eigen::ArrayXd* zv = nullptr;  // packed columns, set for K == 2
  const Eigen::ArrayXd* yv = nullptr;

  int dim() const { return (static_cast<int>(classes.size()) + 1) * (K - 1); }
  int slope_offset() const { return static_cast<int>(classes.size()) * (K - 1); }
  bool dichotomous() const { return K == 2 && zv != nullptr && yv != nullptr; }

  // Fused single-pass kernel for dichotomous items: one exp and one log1p
  // per row. `need_derivs` toggles the gradient/Hessian accumulation.
  double accumulate_k2(const Eigen::VectorXd& x, bool need_derivs, Eigen::VectorXd* grad,
                       Eigen::MatrixXd* hess) const {
    (need_derivs ? g_eval_calls : g_obj_calls)++; g_eval_rows += zv->size();
    const int so = slope_offset();
    const double b = x[so];
    const int n = static_cast<int>(zv->size());
    const double* zp = zv->data();
    const double* yp = yv->data();
    double q = 0.0;
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
      const int io = static_cast<int>(ci);
      const double b0 = x[io];
      const double* wp = post.col(classes[ci]).data();
      double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
      for (int row = 0; row < n; ++row) {
        const double wi = wp[row];
        const double zi = zp[row];
        const double sc = b0 + b * zi;
        const double e = std::exp(-std::fabs(sc));
        const double denom = 1.0 + e;
        const double p = sc >= 0.0 ? 1.0 / denom : e / denom;
        q += wi * (yp[row] * sc - (std::max(sc, 0.0) + std::log1p(e)));
        if (need_derivs) {
          const double r = wi * (yp[row] - p);
          g0 += r;
          g1 += r * zi;
          const double h = wi * p * (1.0 - p);
          h00 += h;
          h01 += h * zi;
          h11 += h * zi * zi;
        }
      }
      if (need_derivs) {
        (*grad)[io] += g0;
        (*grad)[so] += g1;
        (*hess)(io, io) -= h00;
        (*hess)(io, so) -= h01;
        (*hess)(so, io) -= h01;
        (*hess)(so, so) -= h11;
      }
    }
    return q;
  }

  double objective(const Eigen::VectorXd& x) const {
    if (dichotomous()) return accumulate_k2(x, false, nullptr, nullptr);
    return objective_scalar(x);
  }

  double eval(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    if (!dichotomous()) return eval_scalar(x, grad, hess);
    grad.setZero(dim());
    hess.setZero(dim(), dim());
    return accumulate_k2(x, true, &grad, &hess);
  }

  double objective_scalar(const Eigen::VectorXd& x) const {
    const int Km1 = K - 1;
    const int so = slope_offset();
    double q = 0.0;
    std::vector<double> s_buf(K);
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
      const int s = classes[ci];
      const double* b0 = x.data() + ci * Km1;
      const double* b = x.data() + so;
      for (int row = 0; row < data.n; ++row) {
        const double w = post(row, s);
        if (w == 0.0) continue;
        const double z = data.z[row];
        s_buf[0] = 0.0;
        double mx = 0.0;
        for (int k = 1; k < K; ++k) {
          s_buf[k] = b0[k - 1] + z * b[k - 1];
          mx = std::max(mx, s_buf[k]);
        }
        double sum = 0.0;
        for (int k = 0; k < K; ++k) sum += std::exp(s_buf[k] - mx);
        q += w * (s_buf[data.code(row, item)] - mx - std::log(sum));
      }
    }
    return q;
  }

  double eval_scalar(const Eigen::VectorXd& x, Eigen::VectorXd& grad,
                     Eigen::MatrixXd& hess) const {
    const int Km1 = K - 1;
    const int so = slope_offset();
    grad.setZero(dim());
    hess.setZero(dim(), dim());
    double q = 0.0;
    std::vector<double> s_buf(K), p(K);
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
      const int s = classes[ci];
      const int io = static_cast<int>(ci) * Km1;
      const double* b0 = x.data() + io;
      const double* b = x.data() + so;
      for (int row = 0; row < data.n; ++row) {
        const double w = post(row, s);
        if (w == 0.0) continue;
        const double z = data.z[row];
        s_buf[0] = 0.0;
        double mx = 0.0;
        for (int k = 1; k < K; ++k) {
          s_buf[k] = b0[k - 1] + z * b[k - 1];
          mx = std::max(mx, s_buf[k]);
        }
        double sum = 0.0;
        for (int k = 0; k < K; ++k) {
          p[k] = std::exp(s_buf[k] - mx);
          sum += p[k];
        }
        for (int k = 0; k < K; ++k) p[k] /= sum;
        const int y = data.code(row, item);
        q += w * (s_buf[y] - mx - std::log(sum));
        for (int k = 1; k < K; ++k) {
          const double gk = w * ((y == k ? 1.0 : 0.0) - p[k]);
          grad[io + k - 1] += gk;
          grad[so + k - 1] += gk * z;
          for (int l = 1; l < K; ++l) {
            const double h = w * (p[k] * ((k == l ? 1.0 : 0.0) - p[l]));
            hess(io + k - 1, io + l - 1) -= h;
            hess(io + k - 1, so + l - 1) -= h * z;
            hess(so + k - 1, io + l - 1) -= h * z;
            hess(so + k - 1, so + l - 1) -= h * z * z;
          }
        }
      }
    }
    return q;
  }
};

Eigen::VectorXd project_to_box(Eigen::VectorXd x) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x[i] = std::clamp(x[i], -kCoefBound, kCoefBound);
  return x;
}

struct NewtonOutcome {
  Eigen::VectorXd x;
  bool converged = false;
  bool clamped = false;
};

// Maximizes the problem objective inside the coefficient box. Steps are
// accepted only when the objective does not decrease, so a warm-started call
// can never lose ground.
NewtonOutcome newton_maximize(const ItemLogitProblem& problem, Eigen::VectorXd x,
                              const FitConfig& config) {
  g_newton_calls++;
  NewtonOutcome out;
  x = project_to_box(std::move(x));
  Eigen::VectorXd grad(problem.dim()), cand_grad(problem.dim());
  Eigen::MatrixXd hess(problem.dim(), problem.dim()), cand_hess(problem.dim(), problem.dim());
  double q = problem.eval(x, grad, hess);
  for (int iter = 0; iter < config.max_newton_iterations; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() < config.newton_tolerance) {
      (iter == 0 ? g_entry_conv : g_iter_conv)++;
      out.converged = true;
      break;
    }
    Eigen::MatrixXd a = -hess;
    Eigen::VectorXd step = a.ldlt().solve(grad);
    if (!step.allFinite()) {
      a.diagonal().array() += 1e-10 * (1.0 + a.diagonal().cwiseAbs().maxCoeff());
      step = a.ldlt().solve(grad);
      if (!step.allFinite()) break;
    }

    // A sub-resolution Newton step lands inside the quadratic basin: the
    // objective change is below double resolution (so a descent test would
    // misjudge it) and the post-step score is O(L * |step|^2), far below any
    // usable tolerance. Apply it and stop.
    if (step.lpNorm<Eigen::Infinity>() < 1e-8 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
      const Eigen::VectorXd cand = project_to_box(x + step);
      if ((cand - x).lpNorm<Eigen::Infinity>() == 0.0) break;  // pinned at the box
      g_tiny_acc++;
      x = cand;
      out.converged = true;
      break;
    }

    // Provisional full step: evaluate once and keep the derivatives on
    // acceptance, so a successful Newton iteration costs a single pass.
    const Eigen::VectorXd full = project_to_box(x + step);
    const double q_full = problem.eval(full, cand_grad, cand_hess);
    if (q_full >= q) {
      if ((full - x).lpNorm<Eigen::Infinity>() <
          1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>()))
        break;  // stalled at the boundary or numeric limit
      g_full_acc++;
      x = full;
      q = q_full;
      grad.swap(cand_grad);
      hess.swap(cand_hess);
      continue;
    }
    bool accepted = false;
    double t = 0.5;
    for (int half = 0; half < 40; ++half) {
      const Eigen::VectorXd cand = project_to_box(x + t * step);
      const double qc = problem.objective(cand);
      if (qc >= q) {
        if ((cand - x).lpNorm<Eigen::Infinity>() <
            1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>()))
          break;
        g_half_acc++;
        x = cand;
        q = problem.eval(x, grad, hess);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  if (grad.lpNorm<Eigen::Infinity>() < config.newton_tolerance) out.converged = true;
  out.clamped = x.cwiseAbs().maxCoeff() >= kCoefBound;
  out.x = std::move(x);
  return out;
}

std::vector<std::string> dedup_flags(std::vector<std::string> flags) {
  std::sort(flags.begin(), flags.end());
  flags.erase(std::unique(flags.begin(), flags.end()), flags.end());
  return flags;
}

}  // namespace

void FitConfig::validate() const {
  if (n_starts < 1) throw InputError("n_starts must be >= 1");
  if (max_em_iterations < 1) throw InputError("max_em_iterations must be >= 1");
  if (max_newton_iterations < 1) throw InputError("max_newton_iterations must be >= 1");
  if (!(em_tolerance > 0.0)) throw InputError("em_tolerance must be > 0");
  if (!(newton_tolerance > 0.0)) throw InputError("newton_tolerance must be > 0");
}

double variance_floor(std::span<const double> z) {
  const double floor = 1e-6 * sample_variance(z);
  return floor > 0.0 ? floor : 1e-12;
}

Parameters initialize(const ModelSpec& spec, const Dataset& data, Rng& rng) {
  spec.validate();
  spec.validate_against(data);
  const int S = spec.n_classes;
  Eigen::MatrixXd resp(data.n, S);
  for (int row = 0; row < data.n; ++row) {
    double sum = 0.0;
    for (int s = 0; s < S; ++s) {
      resp(row, s) = rng.exponential();
      sum += resp(row, s);
    }
    resp.row(row) /= sum;
  }
  Parameters params = Parameters::zeros(spec);
  params.theta = m_step_mixing(resp);
  if (spec.models_z())
    std::tie(params.mu, params.sigma2) = m_step_gaussian(resp, data.z, spec.variance_mode);
  for (int item = 0; item < data.j; ++item) {
    const int K = data.cardinalities[item];
    for (int s = 0; s < S; ++s)
      closed_form_intercepts(resp, data, item, s, params.beta0[item].data() + static_cast<std::size_t>(s) * K);
  }
  return params;
}

EStepResult e_step(const Parameters& params, const ModelSpec& spec, const Dataset& data) {
  spec.validate_against(data);
  params.validate(spec);
  auto pass = detail::posterior_pass(params, spec, data);
  return {std::move(pass.posteriors), pass.loglik};
}

std::vector<double> m_step_mixing(const Eigen::MatrixXd& posteriors) {
  const int S = static_cast<int>(posteriors.cols());
  const Eigen::VectorXd p = posteriors.colwise().mean();
  for (int s = 0; s < S; ++s)
    if (!(p[s] > 0.0))
      throw NumericalError("degenerate class " + std::to_string(s) +
                           ": zero responsibility mass");
  std::vector<double> theta(S);
  theta[0] = 0.0;
  for (int s = 1; s < S; ++s) theta[s] = std::log(p[s] / p[0]);
  return theta;
}

std::pair<std::vector<double>, std::vector<double>> m_step_gaussian(
    const Eigen::MatrixXd& posteriors, const std::vector<double>& z, VarianceMode mode) {
  const int n = static_cast<int>(posteriors.rows());
  const int S = static_cast<int>(posteriors.cols());
  const Eigen::Map<const Eigen::VectorXd> zv(z.data(), n);
  const double floor = variance_floor(z);
  std::vector<double> mu(S), sigma2;
  Eigen::VectorXd weight = posteriors.colwise().sum();
  for (int s = 0; s < S; ++s)
    if (!(weight[s] > 0.0))
      throw NumericalError("degenerate class " + std::to_string(s) +
                           ": zero responsibility mass");
  for (int s = 0; s < S; ++s) mu[s] = posteriors.col(s).dot(zv) / weight[s];
  if (mode == VarianceMode::Heteroscedastic) {
    sigma2.resize(S);
    for (int s = 0; s < S; ++s) {
      const Eigen::ArrayXd d = zv.array() - mu[s];
      sigma2[s] = std::max((posteriors.col(s).array() * d * d).sum() / weight[s], floor);
    }
  } else {
    double pooled = 0.0;
    for (int s = 0; s < S; ++s) {
      const Eigen::ArrayXd d = zv.array() - mu[s];
      pooled += (posteriors.col(s).array() * d * d).sum();
    }
    sigma2.assign(1, std::max(pooled / static_cast<double>(n), floor));
  }
  return {std::move(mu), std::move(sigma2)};
}

MeasurementStep m_step_measurement(const Eigen::MatrixXd& posteriors, const ModelSpec& spec,
                                   const Dataset& data, const FitConfig& config,
                                   const Parameters* warm_start) {
  const int S = spec.n_classes;
  const detail::PackedData packed = detail::PackedData::build(data);
  MeasurementStep out;
  out.beta0.resize(data.j);
  out.beta.resize(data.j);

  const bool z_varies =
      sample_variance(data.z) > 1e-20 * (1.0 + sample_mean(data.z) * sample_mean(data.z));

  for (int item = 0; item < data.j; ++item) {
    const int K = data.cardinalities[item];
    const int Km1 = K - 1;
    out.beta0[item].assign(static_cast<std::size_t>(S) * K, 0.0);
    out.beta[item].assign(static_cast<std::size_t>(S) * K, 0.0);

    SlopeConstraint constraint =
        spec.has_slopes() ? spec.slope_constraints[item] : SlopeConstraint::Zero;
    if (constraint != SlopeConstraint::Zero && !z_varies) {
      constraint = SlopeConstraint::Zero;
      out.flags.push_back("external variable has no variation: slopes not identified, held at 0");
    }

    if (constraint == SlopeConstraint::Zero) {
      for (int s = 0; s < S; ++s) {
        if (closed_form_intercepts(posteriors, data, item, s,
                                   out.beta0[item].data() + static_cast<std::size_t>(s) * K))
          out.flags.push_back("quasi-separation: intercepts clamped at item " +
                              std::to_string(item) + " class " + std::to_string(s));
      }
      continue;
    }

    // Newton problems: one per class for free slopes, one joint problem for
    // class-equal slopes.
    std::vector<std::vector<int>> groups;
    if (constraint == SlopeConstraint::Free) {
      for (int s = 0; s < S; ++s) groups.push_back({s});
    } else {
      std::vector<int> all(S);
      std::iota(all.begin(), all.end(), 0);
      groups.push_back(std::move(all));
    }

    for (const auto& classes : groups) {
      ItemLogitProblem problem{posteriors, data, item, classes, K};
      if (K == 2) {
        problem.zv = &packed.z;
        problem.yv = &packed.item_codes[item];
      }
      Eigen::VectorXd x0(problem.dim());
      const int so = problem.slope_offset();
      for (std::size_t ci = 0; ci < classes.size(); ++ci) {
        const int s = classes[ci];
        if (warm_start != nullptr) {
          for (int k = 1; k < K; ++k)
            x0[static_cast<int>(ci) * Km1 + k - 1] = warm_start->beta0_at(item, s, k, spec);
        } else {
          std::vector<double> block(K);
          closed_form_intercepts(posteriors, data, item, s, block.data());
          for (int k = 1; k < K; ++k) x0[static_cast<int>(ci) * Km1 + k - 1] = block[k];
        }
      }
      for (int k = 1; k < K; ++k)
        x0[so + k - 1] =
            warm_start != nullptr ? warm_start->beta_at(item, classes[0], k, spec) : 0.0;

      NewtonOutcome sol = newton_maximize(problem, std::move(x0), config);
      if (!sol.converged)
        out.flags.push_back("measurement Newton did not reach score tolerance at item " +
                            std::to_string(item));
      if (sol.clamped)
        out.flags.push_back("quasi-separation: coefficients clamped at item " +
                            std::to_string(item));
      for (std::size_t ci = 0; ci < classes.size(); ++ci) {
        const int s = classes[ci];
        for (int k = 1; k < K; ++k) {
          out.beta0[item][static_cast<std::size_t>(s) * K + k] =
              sol.x[static_cast<int>(ci) * Km1 + k - 1];
          out.beta[item][static_cast<std::size_t>(s) * K + k] = sol.x[so + k - 1];
        }
      }
    }
  }
  return out;
}

void canonicalize_class_order(Parameters& params, Eigen::MatrixXd& posteriors,
                              const ModelSpec& spec) {
  const int S = spec.n_classes;
  if (S == 1) return;
  const std::vector<double> p = params.class_proportions();
  std::vector<int> order(S);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p[a] > p[b]; });
  bool identity = true;
  for (int s = 0; s < S; ++s) identity = identity && order[s] == s;
  if (identity) return;

  Parameters next = params;
  next.theta[0] = 0.0;
  for (int s = 1; s < S; ++s) next.theta[s] = std::log(p[order[s]] / p[order[0]]);
  if (!params.mu.empty())
    for (int s = 0; s < S; ++s) next.mu[s] = params.mu[order[s]];
  if (static_cast<int>(params.sigma2.size()) == S)
    for (int s = 0; s < S; ++s) next.sigma2[s] = params.sigma2[order[s]];
  for (int item = 0; item < spec.n_items(); ++item) {
    const int K = spec.cardinalities[item];
    for (int s = 0; s < S; ++s) {
      for (int k = 0; k < K; ++k) {
        next.beta0[item][static_cast<std::size_t>(s) * K + k] =
            params.beta0[item][static_cast<std::size_t>(order[s]) * K + k];
        next.beta[item][static_cast<std::size_t>(s) * K + k] =
            params.beta[item][static_cast<std::size_t>(order[s]) * K + k];
      }
    }
  }
  params = std::move(next);

  Eigen::MatrixXd permuted(posteriors.rows(), S);
  for (int s = 0; s < S; ++s) permuted.col(s) = posteriors.col(order[s]);
  posteriors = std::move(permuted);
}

namespace {

struct Chain {
  bool valid = false;
  std::string failure;
  Parameters params;
  Eigen::MatrixXd post;
  double loglik = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> flags;
};

Chain run_chain(const ModelSpec& spec, const Dataset& data, const FitConfig& config, int start) {
  Chain c;
  try {
    Rng rng(config.rng_seed, static_cast<std::uint64_t>(start));
    Parameters params = initialize(spec, data, rng);
    auto pass = detail::posterior_pass(params, spec, data);
    double ll = pass.loglik;
    const double proportion_floor = 1.0 / (10.0 * data.n);
    for (int iter = 1; iter <= config.max_em_iterations; ++iter) {
      params.theta = m_step_mixing(pass.posteriors);
      const std::vector<double> props = params.class_proportions();
      for (int s = 0; s < spec.n_classes; ++s) {
        if (props[s] < proportion_floor)
          throw NumericalError("class " + std::to_string(s) +
                               " collapsed (proportion below 1/(10n))");
      }
      if (spec.models_z())
        std::tie(params.mu, params.sigma2) =
            m_step_gaussian(pass.posteriors, data.z, spec.variance_mode);
      MeasurementStep ms = m_step_measurement(pass.posteriors, spec, data, config, &params);
      params.beta0 = std::move(ms.beta0);
      params.beta = std::move(ms.beta);
      // Flags describe the returned parameters, so only the last M-step's
      // warnings are kept; transient truncation early in EM is routine.
      c.flags = std::move(ms.flags);

      pass = detail::posterior_pass(params, spec, data);
      c.iterations = iter;
      const double rel = std::fabs(pass.loglik - ll) / (1.0 + std::fabs(ll));
      ll = pass.loglik;
      if (rel < config.em_tolerance) {
        c.converged = true;
        break;
      }
    }
    c.params = std::move(params);
    c.post = std::move(pass.posteriors);
    c.loglik = ll;
    c.valid = true;
  } catch (const NumericalError& e) {
    c.failure = e.what();
  } catch (const EstimationError& e) {
    c.failure = e.what();
  }
  return c;
}

}  // namespace

FitResult fit(const ModelSpec& spec, const Dataset& data, const FitConfig& config) {
  config.validate();
  spec.validate();
  data.validate();
  spec.validate_against(data);

  // With one class the start is deterministic, so extra chains are identical.
  const int n_starts = spec.n_classes == 1 ? 1 : config.n_starts;
  std::vector<Chain> chains(n_starts);
  const int n_threads =
      config.parallel_starts ? std::min(detail::default_thread_count(), n_starts) : 1;
  detail::parallel_for(
      n_starts, [&](int i) { chains[i] = run_chain(spec, data, config, i); }, n_threads);

  int best = -1;
  for (int i = 0; i < n_starts; ++i) {
    if (chains[i].valid && (best < 0 || chains[i].loglik > chains[best].loglik)) best = i;
  }
  if (best < 0) {
    std::ostringstream msg;
    msg << "all " << n_starts << " starts degenerated:";
    for (int i = 0; i < n_starts; ++i) msg << "\n  start " << i << ": " << chains[i].failure;
    throw EstimationError(msg.str());
  }

  Chain& win = chains[best];
  canonicalize_class_order(win.params, win.post, spec);

  FitResult result;
  result.params = std::move(win.params);
  result.spec = spec;
  result.loglik = win.loglik;
  result.posteriors = std::move(win.post);
  result.n_params = n_free_params(spec);
  result.converged = win.converged;
  result.n_iterations = win.iterations;
  result.start_index = best;
  result.flags = dedup_flags(std::move(win.flags));
  if (data.n <= result.n_params)
    result.flags.push_back("sample size does not exceed the free-parameter count");
  return result;
}

}  // namespace lcmix
