#ifndef ECOSHIFT_COMPLETION_HPP
#define ECOSHIFT_COMPLETION_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ecoshift/surface.hpp"
#include "ecoshift/types.hpp"

namespace ecoshift {

struct CompletionHyperparams {
  int latent_dim = 8;
  double l2 = 1e-3;
  double tol = 1e-6;  // relative loss change
  int max_epochs = 2000;
  double learning_rate = 0.05;
  std::uint32_t seed = 42;
};

/// Biased low-rank factorization of log-runtime: rows are applications,
/// columns are cap-pair configurations (grid points, row-major).
///   log T[a][j] ~ mu + app_bias[a] + config_bias[j] + p_a . q_j
/// Biases are unregularized; factors carry the l2 penalty.
struct CompletionModel {
  CapGrid grid;
  int latent_dim = 0;
  double l2 = 0.0;
  double global_bias = 0.0;
  std::vector<double> config_bias;     // num_points
  std::vector<double> config_factors;  // num_points x d
  std::vector<double> app_bias;        // training apps
  std::vector<double> app_factors;     // training apps x d
  std::vector<double> loss_history;    // per accepted epoch, non-increasing
};

/// Cap pairs to probe online for an unseen application.
struct SamplingPlan {
  std::vector<CapPair> probes;
};

/// Baseline, the four grid corners, and the grid center; deduplicated. Padded
/// with further grid points if that collapses below three probes.
inline SamplingPlan default_sampling_plan(const CapGrid& grid, const CapPair& baseline) {
  if (!grid.contains(baseline)) throw OffGridError("baseline not on grid");
  if (grid.num_points() < 3)
    throw InvalidParamsError("grid too small for a sampling plan");
  const auto& cl = grid.cpu_levels();
  const auto& gl = grid.gpu_levels();
  std::vector<CapPair> raw{
      baseline,
      {cl.front(), gl.front()},
      {cl.front(), gl.back()},
      {cl.back(), gl.front()},
      {cl.back(), gl.back()},
      {cl[cl.size() / 2], gl[gl.size() / 2]},
  };
  SamplingPlan plan;
  auto add = [&](const CapPair& p) {
    for (const auto& q : plan.probes)
      if (q == p) return;
    plan.probes.push_back(p);
  };
  for (const auto& p : raw) add(p);
  for (std::size_t i = 0; plan.probes.size() < 3 && i < grid.num_points(); ++i)
    add(grid.point(i));
  return plan;
}

namespace detail {

struct Observation {
  std::size_t app;
  std::size_t config;
  double log_runtime;
};

inline double mf_loss(const std::vector<Observation>& obs, const CompletionModel& m) {
  const int d = m.latent_dim;
  double sq = 0.0;
  for (const auto& o : obs) {
    double pred = m.global_bias + m.app_bias[o.app] + m.config_bias[o.config];
    for (int k = 0; k < d; ++k)
      pred += m.app_factors[o.app * d + k] * m.config_factors[o.config * d + k];
    double r = pred - o.log_runtime;
    sq += r * r;
  }
  double reg = 0.0;
  for (double v : m.app_factors) reg += v * v;
  for (double v : m.config_factors) reg += v * v;
  return (sq + m.l2 * reg) / static_cast<double>(obs.size());
}

/// Solve (A + ridge*I) x = b in place, A symmetric positive semidefinite,
/// via Gaussian elimination with partial pivoting. Small systems only.
inline std::vector<double> solve_ridge(std::vector<double> a, std::vector<double> b,
                                       std::size_t n, double ridge) {
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] += ridge;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    double diag = a[col * n + col];
    if (std::abs(diag) < 1e-15)
      throw InsufficientDataError("singular fold-in system");
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r * n + col] / diag;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * x[c];
    x[i] = s / a[i * n + i];
  }
  return x;
}

}  // namespace detail

/// Fit the completion model on known log-runtime entries by full-batch
/// gradient descent with a backtracking step (halve the step when the loss
/// would rise), so the recorded loss history is non-increasing. Deterministic
/// given the seed.
inline CompletionModel fit(std::span<const PerformanceSurface> training_surfaces,
                           const CompletionHyperparams& hp = {}) {
  if (hp.latent_dim < 1) throw InvalidParamsError("latent_dim must be >= 1");
  if (training_surfaces.size() < 2)
    throw InsufficientDataError("fit needs at least two training surfaces");
  const CapGrid& grid = training_surfaces.front().grid();
  for (const auto& s : training_surfaces)
    if (!(s.grid() == grid))
      throw GridMismatchError("training surfaces must share one grid");

  std::vector<detail::Observation> obs;
  for (std::size_t a = 0; a < training_surfaces.size(); ++a) {
    const auto& s = training_surfaces[a];
    std::size_t known_before = obs.size();
    for (std::size_t j = 0; j < grid.num_points(); ++j)
      if (s.known_mask()[j])
        obs.push_back({a, j, std::log(s.runtimes()[j])});
    if (obs.size() == known_before)
      throw InsufficientDataError("a training surface has no known entries");
  }

  const int d = hp.latent_dim;
  const std::size_t na = training_surfaces.size();
  const std::size_t nc = grid.num_points();

  CompletionModel m{grid, d, hp.l2, 0.0,
                    std::vector<double>(nc, 0.0),
                    std::vector<double>(nc * static_cast<std::size_t>(d)),
                    std::vector<double>(na, 0.0),
                    std::vector<double>(na * static_cast<std::size_t>(d)),
                    {}};
  std::mt19937 rng(hp.seed);
  std::normal_distribution<double> init(0.0, 0.01);
  for (auto& v : m.app_factors) v = init(rng);
  for (auto& v : m.config_factors) v = init(rng);
  double mean = 0.0;
  for (const auto& o : obs) mean += o.log_runtime;
  m.global_bias = mean / static_cast<double>(obs.size());

  const double inv_n = 1.0 / static_cast<double>(obs.size());
  double eta = hp.learning_rate;
  double loss = detail::mf_loss(obs, m);
  m.loss_history.push_back(loss);

  std::vector<double> g_mu(1), g_ab(na), g_cb(nc), g_af(na * d), g_cf(nc * d);
  for (int epoch = 0; epoch < hp.max_epochs; ++epoch) {
    std::fill(g_mu.begin(), g_mu.end(), 0.0);
    std::fill(g_ab.begin(), g_ab.end(), 0.0);
    std::fill(g_cb.begin(), g_cb.end(), 0.0);
    std::fill(g_af.begin(), g_af.end(), 0.0);
    std::fill(g_cf.begin(), g_cf.end(), 0.0);
    for (const auto& o : obs) {
      double pred = m.global_bias + m.app_bias[o.app] + m.config_bias[o.config];
      const double* p = &m.app_factors[o.app * d];
      const double* q = &m.config_factors[o.config * d];
      for (int k = 0; k < d; ++k) pred += p[k] * q[k];
      double r = 2.0 * (pred - o.log_runtime) * inv_n;
      g_mu[0] += r;
      g_ab[o.app] += r;
      g_cb[o.config] += r;
      for (int k = 0; k < d; ++k) {
        g_af[o.app * d + k] += r * q[k];
        g_cf[o.config * d + k] += r * p[k];
      }
    }
    double reg = 2.0 * m.l2 * inv_n;
    for (std::size_t i = 0; i < g_af.size(); ++i) g_af[i] += reg * m.app_factors[i];
    for (std::size_t i = 0; i < g_cf.size(); ++i) g_cf[i] += reg * m.config_factors[i];

    CompletionModel trial = m;
    double new_loss = loss;
    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries) {
      trial.global_bias = m.global_bias - eta * g_mu[0];
      for (std::size_t i = 0; i < na; ++i) trial.app_bias[i] = m.app_bias[i] - eta * g_ab[i];
      for (std::size_t i = 0; i < nc; ++i) trial.config_bias[i] = m.config_bias[i] - eta * g_cb[i];
      for (std::size_t i = 0; i < g_af.size(); ++i)
        trial.app_factors[i] = m.app_factors[i] - eta * g_af[i];
      for (std::size_t i = 0; i < g_cf.size(); ++i)
        trial.config_factors[i] = m.config_factors[i] - eta * g_cf[i];
      new_loss = detail::mf_loss(obs, trial);
      if (new_loss <= loss) {
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) break;  // step underflow, converged
    trial.loss_history = std::move(m.loss_history);
    m = std::move(trial);
    m.loss_history.push_back(new_loss);
    eta *= 1.05;
    double rel = loss > 0.0 ? (loss - new_loss) / loss : 0.0;
    loss = new_loss;
    if (loss < 1e-24 || (rel >= 0.0 && rel < hp.tol && epoch > 0)) break;
  }
  return m;
}

/// Runtime prediction for a training-set application (by row index).
inline double predict_runtime(const CompletionModel& m, std::size_t app_index,
                              const CapPair& caps) {
  std::size_t j = m.grid.index_of(caps);
  double pred = m.global_bias + m.app_bias.at(app_index) + m.config_bias[j];
  const int d = m.latent_dim;
  for (int k = 0; k < d; ++k)
    pred += m.app_factors[app_index * d + k] * m.config_factors[j * d + k];
  return std::exp(pred);
}

/// Fold a new application into the model from a few observed (caps, runtime)
/// samples (ridge least squares over the app bias + factors), then predict
/// the full surface. Sampled points pass through exactly.
inline PerformanceSurface predict_surface(
    const CompletionModel& model,
    std::span<const std::pair<CapPair, double>> app_samples, const CapGrid& grid) {
  if (!(grid == model.grid))
    throw GridMismatchError("prediction grid differs from model grid");
  if (app_samples.empty())
    throw InsufficientDataError("predict_surface needs at least one sample");

  const int d = model.latent_dim;
  const std::size_t n = static_cast<std::size_t>(d) + 1;  // [bias, factors...]
  std::vector<double> ata(n * n, 0.0), atb(n, 0.0), row(n);
  for (const auto& [caps, runtime] : app_samples) {
    std::size_t j = grid.index_of(caps);  // throws OffGridError
    if (!(runtime > 0.0)) throw InvalidParamsError("sample runtimes must be positive");
    row[0] = 1.0;
    for (int k = 0; k < d; ++k) row[1 + k] = model.config_factors[j * d + k];
    double t = std::log(runtime) - model.global_bias - model.config_bias[j];
    for (std::size_t a = 0; a < n; ++a) {
      atb[a] += row[a] * t;
      for (std::size_t b = 0; b < n; ++b) ata[a * n + b] += row[a] * row[b];
    }
  }
  std::vector<double> w =
      detail::solve_ridge(std::move(ata), std::move(atb), n, std::max(model.l2, 1e-8));

  std::vector<double> runtimes(grid.num_points());
  for (std::size_t j = 0; j < grid.num_points(); ++j) {
    double pred = model.global_bias + model.config_bias[j] + w[0];
    for (int k = 0; k < d; ++k) pred += w[1 + k] * model.config_factors[j * d + k];
    runtimes[j] = std::exp(pred);
  }
  for (const auto& [caps, runtime] : app_samples)
    runtimes[grid.index_of(caps)] = runtime;
  return PerformanceSurface(grid, std::move(runtimes));
}

/// Mean over grid points of 1 - |p_hat - p| / p, where p is the true and
/// p_hat the predicted baseline-relative speedup. Points unknown in either
/// surface are skipped.
inline double prediction_accuracy(const PerformanceSurface& true_surface,
                                  const PerformanceSurface& predicted_surface,
                                  const CapPair& baseline) {
  if (!(true_surface.grid() == predicted_surface.grid()))
    throw GridMismatchError("accuracy requires matching grids");
  auto t_base = true_surface.runtime_at(baseline);
  auto p_base = predicted_surface.runtime_at(baseline);
  if (!t_base || !p_base)
    throw UnknownRuntimeError("baseline runtime required in both surfaces");

  const auto& grid = true_surface.grid();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < grid.num_points(); ++j) {
    if (!true_surface.known_mask()[j] || !predicted_surface.known_mask()[j]) continue;
    double p = *t_base / true_surface.runtimes()[j];
    double p_hat = *p_base / predicted_surface.runtimes()[j];
    sum += 1.0 - std::abs(p_hat - p) / p;
    ++count;
  }
  if (count == 0) throw InsufficientDataError("no jointly known points");
  return sum / static_cast<double>(count);
}

}  // namespace ecoshift

#endif  // ECOSHIFT_COMPLETION_HPP
