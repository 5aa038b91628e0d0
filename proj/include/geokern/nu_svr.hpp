#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "geokern/common.hpp"
#include "geokern/corpus.hpp"
#include "geokern/string_kernel.hpp"

namespace geokern {

struct NuSvrParams {
  double c = 10.0;    // regularization; the tuned value for this task
  double nu = 0.5;    // target support-vector fraction, in (0, 1]
  double tol = 1e-3;  // KKT stopping tolerance
  std::size_t max_iter = 0;  // 0 = automatic (100 * training size)

  void validate() const {
    if (!(c > 0.0)) throw DataError("nu-SVR: C must be positive");
    if (!(nu > 0.0) || nu > 1.0) throw DataError("nu-SVR: nu must be in (0, 1]");
    if (!(tol > 0.0)) throw DataError("nu-SVR: tol must be positive");
  }

  bool operator==(const NuSvrParams&) const = default;
};

// One trained coordinate regressor in dual form. beta[i] = alpha_i -
// alpha*_i; prediction is sum_i beta[i] * K(query, x_i) + bias.
struct NuSvrModel {
  std::vector<double> beta;
  double bias = 0.0;
  double epsilon_hat = 0.0;  // tube half-width recovered from the KKT system
  std::vector<std::size_t> support_indices;  // beta[i] != 0
  NuSvrParams params;

  // solver diagnostics
  std::size_t iterations = 0;
  double kkt_violation = 0.0;
  double objective = 0.0;
};

inline double dual_objective(const KernelMatrix& K, std::span<const double> y,
                             std::span<const double> beta) {
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (beta[i] == 0.0) continue;
    double kb = 0.0;
    const auto row = K.values.row(i);
    for (std::size_t j = 0; j < beta.size(); ++j) kb += row[j] * beta[j];
    quad += beta[i] * kb;
    lin += beta[i] * y[i];
  }
  return 0.5 * quad - lin;
}

namespace detail {

// SMO working state for the nu-SVR dual
//
//   min 1/2 b'Kb - b'y   s.t.  sum b = 0, |b_i| <= C/l, sum |b_i| <= C*nu
//
// expressed over 2l box variables a = (alpha, alpha*) with group labels
// +1 / -1 and one equality constraint per group (each group's mass stays at
// C*nu/2, which realizes the L1 budget). Working pairs are chosen inside a
// single group, so both equality constraints survive every update.
class NuSvrSolver {
 public:
  NuSvrSolver(const KernelMatrix& K, std::span<const double> targets,
              const NuSvrParams& params)
      : K_(K), params_(params), l_(targets.size()) {
    upper_ = params.c / static_cast<double>(l_);
    target_shift_ = 0.0;
    for (double t : targets) target_shift_ += t;
    target_shift_ /= static_cast<double>(l_);

    a_.assign(2 * l_, 0.0);
    double remaining = 0.5 * params.c * params.nu;
    for (std::size_t i = 0; i < l_; ++i) {
      const double v = std::min(remaining, upper_);
      a_[i] = a_[i + l_] = v;
      remaining -= v;
    }

    // beta starts at zero, so G is just the linear term of the
    // (shift-invariant) objective evaluated with centered targets
    g_.resize(2 * l_);
    for (std::size_t i = 0; i < l_; ++i) {
      const double tc = targets[i] - target_shift_;
      g_[i] = -tc;
      g_[i + l_] = tc;
    }
  }

  NuSvrModel solve() {
    const std::size_t max_iter =
        params_.max_iter > 0 ? params_.max_iter : 100 * l_;
    std::size_t iter = 0;
    double violation = measure_and_select();
    while (violation >= params_.tol) {
      if (iter >= max_iter) {
        throw ConvergenceError(
            "nu-SVR did not converge in " + std::to_string(max_iter) +
            " iterations (KKT violation " + format_shortest(violation) +
            ", tol " + format_shortest(params_.tol) + ")");
      }
      update_pair(sel_up_, sel_down_);
      ++iter;
      violation = measure_and_select();
    }
    return finish(iter, violation);
  }

 private:
  static constexpr double kTau = 1e-12;

  double kernel(std::size_t i, std::size_t j) const { return K_.values.at(i, j); }

  // Maximal violating pair inside each group; keeps the pair of the worse
  // group. Ties resolve to the lowest index (strict comparisons).
  double measure_and_select() {
    double worst = -std::numeric_limits<double>::infinity();
    for (int group = 0; group < 2; ++group) {
      const std::size_t begin = group == 0 ? 0 : l_;
      const std::size_t end = begin + l_;
      double up_score = -std::numeric_limits<double>::infinity();
      double down_score = -std::numeric_limits<double>::infinity();
      std::size_t up_idx = 2 * l_, down_idx = 2 * l_;
      for (std::size_t k = begin; k < end; ++k) {
        if (a_[k] < upper_ && -g_[k] > up_score) {
          up_score = -g_[k];
          up_idx = k;
        }
        if (a_[k] > 0.0 && g_[k] > down_score) {
          down_score = g_[k];
          down_idx = k;
        }
      }
      if (up_idx == 2 * l_ || down_idx == 2 * l_) continue;
      const double viol = up_score + down_score;
      if (viol > worst) {
        worst = viol;
        sel_up_ = up_idx;
        sel_down_ = down_idx;
      }
    }
    return worst;
  }

  void update_pair(std::size_t i, std::size_t j) {
    const std::size_t si = i % l_, sj = j % l_;
    double quad = kernel(si, si) + kernel(sj, sj) - 2.0 * kernel(si, sj);
    if (quad <= 0.0) quad = kTau;
    const double step = (g_[j] - g_[i]) / quad;

    const double sum = a_[i] + a_[j];
    const double lo = std::max(0.0, sum - upper_);
    const double hi = std::min(upper_, sum);
    const double ai_new = std::clamp(a_[i] + step, lo, hi);
    const double aj_new = sum - ai_new;

    const double sign = i < l_ ? 1.0 : -1.0;  // both in the same group
    const double di = sign * (ai_new - a_[i]);
    const double dj = sign * (aj_new - a_[j]);
    a_[i] = ai_new;
    a_[j] = aj_new;

    const auto row_i = K_.values.row(si);
    const auto row_j = K_.values.row(sj);
    for (std::size_t s = 0; s < l_; ++s) {
      const double d = row_i[s] * di + row_j[s] * dj;
      g_[s] += d;
      g_[s + l_] -= d;
    }
  }

  NuSvrModel finish(std::size_t iterations, double violation) const {
    // Per-group KKT multiplier estimates: average gradient over free
    // vectors, else the midpoint of the feasible interval.
    double r[2];
    for (int group = 0; group < 2; ++group) {
      const std::size_t begin = group == 0 ? 0 : l_;
      double free_sum = 0.0;
      std::size_t free_count = 0;
      double ub = std::numeric_limits<double>::infinity();
      double lb = -std::numeric_limits<double>::infinity();
      for (std::size_t k = begin; k < begin + l_; ++k) {
        if (a_[k] >= upper_) {
          lb = std::max(lb, g_[k]);
        } else if (a_[k] <= 0.0) {
          ub = std::min(ub, g_[k]);
        } else {
          free_sum += g_[k];
          ++free_count;
        }
      }
      r[group] = free_count > 0 ? free_sum / static_cast<double>(free_count)
                                : 0.5 * (ub + lb);
    }

    NuSvrModel model;
    model.params = params_;
    model.bias = -0.5 * (r[0] - r[1]) + target_shift_;
    model.epsilon_hat = std::max(0.0, -0.5 * (r[0] + r[1]));
    model.beta.resize(l_);
    for (std::size_t i = 0; i < l_; ++i) {
      model.beta[i] = a_[i] - a_[i + l_];
      if (model.beta[i] != 0.0) model.support_indices.push_back(i);
    }
    model.iterations = iterations;
    model.kkt_violation = violation;
    return model;
  }

  const KernelMatrix& K_;
  NuSvrParams params_;
  std::size_t l_;
  double upper_ = 0.0;
  double target_shift_ = 0.0;
  std::vector<double> a_;
  std::vector<double> g_;
  std::size_t sel_up_ = 0, sel_down_ = 0;
};

inline void check_square_symmetric(const KernelMatrix& K, std::size_t targets) {
  if (K.rows() == 0) throw DataError("nu-SVR: empty kernel matrix");
  if (K.rows() != K.cols())
    throw DataError("nu-SVR: kernel matrix is not square (" +
                    std::to_string(K.rows()) + "x" + std::to_string(K.cols()) +
                    ")");
  if (targets != K.rows())
    throw DataError("nu-SVR: " + std::to_string(targets) + " targets for " +
                    std::to_string(K.rows()) + " kernel rows");
  for (std::size_t i = 0; i < K.rows(); ++i)
    for (std::size_t j = i + 1; j < K.cols(); ++j)
      if (std::abs(K.at(i, j) - K.at(j, i)) > 1e-10)
        throw DataError("nu-SVR: kernel matrix is not symmetric");
}

}  // namespace detail

// Trains one coordinate regressor on a precomputed kernel. Kernel values are
// only ever read from K, so any symmetric PSD matrix source plugs in.
inline NuSvrModel train(const KernelMatrix& K, std::span<const double> y,
                        const NuSvrParams& params = {}) {
  params.validate();
  detail::check_square_symmetric(K, y.size());
  detail::NuSvrSolver solver(K, y, params);
  NuSvrModel model = solver.solve();
  model.objective = dual_objective(K, y, model.beta);
  return model;
}

// Kernel expansion over the training columns of K_query.
inline std::vector<double> predict(const NuSvrModel& model,
                                   const KernelMatrix& K_query) {
  if (K_query.cols() != model.beta.size())
    throw DataError("nu-SVR predict: " + std::to_string(K_query.cols()) +
                    " kernel columns for " + std::to_string(model.beta.size()) +
                    " training samples");
  std::vector<double> out(K_query.rows());
  for (std::size_t q = 0; q < K_query.rows(); ++q) {
    double acc = 0.0;
    const auto row = K_query.values.row(q);
    for (std::size_t i : model.support_indices) acc += model.beta[i] * row[i];
    out[q] = acc + model.bias;
  }
  return out;
}

// Independent latitude and longitude regressors sharing one Gram matrix.
struct DualRegressor {
  NuSvrModel lat_model;
  NuSvrModel lon_model;
  KernelConfig kernel;
};

inline DualRegressor train_dual(const KernelMatrix& K,
                                std::span<const GeoPoint> locations,
                                const NuSvrParams& params = {},
                                unsigned threads = 1) {
  std::vector<double> lat(locations.size()), lon(locations.size());
  for (std::size_t i = 0; i < locations.size(); ++i) {
    lat[i] = locations[i].lat;
    lon[i] = locations[i].lon;
  }
  DualRegressor reg;
  reg.kernel = K.config;
  if (threads > 1) {
    std::exception_ptr fail;
    std::thread worker([&] {
      try {
        reg.lat_model = train(K, lat, params);
      } catch (...) {
        fail = std::current_exception();
      }
    });
    reg.lon_model = train(K, lon, params);
    worker.join();
    if (fail) std::rethrow_exception(fail);
  } else {
    reg.lat_model = train(K, lat, params);
    reg.lon_model = train(K, lon, params);
  }
  return reg;
}

inline std::vector<GeoPoint> predict_dual(const DualRegressor& reg,
                                          const KernelMatrix& K_query) {
  const std::vector<double> lat = predict(reg.lat_model, K_query);
  const std::vector<double> lon = predict(reg.lon_model, K_query);
  std::vector<GeoPoint> out(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) out[i] = {lat[i], lon[i]};
  return out;
}

}  // namespace geokern
