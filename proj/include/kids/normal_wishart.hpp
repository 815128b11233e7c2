#pragma once

// Normal-Wishart conjugate model for a multivariate Gaussian with unknown mean
// and precision, and its multivariate Student-t posterior predictive.
//
// Convention: `scatter` is the inverse-scale matrix of the Wishart, the one that
// accumulates within-window scatter. The precision has E[lambda] = dof *
// scatter^{-1} under this convention, and the predictive is
//   t_{dof - D + 1}(mean, scatter (kappa + 1) / (kappa (dof - D + 1))).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "kids/errors.hpp"

namespace kids::bocpd {

template <int Dim>
using Vector = Eigen::Matrix<double, Dim, 1>;

template <int Dim>
using Matrix = Eigen::Matrix<double, Dim, Dim>;

template <int Dim>
struct NormalWishart {
  Vector<Dim> mean = Vector<Dim>::Zero();
  double kappa = 1.0;
  double dof = Dim + 1.0;
  Matrix<Dim> scatter = Matrix<Dim>::Identity();

  /// Degrees of freedom of the posterior predictive Student-t.
  double predictive_dof() const { return dof - Dim + 1.0; }

  void validate() const {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
      throw ConfigError("Normal-Wishart: kappa must be positive, got " + std::to_string(kappa));
    }
    if (!(dof > Dim) || !std::isfinite(dof)) {
      throw ConfigError("Normal-Wishart: dof must exceed " + std::to_string(Dim) + ", got " +
                        std::to_string(dof));
    }
    if (!mean.allFinite() || !scatter.allFinite()) {
      throw ConfigError("Normal-Wishart: non-finite mean or scatter");
    }
    if (!scatter.isApprox(scatter.transpose(), 1e-12)) {
      throw ConfigError("Normal-Wishart: scatter matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix<Dim>> eig(scatter, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
      throw ConfigError("Normal-Wishart: scatter matrix is not positive semidefinite");
    }
  }
};

using NormalWishart3 = NormalWishart<3>;

enum class PriorKind { Informative, NonInformative };

inline const char* to_string(PriorKind kind) {
  return kind == PriorKind::Informative ? "informative" : "non-informative";
}

inline constexpr double kDefaultNonInformativeEpsilon = 1e-8;

/// Prior for the constrained ADR shell: near-zero mean, kappa 1/20, dof 4,
/// scatter 5 I.
inline NormalWishart3 informative_prior() {
  NormalWishart3 prior;
  prior.mean = Vector<3>::Constant(1e-4);
  prior.kappa = 1.0 / 20.0;
  prior.dof = 4.0;
  prior.scatter = 5.0 * Matrix<3>::Identity();
  return prior;
}

/// Near-flat prior for unconstrained embeddings. A singular scatter would make
/// the first predictive degenerate, so it is regularized to epsilon * I.
inline NormalWishart3 non_informative_prior(double epsilon = kDefaultNonInformativeEpsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("non-informative prior: epsilon must be positive");
  NormalWishart3 prior;
  prior.mean = Vector<3>::Constant(1e-4);
  prior.kappa = 1e-4;
  prior.dof = 4.0;
  prior.scatter = epsilon * Matrix<3>::Identity();
  return prior;
}

inline NormalWishart3 make_prior(PriorKind kind, double epsilon = kDefaultNonInformativeEpsilon) {
  return kind == PriorKind::Informative ? informative_prior() : non_informative_prior(epsilon);
}

/// Batch posterior after observing `window`:
///   kappa' = kappa + n, dof' = dof + n,
///   mean'  = (kappa mean + n xbar) / (kappa + n),
///   S'     = S + sum (x - xbar)(x - xbar)^T + kappa n / (kappa + n) (mean - xbar)(mean - xbar)^T.
template <int Dim>
NormalWishart<Dim> posterior_params(const NormalWishart<Dim>& prior,
                                    std::span<const Vector<Dim>> window) {
  if (window.empty()) return prior;
  const double n = static_cast<double>(window.size());
  Vector<Dim> xbar = Vector<Dim>::Zero();
  for (const auto& x : window) xbar += x;
  xbar /= n;
  Matrix<Dim> within = Matrix<Dim>::Zero();
  for (const auto& x : window) {
    const Vector<Dim> d = x - xbar;
    within.noalias() += d * d.transpose();
  }
  const Vector<Dim> shift = prior.mean - xbar;
  NormalWishart<Dim> post;
  post.kappa = prior.kappa + n;
  post.dof = prior.dof + n;
  post.mean = (prior.kappa * prior.mean + n * xbar) / post.kappa;
  post.scatter = prior.scatter + within + (prior.kappa * n / post.kappa) * shift * shift.transpose();
  return post;
}

/// Rank-one update with a single observation. Applying it to each element of
/// a window in turn reproduces posterior_params on that window.
template <int Dim>
NormalWishart<Dim> absorb(const NormalWishart<Dim>& params, const Vector<Dim>& x) {
  const Vector<Dim> d = x - params.mean;
  NormalWishart<Dim> next;
  next.kappa = params.kappa + 1.0;
  next.dof = params.dof + 1.0;
  next.mean = params.mean + d / next.kappa;
  next.scatter = params.scatter + (params.kappa / next.kappa) * d * d.transpose();
  return next;
}

template <int Dim>
struct StudentT {
  Vector<Dim> location;
  Matrix<Dim> scale;
  double dof = 1.0;
};

template <int Dim>
StudentT<Dim> predictive_distribution(const NormalWishart<Dim>& params) {
  const double dof = params.predictive_dof();
  return {params.mean, params.scatter * ((params.kappa + 1.0) / (params.kappa * dof)), dof};
}

/// log t_dof(x | location, scale) through a Cholesky factor of the scale.
template <int Dim>
double log_density(const StudentT<Dim>& dist, const Vector<Dim>& x) {
  const Eigen::LLT<Matrix<Dim>> chol(dist.scale);
  if (chol.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "predictive scale matrix is not positive definite (trace " << dist.scale.trace() << ")";
    throw NumericalError(msg.str());
  }
  const Matrix<Dim> lower = chol.matrixL();
  double log_det = 0.0;
  for (int i = 0; i < Dim; ++i) log_det += 2.0 * std::log(lower(i, i));
  const Vector<Dim> z = chol.matrixL().solve(x - dist.location);
  const double maha = z.squaredNorm();
  const double nu = dist.dof;
  constexpr double d = Dim;
  return std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) - 0.5 * d * std::log(nu * std::numbers::pi) -
         0.5 * log_det - 0.5 * (nu + d) * std::log1p(maha / nu);
}

template <int Dim>
double log_predictive(const Vector<Dim>& o, const NormalWishart<Dim>& params) {
  return log_density(predictive_distribution(params), o);
}

}  // namespace kids::bocpd
