#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "mdsipm/errors.hpp"

namespace mdsipm {

/// Algorithm parameters. Defaults follow the filter line-search IPM literature.
struct SolverOptions {
  double tol = 1e-6;
  double mu0 = 0.1;
  std::size_t max_iter = 500;

  // barrier homotopy
  double tau_min = 0.99;
  double kappa_mu = 0.2;
  double theta_mu = 1.5;
  double kappa_epsilon = 10.0;

  // filter line search
  double gamma_theta = 1e-5;
  double gamma_phi = 1e-5;
  double s_theta = 1.1;
  double s_phi = 2.3;
  double eta_phi = 1e-4;
  double delta_switch = 1.0;
  double kappa_Sigma = 1e10;
  double alpha_min_frac = 1e-14;

  // inertia correction
  double delta_w0 = 1e-4;
  double delta_w_min = 1e-20;
  double delta_w_max = 1e40;
  double kappa_w_plus = 8.0;
  double kappa_w_plus_first = 100.0;
  double kappa_w_minus = 1.0 / 3.0;
  double delta_c_bar = 1e-8;
  double kappa_c = 0.25;

  // initial point
  double kappa_1 = 1e-2;
  double kappa_2 = 1e-2;

  // error scaling
  double s_max = 100.0;

  bool enable_timing = true;
  std::string dump_kkt_dir;  // empty: no dumps

  /// Throws ConfigError on an out-of-range parameter.
  void validate() const {
    const auto positive = [](double v, const char* name) {
      if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(tol, "tol");
    positive(mu0, "mu0");
    positive(kappa_mu, "kappa_mu");
    positive(gamma_theta, "gamma_theta");
    positive(gamma_phi, "gamma_phi");
    positive(eta_phi, "eta_phi");
    positive(kappa_Sigma, "kappa_Sigma");
    positive(delta_w0, "delta_w0");
    positive(delta_w_min, "delta_w_min");
    positive(delta_w_max, "delta_w_max");
    positive(delta_c_bar, "delta_c_bar");
    positive(kappa_1, "kappa_1");
    positive(kappa_2, "kappa_2");
    positive(s_max, "s_max");
    if (!(tau_min > 0.0 && tau_min < 1.0)) throw ConfigError("tau_min must lie in (0,1)");
    if (!(kappa_mu < 1.0)) throw ConfigError("kappa_mu must be below 1");
    if (!(theta_mu > 1.0 && theta_mu < 2.0)) throw ConfigError("theta_mu must lie in (1,2)");
    if (!(kappa_w_plus > 1.0 && kappa_w_plus_first > 1.0))
      throw ConfigError("regularization growth factors must exceed 1");
    if (max_iter == 0) throw ConfigError("max_iter must be positive");
  }
};

enum class SolveStatus { Optimal, MaxIter, RestorationNeeded, SingularSystem, EvalFailure };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::MaxIter: return "MaxIter";
    case SolveStatus::RestorationNeeded: return "RestorationNeeded";
    case SolveStatus::SingularSystem: return "SingularSystem";
    case SolveStatus::EvalFailure: return "EvalFailure";
  }
  return "Unknown";
}

}  // namespace mdsipm
