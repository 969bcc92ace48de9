#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string_view>
#include <vector>

#include "mdsipm/ipm/options.hpp"

namespace mdsipm {

struct FilterEntry {
  double theta = 0.0;  // constraint violation
  double phi = 0.0;    // barrier objective

  bool operator==(const FilterEntry&) const = default;
};

/**
 * Set of (theta, phi) pairs that a trial point must beat in at least one
 * measure. No entry dominates another.
 */
class Filter {
 public:
  /// Empties the filter and installs the upper bound on theta.
  void reset(double theta_max) {
    entries_.clear();
    entries_.push_back({theta_max, -std::numeric_limits<double>::infinity()});
  }

  /// True if (theta, phi) is not dominated: theta < theta_j or phi < phi_j for every entry.
  bool acceptable(double theta, double phi) const {
    return std::all_of(entries_.begin(), entries_.end(), [&](const FilterEntry& e) {
      return theta < e.theta || phi < e.phi;
    });
  }

  void add(double theta, double phi) {
    std::erase_if(entries_, [&](const FilterEntry& e) { return e.theta >= theta && e.phi >= phi; });
    entries_.push_back({theta, phi});
  }

  const std::vector<FilterEntry>& entries() const noexcept { return entries_; }

 private:
  std::vector<FilterEntry> entries_;
};

enum class AcceptKind { Rejected, Armijo, SufficientDecrease, TinyStep };

inline std::string_view to_string(AcceptKind k) {
  switch (k) {
    case AcceptKind::Rejected: return "rejected";
    case AcceptKind::Armijo: return "armijo";
    case AcceptKind::SufficientDecrease: return "decrease";
    case AcceptKind::TinyStep: return "tiny";
  }
  return "unknown";
}

/// Scalars that decide acceptance of one trial point.
struct TrialMeasures {
  double theta = 0.0;        // at the current iterate
  double phi = 0.0;
  double theta_trial = 0.0;
  double phi_trial = 0.0;
  double alpha = 0.0;
  double grad_phi_d = 0.0;   // directional derivative of phi along the step
  double theta_min = 0.0;
};

/// grad_phi_d < 0 and alpha*(-grad_phi_d)^s_phi > delta*theta^s_theta
inline bool switching_condition(const TrialMeasures& t, const SolverOptions& o) {
  return t.grad_phi_d < 0.0 &&
         t.alpha * std::pow(-t.grad_phi_d, o.s_phi) > o.delta_switch * std::pow(t.theta, o.s_theta);
}

/**
 * Filter acceptance test. The Armijo branch applies when theta <= theta_min
 * and the switching condition holds; otherwise the trial must reduce theta
 * or phi by a margin proportional to theta. Both branches also require the
 * trial to be acceptable to the filter.
 */
inline AcceptKind evaluate_trial(const Filter& filter, const TrialMeasures& t,
                                 const SolverOptions& o) {
  if (!filter.acceptable(t.theta_trial, t.phi_trial)) return AcceptKind::Rejected;
  if (t.theta <= t.theta_min && switching_condition(t, o)) {
    // Relative slack of a few ulps absorbs rounding in phi near convergence.
    const double slack = 10.0 * std::numeric_limits<double>::epsilon() * std::abs(t.phi);
    return t.phi_trial - t.phi - o.eta_phi * t.alpha * t.grad_phi_d <= slack
               ? AcceptKind::Armijo
               : AcceptKind::Rejected;
  }
  const bool theta_ok = t.theta > 0.0 && t.theta_trial <= (1.0 - o.gamma_theta) * t.theta;
  const bool phi_ok = t.phi_trial < t.phi - o.gamma_phi * t.theta;
  return theta_ok || phi_ok ? AcceptKind::SufficientDecrease : AcceptKind::Rejected;
}

/// Entry added after a step accepted without the Armijo branch.
inline FilterEntry filter_margin_entry(double theta, double phi, const SolverOptions& o) {
  return {(1.0 - o.gamma_theta) * theta, phi - o.gamma_phi * theta};
}

/**
 * Barrier homotopy: once e_mu <= kappa_epsilon*mu,
 *   mu <- max(tol/10, min(kappa_mu*mu, mu^theta_mu)).
 * mu never increases.
 */
inline double update_barrier(double mu, double e_mu, const SolverOptions& o) {
  if (e_mu > o.kappa_epsilon * mu) return mu;
  const double next = std::max(o.tol / 10.0, std::min(o.kappa_mu * mu, std::pow(mu, o.theta_mu)));
  return std::min(mu, next);
}

}  // namespace mdsipm
