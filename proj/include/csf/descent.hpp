#pragma once

// Descent building blocks shared by every optimizer in the toolkit: a
// backtracking line search, first-order direction proposals (gradient
// descent and conjugate gradients), and a damped-Newton trial loop. All of
// them are pure functions of their numeric inputs — identical call
// sequences produce bit-identical steps, which the relocalizer relies on
// when it hands a problem from one optimizer to another.

#include <Eigen/Dense>

#include "csf/csfd.hpp"

namespace csf {

struct LineSearchConfig {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;  // Armijo constant
  int max_backtracks = 25;
};

struct LineSearchResult {
  double alpha = 0.0;
  double loss = 0.0;
  int evaluations = 0;
  bool ok = false;
};

// Largest step initial*shrink^k satisfying the sufficient-decrease test
// f(alpha) <= f(0) + c * alpha * slope, where slope is the directional
// derivative at zero (must be negative for the test to mean anything).
// `loss_at_step` maps a scalar step length to the loss at that step.
template <typename F>
LineSearchResult backtracking_search(F&& loss_at_step, double loss0,
                                     double slope,
                                     const LineSearchConfig& cfg) {
  LineSearchResult out;
  double alpha = cfg.initial_step;
  for (int k = 0; k < cfg.max_backtracks; ++k) {
    const double trial = loss_at_step(alpha);
    ++out.evaluations;
    if (trial <= loss0 + cfg.sufficient_decrease * alpha * slope) {
      out.alpha = alpha;
      out.loss = trial;
      out.ok = true;
      return out;
    }
    alpha *= cfg.shrink;
  }
  return out;
}

// Proposes descent directions from successive gradients: plain steepest
// descent, or Polak-Ribiere conjugate gradients with a non-negativity
// clamp, a periodic restart, and a restart whenever the proposal stops
// being a descent direction.
class GradientStepper {
 public:
  enum class Kind { kGradientDescent, kConjugateGradient };

  explicit GradientStepper(Kind kind, int restart_every = 6)
      : kind_(kind), restart_every_(restart_every) {}

  void reset() {
    have_previous_ = false;
    since_restart_ = 0;
  }

  Vec6d propose(const Vec6d& gradient) {
    if (kind_ == Kind::kGradientDescent) return -gradient;

    bool restart = !have_previous_ || since_restart_ >= restart_every_ ||
                   previous_gradient_.dot(previous_gradient_) == 0.0;
    Vec6d direction = -gradient;
    if (!restart) {
      const double beta =
          std::max(0.0, gradient.dot(gradient - previous_gradient_) /
                            previous_gradient_.dot(previous_gradient_));
      direction = -gradient + beta * previous_direction_;
      if (gradient.dot(direction) >= 0.0) {
        direction = -gradient;
        restart = true;
      }
    }
    if (restart) since_restart_ = 0;
    ++since_restart_;
    previous_gradient_ = gradient;
    previous_direction_ = direction;
    have_previous_ = true;
    return direction;
  }

 private:
  Kind kind_;
  int restart_every_;
  int since_restart_ = 0;
  bool have_previous_ = false;
  Vec6d previous_gradient_ = Vec6d::Zero();
  Vec6d previous_direction_ = Vec6d::Zero();
};

// One damped-Newton trial: solve (H + lambda I) d = -g, scaling lambda up
// tenfold until the proposed step actually lowers the loss, and easing it
// back tenfold on success (warm-started across calls through `lambda`).
// When damping alone cannot produce descent the step falls back to a
// backtracking search along the negative gradient; if even that fails the
// increment is zero and the loss is unchanged.
template <typename TrialLoss>
Vec6d levenberg_newton_step(const Vec6d& gradient, const Mat6d& hessian,
                            double loss0, TrialLoss&& trial_loss,
                            double& lambda, const LineSearchConfig& search,
                            double* loss_after = nullptr,
                            int max_attempts = 8) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const Mat6d damped = hessian + lambda * Mat6d::Identity();
    const Eigen::LDLT<Mat6d> ldlt(damped);
    if (ldlt.info() == Eigen::Success) {
      const Vec6d delta = ldlt.solve(-gradient);
      if (delta.allFinite()) {
        const double trial = trial_loss(delta);
        if (trial < loss0) {
          lambda = std::max(lambda * 0.1, 1e-12);
          if (loss_after) *loss_after = trial;
          return delta;
        }
      }
    }
    lambda *= 10.0;
  }

  const double slope = -gradient.dot(gradient);
  if (slope < 0.0) {
    const LineSearchResult r = backtracking_search(
        [&](double a) { return trial_loss(Vec6d(-a * gradient)); }, loss0,
        slope, search);
    if (r.ok) {
      if (loss_after) *loss_after = r.loss;
      return Vec6d(-r.alpha * gradient);
    }
  }
  if (loss_after) *loss_after = loss0;
  return Vec6d::Zero();
}

}  // namespace csf
