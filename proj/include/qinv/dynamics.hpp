// Copyright 2026 The qinv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QINV_DYNAMICS_HPP
#define QINV_DYNAMICS_HPP

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <cstddef>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qinv/spectral.hpp"

/**
 * \file
 * \brief Fixed-step time integration of Galerkin-truncated dispersive flows.
 *
 * A truncated flow splits into the block of retained modes |n| <= N, which carries the
 * nonlinearity, and the tail |n| > N, on which it is the linear phase rotation
 * c_n(t) = exp(-i omega_n t) c_n(0). The tail is advanced exactly; the retained block is advanced
 * with RK4 or with the implicit midpoint rule.
 */

namespace qinv {

/// `midpoint4` is the implicit midpoint rule composed by the symmetric triple jump (order 4).
enum class Integrator { rk4, implicit_midpoint, midpoint4 };

inline std::string to_string(Integrator integrator) {
  switch (integrator) {
    case Integrator::rk4:
      return "rk4";
    case Integrator::implicit_midpoint:
      return "implicit_midpoint";
    case Integrator::midpoint4:
      return "midpoint4";
  }
  return "unknown";
}

inline Integrator integrator_from_string(const std::string& name) {
  if (name == "rk4") {
    return Integrator::rk4;
  }
  if (name == "implicit_midpoint" || name == "midpoint") {
    return Integrator::implicit_midpoint;
  }
  if (name == "midpoint4") {
    return Integrator::midpoint4;
  }
  throw std::invalid_argument("unknown integrator '" + name + "'");
}

/// Raised when the integrated state stops being finite or exceeds the blow-up guard.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time) : std::runtime_error{what}, time_{time} {}
  [[nodiscard]] double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Any coefficient above this modulus aborts an integration.
inline constexpr double kBlowUpModulus = 1e12;

/// A Galerkin-truncated evolution u' = -i omega(D) u + G(P_N u) with G supported on |n| <= N.
template <class S>
concept TruncatedSystem = requires(const S& sys, const TorusField& u, TorusField& out) {
  { sys.truncation() } -> std::convertible_to<int>;
  { sys.frequency(0) } -> std::convertible_to<double>;
  { sys.nonlinear_term(u) } -> std::convertible_to<TorusField>;
  { sys.conserved(u) } -> std::convertible_to<std::vector<double>>;
  { sys.conserved_names() } -> std::convertible_to<std::vector<std::string>>;
  { sys.diagnostics(u) } -> std::convertible_to<std::vector<double>>;
  { sys.diagnostic_names() } -> std::convertible_to<std::vector<std::string>>;
};

/// Time-stamped states of one integration plus per-state diagnostics.
struct Trajectory {
  std::vector<double> times;
  std::vector<TorusField> states;
  std::vector<std::string> diagnostic_names;
  std::vector<std::vector<double>> diagnostics;
  std::vector<std::string> conserved_names;
  /// max_t |Q(t) - Q(0)| / |Q(0)| over every step (absolute when Q(0) = 0).
  std::vector<double> max_relative_drift;
  double step = 0.0;
  int store_every = 1;

  [[nodiscard]] const TorusField& final_state() const { return states.back(); }
  [[nodiscard]] double final_time() const { return times.back(); }
};

/// Final state of a flow together with the conservation drift accumulated on the way.
struct FlowResult {
  TorusField state;
  std::vector<double> max_relative_drift;
};

namespace detail {

inline void apply_linear(std::span<const double> omega, const TorusField& y, TorusField& out) {
  const int n_max = y.n_max();
  auto dst = out.raw();
  for (int n = -n_max; n <= n_max; ++n) {
    const cplx c = y[n];
    const double w = omega[static_cast<std::size_t>(n + n_max)];
    dst[static_cast<std::size_t>(n + n_max)] = cplx{w * c.imag(), -w * c.real()};
  }
}

template <TruncatedSystem System>
class BlockStepper {
 public:
  BlockStepper(const System& sys, int head_band, Integrator integrator, double h)
      : sys_{sys}, integrator_{integrator}, h_{h} {
    omega_.resize(static_cast<std::size_t>(2 * head_band + 1));
    for (int n = -head_band; n <= head_band; ++n) {
      omega_[static_cast<std::size_t>(n + head_band)] = sys.frequency(n);
    }
  }

  TorusField rhs(const TorusField& y) const {
    TorusField out = sys_.nonlinear_term(y);
    TorusField lin{y.n_max(), y.reality()};
    apply_linear(omega_, y, lin);
    out += lin;
    return out;
  }

  void step(TorusField& y) const {
    if (integrator_ == Integrator::rk4) {
      step_rk4(y);
    } else if (integrator_ == Integrator::implicit_midpoint) {
      step_midpoint(y, h_);
    } else {
      const double cube = std::cbrt(2.0);
      const double outer = 1.0 / (2.0 - cube);
      step_midpoint(y, outer * h_);
      step_midpoint(y, -cube * outer * h_);
      step_midpoint(y, outer * h_);
    }
    y.enforce_reality();
  }

 private:
  void step_rk4(TorusField& y) const {
    const TorusField k1 = rhs(y);
    const TorusField k2 = rhs(TorusField{y}.axpy(0.5 * h_, k1));
    const TorusField k3 = rhs(TorusField{y}.axpy(0.5 * h_, k2));
    const TorusField k4 = rhs(TorusField{y}.axpy(h_, k3));
    y.axpy(h_ / 6.0, k1).axpy(h_ / 3.0, k2).axpy(h_ / 3.0, k3).axpy(h_ / 6.0, k4);
  }

  // y1 = (1 - h A/2)^{-1} [(1 + h A/2) y0 + h G((y0 + y1)/2)], A = -i omega, solved by fixed point
  // iteration on the nonlinear term only.
  void step_midpoint(TorusField& y, double h) const {
    const int n_max = y.n_max();
    std::vector<cplx> forward(omega_.size());
    std::vector<cplx> inverse(omega_.size());
    for (std::size_t i = 0; i < omega_.size(); ++i) {
      const cplx a{0.0, -0.5 * h * omega_[i]};
      forward[i] = 1.0 + a;
      inverse[i] = 1.0 / (1.0 - a);
    }
    TorusField base = y;
    {
      auto b = base.raw();
      for (std::size_t i = 0; i < b.size(); ++i) {
        b[i] *= forward[i] * inverse[i];
      }
      base.enforce_reality();
    }
    TorusField next = base;
    const double scale = 1.0 + y.max_abs();
    for (int iter = 0; iter < kMaxIterations; ++iter) {
      TorusField mid = y;
      mid += next;
      mid *= 0.5;
      TorusField g = sys_.nonlinear_term(mid);
      auto gr = g.raw();
      for (std::size_t i = 0; i < gr.size(); ++i) {
        gr[i] *= h * inverse[i];
      }
      g.enforce_reality();
      TorusField candidate = base;
      candidate += g;
      double change = 0.0;
      for (int n = -n_max; n <= n_max; ++n) {
        change = std::max(change, std::abs(candidate[n] - next[n]));
      }
      next = std::move(candidate);
      if (change <= kTolerance * scale) {
        y = std::move(next);
        return;
      }
    }
    throw IntegrationError("implicit midpoint: fixed point iteration did not converge", 0.0);
  }

  static constexpr int kMaxIterations = 200;
  static constexpr double kTolerance = 1e-14;

  const System& sys_;
  Integrator integrator_;
  double h_;
  std::vector<double> omega_;
};

template <TruncatedSystem System>
TorusField rotate_tail(const System& sys, const TorusField& tail0, int head_band, double t) {
  TorusField out{tail0.n_max(), tail0.reality()};
  auto dst = out.raw();
  for (int n = -tail0.n_max(); n <= tail0.n_max(); ++n) {
    if (std::abs(n) <= head_band) {
      continue;
    }
    const double phase = -sys.frequency(n) * t;
    dst[static_cast<std::size_t>(n + tail0.n_max())] = tail0[n] * cplx{std::cos(phase), std::sin(phase)};
  }
  out.enforce_reality();
  return out;
}

inline TorusField assemble(const TorusField& head, TorusField tail) {
  auto dst = tail.raw();
  for (int n = -head.n_max(); n <= head.n_max(); ++n) {
    dst[static_cast<std::size_t>(n + tail.n_max())] = head[n];
  }
  tail.enforce_reality();
  return tail;
}

inline void track_drift(std::span<const double> q0, std::span<const double> q, std::vector<double>& drift) {
  for (std::size_t i = 0; i < q0.size(); ++i) {
    const double base = std::abs(q0[i]);
    const double d = std::abs(q[i] - q0[i]) / (base > 0.0 ? base : 1.0);
    drift[i] = std::max(drift[i], d);
  }
}

inline int step_count(double t_final, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(t_final)) {
    throw std::invalid_argument("integration needs a positive finite dt and a finite final time");
  }
  if (t_final == 0.0) {
    return 0;
  }
  return std::max(1, static_cast<int>(std::ceil(std::abs(t_final) / dt - 1e-9)));
}

/// Core loop; `on_step(step_index, time, head)` runs after every accepted step.
template <TruncatedSystem System, class OnStep>
std::vector<double> run_flow(const System& sys, const TorusField& u0, double t_final, double dt, Integrator integrator,
                             OnStep&& on_step) {
  const int head_band = std::min(sys.truncation(), u0.n_max());
  const int steps = step_count(t_final, dt);
  const double h = steps == 0 ? 0.0 : t_final / steps;
  TorusField head = u0.with_band(head_band);
  const auto q0 = sys.conserved(head);
  std::vector<double> drift(q0.size(), 0.0);
  BlockStepper<System> stepper{sys, head_band, integrator, h};
  for (int k = 1; k <= steps; ++k) {
    const double t = (k == steps) ? t_final : k * h;
    try {
      stepper.step(head);
    } catch (const IntegrationError& e) {
      throw IntegrationError(e.what(), t);
    }
    if (!head.all_finite() || head.max_abs() > kBlowUpModulus) {
      std::ostringstream msg;
      msg << "integration diverged at t = " << t << " (max |c_n| = " << head.max_abs() << ")";
      throw IntegrationError(msg.str(), t);
    }
    track_drift(q0, sys.conserved(head), drift);
    on_step(k, t, head);
  }
  return drift;
}

}  // namespace detail

/// Integrates from 0 to t_final (either sign) and stores every `store_every`-th state and the last.
template <TruncatedSystem System>
Trajectory evolve(const System& sys, const TorusField& u0, double t_final, double dt, Integrator integrator,
                  int store_every = 1) {
  if (store_every < 1) {
    throw std::invalid_argument("evolve: store_every must be >= 1");
  }
  const int head_band = std::min(sys.truncation(), u0.n_max());
  const int steps = detail::step_count(t_final, dt);
  Trajectory traj;
  traj.diagnostic_names = sys.diagnostic_names();
  traj.conserved_names = sys.conserved_names();
  traj.step = steps == 0 ? 0.0 : t_final / steps;
  traj.store_every = store_every;
  auto store = [&](double t, const TorusField& state) {
    traj.times.push_back(t);
    traj.diagnostics.push_back(sys.diagnostics(state));
    traj.states.push_back(state);
  };
  store(0.0, u0);
  traj.max_relative_drift =
      detail::run_flow(sys, u0, t_final, dt, integrator, [&](int k, double t, const TorusField& head) {
        if (k % store_every == 0 || k == steps) {
          store(t, detail::assemble(head, detail::rotate_tail(sys, u0, head_band, t)));
        }
      });
  return traj;
}

/// Final state Phi_t(u0) without storing intermediate states.
template <TruncatedSystem System>
FlowResult flow(const System& sys, const TorusField& u0, double t_final, double dt, Integrator integrator) {
  const int head_band = std::min(sys.truncation(), u0.n_max());
  TorusField last = u0.with_band(head_band);
  auto drift = detail::run_flow(sys, u0, t_final, dt, integrator,
                                [&](int, double, const TorusField& head) { last = head; });
  return {detail::assemble(last, detail::rotate_tail(sys, u0, head_band, t_final)), std::move(drift)};
}

// ---------------------------------------------------------------------------------------------
// Diagnostics of deterministic estimates

/// One estimate |lhs| <~ rhs evaluated along a trajectory.
struct GrowthSeries {
  std::string name;
  std::vector<double> derivative;  ///< signed analytic time derivative
  std::vector<double> bound;       ///< right-hand side of the estimate (constant omitted)
  std::vector<double> ratio;       ///< |derivative| / bound
  double max_ratio = 0.0;
};

struct GrowthDiagnostics {
  std::vector<double> times;
  std::vector<GrowthSeries> series;

  [[nodiscard]] const GrowthSeries& get(const std::string& name) const {
    for (const auto& s : series) {
      if (s.name == name) {
        return s;
      }
    }
    throw std::out_of_range("GrowthDiagnostics: no series '" + name + "'");
  }
};

namespace detail {
inline void push_ratio(GrowthSeries& s, double derivative, double bound) {
  s.derivative.push_back(derivative);
  s.bound.push_back(bound);
  const double r = bound > 0.0 ? std::abs(derivative) / bound : (derivative == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  s.ratio.push_back(r);
  s.max_ratio = std::max(s.max_ratio, r);
}
}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Export

/// CSV with one row per stored state: time followed by the diagnostic columns.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "time";
  for (const auto& name : traj.diagnostic_names) {
    os << ',' << name;
  }
  os << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << traj.times[i];
    for (double v : traj.diagnostics[i]) {
      os << ',' << v;
    }
    os << '\n';
  }
}

inline nlohmann::json trajectory_to_json(const Trajectory& traj) {
  nlohmann::json j;
  j["times"] = traj.times;
  j["states"] = traj.states;
  j["diagnostic_names"] = traj.diagnostic_names;
  j["diagnostics"] = traj.diagnostics;
  j["conserved_names"] = traj.conserved_names;
  j["max_relative_drift"] = traj.max_relative_drift;
  j["step"] = traj.step;
  j["store_every"] = traj.store_every;
  return j;
}

}  // namespace qinv

#endif
