#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "subcaustic/errors.hpp"
#include "subcaustic/normal_form.hpp"

namespace subcaustic {

/// Point of the cotangent bundle: normal coordinates (x, y, w) and dual
/// coordinates lambda = p dx + q dy + r dw.
struct CotangentState {
  double x = 0.0, y = 0.0, w = 0.0;
  double p = 0.0, q = 0.0, r = 0.0;
};

using Vec6 = std::array<double, 6>;
using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;  // row-major

inline Vec6 to_vec(const CotangentState& s) {
  return {s.x, s.y, s.w, s.p, s.q, s.r};
}
inline CotangentState to_state(const Vec6& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

/// Unit-covector initial condition on the level set H = 1/2 at the origin.
inline CotangentState initial_covector(double phi, double r) {
  return {0.0, 0.0, 0.0, std::cos(phi), std::sin(phi), r};
}

struct IntegratorSettings {
  int steps_per_period = 2000;   // steps per 2*pi/|r|
  double tol_energy = 1e-9;      // max |H - H(0)| along an arc
  int max_refinements = 3;       // step halvings before StepFailure
  double jacobian_rel_step = 1e-6;
};

/// H = 1/2 (h1^2 + h2^2), h_i = <lambda, X_i>.
inline double hamiltonian(const FrameModel& model, const CotangentState& s) {
  FrameModel::Eval e;
  model.eval(s.x, s.y, s.w, e);
  const double h1 = s.p * e.comp[0] + s.q * e.comp[1] + s.r * e.comp[2];
  const double h2 = s.p * e.comp[3] + s.q * e.comp[4] + s.r * e.comp[5];
  return 0.5 * (h1 * h1 + h2 * h2);
}

inline double hamiltonian(const NormalFormCoefficients& c, const CotangentState& s) {
  return hamiltonian(FrameModel(c), s);
}

/// Hamiltonian vector field (dH/dp, dH/dq, dH/dr, -dH/dx, -dH/dy, -dH/dw).
/// Every partial is closed-form through the exact frame derivatives.
inline Vec6 flow_rhs(const FrameModel& model, const CotangentState& s) {
  FrameModel::Eval e;
  model.eval(s.x, s.y, s.w, e);
  const double h1 = s.p * e.comp[0] + s.q * e.comp[1] + s.r * e.comp[2];
  const double h2 = s.p * e.comp[3] + s.q * e.comp[4] + s.r * e.comp[5];
  Vec6 out;
  out[0] = h1 * e.comp[0] + h2 * e.comp[3];
  out[1] = h1 * e.comp[1] + h2 * e.comp[4];
  out[2] = h1 * e.comp[2] + h2 * e.comp[5];
  for (int a = 0; a < 3; ++a) {
    const double dh1 = s.p * e.grad[0][a] + s.q * e.grad[1][a] + s.r * e.grad[2][a];
    const double dh2 = s.p * e.grad[3][a] + s.q * e.grad[4][a] + s.r * e.grad[5][a];
    out[3 + a] = -(h1 * dh1 + h2 * dh2);
  }
  return out;
}

inline Vec6 flow_rhs(const NormalFormCoefficients& c, const CotangentState& s) {
  return flow_rhs(FrameModel(c), s);
}

namespace detail {

inline Vec6 rhs_vec(const FrameModel& m, const Vec6& y) {
  return flow_rhs(m, to_state(y));
}

inline Vec6 axpy(const Vec6& y, double a, const Vec6& k) {
  Vec6 out;
  for (int i = 0; i < 6; ++i) out[i] = y[i] + a * k[i];
  return out;
}

}  // namespace detail

/// Fixed-step RK4 trajectory with cubic Hermite dense output.
class DenseTrajectory {
 public:
  DenseTrajectory() = default;

  /// Integrate from y0 over [0, t_final] with n uniform steps.
  DenseTrajectory(const FrameModel& model, const Vec6& y0, double t_final, int n)
      : dt_(t_final / n), t_final_(t_final) {
    y_.reserve(n + 1);
    f_.reserve(n + 1);
    Vec6 y = y0;
    Vec6 k1 = detail::rhs_vec(model, y);
    y_.push_back(y);
    f_.push_back(k1);
    for (int s = 0; s < n; ++s) {
      const Vec6 k2 = detail::rhs_vec(model, detail::axpy(y, 0.5 * dt_, k1));
      const Vec6 k3 = detail::rhs_vec(model, detail::axpy(y, 0.5 * dt_, k2));
      const Vec6 k4 = detail::rhs_vec(model, detail::axpy(y, dt_, k3));
      for (int i = 0; i < 6; ++i) {
        y[i] += dt_ / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
      k1 = detail::rhs_vec(model, y);
      y_.push_back(y);
      f_.push_back(k1);
    }
  }

  int steps() const { return static_cast<int>(y_.size()) - 1; }
  double dt() const { return dt_; }
  double t_final() const { return t_final_; }
  double node_time(int i) const { return i * dt_; }
  const Vec6& node_state(int i) const { return y_[i]; }
  const Vec6& node_deriv(int i) const { return f_[i]; }

  Vec6 state_at(double t) const {
    int m = static_cast<int>(t / dt_);
    if (m < 0) m = 0;
    if (m >= steps()) m = steps() - 1;
    const double th = (t - m * dt_) / dt_;
    const double th2 = th * th, th3 = th2 * th;
    const double h00 = 1.0 - 3.0 * th2 + 2.0 * th3;
    const double h10 = th - 2.0 * th2 + th3;
    const double h01 = 3.0 * th2 - 2.0 * th3;
    const double h11 = th3 - th2;
    Vec6 out;
    for (int i = 0; i < 6; ++i) {
      out[i] = h00 * y_[m][i] + h10 * dt_ * f_[m][i] + h01 * y_[m + 1][i] +
               h11 * dt_ * f_[m + 1][i];
    }
    return out;
  }

 private:
  double dt_ = 0.0;
  double t_final_ = 0.0;
  std::vector<Vec6> y_;
  std::vector<Vec6> f_;
};

/// Sampled geodesic arc with its initial covector on the H = 1/2 cylinder.
struct GeodesicArc {
  double phi = 0.0;
  double r = 0.0;
  std::vector<double> times;
  std::vector<CotangentState> states;
};

namespace detail {

inline int step_count(double t_final, double r, const IntegratorSettings& set,
                      int refine) {
  const double period = 2.0 * std::numbers::pi / std::max(std::abs(r), 1e-12);
  const double target_dt = period / (set.steps_per_period << refine);
  return std::max(1, static_cast<int>(std::ceil(t_final / target_dt)));
}

inline double max_energy_drift(const FrameModel& model, const DenseTrajectory& tr) {
  const double h0 = hamiltonian(model, to_state(tr.node_state(0)));
  double drift = 0.0;
  for (int i = 1; i <= tr.steps(); ++i) {
    drift = std::max(drift, std::abs(hamiltonian(model, to_state(tr.node_state(i))) - h0));
  }
  return drift;
}

/// Dense trajectory with energy-drift control by step halving.
inline DenseTrajectory integrate_dense(const FrameModel& model, const Vec6& y0,
                                       double t_final, double r_scale,
                                       const IntegratorSettings& set) {
  for (int refine = 0; refine <= set.max_refinements; ++refine) {
    DenseTrajectory tr(model, y0, t_final, step_count(t_final, r_scale, set, refine));
    if (max_energy_drift(model, tr) <= set.tol_energy) return tr;
  }
  throw StepFailure("energy drift above tolerance after max step refinements");
}

}  // namespace detail

/// Flow of the Hamiltonian system from state0 over [0, t_final].
inline GeodesicArc integrate(const FrameModel& model, const CotangentState& state0,
                             double t_final, const IntegratorSettings& set = {}) {
  if (!(t_final > 0.0)) throw SolveFailure("integrate requires t_final > 0");
  const DenseTrajectory tr =
      detail::integrate_dense(model, to_vec(state0), t_final, state0.r, set);
  GeodesicArc arc;
  arc.phi = std::atan2(state0.q, state0.p);
  arc.r = state0.r;
  arc.times.reserve(tr.steps() + 1);
  arc.states.reserve(tr.steps() + 1);
  for (int i = 0; i <= tr.steps(); ++i) {
    arc.times.push_back(tr.node_time(i));
    arc.states.push_back(to_state(tr.node_state(i)));
  }
  return arc;
}

inline GeodesicArc integrate(const NormalFormCoefficients& c, const CotangentState& s0,
                             double t_final, const IntegratorSettings& set = {}) {
  return integrate(FrameModel(c), s0, t_final, set);
}

/// E(t, phi, r): endpoint of the arclength geodesic with covector
/// (cos phi, sin phi, r) at the origin.
inline Vec3 exp_map(const FrameModel& model, double t, double phi, double r,
                    const IntegratorSettings& set = {}) {
  if (t < 0.0) throw SolveFailure("exp_map requires t >= 0");
  if (t == 0.0) return {0.0, 0.0, 0.0};
  const DenseTrajectory tr =
      detail::integrate_dense(model, to_vec(initial_covector(phi, r)), t, r, set);
  const Vec6& y = tr.node_state(tr.steps());
  return {y[0], y[1], y[2]};
}

inline Vec3 exp_map(const NormalFormCoefficients& c, double t, double phi, double r,
                    const IntegratorSettings& set = {}) {
  return exp_map(FrameModel(c), t, phi, r, set);
}

namespace detail {

/// Richardson-extrapolated central difference of E along one parameter.
template <typename F>
Vec3 central_column(const F& f, double delta) {
  const auto diff = [&](double d) {
    const Vec3 a = f(d), b = f(-d);
    return Vec3{(a[0] - b[0]) / (2.0 * d), (a[1] - b[1]) / (2.0 * d),
                (a[2] - b[2]) / (2.0 * d)};
  };
  const Vec3 c1 = diff(delta);
  const Vec3 c2 = diff(0.5 * delta);
  return {(4.0 * c2[0] - c1[0]) / 3.0, (4.0 * c2[1] - c1[1]) / 3.0,
          (4.0 * c2[2] - c1[2]) / 3.0};
}

}  // namespace detail

/// 3x3 Jacobian of exp_map with respect to (t, phi, r), column order (t, phi, r).
inline Mat3 exp_jacobian(const FrameModel& model, double t, double phi, double r,
                         const IntegratorSettings& set = {}) {
  if (!(t > 0.0)) throw SolveFailure("exp_jacobian requires t > 0");
  const double period = 2.0 * std::numbers::pi / std::max(std::abs(r), 1e-12);
  const double dt = std::min(set.jacobian_rel_step * period, 0.25 * t);
  const double dphi = set.jacobian_rel_step;
  const double dr = set.jacobian_rel_step * std::max(std::abs(r), 1.0);

  const Vec3 col_t = detail::central_column(
      [&](double d) { return exp_map(model, t + d, phi, r, set); }, dt);
  const Vec3 col_phi = detail::central_column(
      [&](double d) { return exp_map(model, t, phi + d, r, set); }, dphi);
  const Vec3 col_r = detail::central_column(
      [&](double d) { return exp_map(model, t, phi, r + d, set); }, dr);

  Mat3 j;
  for (int row = 0; row < 3; ++row) {
    j[row] = {col_t[row], col_phi[row], col_r[row]};
  }
  return j;
}

inline Mat3 exp_jacobian(const NormalFormCoefficients& c, double t, double phi,
                         double r, const IntegratorSettings& set = {}) {
  return exp_jacobian(FrameModel(c), t, phi, r, set);
}

inline double det3(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// Five-trajectory bundle for one (phi, r): center plus central-difference
/// perturbations in phi and r, on a shared step grid. det(dE) along the arc
/// then costs interpolation only, which is what makes the conjugate-time
/// solve and the slice secant cheap enough to run per grid angle.
class ConjugateBundle {
 public:
  ConjugateBundle(const FrameModel& model, double phi, double r, double t_max,
                  const IntegratorSettings& set)
      : model_(&model),
        r_(r),
        dphi_(set.jacobian_rel_step),
        dr_(set.jacobian_rel_step * std::abs(r)) {
    const int n = detail::step_count(t_max, r, set, 0);
    center_ = DenseTrajectory(model, to_vec(initial_covector(phi, r)), t_max, n);
    phi_p_ = DenseTrajectory(model, to_vec(initial_covector(phi + dphi_, r)), t_max, n);
    phi_m_ = DenseTrajectory(model, to_vec(initial_covector(phi - dphi_, r)), t_max, n);
    r_p_ = DenseTrajectory(model, to_vec(initial_covector(phi, r + dr_)), t_max, n);
    r_m_ = DenseTrajectory(model, to_vec(initial_covector(phi, r - dr_)), t_max, n);
  }

  double t_max() const { return center_.t_final(); }
  int steps() const { return center_.steps(); }
  double node_time(int i) const { return center_.node_time(i); }

  /// |H(end) - H(0)| of the center trajectory; cheap blow-up sentinel.
  double energy_drift() const {
    return std::abs(hamiltonian(*model_, to_state(center_.node_state(center_.steps()))) -
                    hamiltonian(*model_, to_state(center_.node_state(0))));
  }

  double det_at_node(int i) const {
    return det_from(center_.node_deriv(i), phi_p_.node_state(i),
                    phi_m_.node_state(i), r_p_.node_state(i), r_m_.node_state(i));
  }

  double det_at(double t) const {
    const Vec6 yc = center_.state_at(t);
    const Vec6 fc = flow_rhs(*model_, to_state(yc));
    return det_from(fc, phi_p_.state_at(t), phi_m_.state_at(t), r_p_.state_at(t),
                    r_m_.state_at(t));
  }

  Vec3 position_at(double t) const {
    const Vec6 y = center_.state_at(t);
    return {y[0], y[1], y[2]};
  }

 private:
  double det_from(const Vec6& fc, const Vec6& yp, const Vec6& ym, const Vec6& rp,
                  const Vec6& rm) const {
    Mat3 j;
    for (int row = 0; row < 3; ++row) {
      j[row][0] = fc[row];
      j[row][1] = (yp[row] - ym[row]) / (2.0 * dphi_);
      j[row][2] = (rp[row] - rm[row]) / (2.0 * dr_);
    }
    return det3(j);
  }

  const FrameModel* model_;
  double r_, dphi_, dr_;
  DenseTrajectory center_, phi_p_, phi_m_, r_p_, r_m_;
};

}  // namespace subcaustic
