#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "subcaustic/errors.hpp"
#include "subcaustic/normal_form.hpp"

namespace subcaustic {

using Complex = std::complex<double>;

struct ClassifierSettings {
  double tol_C = 1e-12;            // |c0 - c2|, |c1| for the on-curve test
  double tol_b = 1e-12;            // degenerate-b guard
  double tol_res = 1e-8;           // |Res| relative to the degree-7 scale
  double tol_circle = 1e-8;        // ||z| - 1| for unit-root filtering
  double tol_sep = 1e-6;           // simple-root separation
  double tol_shared_angle = 1e-8;  // direct shared-root fallback
  int trig_scan = 4096;
};

/// A_pm = 35/8 (c422 - c421) +- 3 pi c423 + 45 c445,  C = 36 c443
/// B_pm = 35/8 c423 +- 3 pi (c421 - c422) + 45 c444,  D = -36 c442
struct AbcdResult {
  double A_plus, A_minus, B_plus, B_minus, C, D;
};

inline AbcdResult abcd(const NormalFormCoefficients& c) {
  const double pi3 = 3.0 * std::numbers::pi;
  AbcdResult r;
  r.A_plus = 35.0 / 8.0 * (c.c422 - c.c421) + pi3 * c.c423 + 45.0 * c.c445;
  r.A_minus = 35.0 / 8.0 * (c.c422 - c.c421) - pi3 * c.c423 + 45.0 * c.c445;
  r.B_plus = 35.0 / 8.0 * c.c423 + pi3 * (c.c421 - c.c422) + 45.0 * c.c444;
  r.B_minus = 35.0 / 8.0 * c.c423 - pi3 * (c.c421 - c.c422) + 45.0 * c.c444;
  r.C = 36.0 * c.c443;
  r.D = -36.0 * c.c442;
  return r;
}

/// Polar data of b = (c31, c32) = b_tilde (sin omega_b, -cos omega_b).
struct BPolar {
  double b_tilde;
  double omega_b;  // in [0, 2 pi), 0 by convention when b = 0
};

inline BPolar b_polar(double c31, double c32) {
  const double bt = std::hypot(c31, c32);
  if (bt == 0.0) return {0.0, 0.0};
  double omega = std::atan2(c31, -c32);
  if (omega < 0.0) omega += 2.0 * std::numbers::pi;
  return {bt, omega};
}

/// Dense polynomial over C, coefficients in degree-descending order.
struct ComplexPoly {
  std::vector<Complex> coeffs;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  Complex leading() const { return coeffs.empty() ? Complex{} : coeffs.front(); }
  Complex operator()(Complex z) const {
    Complex acc{0.0, 0.0};
    for (const Complex& c : coeffs) acc = acc * z + c;
    return acc;
  }
};

struct PolynomialTriple {
  ComplexPoly p_plus;   // mu z^4 + nu+ z^3 + conj(nu+) z + conj(mu)
  ComplexPoly p_minus;  // same with nu-
  ComplexPoly t;        // b z^3 + conj(b)
  Complex mu, nu_plus, nu_minus, b;
};

/// nu_pm = (A_pm - i B_pm)/2, mu = (C - i D)/2, b = c31 + i c32.
inline PolynomialTriple build_polynomials(const AbcdResult& a, double c31, double c32) {
  PolynomialTriple out;
  out.mu = 0.5 * Complex(a.C, -a.D);
  out.nu_plus = 0.5 * Complex(a.A_plus, -a.B_plus);
  out.nu_minus = 0.5 * Complex(a.A_minus, -a.B_minus);
  out.b = Complex(c31, c32);
  const auto p_of = [&](Complex nu) {
    return ComplexPoly{{out.mu, nu, Complex{0.0, 0.0}, std::conj(nu), std::conj(out.mu)}};
  };
  out.p_plus = p_of(out.nu_plus);
  out.p_minus = p_of(out.nu_minus);
  out.t = ComplexPoly{{out.b, Complex{0.0, 0.0}, Complex{0.0, 0.0}, std::conj(out.b)}};
  return out;
}

/// All roots via the companion matrix, exact-zero leading coefficients
/// stripped first.
inline std::vector<Complex> poly_roots(const ComplexPoly& poly) {
  std::vector<Complex> c = poly.coeffs;
  while (!c.empty() && c.front() == Complex{0.0, 0.0}) c.erase(c.begin());
  if (c.empty()) throw AllZero("poly_roots on the zero polynomial");
  const int d = static_cast<int>(c.size()) - 1;
  if (d == 0) return {};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) comp(i, d - 1) = -c[d - i] / c[0];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, false);
  if (solver.info() != Eigen::Success) {
    throw NumericalRootFailure("companion eigenvalue iteration failed");
  }
  std::vector<Complex> roots(d);
  for (int i = 0; i < d; ++i) roots[i] = solver.eigenvalues()(i);
  return roots;
}

struct UnitRoots {
  std::vector<double> angles;  // sorted, in [0, 2 pi)
  bool multiple = false;       // two unit roots closer than tol_sep
};

/// Roots on the unit circle as sorted angles.
inline UnitRoots unit_roots(const ComplexPoly& poly, double tol_circle = 1e-8,
                            double tol_sep = 1e-6) {
  UnitRoots out;
  for (const Complex& z : poly_roots(poly)) {
    if (std::abs(std::abs(z) - 1.0) <= tol_circle) {
      double a = std::arg(z);
      if (a < 0.0) a += 2.0 * std::numbers::pi;
      out.angles.push_back(a);
    }
  }
  std::sort(out.angles.begin(), out.angles.end());
  const std::size_t m = out.angles.size();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (out.angles[i + 1] - out.angles[i] < tol_sep) out.multiple = true;
  }
  if (m >= 2 && (2.0 * std::numbers::pi - out.angles[m - 1] + out.angles[0]) < tol_sep) {
    out.multiple = true;
  }
  return out;
}

/// Zeros of A cos(2p) + B sin(2p) + C cos(4p) + D sin(4p) on [0, 2 pi),
/// by dense scan plus bisection.
inline std::vector<double> trig_zeros(double A, double B, double C, double D,
                                      int n_scan = 4096) {
  if (A == 0.0 && B == 0.0 && C == 0.0 && D == 0.0) {
    throw AllZero("trig_zeros with identically zero coefficients");
  }
  const auto f = [&](double p) {
    return A * std::cos(2 * p) + B * std::sin(2 * p) + C * std::cos(4 * p) +
           D * std::sin(4 * p);
  };
  const double step = 2.0 * std::numbers::pi / n_scan;
  std::vector<double> zeros;
  double prev = f(0.0);
  for (int i = 1; i <= n_scan; ++i) {
    const double x = i * step;
    const double cur = f(x);
    if (prev == 0.0) {
      zeros.push_back((i - 1) * step);
    } else if ((prev < 0.0) != (cur < 0.0)) {
      double a = (i - 1) * step, b = x, fa = prev;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) {
          a = b = m;
          break;
        }
        if ((fa < 0.0) == (fm < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      zeros.push_back(0.5 * (a + b));
    }
    prev = cur;
  }
  std::sort(zeros.begin(), zeros.end());
  return zeros;
}

/// Sylvester matrix of a degree-4 and a degree-3 polynomial (7x7).
inline Eigen::Matrix<Complex, 7, 7> sylvester_matrix(const ComplexPoly& p,
                                                     const ComplexPoly& t) {
  Eigen::Matrix<Complex, 7, 7> m = Eigen::Matrix<Complex, 7, 7>::Zero();
  for (int row = 0; row < 3; ++row) {
    for (int k = 0; k <= 4; ++k) m(row, row + k) = p.coeffs[k];
  }
  for (int row = 0; row < 4; ++row) {
    for (int k = 0; k <= 3; ++k) m(3 + row, row + k) = t.coeffs[k];
  }
  return m;
}

/// Res(P, T): determinant of the Sylvester matrix. Degree-7 homogeneous in
/// the coefficient pair; vanishes exactly when the polynomials share a root.
inline Complex resultant(const ComplexPoly& p, const ComplexPoly& t) {
  if (p.degree() != 4 || p.leading() == Complex{0.0, 0.0}) {
    throw DegenerateLeadingCoefficient("resultant requires deg P = 4 (mu != 0)");
  }
  if (t.degree() != 3 || t.leading() == Complex{0.0, 0.0}) {
    throw DegenerateLeadingCoefficient("resultant requires deg T = 3 (b != 0)");
  }
  return sylvester_matrix(p, t).determinant();
}

/// Inverse of the coefficient -> (mu, nu+, nu-, b) map, used to steer the
/// numeric pipeline toward chosen invariant values. The spin decomposition
/// leaves sigma0 = c0 = c2 (on-curve round part), the w-block trace
/// c421 + c422, c441 and the spin-1 pair (c11, c12) free; they default to 0.
struct InvariantTargets {
  Complex mu{0.0, 0.0};
  Complex nu_plus{0.0, 0.0};
  Complex nu_minus{0.0, 0.0};
  Complex b{0.0, 0.0};
  double sigma0 = 0.0;
  double w_trace = 0.0;
  double c441 = 0.0;
  double c11 = 0.0;
  double c12 = 0.0;
};

inline NormalFormCoefficients invariants_to_coefficients(const InvariantTargets& t) {
  const double pi = std::numbers::pi;
  // nu_pm = -35/16 kappa -+ (3 pi/2) i kappa - (45/2) i sigma,  mu = 18 i eta
  const Complex kappa = Complex{0.0, 1.0} * (t.nu_plus - t.nu_minus) / (3.0 * pi);
  const Complex sigma =
      Complex{0.0, 1.0} * (t.nu_plus + t.nu_minus + 35.0 / 8.0 * kappa) / 45.0;
  const Complex eta = -Complex{0.0, 1.0} * t.mu / 18.0;
  NormalFormCoefficients c;
  c.c0 = t.sigma0;
  c.c2 = t.sigma0;
  c.c1 = 0.0;
  c.c11 = t.c11;
  c.c12 = t.c12;
  c.c31 = t.b.real();
  c.c32 = t.b.imag();
  c.c421 = 0.5 * (t.w_trace + kappa.real());
  c.c422 = 0.5 * (t.w_trace - kappa.real());
  c.c423 = kappa.imag();
  c.c441 = t.c441;
  c.c442 = eta.real();
  c.c443 = -eta.imag();
  c.c444 = sigma.real();
  c.c445 = sigma.imag();
  return c;
}

enum class Regime { OFF_C, ON_C_GENERIC, ON_C_DEGENERATE_PLUS, ON_C_DEGENERATE_MINUS };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::OFF_C: return "OFF_C";
    case Regime::ON_C_GENERIC: return "ON_C_GENERIC";
    case Regime::ON_C_DEGENERATE_PLUS: return "ON_C_DEGENERATE_PLUS";
    case Regime::ON_C_DEGENERATE_MINUS: return "ON_C_DEGENERATE_MINUS";
  }
  return "?";
}

/// Algebraic invariants and the predicted singularity regime, computed from
/// the coefficients alone (no integration anywhere).
struct ClassifierReport {
  double b_tilde = 0.0;
  double omega_b = 0.0;
  double A_plus = 0.0, A_minus = 0.0, B_plus = 0.0, B_minus = 0.0, C = 0.0, D = 0.0;
  Complex mu{0.0, 0.0}, nu_plus{0.0, 0.0}, nu_minus{0.0, 0.0};
  std::vector<double> unit_roots_plus, unit_roots_minus, t_roots;  // z-angles
  Complex res_plus{0.0, 0.0}, res_minus{0.0, 0.0};
  bool res_plus_defined = false, res_minus_defined = false;
  Regime regime = Regime::OFF_C;
  bool non_generic = false;   // both sides degenerate at once
  bool degenerate_b = false;  // b = 0: wedge factorization uninformative
  bool root_multiplicity = false;
  bool res_root_mismatch = false;  // resultant and direct shared-root disagree
  std::vector<std::string> predicted_family_plus, predicted_family_minus;
  // phi-space data (angle doubling z = e^{2 i phi}): candidate adherent
  // angles from P-tilde roots and cusp-angle candidates from the sine factor.
  std::vector<double> adherent_angles_plus, adherent_angles_minus;
  std::vector<double> cusp_angle_candidates;
};

namespace classifier_detail {

inline double circ_gap(double a, double b) {
  double d = std::abs(a - b);
  const double two_pi = 2.0 * std::numbers::pi;
  d = std::fmod(d, two_pi);
  return std::min(d, two_pi - d);
}

inline double min_shared_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double best = std::numbers::pi;
  for (double x : a) {
    for (double y : b) best = std::min(best, circ_gap(x, y));
  }
  return best;
}

inline std::vector<double> double_cover(const std::vector<double>& z_angles) {
  std::vector<double> out;
  out.reserve(2 * z_angles.size());
  for (double psi : z_angles) {
    out.push_back(0.5 * psi);
    out.push_back(0.5 * psi + std::numbers::pi);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace classifier_detail

inline ClassifierReport classify(const NormalFormCoefficients& coeffs,
                                 const ClassifierSettings& set = {}) {
  ClassifierReport rep;
  const AbcdResult a = abcd(coeffs);
  rep.A_plus = a.A_plus;
  rep.A_minus = a.A_minus;
  rep.B_plus = a.B_plus;
  rep.B_minus = a.B_minus;
  rep.C = a.C;
  rep.D = a.D;
  const BPolar bp = b_polar(coeffs.c31, coeffs.c32);
  rep.b_tilde = bp.b_tilde;
  rep.omega_b = bp.omega_b;
  const PolynomialTriple polys = build_polynomials(a, coeffs.c31, coeffs.c32);
  rep.mu = polys.mu;
  rep.nu_plus = polys.nu_plus;
  rep.nu_minus = polys.nu_minus;

  const bool on_curve = std::abs(coeffs.c0 - coeffs.c2) <= set.tol_C &&
                        std::abs(coeffs.c1) <= set.tol_C;
  if (!on_curve) {
    rep.regime = Regime::OFF_C;
    return rep;
  }
  rep.regime = Regime::ON_C_GENERIC;
  if (bp.b_tilde <= set.tol_b) {
    rep.degenerate_b = true;
    return rep;
  }

  const UnitRoots t_roots = unit_roots(polys.t, set.tol_circle, set.tol_sep);
  rep.t_roots = t_roots.angles;
  for (int k = 0; k < 6; ++k) {
    double cand = (k * std::numbers::pi - bp.omega_b) / 3.0;
    cand = std::fmod(cand, 2.0 * std::numbers::pi);
    if (cand < 0.0) cand += 2.0 * std::numbers::pi;
    rep.cusp_angle_candidates.push_back(cand);
  }
  std::sort(rep.cusp_angle_candidates.begin(), rep.cusp_angle_candidates.end());

  const auto side = [&](const ComplexPoly& p, Complex nu, std::vector<double>& roots_out,
                        Complex& res_out, bool& res_defined,
                        std::vector<double>& adherent_out,
                        std::vector<std::string>& family) -> bool {
    bool degenerate;
    const bool p_zero = polys.mu == Complex{0.0, 0.0} && nu == Complex{0.0, 0.0};
    if (p_zero) {
      // P identically zero: every angle is a wedge zero; treat as degenerate.
      res_defined = false;
      family = {"S4", "S5", "S6", "S7"};
      return true;
    }
    const UnitRoots ur = unit_roots(p, set.tol_circle, set.tol_sep);
    roots_out = ur.angles;
    rep.root_multiplicity = rep.root_multiplicity || ur.multiple;
    adherent_out = classifier_detail::double_cover(ur.angles);
    const double shared_gap = classifier_detail::min_shared_gap(ur.angles, rep.t_roots);
    if (polys.mu != Complex{0.0, 0.0}) {
      res_out = resultant(p, polys.t);
      res_defined = true;
      const double scale =
          std::max({std::abs(polys.mu), std::abs(nu), std::abs(polys.b)});
      degenerate = std::abs(res_out) <= set.tol_res * std::pow(scale, 7);
      // cross-check the two degeneracy detectors; a shared root within a
      // loose angular gap should coincide with a collapsed resultant
      const bool root_says = shared_gap <= 1e-4;
      if (degenerate != root_says) rep.res_root_mismatch = true;
    } else {
      res_defined = false;
      degenerate = shared_gap <= set.tol_shared_angle;
    }
    if (degenerate) {
      family = {"S4", "S5", "S6", "S7"};
    } else if (roots_out.size() <= 2) {
      family = {"S1"};
    } else {
      family = {"S2", "S3"};
    }
    return degenerate;
  };

  const bool deg_plus =
      side(polys.p_plus, polys.nu_plus, rep.unit_roots_plus, rep.res_plus,
           rep.res_plus_defined, rep.adherent_angles_plus, rep.predicted_family_plus);
  const bool deg_minus =
      side(polys.p_minus, polys.nu_minus, rep.unit_roots_minus, rep.res_minus,
           rep.res_minus_defined, rep.adherent_angles_minus, rep.predicted_family_minus);

  if (deg_plus && deg_minus) {
    rep.non_generic = true;
    rep.regime = Regime::ON_C_DEGENERATE_PLUS;
  } else if (deg_plus) {
    rep.regime = Regime::ON_C_DEGENERATE_PLUS;
  } else if (deg_minus) {
    rep.regime = Regime::ON_C_DEGENERATE_MINUS;
  }
  return rep;
}

}  // namespace subcaustic
