#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "subcaustic/errors.hpp"
#include "subcaustic/poly.hpp"

namespace subcaustic {

/// Taylor data of the normal-form maps beta and gamma in graded coordinates
/// (x, y, w) with weights (1, 1, 2).
///
/// The named fields are the coefficients of the graded pieces gamma^2,
/// gamma^3, gamma^4; gamma_extra carries monomials of graded order >= 5 and
/// beta_terms carries all of beta. Values are immutable in spirit: build
/// once, share freely across threads.
struct NormalFormCoefficients {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  double c11 = 0.0, c12 = 0.0, c31 = 0.0, c32 = 0.0;
  double c421 = 0.0, c422 = 0.0, c423 = 0.0;
  double c441 = 0.0, c442 = 0.0, c443 = 0.0, c444 = 0.0, c445 = 0.0;
  std::vector<Monomial> gamma_extra;  // graded order >= 5 and i + j >= 2
  std::vector<Monomial> beta_terms;   // i + j >= 1 so beta(0,0,w) = 0

  /// Throws ConfigError when a monomial list violates the constraints above.
  void validate() const {
    for (const Monomial& m : beta_terms) {
      if (m.i + m.j < 1) {
        throw ConfigError("beta_terms monomial must have i + j >= 1");
      }
    }
    for (const Monomial& m : gamma_extra) {
      if (m.graded_order() < 5) {
        throw ConfigError("gamma_extra monomial must have graded order >= 5");
      }
      if (m.i + m.j < 2) {
        throw ConfigError(
            "gamma_extra monomial must have i + j >= 2 to preserve "
            "gamma(0,0,w) = d_x gamma(0,0,w) = d_y gamma(0,0,w) = 0");
      }
    }
  }
};

/// All-zero coefficient set: the Heisenberg truncation of the normal form.
inline NormalFormCoefficients heisenberg() { return NormalFormCoefficients{}; }

/// gamma = gamma^2 + gamma^3 + gamma^4 + extra terms, assembled term by term
/// from the displayed graded decomposition.
inline TriPoly gamma_polynomial(const NormalFormCoefficients& c) {
  std::vector<Monomial> t;
  // gamma^2 = (c0+c2)(x^2+y^2) + (c0-c2)(x^2-y^2) - 2 c1 xy
  t.push_back({2, 0, 0, (c.c0 + c.c2) + (c.c0 - c.c2)});
  t.push_back({0, 2, 0, (c.c0 + c.c2) - (c.c0 - c.c2)});
  t.push_back({1, 1, 0, -2.0 * c.c1});
  // gamma^3 = (c11 x + c12 y)(x^2+y^2) + 3(c31 x - c32 y)(x^2-y^2)
  //           - 2(c31 x^3 + c32 y^3)
  t.push_back({3, 0, 0, c.c11 + 3.0 * c.c31 - 2.0 * c.c31});
  t.push_back({1, 2, 0, c.c11 - 3.0 * c.c31});
  t.push_back({2, 1, 0, c.c12 - 3.0 * c.c32});
  t.push_back({0, 3, 0, c.c12 + 3.0 * c.c32 - 2.0 * c.c32});
  // gamma^4 = w/2 [ (c421+c422)(x^2+y^2) + (c421-c422)(x^2-y^2) - 2 c423 xy ]
  //           + c441 (x^2+y^2)^2 + c442 (x^4+y^4-6x^2y^2)
  //           + 4 c443 xy(x^2-y^2) + c444 (x^4-y^4) - 2 c445 xy(x^2+y^2)
  t.push_back({2, 0, 1, 0.5 * ((c.c421 + c.c422) + (c.c421 - c.c422))});
  t.push_back({0, 2, 1, 0.5 * ((c.c421 + c.c422) - (c.c421 - c.c422))});
  t.push_back({1, 1, 1, -c.c423});
  t.push_back({4, 0, 0, c.c441 + c.c442 + c.c444});
  t.push_back({0, 4, 0, c.c441 + c.c442 - c.c444});
  t.push_back({2, 2, 0, 2.0 * c.c441 - 6.0 * c.c442});
  t.push_back({3, 1, 0, 4.0 * c.c443 - 2.0 * c.c445});
  t.push_back({1, 3, 0, -4.0 * c.c443 - 2.0 * c.c445});
  t.insert(t.end(), c.gamma_extra.begin(), c.gamma_extra.end());
  return TriPoly(std::move(t));
}

inline TriPoly beta_polynomial(const NormalFormCoefficients& c) {
  return TriPoly(c.beta_terms);
}

inline double eval_gamma(const NormalFormCoefficients& c,
                         const std::array<double, 3>& pt) {
  return gamma_polynomial(c)(pt[0], pt[1], pt[2]);
}

inline double eval_beta(const NormalFormCoefficients& c,
                        const std::array<double, 3>& pt) {
  return beta_polynomial(c)(pt[0], pt[1], pt[2]);
}

/// Orthonormal frame values at a point, components in (dx, dy, dw) order.
struct FramePair {
  std::array<double, 3> X1;
  std::array<double, 3> X2;
};

/// X1 = (1 + y^2 b) dx - xy b dy + (y/2)(1 + g) dw
/// X2 = -xy b dx + (1 + x^2 b) dy - (x/2)(1 + g) dw
inline FramePair eval_frame(const NormalFormCoefficients& c,
                            const std::array<double, 3>& pt) {
  const double x = pt[0], y = pt[1], w = pt[2];
  const double b = eval_beta(c, pt);
  const double g = eval_gamma(c, pt);
  FramePair f;
  f.X1 = {1.0 + y * y * b, -x * y * b, 0.5 * y * (1.0 + g)};
  f.X2 = {-x * y * b, 1.0 + x * x * b, -0.5 * x * (1.0 + g)};
  return f;
}

/// Compiled evaluator for the frame components and their first partials.
///
/// All 24 polynomials (6 components, 18 partials) are differentiated exactly
/// at construction and flattened into one term array evaluated with shared
/// power tables, which is what the flow integrator hits in its inner loop.
class FrameModel {
 public:
  static constexpr int kMaxPower = 64;

  struct Eval {
    // Component order: X1x, X1y, X1w, X2x, X2y, X2w.
    std::array<double, 6> comp;
    // grad[c][a]: d(comp c)/d(axis a), axes (x, y, w).
    std::array<std::array<double, 3>, 6> grad;
  };

  explicit FrameModel(NormalFormCoefficients coeffs) : coeffs_(std::move(coeffs)) {
    coeffs_.validate();
    const TriPoly beta = beta_polynomial(coeffs_);
    const TriPoly gamma = gamma_polynomial(coeffs_);

    std::array<TriPoly, 6> comp;
    comp[0] = TriPoly::constant(1.0).plus(beta.shifted(0, 2, 0));   // X1x
    comp[1] = beta.shifted(1, 1, 0).scaled(-1.0);                   // X1y
    comp[2] = TriPoly::monomial(0, 1, 0, 0.5)
                  .plus(gamma.shifted(0, 1, 0).scaled(0.5));        // X1w
    comp[3] = comp[1];                                              // X2x
    comp[4] = TriPoly::constant(1.0).plus(beta.shifted(2, 0, 0));   // X2y
    comp[5] = TriPoly::monomial(1, 0, 0, -0.5)
                  .plus(gamma.shifted(1, 0, 0).scaled(-0.5));       // X2w

    std::array<TriPoly, 24> slots;
    for (int c = 0; c < 6; ++c) {
      slots[c] = comp[c];
      slots[6 + 3 * c + 0] = comp[c].dx();
      slots[6 + 3 * c + 1] = comp[c].dy();
      slots[6 + 3 * c + 2] = comp[c].dw();
    }

    max_i_ = max_j_ = max_k_ = 0;
    offsets_[0] = 0;
    for (int s = 0; s < 24; ++s) {
      for (const Monomial& m : slots[s].terms()) {
        terms_.push_back(m);
        max_i_ = std::max(max_i_, m.i);
        max_j_ = std::max(max_j_, m.j);
        max_k_ = std::max(max_k_, m.k);
      }
      offsets_[s + 1] = static_cast<int>(terms_.size());
    }
    if (max_i_ >= kMaxPower || max_j_ >= kMaxPower || max_k_ >= kMaxPower) {
      throw ConfigError("monomial degree too large for the frame evaluator");
    }
  }

  const NormalFormCoefficients& coefficients() const { return coeffs_; }

  void eval(double x, double y, double w, Eval& out) const {
    double px[kMaxPower], py[kMaxPower], pw[kMaxPower];
    px[0] = py[0] = pw[0] = 1.0;
    for (int e = 1; e <= max_i_; ++e) px[e] = px[e - 1] * x;
    for (int e = 1; e <= max_j_; ++e) py[e] = py[e - 1] * y;
    for (int e = 1; e <= max_k_; ++e) pw[e] = pw[e - 1] * w;

    double acc[24];
    for (int s = 0; s < 24; ++s) {
      double v = 0.0;
      for (int t = offsets_[s]; t < offsets_[s + 1]; ++t) {
        const Monomial& m = terms_[t];
        v += m.coeff * px[m.i] * py[m.j] * pw[m.k];
      }
      acc[s] = v;
    }
    for (int c = 0; c < 6; ++c) {
      out.comp[c] = acc[c];
      out.grad[c] = {acc[6 + 3 * c], acc[6 + 3 * c + 1], acc[6 + 3 * c + 2]};
    }
  }

 private:
  NormalFormCoefficients coeffs_;
  std::vector<Monomial> terms_;
  std::array<int, 25> offsets_{};
  int max_i_ = 0, max_j_ = 0, max_k_ = 0;
};

}  // namespace subcaustic
