#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <tuple>
#include <vector>

#include "subcaustic/errors.hpp"

namespace subcaustic {

/// One term c * x^i * y^j * w^k of a trivariate polynomial.
struct Monomial {
  int i = 0;
  int j = 0;
  int k = 0;
  double coeff = 0.0;

  /// Order with respect to the (1,1,2) gradation of (x, y, w).
  int graded_order() const { return i + j + 2 * k; }

  friend bool operator==(const Monomial&, const Monomial&) = default;
};

/// Sparse trivariate polynomial with exact coefficient arithmetic on terms.
///
/// Terms are kept sorted by (i, j, k) with duplicates merged, so two
/// polynomials assembled from the same terms compare equal coefficient-wise.
class TriPoly {
 public:
  TriPoly() = default;

  explicit TriPoly(std::vector<Monomial> terms) : terms_(std::move(terms)) {
    normalize();
  }

  static TriPoly constant(double c) {
    return TriPoly({Monomial{0, 0, 0, c}});
  }

  static TriPoly monomial(int i, int j, int k, double c) {
    return TriPoly({Monomial{i, j, k, c}});
  }

  const std::vector<Monomial>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  double operator()(double x, double y, double w) const {
    double acc = 0.0;
    for (const Monomial& m : terms_) {
      acc += m.coeff * ipow(x, m.i) * ipow(y, m.j) * ipow(w, m.k);
    }
    return acc;
  }

  TriPoly plus(const TriPoly& other) const {
    std::vector<Monomial> t = terms_;
    t.insert(t.end(), other.terms_.begin(), other.terms_.end());
    return TriPoly(std::move(t));
  }

  TriPoly scaled(double s) const {
    std::vector<Monomial> t = terms_;
    for (Monomial& m : t) m.coeff *= s;
    return TriPoly(std::move(t));
  }

  /// Multiply by x^di y^dj w^dk.
  TriPoly shifted(int di, int dj, int dk) const {
    std::vector<Monomial> t = terms_;
    for (Monomial& m : t) {
      m.i += di;
      m.j += dj;
      m.k += dk;
    }
    return TriPoly(std::move(t));
  }

  TriPoly dx() const { return derivative(0); }
  TriPoly dy() const { return derivative(1); }
  TriPoly dw() const { return derivative(2); }

  int max_degree(int axis) const {
    int d = 0;
    for (const Monomial& m : terms_) {
      d = std::max(d, axis == 0 ? m.i : axis == 1 ? m.j : m.k);
    }
    return d;
  }

  /// Coefficient of x^i y^j w^k (0 when absent).
  double coefficient(int i, int j, int k) const {
    for (const Monomial& m : terms_) {
      if (m.i == i && m.j == j && m.k == k) return m.coeff;
    }
    return 0.0;
  }

 private:
  static double ipow(double v, int e) {
    double acc = 1.0;
    for (; e > 0; --e) acc *= v;
    return acc;
  }

  TriPoly derivative(int axis) const {
    std::vector<Monomial> t;
    t.reserve(terms_.size());
    for (const Monomial& m : terms_) {
      int e = axis == 0 ? m.i : axis == 1 ? m.j : m.k;
      if (e == 0) continue;
      Monomial d = m;
      d.coeff *= e;
      (axis == 0 ? d.i : axis == 1 ? d.j : d.k) -= 1;
      t.push_back(d);
    }
    return TriPoly(std::move(t));
  }

  void normalize() {
    std::sort(terms_.begin(), terms_.end(), [](const Monomial& a, const Monomial& b) {
      return std::tie(a.i, a.j, a.k) < std::tie(b.i, b.j, b.k);
    });
    std::vector<Monomial> merged;
    merged.reserve(terms_.size());
    for (const Monomial& m : terms_) {
      if (!merged.empty() && merged.back().i == m.i && merged.back().j == m.j &&
          merged.back().k == m.k) {
        merged.back().coeff += m.coeff;
      } else {
        merged.push_back(m);
      }
    }
    std::erase_if(merged, [](const Monomial& m) { return m.coeff == 0.0; });
    terms_ = std::move(merged);
  }

  std::vector<Monomial> terms_;
};

}  // namespace subcaustic
