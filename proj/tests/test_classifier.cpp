#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "subcaustic/classifier.hpp"

using namespace subcaustic;
using std::numbers::pi;

namespace {

bool angle_in(double a, const std::vector<double>& set, double tol) {
  for (double s : set) {
    if (classifier_detail::circ_gap(a, s) <= tol) return true;
  }
  return false;
}

// {2 phi mod 2pi} of the trig zeros must equal the unit-root angles of P~.
bool double_cover_match(const std::vector<double>& phi_zeros,
                        const std::vector<double>& z_angles, double tol) {
  for (double phi : phi_zeros) {
    if (!angle_in(std::fmod(2.0 * phi, 2.0 * pi), z_angles, tol)) return false;
  }
  for (double psi : z_angles) {
    if (!angle_in(0.5 * psi, phi_zeros, tol) &&
        !angle_in(0.5 * psi + pi, phi_zeros, tol)) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("abcd reproduces the displayed coefficient formulas exactly") {
  SECTION("all zero") {
    const AbcdResult r = abcd(NormalFormCoefficients{});
    CHECK(r.A_plus == 0.0);
    CHECK(r.A_minus == 0.0);
    CHECK(r.B_plus == 0.0);
    CHECK(r.B_minus == 0.0);
    CHECK(r.C == 0.0);
    CHECK(r.D == 0.0);
  }
  SECTION("c423 appears as +-3 pi in A and 35/8 in B") {
    NormalFormCoefficients c;
    c.c423 = 1.0;
    const AbcdResult r = abcd(c);
    CHECK(r.A_plus == 3.0 * pi);
    CHECK(r.A_minus == -3.0 * pi);
    CHECK(r.B_plus == 35.0 / 8.0);
    CHECK(r.B_minus == 35.0 / 8.0);
    CHECK(r.C == 0.0);
    CHECK(r.D == 0.0);
  }
  SECTION("c442 −> D = −36, c443 −> C = 36") {
    NormalFormCoefficients c;
    c.c442 = 1.0;
    CHECK(abcd(c).D == -36.0);
    CHECK(abcd(c).C == 0.0);
    c = NormalFormCoefficients{};
    c.c443 = 1.0;
    CHECK(abcd(c).C == 36.0);
    CHECK(abcd(c).D == 0.0);
  }
}

TEST_CASE("b_polar solves b = b~ (sin w, -cos w)") {
  SECTION("omega = 0 axis") {
    const BPolar b = b_polar(0.0, -1.0);
    CHECK(b.b_tilde == 1.0);
    CHECK(b.omega_b == 0.0);
  }
  SECTION("quarter turn") {
    const BPolar b = b_polar(1.0, 0.0);
    CHECK(b.b_tilde == 1.0);
    CHECK_THAT(b.omega_b, Catch::Matchers::WithinRel(pi / 2, 1e-15));
  }
  SECTION("zero vector convention") {
    const BPolar b = b_polar(0.0, 0.0);
    CHECK(b.b_tilde == 0.0);
    CHECK(b.omega_b == 0.0);
  }
  SECTION("round trip on random angles") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> uni(0.0, 2.0 * pi);
    for (int i = 0; i < 50; ++i) {
      const double bt = 0.1 + i * 0.01, om = uni(rng);
      const BPolar b = b_polar(bt * std::sin(om), -bt * std::cos(om));
      CHECK_THAT(b.b_tilde, Catch::Matchers::WithinRel(bt, 1e-12));
      CHECK(classifier_detail::circ_gap(b.omega_b, om) < 1e-12);
    }
  }
}

TEST_CASE("build_polynomials lays out the displayed coefficients") {
  AbcdResult a{};
  a.C = 1.0;  // mu = 1/2
  const PolynomialTriple t = build_polynomials(a, 0.0, 0.0);
  REQUIRE(t.p_plus.coeffs.size() == 5);
  CHECK(t.p_plus.coeffs[0] == Complex{0.5, 0.0});
  CHECK(t.p_plus.coeffs[1] == Complex{0.0, 0.0});
  CHECK(t.p_plus.coeffs[2] == Complex{0.0, 0.0});  // no z^2 term
  CHECK(t.p_plus.coeffs[3] == Complex{0.0, 0.0});
  CHECK(t.p_plus.coeffs[4] == Complex{0.5, 0.0});

  SECTION("self-inversive palindrome for random invariants") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
      AbcdResult r{uni(rng), uni(rng), uni(rng), uni(rng), uni(rng), uni(rng)};
      const PolynomialTriple pt = build_polynomials(r, uni(rng), uni(rng));
      for (const ComplexPoly* p : {&pt.p_plus, &pt.p_minus}) {
        for (int k = 0; k <= 4; ++k) {
          CHECK(p->coeffs[k] == std::conj(p->coeffs[4 - k]));
        }
      }
    }
  }
  SECTION("T~ for b = 1 has unit roots at the cube roots of -1") {
    const PolynomialTriple pt = build_polynomials(AbcdResult{}, 1.0, 0.0);
    const UnitRoots ur = unit_roots(pt.t);
    REQUIRE(ur.angles.size() == 3);
    CHECK_THAT(ur.angles[0], Catch::Matchers::WithinAbs(pi / 3, 1e-12));
    CHECK_THAT(ur.angles[1], Catch::Matchers::WithinAbs(pi, 1e-12));
    CHECK_THAT(ur.angles[2], Catch::Matchers::WithinAbs(5 * pi / 3, 1e-12));
  }
}

TEST_CASE("unit_roots on closed-form cases") {
  SECTION("z^4 = -1") {
    const ComplexPoly p{{Complex{0.5}, {}, {}, {}, Complex{0.5}}};
    const UnitRoots ur = unit_roots(p);
    REQUIRE(ur.angles.size() == 4);
    const double expect[4] = {pi / 4, 3 * pi / 4, 5 * pi / 4, 7 * pi / 4};
    for (int i = 0; i < 4; ++i) {
      CHECK_THAT(ur.angles[i], Catch::Matchers::WithinAbs(expect[i], 1e-12));
    }
    CHECK_FALSE(ur.multiple);
  }
  SECTION("mu = 0 drops to a cubic with two unit roots") {
    const ComplexPoly p{{Complex{0.0}, Complex{0.5}, {}, Complex{0.5}, Complex{0.0}}};
    const UnitRoots ur = unit_roots(p);
    REQUIRE(ur.angles.size() == 2);
    CHECK_THAT(ur.angles[0], Catch::Matchers::WithinAbs(pi / 2, 1e-12));
    CHECK_THAT(ur.angles[1], Catch::Matchers::WithinAbs(3 * pi / 2, 1e-12));
  }
  SECTION("zero polynomial is rejected") {
    CHECK_THROWS_AS(unit_roots(ComplexPoly{{Complex{0.0}, Complex{0.0}}}), AllZero);
  }
}

TEST_CASE("root-count law over random draws") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  int count2 = 0, count4 = 0;
  for (int i = 0; i < 1000; ++i) {
    Complex mu(uni(rng), uni(rng));
    while (std::abs(mu) < 1e-3) mu = Complex(uni(rng), uni(rng));
    const Complex nu(uni(rng), uni(rng));
    const ComplexPoly p{{mu, nu, Complex{0.0}, std::conj(nu), std::conj(mu)}};
    const UnitRoots ur = unit_roots(p);
    const std::size_t n = ur.angles.size();
    REQUIRE((n == 2 || n == 4));
    CHECK_FALSE(ur.multiple);
    (n == 2 ? count2 : count4) += 1;
  }
  CHECK(count2 > 0);
  CHECK(count4 > 0);
}

TEST_CASE("trig_zeros closed forms and agreement with unit roots") {
  SECTION("cos(2 phi)") {
    const auto z = trig_zeros(1.0, 0.0, 0.0, 0.0);
    REQUIRE(z.size() == 4);
    const double expect[4] = {pi / 4, 3 * pi / 4, 5 * pi / 4, 7 * pi / 4};
    for (int i = 0; i < 4; ++i) {
      CHECK_THAT(z[i], Catch::Matchers::WithinAbs(expect[i], 1e-10));
    }
  }
  SECTION("cos(4 phi) has eight zeros") {
    CHECK(trig_zeros(0.0, 0.0, 1.0, 0.0).size() == 8);
  }
  SECTION("all-zero coefficients rejected") {
    CHECK_THROWS_AS(trig_zeros(0.0, 0.0, 0.0, 0.0), AllZero);
  }
  SECTION("double cover of the unit roots, random draws") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      const double A = uni(rng), B = uni(rng), Cc = uni(rng), Dd = uni(rng);
      const Complex mu = 0.5 * Complex(Cc, -Dd);
      const Complex nu = 0.5 * Complex(A, -B);
      if (std::abs(mu) < 1e-3) continue;
      const ComplexPoly p{{mu, nu, Complex{0.0}, std::conj(nu), std::conj(mu)}};
      const auto phi_zeros = trig_zeros(A, B, Cc, Dd);
      const UnitRoots ur = unit_roots(p);
      CHECK(phi_zeros.size() == 2 * ur.angles.size());
      CHECK(double_cover_match(phi_zeros, ur.angles, 1e-8));
    }
  }
}

namespace {

// P~ sharing the unit root e^{i theta} with T~: on the circle the
// self-inversive value z^{-2} P~(z) is real, so the single real condition
// Re(nu z) = -Re(mu z^2) pins nu up to its free imaginary part s.
ComplexPoly shared_root_p(Complex mu, double theta, double s) {
  const Complex z = std::polar(1.0, theta);
  const Complex nu = (Complex(-((mu * z * z).real()), s)) / z;
  return ComplexPoly{{mu, nu, Complex{0.0}, std::conj(nu), std::conj(mu)}};
}

}  // namespace

TEST_CASE("resultant of the Sylvester pencil") {
  std::mt19937 rng(314);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);

  SECTION("vanishes exactly on constructed shared roots") {
    for (int i = 0; i < 100; ++i) {
      const Complex b(uni(rng), uni(rng));
      if (std::abs(b) < 1e-3) continue;
      const ComplexPoly t{{b, {}, {}, std::conj(b)}};
      const UnitRoots troots = unit_roots(t);
      REQUIRE(troots.angles.size() == 3);
      Complex mu(uni(rng), uni(rng));
      while (std::abs(mu) < 1e-3) mu = Complex(uni(rng), uni(rng));
      const ComplexPoly p = shared_root_p(mu, troots.angles[i % 3], uni(rng));
      const double scale =
          std::max({std::abs(mu), std::abs(p.coeffs[1]), std::abs(b)});
      CHECK(std::abs(resultant(p, t)) <= 1e-10 * std::pow(scale, 7));
    }
  }
  SECTION("generic draws stay away from zero and roots stay separated") {
    for (int i = 0; i < 1000; ++i) {
      Complex mu(uni(rng), uni(rng)), b(uni(rng), uni(rng));
      while (std::abs(mu) < 1e-2) mu = Complex(uni(rng), uni(rng));
      while (std::abs(b) < 1e-2) b = Complex(uni(rng), uni(rng));
      const Complex nu(uni(rng), uni(rng));
      const ComplexPoly p{{mu, nu, Complex{0.0}, std::conj(nu), std::conj(mu)}};
      const ComplexPoly t{{b, {}, {}, std::conj(b)}};
      const double res = std::abs(resultant(p, t));
      const double scale = std::max({std::abs(mu), std::abs(nu), std::abs(b)});
      const double gap = classifier_detail::min_shared_gap(
          unit_roots(p).angles, unit_roots(t).angles);
      // both directions: tiny resultant <=> near-coincident unit roots
      if (res <= 1e-8 * std::pow(scale, 7)) {
        CHECK(gap < 1e-4);
      }
      if (gap > 1e-3) {
        CHECK(res > 1e-8 * std::pow(scale, 7));
      }
    }
  }
  SECTION("degree-7 homogeneity") {
    const Complex mu(0.3, -0.7), nu(0.9, 0.4), b(-0.5, 0.6);
    const ComplexPoly p{{mu, nu, Complex{0.0}, std::conj(nu), std::conj(mu)}};
    const ComplexPoly t{{b, {}, {}, std::conj(b)}};
    const Complex base = resultant(p, t);
    for (double lam : {2.0, 3.0}) {
      const ComplexPoly ps{{lam * mu, lam * nu, Complex{0.0}, lam * std::conj(nu),
                            lam * std::conj(mu)}};
      const ComplexPoly ts{{lam * b, {}, {}, lam * std::conj(b)}};
      const Complex scaled = resultant(ps, ts);
      const double lam7 = std::pow(lam, 7);
      CHECK(std::abs(scaled - lam7 * base) <= 1e-12 * std::abs(lam7 * base));
    }
  }
  SECTION("degenerate leading coefficients are rejected") {
    const ComplexPoly p{{Complex{0.0}, Complex{1.0}, {}, Complex{1.0}, Complex{0.0}}};
    const ComplexPoly t{{Complex{1.0}, {}, {}, Complex{1.0}}};
    CHECK_THROWS_AS(resultant(p, t), DegenerateLeadingCoefficient);
    const ComplexPoly p2{{Complex{1.0}, {}, {}, {}, Complex{1.0}}};
    const ComplexPoly t2{{Complex{0.0}, {}, {}, Complex{1.0}}};
    CHECK_THROWS_AS(resultant(p2, t2), DegenerateLeadingCoefficient);
  }
}

TEST_CASE("invariants_to_coefficients inverts the invariant map") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    InvariantTargets t;
    t.mu = Complex(uni(rng), uni(rng));
    t.nu_plus = Complex(uni(rng), uni(rng));
    t.nu_minus = Complex(uni(rng), uni(rng));
    t.b = Complex(uni(rng), uni(rng));
    t.sigma0 = uni(rng);
    t.w_trace = uni(rng);
    const NormalFormCoefficients c = invariants_to_coefficients(t);
    CHECK(c.c0 == c.c2);
    CHECK(c.c1 == 0.0);
    CHECK_THAT(c.c421 + c.c422, Catch::Matchers::WithinAbs(t.w_trace, 1e-12));
    const PolynomialTriple pt = build_polynomials(abcd(c), c.c31, c.c32);
    CHECK_THAT(std::abs(pt.mu - t.mu), Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(std::abs(pt.nu_plus - t.nu_plus), Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(std::abs(pt.nu_minus - t.nu_minus),
               Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK(pt.b == t.b);
  }
}

TEST_CASE("classify regimes") {
  SECTION("off the degenerate curve") {
    NormalFormCoefficients c;
    c.c0 = 1.0;
    CHECK(classify(c).regime == Regime::OFF_C);
  }
  SECTION("all-zero coefficients: on-curve with degenerate b") {
    const ClassifierReport rep = classify(NormalFormCoefficients{});
    CHECK(rep.regime == Regime::ON_C_GENERIC);
    CHECK(rep.degenerate_b);
    CHECK(rep.predicted_family_plus.empty());
  }
  SECTION("two unit roots on both sides predict the S1 family") {
    InvariantTargets t;
    t.mu = Complex(0.05, 0.02);
    t.nu_plus = Complex(0.9, 0.3);
    t.nu_minus = Complex(0.8, -0.4);
    t.b = Complex(0.4, 0.6);
    const ClassifierReport rep = classify(invariants_to_coefficients(t));
    CHECK(rep.regime == Regime::ON_C_GENERIC);
    CHECK_FALSE(rep.non_generic);
    CHECK(rep.predicted_family_plus == std::vector<std::string>{"S1"});
    CHECK(rep.predicted_family_minus == std::vector<std::string>{"S1"});
    CHECK(rep.unit_roots_plus.size() == 2);
    CHECK(rep.t_roots.size() == 3);
    CHECK_FALSE(rep.res_root_mismatch);
  }
  SECTION("four unit roots predict the {S2, S3} family") {
    InvariantTargets t;
    t.mu = Complex(1.0, 0.3);
    t.nu_plus = Complex(0.1, 0.05);
    t.nu_minus = Complex(0.12, -0.02);
    t.b = Complex(0.4, 0.6);
    const ClassifierReport rep = classify(invariants_to_coefficients(t));
    CHECK(rep.predicted_family_plus == std::vector<std::string>{"S2", "S3"});
    CHECK(rep.unit_roots_plus.size() == 4);
  }
  SECTION("constructed shared root on the plus side only") {
    const Complex b(0.3, 0.8);
    const ComplexPoly tpoly{{b, {}, {}, std::conj(b)}};
    const double theta = unit_roots(tpoly).angles[0];
    const Complex mu(0.7, -0.2);
    const ComplexPoly p = shared_root_p(mu, theta, 0.35);
    InvariantTargets t;
    t.mu = mu;
    t.nu_plus = p.coeffs[1];
    t.nu_minus = Complex(0.9, 0.1);  // generic on the minus side
    t.b = b;
    const ClassifierReport rep = classify(invariants_to_coefficients(t));
    CHECK(rep.regime == Regime::ON_C_DEGENERATE_PLUS);
    CHECK_FALSE(rep.non_generic);
    CHECK(rep.predicted_family_plus ==
          std::vector<std::string>{"S4", "S5", "S6", "S7"});
    CHECK((rep.predicted_family_minus == std::vector<std::string>{"S1"} ||
           rep.predicted_family_minus == std::vector<std::string>{"S2", "S3"}));
    CHECK(rep.res_plus_defined);
    CHECK_FALSE(rep.res_root_mismatch);
  }
  SECTION("both sides degenerate is flagged non-generic") {
    const Complex b(0.3, 0.8);
    const ComplexPoly tpoly{{b, {}, {}, std::conj(b)}};
    const auto troots = unit_roots(tpoly).angles;
    const Complex mu(0.7, -0.2);
    InvariantTargets t;
    t.mu = mu;
    t.nu_plus = shared_root_p(mu, troots[0], 0.3).coeffs[1];
    t.nu_minus = shared_root_p(mu, troots[1], -0.6).coeffs[1];
    t.b = b;
    const ClassifierReport rep = classify(invariants_to_coefficients(t));
    CHECK(rep.non_generic);
  }
}

TEST_CASE("classifier dihedral equivariance") {
  std::mt19937 rng(7771);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const auto rotated = [](const NormalFormCoefficients& c, double alpha)
      -> NormalFormCoefficients {
    // spin-s complex packagings multiply by e^{-i s alpha}
    const auto rot = [&](Complex z, int s) { return z * std::polar(1.0, -s * alpha); };
    NormalFormCoefficients out = c;
    const Complex spin1 = rot(Complex(c.c11, -c.c12), 1);
    out.c11 = spin1.real();
    out.c12 = -spin1.imag();
    const Complex b = rot(Complex(c.c31, c.c32), 3);
    out.c31 = b.real();
    out.c32 = b.imag();
    const Complex kappa = rot(Complex(c.c421 - c.c422, c.c423), 2);
    const double trace = c.c421 + c.c422;
    out.c421 = 0.5 * (trace + kappa.real());
    out.c422 = 0.5 * (trace - kappa.real());
    out.c423 = kappa.imag();
    const Complex sigma = rot(Complex(c.c444, c.c445), 2);
    out.c444 = sigma.real();
    out.c445 = sigma.imag();
    const Complex eta = rot(Complex(c.c442, -c.c443), 4);
    out.c442 = eta.real();
    out.c443 = -eta.imag();
    return out;
  };

  for (int trial = 0; trial < 10; ++trial) {
    InvariantTargets t;
    t.mu = Complex(uni(rng), uni(rng));
    t.nu_plus = Complex(uni(rng), uni(rng));
    t.nu_minus = Complex(uni(rng), uni(rng));
    t.b = Complex(0.5 + 0.5 * std::abs(uni(rng)), uni(rng));
    t.sigma0 = uni(rng);
    const NormalFormCoefficients c = invariants_to_coefficients(t);
    const double alpha = 0.35 + 0.1 * trial;
    const NormalFormCoefficients cr = rotated(c, alpha);
    const ClassifierReport a = classify(c);
    const ClassifierReport b = classify(cr);

    CHECK(a.regime == b.regime);
    CHECK(a.predicted_family_plus == b.predicted_family_plus);
    CHECK(a.predicted_family_minus == b.predicted_family_minus);
    CHECK_THAT(std::abs(b.res_plus), Catch::Matchers::WithinRel(std::abs(a.res_plus), 1e-9));
    CHECK_THAT(std::abs(b.res_minus),
               Catch::Matchers::WithinRel(std::abs(a.res_minus), 1e-9));
    REQUIRE(a.unit_roots_plus.size() == b.unit_roots_plus.size());
    // z-space angles rotate by 2 alpha, T~ roots likewise
    for (std::size_t i = 0; i < a.unit_roots_plus.size(); ++i) {
      CHECK(angle_in(a.unit_roots_plus[i] + 2.0 * alpha, b.unit_roots_plus, 1e-8));
    }
    for (std::size_t i = 0; i < a.t_roots.size(); ++i) {
      CHECK(angle_in(a.t_roots[i] + 2.0 * alpha, b.t_roots, 1e-8));
    }
    // phi-space cusp candidates rotate by alpha
    for (std::size_t i = 0; i < a.cusp_angle_candidates.size(); ++i) {
      CHECK(angle_in(a.cusp_angle_candidates[i] + alpha, b.cusp_angle_candidates, 1e-8));
    }
  }
}
