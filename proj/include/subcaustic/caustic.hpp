#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "subcaustic/errors.hpp"
#include "subcaustic/flow.hpp"

namespace subcaustic {

struct CausticSettings {
  // conjugate-time search window, in units of 2*pi/|r|
  double bracket_lo = 0.7;
  double bracket_hi = 1.3;
  double tau_rel_tol = 1e-12;  // bisection stop (tighter than the 1e-10 contract)
  // cusp detection
  double theta_speed = 0.05;                      // speed dip vs median
  double tangent_reversal = std::numbers::pi / 2;  // min turn across the dip
  int tangent_offset = 4;                         // chord length in grid steps
  double collapse_diameter = 1e-9;                // point-like slice guard
  // crossings and symbols
  int tol_merge_steps = 3;  // crossing dedup radius, in segments of arclength
  int tol_cusp_steps = 2;   // passage-to-cusp ambiguity guard
  // slice radius solve
  int secant_max_iter = 50;
  double tol_w_rel = 1e-11;
  double max_fail_fraction = 0.01;
  int threads = 0;  // 0: hardware concurrency
  int chunk = 32;   // fixed work unit so results are thread-count independent
};

namespace detail {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0.0 ? a + kTwoPi : a;
}

inline double circ_dist(double a, double b) {
  const double d = std::abs(wrap_angle(a) - wrap_angle(b));
  return std::min(d, kTwoPi - d);
}

/// First zero of det(dE) in [lo, hi] (units of the period), or nullopt.
inline std::optional<double> first_det_zero(const ConjugateBundle& bundle, double lo,
                                            double hi, double rel_tol) {
  const double dt = bundle.node_time(1) - bundle.node_time(0);
  const double t_lo = lo, t_hi = std::min(hi, bundle.t_max());
  int i0 = std::max(1, static_cast<int>(std::ceil(t_lo / dt)));
  int i1 = std::min(bundle.steps(), static_cast<int>(std::floor(t_hi / dt)));
  if (i0 >= i1) return std::nullopt;
  double prev = bundle.det_at_node(i0);
  for (int i = i0 + 1; i <= i1; ++i) {
    const double cur = bundle.det_at_node(i);
    if (prev == 0.0) return bundle.node_time(i - 1);
    if ((prev < 0.0) != (cur < 0.0)) {
      double a = bundle.node_time(i - 1), b = bundle.node_time(i);
      double fa = prev;
      for (int it = 0; it < 80 && (b - a) > rel_tol * b; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = bundle.det_at(m);
        if (fm == 0.0) return m;
        if ((fa < 0.0) == (fm < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      return 0.5 * (a + b);
    }
    prev = cur;
  }
  return std::nullopt;
}

struct ConjugateSolveResult {
  double tau;
  Vec3 point;
};

/// Conjugate time plus point for one (phi, r), expanding the bracket when the
/// default window misses the sign change.
inline ConjugateSolveResult conjugate_solve(const FrameModel& model, double phi,
                                            double r, const IntegratorSettings& iset,
                                            const CausticSettings& cset,
                                            double hint_lo = 0.0, double hint_hi = 0.0) {
  const double period = kTwoPi / std::abs(r);
  struct Window {
    double lo, hi;
  };
  std::vector<Window> windows;
  if (hint_hi > hint_lo && hint_lo > 0.0) windows.push_back({hint_lo, hint_hi});
  windows.push_back({cset.bracket_lo, cset.bracket_hi});
  windows.push_back({0.5, 2.0});
  windows.push_back({0.3, 3.0});
  for (const Window& w : windows) {
    const ConjugateBundle bundle(model, phi, r, w.hi * period * 1.02, iset);
    if (bundle.energy_drift() > 10.0 * iset.tol_energy) {
      throw StepFailure("energy drift in conjugate bundle");
    }
    const auto zero =
        first_det_zero(bundle, w.lo * period, w.hi * period, cset.tau_rel_tol);
    if (zero) {
      return {*zero, bundle.position_at(*zero)};
    }
  }
  throw NoBracket("no det sign change in expanded window (|r| too small?)");
}

}  // namespace detail

/// First conjugate time of the geodesic with covector (cos phi, sin phi, r).
inline double conjugate_time(const FrameModel& model, double phi, double r,
                             const IntegratorSettings& iset = {},
                             const CausticSettings& cset = {}) {
  if (r == 0.0) throw SolveFailure("conjugate_time requires r != 0");
  return detail::conjugate_solve(model, phi, r, iset, cset).tau;
}

inline double conjugate_time(const NormalFormCoefficients& c, double phi, double r,
                             const IntegratorSettings& iset = {},
                             const CausticSettings& cset = {}) {
  return conjugate_time(FrameModel(c), phi, r, iset, cset);
}

/// Transversal self-intersection of a slice: the two passage angles and the
/// crossing point; seg_a/seg_b are the polyline segments that met.
struct Crossing {
  double phi_a = 0.0;
  double phi_b = 0.0;
  std::array<double, 2> point{0.0, 0.0};
  int seg_a = 0;
  int seg_b = 0;
};

/// Horizontal slice of one semi-caustic at height w = side * pi * h^2.
struct CausticSlice {
  double h = 0.0;
  int side = +1;  // +1 upper (w > 0), -1 lower
  std::vector<double> phis;
  std::vector<std::array<double, 2>> points;
  std::vector<double> r_values;
  std::vector<double> tau_values;
  std::vector<double> cusp_angles;
  std::vector<Crossing> crossings;
  std::vector<int> failed_indices;  // interpolated samples (secant misses)
};

namespace detail {

struct SlicePointResult {
  std::array<double, 2> xy;
  double r;
  double tau;
};

struct WarmStart {
  bool valid = false;
  double r;
  double tau_ratio;  // tau * |r| / (2 pi)
};

/// Secant in r at fixed phi driving the conjugate point's w to its target.
inline SlicePointResult solve_slice_point(const FrameModel& model, double h, int side,
                                          double phi, const IntegratorSettings& iset,
                                          const CausticSettings& cset,
                                          WarmStart& warm) {
  const double target = side * std::numbers::pi * h * h;
  const double tol_w = std::max(cset.tol_w_rel * std::abs(target), 1e-15);
  const double r_base = side / h;

  double ratio = warm.valid ? warm.tau_ratio : 0.0;
  const auto eval = [&](double r) {
    double lo = 0.0, hi = 0.0;
    if (ratio > 0.0) {
      lo = ratio - 0.05;
      hi = ratio + 0.05;
    }
    const auto res = conjugate_solve(model, phi, r, iset, cset, lo, hi);
    ratio = res.tau * std::abs(r) / kTwoPi;
    return res;
  };

  double r0 = warm.valid ? warm.r : r_base;
  double r1 = r0 * (warm.valid ? 1.0 + 1e-4 : 1.01);
  const double r_min = 0.3 * std::abs(r_base), r_max = 3.0 * std::abs(r_base);
  const auto clamp_r = [&](double r) {
    return side * std::clamp(std::abs(r), r_min, r_max);
  };

  ConjugateSolveResult s0 = eval(r0);
  double g0 = s0.point[2] - target;
  if (std::abs(g0) <= tol_w) {
    warm = {true, r0, ratio};
    return {{s0.point[0], s0.point[1]}, r0, s0.tau};
  }
  ConjugateSolveResult s1 = eval(r1);
  double g1 = s1.point[2] - target;
  for (int it = 0; it < cset.secant_max_iter; ++it) {
    if (std::abs(g1) <= tol_w) {
      warm = {true, r1, ratio};
      return {{s1.point[0], s1.point[1]}, r1, s1.tau};
    }
    double r2;
    if (g1 == g0) {
      r2 = clamp_r(r1 * 1.001);
    } else {
      r2 = clamp_r(r1 - g1 * (r1 - r0) / (g1 - g0));
    }
    r0 = r1;
    g0 = g1;
    s0 = s1;
    r1 = r2;
    s1 = eval(r1);
    g1 = s1.point[2] - target;
  }
  throw SolveFailure("slice secant did not converge in " +
                     std::to_string(cset.secant_max_iter) + " iterations");
}

template <typename Fn>
void run_chunked(int n, int chunk, int threads, Fn&& per_chunk) {
  const int n_chunks = (n + chunk - 1) / chunk;
  int hw = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  hw = std::max(1, std::min(hw, n_chunks));
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const auto worker = [&] {
    for (;;) {
      const int idx = next.fetch_add(1);
      if (idx >= n_chunks) return;
      try {
        per_chunk(idx * chunk, std::min(n, (idx + 1) * chunk));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (hw == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(hw);
    for (int i = 0; i < hw; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

/// Sample the slice curve (x, y)(phi) without cusp/crossing detection.
/// Work is chunked in fixed blocks so output bits do not depend on the
/// thread count; within a block consecutive angles warm-start each other.
inline CausticSlice sample_slice(const FrameModel& model, double h, int side,
                                 const std::vector<double>& phis,
                                 const IntegratorSettings& iset = {},
                                 const CausticSettings& cset = {}) {
  if (!(h > 0.0)) throw ConfigError("slice requires h > 0");
  if (side != 1 && side != -1) throw ConfigError("side must be +1 or -1");
  const int n = static_cast<int>(phis.size());
  CausticSlice out;
  out.h = h;
  out.side = side;
  out.phis = phis;
  out.points.assign(n, {0.0, 0.0});
  out.r_values.assign(n, 0.0);
  out.tau_values.assign(n, 0.0);
  std::vector<char> failed(n, 0);

  detail::run_chunked(n, cset.chunk, cset.threads, [&](int begin, int end) {
    detail::WarmStart warm;
    for (int i = begin; i < end; ++i) {
      try {
        const auto res =
            detail::solve_slice_point(model, h, side, phis[i], iset, cset, warm);
        out.points[i] = res.xy;
        out.r_values[i] = res.r;
        out.tau_values[i] = res.tau;
      } catch (const std::exception&) {
        warm.valid = false;
        try {  // one cold retry
          detail::WarmStart cold;
          const auto res =
              detail::solve_slice_point(model, h, side, phis[i], iset, cset, cold);
          out.points[i] = res.xy;
          out.r_values[i] = res.r;
          out.tau_values[i] = res.tau;
        } catch (const std::exception&) {
          failed[i] = 1;
        }
      }
    }
  });

  int n_failed = 0;
  for (int i = 0; i < n; ++i) n_failed += failed[i];
  if (n_failed > cset.max_fail_fraction * n) {
    throw SliceFailure("slice solve failed at " + std::to_string(n_failed) + " of " +
                       std::to_string(n) + " grid angles");
  }
  for (int i = 0; i < n; ++i) {
    if (!failed[i]) continue;
    out.failed_indices.push_back(i);
    int prev = (i + n - 1) % n, next = (i + 1) % n;
    while (failed[prev]) prev = (prev + n - 1) % n;
    while (failed[next]) next = (next + 1) % n;
    for (int a = 0; a < 2; ++a) {
      out.points[i][a] = 0.5 * (out.points[prev][a] + out.points[next][a]);
    }
    out.r_values[i] = 0.5 * (out.r_values[prev] + out.r_values[next]);
    out.tau_values[i] = 0.5 * (out.tau_values[prev] + out.tau_values[next]);
  }
  return out;
}

/// Cusp angles of a sampled closed curve: local minima of the discrete speed
/// below theta_speed * median with a tangent reversal of at least
/// tangent_reversal across the dip. Point-like slices report no cusps.
inline std::vector<double> detect_cusps(CausticSlice& slice,
                                        const CausticSettings& cset = {}) {
  const int n = static_cast<int>(slice.points.size());
  const auto& pts = slice.points;
  double min_x = pts[0][0], max_x = pts[0][0], min_y = pts[0][1], max_y = pts[0][1];
  for (const auto& p : pts) {
    min_x = std::min(min_x, p[0]);
    max_x = std::max(max_x, p[0]);
    min_y = std::min(min_y, p[1]);
    max_y = std::max(max_y, p[1]);
  }
  if (std::hypot(max_x - min_x, max_y - min_y) <= cset.collapse_diameter) {
    slice.cusp_angles.clear();
    return slice.cusp_angles;
  }

  const double dphi = detail::kTwoPi / n;
  std::vector<double> speed(n);
  for (int i = 0; i < n; ++i) {
    const auto& a = pts[(i + n - 1) % n];
    const auto& b = pts[(i + 1) % n];
    speed[i] = std::hypot(b[0] - a[0], b[1] - a[1]) / (2.0 * dphi);
  }
  std::vector<double> tmp = speed;
  std::nth_element(tmp.begin(), tmp.begin() + n / 2, tmp.end());
  const double median = tmp[n / 2];

  const int k = std::max(1, cset.tangent_offset);
  std::vector<int> candidates;
  for (int i = 0; i < n; ++i) {
    const double s = speed[i];
    if (s >= cset.theta_speed * median) continue;
    if (s > speed[(i + n - 1) % n] || s > speed[(i + 1) % n]) continue;
    const auto& pm = pts[(i + n - k) % n];
    const auto& p0 = pts[i];
    const auto& pp = pts[(i + k) % n];
    const double t1x = p0[0] - pm[0], t1y = p0[1] - pm[1];
    const double t2x = pp[0] - p0[0], t2y = pp[1] - p0[1];
    const double n1 = std::hypot(t1x, t1y), n2 = std::hypot(t2x, t2y);
    if (n1 == 0.0 || n2 == 0.0) continue;
    const double cosang = std::clamp((t1x * t2x + t1y * t2y) / (n1 * n2), -1.0, 1.0);
    if (std::acos(cosang) < cset.tangent_reversal) continue;
    candidates.push_back(i);
  }

  // Merge plateau candidates within the chord length, keeping the deepest dip.
  std::vector<int> kept;
  for (int idx : candidates) {
    if (!kept.empty()) {
      const int d = idx - kept.back();
      if (d <= k || (n - d) <= k) {
        if (speed[idx] < speed[kept.back()]) kept.back() = idx;
        continue;
      }
    }
    kept.push_back(idx);
  }
  if (kept.size() >= 2) {  // wraparound merge
    const int d = kept.front() + n - kept.back();
    if (d <= k) {
      if (speed[kept.back()] < speed[kept.front()]) kept.front() = kept.back();
      kept.pop_back();
    }
  }

  std::vector<double> angles;
  angles.reserve(kept.size());
  for (int idx : kept) {
    const double sm = speed[(idx + n - 1) % n], s0 = speed[idx], sp = speed[(idx + 1) % n];
    const double denom = sm - 2.0 * s0 + sp;
    double delta = 0.0;
    if (denom > 0.0) delta = std::clamp(0.5 * (sm - sp) / denom, -0.5, 0.5);
    angles.push_back(detail::wrap_angle(slice.phis[idx] + delta * dphi));
  }
  std::sort(angles.begin(), angles.end());
  const int count = static_cast<int>(angles.size());
  if (count != 4 && count != 6) throw CuspCountUnexpected(count);
  slice.cusp_angles = angles;
  return slice.cusp_angles;
}

/// All transversal self-intersections of the closed polyline, deduplicated
/// within tol_merge_steps segments of arclength on both branches.
inline std::vector<Crossing> detect_self_intersections(CausticSlice& slice,
                                                       const CausticSettings& cset = {}) {
  const int n = static_cast<int>(slice.points.size());
  const auto& pts = slice.points;
  const double dphi = detail::kTwoPi / n;

  double min_x = pts[0][0], max_x = pts[0][0], min_y = pts[0][1], max_y = pts[0][1];
  for (const auto& p : pts) {
    min_x = std::min(min_x, p[0]);
    max_x = std::max(max_x, p[0]);
    min_y = std::min(min_y, p[1]);
    max_y = std::max(max_y, p[1]);
  }
  if (std::hypot(max_x - min_x, max_y - min_y) <= cset.collapse_diameter) {
    slice.crossings.clear();
    return slice.crossings;
  }

  std::vector<std::array<double, 4>> boxes(n);  // minx, maxx, miny, maxy
  for (int i = 0; i < n; ++i) {
    const auto& a = pts[i];
    const auto& b = pts[(i + 1) % n];
    boxes[i] = {std::min(a[0], b[0]), std::max(a[0], b[0]), std::min(a[1], b[1]),
                std::max(a[1], b[1])};
  }

  const auto orient = [](const std::array<double, 2>& a, const std::array<double, 2>& b,
                         const std::array<double, 2>& c) {
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
  };

  std::vector<Crossing> raw;
  for (int i = 0; i < n; ++i) {
    const auto& p1 = pts[i];
    const auto& p2 = pts[(i + 1) % n];
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // cyclically adjacent
      if (boxes[i][0] > boxes[j][1] || boxes[j][0] > boxes[i][1] ||
          boxes[i][2] > boxes[j][3] || boxes[j][2] > boxes[i][3]) {
        continue;
      }
      const auto& q1 = pts[j];
      const auto& q2 = pts[(j + 1) % n];
      const double o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
      if ((o1 < 0.0) == (o2 < 0.0) || o1 == 0.0 || o2 == 0.0) continue;
      const double o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
      if ((o3 < 0.0) == (o4 < 0.0) || o3 == 0.0 || o4 == 0.0) continue;
      const double u = o3 / (o3 - o4);  // parameter along segment i
      const double v = o1 / (o1 - o2);  // parameter along segment j
      Crossing c;
      c.seg_a = i;
      c.seg_b = j;
      c.phi_a = detail::wrap_angle((i + u) * dphi);
      c.phi_b = detail::wrap_angle((j + v) * dphi);
      c.point = {p1[0] + u * (p2[0] - p1[0]), p1[1] + u * (p2[1] - p1[1])};
      raw.push_back(c);
    }
  }

  // Deduplicate crossing points within tol_merge_steps grid spacings of
  // arclength; coincident crossings (a rose through the origin) collapse to
  // one entry that keeps the first detection's branch angles.
  double total_len = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& a = pts[i];
    const auto& b = pts[(i + 1) % n];
    total_len += std::hypot(b[0] - a[0], b[1] - a[1]);
  }
  const double tol_dist = cset.tol_merge_steps * total_len / n;
  std::vector<Crossing> merged;
  std::vector<int> cluster_size;
  for (const Crossing& c : raw) {
    bool placed = false;
    for (std::size_t m = 0; m < merged.size(); ++m) {
      if (std::hypot(c.point[0] - merged[m].point[0],
                     c.point[1] - merged[m].point[1]) <= tol_dist) {
        const double w = 1.0 / (cluster_size[m] + 1.0);
        merged[m].point[0] += w * (c.point[0] - merged[m].point[0]);
        merged[m].point[1] += w * (c.point[1] - merged[m].point[1]);
        ++cluster_size[m];
        placed = true;
        break;
      }
    }
    if (!placed) {
      merged.push_back(c);
      cluster_size.push_back(1);
    }
  }
  std::sort(merged.begin(), merged.end(), [](const Crossing& a, const Crossing& b) {
    return std::tie(a.phi_a, a.phi_b) < std::tie(b.phi_a, b.phi_b);
  });
  slice.crossings = merged;
  return slice.crossings;
}

/// Six-tuple of half-integers stored doubled: entry i is the number of
/// crossing passages on the arc between consecutive cusp angles i and i+1.
struct Symbol {
  std::array<int, 6> doubled{0, 0, 0, 0, 0, 0};

  std::array<double, 6> halves() const {
    std::array<double, 6> h;
    for (int i = 0; i < 6; ++i) h[i] = 0.5 * doubled[i];
    return h;
  }
  int crossings() const {
    int s = 0;
    for (int d : doubled) s += d;
    return s / 2;
  }
  friend bool operator==(const Symbol&, const Symbol&) = default;
  friend auto operator<=>(const Symbol& a, const Symbol& b) {
    return a.doubled <=> b.doubled;
  }
};

/// Lexicographically minimal tuple over the 12 dihedral relabelings
/// (6 rotations x 2 orientations); the paper fixes no starting cusp.
inline Symbol canonical_symbol(const Symbol& s) {
  Symbol best = s;
  for (int rot = 0; rot < 6; ++rot) {
    for (int refl = 0; refl < 2; ++refl) {
      Symbol cand;
      for (int i = 0; i < 6; ++i) {
        const int src = refl ? (rot + 6 - i) % 6 : (rot + i) % 6;
        cand.doubled[i] = s.doubled[src];
      }
      if (cand < best) best = cand;
    }
  }
  return best;
}

/// The seven symbols of the classification, entries doubled.
inline const std::vector<std::pair<std::string, Symbol>>& symbol_table() {
  static const std::vector<std::pair<std::string, Symbol>> table = {
      {"S1", Symbol{{0, 2, 2, 2, 2, 2}}}, {"S2", Symbol{{4, 2, 2, 2, 2, 2}}},
      {"S3", Symbol{{4, 2, 2, 4, 2, 0}}}, {"S4", Symbol{{1, 1, 2, 0, 0, 2}}},
      {"S5", Symbol{{2, 1, 1, 2, 2, 2}}}, {"S6", Symbol{{3, 1, 2, 2, 0, 2}}},
      {"S7", Symbol{{4, 1, 1, 4, 0, 0}}}};
  return table;
}

/// Name of the symbol matching s up to dihedral relabeling, if any.
inline std::optional<std::string> symbol_name(const Symbol& s) {
  const Symbol c = canonical_symbol(s);
  for (const auto& [name, sym] : symbol_table()) {
    if (canonical_symbol(sym) == c) return name;
  }
  return std::nullopt;
}

/// Count crossing passages per arc between consecutive cusps; entries are the
/// passage counts, i.e. twice the half-integer symbol entries.
inline Symbol extract_symbol(const CausticSlice& slice, const CausticSettings& cset = {}) {
  if (slice.cusp_angles.size() != 6) {
    throw CuspCountUnexpected(static_cast<int>(slice.cusp_angles.size()));
  }
  const int n = static_cast<int>(slice.points.size());
  const double tol = cset.tol_cusp_steps * detail::kTwoPi / n;
  const auto& cusps = slice.cusp_angles;  // sorted

  Symbol sym;
  for (const Crossing& c : slice.crossings) {
    for (double phi : {c.phi_a, c.phi_b}) {
      for (int i = 0; i < 6; ++i) {
        if (detail::circ_dist(phi, cusps[i]) < tol) {
          throw PassageOnCusp("crossing passage within tolerance of a cusp angle");
        }
      }
      // arc i spans [cusps[i], cusps[i+1]) cyclically; arc 5 wraps
      int arc = 5;
      for (int i = 0; i < 5; ++i) {
        if (phi >= cusps[i] && phi < cusps[i + 1]) {
          arc = i;
          break;
        }
      }
      sym.doubled[arc] += 1;
    }
  }
  return sym;
}

/// Slice of the semi-caustic at w = side * pi * h^2 on a uniform n-point
/// phi grid, with cusps and crossings detected.
inline CausticSlice slice(const FrameModel& model, double h, int side, int n_grid,
                          const IntegratorSettings& iset = {},
                          const CausticSettings& cset = {}) {
  if (n_grid < 512) throw ConfigError("slice requires n_grid >= 512");
  std::vector<double> phis(n_grid);
  for (int i = 0; i < n_grid; ++i) phis[i] = detail::kTwoPi * i / n_grid;
  CausticSlice s = sample_slice(model, h, side, phis, iset, cset);
  detect_cusps(s, cset);
  detect_self_intersections(s, cset);
  return s;
}

inline CausticSlice slice(const NormalFormCoefficients& c, double h, int side,
                          int n_grid, const IntegratorSettings& iset = {},
                          const CausticSettings& cset = {}) {
  return slice(FrameModel(c), h, side, n_grid, iset, cset);
}

/// Maxwell-point search result; found == false means no meet was located and
/// t falls back to the conjugate time.
struct CutEstimate {
  double t = 0.0;
  bool found = false;
  double phi_partner = 0.0;
  double r_partner = 0.0;
};

struct CutSearchWindow {
  std::vector<double> phi_offsets = {std::numbers::pi, 2.0, -2.0, 1.0, -1.0};
  double t_start_fraction = 0.9;  // of the conjugate time
  int max_newton_iter = 40;
  double tol = 1e-10;
};

/// Earliest t <= tau_conj at which another geodesic (phi', r') reaches the
/// same point at the same time, by damped Gauss-Newton on the meet system
/// E(t, phi', r') - E(t, phi, r) = 0 from several starts.
inline CutEstimate cut_time_estimate(const FrameModel& model, double phi, double r,
                                     const CutSearchWindow& window = {},
                                     const IntegratorSettings& iset = {},
                                     const CausticSettings& cset = {}) {
  if (r == 0.0) throw SolveFailure("cut_time_estimate requires r != 0");
  const double tau_conj = conjugate_time(model, phi, r, iset, cset);
  const double period = detail::kTwoPi / std::abs(r);
  const int n_base = detail::step_count(1.05 * tau_conj, r, iset, 0);
  const DenseTrajectory base(model, to_vec(initial_covector(phi, r)), 1.05 * tau_conj,
                             n_base);

  const auto base_pos = [&](double t) {
    const Vec6 y = base.state_at(t);
    return Vec3{y[0], y[1], y[2]};
  };

  CutEstimate best{tau_conj, false, phi, r};
  for (double dphi0 : window.phi_offsets) {
    Eigen::Vector3d u(window.t_start_fraction * tau_conj, phi + dphi0, r);
    double prev_norm = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int it = 0; it < window.max_newton_iter; ++it) {
      const double t = u(0);
      if (!(t > 1e-3 * period) || t > 1.5 * tau_conj) break;
      const Vec3 ep = exp_map(model, t, u(1), u(2), iset);
      const Vec3 eb = base_pos(t);
      Eigen::Vector3d F(ep[0] - eb[0], ep[1] - eb[1], ep[2] - eb[2]);
      const double fn = F.norm();
      if (fn < window.tol) {
        converged = true;
        break;
      }
      const Mat3 jp = exp_jacobian(model, t, u(1), u(2), iset);
      const Vec6 rhs_b = flow_rhs(model, to_state(base.state_at(t)));
      Eigen::Matrix3d J;
      for (int row = 0; row < 3; ++row) {
        J(row, 0) = jp[row][0] - rhs_b[row];
        J(row, 1) = jp[row][1];
        J(row, 2) = jp[row][2];
      }
      Eigen::Vector3d step = J.colPivHouseholderQr().solve(-F);
      double damp = 1.0;
      if (fn > prev_norm) damp = 0.5;
      u += damp * step;
      prev_norm = fn;
    }
    if (!converged) continue;
    const double t = u(0);
    const double phi_p = detail::wrap_angle(u(1));
    // discard the trivial branch (same covector)
    if (detail::circ_dist(phi_p, phi) < 1e-4 && std::abs(u(2) - r) < 1e-4 * std::abs(r)) {
      continue;
    }
    if (t > 0.0 && t <= tau_conj * (1.0 + 1e-9) && t < best.t) {
      best = {std::min(t, tau_conj), true, phi_p, u(2)};
    }
  }
  // all geodesics meeting exactly at the conjugate time still count as a cut
  if (!best.found) {
    for (double dphi0 : window.phi_offsets) {
      const Vec3 a = exp_map(model, tau_conj, phi + dphi0, r, iset);
      const Vec3 b = base_pos(tau_conj);
      if (std::hypot(a[0] - b[0], a[1] - b[1]) + std::abs(a[2] - b[2]) < 1e-8) {
        best = {tau_conj, true, detail::wrap_angle(phi + dphi0), r};
        break;
      }
    }
  }
  return best;
}

}  // namespace subcaustic
