#pragma once

// Brute-force reference implementations used only by tests. Nothing here calls
// into the library's numeric code paths; inputs are plain arrays.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using P3 = std::array<double, 3>;

struct Box {
  P3 lo;
  P3 hi;
};

inline double dist(const P3& a, const P3& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

inline std::vector<double> nearest(const std::vector<P3>& q, const std::vector<P3>& t) {
  std::vector<double> out;
  for (const auto& a : q) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : t) best = std::min(best, dist(a, b));
    out.push_back(best);
  }
  return out;
}

inline double chamfer(const std::vector<P3>& a, const std::vector<P3>& b) {
  double sa = 0, sb = 0;
  for (double d : nearest(a, b)) sa += d;
  for (double d : nearest(b, a)) sb += d;
  return 0.5 * (sa / static_cast<double>(a.size()) + sb / static_cast<double>(b.size()));
}

inline double chamfer_weighted(const std::vector<P3>& a, const std::vector<double>& wa,
                               const std::vector<P3>& b, const std::vector<double>& wb) {
  const auto da = nearest(a, b);
  const auto db = nearest(b, a);
  double sa = 0, sb = 0;
  for (std::size_t i = 0; i < da.size(); ++i) sa += da[i] * wa[i];
  for (std::size_t i = 0; i < db.size(); ++i) sb += db[i] * wb[i];
  return 0.5 * (sa / static_cast<double>(a.size()) + sb / static_cast<double>(b.size()));
}

// Smallest eigenvalue over the trace of the covariance of each point's k
// nearest neighbours (itself included), clamped to [0, 1/3]. Brute-force
// neighbours and the trigonometric closed form for symmetric 3x3 eigenvalues.
inline std::vector<double> curvature(const std::vector<P3>& pts, std::size_t k) {
  std::vector<double> out(pts.size());
  std::vector<std::pair<double, std::size_t>> order(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) order[j] = {dist(pts[i], pts[j]), j};
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k + 1), order.end());
    double m[3] = {0, 0, 0};
    for (std::size_t n = 0; n <= k; ++n)
      for (int c = 0; c < 3; ++c) m[c] += pts[order[n].second][c] / static_cast<double>(k + 1);
    double a[3][3] = {};
    for (std::size_t n = 0; n <= k; ++n) {
      const auto& p = pts[order[n].second];
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) a[r][c] += (p[r] - m[r]) * (p[c] - m[c]);
    }
    const double tr = a[0][0] + a[1][1] + a[2][2];
    const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    double lo;
    if (off == 0.0) {
      lo = std::min({a[0][0], a[1][1], a[2][2]});
    } else {
      const double q = tr / 3.0;
      const double p2 = (a[0][0] - q) * (a[0][0] - q) + (a[1][1] - q) * (a[1][1] - q) + (a[2][2] - q) * (a[2][2] - q) +
                        2.0 * off;
      const double p = std::sqrt(p2 / 6.0);
      double b[3][3];
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) b[r][c] = (a[r][c] - (r == c ? q : 0.0)) / p;
      const double det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                         b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                         b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
      const double phi = std::acos(std::clamp(det / 2.0, -1.0, 1.0)) / 3.0;
      lo = q + 2.0 * p * std::cos(phi + 2.0 * std::acos(-1.0) / 3.0);
    }
    out[i] = tr > 0.0 ? std::clamp(std::max(lo, 0.0) / tr, 0.0, 1.0 / 3.0) : 0.0;
  }
  return out;
}

// 1 + kappa / kappa_max, or all ones for a flat cloud.
inline std::vector<double> curvature_weights(const std::vector<P3>& pts, std::size_t k) {
  auto w = curvature(pts, k);
  const double m = *std::max_element(w.begin(), w.end());
  for (double& v : w) v = m > 0.0 ? 1.0 + v / m : 1.0;
  return w;
}

inline double volume(const Box& b) {
  double v = 1;
  for (int i = 0; i < 3; ++i) v *= std::max(0.0, b.hi[i] - b.lo[i]);
  return v;
}

inline double inter(const Box& a, const Box& b) {
  double v = 1;
  for (int i = 0; i < 3; ++i) {
    const double lo = std::max(a.lo[i], b.lo[i]);
    const double hi = std::min(a.hi[i], b.hi[i]);
    if (hi <= lo) return 0;
    v *= hi - lo;
  }
  return v;
}

inline double iou(const Box& a, const Box& b) {
  const double i = inter(a, b);
  return i / (volume(a) + volume(b) - i);
}

inline double collision_loss(const std::vector<Box>& boxes) {
  double s = 0;
  for (std::size_t i = 0; i < boxes.size(); ++i)
    for (std::size_t j = i + 1; j < boxes.size(); ++j) s += iou(boxes[i], boxes[j]);
  return s;
}

// KL(P||Q) after adding `extra` to every count.
inline double kl(const std::vector<double>& p, const std::vector<double>& q, double extra) {
  double tp = 0, tq = 0;
  for (std::size_t i = 0; i < p.size(); ++i) tp += p[i] + extra, tq += q[i] + extra;
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = (p[i] + extra) / tp, qi = (q[i] + extra) / tq;
    if (pi > 0) s += pi * std::log(pi / qi);
  }
  return s;
}

inline double topk(const std::vector<std::vector<std::string>>& rankings, const std::vector<std::string>& truths,
                   std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    for (std::size_t r = 0; r < rankings[i].size() && r < k; ++r) {
      if (rankings[i][r] == truths[i]) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

// Central difference of f at x along coordinate i.
template <class F>
double central_difference(F&& f, std::vector<double> x, std::size_t i, double h = 1e-5) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double fp = f(x);
  x[i] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2 * h);
}

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
  return std::abs(analytic - numeric) / scale;
}

inline double logistic_loss(double s) { return -std::log(1.0 / (1.0 + std::exp(-s))); }

}  // namespace oracle
