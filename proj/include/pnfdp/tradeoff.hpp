// Copyright 2026 The pnfdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Trade-off functions f: [0,1] -> [0,1] (type-II error as a function of
// type-I error) and the conversions between f-DP, (eps, delta)-DP and RDP.
//
// A curve is either parametric (Gaussian G_mu, identity) or a piecewise
// linear function given by knots covering [0, 1]. Parametric curves are
// turned into knots with `LowerEnvelope`, which takes the maximum of tangent
// lines and therefore never overstates privacy.

#ifndef PNFDP_TRADEOFF_HPP_
#define PNFDP_TRADEOFF_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "pnfdp/graph_markov.hpp"
#include "pnfdp/normal.hpp"
#include "pnfdp/status.hpp"

namespace pnfdp {

struct Knot {
  double alpha;
  double value;
};

struct EpsDelta {
  double epsilon = 0.0;
  double delta = 0.0;
};

class TradeoffCurve {
 public:
  enum class Kind { kGaussian, kIdentity, kDiscrete };

  static TradeoffCurve Gaussian(double mu) {
    Require(mu >= 0.0 && std::isfinite(mu), "gdp: mu must be finite and >= 0");
    if (mu == 0.0) return Identity();
    TradeoffCurve c;
    c.kind_ = Kind::kGaussian;
    c.mu_ = mu;
    return c;
  }

  static TradeoffCurve Identity() {
    TradeoffCurve c;
    c.kind_ = Kind::kIdentity;
    return c;
  }

  // Knots must start at alpha = 0 and end at alpha = 1; duplicate abscissae
  // keep the smaller value.
  static TradeoffCurve Discrete(std::vector<Knot> knots) {
    TradeoffCurve c;
    c.kind_ = Kind::kDiscrete;
    c.knots_ = Normalize(std::move(knots));
    if (c.knots_.size() < 2 || c.knots_.front().alpha != 0.0 ||
        c.knots_.back().alpha != 1.0) {
      Fail(ErrorCode::kInvalidArgument,
           "discrete curve knots must span alpha in [0, 1]");
    }
    for (const Knot& k : c.knots_) {
      if (!(k.value >= -1e-15 && k.value <= 1.0 + 1e-15)) {
        Fail(ErrorCode::kInvalidArgument, "curve values must lie in [0, 1]");
      }
    }
    return c;
  }

  Kind kind() const { return kind_; }
  double mu() const { return mu_; }
  const std::vector<Knot>& knots() const { return knots_; }

  double operator()(double alpha) const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      Fail(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
    }
    switch (kind_) {
      case Kind::kIdentity:
        return 1.0 - alpha;
      case Kind::kGaussian:
        return GaussianTradeoff(mu_, alpha);
      case Kind::kDiscrete:
        return Interpolate(knots_, alpha);
    }
    return 0.0;
  }

  static double Interpolate(const std::vector<Knot>& knots, double alpha) {
    auto it = std::lower_bound(
        knots.begin(), knots.end(), alpha,
        [](const Knot& k, double a) { return k.alpha < a; });
    if (it == knots.end()) return knots.back().value;
    if (it->alpha == alpha || it == knots.begin()) return it->value;
    const Knot& hi = *it;
    const Knot& lo = *(it - 1);
    const double t = (alpha - lo.alpha) / (hi.alpha - lo.alpha);
    return lo.value + t * (hi.value - lo.value);
  }

  static std::vector<Knot> Normalize(std::vector<Knot> knots) {
    std::sort(knots.begin(), knots.end(), [](const Knot& a, const Knot& b) {
      return a.alpha < b.alpha || (a.alpha == b.alpha && a.value < b.value);
    });
    std::vector<Knot> out;
    out.reserve(knots.size());
    for (const Knot& k : knots) {
      if (!out.empty() && out.back().alpha == k.alpha) continue;
      out.push_back({k.alpha, std::clamp(k.value, 0.0, 1.0)});
    }
    return out;
  }

 private:
  Kind kind_ = Kind::kIdentity;
  double mu_ = 0.0;
  std::vector<Knot> knots_;
};

// Chebyshev-spaced abscissae on [0, 1] (dense near both ends), augmented with
// Gaussian tail points alpha = Phi(-z) for z = 5..37 so that slopes near the
// endpoints are resolved far beyond the Chebyshev spacing.
inline std::vector<double> ChebyshevAlphaGrid(int size = 2049) {
  Require(size >= 2, "grid needs at least 2 points");
  std::vector<double> grid;
  grid.reserve(size + 70);
  for (int k = 0; k < size; ++k) {
    grid.push_back(0.5 * (1.0 - std::cos(std::numbers::pi * k / (size - 1))));
  }
  for (int z = 5; z <= 37; ++z) {
    const double tail = NormalSf(static_cast<double>(z));
    grid.push_back(tail);
    grid.push_back(1.0 - tail);
  }
  grid.front() = 0.0;
  grid.back() = 1.0;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

// Piecewise-linear lower bound of a Gaussian (or identity) curve: the upper
// envelope of tangents at the grid points, floored at zero.
inline TradeoffCurve LowerEnvelope(const TradeoffCurve& curve,
                                   int grid_size = 2049) {
  if (curve.kind() == TradeoffCurve::Kind::kDiscrete) return curve;
  if (curve.kind() == TradeoffCurve::Kind::kIdentity) {
    return TradeoffCurve::Discrete({{0.0, 1.0}, {1.0, 0.0}});
  }
  const double mu = curve.mu();
  struct Line {
    double slope, intercept;
  };
  std::vector<Line> lines;
  for (double a : ChebyshevAlphaGrid(grid_size)) {
    if (a <= 0.0 || a >= 1.0) continue;
    const double z = NormalUpperQuantile(a);
    const double slope = -std::exp(mu * z - 0.5 * mu * mu);
    const double value = NormalCdf(z - mu);
    lines.push_back({slope, value - slope * a});
  }
  lines.push_back({0.0, 0.0});
  // Slopes increase along the grid; keep the upper envelope.
  std::vector<Line> hull;
  auto cross = [](const Line& l1, const Line& l2) {
    return (l2.intercept - l1.intercept) / (l1.slope - l2.slope);
  };
  for (const Line& l : lines) {
    while (!hull.empty() && l.slope <= hull.back().slope) {
      if (l.intercept >= hull.back().intercept) hull.pop_back();
      else goto next;  // dominated (equal slope, lower intercept)
    }
    while (hull.size() >= 2 &&
           cross(hull[hull.size() - 2], l) <=
               cross(hull[hull.size() - 2], hull.back())) {
      hull.pop_back();
    }
    hull.push_back(l);
  next:;
  }
  std::vector<Knot> knots;
  knots.push_back({0.0, std::min(1.0, hull.front().intercept)});
  for (size_t k = 0; k + 1 < hull.size(); ++k) {
    const double x = cross(hull[k], hull[k + 1]);
    if (x > 0.0 && x < 1.0) {
      knots.push_back({x, hull[k].intercept + hull[k].slope * x});
    }
  }
  knots.push_back({1.0, 0.0});
  return TradeoffCurve::Discrete(std::move(knots));
}

// Chord interpolation through exact curve values (an upper approximation).
inline TradeoffCurve SampleCurve(const TradeoffCurve& curve,
                                 int grid_size = 2049) {
  if (curve.kind() == TradeoffCurve::Kind::kDiscrete) return curve;
  std::vector<Knot> knots;
  for (double a : ChebyshevAlphaGrid(grid_size)) {
    const double v = curve(a);
    // Values that round to 1 past alpha = 0 would leave flat segments.
    if (a > 0.0 && v >= 1.0) continue;
    knots.push_back({a, v});
  }
  return TradeoffCurve::Discrete(std::move(knots));
}

inline std::vector<Knot> KnotsOf(const TradeoffCurve& curve) {
  return curve.kind() == TradeoffCurve::Kind::kDiscrete
             ? curve.knots()
             : LowerEnvelope(curve).knots();
}

// Lower convex hull (Andrew's monotone chain) of a knot set, i.e. the double
// convex conjugate of the piecewise-linear function through the knots.
inline std::vector<Knot> LowerConvexHull(std::vector<Knot> pts) {
  pts = TradeoffCurve::Normalize(std::move(pts));
  std::vector<Knot> hull;
  auto turn = [](const Knot& o, const Knot& a, const Knot& b) {
    return (a.alpha - o.alpha) * (b.value - o.value) -
           (a.value - o.value) * (b.alpha - o.alpha);
  };
  for (const Knot& p : pts) {
    while (hull.size() >= 2 && turn(hull[hull.size() - 2], hull.back(), p) <= 0.0) {
      hull.pop_back();
    }
    hull.push_back(p);
  }
  return hull;
}

// Left inverse f^{-1}(b) = inf{a : f(a) <= b} by reflecting knots.
inline std::vector<Knot> LeftInverse(const std::vector<Knot>& knots) {
  std::vector<Knot> out;
  out.reserve(knots.size() + 2);
  for (const Knot& k : knots) out.push_back({k.value, k.alpha});
  out = TradeoffCurve::Normalize(std::move(out));
  if (out.front().alpha > 0.0) out.insert(out.begin(), {0.0, out.front().value});
  if (out.back().alpha < 1.0) out.push_back({1.0, 0.0});
  return out;
}

inline std::vector<Knot> PointwiseMin(const std::vector<Knot>& f,
                                      const std::vector<Knot>& g) {
  std::vector<double> xs;
  xs.reserve(f.size() + g.size());
  for (const Knot& k : f) xs.push_back(k.alpha);
  for (const Knot& k : g) xs.push_back(k.alpha);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<Knot> out;
  out.reserve(xs.size() * 2);
  double prev_x = 0.0, prev_d = 0.0, prev_f = 0.0, prev_g = 0.0;
  for (size_t k = 0; k < xs.size(); ++k) {
    const double x = xs[k];
    const double fx = TradeoffCurve::Interpolate(f, x);
    const double gx = TradeoffCurve::Interpolate(g, x);
    const double d = fx - gx;
    if (k > 0 && ((prev_d < 0.0 && d > 0.0) || (prev_d > 0.0 && d < 0.0))) {
      const double t = prev_d / (prev_d - d);
      const double cx = prev_x + t * (x - prev_x);
      out.push_back({cx, prev_f + t * (fx - prev_f)});
      (void)prev_g;
    }
    out.push_back({x, std::min(fx, gx)});
    prev_x = x;
    prev_d = d;
    prev_f = fx;
    prev_g = gx;
  }
  return out;
}

// True iff knot slopes are non-decreasing within `tol`.
inline bool IsConvex(const std::vector<Knot>& knots, double tol = 1e-9) {
  double prev = -kInf;
  for (size_t k = 0; k + 1 < knots.size(); ++k) {
    const double dx = knots[k + 1].alpha - knots[k].alpha;
    if (dx <= 0.0) continue;
    const double s = (knots[k + 1].value - knots[k].value) / dx;
    if (s < prev - tol * (1.0 + std::abs(prev))) return false;
    prev = s;
  }
  return true;
}

// hull(min{f, f^{-1}}). Gaussian and identity curves are fixpoints.
inline TradeoffCurve Symmetrize(const TradeoffCurve& curve) {
  if (curve.kind() != TradeoffCurve::Kind::kDiscrete) return curve;
  const auto& f = curve.knots();
  return TradeoffCurve::Discrete(LowerConvexHull(PointwiseMin(f, LeftInverse(f))));
}

// delta(eps) = 1 + f*(-e^eps) = sup_a {1 - f(a) - e^eps a}.
inline double FdpToDelta(const TradeoffCurve& curve, double epsilon) {
  Require(epsilon >= 0.0, "epsilon must be >= 0");
  switch (curve.kind()) {
    case TradeoffCurve::Kind::kIdentity:
      return 0.0;
    case TradeoffCurve::Kind::kGaussian: {
      // Maximizer where G'(a) = -e^eps, i.e. z = eps/mu + mu/2.
      const double mu = curve.mu();
      const double z = epsilon / mu + 0.5 * mu;
      const double a = NormalSf(z);
      const double value = 1.0 - NormalCdf(z - mu) - std::exp(epsilon) * a;
      return std::max(0.0, value);
    }
    case TradeoffCurve::Kind::kDiscrete:
      break;
  }
  if (!IsConvex(curve.knots())) {
    Fail(ErrorCode::kInvalidArgument,
         "fdp_to_delta needs a convex curve; take its convex hull first");
  }
  const double slope = std::exp(epsilon);
  double best = 0.0;
  for (const Knot& k : curve.knots()) {
    best = std::max(best, 1.0 - k.value - slope * k.alpha);
  }
  return best;
}

// Smallest eps >= 0 with FdpToDelta(curve, eps) <= delta.
inline double FdpToEpsilon(const TradeoffCurve& curve, double delta) {
  Require(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
  if (FdpToDelta(curve, 0.0) <= delta) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (FdpToDelta(curve, hi) > delta) {
    hi *= 2.0;
    if (hi > 1e4) Fail(ErrorCode::kNumeric, "curve has no finite epsilon at this delta");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (FdpToDelta(curve, mid) > delta ? lo : hi) = mid;
  }
  return hi;
}

// f_{eps,delta}(a) = max{0, 1 - delta - e^eps a, e^-eps (1 - delta - a)}.
inline TradeoffCurve EpsDeltaToCurve(double epsilon, double delta) {
  Require(epsilon >= 0.0, "epsilon must be >= 0");
  Require(delta >= 0.0 && delta <= 1.0, "delta must lie in [0, 1]");
  const double top = 1.0 - delta;
  const double corner = top / (1.0 + std::exp(epsilon));
  std::vector<Knot> knots = {{0.0, top}, {corner, corner}, {top, 0.0}, {1.0, 0.0}};
  return TradeoffCurve::Discrete(std::move(knots));
}

// RDP of an f-DP curve: (1/(a-1)) log int_0^1 |f'(x)|^{1-a} dx. Closed form
// mu^2 a / 2 for Gaussian curves; exact segment sum for discrete curves.
inline double FdpToRdp(const TradeoffCurve& curve, double order) {
  Require(order > 1.0, "RDP order must be > 1");
  switch (curve.kind()) {
    case TradeoffCurve::Kind::kIdentity:
      return 0.0;
    case TradeoffCurve::Kind::kGaussian:
      return 0.5 * curve.mu() * curve.mu() * order;
    case TradeoffCurve::Kind::kDiscrete:
      break;
  }
  const auto& k = curve.knots();
  // Log-sum-exp over segments of log(width) + (1 - order) log|slope|.
  std::vector<double> terms;
  for (size_t i = 0; i + 1 < k.size(); ++i) {
    const double dx = k[i + 1].alpha - k[i].alpha;
    if (dx <= 0.0) continue;
    const double slope = -(k[i + 1].value - k[i].value) / dx;
    if (slope <= 0.0) {
      Fail(ErrorCode::kNumeric,
           "RDP order unsupported: curve has a flat segment, integral diverges");
    }
    terms.push_back(std::log(dx) + (1.0 - order) * std::log(slope));
  }
  const double peak = *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - peak);
  return (peak + std::log(acc)) / (order - 1.0);
}

// Subsampling operator C_p(f) = (min{f_p, f_p^{-1}})^{**}, f_p = p f + (1-p) Id.
// Expects a symmetric input; p = 1 returns it unchanged.
inline TradeoffCurve SubsampleCp(const TradeoffCurve& curve, double p) {
  Require(p >= 0.0 && p <= 1.0, "sampling probability must lie in [0, 1]");
  if (p == 0.0) return TradeoffCurve::Discrete({{0.0, 1.0}, {1.0, 0.0}});
  if (p == 1.0) return curve;
  // f_p is sampled at exact curve values, so knots lie on C_p(f) itself.
  const std::vector<Knot> f = SampleCurve(curve).knots();
  std::vector<Knot> fp;
  fp.reserve(f.size());
  for (const Knot& k : f) {
    fp.push_back({k.alpha, p * k.value + (1.0 - p) * (1.0 - k.alpha)});
  }
  return TradeoffCurve::Discrete(LowerConvexHull(PointwiseMin(fp, LeftInverse(fp))));
}

// Joint-concavity lower bound for a mixture of Gaussian curves with a
// perfectly private residual component, traced over the likelihood-ratio
// threshold s: alpha_t(s) = P[q_t/p_t > s] = Phi(-ln s/mu_t - mu_t/2),
// f(s) = sum_t w_t G_{mu_t}(alpha_t(s)) + w_res (1 - 1[s < 1]).
inline TradeoffCurve MixtureCurve(const HittingWeights& weights,
                                  std::span<const double> mus,
                                  int samples = 4001) {
  if (mus.size() != weights.weights.size()) {
    Fail(ErrorCode::kInvalidArgument, "mixture: one mu per hitting weight required");
  }
  double mu_max = 0.0;
  for (double mu : mus) {
    Require(mu >= 0.0, "mixture: mu must be >= 0");
    mu_max = std::max(mu_max, mu);
  }
  auto point = [&](double log_s, bool residual_rejects) {
    double alpha = residual_rejects ? weights.residual : 0.0;
    double value = residual_rejects ? 0.0 : weights.residual;
    for (size_t t = 0; t < mus.size(); ++t) {
      const double w = weights.weights[t];
      if (w == 0.0) continue;
      const double mu = mus[t];
      if (mu == 0.0) {
        // Identity component behaves like the residual.
        alpha += residual_rejects ? w : 0.0;
        value += residual_rejects ? 0.0 : w;
        continue;
      }
      const double z = log_s / mu + 0.5 * mu;  // alpha_t = Phi(-z)
      alpha += w * NormalSf(z);
      value += w * NormalCdf(z - mu);
    }
    return Knot{std::min(alpha, 1.0), std::min(value, 1.0)};
  };
  const double span = std::max(1.0, 40.0 * mu_max + 0.5 * mu_max * mu_max);
  std::vector<Knot> knots = {{0.0, 1.0}, {1.0, 0.0}};
  for (int k = 0; k < samples; ++k) {
    const double log_s = -span + 2.0 * span * k / (samples - 1);
    knots.push_back(point(log_s, log_s < 0.0));
  }
  knots.push_back(point(0.0, true));
  knots.push_back(point(0.0, false));
  return TradeoffCurve::Discrete(LowerConvexHull(std::move(knots)));
}

}  // namespace pnfdp

#endif  // PNFDP_TRADEOFF_HPP_
