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

// Privacy loss random variables (PRVs) and their numerical composition.
//
// For a pair (P, Q) the PRV is Y = log(dQ/dP)(X) with X ~ Q, and
//   delta(eps) = E[(1 - e^{eps - Y})_+].
// A `DiscretePrv` stores the law of Y under Q on the lattice {k h}, plus an
// atom at +infinity (`delta_trunc`). Discretization and trimming only ever
// move mass towards larger privacy loss, so every reported delta is an upper
// bound on the exact value.

#ifndef PNFDP_PRV_HPP_
#define PNFDP_PRV_HPP_

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <memory>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pnfdp/graph_markov.hpp"
#include "pnfdp/normal.hpp"
#include "pnfdp/status.hpp"

namespace pnfdp {

namespace internal {

inline long double CdfL(long double x) {
  return 0.5L * std::erfc(-x / std::sqrt(2.0L));
}

// Inverse of l(z) = log(1 - p + p e^{mu z - mu^2/2}) on z >= mu/2, u >= 0.
inline long double SubsampledThreshold(long double mu, long double p,
                                       long double u) {
  long double log_ratio;
  if (u > 1.0L) {
    log_ratio = u + std::log1p((p - 1.0L) * std::exp(-u)) - std::log(p);
  } else {
    log_ratio = std::log1p(std::expm1(u) / p);
  }
  return mu / 2.0L + log_ratio / mu;
}

// l(z) evaluated without overflow.
inline double SubsampledLoss(double mu, double p, double z) {
  const double a = std::log1p(-p);
  const double b = std::log(p) + mu * z - 0.5 * mu * mu;
  if (p >= 1.0) return b;
  const double hi = std::max(a, b);
  return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
}

}  // namespace internal

// One component of a PRV mixture.
struct PrvComponent {
  enum class Kind { kGaussian, kPointMass, kSubsampledGaussian };

  Kind kind = Kind::kPointMass;
  double weight = 1.0;
  double mu = 0.0;     // Gaussian and subsampled
  double p = 1.0;      // subsampled only
  double value = 0.0;  // point mass only

  // P[Y > y] under Q (right-continuous survival).
  long double SurvivalQ(long double y) const {
    switch (kind) {
      case Kind::kPointMass:
        return y < value ? 1.0L : 0.0L;
      case Kind::kGaussian:
        return internal::CdfL(0.5L * mu - y / mu);
      case Kind::kSubsampledGaussian: {
        if (y >= 0.0L) {
          const long double z = internal::SubsampledThreshold(mu, p, y);
          return (1.0L - p) * internal::CdfL(-z) + p * internal::CdfL(mu - z);
        }
        const long double z = internal::SubsampledThreshold(mu, p, -y);
        return 1.0L - internal::CdfL(-z);
      }
    }
    return 0.0L;
  }

  // P[Y > y] under P; the law under P is e^{-y} times the law under Q.
  long double SurvivalP(long double y) const {
    switch (kind) {
      case Kind::kPointMass:
        return y < value ? std::exp(-static_cast<long double>(value)) : 0.0L;
      case Kind::kGaussian:
        return internal::CdfL(-0.5L * mu - y / mu);
      case Kind::kSubsampledGaussian: {
        if (y >= 0.0L) {
          return internal::CdfL(-internal::SubsampledThreshold(mu, p, y));
        }
        const long double z = internal::SubsampledThreshold(mu, p, -y);
        return 1.0L - (1.0L - p) * internal::CdfL(-z) - p * internal::CdfL(mu - z);
      }
    }
    return 0.0L;
  }

  // Closed-form hockey-stick divergence of the component.
  double Delta(double epsilon) const {
    if (kind == Kind::kGaussian) return GaussianDelta(mu, epsilon);
    if (kind == Kind::kPointMass) {
      return value > epsilon ? -std::expm1(epsilon - value) : 0.0;
    }
    const long double d = SurvivalQ(epsilon) -
                          std::exp(static_cast<long double>(epsilon)) * SurvivalP(epsilon);
    return d > 0.0L ? static_cast<double>(d) : 0.0;
  }

  // Support window [lo, hi] outside which each tail has Q-mass <= budget.
  std::pair<double, double> Window(double budget) const {
    const double z = NormalUpperQuantile(budget);
    switch (kind) {
      case Kind::kPointMass:
        return {value, value};
      case Kind::kGaussian:
        return {0.5 * mu * mu - z * mu, 0.5 * mu * mu + z * mu};
      case Kind::kSubsampledGaussian:
        return {-internal::SubsampledLoss(mu, p, std::max(z, 0.5 * mu)),
                internal::SubsampledLoss(mu, p, mu + z)};
    }
    return {0.0, 0.0};
  }
};

class PrvDistribution {
 public:
  static PrvDistribution Gaussian(double mu) {
    Require(mu >= 0.0 && std::isfinite(mu), "gaussian_prv: mu must be >= 0");
    if (mu == 0.0) return PointMass(0.0);
    PrvComponent c;
    c.kind = PrvComponent::Kind::kGaussian;
    c.mu = mu;
    return PrvDistribution({c});
  }

  static PrvDistribution PointMass(double value) {
    Require(std::isfinite(value), "point mass must be finite");
    PrvComponent c;
    c.value = value;
    return PrvDistribution({c});
  }

  // Canonical PRV of the symmetrized subsampled pair C_p(G_mu): positive
  // losses follow (N(0,1), (1-p)N(0,1) + pN(mu,1)), negative losses mirror
  // them, and the remainder sits at 0.
  static PrvDistribution SubsampledGaussian(double mu, double p) {
    Require(mu >= 0.0 && std::isfinite(mu), "subsampled_gaussian_prv: mu must be >= 0");
    Require(p >= 0.0 && p <= 1.0, "subsampled_gaussian_prv: p must lie in [0, 1]");
    if (p == 0.0 || mu == 0.0) return PointMass(0.0);
    if (p == 1.0) return Gaussian(mu);
    PrvComponent c;
    c.kind = PrvComponent::Kind::kSubsampledGaussian;
    c.mu = mu;
    c.p = p;
    return PrvDistribution({c});
  }

  // sum_t w_t gaussian_prv(mu_t) + residual * point_mass(0).
  static PrvDistribution Mixture(const HittingWeights& weights,
                                 std::span<const double> mus) {
    if (mus.size() != weights.weights.size()) {
      Fail(ErrorCode::kInvalidArgument, "prv_mixture: one mu per hitting weight required");
    }
    std::vector<PrvComponent> comps;
    double at_zero = weights.residual;
    for (size_t t = 0; t < mus.size(); ++t) {
      if (mus[t] < 0.0) Fail(ErrorCode::kInvalidArgument, "prv_mixture: negative mu");
      const double w = weights.weights[t];
      if (w <= 0.0) continue;
      if (mus[t] == 0.0) {
        at_zero += w;
        continue;
      }
      PrvComponent c;
      c.kind = PrvComponent::Kind::kGaussian;
      c.weight = w;
      c.mu = mus[t];
      comps.push_back(c);
    }
    if (at_zero > 0.0) {
      PrvComponent c;
      c.weight = at_zero;
      comps.push_back(c);
    }
    return PrvDistribution(std::move(comps));
  }

  explicit PrvDistribution(std::vector<PrvComponent> components)
      : components_(std::move(components)) {
    Require(!components_.empty(), "PRV needs at least one component");
    long double total = 0.0L;
    for (const auto& c : components_) {
      Require(c.weight >= 0.0, "PRV component weights must be >= 0");
      total += c.weight;
    }
    if (std::abs(static_cast<double>(total) - 1.0) > 1e-12) {
      Fail(ErrorCode::kInvalidArgument, "PRV component weights must sum to 1");
    }
  }

  const std::vector<PrvComponent>& components() const { return components_; }

  // CDF of Y under Q.
  double Cdf(double y) const {
    long double acc = 0.0L;
    for (const auto& c : components_) acc += c.weight * (1.0L - c.SurvivalQ(y));
    return static_cast<double>(acc);
  }

  // Exact delta(eps) by linearity over components.
  double Delta(double epsilon) const {
    long double acc = 0.0L;
    for (const auto& c : components_) acc += c.weight * c.Delta(epsilon);
    return static_cast<double>(acc);
  }

 private:
  std::vector<PrvComponent> components_;
};

// Lattice PRV: mass[k] is the Q-probability of loss (offset + k) * h.
struct DiscretePrv {
  double h = 1e-4;
  std::int64_t offset = 0;
  std::vector<double> mass;
  double delta_trunc = 0.0;
  int coarsenings = 0;

  double ValueAt(size_t k) const {
    return static_cast<double>(offset + static_cast<std::int64_t>(k)) * h;
  }

  double TotalMass() const {
    long double acc = 0.0L;
    for (double m : mass) acc += m;
    return static_cast<double>(acc);
  }

  // delta(eps) = sum_{y > eps} mass (1 - e^{eps - y}) + delta_trunc.
  double DeltaAt(double epsilon) const {
    Require(epsilon >= 0.0, "delta_at: epsilon must be >= 0");
    long double acc = 0.0L;
    for (size_t k = mass.size(); k-- > 0;) {
      const double y = ValueAt(k);
      if (y <= epsilon) break;
      acc += mass[k] * -std::expm1(static_cast<long double>(epsilon) - y);
    }
    return static_cast<double>(acc) + delta_trunc;
  }

  // Smallest eps (to ~1e-10) with DeltaAt(eps) <= target.
  double EpsilonAt(double target) const {
    Require(target > 0.0, "epsilon_at: delta target must be > 0");
    if (target >= 1.0 || DeltaAt(0.0) <= target) return 0.0;
    if (target <= delta_trunc) {
      std::ostringstream msg;
      msg << "delta target " << target << " is below the truncation floor "
          << delta_trunc << "; refine the grid or shrink tail budgets";
      Fail(ErrorCode::kNumeric, msg.str());
    }
    double lo = 0.0;
    double hi = std::max(h, ValueAt(mass.empty() ? 0 : mass.size() - 1));
    for (int it = 0; it < 200 && hi - lo > 1e-11 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (DeltaAt(mid) > target ? lo : hi) = mid;
    }
    return hi;
  }

  std::string ToCsv() const {
    std::ostringstream out;
    out.precision(17);
    out << "loss,mass\n";
    for (size_t k = 0; k < mass.size(); ++k) {
      if (mass[k] != 0.0) out << ValueAt(k) << ',' << mass[k] << '\n';
    }
    out << "inf," << delta_trunc << '\n';
    return out.str();
  }
};

enum class DiscretizationMethod {
  kConnectTheDots,  // dominating lattice pair, second-order accurate
  kRoundUp,         // each cell's mass moved to its upper endpoint
};

struct DiscretizeOptions {
  double h = 1e-4;
  double half_width = 0.0;  // 0 selects the window from tail_budget
  double tail_budget = 1e-12;
  // Gaussian components lighter than this are merged into the largest-mu
  // Gaussian component, which dominates them.
  double fold_weight = 1e-13;
  // When > 0, each Gaussian mu is rounded up to the grid (1 + r)^k and equal
  // components are merged. Larger mu is more leaky, so this stays pessimistic.
  double mu_resolution = 0.0;
  // Wider supports double h (counted in `coarsenings`) to stay under this.
  size_t max_cells = size_t{1} << 23;
  DiscretizationMethod method = DiscretizationMethod::kConnectTheDots;
};

namespace internal {

// Adds the discretized component (times its weight) into `acc`, whose index 0
// corresponds to lattice point `base`.
inline void DiscretizeComponent(const PrvComponent& c, double weight,
                                const DiscretizeOptions& opt, std::int64_t k_lo,
                                std::int64_t k_hi, std::int64_t base,
                                std::vector<long double>& acc,
                                long double& trunc) {
  const double h = opt.h;
  if (c.kind == PrvComponent::Kind::kPointMass) {
    const auto k = static_cast<std::int64_t>(std::ceil(c.value / h - 1e-9));
    acc[k - base] += weight;
    return;
  }
  const std::int64_t n = k_hi - k_lo;
  std::vector<long double> sq(n + 1), sp(n + 1), gamma(n + 1);
  for (std::int64_t j = 0; j <= n; ++j) {
    const long double y = static_cast<long double>(k_lo + j) * h;
    sq[j] = c.SurvivalQ(y);
    sp[j] = c.SurvivalP(y);
    gamma[j] = std::exp(y);
  }
  const long double below_q = 1.0L - sq[0];
  if (opt.method == DiscretizationMethod::kRoundUp) {
    acc[k_lo - base] += weight * below_q;
    for (std::int64_t j = 0; j < n; ++j) {
      acc[k_lo + j + 1 - base] += weight * std::max(0.0L, sq[j] - sq[j + 1]);
    }
    trunc += weight * sq[n];
    return;
  }
  // Connect-the-dots: split each interval's (P, Q) mass between its two
  // endpoints so that the likelihood ratio at lattice point y is exactly e^y.
  long double carry = below_q / gamma[0];  // P-mass arriving from the left
  for (std::int64_t j = 0; j < n; ++j) {
    const long double dq = std::max(0.0L, sq[j] - sq[j + 1]);
    const long double dp = std::max(0.0L, sp[j] - sp[j + 1]);
    long double right = (dq - gamma[j] * dp) / (gamma[j + 1] - gamma[j]);
    right = std::clamp(right, 0.0L, dp);
    acc[k_lo + j - base] += weight * gamma[j] * (dp - right + carry);
    carry = right;
  }
  acc[k_hi - base] += weight * gamma[n] * (carry + sp[n]);
  trunc += weight * std::max(0.0L, sq[n] - gamma[n] * sp[n]);
}

}  // namespace internal

// exp(y) must stay finite in long double across the lattice.
inline constexpr double kMaxLossSpan = 1e4;

inline DiscretePrv Discretize(const PrvDistribution& prv,
                              const DiscretizeOptions& opt = {}) {
  Require(opt.h > 0.0, "discretize: h must be > 0");
  Require(opt.tail_budget > 0.0 && opt.tail_budget < 0.5,
          "discretize: tail budget must lie in (0, 0.5)");
  Require(opt.half_width >= 0.0, "discretize: half width must be >= 0");

  // Fold negligible Gaussian components into the most leaky one.
  std::vector<PrvComponent> comps = prv.components();
  int leader = -1;
  for (int k = 0; k < static_cast<int>(comps.size()); ++k) {
    if (comps[k].kind == PrvComponent::Kind::kGaussian &&
        (leader < 0 || comps[k].mu > comps[leader].mu)) {
      leader = k;
    }
  }
  if (leader >= 0 && opt.fold_weight > 0.0) {
    for (int k = 0; k < static_cast<int>(comps.size()); ++k) {
      if (k == leader || comps[k].weight >= opt.fold_weight) continue;
      if (comps[k].kind == PrvComponent::Kind::kSubsampledGaussian) continue;
      comps[leader].weight += comps[k].weight;
      comps[k].weight = 0.0;
    }
  }

  if (opt.mu_resolution > 0.0) {
    const double step = std::log1p(opt.mu_resolution);
    std::map<std::int64_t, size_t> bucket_of;
    std::vector<PrvComponent> merged;
    for (const PrvComponent& c : comps) {
      if (c.weight == 0.0) continue;
      if (c.kind != PrvComponent::Kind::kGaussian) {
        merged.push_back(c);
        continue;
      }
      const auto k = static_cast<std::int64_t>(std::ceil(std::log(c.mu) / step - 1e-9));
      auto [it, fresh] = bucket_of.emplace(k, merged.size());
      if (fresh) {
        merged.push_back(c);
        merged.back().mu = std::max(c.mu, std::exp(static_cast<double>(k) * step));
      } else {
        merged[it->second].weight += c.weight;
        merged[it->second].mu = std::max(merged[it->second].mu, c.mu);
      }
    }
    comps = std::move(merged);
  }
  double lo_all = 0.0, hi_all = 0.0;
  for (const PrvComponent& c : comps) {
    if (c.weight == 0.0) continue;
    auto [lo, hi] = c.Window(opt.tail_budget);
    if (opt.half_width > 0.0) {
      lo = std::max(lo, -opt.half_width);
      hi = std::min(hi, opt.half_width);
    }
    lo_all = std::min(lo_all, lo);
    hi_all = std::max(hi_all, hi);
  }
  if (hi_all - lo_all > kMaxLossSpan) {
    std::ostringstream msg;
    msg << "discretize: privacy loss support [" << lo_all << ", " << hi_all
        << "] is too wide to represent";
    Fail(ErrorCode::kNumeric, msg.str());
  }
  DiscretizeOptions eff = opt;
  double& h = eff.h;
  int coarsenings = 0;
  while ((hi_all - lo_all) / h + 2.0 > static_cast<double>(opt.max_cells)) {
    h *= 2.0;
    ++coarsenings;
  }
  std::vector<std::pair<std::int64_t, std::int64_t>> windows(comps.size());
  std::int64_t k_min = 0, k_max = 0;
  long double outside = 0.0L;
  double needed = 0.0;
  for (size_t k = 0; k < comps.size(); ++k) {
    if (comps[k].weight == 0.0) continue;
    auto [lo, hi] = comps[k].Window(opt.tail_budget);
    needed = std::max({needed, std::abs(lo), std::abs(hi)});
    if (opt.half_width > 0.0) {
      lo = std::max(lo, -opt.half_width);
      hi = std::min(hi, opt.half_width);
      if (comps[k].kind != PrvComponent::Kind::kPointMass) {
        outside += comps[k].weight * ((1.0L - comps[k].SurvivalQ(-opt.half_width)) +
                                      comps[k].SurvivalQ(opt.half_width));
      }
    }
    auto klo = static_cast<std::int64_t>(std::floor(lo / h));
    auto khi = static_cast<std::int64_t>(std::ceil(hi / h));
    if (comps[k].kind == PrvComponent::Kind::kPointMass) {
      klo = khi = static_cast<std::int64_t>(std::ceil(comps[k].value / h - 1e-9));
    } else if (khi <= klo) {
      khi = klo + 1;
    }
    windows[k] = {klo, khi};
    k_min = std::min(k_min, klo);
    k_max = std::max(k_max, khi);
  }
  if (opt.half_width > 0.0 && outside > opt.tail_budget) {
    std::ostringstream msg;
    msg << "discretize: tails beyond +-" << opt.half_width << " carry mass "
        << static_cast<double>(outside) << " > budget " << opt.tail_budget
        << "; required half width is " << needed;
    Fail(ErrorCode::kNumeric, msg.str());
  }

  std::vector<long double> acc(k_max - k_min + 1, 0.0L);
  long double trunc = 0.0L;
  for (size_t k = 0; k < comps.size(); ++k) {
    if (comps[k].weight == 0.0) continue;
    internal::DiscretizeComponent(comps[k], comps[k].weight, eff, windows[k].first,
                                  windows[k].second, k_min, acc, trunc);
  }
  DiscretePrv out;
  out.h = h;
  out.coarsenings = coarsenings;
  out.offset = k_min;
  out.mass.assign(acc.begin(), acc.end());
  out.delta_trunc = static_cast<double>(trunc);
  // Drop empty edges.
  size_t first = 0, last = out.mass.size();
  while (first + 1 < last && out.mass[first] == 0.0) ++first;
  while (last - 1 > first && out.mass[last - 1] == 0.0) --last;
  out.mass = std::vector<double>(out.mass.begin() + first, out.mass.begin() + last);
  out.offset += static_cast<std::int64_t>(first);
  return out;
}

struct ComposeOptions {
  // Q-mass that may be cut from each tail after every convolution. Right
  // tails move to delta_trunc; left tails move up into the first kept cell.
  double trim_budget = 1e-15;
  // Above this lattice length, operands are coarsened by merging cell pairs
  // (rounding up), doubling h.
  size_t max_cells = size_t{1} << 23;
  bool warn = true;
};

namespace internal {

inline std::mutex& FftwPlannerMutex() {
  static std::mutex mutex;
  return mutex;
}

inline size_t FftFriendlySize(size_t n) {
  for (size_t m = n;; ++m) {
    size_t r = m;
    for (size_t f : {2, 3, 5, 7}) {
      while (r % f == 0) r /= f;
    }
    if (r == 1) return m;
  }
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

inline std::vector<double> LinearConvolve(const std::vector<double>& a,
                                          const std::vector<double>& b) {
  const size_t out_len = a.size() + b.size() - 1;
  std::vector<double> out(out_len, 0.0);
  if (a.size() * b.size() <= 65536) {
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) continue;
      for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
  }
  const size_t n = FftFriendlySize(out_len);
  const size_t nc = n / 2 + 1;
  std::unique_ptr<double, FftwFree> ra(fftw_alloc_real(n)), rb(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> ca(fftw_alloc_complex(nc)),
      cb(fftw_alloc_complex(nc));
  fftw_plan fa, fb, inv;
  {
    std::lock_guard<std::mutex> lock(FftwPlannerMutex());
    const int ni = static_cast<int>(n);
    fa = fftw_plan_dft_r2c_1d(ni, ra.get(), ca.get(), FFTW_ESTIMATE);
    fb = fftw_plan_dft_r2c_1d(ni, rb.get(), cb.get(), FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(ni, ca.get(), ra.get(), FFTW_ESTIMATE);
  }
  std::fill(ra.get(), ra.get() + n, 0.0);
  std::fill(rb.get(), rb.get() + n, 0.0);
  std::copy(a.begin(), a.end(), ra.get());
  std::copy(b.begin(), b.end(), rb.get());
  fftw_execute(fa);
  fftw_execute(fb);
  fftw_complex* x = ca.get();
  fftw_complex* y = cb.get();
  for (size_t k = 0; k < nc; ++k) {
    const double re = x[k][0] * y[k][0] - x[k][1] * y[k][1];
    const double im = x[k][0] * y[k][1] + x[k][1] * y[k][0];
    x[k][0] = re;
    x[k][1] = im;
  }
  fftw_execute(inv);
  const double scale = 1.0 / static_cast<double>(n);
  for (size_t k = 0; k < out_len; ++k) out[k] = std::max(0.0, ra.get()[k] * scale);
  {
    std::lock_guard<std::mutex> lock(FftwPlannerMutex());
    fftw_destroy_plan(fa);
    fftw_destroy_plan(fb);
    fftw_destroy_plan(inv);
  }
  return out;
}

inline void Trim(DiscretePrv& d, double budget) {
  if (d.mass.size() < 2 || budget <= 0.0) return;
  size_t last = d.mass.size();
  long double cut = 0.0L;
  while (last > 1 && cut + d.mass[last - 1] <= budget) cut += d.mass[--last];
  d.delta_trunc += static_cast<double>(cut);
  size_t first = 0;
  long double low = 0.0L;
  while (first + 1 < last && low + d.mass[first] <= budget) low += d.mass[first++];
  std::vector<double> kept(d.mass.begin() + first, d.mass.begin() + last);
  kept.front() += static_cast<double>(low);
  d.offset += static_cast<std::int64_t>(first);
  d.mass = std::move(kept);
}

}  // namespace internal

// Merges lattice cells in pairs, rounding each loss up to the coarser lattice.
inline DiscretePrv Coarsen(const DiscretePrv& d) {
  DiscretePrv out;
  out.h = 2.0 * d.h;
  out.delta_trunc = d.delta_trunc;
  out.coarsenings = d.coarsenings + 1;
  auto up = [](std::int64_t k) {  // ceil(k / 2) for any sign
    return k >= 0 ? (k + 1) / 2 : -((-k) / 2);
  };
  out.offset = up(d.offset);
  const std::int64_t top = up(d.offset + static_cast<std::int64_t>(d.mass.size()) - 1);
  out.mass.assign(top - out.offset + 1, 0.0);
  for (size_t k = 0; k < d.mass.size(); ++k) {
    out.mass[up(d.offset + static_cast<std::int64_t>(k)) - out.offset] += d.mass[k];
  }
  return out;
}

// Law of the sum of two independent PRVs.
inline DiscretePrv Compose(DiscretePrv a, DiscretePrv b,
                           const ComposeOptions& opt = {}) {
  while (a.h < b.h * (1.0 - 1e-12)) a = Coarsen(a);
  while (b.h < a.h * (1.0 - 1e-12)) b = Coarsen(b);
  if (std::abs(a.h - b.h) > 1e-12 * a.h) {
    Fail(ErrorCode::kInvalidArgument, "compose: lattice spacings are not commensurate");
  }
  while (a.mass.size() + b.mass.size() - 1 > opt.max_cells) {
    if (opt.warn) {
      std::clog << "warning: PRV lattice exceeds " << opt.max_cells
                << " cells; coarsening h to " << 2.0 * a.h << '\n';
    }
    a = Coarsen(a);
    b = Coarsen(b);
  }
  DiscretePrv out;
  out.h = a.h;
  out.offset = a.offset + b.offset;
  out.coarsenings = std::max(a.coarsenings, b.coarsenings);
  out.mass = internal::LinearConvolve(a.mass, b.mass);
  out.delta_trunc = a.delta_trunc + b.delta_trunc;
  internal::Trim(out, opt.trim_budget);
  return out;
}

// m-fold self-composition by repeated squaring.
inline DiscretePrv SelfCompose(const DiscretePrv& d, std::int64_t m,
                               const ComposeOptions& opt = {}) {
  Require(m >= 1, "self_compose: m must be >= 1");
  if (m == 1) return d;
  DiscretePrv base = d;
  std::optional<DiscretePrv> acc;
  while (true) {
    if (m & 1) acc = acc ? Compose(*acc, base, opt) : base;
    m >>= 1;
    if (m == 0) break;
    base = Compose(base, base, opt);
  }
  return *acc;
}

// Weighted mixture of lattice PRVs (weights must sum to 1).
inline DiscretePrv MixDiscrete(const std::vector<std::pair<double, DiscretePrv>>& parts) {
  Require(!parts.empty(), "mixture needs at least one part");
  double h = 0.0;
  long double total = 0.0L;
  for (const auto& [w, d] : parts) {
    Require(w >= 0.0, "mixture weights must be >= 0");
    h = std::max(h, d.h);
    total += w;
  }
  Require(std::abs(static_cast<double>(total) - 1.0) <= 1e-12,
          "mixture weights must sum to 1");
  std::vector<DiscretePrv> aligned;
  std::int64_t lo = 0, hi = 0;
  bool first = true;
  for (const auto& [w, d] : parts) {
    DiscretePrv x = d;
    while (x.h < h * (1.0 - 1e-12)) x = Coarsen(x);
    const std::int64_t top = x.offset + static_cast<std::int64_t>(x.mass.size()) - 1;
    lo = first ? x.offset : std::min(lo, x.offset);
    hi = first ? top : std::max(hi, top);
    first = false;
    aligned.push_back(std::move(x));
  }
  DiscretePrv out;
  out.h = h;
  out.offset = lo;
  std::vector<long double> acc(hi - lo + 1, 0.0L);
  long double trunc = 0.0L;
  for (size_t k = 0; k < parts.size(); ++k) {
    const double w = parts[k].first;
    const DiscretePrv& x = aligned[k];
    for (size_t i = 0; i < x.mass.size(); ++i) acc[x.offset - lo + i] += w * x.mass[i];
    trunc += w * x.delta_trunc;
    out.coarsenings = std::max(out.coarsenings, x.coarsenings);
  }
  out.mass.assign(acc.begin(), acc.end());
  out.delta_trunc = static_cast<double>(trunc);
  return out;
}

}  // namespace pnfdp

#endif  // PNFDP_PRV_HPP_
