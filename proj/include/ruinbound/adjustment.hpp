#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "ruinbound/distributions.hpp"
#include "ruinbound/model.hpp"

namespace ruinbound {

enum class Flavor { L_Y, L_S, L_Sl, kappa, L_star };

inline std::string_view to_string(Flavor f) {
  switch (f) {
    case Flavor::L_Y: return "L_Y";
    case Flavor::L_S: return "L_S";
    case Flavor::L_Sl: return "L_Sl";
    case Flavor::kappa: return "kappa";
    case Flavor::L_star: return "L_star";
  }
  return "?";
}

struct AdjustmentResult {
  double value = 0.0;  // in [0, +inf]
  Flavor flavor = Flavor::L_S;
  double bracket_low = 0.0;
  double bracket_high = 0.0;
  bool certified = true;
  bool boundary = false;  // root sits at the MGF domain boundary
  std::string status;     // converged | boundary | always-feasible | unbounded-search | ...
  int iterations = 0;
};

inline constexpr double kCriterionSlack = 1e-12;
inline constexpr double kDefaultTol = 1e-10;

namespace detail {

struct Verdict {
  bool feasible;
  bool certified;
};

// Largest h in [0, H) with criterion(h) feasible; the feasible set is an
// interval containing 0. Reports lo, the feasible end of the final bracket.
inline AdjustmentResult bisect_feasible(Flavor flavor, double H, double tol, bool always_feasible,
                                        const std::function<Verdict(double)>& criterion) {
  AdjustmentResult res;
  res.flavor = flavor;
  if (always_feasible) {
    res.value = kInf;
    res.bracket_low = res.bracket_high = kInf;
    res.status = "always-feasible";
    return res;
  }
  if (!(H > 0)) {
    res.status = "converged";
    return res;
  }
  auto eval = [&](double h) {
    ++res.iterations;
    const Verdict v = criterion(h);
    res.certified = res.certified && v.certified;
    return v.feasible;
  };

  double lo = 0.0;
  double hi = H == kInf ? 1.0 : std::min(1.0, H / 2.0);
  constexpr double kSearchCap = 1e12;
  while (eval(hi)) {
    lo = hi;
    if (hi >= H) break;
    if (hi > kSearchCap) {
      res.value = kInf;
      res.bracket_low = lo;
      res.bracket_high = kInf;
      res.certified = false;
      res.status = "unbounded-search";
      return res;
    }
    hi = std::min(2.0 * hi, H);
  }
  if (lo == H) {
    // Feasible at the boundary itself; nothing lies beyond the domain.
    res.value = H;
    res.bracket_low = res.bracket_high = H;
    res.boundary = true;
    res.status = "boundary";
    return res;
  }
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi) break;
    (eval(mid) ? lo : hi) = mid;
  }
  res.bracket_low = lo;
  res.bracket_high = hi;
  if (hi == H && hi - lo <= tol) {
    res.value = H;
    res.boundary = true;
    res.status = "boundary";
  } else {
    res.value = lo;
    res.status = "converged";
  }
  return res;
}

// sup_j log E e^{h v_{j-1} Y*_j}.
inline SupResult sup_step_log_mgf(const RiskModel& model, double h, const TruncationPolicy& policy) {
  if (h == 0.0) return {0.0, 1, SupStatus::attained, 1};
  RunningMax rm;
  auto view = block_view(model);
  if (view && view->shape.log_ratio <= 0.0) {
    // Later blocks evaluate the same convex terms (zero at 0) at smaller
    // arguments, where f(lambda t) <= lambda f(t); none exceeds max(0, first block).
    for (std::size_t i = 0; i < view->laws.size(); ++i) {
      const double term = log_mgf_at(view->laws[i].base, h * std::exp(view->log_weights[i]));
      rm.offer(term, static_cast<std::int64_t>(i) + 1);
    }
    // Shrinking arguments drive the terms to 0, so the sup is at least 0.
    if (view->shape.log_ratio < 0.0) rm.best = std::max(rm.best, 0.0);
    return {rm.best, rm.argmax, SupStatus::attained, view->head()};
  }
  if (const auto* r = std::get_if<IndexedNormal>(&model.increments());
      r && r->slope > 0 && rates_all_zero(model.rates())) {
    return {kInf, 0, SupStatus::unbounded, 0};
  }
  std::int64_t limit = policy.k_max;
  if (auto n = defined_length(model)) limit = std::min(limit, *n);
  const bool may_certify = eventually_decreasing(model);
  StepCursor cursor(model);
  std::int64_t negative_run = 0;
  for (std::int64_t k = 1; k <= limit; ++k) {
    const double term = cursor.next().log_mgf(h);
    rm.offer(term, k);
    if (term == kInf) return {kInf, k, SupStatus::attained, k};
    negative_run = term < -policy.delta ? negative_run + 1 : 0;
    if (may_certify && negative_run >= policy.window) return {rm.best, rm.argmax, SupStatus::attained, k};
  }
  return {rm.best, rm.argmax, SupStatus::undetermined, limit};
}

inline Verdict sup_verdict(const SupResult& s) {
  if (s.status == SupStatus::unbounded) return {false, true};
  return {s.value <= kCriterionSlack, s.certified()};
}

inline BlockView require_period(const RiskModel& model, std::int64_t l) {
  if (l < 1) throw std::invalid_argument("period must be >= 1");
  auto view = block_view(model);
  if (!view) throw HypothesisViolated("model is not periodic or quasi-periodic with rates r_{n+l} = r_n");
  if (view->shape.prefix_length != 0) throw HypothesisViolated("periodic reduction requires an empty prefix");
  if (l % view->shape.period != 0)
    throw HypothesisViolated("l = " + std::to_string(l) + " is not a multiple of the cycle length " +
                             std::to_string(view->shape.period));
  if (view->shape.log_ratio > 1e-15) throw HypothesisViolated("q_l v_l <= 1 fails");
  return *view;
}

}  // namespace detail

// L(Y.) = sup{h >= 0 : sup_j E e^{h v_{j-1} Y*_j} <= 1}.
inline AdjustmentResult solve_L_Y(const RiskModel& model, double tol = kDefaultTol,
                                  const TruncationPolicy& policy = {}) {
  if (!(tol > 0)) throw std::invalid_argument("tol must be positive");
  return detail::bisect_feasible(Flavor::L_Y, joint_domain_sup(model, policy), tol, steps_nonpositive(model),
                                 [&](double h) { return detail::sup_verdict(detail::sup_step_log_mgf(model, h, policy)); });
}

// L(S.) = sup{h >= 0 : sup_k E e^{h S*_k} <= 1}.
inline AdjustmentResult solve_L_S(const RiskModel& model, double tol = kDefaultTol,
                                  const TruncationPolicy& policy = {}) {
  if (!(tol > 0)) throw std::invalid_argument("tol must be positive");
  return detail::bisect_feasible(Flavor::L_S, joint_domain_sup(model, policy), tol,
                                 partial_sums_nonpositive(model),
                                 [&](double h) { return detail::sup_verdict(sup_log_mgf(model, h, policy)); });
}

// G_l(h) over the first l steps of a block view.
inline double period_log_mgf(const BlockView& view, std::int64_t l, double h) {
  double g = 0.0;
  for (std::int64_t j = 0; j < l; ++j) {
    const auto block = j / view.shape.period;
    const auto within = j % view.shape.period + 1;
    g += view.tail_log_mgf(block, within, h);
    if (g == kInf) break;
  }
  return g;
}

// L(S_l*) = sup{h >= 0 : E e^{h S*_l} <= 1}.
inline AdjustmentResult solve_period_root(const RiskModel& model, std::int64_t l, double tol = kDefaultTol) {
  if (!(tol > 0)) throw std::invalid_argument("tol must be positive");
  const BlockView view = detail::require_period(model, l);
  double H = kInf;
  double upper = 0.0;
  for (std::int64_t j = 0; j < l; ++j) {
    const auto block = j / view.shape.period;
    const auto idx = static_cast<std::size_t>(j % view.shape.period);
    const double log_w = view.log_weights[idx] + static_cast<double>(block) * view.shape.log_ratio;
    H = std::min(H, mgf_domain_sup(view.laws[idx].base) / std::exp(log_w));
    const double s = support(view.laws[idx].base).upper;
    upper += s == 0.0 ? 0.0 : s * std::exp(log_w);
  }
  return detail::bisect_feasible(Flavor::L_Sl, H, tol, upper <= 0.0, [&](double h) {
    return detail::Verdict{period_log_mgf(view, l, h) <= kCriterionSlack, true};
  });
}

struct LStarCheck {
  bool ok = false;
  std::string reason;  // empty when ok
  double max_delta = 0.0;
  std::int64_t worst_n = 0;
  std::int64_t window_low = 0;
  std::int64_t window_high = 0;
};

// Checks G_{n+l}(L*) - G_n(L*) <= 1e-12 for every n >= m. The window covers
// one model cycle past max(m, prefix); beyond it the increments repeat
// (periodic) or shrink (quasi-periodic with q v <= 1, where convexity keeps
// a nonpositive increment nonpositive).
inline LStarCheck verify_L_star(const RiskModel& model, std::int64_t l, std::int64_t m, double L_star) {
  if (l < 1 || m < 1) throw std::invalid_argument("verify_L_star: l and m must be >= 1");
  if (std::isnan(L_star) || L_star < 0) throw std::invalid_argument("verify_L_star: L* must be >= 0");
  LStarCheck out;
  if (L_star == 0.0) {
    out.ok = true;
    out.window_low = out.window_high = m;
    return out;
  }
  auto view = block_view(model);
  if (!view || view->shape.log_ratio > 0.0) {
    out.reason = "unverifiable-tail";
    return out;
  }
  const std::int64_t start = std::max(m, view->shape.prefix_length);
  out.window_low = m;
  out.window_high = start + view->shape.period - 1;
  const std::int64_t last = out.window_high + l;
  std::vector<double> g(static_cast<std::size_t>(last) + 1, 0.0);
  StepCursor cursor(model);
  for (std::int64_t k = 1; k <= last; ++k) {
    const double term = cursor.next().log_mgf(L_star);
    g[static_cast<std::size_t>(k)] = g[static_cast<std::size_t>(k - 1)] + term;
  }
  out.max_delta = -kInf;
  for (std::int64_t n = m; n <= out.window_high; ++n) {
    const double a = g[static_cast<std::size_t>(n + l)];
    const double b = g[static_cast<std::size_t>(n)];
    const double delta = a == kInf ? kInf : a - b;
    if (delta > out.max_delta) {
      out.max_delta = delta;
      out.worst_n = n;
    }
  }
  out.ok = out.max_delta <= kCriterionSlack;
  if (!out.ok) out.reason = "increment over l steps positive at n = " + std::to_string(out.worst_n);
  return out;
}

// Positive root of E e^{kappa Y} = 1.
inline AdjustmentResult solve_kappa(const Distribution& dist, double tol = kDefaultTol) {
  if (!(tol > 0)) throw std::invalid_argument("tol must be positive");
  if (support(dist).upper <= 0.0) {
    AdjustmentResult res;
    res.flavor = Flavor::kappa;
    res.value = kInf;
    res.bracket_low = res.bracket_high = kInf;
    res.status = "no-root: mgf stays below one";
    return res;
  }
  if (mean(dist) >= 0.0) {
    AdjustmentResult res;
    res.flavor = Flavor::kappa;
    res.status = "no-root: mean is nonnegative";
    return res;
  }
  auto res = detail::bisect_feasible(Flavor::kappa, mgf_domain_sup(dist), tol, false, [&](double h) {
    return detail::Verdict{log_mgf_at(dist, h) <= kCriterionSlack, true};
  });
  if (res.boundary) res.status = "no-root: mgf below one up to the domain boundary";
  return res;
}

inline bool kappa_exists(const AdjustmentResult& r) {
  return r.flavor == Flavor::kappa && r.status == "converged";
}

}  // namespace ruinbound
