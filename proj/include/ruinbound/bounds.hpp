#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ruinbound/adjustment.hpp"
#include "ruinbound/extended_log.hpp"
#include "ruinbound/model.hpp"

namespace ruinbound {

enum class BoundMethod {
  general_opt,
  fixed_h,
  corollary1,
  periodic_C1,
  quasi_periodic_C2,
  theorem3_C3,
  kappa,
  union_baseline,
};

inline std::string_view to_string(BoundMethod m) {
  switch (m) {
    case BoundMethod::general_opt: return "general_opt";
    case BoundMethod::fixed_h: return "fixed_h";
    case BoundMethod::corollary1: return "corollary1";
    case BoundMethod::periodic_C1: return "periodic_C1";
    case BoundMethod::quasi_periodic_C2: return "quasi_periodic_C2";
    case BoundMethod::theorem3_C3: return "theorem3_C3";
    case BoundMethod::kappa: return "kappa";
    case BoundMethod::union_baseline: return "union_baseline";
  }
  return "?";
}

// psi(u) <= C e^{-L u} for every u.
struct Certificate {
  double log_constant = 0.0;
  double exponent = 0.0;  // may be +inf

  double constant() const { return std::exp(log_constant); }
  // log min(1, C e^{-L u})
  double log_bound(double u) const {
    if (exponent == kInf) return u > 0 ? -kInf : std::min(0.0, log_constant);
    return std::min(0.0, log_constant - exponent * u);
  }
};

struct BoundResult {
  double u = 0.0;
  double log_bound = 0.0;  // log min(1, bound); -inf means bound 0
  double h_star = 0.0;
  BoundMethod method = BoundMethod::general_opt;
  std::optional<Certificate> certificate;
  bool certified = true;
  std::string note;

  double bound() const { return std::exp(log_bound); }
  double log10_bound() const { return log_bound * kLog10E; }
};

namespace detail {

struct Minimum {
  double h = 0.0;
  double value = 0.0;
};

// Minimizes a convex f on [0, H] (H may be +inf). f may be +inf past some
// point; its finite region is an interval containing 0. Returns value -inf
// when f keeps decreasing without bound along the doubling search.
inline Minimum minimize_convex(const std::function<double(double)>& f, double H) {
  Minimum best{0.0, f(0.0)};
  auto eval = [&](double h) {
    const double v = f(h);
    if (v < best.value) best = {h, v};
    return v;
  };
  if (!(H > 0)) return best;

  // Exponential bracketing: stop after two consecutive increases.
  std::vector<double> hs{0.0};
  std::vector<double> fs{best.value};
  double h = H == kInf ? 1.0 : std::min(1.0, H / 2.0);
  int increases = 0;
  constexpr double kSearchCap = 1e12;
  while (true) {
    const double v = eval(h);
    increases = v > fs.back() ? increases + 1 : 0;
    hs.push_back(h);
    fs.push_back(v);
    if (increases >= 2 || v == kInf || h >= H) break;
    if (h > kSearchCap) return {h, -kInf};
    h = std::min(2.0 * h, H);
  }
  // The minimum lies between the point before the last non-increase and the end.
  const std::size_t n = hs.size();
  std::size_t lo_idx = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (fs[i] == best.value && hs[i] == best.h) lo_idx = i;
  double a = hs[lo_idx == 0 ? 0 : lo_idx - 1];
  double b = hs[std::min(lo_idx + 1, n - 1)];
  if (b <= a) return best;

  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  for (int it = 0; it < 300 && (b - a) > 1e-10 * std::max(1.0, b); ++it) {
    if (fc == kInf && fd == kInf) {
      b = c;
      c = b - kInvPhi * (b - a);
      d = a + kInvPhi * (b - a);
      fc = eval(c);
      fd = eval(d);
    } else if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = eval(d);
    }
  }
  eval(a);
  eval(b);
  return best;
}

inline double clamp_log(double v) { return std::min(0.0, v); }

}  // namespace detail

// psi(u) <= e^{-hu} sup_k E e^{h S*_k}.
inline BoundResult bound_at_h(const RiskModel& model, double u, double h, const TruncationPolicy& policy = {}) {
  if (!(u > 0)) throw std::invalid_argument("u must be positive");
  if (std::isnan(h) || h < 0) throw std::invalid_argument("h must be >= 0");
  const SupResult s = sup_log_mgf(model, h, policy);
  BoundResult r;
  r.u = u;
  r.h_star = h;
  r.method = BoundMethod::fixed_h;
  r.certified = s.certified();
  r.log_bound = detail::clamp_log(-h * u + s.value);
  if (!r.certified) r.note = "sup undetermined within k_max";
  return r;
}

// inf over h of the bound above.
inline BoundResult bound_optimize(const RiskModel& model, double u, const TruncationPolicy& policy = {}) {
  if (!(u > 0)) throw std::invalid_argument("u must be positive");
  const double H = joint_domain_sup(model, policy);
  auto f = [&](double h) { return -h * u + sup_log_mgf(model, h, policy).value; };
  const auto m = detail::minimize_convex(f, H);
  BoundResult r;
  r.u = u;
  r.h_star = m.h;
  r.method = BoundMethod::general_opt;
  if (m.value == -kInf) {
    r.log_bound = -kInf;
    r.note = "bound decreases without limit in h";
    return r;
  }
  const SupResult s = sup_log_mgf(model, m.h, policy);
  r.certified = s.certified();
  r.log_bound = detail::clamp_log(-m.h * u + s.value);
  if (!r.certified) r.note = "sup undetermined within k_max";
  return r;
}

// psi(u) <= inf_{h in [0, L(Y.)]} e^{-hu} E e^{h Y*_1} <= C e^{-L(Y.) u}.
inline BoundResult bound_corollary1(const RiskModel& model, double u, double tol = kDefaultTol,
                                    const TruncationPolicy& policy = {}) {
  if (!(u > 0)) throw std::invalid_argument("u must be positive");
  const AdjustmentResult L = solve_L_Y(model, tol, policy);
  const StepLaw first = step_law(model, 1);
  auto term = [&](double h) { return scaled_log_mgf(first, 0.0, h); };
  BoundResult r;
  r.u = u;
  r.method = BoundMethod::corollary1;
  r.certified = L.certified;
  if (L.value == kInf) {
    r.h_star = kInf;
    r.log_bound = -kInf;
    r.certificate = Certificate{0.0, kInf};
    return r;
  }
  if (L.value == 0.0) {
    r.log_bound = 0.0;
    r.certificate = Certificate{0.0, 0.0};
    return r;
  }
  // At a boundary exponent the MGF may be infinite at L itself; e^{-hu} with h -> L still holds.
  const double t_L = term(L.value);
  r.certificate = Certificate{t_L == kInf ? 0.0 : t_L, L.value};
  const auto m = detail::minimize_convex([&](double h) { return -h * u + term(h); }, L.value);
  r.h_star = m.h;
  r.log_bound = detail::clamp_log(m.value);
  if (r.certificate->log_bound(u) < r.log_bound) {
    r.log_bound = r.certificate->log_bound(u);
    r.h_star = L.value;
  }
  if (!r.certified) r.note = "L(Y) not certified";
  return r;
}

struct PeriodicVariant {
  enum class Kind { cor3, thm3, corP7 };
  Kind kind = Kind::cor3;
  std::int64_t m = 1;     // corP7 only
  double L_star = 0.0;    // corP7 only

  static PeriodicVariant cor3() { return {Kind::cor3, 1, 0.0}; }
  static PeriodicVariant thm3() { return {Kind::thm3, 1, 0.0}; }
  static PeriodicVariant corP7(std::int64_t m, double L_star) { return {Kind::corP7, m, L_star}; }
};

// Finite-max bounds for periodic and quasi-periodic models:
//   cor3:  max_{1<=k<=l}     E e^{h S_k},   h <= L(S_l),   r = 0
//   thm3:  max_{0<=k<l}      E e^{h S*_k},  h <= L(S_l*),  q_l v_l <= 1
//   corP7: max_{1<=k<=l+m-1} E e^{h S*_k},  h <= L*,       increments over l steps verified
// Without u only the certificate is computed (u = 0, log_bound = log min(1, C)).
// certificate_exponent picks a smaller h for the constant-exponent form.
inline BoundResult bound_periodic(const RiskModel& model, std::int64_t l, const PeriodicVariant& variant,
                                  std::optional<double> u = std::nullopt, double tol = kDefaultTol,
                                  std::optional<double> certificate_exponent = std::nullopt) {
  if (u && !(*u > 0)) throw std::invalid_argument("u must be positive");
  if (l < 1) throw std::invalid_argument("l must be >= 1");
  BoundResult r;
  r.u = u.value_or(0.0);
  std::int64_t first = 1;
  std::int64_t last = l;
  double exponent = 0.0;
  switch (variant.kind) {
    case PeriodicVariant::Kind::cor3: {
      r.method = BoundMethod::periodic_C1;
      if (!rates_all_zero(model.rates())) throw HypothesisViolated("cor3 requires r = 0");
      const auto shape = block_structure(model);
      if (!shape || shape->log_ratio != 0.0) throw HypothesisViolated("cor3 requires periodic increments");
      exponent = solve_period_root(model, l, tol).value;
      break;
    }
    case PeriodicVariant::Kind::thm3:
      r.method = BoundMethod::theorem3_C3;
      exponent = solve_period_root(model, l, tol).value;
      first = 0;
      last = l - 1;
      break;
    case PeriodicVariant::Kind::corP7: {
      r.method = BoundMethod::quasi_periodic_C2;
      const LStarCheck check = verify_L_star(model, l, variant.m, variant.L_star);
      if (!check.ok) throw HypothesisViolated("L* check failed: " + check.reason);
      exponent = variant.L_star;
      last = l + variant.m - 1;
      break;
    }
  }
  const double h_c = certificate_exponent.value_or(exponent);
  if (std::isnan(h_c) || h_c < 0 || h_c > exponent)
    throw std::invalid_argument("certificate exponent must lie in [0, " + std::to_string(exponent) + "]");

  auto F = [&](double h) {
    double best = first == 0 ? 0.0 : -kInf;
    if (h == 0.0) return 0.0;
    StepCursor cursor(model);
    double g = 0.0;
    for (std::int64_t k = 1; k <= last; ++k) {
      g += cursor.next().log_mgf(h);
      if (k >= first) best = std::max(best, g);
    }
    return best;
  };

  if (h_c == kInf) {
    r.certificate = Certificate{0.0, kInf};
    r.h_star = kInf;
    r.log_bound = u ? -kInf : 0.0;
    return r;
  }
  r.certificate = Certificate{F(h_c), h_c};
  if (!u) {
    r.h_star = h_c;
    r.log_bound = detail::clamp_log(r.certificate->log_constant);
    return r;
  }
  const double uu = *u;
  if (exponent == kInf) {
    const auto m = detail::minimize_convex([&](double h) { return -h * uu + F(h); }, kInf);
    r.h_star = m.h;
    r.log_bound = detail::clamp_log(m.value);
    return r;
  }
  const auto m = detail::minimize_convex([&](double h) { return -h * uu + F(h); }, exponent);
  r.h_star = m.h;
  r.log_bound = detail::clamp_log(m.value);
  if (r.certificate->log_bound(uu) < r.log_bound) {
    r.log_bound = r.certificate->log_bound(uu);
    r.h_star = h_c;
  }
  return r;
}

// psi(u) <= e^{-hu} sum_k E e^{h S*_k}.
inline BoundResult bound_union_baseline(const RiskModel& model, double u, double h,
                                        const TruncationPolicy& policy = {}) {
  if (!(u > 0)) throw std::invalid_argument("u must be positive");
  if (std::isnan(h) || h < 0) throw std::invalid_argument("h must be >= 0");
  BoundResult r;
  r.u = u;
  r.h_star = h;
  r.method = BoundMethod::union_baseline;
  auto diverges = [&](std::string why) {
    r.log_bound = 0.0;
    r.note = std::move(why);
    return r;
  };
  if (h == 0.0) return diverges("series diverges");

  if (auto view = block_view(model)) {
    if (view->shape.log_ratio < 0.0) return diverges("series diverges: block increments vanish");
    if (view->shape.log_ratio == 0.0) {
      const std::int64_t P = view->shape.prefix_length;
      std::vector<double> prefix;
      std::vector<double> cycle;
      double g = 0.0;
      for (std::int64_t k = 1; k <= view->head(); ++k) {
        const auto idx = static_cast<std::size_t>(k - 1);
        g += log_mgf_at(view->laws[idx].base, h * std::exp(view->log_weights[idx]));
        if (g == kInf) return diverges("infinite moment");
        (k <= P ? prefix : cycle).push_back(g);
      }
      const double B = g - (P > 0 ? prefix.back() : 0.0);
      if (B >= 0.0) return diverges("series diverges: nonnegative period drift");
      const double tail = log_sum_exp(cycle) - log1m_exp(B);
      const double total = log_add_exp(log_sum_exp(prefix), tail);
      r.log_bound = detail::clamp_log(-h * u + total);
      return r;
    }
  }

  const bool decreasing_terms =
      rates_all_zero(model.rates()) &&
      (std::holds_alternative<IndexedTwoPoint>(model.increments()) ||
       (std::holds_alternative<IndexedNormal>(model.increments()) &&
        std::get<IndexedNormal>(model.increments()).slope < 0));
  if (!decreasing_terms) return diverges("tail not summable under a certified structure");

  // Per-step terms decrease in k, so once a term t is negative the rest of the
  // series is at most e^{G_k} e^t / (1 - e^t).
  StepCursor cursor(model);
  double g = 0.0;
  double total = -kInf;
  for (std::int64_t k = 1; k <= policy.k_max; ++k) {
    const double t = cursor.next().log_mgf(h);
    g += t;
    if (g == kInf) return diverges("infinite moment");
    total = log_add_exp(total, g);
    if (t < 0.0) {
      const double tail = g + t - log1m_exp(t);
      if (tail < total - 40.0 || k == policy.k_max) {
        total = log_add_exp(total, tail);
        r.log_bound = detail::clamp_log(-h * u + total);
        return r;
      }
    }
  }
  return diverges("terms still nonnegative at k_max");
}

// psi(u) <= e^{-kappa u} with E e^{kappa Y*_1} = 1, for i.i.d. steps whose
// discounted weights stay <= 1.
inline BoundResult bound_kappa(const RiskModel& model, double u, double tol = kDefaultTol) {
  if (!(u > 0)) throw std::invalid_argument("u must be positive");
  const auto view = block_view(model);
  if (!view || view->shape.period != 1 || view->shape.prefix_length != 0 || view->shape.log_ratio > 0.0)
    throw HypothesisViolated("kappa bound requires i.i.d. increments with nonincreasing weights");
  const AdjustmentResult k = solve_kappa(view->laws.front().base, tol);
  BoundResult r;
  r.u = u;
  r.method = BoundMethod::kappa;
  double exponent = k.value;
  if (k.status == "no-root: mean is nonnegative") exponent = 0.0;
  r.certificate = Certificate{0.0, exponent};
  r.h_star = exponent;
  r.log_bound = r.certificate->log_bound(u);
  r.note = k.status;
  return r;
}

// Constant-exponent curves C e^{-L u} from earlier work, evaluated only for
// side-by-side comparison.
struct ExternalReference {
  std::string_view name;
  double constant;
  double exponent;

  double log_bound(double u) const { return std::min(0.0, std::log(constant) - exponent * u); }
};

inline constexpr ExternalReference kExternalEx2{"external_ex2", 1502.0, 0.01269};
inline constexpr ExternalReference kExternalEx4{"external_ex4", 178.0, 0.05};

}  // namespace ruinbound
