#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ruinbound/distributions.hpp"
#include "ruinbound/extended_log.hpp"

namespace ruinbound {

class IndexBeyondPrefix : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class HypothesisViolated : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Sequence rules for the law of Y*_k, k = 1, 2, ...

struct ExplicitPrefix {
  std::vector<Distribution> laws;
};

// Y*_{n+l} ~ Y*_n.
struct Periodic {
  std::vector<Distribution> cycle;
};

// Y*_{n+l} ~ scale * Y*_n.
struct QuasiPeriodicScaled {
  std::vector<Distribution> cycle;
  double scale;
};

using PeriodicTail = std::variant<Periodic, QuasiPeriodicScaled>;

// Y*_k for k <= prefix.size() from the prefix, then the tail re-indexed from 1.
struct PrefixThenTail {
  std::vector<Distribution> prefix;
  PeriodicTail tail;
};

// Y*_n ~ N(intercept + slope * n, 1).
struct IndexedNormal {
  double slope;
  double intercept;
};

// P[Y*_n = 1] = 1/(n+1), P[Y*_n = -1] = n/(n+1).
struct IndexedTwoPoint {};

using SequenceRule = std::variant<ExplicitPrefix, Periodic, QuasiPeriodicScaled, PrefixThenTail,
                                  IndexedNormal, IndexedTwoPoint>;

// ---------------------------------------------------------------------------
// Deterministic real sequences: rate floors r_k, and the event-level premium
// rates and interest rates.

struct ConstantRate {
  double value = 0.0;
};

// values[(k - 1) mod size].
struct PeriodicRates {
  std::vector<double> values;
};

// values[k - 1]; undefined beyond the list.
struct ExplicitRates {
  std::vector<double> values;
};

using RateRule = std::variant<ConstantRate, PeriodicRates, ExplicitRates>;

inline double rate_at(const RateRule& rule, std::int64_t k) {
  if (k < 1) throw std::invalid_argument("rate_at: index must be >= 1");
  return std::visit(
      detail::Overloaded{
          [](const ConstantRate& r) { return r.value; },
          [k](const PeriodicRates& r) {
            return r.values[static_cast<std::size_t>((k - 1) % std::ssize(r.values))];
          },
          [k](const ExplicitRates& r) {
            if (k > std::ssize(r.values)) {
              throw IndexBeyondPrefix("rate index " + std::to_string(k) + " beyond explicit list of " +
                                      std::to_string(r.values.size()));
            }
            return r.values[static_cast<std::size_t>(k - 1)];
          },
      },
      rule);
}

// -sum_{j<=k} log(1 + r_j), i.e. log v_k.
inline double log_discount(const RateRule& rule, std::int64_t k) {
  if (k < 0) throw std::invalid_argument("log_discount: index must be >= 0");
  return std::visit(
      detail::Overloaded{
          [k](const ConstantRate& r) { return -static_cast<double>(k) * std::log1p(r.value); },
          [k](const PeriodicRates& r) {
            const std::int64_t p = std::ssize(r.values);
            double cycle = 0.0;
            double partial = 0.0;
            for (std::int64_t i = 0; i < p; ++i) {
              const double term = std::log1p(r.values[static_cast<std::size_t>(i)]);
              cycle += term;
              if (i < k % p) partial += term;
            }
            return -(static_cast<double>(k / p) * cycle + partial);
          },
          [k](const ExplicitRates& r) {
            if (k > std::ssize(r.values)) {
              throw IndexBeyondPrefix("rate index " + std::to_string(k) + " beyond explicit list of " +
                                      std::to_string(r.values.size()));
            }
            double s = 0.0;
            for (std::int64_t i = 0; i < k; ++i) s += std::log1p(r.values[static_cast<std::size_t>(i)]);
            return -s;
          },
      },
      rule);
}

inline bool rates_all_zero(const RateRule& rule) {
  return std::visit(
      detail::Overloaded{
          [](const ConstantRate& r) { return r.value == 0.0; },
          [](const auto& r) {
            return std::all_of(r.values.begin(), r.values.end(), [](double v) { return v == 0.0; });
          },
      },
      rule);
}

// True iff r_{n+shift} = r_n for every n > offset.
inline bool rates_shift_invariant(const RateRule& rule, std::int64_t shift) {
  return std::visit(
      detail::Overloaded{
          [](const ConstantRate&) { return true; },
          [shift](const PeriodicRates& r) {
            const std::int64_t p = std::ssize(r.values);
            for (std::int64_t i = 0; i < p; ++i) {
              if (r.values[static_cast<std::size_t>((i + shift) % p)] !=
                  r.values[static_cast<std::size_t>(i)])
                return false;
            }
            return true;
          },
          [](const ExplicitRates&) { return false; },
      },
      rule);
}

namespace detail {

inline void validate_rates(const RateRule& rule, const char* what) {
  std::visit(Overloaded{
                 [what](const ConstantRate& r) {
                   require(std::isfinite(r.value) && r.value >= 0,
                           std::string(what) + ": rates must be finite and >= 0");
                 },
                 [what](const auto& r) {
                   require(!r.values.empty(), std::string(what) + ": rate list must be nonempty");
                   for (double v : r.values)
                     require(std::isfinite(v) && v >= 0,
                             std::string(what) + ": rates must be finite and >= 0");
                 },
             },
             rule);
}

inline void validate_tail(const PeriodicTail& tail) {
  std::visit(Overloaded{
                 [](const Periodic& p) { require(!p.cycle.empty(), "periodic: cycle must be nonempty"); },
                 [](const QuasiPeriodicScaled& p) {
                   require(!p.cycle.empty(), "quasi_periodic: cycle must be nonempty");
                   require(std::isfinite(p.scale) && p.scale > 0, "quasi_periodic: scale must be positive");
                 },
             },
             tail);
}

inline void validate_sequence(const SequenceRule& rule) {
  std::visit(Overloaded{
                 [](const ExplicitPrefix& r) { require(!r.laws.empty(), "explicit: list must be nonempty"); },
                 [](const Periodic& r) { validate_tail(r); },
                 [](const QuasiPeriodicScaled& r) { validate_tail(r); },
                 [](const PrefixThenTail& r) { validate_tail(r.tail); },
                 [](const IndexedNormal& r) {
                   require(std::isfinite(r.slope) && std::isfinite(r.intercept),
                           "indexed_normal: parameters must be finite");
                 },
                 [](const IndexedTwoPoint&) {},
             },
             rule);
}

}  // namespace detail

// A non-homogeneous risk model: the laws of the discounted increments Y*_k and
// the deterministic rate floors r_k. All-zero rates give the interest-free model.
class RiskModel {
 public:
  explicit RiskModel(SequenceRule increments, RateRule rates = ConstantRate{}, std::string label = {})
      : increments_(std::move(increments)), rates_(std::move(rates)), label_(std::move(label)) {
    detail::validate_sequence(increments_);
    detail::validate_rates(rates_, "risk model");
  }

  const SequenceRule& increments() const { return increments_; }
  const RateRule& rates() const { return rates_; }
  const std::string& label() const { return label_; }

 private:
  SequenceRule increments_;
  RateRule rates_;
  std::string label_;
};

// Law of Y*_k as exp(log_scale) * base.
struct StepLaw {
  Distribution base;
  double log_scale = 0.0;
};

namespace detail {

inline StepLaw tail_law(const PeriodicTail& tail, std::int64_t n) {
  return std::visit(Overloaded{
                        [n](const Periodic& p) {
                          const std::int64_t l = std::ssize(p.cycle);
                          return StepLaw{p.cycle[static_cast<std::size_t>((n - 1) % l)], 0.0};
                        },
                        [n](const QuasiPeriodicScaled& p) {
                          const std::int64_t l = std::ssize(p.cycle);
                          const std::int64_t i = (n - 1) / l;
                          return StepLaw{p.cycle[static_cast<std::size_t>((n - 1) % l)],
                                         static_cast<double>(i) * std::log(p.scale)};
                        },
                    },
                    tail);
}

inline IndexBeyondPrefix beyond(std::int64_t k, std::size_t n) {
  return IndexBeyondPrefix("index " + std::to_string(k) + " beyond explicit prefix of length " +
                           std::to_string(n));
}

}  // namespace detail

inline StepLaw step_law(const RiskModel& model, std::int64_t k) {
  if (k < 1) throw std::invalid_argument("step index must be >= 1");
  return std::visit(
      detail::Overloaded{
          [k](const ExplicitPrefix& r) {
            if (k > std::ssize(r.laws)) throw detail::beyond(k, r.laws.size());
            return StepLaw{r.laws[static_cast<std::size_t>(k - 1)], 0.0};
          },
          [k](const Periodic& r) { return detail::tail_law(r, k); },
          [k](const QuasiPeriodicScaled& r) { return detail::tail_law(r, k); },
          [k](const PrefixThenTail& r) {
            const std::int64_t p = std::ssize(r.prefix);
            if (k <= p) return StepLaw{r.prefix[static_cast<std::size_t>(k - 1)], 0.0};
            return detail::tail_law(r.tail, k - p);
          },
          [k](const IndexedNormal& r) {
            return StepLaw{Distribution::normal(r.intercept + r.slope * static_cast<double>(k), 1.0), 0.0};
          },
          [k](const IndexedTwoPoint&) {
            const double n = static_cast<double>(k);
            return StepLaw{Distribution::two_point(1.0, 1.0 / (n + 1.0), -1.0), 0.0};
          },
      },
      model.increments());
}

inline Distribution distribution_at(const RiskModel& model, std::int64_t k) {
  StepLaw law = step_law(model, k);
  if (law.log_scale == 0.0) return law.base;
  return Distribution::scaled(std::exp(law.log_scale), law.base);
}

// Number of defined indices, or nullopt for rules defined on every k >= 1.
inline std::optional<std::int64_t> defined_length(const RiskModel& model) {
  if (const auto* r = std::get_if<ExplicitPrefix>(&model.increments())) return std::ssize(r->laws);
  return std::nullopt;
}

inline double discount_factor(const RiskModel& model, std::int64_t k) {
  return std::exp(log_discount(model.rates(), k));
}

// log E e^{h w Y} for Y ~ law, w = exp(law.log_scale + log_weight).
inline double scaled_log_mgf(const StepLaw& law, double log_weight, double h) {
  if (h == 0.0) return 0.0;
  return log_mgf_at(law.base, h * std::exp(law.log_scale + log_weight));
}

// Walks k = 1, 2, ... yielding the law of Y*_k together with log v_{k-1}.
class StepCursor {
 public:
  explicit StepCursor(const RiskModel& model) : model_(&model) {}

  struct Step {
    std::int64_t index;
    StepLaw law;
    double log_v_prev;  // log v_{k-1}

    double log_weight() const { return law.log_scale + log_v_prev; }
    double log_mgf(double h) const { return scaled_log_mgf(law, log_v_prev, h); }
  };

  Step next() {
    ++k_;
    Step step{k_, step_law(*model_, k_), log_v_};
    log_v_ -= std::log1p(rate_at(model_->rates(), k_));
    return step;
  }

 private:
  const RiskModel* model_;
  std::int64_t k_ = 0;
  double log_v_ = 0.0;
};

// G_k(h) = sum_{j<=k} log E e^{h v_{j-1} Y*_j}, k = 1..K.
inline std::vector<ExtendedLogValue> cumulative_log_mgf(const RiskModel& model, double h, std::int64_t K) {
  if (std::isnan(h) || h < 0) throw std::invalid_argument("cumulative_log_mgf: h must be >= 0");
  if (K < 1) throw std::invalid_argument("cumulative_log_mgf: K must be >= 1");
  if (auto n = defined_length(model); n && K > *n) throw detail::beyond(K, static_cast<std::size_t>(*n));
  std::vector<ExtendedLogValue> out;
  out.reserve(static_cast<std::size_t>(K));
  StepCursor cursor(model);
  ExtendedLogValue acc;
  for (std::int64_t k = 1; k <= K; ++k) {
    acc += ExtendedLogValue(cursor.next().log_mgf(h));
    out.push_back(acc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Periodic / quasi-periodic block structure.
//
// When the increments are (prefix +) periodic or quasi-periodic with period l
// and the rates satisfy r_{n+l} = r_n beyond the prefix, the weighted step
// v_{P+il+j-1} Y*_{P+il+j} has the law of ratio^i v_{P+j-1} Y*_{P+j}, where
// ratio = q_l v_{P+l} / v_P. Every sup over k then reduces to finitely many
// evaluations.

struct BlockStructure {
  std::int64_t prefix_length = 0;
  std::int64_t period = 1;
  double log_ratio = 0.0;  // log(q_l v_{P+l} / v_P); <= 0 iff q_l v_l <= 1
};

// The first P + l steps of a block-structured model.
struct BlockView {
  BlockStructure shape;
  std::vector<StepLaw> laws;         // Y*_1 .. Y*_{P+l}
  std::vector<double> log_weights;   // log(scale_k v_{k-1}) for k = 1 .. P+l

  std::int64_t head() const { return shape.prefix_length + shape.period; }

  // log E e^{h w Y*} for tail step j (1-based within the cycle) of block i.
  double tail_log_mgf(std::int64_t block, std::int64_t j, double h) const {
    const auto idx = static_cast<std::size_t>(shape.prefix_length + j - 1);
    if (h == 0.0) return 0.0;
    return log_mgf_at(laws[idx].base,
                      h * std::exp(log_weights[idx] + static_cast<double>(block) * shape.log_ratio));
  }
};

inline std::optional<BlockStructure> block_structure(const RiskModel& model) {
  std::int64_t prefix = 0;
  std::int64_t period = 0;
  double log_q = 0.0;
  auto from_tail = [&](const PeriodicTail& tail) {
    std::visit(detail::Overloaded{
                   [&](const Periodic& p) { period = std::ssize(p.cycle); },
                   [&](const QuasiPeriodicScaled& p) {
                     period = std::ssize(p.cycle);
                     log_q = std::log(p.scale);
                   },
               },
               tail);
  };
  const bool shaped = std::visit(
      detail::Overloaded{
          [&](const Periodic& r) { from_tail(r); return true; },
          [&](const QuasiPeriodicScaled& r) { from_tail(r); return true; },
          [&](const PrefixThenTail& r) {
            prefix = std::ssize(r.prefix);
            from_tail(r.tail);
            return true;
          },
          [&](const IndexedNormal& r) {
            period = 1;
            return r.slope == 0.0;
          },
          [](const auto&) { return false; },
      },
      model.increments());
  if (!shaped) return std::nullopt;
  if (const auto* p = std::get_if<PeriodicRates>(&model.rates())) {
    const std::int64_t merged = std::lcm(period, std::ssize(p->values));
    log_q *= static_cast<double>(merged / period);
    period = merged;
  }
  if (!rates_shift_invariant(model.rates(), period)) return std::nullopt;
  const double log_ratio =
      log_q + log_discount(model.rates(), prefix + period) - log_discount(model.rates(), prefix);
  return BlockStructure{prefix, period, log_ratio};
}

inline std::optional<BlockView> block_view(const RiskModel& model) {
  auto shape = block_structure(model);
  if (!shape) return std::nullopt;
  BlockView view{*shape, {}, {}};
  StepCursor cursor(model);
  for (std::int64_t k = 1; k <= view.head(); ++k) {
    auto step = cursor.next();
    view.log_weights.push_back(step.log_weight());
    view.laws.push_back(StepLaw{std::move(step.law.base), 0.0});
  }
  return view;
}

// ---------------------------------------------------------------------------
// sup_k G_k(h)

struct TruncationPolicy {
  std::int64_t k_max = 10000;
  std::int64_t window = 50;
  double delta = 1e-6;
  // Cap on steps examined when summing contracting quasi-periodic blocks.
  std::int64_t max_block_terms = 1'000'000;
};

enum class SupStatus {
  attained,      // value is the global sup, reached at argmax (value may be +inf)
  unbounded,     // G_k -> +inf without being infinite at any finite k
  undetermined,  // running max over the scanned range; the global sup was not certified
};

struct SupResult {
  double value = 0.0;
  std::int64_t argmax = 1;  // 0 when unbounded
  SupStatus status = SupStatus::attained;
  std::int64_t scanned = 0;

  bool certified() const { return status != SupStatus::undetermined; }
};

namespace detail {

struct RunningMax {
  double best = -kInf;
  std::int64_t argmax = 0;

  void offer(double value, std::int64_t k) {
    if (value > best) {
      best = value;
      argmax = k;
    }
  }
};

inline SupResult sup_periodic(const BlockView& view, double h) {
  RunningMax rm;
  double g = 0.0;
  double g_prefix = 0.0;
  for (std::int64_t k = 1; k <= view.head(); ++k) {
    const auto idx = static_cast<std::size_t>(k - 1);
    const double term = log_mgf_at(view.laws[idx].base, h * std::exp(view.log_weights[idx]));
    if (term == kInf) return {kInf, k, SupStatus::attained, k};
    g += term;
    rm.offer(g, k);
    if (k == view.shape.prefix_length) g_prefix = g;
  }
  if (g - g_prefix > 0) return {kInf, 0, SupStatus::unbounded, view.head()};
  return {rm.best, rm.argmax, SupStatus::attained, view.head()};
}

// Blocks shrink geometrically. Once a block's increment is <= 0 all later ones
// are too, and convexity of each partial-block log-MGF (zero at 0) bounds every
// later G_k by P_i + max(0, max_k C_k(t_i)); scanning stops when that bound
// meets the running max.
inline SupResult sup_contracting(const BlockView& view, double h, const TruncationPolicy& policy) {
  RunningMax rm;
  const std::int64_t P = view.shape.prefix_length;
  const std::int64_t l = view.shape.period;
  double g = 0.0;
  for (std::int64_t k = 1; k <= P; ++k) {
    const auto idx = static_cast<std::size_t>(k - 1);
    const double term = log_mgf_at(view.laws[idx].base, h * std::exp(view.log_weights[idx]));
    if (term == kInf) return {kInf, k, SupStatus::attained, k};
    g += term;
    rm.offer(g, k);
  }
  double block_start = g;
  std::int64_t scanned = P;
  for (std::int64_t i = 0; scanned < policy.max_block_terms; ++i) {
    double c = 0.0;
    double c_max = -kInf;
    for (std::int64_t j = 1; j <= l; ++j) {
      const double term = view.tail_log_mgf(i, j, h);
      const std::int64_t k = P + i * l + j;
      if (term == kInf) return {kInf, k, SupStatus::attained, k};
      c += term;
      c_max = std::max(c_max, c);
      rm.offer(block_start + c, k);
    }
    scanned += l;
    if (c <= 0) {
      const double upper = block_start + std::max(0.0, c_max);
      if (upper <= rm.best + 1e-12) return {rm.best, rm.argmax, SupStatus::attained, scanned};
    }
    block_start += c;
  }
  return {rm.best, rm.argmax, SupStatus::undetermined, scanned};
}

// Blocks grow. A positive block increment at t_i forces every later block
// increment to exceed it, so G_k diverges.
inline SupResult sup_expanding(const BlockView& view, double h, const TruncationPolicy& policy) {
  RunningMax rm;
  const std::int64_t P = view.shape.prefix_length;
  const std::int64_t l = view.shape.period;
  double g = 0.0;
  for (std::int64_t k = 1; k <= P; ++k) {
    const auto idx = static_cast<std::size_t>(k - 1);
    const double term = log_mgf_at(view.laws[idx].base, h * std::exp(view.log_weights[idx]));
    if (term == kInf) return {kInf, k, SupStatus::attained, k};
    g += term;
    rm.offer(g, k);
  }
  std::int64_t scanned = P;
  for (std::int64_t i = 0; scanned + l <= std::max(policy.k_max, P + l); ++i) {
    double c = 0.0;
    for (std::int64_t j = 1; j <= l; ++j) {
      const double term = view.tail_log_mgf(i, j, h);
      const std::int64_t k = P + i * l + j;
      if (term == kInf) return {kInf, k, SupStatus::attained, k};
      c += term;
      rm.offer(g + c, k);
    }
    scanned += l;
    if (c > 0) return {kInf, 0, SupStatus::unbounded, scanned};
    g += c;
  }
  return {rm.best, rm.argmax, SupStatus::undetermined, scanned};
}

// Per-step terms of the indexed families are eventually negative and stay
// negative once they are; IndexedNormal needs a negative slope for that.
inline bool eventually_decreasing(const RiskModel& model) {
  if (const auto* r = std::get_if<IndexedNormal>(&model.increments())) return r->slope < 0;
  return std::holds_alternative<IndexedTwoPoint>(model.increments());
}

inline SupResult sup_scan(const RiskModel& model, double h, const TruncationPolicy& policy) {
  if (const auto* r = std::get_if<IndexedNormal>(&model.increments());
      r && r->slope > 0 && rates_all_zero(model.rates())) {
    // G_k is a convex quadratic in k with positive leading coefficient.
    return {kInf, 0, SupStatus::unbounded, 0};
  }
  std::int64_t limit = policy.k_max;
  if (auto n = defined_length(model)) limit = std::min(limit, *n);
  const bool may_certify = eventually_decreasing(model);
  RunningMax rm;
  StepCursor cursor(model);
  double g = 0.0;
  std::int64_t negative_run = 0;
  for (std::int64_t k = 1; k <= limit; ++k) {
    const double term = cursor.next().log_mgf(h);
    if (term == kInf) return {kInf, k, SupStatus::attained, k};
    g += term;
    rm.offer(g, k);
    negative_run = term < -policy.delta ? negative_run + 1 : 0;
    if (may_certify && negative_run >= policy.window) {
      return {rm.best, rm.argmax, SupStatus::attained, k};
    }
  }
  return {rm.best, rm.argmax, SupStatus::undetermined, limit};
}

}  // namespace detail

inline SupResult sup_log_mgf(const RiskModel& model, double h, const TruncationPolicy& policy = {}) {
  if (std::isnan(h) || h < 0) throw std::invalid_argument("sup_log_mgf: h must be >= 0");
  if (h == 0.0) return {0.0, 1, SupStatus::attained, 1};
  if (auto view = block_view(model)) {
    if (view->shape.log_ratio == 0.0) return detail::sup_periodic(*view, h);
    if (view->shape.log_ratio < 0.0) return detail::sup_contracting(*view, h, policy);
    return detail::sup_expanding(*view, h, policy);
  }
  return detail::sup_scan(model, h, policy);
}

// ---------------------------------------------------------------------------
// Structural facts used by the solvers.

// sup{h >= 0 : every step MGF finite at h}, over the steps that can bind.
inline double joint_domain_sup(const RiskModel& model, const TruncationPolicy& policy = {}) {
  auto step_sup = [](const StepLaw& law, double log_v) {
    return mgf_domain_sup(law.base) / std::exp(law.log_scale + log_v);
  };
  if (auto view = block_view(model)) {
    double H = kInf;
    for (std::size_t i = 0; i < view->laws.size(); ++i)
      H = std::min(H, mgf_domain_sup(view->laws[i].base) / std::exp(view->log_weights[i]));
    if (view->shape.log_ratio <= 0.0 || H == kInf) return H;
  }
  if (std::holds_alternative<IndexedNormal>(model.increments()) ||
      std::holds_alternative<IndexedTwoPoint>(model.increments()))
    return kInf;
  std::int64_t limit = policy.k_max;
  if (auto n = defined_length(model)) limit = std::min(limit, *n);
  double H = kInf;
  StepCursor cursor(model);
  for (std::int64_t k = 1; k <= limit; ++k) {
    const auto step = cursor.next();
    H = std::min(H, step_sup(step.law, step.log_v_prev));
  }
  return H;
}

// True when every Y*_k <= 0 almost surely (so every step MGF stays <= 1).
inline bool steps_nonpositive(const RiskModel& model) {
  if (auto view = block_view(model)) {
    return std::all_of(view->laws.begin(), view->laws.end(),
                       [](const StepLaw& law) { return support(law.base).upper <= 0; });
  }
  if (const auto* r = std::get_if<ExplicitPrefix>(&model.increments())) {
    return std::all_of(r->laws.begin(), r->laws.end(),
                       [](const Distribution& d) { return support(d).upper <= 0; });
  }
  return false;
}

// True when every S*_k <= 0 almost surely, so sup_k E e^{hS*_k} <= 1 for all h.
inline bool partial_sums_nonpositive(const RiskModel& model) {
  auto upper = [](const StepLaw& law, double log_weight) {
    const double u = support(law.base).upper;
    return u == 0.0 ? 0.0 : u * std::exp(log_weight);
  };
  if (auto view = block_view(model)) {
    if (view->shape.log_ratio > 0.0) return steps_nonpositive(model);
    double s = 0.0;
    for (std::int64_t k = 1; k <= view->shape.prefix_length; ++k) {
      const auto idx = static_cast<std::size_t>(k - 1);
      s += upper(view->laws[idx], view->log_weights[idx]);
      if (s > 0) return false;
    }
    double c = 0.0;
    for (std::int64_t j = 1; j <= view->shape.period; ++j) {
      const auto idx = static_cast<std::size_t>(view->shape.prefix_length + j - 1);
      c += upper(view->laws[idx], view->log_weights[idx]);
      if (c > 0) return false;
    }
    return true;
  }
  if (const auto* r = std::get_if<ExplicitPrefix>(&model.increments())) {
    StepCursor cursor(model);
    double s = 0.0;
    for (std::size_t k = 0; k < r->laws.size(); ++k) {
      const auto step = cursor.next();
      s += upper(step.law, step.log_weight());
      if (s > 0) return false;
    }
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Event-level description: premium rate p_k, claim Z_k, interarrival theta_k,
// premium interest beta_k and reserve interest alpha_k.

struct ConstantLaw {
  Distribution law;
};

struct PeriodicLaws {
  std::vector<Distribution> laws;
};

struct ExplicitLaws {
  std::vector<Distribution> laws;
};

using LawRule = std::variant<ConstantLaw, PeriodicLaws, ExplicitLaws>;
using ValueRule = RateRule;

inline const Distribution& law_at(const LawRule& rule, std::int64_t k) {
  return std::visit(
      detail::Overloaded{
          [](const ConstantLaw& r) -> const Distribution& { return r.law; },
          [k](const PeriodicLaws& r) -> const Distribution& {
            return r.laws[static_cast<std::size_t>((k - 1) % std::ssize(r.laws))];
          },
          [k](const ExplicitLaws& r) -> const Distribution& {
            if (k > std::ssize(r.laws)) throw detail::beyond(k, r.laws.size());
            return r.laws[static_cast<std::size_t>(k - 1)];
          },
      },
      rule);
}

class EventModel {
 public:
  EventModel(ValueRule premium_rate, LawRule claim, LawRule interarrival,
             ValueRule premium_interest = ConstantRate{}, ValueRule reserve_interest = ConstantRate{},
             std::string label = {})
      : premium_rate_(std::move(premium_rate)),
        claim_(std::move(claim)),
        interarrival_(std::move(interarrival)),
        premium_interest_(std::move(premium_interest)),
        reserve_interest_(std::move(reserve_interest)),
        label_(std::move(label)) {
    detail::validate_rates(premium_interest_, "premium_interest");
    detail::validate_rates(reserve_interest_, "reserve_interest");
    detail::validate_rates(premium_rate_, "premium_rate");
    const std::int64_t n = length().value_or(period());
    for (std::int64_t k = 1; k <= n; ++k) {
      detail::require(rate_at(premium_rate_, k) > 0, "premium_rate: must be positive");
      detail::require(support(law_at(claim_, k)).lower >= 0, "claim: support must be nonnegative");
      const Distribution& theta = law_at(interarrival_, k);
      detail::require(support(theta).lower >= 0 && point_mass(theta, 0.0) == 0.0,
                      "interarrival: support must be positive");
    }
  }

  const ValueRule& premium_rate() const { return premium_rate_; }
  const LawRule& claim() const { return claim_; }
  const LawRule& interarrival() const { return interarrival_; }
  const ValueRule& premium_interest() const { return premium_interest_; }
  const ValueRule& reserve_interest() const { return reserve_interest_; }
  const std::string& label() const { return label_; }

  // Shortest explicit rule length, or nullopt if every rule is periodic.
  std::optional<std::int64_t> length() const {
    std::optional<std::int64_t> n;
    auto take = [&](std::int64_t len) { n = n ? std::min(*n, len) : len; };
    for (const ValueRule* r : {&premium_rate_, &premium_interest_, &reserve_interest_})
      if (const auto* e = std::get_if<ExplicitRates>(r)) take(std::ssize(e->values));
    for (const LawRule* r : {&claim_, &interarrival_})
      if (const auto* e = std::get_if<ExplicitLaws>(r)) take(std::ssize(e->laws));
    return n;
  }

  // Least common period of the non-explicit rules.
  std::int64_t period() const {
    std::int64_t l = 1;
    for (const ValueRule* r : {&premium_rate_, &premium_interest_, &reserve_interest_})
      if (const auto* p = std::get_if<PeriodicRates>(r)) l = std::lcm(l, std::ssize(p->values));
    for (const LawRule* r : {&claim_, &interarrival_})
      if (const auto* p = std::get_if<PeriodicLaws>(r)) l = std::lcm(l, std::ssize(p->laws));
    return l;
  }

  // (1 + beta_k) p_k.
  double premium_factor(std::int64_t k) const {
    return (1.0 + rate_at(premium_interest_, k)) * rate_at(premium_rate_, k);
  }

  // Law of Y*_k = (Z_k - (1 + beta_k) p_k theta_k) / (1 + alpha_k).
  Distribution discounted_increment(std::int64_t k) const {
    Distribution y = Distribution::compound(law_at(claim_, k), premium_factor(k), law_at(interarrival_, k));
    const double alpha = rate_at(reserve_interest_, k);
    if (alpha == 0.0) return y;
    return Distribution::scaled(1.0 / (1.0 + alpha), std::move(y));
  }

 private:
  ValueRule premium_rate_;
  LawRule claim_;
  LawRule interarrival_;
  ValueRule premium_interest_;
  ValueRule reserve_interest_;
  std::string label_;
};

// Y*_k laws and floors r_k = alpha_k (deterministic interest attains equality).
inline RiskModel reduce_event_model(const EventModel& em) {
  std::vector<Distribution> laws;
  const auto n = em.length();
  const std::int64_t count = n.value_or(em.period());
  laws.reserve(static_cast<std::size_t>(count));
  for (std::int64_t k = 1; k <= count; ++k) laws.push_back(em.discounted_increment(k));
  if (n) return RiskModel(ExplicitPrefix{std::move(laws)}, em.reserve_interest(), em.label());
  return RiskModel(Periodic{std::move(laws)}, em.reserve_interest(), em.label());
}

}  // namespace ruinbound
