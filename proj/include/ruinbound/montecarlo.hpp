#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "ruinbound/bounds.hpp"
#include "ruinbound/distributions.hpp"
#include "ruinbound/model.hpp"
#include "ruinbound/random.hpp"

namespace ruinbound {

struct SimConfig {
  std::int64_t n_paths = 100000;
  std::int64_t horizon = 5000;
  std::uint64_t seed = 1;
  double confidence = 0.99;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct ConfidenceInterval {
  double low = 0.0;
  double high = 1.0;
};

// Exact two-sided binomial interval for k successes in n trials.
inline ConfidenceInterval clopper_pearson(std::int64_t k, std::int64_t n, double confidence) {
  if (n < 1 || k < 0 || k > n) throw std::invalid_argument("clopper_pearson: need 0 <= k <= n, n >= 1");
  if (!(confidence > 0 && confidence < 1)) throw std::invalid_argument("confidence must lie in (0, 1)");
  const double alpha = 1.0 - confidence;
  const auto kd = static_cast<double>(k);
  const auto nd = static_cast<double>(n);
  ConfidenceInterval ci;
  ci.low = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, alpha / 2.0);
  ci.high = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - alpha / 2.0);
  return ci;
}

struct SimResult {
  double u = 0.0;
  std::int64_t n_paths = 0;
  std::int64_t horizon = 0;
  std::int64_t ruin_count = 0;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  // Ruin is only observed up to the horizon, so the estimate targets a lower
  // bound on the ultimate ruin probability.
  bool horizon_truncated = true;
};

inline SimResult make_sim_result(double u, std::int64_t count, const SimConfig& cfg) {
  const auto ci = clopper_pearson(count, cfg.n_paths, cfg.confidence);
  return {u, cfg.n_paths, cfg.horizon, count,
          static_cast<double>(count) / static_cast<double>(cfg.n_paths), ci.low, ci.high, true};
}

// min(requested or hardware threads, RUINBOUND_THREADS).
inline unsigned worker_count(unsigned requested) {
  unsigned n = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RUINBOUND_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

namespace detail {

// Runs fn(i) for i in [0, n) over contiguous chunks. Results must be written
// to per-index slots so the outcome does not depend on the worker count.
template <class Fn>
void for_each_path(std::int64_t n, unsigned workers, Fn&& fn) {
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, std::max<std::int64_t>(n, 1)));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::int64_t lo = n * w / workers;
    const std::int64_t hi = n * (w + 1) / workers;
    pool.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline void validate(const SimConfig& cfg) {
  require(cfg.n_paths >= 1, "n_paths must be >= 1");
  require(cfg.horizon >= 1, "horizon must be >= 1");
  require(cfg.confidence > 0 && cfg.confidence < 1, "confidence must lie in (0, 1)");
}

// A law resolved once into a flat record so the per-step draw avoids the
// variant dispatch. Draws consume the stream exactly as sample() does.
class FlatSampler {
 public:
  explicit FlatSampler(const Distribution& dist) : dist_(&dist) { resolve(dist); }

  double operator()(PathStream& s) const {
    switch (kind_) {
      case Kind::uniform: return scale_ * (a_ + b_ * s.uniform01());
      case Kind::shifted_exponential: return scale_ * (a_ - std::log(s.uniform01()) / b_);
      case Kind::two_point: return scale_ * (s.uniform01() < c_ ? a_ : b_);
      case Kind::degenerate: return scale_ * a_;
      case Kind::exp_minus_exp: {
        const double z = -std::log(s.uniform01()) / a_;
        return scale_ * (z - c_ * (-std::log(s.uniform01()) / b_));
      }
      case Kind::generic: break;
    }
    return scale_ * sample(*dist_, s);
  }

 private:
  enum class Kind { uniform, shifted_exponential, two_point, degenerate, exp_minus_exp, generic };

  void resolve(const Distribution& d) {
    if (const auto* x = d.get_if<Scaled>()) {
      scale_ *= x->factor;
      dist_ = x->inner.get();
      resolve(*x->inner);
    } else if (const auto* x = d.get_if<Uniform>()) {
      kind_ = Kind::uniform;
      a_ = x->lower;
      b_ = x->upper - x->lower;
    } else if (const auto* x = d.get_if<ShiftedExponential>()) {
      kind_ = Kind::shifted_exponential;
      a_ = x->shift;
      b_ = x->rate;
    } else if (const auto* x = d.get_if<TwoPoint>()) {
      kind_ = Kind::two_point;
      a_ = x->x1;
      b_ = x->x2;
      c_ = x->p1;
    } else if (const auto* x = d.get_if<Degenerate>()) {
      kind_ = Kind::degenerate;
      a_ = x->value;
    } else if (const auto* x = d.get_if<CompoundIncrement>()) {
      const auto* z = x->claim->get_if<ShiftedExponential>();
      const auto* t = x->interarrival->get_if<ShiftedExponential>();
      if (z && t && z->shift == 0.0 && t->shift == 0.0) {
        kind_ = Kind::exp_minus_exp;
        a_ = z->rate;
        b_ = t->rate;
        c_ = x->premium_rate;
      }
    }
  }

  const Distribution* dist_;
  Kind kind_ = Kind::generic;
  double scale_ = 1.0;
  double a_ = 0.0;
  double b_ = 0.0;
  double c_ = 0.0;
};

// Laws of Y*_k and weights v_{k-1} scale_k for k = 1..K, shared by all paths.
struct PathPlan {
  std::vector<Distribution> laws;
  std::vector<double> weights;
  std::vector<FlatSampler> samplers;  // point into laws

  PathPlan(const PathPlan&) = delete;
  PathPlan& operator=(const PathPlan&) = delete;

  PathPlan(const RiskModel& model, std::int64_t K) {
    if (auto n = defined_length(model); n && K > *n) throw detail::beyond(K, static_cast<std::size_t>(*n));
    laws.reserve(static_cast<std::size_t>(K));
    weights.reserve(static_cast<std::size_t>(K));
    StepCursor cursor(model);
    for (std::int64_t k = 1; k <= K; ++k) {
      auto step = cursor.next();
      weights.push_back(std::exp(step.log_weight()));
      laws.push_back(std::move(step.law.base));
    }
    samplers.reserve(laws.size());
    for (const auto& d : laws) samplers.emplace_back(d);
  }
};

inline std::int64_t count_above(std::span<const double> maxima, double u) {
  return std::count_if(maxima.begin(), maxima.end(), [u](double m) { return m > u; });
}

}  // namespace detail

// max_{k<=K} S*_k per path; a path stops early once it exceeds cap.
inline std::vector<double> path_maxima(const RiskModel& model, const SimConfig& cfg, double cap = kInf) {
  detail::validate(cfg);
  const detail::PathPlan plan(model, cfg.horizon);
  std::vector<double> out(static_cast<std::size_t>(cfg.n_paths));
  detail::for_each_path(cfg.n_paths, worker_count(cfg.threads), [&](std::int64_t i) {
    PathStream stream(cfg.seed, static_cast<std::uint64_t>(i));
    double s = 0.0;
    double best = -kInf;
    for (std::size_t k = 0; k < plan.laws.size(); ++k) {
      s += plan.weights[k] * plan.samplers[k](stream);
      best = std::max(best, s);
      if (best > cap) break;
    }
    out[static_cast<std::size_t>(i)] = best;
  });
  return out;
}

// Reserve recursion R_k = (1 + alpha_k) R_{k-1} - (Z_k - (1 + beta_k) p_k theta_k).
// R_k is affine in u with v*_k R_k(u) = u + v*_k R_k(0), so ruin from u happens
// iff max_k -v*_k R_k(0) > u; that maximum is recorded per path.
inline std::vector<double> path_maxima(const EventModel& em, const SimConfig& cfg, double cap = kInf) {
  detail::validate(cfg);
  if (auto n = em.length(); n && cfg.horizon > *n) throw detail::beyond(cfg.horizon, static_cast<std::size_t>(*n));
  const auto K = static_cast<std::size_t>(cfg.horizon);
  std::vector<double> growth(K);
  std::vector<double> premium(K);
  for (std::size_t k = 0; k < K; ++k) {
    growth[k] = 1.0 + rate_at(em.reserve_interest(), static_cast<std::int64_t>(k) + 1);
    premium[k] = em.premium_factor(static_cast<std::int64_t>(k) + 1);
  }
  std::vector<double> out(static_cast<std::size_t>(cfg.n_paths));
  detail::for_each_path(cfg.n_paths, worker_count(cfg.threads), [&](std::int64_t i) {
    PathStream stream(cfg.seed, static_cast<std::uint64_t>(i));
    double r0 = 0.0;
    double v = 1.0;
    double best = -kInf;
    for (std::size_t k = 0; k < K; ++k) {
      const auto idx = static_cast<std::int64_t>(k) + 1;
      const double z = sample(law_at(em.claim(), idx), stream);
      const double theta = sample(law_at(em.interarrival(), idx), stream);
      r0 = growth[k] * r0 - (z - premium[k] * theta);
      v /= growth[k];
      best = std::max(best, -v * r0);
      if (best > cap) break;
    }
    out[static_cast<std::size_t>(i)] = best;
  });
  return out;
}

template <class Model>
std::vector<SimResult> simulate_ruin_grid(const Model& model, std::span<const double> us, const SimConfig& cfg) {
  for (double u : us) detail::require(u > 0, "u must be positive");
  const double cap = us.empty() ? 0.0 : *std::max_element(us.begin(), us.end());
  const auto maxima = path_maxima(model, cfg, cap);
  std::vector<SimResult> out;
  out.reserve(us.size());
  for (double u : us) out.push_back(make_sim_result(u, detail::count_above(maxima, u), cfg));
  return out;
}

template <class Model>
SimResult simulate_ruin(const Model& model, double u, const SimConfig& cfg) {
  const double us[] = {u};
  return simulate_ruin_grid(model, std::span<const double>(us), cfg).front();
}

// P[max_{k<=n} W_k > w] <= e^{-hw} max_{k<=n} E e^{hW_k}, W_k = Y_1 + ... + Y_k
// with Y_j ~ dists[(j-1) mod size].
struct MaximalInequalityReport {
  SimResult lhs;
  double log_rhs = 0.0;  // clamped at 0
  bool passed = false;

  double rhs() const { return std::exp(log_rhs); }
};

inline MaximalInequalityReport check_maximal_inequality(const std::vector<Distribution>& dists, double h, double w,
                                                        std::int64_t n, const SimConfig& cfg) {
  detail::require(!dists.empty(), "need at least one distribution");
  detail::require(n >= 1, "n must be >= 1");
  detail::require(h >= 0, "h must be >= 0");
  detail::validate(cfg);
  auto law = [&](std::int64_t j) -> const Distribution& {
    return dists[static_cast<std::size_t>((j - 1) % std::ssize(dists))];
  };
  double g = 0.0;
  double g_max = -kInf;
  for (std::int64_t j = 1; j <= n; ++j) {
    g += log_mgf_at(law(j), h);
    g_max = std::max(g_max, g);
  }
  MaximalInequalityReport rep;
  rep.log_rhs = std::min(0.0, g_max == kInf ? kInf : -h * w + g_max);

  std::vector<unsigned char> hit(static_cast<std::size_t>(cfg.n_paths));
  detail::for_each_path(cfg.n_paths, worker_count(cfg.threads), [&](std::int64_t i) {
    PathStream stream(cfg.seed, static_cast<std::uint64_t>(i));
    double s = 0.0;
    for (std::int64_t j = 1; j <= n; ++j) {
      s += sample(law(j), stream);
      if (s > w) {
        hit[static_cast<std::size_t>(i)] = 1;
        break;
      }
    }
  });
  const auto count = std::count(hit.begin(), hit.end(), 1);
  SimConfig c = cfg;
  c.horizon = n;
  rep.lhs = make_sim_result(w, count, c);
  rep.passed = rep.lhs.ci_low <= rep.rhs();
  return rep;
}

// Realized rates alpha_k >= r_k for one path.
using AlphaSampler = std::function<double(std::int64_t k, double r_k, PathStream& stream)>;

inline AlphaSampler alpha_at_floor() {
  return [](std::int64_t, double r, PathStream&) { return r; };
}

inline AlphaSampler alpha_floor_plus_exponential(double rate = 1.0) {
  return [rate](std::int64_t, double r, PathStream& s) { return r - std::log(s.uniform01()) / rate; };
}

struct PathRealization {
  std::vector<double> y_star;
  std::vector<double> alpha;
  std::vector<double> rates;
  std::vector<double> s_star;   // S*_k = sum v_{j-1} Y*_j
  std::vector<double> s_star2;  // S**_k = sum v*_{j-1} Y*_j
  std::vector<double> v;
  std::vector<double> v_star;
};

struct Lemma2Report {
  std::int64_t paths = 0;
  double max_violation = 0.0;  // max over paths and n of max S** - max S*
  std::int64_t worst_path = -1;
  std::int64_t worst_index = -1;
  bool passed = true;
  std::optional<PathRealization> worst;
};

inline constexpr double kLemma2Slack = 1e-9;

namespace detail {

// Draws the increments from one stream and the rates from a second one, so
// the Y* path does not depend on the alpha sampler.
inline PathRealization realize_path(const PathPlan& plan, const RiskModel& model, const AlphaSampler& alpha,
                                    std::uint64_t seed, std::int64_t i) {
  PathStream ys(seed, static_cast<std::uint64_t>(i));
  PathStream as(seed ^ 0xA1FAA1FAA1FAA1FAull, static_cast<std::uint64_t>(i));
  PathRealization p;
  const std::size_t K = plan.laws.size();
  double v = 1.0;
  double vs = 1.0;
  double s = 0.0;
  double s2 = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const auto idx = static_cast<std::int64_t>(k) + 1;
    // Unweighted Y*_k: the plan weights carry v_{k-1}, which is recomputed here.
    const double y = plan.samplers[k](ys) * (plan.weights[k] / v);
    const double r = rate_at(model.rates(), idx);
    const double a = alpha(idx, r, as);
    s += v * y;
    s2 += vs * y;
    p.y_star.push_back(y);
    p.rates.push_back(r);
    p.alpha.push_back(a);
    p.s_star.push_back(s);
    p.s_star2.push_back(s2);
    v /= 1.0 + r;
    vs /= 1.0 + a;
    p.v.push_back(v);
    p.v_star.push_back(vs);
  }
  return p;
}

}  // namespace detail

// max_{k<=n} S**_k <= max_{k<=n} S*_k for every n <= horizon and every path.
inline Lemma2Report check_pathwise_lemma2(const RiskModel& model, const AlphaSampler& alpha, const SimConfig& cfg) {
  detail::validate(cfg);
  const detail::PathPlan plan(model, cfg.horizon);
  std::vector<double> violation(static_cast<std::size_t>(cfg.n_paths));
  std::vector<std::int64_t> where(static_cast<std::size_t>(cfg.n_paths));
  std::vector<unsigned char> bad_alpha(static_cast<std::size_t>(cfg.n_paths));
  detail::for_each_path(cfg.n_paths, worker_count(cfg.threads), [&](std::int64_t i) {
    const auto p = detail::realize_path(plan, model, alpha, cfg.seed, i);
    double m1 = 0.0;
    double m2 = 0.0;
    double worst = -kInf;
    std::int64_t at = 0;
    for (std::size_t k = 0; k < p.s_star.size(); ++k) {
      if (p.alpha[k] < p.rates[k]) bad_alpha[static_cast<std::size_t>(i)] = 1;
      m1 = std::max(m1, p.s_star[k]);
      m2 = std::max(m2, p.s_star2[k]);
      if (m2 - m1 > worst) {
        worst = m2 - m1;
        at = static_cast<std::int64_t>(k) + 1;
      }
    }
    violation[static_cast<std::size_t>(i)] = worst;
    where[static_cast<std::size_t>(i)] = at;
  });
  if (std::find(bad_alpha.begin(), bad_alpha.end(), 1) != bad_alpha.end())
    throw std::invalid_argument("alpha sampler returned alpha_k < r_k");
  Lemma2Report rep;
  rep.paths = cfg.n_paths;
  const auto it = std::max_element(violation.begin(), violation.end());
  rep.max_violation = *it;
  rep.worst_path = it - violation.begin();
  rep.worst_index = where[static_cast<std::size_t>(rep.worst_path)];
  rep.passed = rep.max_violation <= kLemma2Slack;
  if (!rep.passed) rep.worst = detail::realize_path(plan, model, alpha, cfg.seed, rep.worst_path);
  return rep;
}

struct DominanceRow {
  SimResult sim;
  double log_bound = 0.0;
  bool dominated = false;      // ci_low <= bound
  bool uninformative = false;  // no ruins observed and the bound is below 1/n
};

struct DominanceReport {
  std::vector<DominanceRow> rows;
  bool passed = true;
};

inline DominanceReport check_bound_dominance(const RiskModel& model, std::span<const double> us,
                                             std::span<const BoundResult> bounds, const SimConfig& cfg) {
  detail::require(us.size() == bounds.size(), "one bound per u is required");
  const auto sims = simulate_ruin_grid(model, us, cfg);
  DominanceReport rep;
  for (std::size_t i = 0; i < us.size(); ++i) {
    DominanceRow row{sims[i], bounds[i].log_bound, false, false};
    row.dominated = row.sim.ci_low <= std::exp(row.log_bound);
    row.uninformative = row.sim.ruin_count == 0 && row.log_bound < -std::log(static_cast<double>(cfg.n_paths));
    rep.passed = rep.passed && row.dominated;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace ruinbound
