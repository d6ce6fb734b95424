#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "ruinbound/extended_log.hpp"

namespace ruinbound {

struct Normal {
  double mean;
  double variance;
};

struct Uniform {
  double lower;
  double upper;
};

// P[Y = x1] = p1, P[Y = x2] = 1 - p1.
struct TwoPoint {
  double x1;
  double p1;
  double x2;
};

// P[Y > x] = exp(-rate (x - shift)) for x >= shift.
struct ShiftedExponential {
  double rate;
  double shift;
};

struct Degenerate {
  double value;
};

struct Atom {
  double value;
  double probability;
};

struct FiniteDiscrete {
  std::vector<Atom> atoms;
};

class Distribution;

// Law of factor * Y with Y ~ inner.
struct Scaled {
  double factor;
  std::shared_ptr<const Distribution> inner;
};

// Law of Z - premium_rate * theta, Z ~ claim and theta ~ interarrival independent.
struct CompoundIncrement {
  std::shared_ptr<const Distribution> claim;
  double premium_rate;
  std::shared_ptr<const Distribution> interarrival;
};

// Closed interval containing the support, endpoints possibly infinite.
struct Support {
  double lower;
  double upper;
};

// Open interval of real t on which E e^{tY} is finite; always contains 0.
struct MgfDomain {
  double lower;
  double upper;
};

// An immutable increment law. Instances are built through the named factories,
// which validate every parameter; afterwards a Distribution is a plain value
// that can be shared freely across threads.
class Distribution {
 public:
  using Rep = std::variant<Normal, Uniform, TwoPoint, ShiftedExponential, Degenerate,
                           FiniteDiscrete, Scaled, CompoundIncrement>;

  static Distribution normal(double mean, double variance);
  static Distribution uniform(double lower, double upper);
  static Distribution two_point(double x1, double p1, double x2);
  static Distribution shifted_exponential(double rate, double shift = 0.0);
  static Distribution exponential(double rate) { return shifted_exponential(rate, 0.0); }
  static Distribution degenerate(double value);
  static Distribution finite_discrete(std::vector<Atom> atoms);
  static Distribution scaled(double factor, Distribution inner);
  static Distribution compound(Distribution claim, double premium_rate, Distribution interarrival);

  const Rep& rep() const { return rep_; }

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&rep_);
  }

  std::string_view family() const;

 private:
  explicit Distribution(Rep rep) : rep_(std::move(rep)) {}

  Rep rep_;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

inline bool finite(double x) { return std::isfinite(x); }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace detail

inline Support support(const Distribution& dist);
inline double point_mass(const Distribution& dist, double x);

inline Distribution Distribution::normal(double mean, double variance) {
  detail::require(detail::finite(mean), "normal: mean must be finite");
  detail::require(detail::finite(variance) && variance > 0, "normal: variance must be positive");
  return Distribution(Normal{mean, variance});
}

inline Distribution Distribution::uniform(double lower, double upper) {
  detail::require(detail::finite(lower) && detail::finite(upper), "uniform: bounds must be finite");
  detail::require(lower < upper, "uniform: lower must be < upper");
  return Distribution(Uniform{lower, upper});
}

inline Distribution Distribution::two_point(double x1, double p1, double x2) {
  detail::require(detail::finite(x1) && detail::finite(x2), "two_point: atoms must be finite");
  detail::require(p1 >= 0.0 && p1 <= 1.0, "two_point: p1 must lie in [0, 1]");
  return Distribution(TwoPoint{x1, p1, x2});
}

inline Distribution Distribution::shifted_exponential(double rate, double shift) {
  detail::require(detail::finite(rate) && rate > 0, "shifted_exponential: rate must be positive");
  detail::require(detail::finite(shift), "shifted_exponential: shift must be finite");
  return Distribution(ShiftedExponential{rate, shift});
}

inline Distribution Distribution::degenerate(double value) {
  detail::require(detail::finite(value), "degenerate: value must be finite");
  return Distribution(Degenerate{value});
}

inline Distribution Distribution::finite_discrete(std::vector<Atom> atoms) {
  detail::require(!atoms.empty(), "finite_discrete: at least one atom required");
  double total = 0.0;
  for (const auto& a : atoms) {
    detail::require(detail::finite(a.value), "finite_discrete: atom values must be finite");
    detail::require(a.probability >= 0.0 && a.probability <= 1.0,
                    "finite_discrete: probabilities must lie in [0, 1]");
    total += a.probability;
  }
  detail::require(std::abs(total - 1.0) <= 1e-12, "finite_discrete: probabilities must sum to 1");
  return Distribution(FiniteDiscrete{std::move(atoms)});
}

inline Distribution Distribution::scaled(double factor, Distribution inner) {
  detail::require(detail::finite(factor) && factor != 0.0,
                  "scaled: factor must be finite and nonzero");
  return Distribution(Scaled{factor, std::make_shared<const Distribution>(std::move(inner))});
}

inline Distribution Distribution::compound(Distribution claim, double premium_rate,
                                           Distribution interarrival) {
  detail::require(detail::finite(premium_rate) && premium_rate > 0,
                  "compound: premium rate must be positive");
  detail::require(support(claim).lower >= 0.0, "compound: claim support must be nonnegative");
  detail::require(support(interarrival).lower >= 0.0 && point_mass(interarrival, 0.0) == 0.0,
                  "compound: interarrival support must be positive");
  return Distribution(CompoundIncrement{std::make_shared<const Distribution>(std::move(claim)),
                                        premium_rate,
                                        std::make_shared<const Distribution>(std::move(interarrival))});
}

inline std::string_view Distribution::family() const {
  return std::visit(
      detail::Overloaded{
          [](const Normal&) { return std::string_view("normal"); },
          [](const Uniform&) { return std::string_view("uniform"); },
          [](const TwoPoint&) { return std::string_view("two_point"); },
          [](const ShiftedExponential&) { return std::string_view("shifted_exponential"); },
          [](const Degenerate&) { return std::string_view("degenerate"); },
          [](const FiniteDiscrete&) { return std::string_view("finite_discrete"); },
          [](const Scaled&) { return std::string_view("scaled"); },
          [](const CompoundIncrement&) { return std::string_view("compound"); },
      },
      rep_);
}

inline Support support(const Distribution& dist) {
  return std::visit(
      detail::Overloaded{
          [](const Normal&) { return Support{-kInf, kInf}; },
          [](const Uniform& d) { return Support{d.lower, d.upper}; },
          [](const TwoPoint& d) {
            if (d.p1 == 1.0) return Support{d.x1, d.x1};
            if (d.p1 == 0.0) return Support{d.x2, d.x2};
            return Support{std::min(d.x1, d.x2), std::max(d.x1, d.x2)};
          },
          [](const ShiftedExponential& d) { return Support{d.shift, kInf}; },
          [](const Degenerate& d) { return Support{d.value, d.value}; },
          [](const FiniteDiscrete& d) {
            Support s{kInf, -kInf};
            for (const auto& a : d.atoms) {
              if (a.probability == 0.0) continue;
              s.lower = std::min(s.lower, a.value);
              s.upper = std::max(s.upper, a.value);
            }
            return s;
          },
          [](const Scaled& d) {
            const Support in = support(*d.inner);
            return d.factor > 0 ? Support{in.lower * d.factor, in.upper * d.factor}
                                : Support{in.upper * d.factor, in.lower * d.factor};
          },
          [](const CompoundIncrement& d) {
            const Support z = support(*d.claim);
            const Support t = support(*d.interarrival);
            return Support{z.lower - d.premium_rate * t.upper, z.upper - d.premium_rate * t.lower};
          },
      },
      dist.rep());
}

// P[Y = x]; zero for the continuous families.
inline double point_mass(const Distribution& dist, double x) {
  return std::visit(
      detail::Overloaded{
          [](const Normal&) { return 0.0; },
          [](const Uniform&) { return 0.0; },
          [x](const TwoPoint& d) {
            return (d.x1 == x ? d.p1 : 0.0) + (d.x2 == x ? 1.0 - d.p1 : 0.0);
          },
          [](const ShiftedExponential&) { return 0.0; },
          [x](const Degenerate& d) { return d.value == x ? 1.0 : 0.0; },
          [x](const FiniteDiscrete& d) {
            double m = 0.0;
            for (const auto& a : d.atoms)
              if (a.value == x) m += a.probability;
            return m;
          },
          [x](const Scaled& d) { return point_mass(*d.inner, x / d.factor); },
          // Only needed for interarrival validation; a compound law is never
          // used as one in practice.
          [](const CompoundIncrement&) { return 0.0; },
      },
      dist.rep());
}

inline MgfDomain mgf_domain(const Distribution& dist) {
  return std::visit(
      detail::Overloaded{
          [](const ShiftedExponential& d) { return MgfDomain{-kInf, d.rate}; },
          [](const Scaled& d) {
            const MgfDomain in = mgf_domain(*d.inner);
            return d.factor > 0 ? MgfDomain{in.lower / d.factor, in.upper / d.factor}
                                : MgfDomain{in.upper / d.factor, in.lower / d.factor};
          },
          [](const CompoundIncrement& d) {
            const MgfDomain z = mgf_domain(*d.claim);
            const MgfDomain t = mgf_domain(*d.interarrival);
            // -t * p must lie in the interarrival domain.
            const double lo = -t.upper / d.premium_rate;
            const double hi = -t.lower / d.premium_rate;
            return MgfDomain{std::max(z.lower, lo), std::min(z.upper, hi)};
          },
          [](const auto&) { return MgfDomain{-kInf, kInf}; },
      },
      dist.rep());
}

// sup{h >= 0 : E e^{hY} < inf}.
inline double mgf_domain_sup(const Distribution& dist) { return mgf_domain(dist).upper; }

// log E e^{tY} for any real t; +inf outside the (open) domain.
inline double log_mgf_at(const Distribution& dist, double t) {
  if (t == 0.0) return 0.0;
  return std::visit(
      detail::Overloaded{
          [t](const Normal& d) { return t * d.mean + 0.5 * t * t * d.variance; },
          [t](const Uniform& d) {
            return t * d.lower + log_expm1_ratio(t * (d.upper - d.lower));
          },
          [t](const TwoPoint& d) {
            const double a = d.p1 > 0 ? std::log(d.p1) + t * d.x1 : -kInf;
            const double b = d.p1 < 1 ? std::log1p(-d.p1) + t * d.x2 : -kInf;
            return log_add_exp(a, b);
          },
          [t](const ShiftedExponential& d) {
            if (t >= d.rate) return kInf;
            return t * d.shift - std::log1p(-t / d.rate);
          },
          [t](const Degenerate& d) { return t * d.value; },
          [t](const FiniteDiscrete& d) {
            std::vector<double> terms;
            terms.reserve(d.atoms.size());
            for (const auto& a : d.atoms)
              if (a.probability > 0) terms.push_back(std::log(a.probability) + t * a.value);
            return log_sum_exp(terms);
          },
          [t](const Scaled& d) { return log_mgf_at(*d.inner, t * d.factor); },
          [t](const CompoundIncrement& d) {
            const double claim = log_mgf_at(*d.claim, t);
            if (claim == kInf) return kInf;
            const double premium = log_mgf_at(*d.interarrival, -t * d.premium_rate);
            if (premium == kInf) return kInf;
            return claim + premium;
          },
      },
      dist.rep());
}

inline ExtendedLogValue log_mgf(const Distribution& dist, double h) {
  if (std::isnan(h) || h < 0) throw std::invalid_argument("log_mgf: h must be >= 0");
  return ExtendedLogValue(log_mgf_at(dist, h));
}

inline double mean(const Distribution& dist) {
  return std::visit(
      detail::Overloaded{
          [](const Normal& d) { return d.mean; },
          [](const Uniform& d) { return 0.5 * (d.lower + d.upper); },
          [](const TwoPoint& d) { return d.p1 * d.x1 + (1.0 - d.p1) * d.x2; },
          [](const ShiftedExponential& d) { return d.shift + 1.0 / d.rate; },
          [](const Degenerate& d) { return d.value; },
          [](const FiniteDiscrete& d) {
            double m = 0.0;
            for (const auto& a : d.atoms) m += a.probability * a.value;
            return m;
          },
          [](const Scaled& d) { return d.factor * mean(*d.inner); },
          [](const CompoundIncrement& d) {
            return mean(*d.claim) - d.premium_rate * mean(*d.interarrival);
          },
      },
      dist.rep());
}

// One exact draw. Inverse transform for the univariate families, Box-Muller for
// the normal, composition for scaled and compound laws.
template <class Stream>
double sample(const Distribution& dist, Stream& stream) {
  return std::visit(
      detail::Overloaded{
          [&](const Normal& d) {
            const double r = std::sqrt(-2.0 * std::log(stream.uniform01()));
            const double z = r * std::cos(2.0 * std::numbers::pi * stream.uniform01());
            return d.mean + std::sqrt(d.variance) * z;
          },
          [&](const Uniform& d) { return d.lower + (d.upper - d.lower) * stream.uniform01(); },
          [&](const TwoPoint& d) { return stream.uniform01() < d.p1 ? d.x1 : d.x2; },
          [&](const ShiftedExponential& d) {
            return d.shift - std::log(stream.uniform01()) / d.rate;
          },
          [](const Degenerate& d) { return d.value; },
          [&](const FiniteDiscrete& d) {
            const double u = stream.uniform01();
            double cum = 0.0;
            for (const auto& a : d.atoms) {
              cum += a.probability;
              if (u < cum) return a.value;
            }
            return d.atoms.back().value;
          },
          [&](const Scaled& d) { return d.factor * sample(*d.inner, stream); },
          [&](const CompoundIncrement& d) {
            const double z = sample(*d.claim, stream);
            return z - d.premium_rate * sample(*d.interarrival, stream);
          },
      },
      dist.rep());
}

}  // namespace ruinbound
