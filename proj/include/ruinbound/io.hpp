#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ruinbound/distributions.hpp"
#include "ruinbound/model.hpp"

namespace ruinbound {

// Malformed configuration; what() names the offending field path or line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::json;

// A config holds either an increment-level model or an event-level one.
struct ModelConfig {
  std::variant<RiskModel, EventModel> model;

  bool is_event() const { return std::holds_alternative<EventModel>(model); }
  RiskModel risk_model() const {
    if (const auto* em = std::get_if<EventModel>(&model)) return reduce_event_model(*em);
    return std::get<RiskModel>(model);
  }
  const std::string& label() const {
    return std::visit([](const auto& m) -> const std::string& { return m.label(); }, model);
  }
};

namespace io_detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

inline const Json& field(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing");
  return *it;
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline double number(const Json& j, const std::string& path, const char* key) {
  return number(field(j, path, key), path + "." + key);
}

inline double number_or(const Json& j, const std::string& path, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  return number(j.at(key), path + "." + key);
}

inline std::string text(const Json& j, const std::string& path, const char* key) {
  const Json& v = field(j, path, key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

inline const Json& array(const Json& j, const std::string& path, const char* key) {
  const Json& v = field(j, path, key);
  if (!v.is_array()) fail(path + "." + key, "expected an array");
  return v;
}

template <class Fn>
auto guarded(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

}  // namespace io_detail

inline Distribution distribution_from_json(const Json& j, const std::string& path = "distribution") {
  using namespace io_detail;
  const std::string family = text(j, path, "family");
  return guarded(path, [&]() -> Distribution {
    if (family == "normal") return Distribution::normal(number(j, path, "mean"), number(j, path, "variance"));
    if (family == "uniform") return Distribution::uniform(number(j, path, "lower"), number(j, path, "upper"));
    if (family == "two_point")
      return Distribution::two_point(number(j, path, "x1"), number(j, path, "p1"), number(j, path, "x2"));
    if (family == "shifted_exponential")
      return Distribution::shifted_exponential(number(j, path, "rate"), number_or(j, path, "shift", 0.0));
    if (family == "exponential") return Distribution::exponential(number(j, path, "rate"));
    if (family == "degenerate") return Distribution::degenerate(number(j, path, "value"));
    if (family == "finite_discrete") {
      std::vector<Atom> atoms;
      const Json& arr = array(j, path, "atoms");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = path + ".atoms[" + std::to_string(i) + "]";
        atoms.push_back({number(arr[i], p, "value"), number(arr[i], p, "probability")});
      }
      return Distribution::finite_discrete(std::move(atoms));
    }
    if (family == "scaled")
      return Distribution::scaled(number(j, path, "factor"),
                                  distribution_from_json(field(j, path, "inner"), path + ".inner"));
    if (family == "compound")
      return Distribution::compound(distribution_from_json(field(j, path, "claim"), path + ".claim"),
                                    number(j, path, "premium_rate"),
                                    distribution_from_json(field(j, path, "interarrival"), path + ".interarrival"));
    fail(path + ".family", "unknown family '" + family + "'");
  });
}

inline Json to_json(const Distribution& dist) {
  return std::visit(
      detail::Overloaded{
          [](const Normal& d) { return Json{{"family", "normal"}, {"mean", d.mean}, {"variance", d.variance}}; },
          [](const Uniform& d) { return Json{{"family", "uniform"}, {"lower", d.lower}, {"upper", d.upper}}; },
          [](const TwoPoint& d) { return Json{{"family", "two_point"}, {"x1", d.x1}, {"p1", d.p1}, {"x2", d.x2}}; },
          [](const ShiftedExponential& d) {
            return Json{{"family", "shifted_exponential"}, {"rate", d.rate}, {"shift", d.shift}};
          },
          [](const Degenerate& d) { return Json{{"family", "degenerate"}, {"value", d.value}}; },
          [](const FiniteDiscrete& d) {
            Json atoms = Json::array();
            for (const auto& a : d.atoms) atoms.push_back({{"value", a.value}, {"probability", a.probability}});
            return Json{{"family", "finite_discrete"}, {"atoms", atoms}};
          },
          [](const Scaled& d) { return Json{{"family", "scaled"}, {"factor", d.factor}, {"inner", to_json(*d.inner)}}; },
          [](const CompoundIncrement& d) {
            return Json{{"family", "compound"},
                        {"claim", to_json(*d.claim)},
                        {"premium_rate", d.premium_rate},
                        {"interarrival", to_json(*d.interarrival)}};
          },
      },
      dist.rep());
}

namespace io_detail {

inline std::vector<Distribution> law_list(const Json& j, const std::string& path, const char* key) {
  const Json& arr = array(j, path, key);
  std::vector<Distribution> out;
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(distribution_from_json(arr[i], path + "." + key + "[" + std::to_string(i) + "]"));
  return out;
}

inline Json law_list_json(const std::vector<Distribution>& laws) {
  Json arr = Json::array();
  for (const auto& d : laws) arr.push_back(to_json(d));
  return arr;
}

inline std::vector<double> number_list(const Json& j, const std::string& path, const char* key) {
  const Json& arr = array(j, path, key);
  std::vector<double> out;
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(number(arr[i], path + "." + key + "[" + std::to_string(i) + "]"));
  return out;
}

inline PeriodicTail tail_from_json(const Json& j, const std::string& path) {
  const std::string kind = text(j, path, "kind");
  if (kind == "periodic") return Periodic{law_list(j, path, "cycle")};
  if (kind == "quasi_periodic") return QuasiPeriodicScaled{law_list(j, path, "cycle"), number(j, path, "scale")};
  fail(path + ".kind", "tail must be 'periodic' or 'quasi_periodic'");
}

inline Json tail_json(const PeriodicTail& tail) {
  return std::visit(detail::Overloaded{
                        [](const Periodic& p) { return Json{{"kind", "periodic"}, {"cycle", law_list_json(p.cycle)}}; },
                        [](const QuasiPeriodicScaled& p) {
                          return Json{{"kind", "quasi_periodic"}, {"cycle", law_list_json(p.cycle)}, {"scale", p.scale}};
                        },
                    },
                    tail);
}

}  // namespace io_detail

inline SequenceRule sequence_from_json(const Json& j, const std::string& path = "increments") {
  using namespace io_detail;
  const std::string kind = text(j, path, "kind");
  if (kind == "explicit") return ExplicitPrefix{law_list(j, path, "laws")};
  if (kind == "periodic" || kind == "quasi_periodic")
    return std::visit([](auto&& t) -> SequenceRule { return t; }, tail_from_json(j, path));
  if (kind == "prefix_tail")
    return PrefixThenTail{law_list(j, path, "prefix"), tail_from_json(field(j, path, "tail"), path + ".tail")};
  if (kind == "indexed_normal") return IndexedNormal{number(j, path, "slope"), number(j, path, "intercept")};
  if (kind == "indexed_two_point") return IndexedTwoPoint{};
  fail(path + ".kind", "unknown sequence kind '" + kind + "'");
}

inline Json to_json(const SequenceRule& rule) {
  using namespace io_detail;
  return std::visit(
      detail::Overloaded{
          [](const ExplicitPrefix& r) { return Json{{"kind", "explicit"}, {"laws", law_list_json(r.laws)}}; },
          [](const Periodic& r) { return tail_json(r); },
          [](const QuasiPeriodicScaled& r) { return tail_json(r); },
          [](const PrefixThenTail& r) {
            return Json{{"kind", "prefix_tail"}, {"prefix", law_list_json(r.prefix)}, {"tail", tail_json(r.tail)}};
          },
          [](const IndexedNormal& r) {
            return Json{{"kind", "indexed_normal"}, {"slope", r.slope}, {"intercept", r.intercept}};
          },
          [](const IndexedTwoPoint&) { return Json{{"kind", "indexed_two_point"}}; },
      },
      rule);
}

// A bare number is shorthand for a constant sequence.
inline RateRule rates_from_json(const Json& j, const std::string& path = "rates") {
  using namespace io_detail;
  if (j.is_number()) return ConstantRate{j.get<double>()};
  const std::string kind = text(j, path, "kind");
  if (kind == "constant") return ConstantRate{number(j, path, "value")};
  if (kind == "periodic") return PeriodicRates{number_list(j, path, "values")};
  if (kind == "explicit") return ExplicitRates{number_list(j, path, "values")};
  fail(path + ".kind", "unknown rate kind '" + kind + "'");
}

inline Json to_json(const RateRule& rule) {
  return std::visit(detail::Overloaded{
                        [](const ConstantRate& r) { return Json{{"kind", "constant"}, {"value", r.value}}; },
                        [](const PeriodicRates& r) { return Json{{"kind", "periodic"}, {"values", r.values}}; },
                        [](const ExplicitRates& r) { return Json{{"kind", "explicit"}, {"values", r.values}}; },
                    },
                    rule);
}

// A bare distribution object is shorthand for a constant law.
inline LawRule laws_from_json(const Json& j, const std::string& path) {
  using namespace io_detail;
  if (j.is_object() && j.contains("family")) return ConstantLaw{distribution_from_json(j, path)};
  const std::string kind = text(j, path, "kind");
  if (kind == "constant") return ConstantLaw{distribution_from_json(field(j, path, "law"), path + ".law")};
  if (kind == "periodic") return PeriodicLaws{law_list(j, path, "laws")};
  if (kind == "explicit") return ExplicitLaws{law_list(j, path, "laws")};
  fail(path + ".kind", "unknown law rule kind '" + kind + "'");
}

inline Json to_json(const LawRule& rule) {
  using namespace io_detail;
  return std::visit(detail::Overloaded{
                        [](const ConstantLaw& r) { return Json{{"kind", "constant"}, {"law", to_json(r.law)}}; },
                        [](const PeriodicLaws& r) { return Json{{"kind", "periodic"}, {"laws", law_list_json(r.laws)}}; },
                        [](const ExplicitLaws& r) { return Json{{"kind", "explicit"}, {"laws", law_list_json(r.laws)}}; },
                    },
                    rule);
}

inline ModelConfig model_from_json(const Json& j) {
  using namespace io_detail;
  if (!j.is_object()) fail("$", "expected an object");
  const std::string label = j.contains("label") ? text(j, "$", "label") : std::string{};
  if (j.contains("event")) {
    const Json& e = j.at("event");
    const std::string p = "event";
    auto value_rule = [&](const char* key) -> ValueRule {
      if (!e.contains(key)) return ConstantRate{};
      return rates_from_json(e.at(key), p + "." + key);
    };
    ValueRule premium = rates_from_json(field(e, p, "premium_rate"), p + ".premium_rate");
    LawRule claim = laws_from_json(field(e, p, "claim"), p + ".claim");
    LawRule theta = laws_from_json(field(e, p, "interarrival"), p + ".interarrival");
    return guarded(p, [&] {
      return ModelConfig{EventModel(std::move(premium), std::move(claim), std::move(theta),
                                    value_rule("premium_interest"), value_rule("reserve_interest"), label)};
    });
  }
  SequenceRule seq = sequence_from_json(field(j, "$", "increments"));
  RateRule rates = j.contains("rates") ? rates_from_json(j.at("rates")) : RateRule{ConstantRate{}};
  return guarded("increments", [&] { return ModelConfig{RiskModel(std::move(seq), std::move(rates), label)}; });
}

inline Json to_json(const RiskModel& m) {
  return Json{{"label", m.label()}, {"increments", to_json(m.increments())}, {"rates", to_json(m.rates())}};
}

inline Json to_json(const EventModel& m) {
  return Json{{"label", m.label()},
              {"event",
               {{"premium_rate", to_json(m.premium_rate())},
                {"claim", to_json(m.claim())},
                {"interarrival", to_json(m.interarrival())},
                {"premium_interest", to_json(m.premium_interest())},
                {"reserve_interest", to_json(m.reserve_interest())}}}};
}

inline Json to_json(const ModelConfig& c) {
  return std::visit([](const auto& m) { return to_json(m); }, c.model);
}

// Parses JSON text; syntax errors report line and column.
inline ModelConfig parse_model(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": invalid JSON");
  }
  return model_from_json(j);
}

inline ModelConfig load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_model(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace ruinbound
