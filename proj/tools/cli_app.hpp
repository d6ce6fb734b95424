#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ruinbound/adjustment.hpp"
#include "ruinbound/bounds.hpp"
#include "ruinbound/io.hpp"
#include "ruinbound/model.hpp"
#include "ruinbound/montecarlo.hpp"

namespace ruinbound::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kUncertified = 3, kDominanceFailure = 4 };

inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// Rows of typed cells rendered as CSV or as a JSON array of objects.
class Table {
 public:
  using Cell = nlohmann::json;

  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<Cell> row) { rows_.push_back(std::move(row)); }

  void write(std::ostream& os, const std::string& format) const {
    if (format == "json") {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& row : rows_) {
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t i = 0; i < columns_.size(); ++i) {
          const Cell& c = row[i];
          obj[columns_[i]] = c.is_number_float() && !std::isfinite(c.get<double>()) ? Cell(fmt(c.get<double>())) : c;
        }
        arr.push_back(obj);
      }
      os << arr.dump(2) << "\n";
      return;
    }
    for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
    os << "\n";
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << render(row[i]);
      os << "\n";
    }
  }

 private:
  static std::string render(const Cell& c) {
    if (c.is_null()) return "";
    if (c.is_boolean()) return c.get<bool>() ? "true" : "false";
    if (c.is_number()) return fmt(c.get<double>());
    return c.get<std::string>();
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

// "1,2,4" or "lo:hi:n" (n evenly spaced points).
inline std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  auto to_double = [&](const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw ConfigError("--u: cannot parse '" + s + "'");
    }
    if (pos != s.size()) throw ConfigError("--u: cannot parse '" + s + "'");
    return v;
  };
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError("--u: range must be lo:hi:n");
    const double lo = to_double(parts[0]);
    const double hi = to_double(parts[1]);
    const double n = to_double(parts[2]);
    if (n < 1 || n != std::floor(n)) throw ConfigError("--u: point count must be a positive integer");
    const auto count = static_cast<int>(n);
    for (int i = 0; i < count; ++i) out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  } else {
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(to_double(p));
  }
  if (out.empty()) throw ConfigError("--u: empty grid");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0)) throw ConfigError("--u: values must be positive");
    if (i > 0 && !(out[i] > out[i - 1])) throw ConfigError("--u: values must be strictly increasing");
  }
  return out;
}

struct Options {
  std::string model_path;
  std::string out_path;
  std::string format = "csv";
  std::uint64_t seed = 1;
  bool strict = false;
  std::int64_t kmax = 10000;
  double tol = kDefaultTol;
  std::string u = "1";
  std::optional<double> h;
  std::string method = "general_opt";
  std::optional<std::int64_t> l;
  std::int64_t m = 1;
  std::optional<double> lstar;
  std::optional<double> hcert;
  std::int64_t paths = 100000;
  std::int64_t horizon = 5000;
  double confidence = 0.99;
  unsigned threads = 0;
};

struct Outcome {
  int code = kOk;
  bool uncertified = false;
};

inline std::optional<std::int64_t> natural_period(const RiskModel& model) {
  auto shape = block_structure(model);
  if (!shape || shape->prefix_length != 0 || shape->log_ratio > 0.0) return std::nullopt;
  return shape->period;
}

inline Table run_adjustment(const ModelConfig& cfg, const Options& o, Outcome& oc) {
  const RiskModel model = cfg.risk_model();
  TruncationPolicy policy;
  policy.k_max = o.kmax;
  Table t({"coefficient", "value", "certified", "boundary", "bracket_low", "bracket_high", "status"});
  auto add = [&](const std::string& name, const AdjustmentResult& r) {
    oc.uncertified = oc.uncertified || !r.certified;
    t.add({name, r.value, r.certified, r.boundary, r.bracket_low, r.bracket_high, r.status});
  };
  add("L_Y", solve_L_Y(model, o.tol, policy));
  add("L_S", solve_L_S(model, o.tol, policy));
  if (auto p = natural_period(model)) {
    const std::int64_t l = o.l.value_or(*p);
    add("L_Sl", solve_period_root(model, l, o.tol));
    if (*p == 1) add("kappa", solve_kappa(block_view(model)->laws.front().base, o.tol));
  }
  if (o.lstar) {
    const auto check = verify_L_star(model, o.l.value_or(natural_period(model).value_or(1)), o.m, *o.lstar);
    oc.uncertified = oc.uncertified || !check.ok;
    t.add({"L_star", *o.lstar, check.ok, false, nullptr, nullptr, check.ok ? "verified" : check.reason});
  }
  return t;
}

inline std::string canonical_method(const std::string& tag) {
  if (tag == "cor3") return "periodic_C1";
  if (tag == "corP7") return "quasi_periodic_C2";
  if (tag == "thm3") return "theorem3_C3";
  static const std::vector<std::string> known{"general_opt",       "fixed_h",     "corollary1", "periodic_C1",
                                              "quasi_periodic_C2", "theorem3_C3", "kappa",      "union_baseline"};
  if (std::find(known.begin(), known.end(), tag) == known.end())
    throw ConfigError("--method: unknown method '" + tag + "'");
  return tag;
}

inline TruncationPolicy policy_for(const Options& o, const std::vector<double>& us) {
  TruncationPolicy policy;
  policy.k_max = std::max<std::int64_t>(o.kmax, static_cast<std::int64_t>(std::ceil(10.0 * us.back())));
  return policy;
}

inline BoundResult compute_bound(const RiskModel& model, const std::string& method, double u, const Options& o,
                                 const TruncationPolicy& policy) {
  if (method == "general_opt") return bound_optimize(model, u, policy);
  if (method == "fixed_h") {
    if (!o.h) throw ConfigError("--method fixed_h requires --h");
    return bound_at_h(model, u, *o.h, policy);
  }
  if (method == "union_baseline") {
    const double h = o.h ? *o.h : bound_optimize(model, u, policy).h_star;
    return bound_union_baseline(model, u, h, policy);
  }
  if (method == "corollary1") return bound_corollary1(model, u, o.tol, policy);
  if (method == "kappa") return bound_kappa(model, u, o.tol);
  const std::int64_t l = o.l ? *o.l : natural_period(model).value_or(1);
  if (method == "periodic_C1") return bound_periodic(model, l, PeriodicVariant::cor3(), u, o.tol, o.hcert);
  if (method == "theorem3_C3") return bound_periodic(model, l, PeriodicVariant::thm3(), u, o.tol, o.hcert);
  if (!o.lstar) throw ConfigError("--method quasi_periodic_C2 requires --lstar");
  return bound_periodic(model, l, PeriodicVariant::corP7(o.m, *o.lstar), u, o.tol, o.hcert);
}

inline std::vector<std::string> split_methods(const std::string& spec) {
  std::vector<std::string> out;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(canonical_method(p));
  if (out.empty()) throw ConfigError("--method: empty");
  return out;
}

inline Table run_bound(const ModelConfig& cfg, const Options& o, Outcome& oc) {
  const RiskModel model = cfg.risk_model();
  const auto us = parse_grid(o.u);
  const auto methods = split_methods(o.method);
  const auto policy = policy_for(o, us);
  Table t({"u", "method", "h_star", "log10_bound", "C", "L", "certified"});
  for (double u : us) {
    for (const auto& method : methods) {
      const BoundResult r = compute_bound(model, method, u, o, policy);
      oc.uncertified = oc.uncertified || !r.certified;
      Table::Cell c = nullptr;
      Table::Cell l = nullptr;
      if (r.certificate) {
        c = r.certificate->constant();
        l = r.certificate->exponent;
      }
      t.add({u, std::string(to_string(r.method)), r.h_star, r.log10_bound(), c, l, r.certified});
    }
  }
  return t;
}

inline Table run_simulate(const ModelConfig& cfg, const Options& o, Outcome& oc) {
  const RiskModel model = cfg.risk_model();
  const auto us = parse_grid(o.u);
  const auto policy = policy_for(o, us);
  const std::string method = split_methods(o.method).front();
  SimConfig sc;
  sc.n_paths = o.paths;
  sc.horizon = o.horizon;
  sc.seed = o.seed;
  sc.confidence = o.confidence;
  sc.threads = o.threads;
  const auto sims = std::visit([&](const auto& m) { return simulate_ruin_grid(m, us, sc); }, cfg.model);
  Table t({"u", "n_paths", "K", "ruin_count", "estimate", "ci_low", "ci_high", "bound", "dominated"});
  for (const auto& s : sims) {
    const BoundResult b = compute_bound(model, method, s.u, o, policy);
    oc.uncertified = oc.uncertified || !b.certified;
    const bool dominated = s.ci_low <= b.bound();
    if (!dominated) oc.code = kDominanceFailure;
    t.add({s.u, s.n_paths, s.horizon, s.ruin_count, s.estimate, s.ci_low, s.ci_high, b.bound(), dominated});
  }
  return t;
}

inline Table run_compare(const ModelConfig& cfg, const Options& o, Outcome& oc) {
  const RiskModel model = cfg.risk_model();
  const auto us = parse_grid(o.u);
  const auto policy = policy_for(o, us);
  std::vector<SimResult> sims;
  if (o.paths > 0) {
    SimConfig sc;
    sc.n_paths = o.paths;
    sc.horizon = o.horizon;
    sc.seed = o.seed;
    sc.confidence = o.confidence;
    sc.threads = o.threads;
    sims = std::visit([&](const auto& m) { return simulate_ruin_grid(m, us, sc); }, cfg.model);
  }
  Table t({"u", "log10_general_opt", "log10_union_baseline", "log10_corollary1", "log10_external_ex2",
           "log10_external_ex4", "log10_mc_estimate", "winner"});
  for (std::size_t i = 0; i < us.size(); ++i) {
    const double u = us[i];
    const BoundResult ours = bound_optimize(model, u, policy);
    const BoundResult uni = bound_union_baseline(model, u, o.h.value_or(ours.h_star), policy);
    const BoundResult cor1 = bound_corollary1(model, u, o.tol, policy);
    oc.uncertified = oc.uncertified || !ours.certified || !cor1.certified;
    const std::vector<std::pair<std::string, double>> candidates{
        {"general_opt", ours.log_bound},
        {"union_baseline", uni.log_bound},
        {"corollary1", cor1.log_bound},
        {std::string(kExternalEx2.name), kExternalEx2.log_bound(u)},
        {std::string(kExternalEx4.name), kExternalEx4.log_bound(u)},
    };
    // Smallest bound wins; ties go to the earlier column.
    const auto win = std::min_element(candidates.begin(), candidates.end(),
                                      [](const auto& a, const auto& b) { return a.second < b.second; });
    Table::Cell mc = nullptr;
    if (!sims.empty()) mc = std::log10(sims[i].estimate);
    t.add({u, candidates[0].second * kLog10E, candidates[1].second * kLog10E, candidates[2].second * kLog10E,
           candidates[3].second * kLog10E, candidates[4].second * kLog10E, mc, win->first});
  }
  return t;
}

// Entry point shared by the executable and the tests. args excludes argv[0].
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lundberg-type ruin probability bounds, adjustment coefficients and Monte Carlo checks"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print this help");  // -h would clash with --h
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--model", o.model_path, "model config (JSON)")->required();
    sub->add_option("--out", o.out_path, "write the table here instead of stdout");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_flag("--strict", o.strict, "exit 3 when any result is uncertified");
    sub->add_option("--kmax", o.kmax, "truncation length for sup scans")->check(CLI::PositiveNumber);
    sub->add_option("--tol", o.tol, "bisection tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--l", o.l, "period length")->check(CLI::PositiveNumber);
    sub->add_option("--m", o.m, "offset for the L* condition")->check(CLI::PositiveNumber);
    sub->add_option("--lstar", o.lstar, "user-supplied exponent L*")->check(CLI::NonNegativeNumber);
  };
  auto grid = [&](CLI::App* sub) {
    sub->add_option("--u", o.u, "initial reserves: a,b,c or lo:hi:n");
    sub->add_option("--h", o.h, "fixed exponent")->check(CLI::NonNegativeNumber);
    sub->add_option("--method", o.method, "bound method tag(s), comma separated");
    sub->add_option("--hcert", o.hcert, "certificate exponent for periodic methods")->check(CLI::NonNegativeNumber);
  };
  std::int64_t sim_paths = 100000;
  std::int64_t compare_paths = 0;
  auto sim = [&](CLI::App* sub, std::int64_t& paths) {
    sub->add_option("--paths", paths, "Monte Carlo paths")->check(CLI::NonNegativeNumber);
    sub->add_option("--horizon", o.horizon, "claim epochs per path")->check(CLI::PositiveNumber);
    sub->add_option("--confidence", o.confidence, "confidence level")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--threads", o.threads, "worker threads (0: all cores; capped by RUINBOUND_THREADS)");
  };
  auto* adj = app.add_subcommand("adjustment", "adjustment coefficients");
  common(adj);
  auto* bnd = app.add_subcommand("bound", "ruin probability bounds");
  common(bnd);
  grid(bnd);
  auto* simc = app.add_subcommand("simulate", "Monte Carlo ruin estimates against a bound");
  common(simc);
  grid(simc);
  sim(simc, sim_paths);
  auto* cmp = app.add_subcommand("compare", "bounds side by side (--paths > 0 adds a Monte Carlo column)");
  common(cmp);
  grid(cmp);
  sim(cmp, compare_paths);

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  o.paths = cmp->parsed() ? compare_paths : sim_paths;
  if (simc->parsed() && o.paths < 1) {
    err << "error: --paths must be >= 1\n";
    return kConfigError;
  }

  Outcome oc;
  try {
    const ModelConfig cfg = load_model(o.model_path);
    std::optional<Table> table;
    if (adj->parsed()) table = run_adjustment(cfg, o, oc);
    if (bnd->parsed()) table = run_bound(cfg, o, oc);
    if (simc->parsed()) table = run_simulate(cfg, o, oc);
    if (cmp->parsed()) table = run_compare(cfg, o, oc);
    if (o.out_path.empty()) {
      table->write(out, o.format);
    } else {
      std::ofstream f(o.out_path);
      if (!f) throw ConfigError(o.out_path + ": cannot write");
      table->write(f, o.format);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const HypothesisViolated& e) {
    err << "hypothesis violated: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kConfigError;
  } catch (const IndexBeyondPrefix& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  if (oc.uncertified) {
    err << "warning: some results are not certified (sup over k undetermined or check failed)\n";
    if (o.strict && oc.code == kOk) return kUncertified;
  }
  if (oc.code == kDominanceFailure) err << "error: a Monte Carlo lower confidence limit exceeds its bound\n";
  return oc.code;
}

}  // namespace ruinbound::cli
