#pragma once

#include <cmath>
#include <string>

#include "ruinbound/distributions.hpp"
#include "ruinbound/io.hpp"
#include "ruinbound/model.hpp"

namespace fixtures {

using namespace ruinbound;

inline std::string config_path(const std::string& name) { return std::string(RUINBOUND_CONFIG_DIR) + "/" + name; }

// Period-2 normals with means a1, a2 and unit variance.
inline RiskModel two_normals(double a1, double a2) {
  return RiskModel(Periodic{{Distribution::normal(a1, 1.0), Distribution::normal(a2, 1.0)}});
}

inline RiskModel ex1() { return two_normals(-0.25, -0.75); }

inline RiskModel ex2() {
  return RiskModel(Periodic{{Distribution::uniform(0.0, 2.0), Distribution::uniform(-2.0, 0.0),
                             Distribution::shifted_exponential(1.0, -2.0)}});
}

inline RiskModel ex3() { return RiskModel(IndexedNormal{-0.5, 0.25}); }

inline RiskModel ex4() { return RiskModel(IndexedTwoPoint{}); }

inline Distribution classical_step() {
  return Distribution::compound(Distribution::exponential(1.0), 1.0, Distribution::exponential(0.5));
}

inline RiskModel classical() { return RiskModel(Periodic{{classical_step()}}); }

inline RiskModel iid(const Distribution& d, double rate = 0.0) {
  return RiskModel(Periodic{{d}}, ConstantRate{rate});
}

// Exact ruin probability for Exp(mu) claims, premium rate p, Exp(lambda)
// interarrivals: psi(u) = (lambda / (p mu)) exp(-(mu - lambda / p) u).
inline double classical_psi(double u, double mu = 1.0, double lambda = 0.5, double p = 1.0) {
  return lambda / (p * mu) * std::exp(-(mu - lambda / p) * u);
}

}  // namespace fixtures
