#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cotlab/chain.hpp"
#include "cotlab/risk.hpp"
#include "cotlab/spaces.hpp"

namespace cotlab {

/// A certificate attached to one component of a scenario. Roles: "loss",
/// "f", "g", or "step<k>".
struct RoleCertificate {
  std::string role;
  StabilityCertificate cert;
  friend bool operator==(const RoleCertificate&, const RoleCertificate&) = default;
};

struct Expectations {
  std::optional<double> reasoning;
  std::optional<double> tmr;
  std::optional<double> otr;
  std::optional<double> omr;
  std::optional<double> dfg;
  // Equality in the two-term decomposition when the support is recoverable,
  // in the three-term one otherwise.
  bool decomposition_equality = false;
  // true: every support point is (D_K, g)-recoverable; false: none is.
  std::optional<bool> recoverable;
  friend bool operator==(const Expectations&, const Expectations&) = default;
};

/// A self-contained experiment instance (X, rho, l, f, g, D_K, nu) plus
/// certificates and expected risk values.
struct Scenario {
  std::string name;
  std::string kind = "custom";  // nfl1 | nfl2 | nfl3 | tight | omr | random | adaptation | arith | custom
  std::map<std::string, double> parameters;
  QuasimetricLoss loss;
  AnswerMap f;
  AnswerMap g;
  ChainRule rule;
  FiniteDistribution nu;
  std::vector<RoleCertificate> certificates;
  Expectations expectations;
  // Box for sampled stability checks on real spaces (defaults to the space's
  // interval when absent).
  std::optional<Interval> sample_box;
  // Oracle anchor points s_1..s_K of a tightness instance.
  std::vector<double> anchors;
  // Finite hypothesis class and source distribution for OTR bounds.
  std::vector<AnswerMap> hypotheses;
  std::optional<FiniteDistribution> source;

  const MetricSpace& space() const noexcept { return rule.space(); }

  double parameter(const std::string& key) const {
    auto it = parameters.find(key);
    if (it == parameters.end()) throw ParameterError("scenario '" + name + "' has no parameter '" + key + "'");
    return it->second;
  }

  const RoleCertificate* certificate_for(const std::string& role) const {
    for (const auto& c : certificates)
      if (c.role == role) return &c;
    return nullptr;
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

}  // namespace cotlab
