#pragma once

// JSON scenario files and reports; CSV for sweeps.

#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cotlab/adaptation.hpp"
#include "cotlab/amplification.hpp"
#include "cotlab/arithmetic.hpp"
#include "cotlab/constructions.hpp"
#include "cotlab/scenario.hpp"

namespace cotlab::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

template <class E, std::size_t N>
E enum_from(const std::string& name, const E (&all)[N], const char* what) {
  for (E e : all)
    if (name == to_string(e)) return e;
  throw ParseError(std::string("unknown ") + what + " family '" + name + "'");
}

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline double number(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

inline std::string text(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw ParseError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace detail

// Points are numbers in real spaces and strings in expression/atom spaces.
inline json to_json(const Point& p) {
  if (p.is_real()) return p.value();
  return p.text();
}

inline Point point_from_json(const json& j, PointKind kind) {
  try {
    switch (kind) {
      case PointKind::Real:
        if (!j.is_number()) throw ParseError("expected a real point");
        return Point::real(j.get<double>());
      case PointKind::Expr:
        if (!j.is_string()) throw ParseError("expected an expression string");
        return Point::expr(j.get<std::string>());
      case PointKind::Atom:
        if (!j.is_string()) throw ParseError("expected an atom label");
        return Point::atom(j.get<std::string>());
    }
  } catch (const DomainError& e) {
    throw ParseError(std::string("invalid point: ") + e.what());
  }
  throw ParseError("unknown point kind");
}

inline json to_json(const MetricSpace& s) {
  json j{{"kind", s.id()}};
  if (s.interval()) {
    j["lower"] = s.interval()->lower;
    j["upper"] = s.interval()->upper;
  }
  return j;
}

inline MetricSpace space_from_json(const json& j) {
  const auto kind = detail::text(j, "kind");
  if (kind == "real") {
    if (j.contains("lower") || j.contains("upper"))
      return MetricSpace::real_interval(detail::number(j, "lower"), detail::number(j, "upper"));
    return MetricSpace::real_line();
  }
  if (kind == "expr") return MetricSpace::discrete(PointKind::Expr);
  if (kind == "atom") return MetricSpace::discrete(PointKind::Atom);
  throw ParseError("unknown space kind '" + kind + "'");
}

inline json to_json(const QuasimetricLoss& l) {
  json params = json::object();
  switch (l.family()) {
    case LossFamily::ScaledMetric: params["scale"] = l.scale(); break;
    case LossFamily::CappedMetric:
      params["scale"] = l.scale();
      params["cap"] = *l.cap();
      break;
    case LossFamily::Indicator: params["M"] = *l.cap(); break;
    case LossFamily::Squared: break;
  }
  return {{"family", to_string(l.family())}, {"params", params}};
}

inline QuasimetricLoss loss_from_json(const json& j, const MetricSpace& space) {
  static constexpr LossFamily all[] = {LossFamily::ScaledMetric, LossFamily::CappedMetric, LossFamily::Indicator,
                                       LossFamily::Squared};
  const auto fam = detail::enum_from(detail::text(j, "family"), all, "loss");
  const json params = j.value("params", json::object());
  switch (fam) {
    case LossFamily::ScaledMetric: return QuasimetricLoss::scaled_metric(space, detail::number(params, "scale"));
    case LossFamily::CappedMetric:
      return QuasimetricLoss::capped_metric(space, detail::number(params, "scale"), detail::number(params, "cap"));
    case LossFamily::Indicator: return QuasimetricLoss::indicator(space, detail::number(params, "M"));
    case LossFamily::Squared: return QuasimetricLoss::squared(space);
  }
  throw ParseError("unreachable loss family");
}

inline json to_json(const AnswerMap& m) {
  json params = json::object();
  switch (m.family()) {
    case MapFamily::Affine:
      params["slope"] = m.slope();
      params["offset"] = m.offset();
      break;
    case MapFamily::Constant: params["value"] = to_json(*m.constant_value()); break;
    case MapFamily::PiecewiseAffine: {
      json knots = json::array();
      for (const auto& [x, y] : m.knots()) knots.push_back({x, y});
      params["knots"] = knots;
      break;
    }
    default: break;
  }
  json exc = json::array();
  for (const auto& [at, v] : m.exceptions()) exc.push_back({to_json(at), to_json(v)});
  return {{"family", to_string(m.family())}, {"params", params}, {"exceptions", exc}};
}

inline AnswerMap map_from_json(const json& j, PointKind kind) {
  static constexpr MapFamily all[] = {MapFamily::Identity,        MapFamily::Affine,   MapFamily::Constant,
                                      MapFamily::Abs,             MapFamily::PiecewiseAffine, MapFamily::ArithEval};
  const auto fam = detail::enum_from(detail::text(j, "family"), all, "answer map");
  const json params = j.value("params", json::object());
  auto m = [&]() {
    switch (fam) {
      case MapFamily::Identity: return AnswerMap::identity();
      case MapFamily::Affine: return AnswerMap::affine(detail::number(params, "slope"), detail::number(params, "offset"));
      case MapFamily::Constant: return AnswerMap::constant(point_from_json(detail::field(params, "value"), kind));
      case MapFamily::Abs: return AnswerMap::abs();
      case MapFamily::PiecewiseAffine: {
        std::vector<Knot> knots;
        for (const auto& k : detail::field(params, "knots")) {
          if (!k.is_array() || k.size() != 2) throw ParseError("knots are [x, y] pairs");
          knots.emplace_back(k[0].get<double>(), k[1].get<double>());
        }
        return AnswerMap::piecewise_affine(std::move(knots));
      }
      case MapFamily::ArithEval: return AnswerMap::arith_eval();
    }
    throw ParseError("unreachable map family");
  }();
  if (j.contains("exceptions"))
    for (const auto& e : j.at("exceptions")) {
      if (!e.is_array() || e.size() != 2) throw ParseError("exceptions are [point, value] pairs");
      m = m.with_exception(point_from_json(e[0], kind), point_from_json(e[1], kind));
    }
  return m;
}

inline json to_json(const ChainRuleStep& s) {
  json params = json::object();
  switch (s.family()) {
    case StepFamily::Constant: params["value"] = to_json(s.points()[0]); break;
    case StepFamily::Copy: params["coord"] = s.terms()[0].coord.to_string(); break;
    case StepFamily::AffineCoord:
      params["coord"] = s.terms()[0].coord.to_string();
      params["slope"] = s.terms()[0].coef;
      params["offset"] = s.offset();
      params["pivot"] = s.pivot();
      break;
    case StepFamily::LinearCombo: {
      params["offset"] = s.offset();
      json terms = json::array();
      for (const auto& t : s.terms()) terms.push_back({{"coord", t.coord.to_string()}, {"coef", t.coef}});
      params["terms"] = terms;
      break;
    }
    case StepFamily::BranchOnEqual:
      params["coord"] = s.terms()[0].coord.to_string();
      params["match"] = to_json(s.points()[0]);
      params["if_equal"] = to_json(s.points()[1]);
      params["otherwise"] = to_json(s.points()[2]);
      break;
    default: break;
  }
  return {{"family", to_string(s.family())}, {"params", params}};
}

inline ChainRuleStep step_from_json(const json& j, PointKind kind) {
  static constexpr StepFamily all[] = {StepFamily::Constant,         StepFamily::Copy,
                                       StepFamily::AffineCoord,      StepFamily::LinearCombo,
                                       StepFamily::BranchOnEqual,    StepFamily::ArithTensProduct,
                                       StepFamily::ArithScaleTen,    StepFamily::ArithUnitsProduct,
                                       StepFamily::ArithSumAnswers};
  const auto fam = detail::enum_from(detail::text(j, "family"), all, "chain-rule step");
  const json params = j.value("params", json::object());
  auto coord = [&] { return Coord::parse(detail::text(params, "coord")); };
  switch (fam) {
    case StepFamily::Constant: return ChainRuleStep::constant(point_from_json(detail::field(params, "value"), kind));
    case StepFamily::Copy: return ChainRuleStep::copy(coord());
    case StepFamily::AffineCoord:
      return ChainRuleStep::affine_coord(coord(), detail::number(params, "slope"), detail::number(params, "offset"),
                                         params.value("pivot", 0.0));
    case StepFamily::LinearCombo: {
      std::vector<Term> terms;
      for (const auto& t : detail::field(params, "terms"))
        terms.push_back({Coord::parse(detail::text(t, "coord")), detail::number(t, "coef")});
      return ChainRuleStep::linear_combo(detail::number(params, "offset"), std::move(terms));
    }
    case StepFamily::BranchOnEqual:
      return ChainRuleStep::branch_on_equal(coord(), point_from_json(detail::field(params, "match"), kind),
                                            point_from_json(detail::field(params, "if_equal"), kind),
                                            point_from_json(detail::field(params, "otherwise"), kind));
    case StepFamily::ArithTensProduct: return ChainRuleStep::arith_tens_product();
    case StepFamily::ArithScaleTen: return ChainRuleStep::arith_scale_ten();
    case StepFamily::ArithUnitsProduct: return ChainRuleStep::arith_units_product();
    case StepFamily::ArithSumAnswers: return ChainRuleStep::arith_sum_answers();
  }
  throw ParseError("unreachable step family");
}

inline json to_json(const FiniteDistribution& d) {
  json support = json::array();
  for (const auto& p : d.support()) support.push_back(to_json(p));
  return {{"support", support}, {"weights", d.weights()}};
}

inline FiniteDistribution distribution_from_json(const json& j, PointKind kind) {
  std::vector<Point> support;
  for (const auto& p : detail::field(j, "support")) support.push_back(point_from_json(p, kind));
  const auto& w = detail::field(j, "weights");
  if (!w.is_array()) throw ParseError("weights must be an array");
  return FiniteDistribution(std::move(support), w.get<std::vector<double>>());
}

inline json to_json(const Expectations& e) {
  json j = json::object();
  auto put = [&](const char* k, const std::optional<double>& v) {
    if (v) j[k] = *v;
  };
  put("reasoning", e.reasoning);
  put("tmr", e.tmr);
  put("otr", e.otr);
  put("omr", e.omr);
  put("dfg", e.dfg);
  j["decomposition_equality"] = e.decomposition_equality;
  if (e.recoverable) j["recoverable"] = *e.recoverable;
  return j;
}

inline Expectations expectations_from_json(const json& j) {
  Expectations e;
  auto get = [&](const char* k) -> std::optional<double> {
    if (!j.contains(k)) return std::nullopt;
    return detail::number(j, k);
  };
  e.reasoning = get("reasoning");
  e.tmr = get("tmr");
  e.otr = get("otr");
  e.omr = get("omr");
  e.dfg = get("dfg");
  e.decomposition_equality = j.value("decomposition_equality", false);
  if (j.contains("recoverable")) e.recoverable = j.at("recoverable").get<bool>();
  return e;
}

inline json to_json(const Scenario& s) {
  json steps = json::array();
  for (const auto& st : s.rule.steps()) steps.push_back(to_json(st));
  json certs = json::array();
  for (const auto& c : s.certificates)
    certs.push_back({{"role", c.role},
                     {"arity", c.cert.arity},
                     {"total", c.cert.total},
                     {"coords", c.cert.coords},
                     {"proven", c.cert.proven}});
  json j{{"version", kSchemaVersion},
         {"name", s.name},
         {"kind", s.kind},
         {"parameters", s.parameters},
         {"space", to_json(s.space())},
         {"loss", to_json(s.loss)},
         {"f", to_json(s.f)},
         {"g", to_json(s.g)},
         {"rule", {{"K", s.rule.K()}, {"steps", steps}}},
         {"nu", to_json(s.nu)},
         {"certificates", certs},
         {"expectations", to_json(s.expectations)}};
  if (s.sample_box) j["sample_box"] = {s.sample_box->lower, s.sample_box->upper};
  if (!s.anchors.empty()) j["anchors"] = s.anchors;
  if (!s.hypotheses.empty()) {
    json h = json::array();
    for (const auto& m : s.hypotheses) h.push_back(to_json(m));
    j["hypotheses"] = h;
  }
  if (s.source) j["source"] = to_json(*s.source);
  return j;
}

/// Throws ParseError on malformed documents and unknown families; parameter
/// and domain errors raised while rebuilding the objects are reported as
/// parse errors too.
inline Scenario scenario_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ParseError("scenario must be a JSON object");
    if (j.contains("version") && j.at("version") != kSchemaVersion)
      throw ParseError("unsupported scenario version " + j.at("version").dump());
    const auto space = space_from_json(detail::field(j, "space"));
    const auto kind = space.point_kind();
    const auto& rj = detail::field(j, "rule");
    std::vector<ChainRuleStep> steps;
    for (const auto& st : detail::field(rj, "steps")) steps.push_back(step_from_json(st, kind));
    if (rj.contains("K") && rj.at("K").get<int>() != static_cast<int>(steps.size()))
      throw ParseError("rule.K does not match the number of steps");
    std::vector<RoleCertificate> certs;
    if (j.contains("certificates"))
      for (const auto& c : j.at("certificates"))
        certs.push_back({detail::text(c, "role"),
                         StabilityCertificate::make(c.at("arity").get<std::size_t>(), detail::number(c, "total"),
                                                    c.at("coords").get<std::vector<double>>(), c.value("proven", true))});
    std::optional<Interval> box;
    if (j.contains("sample_box")) {
      const auto& b = j.at("sample_box");
      if (!b.is_array() || b.size() != 2) throw ParseError("sample_box is [lower, upper]");
      box = Interval{b[0].get<double>(), b[1].get<double>()};
    }
    std::vector<AnswerMap> hyps;
    if (j.contains("hypotheses"))
      for (const auto& h : j.at("hypotheses")) hyps.push_back(map_from_json(h, kind));
    std::optional<FiniteDistribution> source;
    if (j.contains("source")) source = distribution_from_json(j.at("source"), kind);
    return Scenario{j.value("name", std::string("unnamed")),
                    j.value("kind", std::string("custom")),
                    j.value("parameters", std::map<std::string, double>{}),
                    loss_from_json(detail::field(j, "loss"), space),
                    map_from_json(detail::field(j, "f"), kind),
                    map_from_json(detail::field(j, "g"), kind),
                    ChainRule(space, std::move(steps)),
                    distribution_from_json(detail::field(j, "nu"), kind),
                    std::move(certs),
                    expectations_from_json(j.value("expectations", json::object())),
                    box,
                    j.value("anchors", std::vector<double>{}),
                    std::move(hyps),
                    std::move(source)};
  } catch (const ParseError&) {
    throw;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed scenario: ") + e.what());
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid scenario: ") + e.what());
  }
}

inline Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

inline std::string dump_scenario(const Scenario& s) { return to_json(s).dump(2); }

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const RiskReport& r) {
  return {{"reasoning", r.reasoning},
          {"tmr", r.tmr},
          {"otr", r.otr},
          {"omr", r.omr},
          {"decomposition_slack", r.decomposition_slack},
          {"three_term_slack", r.three_term_slack},
          {"recoverable", r.recoverable},
          {"two_term_holds", r.two_term_holds},
          {"three_term_holds", r.three_term_holds}};
}

inline json to_json(const VerificationReport& r) {
  json items = json::array();
  for (const auto& i : r.items) {
    json item{{"name", i.name}, {"pass", i.pass}, {"margin", i.margin}};
    if (i.expected) item["expected"] = *i.expected;
    if (i.actual) item["actual"] = *i.actual;
    if (!i.detail.empty()) item["detail"] = i.detail;
    items.push_back(item);
  }
  return {{"version", kSchemaVersion}, {"scenario", r.scenario}, {"pass", r.pass}, {"risks", to_json(r.risks)},
          {"checks", items}};
}

inline json to_json(const CoverageReport& r) {
  json means = json::object();
  for (const auto& [k, v] : r.per_addend_means) means[k] = v;
  return {{"version", kSchemaVersion}, {"trials", r.trials}, {"violations", r.violations},
          {"frequency", r.frequency},  {"eps", r.eps},       {"per_addend_means", means},
          {"seed", r.seed},            {"m", r.m}};
}

inline json to_json(const ArithReport& r) {
  return {{"version", kSchemaVersion}, {"total", r.total}, {"passed", r.passed}, {"all_passed", r.all_passed()}};
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kAmpCsvHeader = "K,phi,delta,alpha,regime,bound";

inline std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

/// One sweep row. `bound` is the TMR bound with lambda = 1 and d(f, g) = 1,
/// i.e. (phi delta / 2) alpha.
inline std::string amp_csv_row(int K, double phi, double delta) {
  const auto cf = amplification_closed_form(K, phi, delta);
  const double alpha = amplification_factor(K, phi, delta);
  const double bound = tmr_bound(AmplificationParams<double>{K, phi, delta, 1.0, 1.0});
  return std::to_string(K) + "," + csv_number(phi) + "," + csv_number(delta) + "," + csv_number(alpha) + "," +
         to_string(cf.regime) + "," + csv_number(bound);
}

inline void write_arith_csv(std::ostream& os, const ArithReport& r) {
  os << "prompt,expected,final_answer,recoverable\n";
  for (const auto& c : r.cases)
    os << c.prompt << "," << c.expected << "," << c.final_answer << "," << (c.recoverable ? 1 : 0) << "\n";
}

}  // namespace cotlab::io
