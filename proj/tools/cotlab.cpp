// Command-line front end.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
// COT_LAB_SEED overrides the default seed; --seed overrides both.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cotlab/cotlab.hpp"

namespace {

using namespace cotlab;
using json = nlohmann::json;

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("COT_LAB_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      auto v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw UsageError(std::string("COT_LAB_SEED is not an unsigned integer: ") + env);
    }
  }
  return kDefaultSeed;
}

// start:stop:step, inclusive of stop up to rounding; a bare number is a
// one-point grid.
std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) throw UsageError("bad number '" + s + "' in grid '" + spec + "'");
    return v;
  };
  if (parts.size() == 1) return {num(parts[0])};
  if (parts.size() != 3) throw UsageError("grid must be start:stop:step, got '" + spec + "'");
  const double start = num(parts[0]), stop = num(parts[1]), step = num(parts[2]);
  if (!(step > 0.0)) throw UsageError("grid step must be positive in '" + spec + "'");
  if (stop < start) throw UsageError("grid stop is below start in '" + spec + "'");
  std::vector<double> out;
  const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
  for (long long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

std::vector<int> int_grid(const std::string& spec) {
  std::vector<int> out;
  for (double v : parse_grid(spec)) {
    if (v != std::round(v)) throw UsageError("K grid must contain integers, got " + std::to_string(v));
    out.push_back(static_cast<int>(v));
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

std::string fmt(double v) { return io::csv_number(v); }

// ---------------------------------------------------------------------------

int amp_single(int K, double phi, double delta) {
  const auto cf = amplification_closed_form(K, phi, delta);
  const auto mf = amplification_max_form(K, phi, delta);
  std::cout << "alpha=" << fmt(mf.value) << "\n"
            << "regime=" << to_string(cf.regime) << "\n"
            << "closed_form=" << fmt(cf.value) << "\n"
            << "argmax_m=" << mf.argmax_m << "\n";
  bool ok = std::abs(cf.value - mf.value) <= 1e-9 * std::max(1.0, std::abs(mf.value));
  if (phi < 1.0 && delta > 1.0) {
    auto b = breakpoints(K, phi, delta);
    if (b.m) std::cout << "m_K=" << *b.m << "\n";
    if (b.n) std::cout << "n_K=" << *b.n << "\n";
  }
  if (K <= kWordOracleMaxK) {
    auto w = word_oracle(K, phi, delta);
    const double expect = delta * mf.value;
    const bool agree = std::abs(w.value - expect) <= 1e-9 * std::max(1.0, std::abs(expect));
    ok = ok && agree;
    std::cout << "word_oracle C_" << K - 1 << "=" << fmt(w.value) << " word=" << (w.word.empty() ? "-" : w.word_string())
              << " words=" << w.words_enumerated << " check=" << (agree ? "pass" : "FAIL") << "\n";
  }
  return ok ? kOk : kFail;
}

int amp_sweep(const std::vector<int>& Ks, const std::vector<double>& phis, const std::vector<double>& deltas,
              const std::string& csv_path) {
  std::ostringstream os;
  os << io::kAmpCsvHeader << "\n";
  for (int K : Ks)
    for (double p : phis)
      for (double d : deltas) os << io::amp_csv_row(K, p, d) << "\n";
  write_text(csv_path.empty() ? "-" : csv_path, os.str());
  return kOk;
}

// ---------------------------------------------------------------------------

struct BuiltinArgs {
  int K = 3;
  double M = 1.0;
  double eps = 0.1;
  double lambda = 1.0;
  double phi = 0.5;
  double delta = 2.0;
  int grid = 10;
};

Scenario builtin_scenario(const std::string& name, const BuiltinArgs& a, std::uint64_t seed) {
  if (name == "nfl1") return nfl_instance(1, a.K, a.M, a.eps);
  if (name == "nfl2") return nfl_instance(2, a.K, a.M, a.eps);
  if (name == "nfl3") return nfl_instance(3, a.K, a.M, a.eps);
  if (name == "tight") return tight_instance(a.K, a.lambda, a.phi, a.delta);
  if (name == "omr") return omr_instance(a.K, a.M, a.grid);
  if (name == "arith") return arith_scenario();
  if (name == "random") return random_stable_instance(seed);
  if (name == "tiny") return adaptation_fixture(false);
  if (name == "g-only") return adaptation_fixture(true);
  throw UsageError("unknown builtin '" + name + "'");
}

void print_report(const VerificationReport& r) {
  std::cout << "scenario=" << r.scenario << "\n"
            << "reasoning=" << fmt(r.risks.reasoning) << " tmr=" << fmt(r.risks.tmr) << " otr=" << fmt(r.risks.otr)
            << " omr=" << fmt(r.risks.omr) << "\n"
            << "recoverable=" << (r.risks.recoverable ? "true" : "false") << "\n";
  for (const auto& i : r.items) {
    std::cout << (i.pass ? "  ok   " : "  FAIL ") << i.name;
    if (i.expected) std::cout << " expected=" << fmt(*i.expected);
    if (i.actual) std::cout << " actual=" << fmt(*i.actual);
    if (!i.detail.empty()) std::cout << " (" << i.detail << ")";
    std::cout << "\n";
  }
  std::cout << (r.pass ? "PASS" : "FAIL") << "\n";
}

int cmd_verify(const std::string& file, const std::string& builtin, const BuiltinArgs& args, std::uint64_t seed,
               const std::string& json_path, const std::string& dump_path) {
  if (file.empty() == builtin.empty()) throw UsageError("verify needs exactly one of FILE or --builtin");
  const Scenario s = file.empty() ? builtin_scenario(builtin, args, seed) : io::load_scenario(file);
  if (!dump_path.empty()) write_text(dump_path, io::dump_scenario(s) + "\n");
  auto rep = verify_scenario(s, seed);
  bool pass = rep.pass;
  json out = io::to_json(rep);
  print_report(rep);
  if (s.kind == "arith") {
    auto ar = family_recoverability_report();
    std::cout << "family " << ar.passed << "/" << ar.total << " recoverable\n";
    out["arith"] = io::to_json(ar);
    pass = pass && ar.all_passed();
  }
  if (!json_path.empty()) write_text(json_path, out.dump(2) + "\n");
  return pass ? kOk : kFail;
}

int cmd_bound(const std::string& file, const std::string& builtin, std::size_t m, long long trials, double eps,
              std::uint64_t seed, const std::string& json_path) {
  if (file.empty() == builtin.empty()) throw UsageError("bound needs exactly one of FILE or --builtin");
  if (trials <= 0) throw UsageError("--trials must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw UsageError("--eps must lie in (0, 1)");
  const Scenario s = file.empty() ? builtin_scenario(builtin, BuiltinArgs{}, seed) : io::load_scenario(file);
  if (s.hypotheses.empty()) throw UsageError("scenario has no hypothesis class");
  auto rep = bound_experiment(s, m, static_cast<std::size_t>(trials), eps, seed);
  const auto text = io::to_json(rep).dump(2) + "\n";
  std::cout << text;
  if (!json_path.empty() && json_path != "-") write_text(json_path, text);
  return rep.covered() ? kOk : kFail;
}

int cmd_sweep(const std::string& what, const std::string& Kspec, const std::string& phispec,
              const std::string& deltaspec, const std::string& lambdaspec, std::size_t count, std::uint64_t seed,
              const std::string& csv_path) {
  std::ostringstream os;
  bool ok = true;
  if (what == "amp") {
    return amp_sweep(int_grid(Kspec), parse_grid(phispec), parse_grid(deltaspec), csv_path);
  } else if (what == "tight") {
    os << "K,lambda,phi,delta,reasoning,bound,gap,pass\n";
    for (int K : int_grid(Kspec))
      for (double l : parse_grid(lambdaspec))
        for (double p : parse_grid(phispec))
          for (double d : parse_grid(deltaspec)) {
            auto s = tight_instance(K, l, p, d);
            auto rep = verify_scenario(s, seed, 1000);
            const double bound = reasoning_risk_bound(AmplificationParams<double>{K, p, d, l, 1.0}, rep.risks.otr);
            ok = ok && rep.pass;
            os << K << "," << fmt(l) << "," << fmt(p) << "," << fmt(d) << "," << fmt(rep.risks.reasoning) << ","
               << fmt(bound) << "," << fmt(bound - rep.risks.reasoning) << "," << (rep.pass ? 1 : 0) << "\n";
          }
  } else if (what == "random") {
    os << "seed,K,phi,delta,lambda,dfg,tmr,tmr_bound,reasoning,reasoning_bound,pass\n";
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint64_t sd = seed + i;
      auto s = random_stable_instance(sd);
      auto r = decomposition_check(s.rule, s.f, s.g, s.nu, s.loss);
      AmplificationParams<double> p{s.rule.K(), s.parameter("phi"), s.parameter("delta"), s.parameter("lambda"),
                                    s.parameter("dfg")};
      const double tb = tmr_bound(p), rb = reasoning_risk_bound(p, r.otr);
      const bool pass = r.tmr <= tb + kEqualityTol && r.reasoning <= rb + kEqualityTol;
      ok = ok && pass;
      os << sd << "," << p.K << "," << fmt(p.phi) << "," << fmt(p.delta) << "," << fmt(p.lambda) << "," << fmt(p.dfg)
         << "," << fmt(r.tmr) << "," << fmt(tb) << "," << fmt(r.reasoning) << "," << fmt(rb) << "," << (pass ? 1 : 0)
         << "\n";
    }
  } else {
    throw UsageError("sweep target must be amp, tight or random");
  }
  write_text(csv_path.empty() ? "-" : csv_path, os.str());
  return ok ? kOk : kFail;
}

int cmd_arith(const std::string& prompt, const std::string& csv_path) {
  const auto rule = build_multiplication_chain_rule();
  auto t = run_trajectory(rule, AnswerMap::arith_eval(), Point::expr(prompt));
  std::cout << "x=" << prompt << "\n";
  for (int k = 0; k < t.K(); ++k)
    std::cout << "Q" << k + 1 << "=" << t.questions[static_cast<std::size_t>(k)].text() << "  A" << k + 1 << "="
              << t.answers[static_cast<std::size_t>(k)].text() << "\n";
  bool ok = true;
  if (in_family(prompt)) {
    const auto truth = ground_truth_eval(prompt);
    const bool rec = t.final_answer().text() == truth;
    std::cout << "ground_truth=" << truth << " recoverable=" << (rec ? "true" : "false") << "\n";
    ok = rec;
  } else {
    std::cout << "prompt is outside the d1·(10 d2 + d3) family\n";
  }
  auto r = family_recoverability_report();
  std::cout << "family " << r.passed << "/" << r.total << " recoverable\n";
  if (!csv_path.empty()) {
    std::ostringstream os;
    io::write_arith_csv(os, r);
    write_text(csv_path, os.str());
  }
  return ok && r.all_passed() ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chain-of-thought error propagation lab"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--seed", seed_flag, "RNG seed (default: $COT_LAB_SEED, else built-in)");

  auto* amp = app.add_subcommand("amp", "Amplification factor alpha_K(phi, delta)");
  int amp_K = 0;
  double amp_phi = 0, amp_delta = 0;
  std::string amp_sweep_spec, amp_csv;
  amp->add_option("K", amp_K, "number of steps (>= 2)");
  amp->add_option("phi", amp_phi, "answer-map Lipschitz constant");
  amp->add_option("delta", amp_delta, "chain-rule Lipschitz constant");
  amp->add_option("--sweep", amp_sweep_spec,
                  "three grids K,phi,delta each start:stop:step, e.g. 2:12:1,0:3:0.25,0:3:0.25");
  amp->add_option("--csv", amp_csv, "CSV output path for --sweep (columns: K,phi,delta,alpha,regime,bound)");

  auto* verify = app.add_subcommand("verify", "Verify a scenario file or builtin construction");
  std::string v_file, v_builtin, v_json, v_dump;
  BuiltinArgs bargs;
  verify->add_option("file", v_file, "scenario JSON");
  verify->add_option("--builtin", v_builtin, "nfl1|nfl2|nfl3|tight|omr|arith|random|tiny|g-only");
  verify->add_option("--K", bargs.K, "steps");
  verify->add_option("--M", bargs.M, "loss magnitude");
  verify->add_option("--eps", bargs.eps, "stability budget");
  verify->add_option("--lambda", bargs.lambda, "loss Lipschitz constant");
  verify->add_option("--phi", bargs.phi, "answer-map Lipschitz constant");
  verify->add_option("--delta", bargs.delta, "chain-rule Lipschitz constant");
  verify->add_option("--grid", bargs.grid, "grid size for the omr builtin");
  verify->add_option("--json", v_json, "write the report as JSON ('-' for stdout)");
  verify->add_option("--dump", v_dump, "write the scenario as JSON");

  auto* bound = app.add_subcommand("bound", "Coverage experiment for the OTR bound");
  std::string b_file, b_builtin, b_json;
  std::size_t b_m = 8;
  long long b_trials = 2000;
  double b_eps = 0.1;
  bound->add_option("file", b_file, "scenario JSON with hypotheses");
  bound->add_option("--builtin", b_builtin, "tiny|g-only");
  bound->add_option("--m", b_m, "sample size");
  bound->add_option("--trials", b_trials, "number of trials");
  bound->add_option("--eps", b_eps, "confidence parameter in (0,1)");
  bound->add_option("--json", b_json, "also write the coverage JSON here");

  auto* sweep = app.add_subcommand(
      "sweep",
      "Parameter sweeps as CSV. amp: K,phi,delta,alpha,regime,bound (bound = phi delta alpha / 2). "
      "tight: K,lambda,phi,delta,reasoning,bound,gap,pass. "
      "random: seed,K,phi,delta,lambda,dfg,tmr,tmr_bound,reasoning,reasoning_bound,pass");
  std::string s_what = "amp", s_K = "2:12:1", s_phi = "0:3:0.25", s_delta = "0:3:0.25", s_lambda = "1", s_csv;
  std::size_t s_count = 100;
  sweep->add_option("what", s_what, "amp|tight|random");
  sweep->add_option("--K", s_K, "grid start:stop:step");
  sweep->add_option("--phi", s_phi, "grid start:stop:step");
  sweep->add_option("--delta", s_delta, "grid start:stop:step");
  sweep->add_option("--lambda", s_lambda, "grid start:stop:step (tight)");
  sweep->add_option("--count", s_count, "number of random instances");
  sweep->add_option("--csv", s_csv, "output path (default stdout)");

  auto* arith = app.add_subcommand("arith", "Multiplication chain rule trajectory and family check");
  std::string a_prompt = "7\xC2\xB7" "26", a_csv;
  arith->add_option("prompt", a_prompt, "expression, default 7·26");
  arith->add_option("--csv", a_csv, "CSV of all 900 family trajectories");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    const auto seed = resolve_seed(seed_flag);
    if (*amp) {
      if (!amp_sweep_spec.empty()) {
        std::vector<std::string> axes;
        std::stringstream ss(amp_sweep_spec);
        for (std::string a; std::getline(ss, a, ',');) axes.push_back(a);
        if (axes.size() != 3) throw UsageError("--sweep needs three comma-separated grids K,phi,delta");
        return amp_sweep(int_grid(axes[0]), parse_grid(axes[1]), parse_grid(axes[2]), amp_csv);
      }
      if (amp->count("K") == 0 || amp->count("phi") == 0 || amp->count("delta") == 0)
        throw UsageError("amp needs K phi delta (or --sweep)");
      return amp_single(amp_K, amp_phi, amp_delta);
    }
    if (*verify) return cmd_verify(v_file, v_builtin, bargs, seed, v_json, v_dump);
    if (*bound) return cmd_bound(b_file, b_builtin, b_m, b_trials, b_eps, seed, b_json);
    if (*sweep) return cmd_sweep(s_what, s_K, s_phi, s_delta, s_lambda, s_count, seed, s_csv);
    if (*arith) return cmd_arith(a_prompt, a_csv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
