#include "cli.hpp"

#include "wcga/analysis.hpp"
#include "wcga/errors.hpp"
#include "wcga/experiments.hpp"
#include "wcga/serialization.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace wcga {

namespace {

using nlohmann::json;

/// Bad user input; mapped to exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DictArgs {
  std::string type = "trig";
  int d = 1;
  int n = 64;
  double p = 2.0;
  int N = 3;
  int J = 2;
  int columns = 16;
  std::uint64_t seed = 0;

  void add(CLI::App& app) {
    app.add_option("--dict", type, "Dictionary type")->check(CLI::IsMember({"trig", "haar", "gaussian"}));
    app.add_option("--d", d, "Dimension")->check(CLI::PositiveNumber);
    app.add_option("--n", n, "Grid points per axis")->check(CLI::PositiveNumber);
    app.add_option("--p", p, "Exponent of L_p")->check(CLI::Range(1.0, 1e6));
    app.add_option("--N", N, "Trig maximal frequency")->check(CLI::NonNegativeNumber);
    app.add_option("--J", J, "Haar levels")->check(CLI::NonNegativeNumber);
    app.add_option("--columns", columns, "Gaussian dictionary size")->check(CLI::PositiveNumber);
    app.add_option("--dict-seed", seed, "Gaussian dictionary seed");
  }

  Dictionary build() const {
    DictionaryDescriptor desc{.type = type, .dim = d, .points_per_axis = n, .p = p};
    if (type == "trig") desc.max_freq = N;
    if (type == "haar") desc.levels = J;
    if (type == "gaussian") {
      desc.columns = columns;
      desc.seed = seed;
    }
    try {
      return build_from_descriptor(desc);
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("dictionary: ") + e.what());
    }
  }
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

// ---------------------------------------------------------------------------

struct ConstantsArgs {
  DictArgs dict;
  int K = 1;
  int D = 0;
  std::optional<double> r;
  std::string preset;
  std::vector<std::string> which{"C1", "U", "V", "delta"};
  std::uint64_t budget = 2'000'000;
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  int starts = 20;
  unsigned threads = 1;
  bool as_json = false;
};

double preset_r(const std::string& preset, const Dictionary& dict) {
  const double p = dict.p();
  const double p_conj = p > 1.0 ? p / (p - 1.0) : std::numeric_limits<double>::infinity();
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) throw InputError("preset " + preset + " requires " + what);
  };
  if (preset == "orthonormal-r") {
    need(dict.orthogonal_type(), "an orthogonal dictionary");
    return 0.5;
  }
  if (preset == "ex1") {
    need(dict.orthogonal_type() && p >= 2.0, "an orthogonal dictionary and p >= 2");
    return 0.5;
  }
  if (preset == "ex1q") {
    need(dict.orthogonal_type() && p > 1.0 && p <= 2.0, "an orthogonal dictionary and 1 < p <= 2");
    return 1.0 - 1.0 / p_conj;
  }
  if (preset == "ex4") {
    need(dict.descriptor() && dict.descriptor()->type == "haar" && p >= 2.0, "--dict haar and p >= 2");
    return 1.0 / p_conj;
  }
  if (preset == "ex4q") {
    need(dict.descriptor() && dict.descriptor()->type == "haar" && dict.grid().dim() == 1 && p > 1.0 && p <= 2.0,
         "--dict haar, d = 1 and 1 < p <= 2");
    return 1.0 / p_conj;
  }
  if (preset == "ex5") {
    need(p >= 2.0, "p >= 2");
    return 1.0;
  }
  if (preset == "ex5q") {
    need(p > 1.0 && p <= 2.0, "1 < p <= 2");
    return 1.0;
  }
  throw InputError("unknown preset " + preset);
}

int run_constants(const ConstantsArgs& a, std::ostream& out) {
  const Dictionary dict = a.dict.build();
  double r = 0.5;
  if (!a.preset.empty()) r = preset_r(a.preset, dict);
  if (a.r) r = *a.r;
  const int D = a.D > 0 ? a.D : static_cast<int>(dict.size());
  if (a.K < 1 || a.K > static_cast<int>(dict.size())) throw InputError("--K must lie in [1, |dictionary|]");
  if (D < a.K) throw InputError("--D must be at least --K");

  EstimateOptions opts;
  opts.budget = a.budget;
  opts.samples = a.samples;
  opts.seed = a.seed;
  opts.starts = a.starts;
  opts.threads = a.threads;

  std::vector<ConditionEstimate> estimates;
  for (const auto& w : a.which) {
    if (w == "C1") {
      estimates.push_back(estimate_nikolskii(dict, a.K, r, dict.p(), opts));
    } else if (w == "U") {
      estimates.push_back(estimate_unconditionality(dict, a.K, D, dict.p(), opts));
    } else if (w == "V") {
      estimates.push_back(estimate_a3(dict, a.K, D, r, dict.p(), opts));
    } else if (w == "delta") {
      estimates.push_back(rip_delta(dict, std::min<int>(D, static_cast<int>(dict.size())), opts));
    } else {
      throw InputError("--which: unknown constant " + w);
    }
  }

  if (a.as_json) {
    json list = json::array();
    for (const auto& e : estimates) {
      json j;
      to_json(j, e);
      list.push_back(j);
    }
    DictionaryDescriptor desc = *dict.descriptor();
    json dj;
    to_json(dj, desc);
    out << json{{"schema_version", kSchemaVersion}, {"kind", "constants"}, {"dictionary", dj}, {"estimates", list}}
               .dump(2)
        << "\n";
    return 0;
  }
  out << "dictionary " << a.dict.type << " (" << dict.size() << " elements), p = " << fmt(dict.p())
      << ", K = " << a.K << ", D = " << D << ", r = " << fmt(r) << "\n";
  for (const auto& e : estimates) {
    out << to_string(e.kind) << " = " << fmt(e.value) << " (" << (e.exact ? "exact" : "lower bound") << ", "
        << e.method << ", " << e.candidates << " candidates)\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct SigmaArgs {
  DictArgs dict;
  TargetSpec target;
  std::uint64_t seed = 0;
  int m_max = 3;
  std::uint64_t combo_cap = 2'000'000;
  bool capped = false;
  std::size_t beam = 64;
  bool as_json = false;
};

int run_sigma(const SigmaArgs& a, std::ostream& out) {
  const Dictionary dict = a.dict.build();
  if (a.target.kind == "sparse" && a.target.K > static_cast<int>(dict.size())) {
    throw InputError("--K exceeds the dictionary size");
  }
  auto rng = trial_rng(a.seed, 0);
  const Target target = make_target(dict, a.target, dict.p(), rng);
  SigmaOptions opts;
  opts.combo_cap = a.combo_cap;
  opts.capped = a.capped;
  opts.beam_width = a.beam;
  const SigmaTable table = sigma_m_oracle(target.f0, dict, std::min<int>(a.m_max, static_cast<int>(dict.size())),
                                          dict.p(), opts);
  if (a.as_json) {
    json j;
    to_json(j, table);
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "sigma";
    j["target"] = {{"support", target.clean.support}, {"coefficients", target.clean.coefficients}, {"eps", target.eps}};
    out << j.dump(2) << "\n";
  } else {
    out << sigma_table_csv(table);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string file;
  std::string theorem;
  std::optional<int> K;
  std::optional<double> r;
  std::optional<double> V;
  std::optional<double> eps;
  std::optional<double> t;
  std::optional<double> A;
  std::optional<double> C;
  double slack = 1e-6;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
  try {
    require_schema_version(doc);
  } catch (const std::runtime_error& e) {
    throw InputError(path + ": " + e.what());
  }
  return doc;
}

template <class T>
T pick(const std::optional<T>& override, const json& meta, const char* key, const char* flag) {
  if (override) return *override;
  if (meta.contains(key) && !meta.at(key).is_null()) return meta.at(key).get<T>();
  throw InputError(std::string("trace carries no ") + key + "; pass " + flag);
}

int run_verify(const VerifyArgs& a, std::ostream& out) {
  const json doc = read_json(a.file);
  std::vector<std::pair<json, json>> items;  // (trace, meta)
  if (doc.contains("traces")) {
    for (const auto& e : doc.at("traces")) items.emplace_back(e.at("trace"), e.value("meta", json::object()));
  } else if (doc.contains("trace")) {
    items.emplace_back(doc.at("trace"), doc.value("meta", json::object()));
  } else {
    throw InputError(a.file + ": expected a 'trace' or 'traces' field");
  }
  if (items.empty()) throw InputError(a.file + ": no traces");

  bool all_pass = true;
  for (std::size_t i = 0; i < items.size(); ++i) {
    GreedyTrace trace;
    try {
      trace = items[i].first.get<GreedyTrace>();
    } catch (const std::exception& e) {
      throw InputError(a.file + ": trace " + std::to_string(i) + ": " + e.what());
    }
    const json& meta = items[i].second;
    const SmoothnessParams params = smoothness_params(trace.config.p);
    const double t = a.t ? *a.t : meta.value("t", trace.config.t);
    const double eps = pick(a.eps, meta, "eps", "--eps");
    std::ostringstream label;
    label << "trace " << i;
    if (meta.contains("noise")) label << " (eps/|f| " << fmt(meta["noise"].get<double>()) << ", t " << fmt(t) << ")";

    if (a.theorem == "2.3" || a.theorem == "decay") {
      const int K = pick(a.K, meta, "K", "--K");
      const double r = pick(a.r, meta, "r", "--r");
      const double V = pick(a.V, meta, "V", "--V");
      DecayBoundReport rep;
      try {
        rep = verify_decay_bound(trace, K, r, V, eps, params, t, a.slack);
      } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
      }
      all_pass = all_pass && rep.pass;
      out << label.str() << ": " << (rep.pass ? "PASS" : "FAIL") << " (min slack " << fmt(rep.min_slack) << ", "
          << rep.pairs_checked << " pairs";
      if (!rep.pass) out << ", " << rep.violations << " violations, worst k=" << rep.worst_k << " m=" << rep.worst_m;
      out << ")\n";
    } else {
      const double A = pick(a.A, meta, "A_eps", "--A");
      const RateBoundReport rep = verify_rate_bound(trace, A, eps, params, t);
      const bool pass = !a.C || rep.constant <= *a.C;
      all_pass = all_pass && pass;
      out << label.str() << ": " << (a.C ? (pass ? "PASS " : "FAIL ") : "") << "(C = " << fmt(rep.constant)
          << ", binding m = " << rep.binding_m << ", " << rep.rows_constrained << " rows)\n";
    }
  }
  return all_pass ? 0 : 2;
}

// ---------------------------------------------------------------------------

std::string summary_line(const ExperimentReport& rep) {
  const auto& s = rep.summary;
  std::ostringstream line;
  line << rep.config.name << ": " << rep.rows.size() << " rows";
  if (s.value("failed_trials", 0) > 0) line << ", " << s["failed_trials"] << " failed trials";
  if (rep.config.experiment == "lebesgue") {
    line << ", median ratio " << s["median_ratio"].dump() << ", max ratio " << s["max_ratio"].dump();
  } else if (rep.config.experiment == "phase") {
    line << ", success rates " << s["success_rate"].dump();
  } else if (rep.config.experiment == "tga_compare") {
    line << ", TGA growth exponent " << s["tga_growth_exponent"].dump();
  } else if (rep.config.experiment == "decay") {
    line << ", " << s["traces_passed"] << "/" << s["traces_checked"] << " traces within the decay bound";
  } else if (rep.config.experiment == "rate") {
    line << ", median slopes";
    for (const auto& e : s["per_t"]) line << " t=" << e["t"].dump() << ": " << e["median_slope"].dump();
  }
  return line.str();
}

int finish_report(const ExperimentReport& rep, const std::string& dir, std::ostream& out, std::ostream& err) {
  for (const auto& p : write_report(rep, dir)) out << "wrote " << p.string() << "\n";
  out << summary_line(rep) << "\n";
  if (rep.summary.value("failed_trials", 0) > 0) {
    for (const auto& e : rep.summary["errors"]) {
      err << rep.config.name << " trial " << e["trial"] << ": " << e["message"].get<std::string>() << "\n";
    }
    return 2;
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weak Chebyshev Greedy Algorithm toolkit", "wcga"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string config_path, out_dir = ".";
  std::optional<unsigned> threads;
  auto* run = app.add_subcommand("run", "Run an experiment config and write CSV/JSON reports");
  run->add_option("config", config_path, "TOML experiment config")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--threads", threads, "Worker threads for trials (0: all cores)");

  ConstantsArgs ca;
  auto* constants = app.add_subcommand("constants", "Estimate C1, U, V and the RIP constant of a dictionary");
  ca.dict.add(*constants);
  constants->add_option("--K", ca.K, "Sparsity K");
  constants->add_option("--D", ca.D, "Depth D (default: dictionary size)");
  constants->add_option("--r", ca.r, "Exponent r (overrides the preset)");
  constants->add_option("--preset", ca.preset, "Named preset for r")
      ->check(CLI::IsMember({"orthonormal-r", "ex1", "ex1q", "ex4", "ex4q", "ex5", "ex5q"}));
  constants->add_option("--which", ca.which, "Constants to compute")->delimiter(',');
  constants->add_option("--budget", ca.budget, "Largest exhaustive candidate count");
  constants->add_option("--samples", ca.samples, "Sampled candidates beyond the budget");
  constants->add_option("--seed", ca.seed, "Sampling seed");
  constants->add_option("--starts", ca.starts, "Local-ascent starts for U when p != 2");
  constants->add_option("--threads", ca.threads, "Worker threads (0: all cores)");
  constants->add_flag("--json", ca.as_json, "Print JSON");

  SigmaArgs sa;
  auto* sigma = app.add_subcommand("sigma", "Best m-term errors of a random target");
  sa.dict.add(*sigma);
  sigma->add_option("--kind", sa.target.kind, "Target kind")
      ->check(CLI::IsMember({"sparse", "dense", "adversarial"}));
  sigma->add_option("--K", sa.target.K, "Target sparsity")->check(CLI::PositiveNumber);
  sigma->add_option("--law", sa.target.law, "Coefficient law")
      ->check(CLI::IsMember({"gaussian", "rademacher", "power"}));
  sigma->add_option("--alpha", sa.target.alpha, "Power-law exponent");
  sigma->add_option("--noise", sa.target.noise, "Noise norm relative to the target")->check(CLI::NonNegativeNumber);
  sigma->add_option("--seed", sa.seed, "Target seed");
  sigma->add_option("--m-max", sa.m_max, "Largest m")->check(CLI::NonNegativeNumber);
  sigma->add_option("--combo-cap", sa.combo_cap, "Exhaustive support cap");
  sigma->add_flag("--capped", sa.capped, "Beam search instead of enumeration");
  sigma->add_option("--beam", sa.beam, "Beam width")->check(CLI::PositiveNumber);
  sigma->add_flag("--json", sa.as_json, "Print JSON instead of CSV");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Check traces against the sparse decay bound or the rate bound");
  verify->add_option("traces", va.file, "Trace JSON file")->required();
  verify->add_option("--theorem", va.theorem, "Bound to check: 2.3 (alias decay) or 5.1 (alias rate)")
      ->required()
      ->check(CLI::IsMember({"2.3", "5.1", "decay", "rate"}));
  verify->add_option("--K", va.K, "Sparsity K");
  verify->add_option("--r", va.r, "Exponent r");
  verify->add_option("--V", va.V, "A3 constant V");
  verify->add_option("--eps", va.eps, "Noise level eps");
  verify->add_option("--t", va.t, "Weakness parameter");
  verify->add_option("--A", va.A, "A(eps), the l1 norm of the sparse part");
  verify->add_option("--C", va.C, "Pass threshold for the fitted rate constant");
  verify->add_option("--slack", va.slack, "Relative slack for the decay bound");

  std::string demo_dir = "demo_out";
  auto* demo = app.add_subcommand("demo", "Run the built-in seeded showcase");
  demo->add_option("--out", demo_dir, "Output directory");
  demo->add_option("--threads", threads, "Worker threads for trials (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      ExperimentConfig cfg = load_config(config_path);
      if (threads) cfg.threads = *threads;
      return finish_report(run_experiment(cfg), out_dir, out, err);
    }
    if (*constants) return run_constants(ca, out);
    if (*sigma) return run_sigma(sa, out);
    if (*verify) return run_verify(va, out);
    if (*demo) {
      int code = 0;
      for (auto cfg : demo_configs()) {
        if (threads) cfg.threads = *threads;
        code = std::max(code, finish_report(run_experiment(cfg), demo_dir, out, err));
      }
      return code;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace wcga
