#include "wcga/experiments.hpp"

#include "parallel.hpp"
#include "wcga/errors.hpp"
#include "wcga/serialization.hpp"

#include <toml++/toml.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace wcga {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// TOML reading

std::string join_key(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

class Section {
 public:
  Section(const toml::table* table, std::string prefix) : table_(table), prefix_(std::move(prefix)) {}

  bool has(const char* key) const { return table_ && table_->contains(key); }

  void get(const char* key, std::string& out) {
    if (auto* node = find(key)) {
      auto v = node->value<std::string>();
      if (!v) fail(key, "expected a string");
      out = *v;
    }
  }

  void get(const char* key, bool& out) {
    if (auto* node = find(key)) {
      auto v = node->value<bool>();
      if (!v || !node->is_boolean()) fail(key, "expected a boolean");
      out = *v;
    }
  }

  void get(const char* key, double& out) {
    if (auto* node = find(key)) out = number(key, *node);
  }

  void get(const char* key, int& out) {
    if (auto* node = find(key)) out = static_cast<int>(integer(key, *node, std::numeric_limits<int>::min(),
                                                               std::numeric_limits<int>::max()));
  }

  void get(const char* key, unsigned& out) {
    if (auto* node = find(key)) {
      out = static_cast<unsigned>(integer(key, *node, 0, std::numeric_limits<unsigned>::max()));
    }
  }

  void get(const char* key, std::uint64_t& out) {
    if (auto* node = find(key)) {
      out = static_cast<std::uint64_t>(integer(key, *node, 0, std::numeric_limits<std::int64_t>::max()));
    }
  }

  /// Accepts a single number or an array of numbers.
  void get(const char* key, std::vector<double>& out) {
    if (auto* node = find(key)) {
      out.clear();
      if (auto* arr = node->as_array()) {
        for (const auto& el : *arr) out.push_back(number(key, el));
      } else {
        out.push_back(number(key, *node));
      }
      if (out.empty()) fail(key, "must not be empty");
    }
  }

  void get(const char* key, std::vector<int>& out) {
    if (auto* node = find(key)) {
      out.clear();
      if (auto* arr = node->as_array()) {
        for (const auto& el : *arr) {
          out.push_back(static_cast<int>(integer(key, el, std::numeric_limits<int>::min(),
                                                 std::numeric_limits<int>::max())));
        }
      } else {
        out.push_back(static_cast<int>(integer(key, *node, std::numeric_limits<int>::min(),
                                               std::numeric_limits<int>::max())));
      }
      if (out.empty()) fail(key, "must not be empty");
    }
  }

  Section sub(const char* key) {
    if (!table_ || !table_->contains(key)) return Section(nullptr, join_key(prefix_, key));
    seen_.insert(key);
    const auto* t = table_->get(key)->as_table();
    if (!t) fail(key, "expected a table");
    return Section(t, join_key(prefix_, key));
  }

  void finish() const {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      const std::string name(k.str());
      if (!seen_.contains(name)) throw ConfigError(join_key(prefix_, name), "unknown key");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw ConfigError(join_key(prefix_, key), message);
  }

 private:
  const toml::node* find(const char* key) {
    if (!table_) return nullptr;
    const toml::node* node = table_->get(key);
    if (node) seen_.insert(key);
    return node;
  }

  double number(const std::string& key, const toml::node& node) const {
    if (node.is_floating_point()) return *node.value<double>();
    if (node.is_integer()) return static_cast<double>(*node.value<std::int64_t>());
    fail(key, "expected a number");
  }

  std::int64_t integer(const std::string& key, const toml::node& node, std::int64_t lo,
                       std::uint64_t hi) const {
    if (!node.is_integer()) fail(key, "expected an integer");
    const std::int64_t v = *node.value<std::int64_t>();
    if (v < lo || (v > 0 && static_cast<std::uint64_t>(v) > hi)) fail(key, "integer out of range");
    return v;
  }

  const toml::table* table_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  return std::any_of(options.begin(), options.end(), [&](const char* o) { return v == o; });
}

void validate(const ExperimentConfig& c) {
  require(one_of(c.experiment, {"lebesgue", "phase", "tga_compare", "decay", "rate"}), "experiment",
          "expected lebesgue, phase, tga_compare, decay or rate");
  require(!c.name.empty() && c.name.find_first_of("/\\ \t\n") == std::string::npos, "name",
          "must be a nonempty file stem without separators or spaces");
  require(c.trials >= 1, "trials", "must be at least 1");

  const auto& d = c.dictionary;
  require(one_of(d.type, {"trig", "haar", "gaussian"}), "dictionary.type", "expected trig, haar or gaussian");
  require(d.dim >= 1, "dictionary.d", "must be at least 1");
  require(d.points_per_axis >= 1, "dictionary.n", "must be at least 1");
  require(d.p > 1.0 && std::isfinite(d.p), "dictionary.p", "must lie in (1, inf)");
  if (d.type == "trig") require(d.max_freq >= 0, "dictionary.N", "must be nonnegative");
  if (d.type == "haar") require(d.levels >= 0, "dictionary.J", "must be nonnegative");
  if (d.type == "gaussian") require(d.columns >= 1, "dictionary.columns", "must be at least 1");

  const auto& a = c.algorithm;
  require(one_of(a.name, {"wcga", "womp", "tga"}), "algorithm.name", "expected wcga, womp or tga");
  require(a.t > 0.0 && a.t <= 1.0, "algorithm.t", "must lie in (0, 1]");
  require(a.opt_tol_rel > 0.0, "algorithm.opt_tol", "must be positive");
  require(a.stop_tol_rel >= 0.0, "algorithm.stop_tol", "must be nonnegative");
  require(a.max_inner_iter >= 1, "algorithm.max_inner_iter", "must be at least 1");
  require(a.max_iter >= 0, "algorithm.max_iter", "must be nonnegative");
  for (double b : a.budget_c) require(b > 0.0, "algorithm.budget_c", "entries must be positive");
  if (a.name == "womp") require(d.p == 2.0, "algorithm.name", "womp requires dictionary.p = 2");
  if (a.name == "tga") require(c.experiment == "lebesgue" || c.experiment == "tga_compare", "algorithm.name",
                               "tga is only available for lebesgue and tga_compare");

  const auto& t = c.target;
  require(one_of(t.kind, {"sparse", "dense", "adversarial"}), "target.kind",
          "expected sparse, dense or adversarial");
  require(one_of(t.law, {"gaussian", "rademacher", "power"}), "target.law",
          "expected gaussian, rademacher or power");
  require(t.K >= 1, "target.K", "must be at least 1");
  require(t.alpha >= 0.0, "target.alpha", "must be nonnegative");
  require(t.small >= 0.0, "target.small", "must be nonnegative");
  require(t.noise >= 0.0, "target.noise", "must be nonnegative");

  require(c.oracle.m_max >= 0, "oracle.m_max", "must be nonnegative");
  require(c.oracle.beam_width >= 1, "oracle.beam", "must be at least 1");
  for (int m : c.m_values) require(m >= 0, "m", "entries must be nonnegative");
  require(c.phi_constant >= 1.0, "phi_constant", "must be at least 1");

  for (int k : c.phase.sparsities) require(k >= 1, "phase.K", "entries must be at least 1");
  for (double b : c.phase.budget_factors) require(b > 0.0, "phase.budget_factors", "entries must be positive");
  require(c.phase.success_tol > 0.0, "phase.success_tol", "must be positive");

  require(c.decay.r > 0.0, "decay.r", "must be positive");
  require(c.decay.D >= 0, "decay.D", "must be nonnegative");
  for (double e : c.decay.noise_levels) require(e >= 0.0, "decay.noise", "entries must be nonnegative");
  for (double v : c.decay.t_values) require(v > 0.0 && v <= 1.0, "decay.t", "entries must lie in (0, 1]");

  require(c.rate.fit_lo >= 1 && c.rate.fit_hi > c.rate.fit_lo, "rate.fit_range",
          "expected [lo, hi] with 1 <= lo < hi");
  for (double v : c.rate.t_values) require(v > 0.0 && v <= 1.0, "rate.t", "entries must lie in (0, 1]");

  Dictionary dict = [&] {
    try {
      return build_from_descriptor(d);
    } catch (const std::exception& e) {
      throw ConfigError("dictionary", e.what());
    }
  }();
  const auto size = static_cast<int>(dict.size());
  if (c.experiment != "phase" && t.kind != "dense") {
    require(t.K <= size, "target.K", "exceeds the dictionary size " + std::to_string(size));
  }
  if (c.experiment == "phase") {
    for (int k : c.phase.sparsities) {
      require(k <= size, "phase.K", "entry exceeds the dictionary size " + std::to_string(size));
    }
  }
  if (c.experiment == "tga_compare" || a.name == "tga") {
    require(dict.orthogonal_type(), "dictionary.type", "tga needs an orthogonal basis (trig or haar)");
  }
}

json descriptor_json(const DictionaryDescriptor& d) {
  json j;
  to_json(j, d);
  return j;
}

// ---------------------------------------------------------------------------
// Targets

double draw_law(const std::string& law, std::size_t rank, double alpha, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  if (law == "gaussian") return std::normal_distribution<double>(0.0, 1.0)(rng);
  const double sign = coin(rng) ? 1.0 : -1.0;
  if (law == "rademacher") return sign;
  return sign * std::pow(static_cast<double>(rank + 1), -alpha);
}

std::vector<std::size_t> random_permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Fisher-Yates with uniform_int_distribution so the sequence does not
  // depend on the standard library's shuffle implementation.
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(idx[i - 1], idx[pick(rng)]);
  }
  return idx;
}

SparseElement draw_coefficients(const Dictionary& dict, const TargetSpec& spec, std::mt19937_64& rng) {
  const std::size_t n = dict.size();
  auto order = random_permutation(n, rng);
  std::vector<std::size_t> support;
  std::vector<double> coef;
  if (spec.kind == "sparse") {
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(spec.K), n);
    for (std::size_t j = 0; j < k; ++j) {
      support.push_back(order[j]);
      double c = 0.0;
      while (c == 0.0) c = draw_law(spec.law, j, spec.alpha, rng);
      coef.push_back(c);
    }
  } else if (spec.kind == "dense") {
    for (std::size_t j = 0; j < n; ++j) {
      support.push_back(order[j]);
      coef.push_back(draw_law(spec.law, j, spec.alpha, rng));
    }
  } else {  // adversarial: K large coefficients, the rest small
    std::bernoulli_distribution coin(0.5);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(spec.K), n);
    for (std::size_t j = 0; j < n; ++j) {
      support.push_back(order[j]);
      const double sign = coin(rng) ? 1.0 : -1.0;
      coef.push_back(sign * (j < k ? 1.0 : spec.small));
    }
  }
  // Canonical order keeps the element reproducible regardless of draw order.
  std::vector<std::size_t> perm(support.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::sort(perm.begin(), perm.end(), [&](auto a, auto b) { return support[a] < support[b]; });
  std::vector<std::size_t> s;
  std::vector<double> c;
  for (auto i : perm) {
    s.push_back(support[i]);
    c.push_back(coef[i]);
  }
  return SparseElement(std::move(s), std::move(c));
}

/// Gaussian direction with unit L_p norm.
Eigen::VectorXd draw_noise_direction(const Grid& grid, double p, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  return v / lp_norm(v, grid.weight(), p);
}

Target assemble_target(const Dictionary& dict, SparseElement clean, const Eigen::VectorXd& noise_dir,
                       double noise_rel, double p) {
  Target out;
  SampledFunction f = clean.synthesize(dict);
  const double fn = lp_norm(f, p);
  out.eps = noise_rel * fn;
  Eigen::VectorXd values = f.values();
  if (out.eps > 0.0) values += out.eps * noise_dir;
  out.f0 = SampledFunction(dict.grid_ptr(), std::move(values));
  if (out.eps > 0.0) out.eps = lp_norm(out.f0 - f, p);
  out.clean = std::move(clean);
  return out;
}

// ---------------------------------------------------------------------------
// Running algorithms

GreedyConfig greedy_config(const AlgorithmSpec& a, double p, double t, double f0_norm, int max_iter,
                           std::mt19937_64& rng) {
  GreedyConfig cfg;
  cfg.t = t;
  cfg.p = p;
  cfg.max_iter = std::max(max_iter, 1);
  cfg.stop_tol = a.stop_tol_rel * f0_norm;
  cfg.opt_tol = a.opt_tol_rel * f0_norm;
  cfg.max_inner_iter = a.max_inner_iter;
  const std::uint64_t weak_seed = rng();
  if (a.weak_random && t < 1.0) cfg.weak_seed = weak_seed;
  return cfg;
}

GreedyTrace run_algorithm(const std::string& name, const SampledFunction& f0, const Dictionary& dict,
                          const GreedyConfig& cfg) {
  if (name == "tga") return tga_run(f0, dict, std::min<int>(cfg.max_iter, static_cast<int>(dict.size())), cfg.p);
  if (name == "womp") return womp_run(f0, dict, cfg);
  return wcga_run(f0, dict, cfg);
}

int budget(double c, int m) {
  if (m == 0) return 0;
  return static_cast<int>(std::ceil(c * m * std::log(m + 1.0) - 1e-12));
}

std::vector<int> m_range(const ExperimentConfig& c) {
  if (!c.m_values.empty()) return c.m_values;
  std::vector<int> ms;
  for (int m = 1; m <= c.oracle.m_max; ++m) ms.push_back(m);
  return ms;
}

SigmaTable sigma_table(const ExperimentConfig& c, const SampledFunction& f0, const Dictionary& dict, int m_max) {
  SigmaOptions opts;
  opts.combo_cap = c.oracle.combo_cap;
  opts.capped = c.oracle.capped;
  opts.beam_width = c.oracle.beam_width;
  const double fn = lp_norm(f0, dict.p());
  opts.projection.opt_tol = 1e-11 * fn;
  opts.projection.residual_atol = 1e-14 * fn;
  opts.projection.max_inner_iter = 400;
  return sigma_m_oracle(f0, dict, m_max, dict.p(), opts);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double max_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return *std::max_element(v.begin(), v.end());
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string trim_number(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

/// Per-trial output collected before the ordered reduction.
struct TrialOutput {
  std::vector<ReportRow> rows;
  std::vector<TraceRecord> traces;
  json extra = json::object();
  std::string error;
};

template <class Fn>
std::vector<TrialOutput> run_trials(const ExperimentConfig& c, Fn&& fn) {
  const auto n = static_cast<std::size_t>(c.trials);
  std::vector<TrialOutput> out(n);
  detail::for_each_chunk(n, c.threads, n, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        fn(static_cast<int>(i), out[i]);
      } catch (const std::exception& e) {
        out[i].rows.clear();
        out[i].traces.clear();
        out[i].error = e.what();
      }
    }
  });
  return out;
}

ExperimentReport assemble(const ExperimentConfig& c, std::vector<TrialOutput>& trials) {
  ExperimentReport report;
  report.config = c;
  json errors = json::array();
  for (std::size_t i = 0; i < trials.size(); ++i) {
    auto& t = trials[i];
    if (!t.error.empty()) errors.push_back({{"trial", i}, {"message", t.error}});
    for (auto& r : t.rows) report.rows.push_back(std::move(r));
    for (auto& tr : t.traces) report.traces.push_back(std::move(tr));
  }
  report.summary = json::object();
  report.summary["trials"] = c.trials;
  report.summary["failed_trials"] = errors.size();
  report.summary["errors"] = errors;
  return report;
}

std::string with_flags(std::string base, bool sigma_zero, bool capped) {
  if (sigma_zero) base += "+sigma_zero";
  if (capped) base += "+capped";
  return base;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

ExperimentConfig parse_config(std::string_view toml_text) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << e.description() << " at line " << e.source().begin.line;
    throw ConfigError("<toml>", msg.str());
  }

  ExperimentConfig c;
  Section top(&root, "");
  top.get("experiment", c.experiment);
  top.get("name", c.name);
  top.get("seed", c.seed);
  top.get("trials", c.trials);
  top.get("threads", c.threads);
  top.get("m", c.m_values);
  top.get("phi_constant", c.phi_constant);
  top.get("traces", c.write_traces);

  {
    auto s = top.sub("dictionary");
    if (!s.has("type")) s.fail("type", "missing required key");
    s.get("type", c.dictionary.type);
    s.get("d", c.dictionary.dim);
    s.get("n", c.dictionary.points_per_axis);
    s.get("p", c.dictionary.p);
    s.get("N", c.dictionary.max_freq);
    s.get("J", c.dictionary.levels);
    s.get("columns", c.dictionary.columns);
    s.get("seed", c.dictionary.seed);
    if (c.dictionary.type == "trig" && !s.has("N")) s.fail("N", "missing required key for trig");
    if (c.dictionary.type == "haar" && !s.has("J")) s.fail("J", "missing required key for haar");
    if (c.dictionary.type == "gaussian" && !s.has("columns")) {
      s.fail("columns", "missing required key for gaussian");
    }
    s.finish();
  }
  {
    auto s = top.sub("algorithm");
    s.get("name", c.algorithm.name);
    s.get("t", c.algorithm.t);
    s.get("opt_tol", c.algorithm.opt_tol_rel);
    s.get("stop_tol", c.algorithm.stop_tol_rel);
    s.get("max_inner_iter", c.algorithm.max_inner_iter);
    s.get("max_iter", c.algorithm.max_iter);
    s.get("budget_c", c.algorithm.budget_c);
    s.get("weak_random", c.algorithm.weak_random);
    s.finish();
  }
  {
    auto s = top.sub("target");
    s.get("kind", c.target.kind);
    s.get("K", c.target.K);
    s.get("law", c.target.law);
    s.get("alpha", c.target.alpha);
    s.get("small", c.target.small);
    s.get("noise", c.target.noise);
    s.finish();
  }
  {
    auto s = top.sub("oracle");
    s.get("m_max", c.oracle.m_max);
    s.get("combo_cap", c.oracle.combo_cap);
    std::string mode = c.oracle.capped ? "capped" : "exhaustive";
    s.get("mode", mode);
    if (mode != "exhaustive" && mode != "capped") s.fail("mode", "expected exhaustive or capped");
    c.oracle.capped = mode == "capped";
    std::uint64_t beam = c.oracle.beam_width;
    s.get("beam", beam);
    c.oracle.beam_width = static_cast<std::size_t>(beam);
    s.finish();
  }
  {
    auto s = top.sub("phase");
    s.get("K", c.phase.sparsities);
    s.get("budget_factors", c.phase.budget_factors);
    s.get("success_tol", c.phase.success_tol);
    s.finish();
  }
  {
    auto s = top.sub("decay");
    s.get("r", c.decay.r);
    s.get("D", c.decay.D);
    s.get("noise", c.decay.noise_levels);
    s.get("t", c.decay.t_values);
    s.finish();
  }
  {
    auto s = top.sub("rate");
    std::vector<int> range{c.rate.fit_lo, c.rate.fit_hi};
    s.get("fit_range", range);
    if (range.size() != 2) s.fail("fit_range", "expected [lo, hi]");
    c.rate.fit_lo = range[0];
    c.rate.fit_hi = range[1];
    s.get("t", c.rate.t_values);
    s.finish();
  }
  top.finish();
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

json config_to_json(const ExperimentConfig& c) {
  const auto& a = c.algorithm;
  const auto& t = c.target;
  return json{
      {"experiment", c.experiment},
      {"name", c.name},
      {"seed", c.seed},
      {"trials", c.trials},
      {"m", m_range(c)},
      {"phi_constant", c.phi_constant},
      {"dictionary", descriptor_json(c.dictionary)},
      {"algorithm",
       {{"name", a.name},
        {"t", a.t},
        {"opt_tol", a.opt_tol_rel},
        {"stop_tol", a.stop_tol_rel},
        {"max_inner_iter", a.max_inner_iter},
        {"max_iter", a.max_iter},
        {"budget_c", a.budget_c},
        {"weak_random", a.weak_random}}},
      {"target",
       {{"kind", t.kind}, {"K", t.K}, {"law", t.law}, {"alpha", t.alpha}, {"small", t.small}, {"noise", t.noise}}},
      {"oracle",
       {{"m_max", c.oracle.m_max},
        {"combo_cap", c.oracle.combo_cap},
        {"mode", c.oracle.capped ? "capped" : "exhaustive"},
        {"beam", c.oracle.beam_width}}},
      {"phase",
       {{"K", c.phase.sparsities}, {"budget_factors", c.phase.budget_factors}, {"success_tol", c.phase.success_tol}}},
      {"decay", {{"r", c.decay.r}, {"D", c.decay.D}, {"noise", c.decay.noise_levels}, {"t", c.decay.t_values}}},
      {"rate", {{"fit_range", {c.rate.fit_lo, c.rate.fit_hi}}, {"t", c.rate.t_values}}},
  };
}

// ---------------------------------------------------------------------------
// Targets and RNG

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

Target make_target(const Dictionary& dict, const TargetSpec& spec, double p, std::mt19937_64& rng) {
  SparseElement clean = draw_coefficients(dict, spec, rng);
  const Eigen::VectorXd dir = draw_noise_direction(dict.grid(), p, rng);
  return assemble_target(dict, std::move(clean), dir, spec.noise, p);
}

// ---------------------------------------------------------------------------
// Experiments

ExperimentReport run_lebesgue(const ExperimentConfig& c) {
  validate(c);
  const Dictionary dict = build_from_descriptor(c.dictionary);
  const double p = dict.p();
  const auto ms = m_range(c);
  const int m_max = ms.empty() ? 0 : *std::max_element(ms.begin(), ms.end());

  int iters = c.algorithm.max_iter;
  if (iters == 0) {
    for (int m : ms) {
      iters = std::max(iters, m);
      for (double b : c.algorithm.budget_c) iters = std::max(iters, budget(b, m));
      iters = std::max(iters, static_cast<int>(std::ceil(8.0 * m)));
    }
  }

  auto trials = run_trials(c, [&](int trial, TrialOutput& out) {
    auto rng = trial_rng(c.seed, static_cast<std::uint64_t>(trial));
    const Target target = make_target(dict, c.target, p, rng);
    const double fn = lp_norm(target.f0, p);
    const auto cfg = greedy_config(c.algorithm, p, c.algorithm.t, fn, iters, rng);
    GreedyTrace trace = run_algorithm(c.algorithm.name, target.f0, dict, cfg);
    const SigmaTable sigma = sigma_table(c, target.f0, dict, m_max);
    const bool capped = sigma.method == "capped";
    const double atol = 1e-9 * fn;

    json phi = json::array();
    for (int m : ms) {
      const double s = sigma.values[static_cast<std::size_t>(m)];
      const bool zero = s <= atol;
      auto row = [&](int mp, const std::string& kind) {
        const double res = trace.residual_after(static_cast<std::size_t>(mp));
        out.rows.push_back({trial, m, mp, res, s, zero ? res : res / s, with_flags(kind, zero, capped)});
      };
      row(m, "direct");
      for (double b : c.algorithm.budget_c) row(budget(b, m), "budget_c" + trim_number(b));

      // Smallest k reaching phi_constant * sigma_m (or atol when sigma_m vanishes).
      const double goal = zero ? atol : c.phi_constant * s;
      json k_hit = nullptr;
      for (std::size_t k = 0; k < trace.residual_norms.size(); ++k) {
        if (trace.residual_norms[k] <= goal) {
          k_hit = k;
          break;
        }
      }
      phi.push_back({{"m", m}, {"k", k_hit}});
    }
    out.extra["phi"] = phi;
    out.traces.push_back({trial, std::move(trace), json{{"eps", target.eps}, {"sigma", sigma.values}}});
  });

  ExperimentReport report = assemble(c, trials);
  json per_m = json::array();
  std::vector<double> phi_ms, phi_meds;
  for (int m : ms) {
    std::vector<double> direct, budgeted;
    json by_c = json::array();
    for (double b : c.algorithm.budget_c) {
      std::vector<double> r;
      const int mp = budget(b, m);
      for (const auto& row : report.rows) {
        if (row.m == m && row.flag.rfind("budget_c" + trim_number(b), 0) == 0 && row.m_prime == mp &&
            row.flag.find("sigma_zero") == std::string::npos) {
          r.push_back(row.ratio);
        }
      }
      by_c.push_back({{"c", b},
                      {"m_prime", mp},
                      {"count", r.size()},
                      {"median_ratio", number_or_null(median(r))},
                      {"max_ratio", number_or_null(max_of(r))}});
    }
    for (const auto& row : report.rows) {
      if (row.m == m && row.flag.rfind("direct", 0) == 0 && row.flag.find("sigma_zero") == std::string::npos) {
        direct.push_back(row.ratio);
      }
    }
    std::vector<double> phis;
    std::size_t unreached = 0;
    for (const auto& t : trials) {
      if (!t.error.empty()) continue;
      for (const auto& e : t.extra["phi"]) {
        if (e["m"].get<int>() != m) continue;
        if (e["k"].is_null()) {
          ++unreached;
        } else if (m > 0) {
          phis.push_back(e["k"].get<double>() / m);
        }
      }
    }
    const double phi_med = median(phis);
    if (m > 0 && std::isfinite(phi_med) && phi_med > 0.0) {
      phi_ms.push_back(m);
      phi_meds.push_back(phi_med);
    }
    per_m.push_back({{"m", m},
                     {"median_ratio_direct", number_or_null(median(direct))},
                     {"max_ratio_direct", number_or_null(max_of(direct))},
                     {"budget", by_c},
                     {"phi_median", number_or_null(phi_med)},
                     {"phi_max", number_or_null(max_of(phis))},
                     {"phi_unreached", unreached}});
  }
  std::vector<double> all;
  for (const auto& row : report.rows) {
    if (row.flag.rfind("budget", 0) == 0 && row.flag.find("sigma_zero") == std::string::npos) {
      all.push_back(row.ratio);
    }
  }
  report.summary["per_m"] = per_m;
  report.summary["median_ratio"] = number_or_null(median(all));
  report.summary["max_ratio"] = number_or_null(max_of(all));
  report.summary["phi_growth_exponent"] =
      phi_ms.size() >= 2 ? number_or_null(fit_loglog_slope(phi_ms, phi_meds)) : json(nullptr);
  report.summary["iterations"] = iters;
  return report;
}

ExperimentReport run_phase(const ExperimentConfig& c) {
  validate(c);
  const Dictionary dict = build_from_descriptor(c.dictionary);
  const double p = dict.p();
  const auto& ks = c.phase.sparsities;
  const auto& factors = c.phase.budget_factors;
  const double max_factor = *std::max_element(factors.begin(), factors.end());

  auto trials = run_trials(c, [&](int trial, TrialOutput& out) {
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const int K = ks[ki];
      auto rng = trial_rng(c.seed, static_cast<std::uint64_t>(trial), ki + 1);
      TargetSpec spec = c.target;
      spec.kind = "sparse";
      spec.K = K;
      spec.noise = 0.0;
      const Target target = make_target(dict, spec, p, rng);
      const double fn = lp_norm(target.f0, p);
      const int iters = c.algorithm.max_iter > 0 ? c.algorithm.max_iter
                                                 : static_cast<int>(std::ceil(max_factor * K - 1e-12));
      const auto cfg = greedy_config(c.algorithm, p, c.algorithm.t, fn, iters, rng);
      GreedyTrace trace = run_algorithm(c.algorithm.name, target.f0, dict, cfg);
      for (double b : factors) {
        const int mp = std::max(1, static_cast<int>(std::ceil(b * K - 1e-12)));
        const double res = trace.residual_after(static_cast<std::size_t>(mp));
        const bool ok = res <= c.phase.success_tol * fn;
        out.rows.push_back({trial, K, mp, res, 0.0, res / fn, ok ? "success" : "failure"});
      }
      out.traces.push_back({trial, std::move(trace), json{{"K", K}, {"eps", 0.0}}});
    }
  });

  ExperimentReport report = assemble(c, trials);
  json matrix = json::array();
  json monotone_violations = json::array();
  for (int K : ks) {
    json line = json::array();
    double prev_rate = -1.0;
    for (double b : factors) {
      const int mp = std::max(1, static_cast<int>(std::ceil(b * K - 1e-12)));
      std::size_t n = 0, ok = 0;
      for (const auto& row : report.rows) {
        if (row.m == K && row.m_prime == mp) {
          ++n;
          ok += row.flag == "success";
        }
      }
      const double rate = n ? static_cast<double>(ok) / static_cast<double>(n) : 0.0;
      // Allow two binomial standard deviations of sampling noise.
      const double noise = n ? 2.0 * std::sqrt(std::max(rate * (1 - rate), 0.25 / static_cast<double>(n)) /
                                               static_cast<double>(n))
                             : 0.0;
      if (prev_rate >= 0.0 && rate + noise < prev_rate) monotone_violations.push_back({{"K", K}, {"factor", b}});
      prev_rate = rate;
      line.push_back(rate);
    }
    matrix.push_back(line);
  }
  report.summary["K"] = ks;
  report.summary["budget_factors"] = factors;
  report.summary["success_rate"] = matrix;
  report.summary["monotone_violations"] = monotone_violations;
  return report;
}

ExperimentReport run_tga_compare(const ExperimentConfig& c) {
  validate(c);
  const Dictionary dict = build_from_descriptor(c.dictionary);
  const double p = dict.p();
  const auto ms = m_range(c);
  const int m_max = ms.empty() ? 0 : *std::max_element(ms.begin(), ms.end());
  int iters = c.algorithm.max_iter;
  if (iters == 0) {
    for (int m : ms) {
      iters = std::max(iters, m);
      for (double b : c.algorithm.budget_c) iters = std::max(iters, budget(b, m));
    }
  }
  const std::string greedy_name = c.algorithm.name == "tga" ? "wcga" : c.algorithm.name;

  auto trials = run_trials(c, [&](int trial, TrialOutput& out) {
    auto rng = trial_rng(c.seed, static_cast<std::uint64_t>(trial));
    const Target target = make_target(dict, c.target, p, rng);
    const double fn = lp_norm(target.f0, p);
    const auto cfg = greedy_config(c.algorithm, p, c.algorithm.t, fn, iters, rng);
    GreedyTrace trace = run_algorithm(greedy_name, target.f0, dict, cfg);
    const GreedyTrace tga = tga_run(target.f0, dict, std::min(m_max, static_cast<int>(dict.size())), p);
    const SigmaTable sigma = sigma_table(c, target.f0, dict, m_max);
    const bool capped = sigma.method == "capped";
    const double atol = 1e-9 * fn;
    for (int m : ms) {
      const double s = sigma.values[static_cast<std::size_t>(m)];
      const bool zero = s <= atol;
      auto row = [&](int mp, double res, const std::string& kind) {
        out.rows.push_back({trial, m, mp, res, s, zero ? res : res / s, with_flags(kind, zero, capped)});
      };
      row(m, tga.residual_after(static_cast<std::size_t>(m)), "tga");
      row(m, trace.residual_after(static_cast<std::size_t>(m)), "wcga_m");
      for (double b : c.algorithm.budget_c) {
        const int mp = budget(b, m);
        row(mp, trace.residual_after(static_cast<std::size_t>(mp)), "wcga_mlog_c" + trim_number(b));
      }
    }
    out.traces.push_back({trial, std::move(trace), json{{"eps", target.eps}, {"sigma", sigma.values}}});
  });

  ExperimentReport report = assemble(c, trials);
  json per_m = json::array();
  std::vector<double> fit_m, fit_tga, fit_wcga;
  for (int m : ms) {
    std::vector<double> tga_r, wcga_r, mlog_r;
    std::size_t pairs = 0, tga_worse = 0;
    const std::string mlog0 = "wcga_mlog_c" + trim_number(c.algorithm.budget_c.front());
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      const auto& row = report.rows[i];
      if (row.m != m || row.flag.find("sigma_zero") != std::string::npos) continue;
      if (row.flag.rfind("tga", 0) == 0) {
        tga_r.push_back(row.ratio);
        for (std::size_t j = i + 1; j < report.rows.size() && report.rows[j].trial == row.trial; ++j) {
          const auto& o = report.rows[j];
          if (o.m == m && o.flag.rfind(mlog0, 0) == 0) {
            ++pairs;
            tga_worse += row.ratio >= o.ratio * (1.0 - 1e-12);
            break;
          }
        }
      } else if (row.flag.rfind(mlog0, 0) == 0) {
        mlog_r.push_back(row.ratio);
      } else if (row.flag.rfind("wcga_m", 0) == 0 && row.flag.rfind("wcga_mlog", 0) != 0) {
        wcga_r.push_back(row.ratio);
      }
    }
    const double tm = median(tga_r), wm = median(wcga_r);
    if (m > 0 && std::isfinite(tm) && std::isfinite(wm)) {
      fit_m.push_back(m);
      fit_tga.push_back(tm);
      fit_wcga.push_back(wm);
    }
    per_m.push_back({{"m", m},
                     {"median_ratio_tga", number_or_null(tm)},
                     {"median_ratio_wcga_m", number_or_null(wm)},
                     {"median_ratio_wcga_mlog", number_or_null(median(mlog_r))},
                     {"tga_not_better_fraction",
                      pairs ? json(static_cast<double>(tga_worse) / static_cast<double>(pairs)) : json(nullptr)}});
  }
  report.summary["per_m"] = per_m;
  report.summary["tga_growth_exponent"] =
      fit_m.size() >= 2 ? number_or_null(fit_loglog_slope(fit_m, fit_tga)) : json(nullptr);
  report.summary["wcga_growth_exponent"] =
      fit_m.size() >= 2 ? number_or_null(fit_loglog_slope(fit_m, fit_wcga)) : json(nullptr);
  return report;
}

ExperimentReport run_decay(const ExperimentConfig& c) {
  validate(c);
  const Dictionary dict = build_from_descriptor(c.dictionary);
  const double p = dict.p();
  const SmoothnessParams params = smoothness_params(p);
  const int iters = c.algorithm.max_iter > 0 ? c.algorithm.max_iter : 100;
  const int K = c.target.K;
  const int D = c.decay.D > 0 ? c.decay.D : K + iters;

  auto trials = run_trials(c, [&](int trial, TrialOutput& out) {
    auto rng = trial_rng(c.seed, static_cast<std::uint64_t>(trial));
    TargetSpec spec = c.target;
    spec.kind = "sparse";
    SparseElement clean = draw_coefficients(dict, spec, rng);
    const Eigen::VectorXd dir = draw_noise_direction(dict.grid(), p, rng);

    EstimateOptions eo;
    eo.support = clean.support;
    eo.seed = rng();
    const ConditionEstimate v = estimate_a3(dict, K, D, c.decay.r, p, eo);

    json runs = json::array();
    std::size_t run = 0;
    for (double noise : c.decay.noise_levels) {
      const Target target = assemble_target(dict, clean, dir, noise, p);
      const double fn = lp_norm(target.f0, p);
      for (double t : c.decay.t_values) {
        const auto cfg = greedy_config(c.algorithm, p, t, fn, iters, rng);
        GreedyTrace trace = run_algorithm(c.algorithm.name, target.f0, dict, cfg);
        const DecayBoundReport rep = verify_decay_bound(trace, K, c.decay.r, v.value, target.eps, params, t);
        const std::string flag = "eps" + trim_number(noise) + "/t" + trim_number(t);
        const double scale = std::pow(static_cast<double>(K), rep.exponent);
        for (std::size_t m = 0; m < trace.residual_norms.size(); ++m) {
          const double env = fn * std::exp(-rep.c1 * static_cast<double>(m) / scale) + 2.0 * target.eps;
          const double res = trace.residual_norms[m];
          out.rows.push_back({trial, static_cast<int>(m), static_cast<int>(m), res, env,
                              env > 0.0 ? res / env : 0.0, flag});
        }
        json rj;
        to_json(rj, rep);
        runs.push_back({{"noise", noise}, {"t", t}, {"eps", target.eps}, {"report", rj}});
        out.traces.push_back({trial, std::move(trace),
                              json{{"K", K},
                                   {"r", c.decay.r},
                                   {"V", v.value},
                                   {"V_exact", v.exact},
                                   {"eps", target.eps},
                                   {"noise", noise},
                                   {"t", t},
                                   {"A_eps", clean.l1_norm()},
                                   {"support", clean.support}}});
        ++run;
      }
    }
    out.extra = json{{"trial", trial}, {"V", v.value}, {"V_exact", v.exact}, {"runs", runs}};
  });

  ExperimentReport report = assemble(c, trials);
  json per_trial = json::array();
  std::size_t checked = 0, passed = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (auto& t : trials) {
    if (!t.error.empty()) continue;
    for (const auto& r : t.extra["runs"]) {
      ++checked;
      passed += r["report"]["pass"].get<bool>();
      min_slack = std::min(min_slack, r["report"]["min_slack"].get<double>());
    }
    per_trial.push_back(t.extra);
  }
  report.summary["D"] = D;
  report.summary["runs"] = per_trial;
  report.summary["traces_checked"] = checked;
  report.summary["traces_passed"] = passed;
  report.summary["min_slack"] = number_or_null(min_slack);
  report.summary["pass"] = checked > 0 && passed == checked;
  return report;
}

ExperimentReport run_rate(const ExperimentConfig& c) {
  validate(c);
  const Dictionary dict = build_from_descriptor(c.dictionary);
  const double p = dict.p();
  const SmoothnessParams params = smoothness_params(p);
  const int iters = c.algorithm.max_iter > 0 ? c.algorithm.max_iter : c.rate.fit_hi;

  auto trials = run_trials(c, [&](int trial, TrialOutput& out) {
    auto rng = trial_rng(c.seed, static_cast<std::uint64_t>(trial));
    const Target target = make_target(dict, c.target, p, rng);
    const double fn = lp_norm(target.f0, p);
    const double a_eps = target.clean.l1_norm();
    json runs = json::array();
    for (double t : c.rate.t_values) {
      const auto cfg = greedy_config(c.algorithm, p, t, fn, iters, rng);
      GreedyTrace trace = run_algorithm(c.algorithm.name, target.f0, dict, cfg);
      const RateBoundReport rep = verify_rate_bound(trace, a_eps, target.eps, params, t);
      const std::string flag = "t" + trim_number(t);
      std::vector<double> fm, fv;
      for (std::size_t m = 0; m < trace.residual_norms.size(); ++m) {
        const double env = (a_eps + target.eps) *
                           std::pow(1.0 + static_cast<double>(m) * std::pow(t, params.q_conj), -1.0 / params.q_conj);
        const double res = trace.residual_norms[m];
        out.rows.push_back({trial, static_cast<int>(m), static_cast<int>(m), res, env, res / env, flag});
        if (static_cast<int>(m) >= c.rate.fit_lo && static_cast<int>(m) <= c.rate.fit_hi) {
          fm.push_back(static_cast<double>(m));
          fv.push_back(res);
        }
      }
      const double slope = fm.size() >= 2 ? fit_loglog_slope(fm, fv) : std::numeric_limits<double>::quiet_NaN();
      json rj;
      to_json(rj, rep);
      runs.push_back({{"t", t}, {"slope", number_or_null(slope)}, {"fit_points", fm.size()}, {"report", rj}});
      out.traces.push_back(
          {trial, std::move(trace), json{{"eps", target.eps}, {"A_eps", a_eps}, {"t", t}, {"slope", number_or_null(slope)}}});
    }
    out.extra = json{{"trial", trial}, {"A_eps", a_eps}, {"eps", target.eps}, {"runs", runs}};
  });

  ExperimentReport report = assemble(c, trials);
  json per_trial = json::array();
  json per_t = json::array();
  for (double t : c.rate.t_values) {
    std::vector<double> slopes, constants;
    for (auto& tr : trials) {
      if (!tr.error.empty()) continue;
      for (const auto& r : tr.extra["runs"]) {
        if (r["t"].get<double>() != t) continue;
        if (!r["slope"].is_null()) slopes.push_back(r["slope"].get<double>());
        constants.push_back(r["report"]["constant"].get<double>());
      }
    }
    per_t.push_back({{"t", t},
                     {"median_slope", number_or_null(median(slopes))},
                     {"max_slope", number_or_null(max_of(slopes))},
                     {"max_constant", number_or_null(max_of(constants))}});
  }
  for (auto& tr : trials) {
    if (tr.error.empty()) per_trial.push_back(tr.extra);
  }
  report.summary["fit_range"] = {c.rate.fit_lo, c.rate.fit_hi};
  report.summary["per_t"] = per_t;
  report.summary["runs"] = per_trial;
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& c) {
  if (c.experiment == "lebesgue") return run_lebesgue(c);
  if (c.experiment == "phase") return run_phase(c);
  if (c.experiment == "tga_compare") return run_tga_compare(c);
  if (c.experiment == "decay") return run_decay(c);
  if (c.experiment == "rate") return run_rate(c);
  throw ConfigError("experiment", "unknown experiment '" + c.experiment + "'");
}

// ---------------------------------------------------------------------------
// Output

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "trial,m,m_prime,res_norm,sigma_m,ratio,flag\n";
  for (const auto& r : report.rows) {
    out << r.trial << ',' << r.m << ',' << r.m_prime << ',' << format_number(r.res_norm) << ','
        << format_number(r.sigma_m) << ',' << format_number(r.ratio) << ',' << r.flag << '\n';
  }
  return out.str();
}

json report_json(const ExperimentReport& report) {
  return json{{"schema_version", kSchemaVersion},
              {"kind", "report"},
              {"experiment", report.config.experiment},
              {"name", report.config.name},
              {"config", config_to_json(report.config)},
              {"rows", report.rows.size()},
              {"csv_columns", {"trial", "m", "m_prime", "res_norm", "sigma_m", "ratio", "flag"}},
              {"summary", report.summary},
              {"versions", {{"wcga", kVersion}, {"schema", kSchemaVersion}}}};
}

json traces_json(const ExperimentReport& report) {
  json list = json::array();
  for (const auto& t : report.traces) {
    json tj;
    to_json(tj, t.trace);
    list.push_back({{"trial", t.trial}, {"meta", t.meta}, {"trace", tj}});
  }
  return json{{"schema_version", kSchemaVersion},
              {"kind", "traces"},
              {"experiment", report.config.experiment},
              {"name", report.config.name},
              {"dictionary", descriptor_json(report.config.dictionary)},
              {"traces", list}};
}

std::vector<std::filesystem::path> write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::string& file, const std::string& text) {
    const auto path = dir / file;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    written.push_back(path);
  };
  const auto& name = report.config.name;
  write(name + ".csv", report_csv(report));
  write(name + ".json", report_json(report).dump(2) + "\n");
  if (report.config.write_traces) write(name + ".traces.json", traces_json(report).dump(2) + "\n");
  return written;
}

std::vector<ExperimentConfig> demo_configs() {
  std::vector<ExperimentConfig> out;

  ExperimentConfig leb;
  leb.experiment = "lebesgue";
  leb.name = "demo_lebesgue";
  leb.seed = 20240601;
  leb.trials = 10;
  leb.dictionary = {.type = "trig", .dim = 1, .points_per_axis = 64, .p = 4.0, .max_freq = 7};
  leb.algorithm.budget_c = {0.5, 1.0, 2.0, 4.0};
  leb.target = {.kind = "dense", .K = 3, .law = "power", .alpha = 1.0};
  leb.oracle.m_max = 4;
  leb.write_traces = true;
  out.push_back(leb);

  ExperimentConfig phase;
  phase.experiment = "phase";
  phase.name = "demo_phase";
  phase.seed = 20240602;
  phase.trials = 10;
  phase.dictionary = {.type = "gaussian", .dim = 1, .points_per_axis = 64, .p = 2.0, .columns = 128, .seed = 7};
  phase.algorithm.name = "womp";
  phase.target = {.kind = "sparse", .K = 1, .law = "gaussian"};
  phase.phase.sparsities = {1, 4, 8, 12, 16, 20, 24};
  phase.phase.budget_factors = {1.0, 1.5, 2.0, 3.0};
  phase.write_traces = true;
  out.push_back(phase);

  ExperimentConfig tga;
  tga.experiment = "tga_compare";
  tga.name = "demo_tga";
  tga.seed = 20240603;
  tga.trials = 10;
  tga.dictionary = {.type = "trig", .dim = 1, .points_per_axis = 64, .p = 4.0, .max_freq = 7};
  tga.target = {.kind = "adversarial", .K = 2, .law = "rademacher", .small = 0.15};
  tga.m_values = {0, 1, 2, 3, 4};
  tga.write_traces = true;
  out.push_back(tga);

  ExperimentConfig decay;
  decay.experiment = "decay";
  decay.name = "demo_decay";
  decay.seed = 20240604;
  decay.trials = 3;
  decay.dictionary = {.type = "trig", .dim = 1, .points_per_axis = 64, .p = 4.0, .max_freq = 20};
  decay.algorithm.max_iter = 100;
  decay.algorithm.weak_random = true;
  decay.target = {.kind = "sparse", .K = 3, .law = "gaussian"};
  decay.decay.noise_levels = {0.0, 0.01, 0.5};
  decay.decay.t_values = {0.5, 1.0};
  decay.write_traces = true;
  out.push_back(decay);

  ExperimentConfig rate;
  rate.experiment = "rate";
  rate.name = "demo_rate";
  rate.seed = 20240605;
  rate.trials = 3;
  rate.dictionary = {.type = "trig", .dim = 1, .points_per_axis = 256, .p = 2.0, .max_freq = 100};
  rate.algorithm.max_iter = 100;
  rate.algorithm.weak_random = true;
  rate.target = {.kind = "dense", .K = 1, .law = "power", .alpha = 1.0};
  rate.rate.t_values = {1.0, 0.5};
  rate.write_traces = true;
  out.push_back(rate);

  return out;
}

}  // namespace wcga
