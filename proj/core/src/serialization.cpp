#include "wcga/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace wcga {

using nlohmann::json;

void require_schema_version(const json& doc) {
  if (!doc.is_object() || !doc.contains("schema_version")) {
    throw std::runtime_error("document has no schema_version field");
  }
  const auto& v = doc.at("schema_version");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
    throw std::runtime_error("unsupported schema_version " + v.dump() + " (this build reads " +
                             std::to_string(kSchemaVersion) + ")");
  }
}

void to_json(json& j, const DictionaryDescriptor& d) {
  j = json{{"type", d.type}, {"d", d.dim}, {"points_per_axis", d.points_per_axis}, {"p", d.p}};
  if (d.type == "trig") j["N"] = d.max_freq;
  if (d.type == "haar") j["J"] = d.levels;
  if (d.type == "gaussian") {
    j["columns"] = d.columns;
    j["seed"] = d.seed;
  }
}

void from_json(const json& j, DictionaryDescriptor& d) {
  d = DictionaryDescriptor{};
  d.type = j.at("type").get<std::string>();
  d.dim = j.value("d", 1);
  d.points_per_axis = j.value("points_per_axis", 256);
  d.p = j.value("p", 2.0);
  d.max_freq = j.value("N", 0);
  d.levels = j.value("J", 0);
  d.columns = j.value("columns", 0);
  d.seed = j.value("seed", std::uint64_t{0});
}

void to_json(json& j, const GreedyConfig& c) {
  j = json{{"t", c.t},
           {"p", c.p},
           {"max_iter", c.max_iter},
           {"max_inner_iter", c.max_inner_iter},
           {"strict_projection", c.strict_projection}};
  j["stop_tol"] = c.stop_tol ? json(*c.stop_tol) : json(nullptr);
  j["opt_tol"] = c.opt_tol ? json(*c.opt_tol) : json(nullptr);
  j["weak_seed"] = c.weak_seed ? json(*c.weak_seed) : json(nullptr);
}

void from_json(const json& j, GreedyConfig& c) {
  c = GreedyConfig{};
  c.t = j.value("t", 1.0);
  c.p = j.value("p", 2.0);
  c.max_iter = j.value("max_iter", 0);
  c.max_inner_iter = j.value("max_inner_iter", 200);
  c.strict_projection = j.value("strict_projection", true);
  if (j.contains("stop_tol") && !j.at("stop_tol").is_null()) c.stop_tol = j.at("stop_tol").get<double>();
  if (j.contains("opt_tol") && !j.at("opt_tol").is_null()) c.opt_tol = j.at("opt_tol").get<double>();
  if (j.contains("weak_seed") && !j.at("weak_seed").is_null()) {
    c.weak_seed = j.at("weak_seed").get<std::uint64_t>();
  }
}

void to_json(json& j, const GreedyTrace& t) {
  std::vector<double> coef(t.final_projection.coefficients.data(),
                           t.final_projection.coefficients.data() + t.final_projection.coefficients.size());
  j = json{{"algorithm", t.algorithm},
           {"config", t.config},
           {"selected", t.selected},
           {"residual_norms", t.residual_norms},
           {"optimality", t.optimality},
           {"coefficients", coef},
           {"ties_broken", t.ties_broken},
           {"stop", to_string(t.stop)}};
}

void from_json(const json& j, GreedyTrace& t) {
  t = GreedyTrace{};
  t.algorithm = j.at("algorithm").get<std::string>();
  t.config = j.at("config").get<GreedyConfig>();
  t.selected = j.at("selected").get<std::vector<std::size_t>>();
  t.residual_norms = j.at("residual_norms").get<std::vector<double>>();
  t.optimality = j.value("optimality", std::vector<double>{});
  t.ties_broken = j.value("ties_broken", 0);
  t.stop = stop_reason_from_string(j.at("stop").get<std::string>());
  const auto coef = j.value("coefficients", std::vector<double>{});
  t.final_projection.coefficients = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
  t.final_projection.residual_norm = t.residual_norms.empty() ? 0.0 : t.residual_norms.back();
  if (t.selected.size() + 1 != t.residual_norms.size()) {
    throw std::runtime_error("trace: residual_norms must have one more entry than selected");
  }
}

void to_json(json& j, const ConditionEstimate& e) {
  std::vector<double> coef(e.witness.coefficients.data(),
                           e.witness.coefficients.data() + e.witness.coefficients.size());
  j = json{{"kind", to_string(e.kind)},
           {"value", e.value},
           {"exact", e.exact},
           {"method", e.method},
           {"candidates", e.candidates},
           {"parameters", {{"K", e.K}, {"D", e.D}, {"r", e.r}, {"p", e.p}}},
           {"witness",
            {{"subset_a", e.witness.subset_a}, {"subset_b", e.witness.subset_b}, {"coefficients", coef}}}};
}

void from_json(const json& j, ConditionEstimate& e) {
  e = ConditionEstimate{};
  e.kind = condition_kind_from_string(j.at("kind").get<std::string>());
  e.value = j.at("value").get<double>();
  e.exact = j.at("exact").get<bool>();
  e.method = j.value("method", std::string{});
  e.candidates = j.value("candidates", std::size_t{0});
  const auto& par = j.at("parameters");
  e.K = par.value("K", 0);
  e.D = par.value("D", 0);
  e.r = par.value("r", 0.0);
  e.p = par.value("p", 2.0);
  const auto& w = j.at("witness");
  e.witness.subset_a = w.at("subset_a").get<std::vector<std::size_t>>();
  e.witness.subset_b = w.at("subset_b").get<std::vector<std::size_t>>();
  const auto coef = w.at("coefficients").get<std::vector<double>>();
  e.witness.coefficients = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
}

void to_json(json& j, const SigmaTable& s) {
  j = json{{"method", s.method}, {"p", s.p}, {"values", s.values}, {"supports", s.supports},
           {"projections", s.projections}};
}

void to_json(json& j, const DecayBoundReport& r) {
  j = json{{"c1", r.c1},
           {"exponent", r.exponent},
           {"pairs_checked", r.pairs_checked},
           {"violations", r.violations},
           {"max_ratio", r.max_ratio},
           {"min_slack", r.min_slack},
           {"worst_pair", {r.worst_k, r.worst_m}},
           {"pass", r.pass}};
}

void to_json(json& j, const RateBoundReport& r) {
  j = json{{"constant", r.constant}, {"binding_m", r.binding_m}, {"rows_constrained", r.rows_constrained}};
}

void to_json(json& j, const Lemma31Report& r) {
  j = json{{"trials", r.trials}, {"violations", r.violations}, {"max_ratio", r.max_ratio}, {"bound", r.bound}};
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sigma_table_csv(const SigmaTable& table) {
  std::ostringstream out;
  out << "m,sigma_m,support\n";
  for (std::size_t m = 0; m < table.values.size(); ++m) {
    out << m << ',' << format_number(table.values[m]) << ',';
    const auto& s = table.supports[m];
    for (std::size_t i = 0; i < s.size(); ++i) out << (i ? ";" : "") << s[i];
    out << '\n';
  }
  return out.str();
}

}  // namespace wcga
