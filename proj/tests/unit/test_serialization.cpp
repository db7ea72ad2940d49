#include "support.hpp"
#include "wcga/serialization.hpp"

#include <doctest.h>

using namespace wcga;
using nlohmann::json;

TEST_SUITE("serialization") {
  TEST_CASE("descriptor round trip") {
    const DictionaryDescriptor g{.type = "gaussian", .dim = 1, .points_per_axis = 64, .p = 3.0, .columns = 9, .seed = 4};
    json j;
    to_json(j, g);
    CHECK(j.at("columns") == 9);
    CHECK_FALSE(j.contains("N"));
    CHECK(j.get<DictionaryDescriptor>() == g);
    const DictionaryDescriptor t{.type = "trig", .dim = 2, .points_per_axis = 16, .p = 4.0, .max_freq = 3};
    json k;
    to_json(k, t);
    CHECK(k.get<DictionaryDescriptor>() == t);
  }

  TEST_CASE("trace round trip") {
    auto grid = make_grid(1, 64);
    std::mt19937_64 rng(41);
    const auto dict = build_trig(1, 4, 3.0, grid);
    GreedyConfig cfg;
    cfg.p = 3.0;
    cfg.t = 0.5;
    cfg.weak_seed = 17;
    cfg.max_iter = 4;
    const auto trace = wcga_run(testing::random_function(grid, rng), dict, cfg);
    json j;
    to_json(j, trace);
    const std::string text = j.dump();
    const auto back = json::parse(text).get<GreedyTrace>();
    CHECK(back.selected == trace.selected);
    CHECK(back.residual_norms == trace.residual_norms);
    CHECK(back.optimality == trace.optimality);
    CHECK(back.config.weak_seed == cfg.weak_seed);
    CHECK(back.config.t == 0.5);
    CHECK_FALSE(back.config.stop_tol.has_value());
    CHECK(back.stop == trace.stop);
    CHECK(back.final_projection.coefficients == trace.final_projection.coefficients);

    j["residual_norms"].push_back(0.0);
    CHECK_THROWS(j.get<GreedyTrace>());
  }

  TEST_CASE("estimate round trip") {
    const auto dict = build_trig(1, 2, 2.0, make_grid(1, 16));
    const auto e = estimate_a3(dict, 2, 4, 0.5, 2.0);
    json j;
    to_json(j, e);
    const auto back = j.get<ConditionEstimate>();
    CHECK(back.kind == e.kind);
    CHECK(back.value == e.value);
    CHECK(back.exact == e.exact);
    CHECK(back.witness.subset_b == e.witness.subset_b);
    CHECK(back.witness.coefficients == e.witness.coefficients);
    CHECK(back.K == 2);
    CHECK(back.D == 4);
    CHECK(evaluate_witness(dict, back) == doctest::Approx(e.value));
  }

  TEST_CASE("schema version") {
    CHECK_NOTHROW(require_schema_version(json{{"schema_version", kSchemaVersion}}));
    CHECK_THROWS_WITH_AS(require_schema_version(json{{"schema_version", kSchemaVersion + 1}}),
                         doctest::Contains("schema_version"), std::runtime_error);
    CHECK_THROWS_AS(require_schema_version(json{{"rows", 3}}), std::runtime_error);
    CHECK_THROWS_AS(require_schema_version(json{{"schema_version", "1"}}), std::runtime_error);
  }

  TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(-2.5e-300) == "-2.5e-300");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  }

  TEST_CASE("sigma table csv") {
    SigmaTable t;
    t.values = {2.0, 0.5};
    t.supports = {{}, {3, 7}};
    CHECK(sigma_table_csv(t) == "m,sigma_m,support\n0,2,\n1,0.5,3;7\n");
  }
}
