#include "support.hpp"
#include "wcga/analysis.hpp"
#include "wcga/greedy.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

using namespace wcga;

TEST_SUITE("greedy") {
  TEST_CASE("single element target") {
    auto grid = make_grid(1, 64);
    for (double p : {1.5, 2.0, 4.0}) {
      const auto dict = build_trig(1, 5, p, grid);
      const auto f0 = dict.element(7);
      GreedyConfig cfg;
      cfg.p = p;
      const auto trace = wcga_run(f0, dict, cfg);
      REQUIRE(trace.iterations() >= 1);
      CHECK(trace.selected[0] == 7);
      CHECK(trace.residual_norms[1] <= 1e-10);
      CHECK(trace.stop == StopReason::ResidualTolerance);
    }
  }

  TEST_CASE("two-term target in an orthonormal system") {
    auto grid = make_grid(1, 64);
    const auto dict = build_trig(1, 5, 2.0, grid);
    const auto f0 = SparseElement({4, 9}, {3.0, 1.0}).synthesize(dict);
    const auto trace = wcga_run(f0, dict, GreedyConfig{});
    REQUIRE(trace.iterations() == 2);
    CHECK(trace.selected == std::vector<std::size_t>{4, 9});
    CHECK(std::abs(trace.residual_norms[0] - std::sqrt(10.0)) <= 1e-10);
    CHECK(std::abs(trace.residual_norms[1] - 1.0) <= 1e-10);
    CHECK(trace.residual_norms[2] <= 1e-10);
  }

  TEST_CASE("exact recovery in K steps") {
    auto grid = make_grid(1, 64);
    const auto dict = build_trig(1, 7, 2.0, grid);
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
      const int K = 1 + trial % 4;
      std::vector<std::size_t> all(dict.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      std::shuffle(all.begin(), all.end(), rng);
      std::vector<std::size_t> support(all.begin(), all.begin() + K);
      const auto coef = testing::random_vector(static_cast<std::size_t>(K), rng);
      const auto f0 = SparseElement(support, {coef.data(), coef.data() + K}).synthesize(dict);
      const auto trace = wcga_run(f0, dict, GreedyConfig{});
      CHECK(trace.iterations() == static_cast<std::size_t>(K));
      CHECK(trace.residual_norms.back() <= 1e-10 * trace.residual_norms.front());
      auto sel = trace.selected;
      std::sort(sel.begin(), sel.end());
      std::sort(support.begin(), support.end());
      CHECK(sel == support);
    }
  }

  TEST_CASE("residuals decrease and each projection is optimal") {
    auto grid = make_grid(1, 64);
    std::mt19937_64 rng(22);
    for (double p : {1.5, 4.0}) {
      const auto dict = build_trig(1, 6, p, grid);
      const auto f0 = testing::random_function(grid, rng);
      GreedyConfig cfg;
      cfg.p = p;
      cfg.max_iter = 10;
      const auto trace = wcga_run(f0, dict, cfg);
      CHECK(trace.iterations() == 10);
      CHECK(trace.stop == StopReason::MaxIter);
      const double fn = trace.residual_norms[0];
      for (std::size_t m = 0; m + 1 < trace.residual_norms.size(); ++m) {
        CHECK(trace.residual_norms[m + 1] <= trace.residual_norms[m] * (1 + 1e-10));
      }
      for (double o : trace.optimality) CHECK(o <= 1e-9 * fn);
      std::vector<std::size_t> sel = trace.selected;
      std::sort(sel.begin(), sel.end());
      CHECK(std::adjacent_find(sel.begin(), sel.end()) == sel.end());
    }
  }

  TEST_CASE("womp is wcga at p = 2") {
    auto grid = make_grid(1, 32);
    std::mt19937_64 rng(23);
    const auto dict = build_gaussian(20, 2.0, grid, 4);
    const auto f0 = testing::random_function(grid, rng);
    GreedyConfig cfg;
    cfg.max_iter = 6;
    const auto a = wcga_run(f0, dict, cfg);
    const auto b = womp_run(f0, dict, cfg);
    CHECK(a.selected == b.selected);
    CHECK(a.residual_norms == b.residual_norms);
    cfg.p = 4.0;
    CHECK_THROWS_AS(womp_run(f0, dict, cfg), std::invalid_argument);
  }

  TEST_CASE("stop reasons") {
    auto grid = make_grid(1, 32);
    const auto dict = build_trig(1, 3, 2.0, grid);
    const auto zero = wcga_run(SampledFunction::zeros(grid), dict, GreedyConfig{});
    CHECK(zero.stop == StopReason::ZeroTarget);
    CHECK(zero.iterations() == 0);
    // orthogonal to every element: the norming functional vanishes on the dictionary
    Eigen::VectorXd v(32);
    for (int j = 0; j < 32; ++j) v[j] = std::cos(2 * std::numbers::pi * 8 * j / 32.0);
    const auto high = wcga_run(SampledFunction(grid, v), dict, GreedyConfig{});
    CHECK(high.stop == StopReason::ZeroFunctional);
    for (auto r : {StopReason::ZeroTarget, StopReason::ResidualTolerance, StopReason::ZeroFunctional,
                   StopReason::Stall, StopReason::MaxIter, StopReason::TermBudget}) {
      CHECK(stop_reason_from_string(to_string(r)) == r);
    }
    CHECK(high.residual_after(50) == high.residual_norms.back());
  }

  TEST_CASE("config validation") {
    GreedyConfig cfg;
    cfg.t = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.t = 1.2;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.t = 1.0;
    cfg.p = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }

  TEST_CASE("argmax takes the smallest index among ties") {
    std::size_t ties = 0;
    const std::vector<double> s{0.5, 1.0, 1.0 - 1e-14, 0.99};
    CHECK(argmax_smallest(s, &ties) == 1);
    CHECK(ties == 2);
  }

  TEST_CASE("weak selection") {
    std::mt19937_64 rng(24);
    const std::vector<double> wide{1.0, 0.6};
    const std::vector<double> narrow{1.0, 0.4};
    CHECK(weak_eligible(wide, 0.5) == std::vector<std::size_t>{0, 1});
    CHECK(weak_eligible(narrow, 0.5) == std::vector<std::size_t>{0});
    CHECK(weak_select(std::vector<double>{0.2, 0.9, 0.9}, 1.0, rng) == 1);
    int first = 0;
    for (int k = 0; k < 1000; ++k) first += weak_select(wide, 0.5, rng) == 0;
    CHECK(std::abs(first / 1000.0 - 0.5) <= 0.05);
  }

  TEST_CASE("weak wcga picks t-near maximizers") {
    auto grid = make_grid(1, 64);
    std::mt19937_64 rng(25);
    const auto dict = build_trig(1, 6, 3.0, grid);
    const auto f0 = testing::random_function(grid, rng);
    GreedyConfig cfg;
    cfg.p = 3.0;
    cfg.t = 0.5;
    cfg.weak_seed = 99;
    cfg.max_iter = 6;
    const auto trace = wcga_run(f0, dict, cfg);
    CHECK(wcga_run(f0, dict, cfg).selected == trace.selected);
    // replay each step's scores from the previous residual
    for (std::size_t m = 0; m < trace.iterations(); ++m) {
      std::vector<std::size_t> prefix(trace.selected.begin(), trace.selected.begin() + static_cast<long>(m));
      const auto residual = m == 0 ? f0 : project_best(f0, dict, prefix, 3.0).residual;
      const NormingFunctional F(residual, 3.0);
      const Eigen::VectorXd scores = F.apply_columns(dict.matrix()).cwiseAbs();
      CHECK(scores[static_cast<Eigen::Index>(trace.selected[m])] >= 0.5 * scores.maxCoeff() * (1 - 1e-9));
    }
  }

  TEST_CASE("tga") {
    auto grid = make_grid(1, 64);
    std::mt19937_64 rng(26);
    const auto basis2 = build_trig(1, 7, 2.0, grid);
    const auto f0 = testing::random_function(grid, rng);
    const auto t0 = tga_run(f0, basis2, 0, 2.0);
    CHECK(t0.residual_norms.size() == 1);
    CHECK(t0.residual_norms[0] == doctest::Approx(lp_norm(f0, 2.0)));

    // Parseval: ||f - G_m||^2 = ||f||^2 - sum of the m largest squared coefficients
    const Eigen::VectorXd c = basis_coefficients(f0, basis2);
    std::vector<double> sq;
    for (Eigen::Index i = 0; i < c.size(); ++i) sq.push_back(c[i] * c[i]);
    std::sort(sq.rbegin(), sq.rend());
    const auto t5 = tga_run(f0, basis2, 5, 2.0);
    double tail = std::pow(lp_norm(f0, 2.0), 2);
    for (int m = 1; m <= 5; ++m) {
      tail -= sq[static_cast<std::size_t>(m - 1)];
      CHECK(std::abs(t5.residual_norms[static_cast<std::size_t>(m)] - std::sqrt(tail)) <= 1e-10);
    }
    CHECK(t5.stop == StopReason::TermBudget);

    const auto basis4 = build_trig(1, 4, 4.0, grid);
    const auto t3 = tga_run(f0, basis4, 3, 4.0);
    const auto sigma = sigma_m_oracle(f0, basis4, 3, 4.0);
    for (std::size_t m = 0; m <= 3; ++m) CHECK(t3.residual_norms[m] >= sigma.values[m] - 1e-9);

    CHECK_THROWS_AS(tga_run(f0, build_gaussian(5, 2.0, grid, 1), 2, 2.0), std::invalid_argument);
  }
}
