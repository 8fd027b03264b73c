#include <cmath>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "pccseg/error.hpp"
#include "pccseg/graph_io.hpp"
#include "pccseg/netindex.hpp"
#include "support.hpp"

using namespace pccseg;

TEST_CASE("worked example graphs") {
  const PixelGraph a = load_graph(testing::fixture_dir() / "fig1a.txt");
  const PixelGraph b = load_graph(testing::fixture_dir() / "fig1b.txt");
  const auto ca = count_labeled_edges(a);
  CHECK(ca.same == 15);
  CHECK(ca.total == 20);
  const auto cb = count_labeled_edges(b);
  CHECK(cb.same == 16);
  CHECK(cb.total == 17);

  const IndexReport base = make_index_report(ca, compute_phi(ca.same, ca.total));
  CHECK(base.phi == 0.75);
  CHECK(std::abs(base.sigma - 2.4094) <= 5e-5);
  CHECK(std::abs(base.alpha - 0.5) <= 1e-6);

  const IndexReport better = make_index_report(cb, base.baseline_phi);
  CHECK(std::abs(better.alpha - 0.8641) <= 5e-4);
}

TEST_CASE("phi") {
  CHECK(compute_phi(15, 20) == 0.75);
  CHECK(compute_phi(9, 9) == 1.0);
  CHECK(compute_phi(0, 0) == 1.0);
  CHECK(compute_phi(0, 4) == 0.0);
}

TEST_CASE("sigma") {
  CHECK(std::abs(compute_sigma(0.75) - 2.4094) <= 5e-5);
  CHECK(compute_sigma(0.5) == 1.0);
  CHECK(std::abs(compute_sigma(0.9) - 6.5788) <= 1e-4);
  CHECK(compute_sigma(1.0) == 1.0);
  CHECK(compute_sigma(1e-12) == doctest::Approx(std::log(0.5) / std::log(1e-6)));
  CHECK_THROWS_AS(compute_sigma(0.0), InvalidInput);
  CHECK_THROWS_AS(compute_sigma(-0.1), InvalidInput);
  CHECK_THROWS_AS(compute_sigma(1.5), InvalidInput);
}

TEST_CASE("alpha") {
  CHECK(std::abs(compute_alpha(16.0 / 17.0, 2.4094) - 0.8641) <= 5e-4);
  for (double baseline : {0.3, 0.5, 0.75, 0.9, 0.999}) {
    CHECK(std::abs(compute_alpha(baseline, compute_sigma(baseline)) - 0.5) < 1e-9);
  }
  CHECK(compute_alpha(1.0, 3.7) == 1.0);
}

TEST_CASE("no labeled-labeled edges") {
  PixelGraph g;
  g.node_pixel = {0, 1, 2};
  g.node_class = {0, -1, 1};
  const std::vector<std::pair<std::uint32_t, std::uint32_t>> e = {{0, 1}, {1, 2}};
  g.set_edges(3, e);
  const auto c = count_labeled_edges(g);
  CHECK(c.same == 0);
  CHECK(c.total == 0);
}

TEST_CASE("index properties over random graphs") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const PixelGraph g = testing::random_graph(30 + trial, 4, 2, 0.5, static_cast<std::uint64_t>(trial));
    const auto c = count_labeled_edges(g);
    const auto [same, total] = testing::oracle_labeled_counts(testing::edge_set(g), g.node_class);
    CHECK(c.same == same);
    CHECK(c.total == total);
    CHECK(c.same <= c.total);

    const double baseline = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
    const IndexReport r = make_index_report(c, baseline);
    CHECK(r.phi >= 0.0);
    CHECK(r.phi <= 1.0);
    CHECK(r.alpha >= 0.0);
    CHECK(r.alpha <= 1.0);
  }
  // Monotone in phi at fixed sigma.
  const double sigma = compute_sigma(0.8);
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double a = compute_alpha(i / 100.0, sigma);
    CHECK(a >= prev);
    prev = a;
  }
}

TEST_CASE("unit weights always score one half") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const FeatureMatrix fm = testing::random_features(120, seed);
    const NodeSet nodes = testing::random_nodes(120, 0.5, seed);
    const auto c = labeled_edge_counts(fm, nodes, 5, WeightVector::unit());
    const double baseline = compute_phi(c.same, c.total);
    if (baseline <= 0.0 || baseline >= 1.0) continue;
    CHECK(std::abs(make_index_report(c, baseline).alpha - 0.5) < 1e-9);
  }
}

TEST_CASE("report serialization") {
  const IndexReport r = make_index_report({15, 20}, 0.75);
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["z_same"] == 15);
  CHECK(j["z_total"] == 20);
  CHECK(j["phi"].get<double>() == 0.75);
  CHECK(r.to_text().find("alpha") != std::string::npos);
  CHECK(make_index_report({3, 3}, 1.0).baseline_saturated);
}
