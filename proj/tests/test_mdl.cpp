#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bnsl/bnsl.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace bnsl;

TEST_CASE("graph bits charge one slot per node plus one per parent") {
  // Chain over three nodes: (1+0) + (1+1) + (1+1) index slots of log2(3).
  const Dag chain = Dag::from_parent_lists({{}, {0}, {1}});
  REQUIRE(dl_graph(chain) == Catch::Approx(5.0 * std::log2(3.0)).epsilon(1e-12));

  const Dag empty8(8);
  REQUIRE(dl_graph(empty8) == Catch::Approx(8.0 * 3.0).epsilon(1e-12));

  SplitMix64 rng(11);
  for (int t = 0; t < 10; ++t) {
    const Dag dag = testutil::random_dag(rng, 6, 0.4);
    REQUIRE(dl_graph(dag) ==
            Catch::Approx(oracle::graph_bits(dag)).epsilon(1e-12));
  }
}

TEST_CASE("full table parameter bits") {
  // Binary child, three binary parents, 1024 rows: 8 * 1 * 10 / 2 = 40.
  REQUIRE(dl_table_params(8.0, 2, 1024) == Catch::Approx(40.0).epsilon(1e-12));
  // Small samples carry no parameter charge.
  REQUIRE(dl_table_params(8.0, 2, 1) == 0.0);
  REQUIRE(dl_table_params(8.0, 2, 0) == 0.0);
  // Ternary child doubles the per-partition free parameters.
  REQUIRE(dl_table_params(4.0, 3, 1024) == Catch::Approx(40.0).epsilon(1e-12));
}

TEST_CASE("default table structure bits at the pinned points") {
  // Eight configurations, binary child, 1024 rows.
  SECTION("no explicit rows") {
    const auto bits = dl_default_structure(8.0, 0, 2, 1024);
    REQUIRE(bits.structure_bits == Catch::Approx(3.0).epsilon(1e-12));
    REQUIRE(bits.param_bits == Catch::Approx(5.0).epsilon(1e-12));
    REQUIRE(bits.structure_bits + bits.param_bits ==
            Catch::Approx(8.0).epsilon(1e-12));
  }
  SECTION("four explicit rows") {
    const auto bits = dl_default_structure(8.0, 4, 2, 1024);
    REQUIRE(bits.structure_bits ==
            Catch::Approx(3.0 + std::log2(70.0)).epsilon(1e-12));
    REQUIRE(bits.param_bits == Catch::Approx(25.0).epsilon(1e-12));
    REQUIRE(bits.structure_bits + bits.param_bits ==
            Catch::Approx(34.129283016944966).epsilon(1e-9));
  }
  SECTION("maximal k prices parameters like the full table") {
    const auto bits = dl_default_structure(8.0, 7, 2, 1024);
    REQUIRE(bits.param_bits ==
            Catch::Approx(dl_table_params(8.0, 2, 1024)).epsilon(1e-12));
    REQUIRE(bits.structure_bits ==
            Catch::Approx(3.0 + std::log2(8.0)).epsilon(1e-12));
  }
  SECTION("k outside [0, m-1] is rejected") {
    REQUIRE_THROWS_AS(dl_default_structure(8.0, 8, 2, 1024),
                      KOutOfRangeError);
    REQUIRE_THROWS_AS(dl_default_structure(8.0, -1, 2, 1024),
                      KOutOfRangeError);
  }
}

TEST_CASE("binomial bits match a multiplicative reference") {
  REQUIRE(log2_binomial(8.0, 4) ==
          Catch::Approx(std::log2(70.0)).epsilon(1e-12));
  REQUIRE(log2_binomial(8.0, 0) == 0.0);
  REQUIRE(log2_binomial(8.0, 8) == Catch::Approx(0.0).margin(1e-9));
  SplitMix64 rng(21);
  for (int t = 0; t < 50; ++t) {
    const double m = static_cast<double>(2 + rng.next() % 1000000);
    const std::int64_t k =
        static_cast<std::int64_t>(rng.next() % std::uint64_t(std::min(m, 50.0)));
    REQUIRE(log2_binomial(m, k) ==
            Catch::Approx(oracle::log2_binomial(m, k)).epsilon(1e-9));
  }
}

TEST_CASE("tree structure bits at the pinned points") {
  // Full binary tree over two binary parents: 2 + 1 + 1 + four leaves = 8.
  TreeNode left;
  left.test_slot = 1;
  left.children = {TreeNode{}, TreeNode{}};
  TreeNode root;
  root.test_slot = 0;
  root.children = {left, left};
  REQUIRE(dl_tree_structure(DecisionTree{root}, 2) ==
          Catch::Approx(8.0).epsilon(1e-12));

  // The fixture tree over three parents: depth costs log2 3, log2 2, log2 1
  // plus one bit per node; four leaves.
  const BayesianNetwork net4 = testutil::collapse4_network();
  const auto& tree = std::get<DecisionTree>(net4.locals[3]);
  REQUIRE(dl_tree_structure(tree, 3) ==
          Catch::Approx(9.584962500721156).epsilon(1e-12));

  // A lone leaf costs exactly one bit.
  REQUIRE(dl_tree_structure(DecisionTree{}, 0) == 1.0);
  REQUIRE(dl_tree_structure(DecisionTree{}, 3) == 1.0);

  // Parameter bits price one vector per leaf.
  REQUIRE(dl_tree_params(DecisionTree{root}, 2, 1024) ==
          Catch::Approx(20.0).epsilon(1e-12));
  REQUIRE(dl_tree_params(DecisionTree{root}, 2, 1) == 0.0);
}

TEST_CASE("entropy bits") {
  const std::vector<std::int64_t> counts = {3, 1};
  REQUIRE(entropy_bits(counts) ==
          Catch::Approx(-3.0 * std::log2(0.75) - std::log2(0.25))
              .epsilon(1e-12));
  const std::vector<std::int64_t> pure = {5, 0};
  REQUIRE(entropy_bits(pure) == 0.0);  // 0 log 0 contributes nothing
  const std::vector<std::int64_t> none = {0, 0};
  REQUIRE(entropy_bits(none) == 0.0);
}

TEST_CASE("data bits are the codelength of the rows") {
  VariableTable vars({{"P", {"a", "b"}}, {"X", {"0", "1"}}});
  const Dataset ds = Dataset::from_rows(
      vars, {{0, 0}, {0, 0}, {0, 1}, {1, 1}, {1, 1}, {1, 1}});
  const std::vector<int> parents = {0};
  const FamilyCounts counts = family_counts(ds, 1, parents, FullTable{});

  const CptParams ml = fit_params(counts);
  // -2 log2(2/3) - log2(1/3) for P=a, -3 log2(1) for P=b.
  REQUIRE(dl_data(counts, ml) ==
          Catch::Approx(-2.0 * std::log2(2.0 / 3.0) - std::log2(1.0 / 3.0))
              .epsilon(1e-12));

  // N * H(X | P) equals the maximum-likelihood codelength.
  REQUIRE(conditional_entropy(counts) * 6.0 ==
          Catch::Approx(dl_data(counts, ml)).epsilon(1e-12));

  // A parameter vector with a zero where data exists costs infinitely.
  CptParams zero(2);
  zero.set(0, {1.0, 0.0});
  zero.set(1, {0.0, 1.0});
  REQUIRE(std::isinf(dl_data(counts, zero)));
  // But a zero where no data falls is free.
  CptParams benign(2);
  benign.set(0, {2.0 / 3.0, 1.0 / 3.0});
  benign.set(1, {0.0, 1.0});
  REQUIRE_FALSE(std::isinf(dl_data(counts, benign)));

  FamilyCounts empty;
  empty.child_card = 2;
  REQUIRE_THROWS_AS(conditional_entropy(empty), EmptyDatasetError);
}

TEST_CASE("maximum likelihood minimizes the data bits") {
  SplitMix64 rng(0xFEED);
  for (int trial = 0; trial < 25; ++trial) {
    const VariableTable vars = testutil::random_vars(rng, 4, 3);
    const Dataset ds = testutil::random_dataset(rng, vars, 50);
    const int child = testutil::rand_int(rng, 0, 3);
    const auto parents = testutil::random_parents(
        rng, 4, child, testutil::rand_int(rng, 0, 2));
    const auto kind = static_cast<CptKind>(rng.next() % 3);
    const LocalStructure ls = testutil::random_local(rng, vars, parents, kind);
    const FamilyCounts counts = family_counts(ds, child, parents, ls);
    const CptParams ml = fit_params(counts);
    const double best = dl_data(counts, ml);

    for (int p = 0; p < 8; ++p) {
      // Perturb every partition with random positive noise, renormalize.
      CptParams other(counts.child_card);
      for (std::uint64_t pid = 0; pid < counts.partitions; ++pid) {
        std::vector<double> dist(counts.child_card);
        double total = 0.0;
        for (double& d : dist) {
          d = 0.05 + rng.next_unit();
          total += d;
        }
        for (double& d : dist) d /= total;
        other.set(pid, std::move(dist));
      }
      REQUIRE(dl_data(counts, other) >= best - 1e-12);
    }
  }
}

TEST_CASE("more parents never increase the optimal data bits") {
  SplitMix64 rng(0xDA7A);
  for (int trial = 0; trial < 25; ++trial) {
    const VariableTable vars = testutil::random_vars(rng, 5, 3);
    const Dataset ds = testutil::random_dataset(rng, vars, 40);
    const int child = testutil::rand_int(rng, 0, 4);
    auto parents = testutil::random_parents(rng, 5, child, 3);
    std::vector<int> subset(parents.begin(), parents.begin() + 2);

    const auto sub = family_counts(ds, child, subset, FullTable{});
    const auto sup = family_counts(ds, child, parents, FullTable{});
    const double bits_sub = dl_data(sub, fit_params(sub));
    const double bits_sup = dl_data(sup, fit_params(sup));
    REQUIRE(bits_sup <= bits_sub + 1e-9);
  }
}

TEST_CASE("family scores match the reference implementation") {
  SplitMix64 rng(0x0AC1E5);
  for (int trial = 0; trial < 60; ++trial) {
    const VariableTable vars = testutil::random_vars(rng, 5, 3);
    const Dataset ds =
        testutil::random_dataset(rng, vars, testutil::rand_int(rng, 1, 120));
    const int child = testutil::rand_int(rng, 0, 4);
    const auto parents = testutil::random_parents(
        rng, 5, child, testutil::rand_int(rng, 0, 3));
    const auto kind = static_cast<CptKind>(rng.next() % 3);
    const LocalStructure ls = testutil::random_local(rng, vars, parents, kind);

    const FamilyScore score = family_score(ds, child, parents, ls);
    const oracle::FamilyBits ref = oracle::family_bits(ds, child, parents, ls);
    REQUIRE(score.structure_bits == Catch::Approx(ref.structure).margin(1e-9));
    REQUIRE(score.param_bits == Catch::Approx(ref.params).margin(1e-9));
    REQUIRE(score.data_bits == Catch::Approx(ref.data).margin(1e-9));
    REQUIRE(score.total_bits == Catch::Approx(ref.total()).margin(1e-9));
  }
}

TEST_CASE("full tables charge parameters for unobserved configurations") {
  VariableTable vars({{"P", {"a", "b"}}, {"Q", {"a", "b"}}, {"X", {"0", "1"}}});
  // Only one parent configuration ever appears.
  const Dataset ds = Dataset::from_rows(
      vars, {{0, 0, 0}, {0, 0, 1}, {0, 0, 0}, {0, 0, 1}});
  const FamilyScore score = family_score(ds, 2, {0, 1}, FullTable{});
  REQUIRE(score.param_bits ==
          Catch::Approx(0.5 * 4.0 * 1.0 * 2.0).epsilon(1e-12));  // m=4, N=4
  REQUIRE(score.data_bits == Catch::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("network score sums graph and family bits") {
  SplitMix64 rng(77);
  const BayesianNetwork target = testutil::collapse4_network();
  const Dataset ds = ancestral_sample(target, 300, 5);

  for (const auto& net :
       {testutil::collapse4_network(), testutil::collapse4_tabular(),
        testutil::collapse4_default()}) {
    const NetworkScore score = network_score(ds, net);
    REQUIRE(score.total_bits ==
            Catch::Approx(oracle::network_bits(ds, net)).margin(1e-9));
    REQUIRE(score.graph_bits ==
            Catch::Approx(dl_graph(net.dag)).epsilon(1e-12));
    double total = score.graph_bits;
    for (const auto& f : score.families) total += f.total_bits;
    REQUIRE(score.total_bits == Catch::Approx(total).epsilon(1e-12));
  }

  Dataset wrong = testutil::random_dataset(rng, testutil::random_vars(rng, 3),
                                           10);
  REQUIRE_THROWS_AS(network_score(wrong, target), SchemaMismatchError);
}

TEST_CASE("identical data terms leave representation choice to structure bits") {
  // With one explicit row per configuration minus one, a default table and
  // the full table induce the same partition when every config is explicit
  // except the last; their data bits coincide, structure bits differ.
  VariableTable vars({{"P", {"a", "b"}}, {"X", {"0", "1"}}});
  const Dataset ds = Dataset::from_rows(vars, {{0, 0}, {0, 1}, {1, 1}});
  DefaultTable dt;
  dt.rows.push_back({0});
  const FamilyScore full = family_score(ds, 1, {0}, FullTable{});
  const FamilyScore dflt = family_score(ds, 1, {0}, dt);
  REQUIRE(full.data_bits == Catch::Approx(dflt.data_bits).margin(1e-12));
  REQUIRE(full.structure_bits == 0.0);
  REQUIRE(dflt.structure_bits ==
          Catch::Approx(1.0 + 1.0).epsilon(1e-12));  // log2 2 + log2 C(2,1)
}
