#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "dwlkit/generators.hpp"
#include "dwlkit/isomorphism.hpp"

using namespace dwlkit;

namespace {

std::vector<double> history(const Dat& d, NodeId i, NodeId j, double t) {
  const auto s = d.before(i, j, t);
  return {s.begin(), s.end()};
}

// Naive reference: try every permutation, compare every ordered pair's
// history before t and every feature row.
bool naive_isomorphic(const DynamicGraph& a, const DynamicGraph& b, double t) {
  if (a.node_count() != b.node_count()) return false;
  const std::size_t n = a.node_count();
  const Dat da(a), db(b);
  std::vector<NodeId> p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    bool ok = true;
    for (NodeId i = 0; i < n && ok; ++i) {
      ok = a.node_features().row(i) == b.node_features().row(p[i]);
      for (NodeId j = 0; j < n && ok; ++j) ok = history(da, i, j, t) == history(db, p[i], p[j], t);
    }
    if (ok) return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}

bool witness_valid(const DynamicGraph& a, const DynamicGraph& b, double t, const std::vector<NodeId>& w) {
  const Dat da(a), db(b);
  for (NodeId i = 0; i < a.node_count(); ++i) {
    for (NodeId j = 0; j < a.node_count(); ++j) {
      if (history(da, i, j, t) != history(db, w[i], w[j], t)) return false;
    }
  }
  return true;
}

}  // namespace

TEST(Oracle, IdenticalGraphs) {
  const DynamicGraph g = random_dynamic_graph(6, 9, 5.0, 1);
  const auto r = brute_force_isomorphic_until(g, g, 6.0);
  ASSERT_TRUE(r.isomorphic);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_TRUE(witness_valid(g, g, 6.0, *r.witness));
}

TEST(Oracle, DifferentTimestamps) {
  const DynamicGraph a(2, {{0, 1, 1.0, std::nullopt}});
  const DynamicGraph b(2, {{0, 1, 2.0, std::nullopt}});
  EXPECT_FALSE(brute_force_isomorphic_until(a, b, 3.0).isomorphic);
  // both events are in the future of t = 0.5
  EXPECT_TRUE(brute_force_isomorphic_until(a, b, 0.5).isomorphic);
}

TEST(Oracle, SixNodePairsAreNotPairIsomorphic) {
  using namespace six_node;
  const DynamicGraph g = six_node_graph();
  EXPECT_FALSE(brute_force_tuples_isomorphic_until(g, {A, C}, g, {A, D}, t4).isomorphic);
  EXPECT_TRUE(brute_force_tuples_isomorphic_until(g, {A, C}, g, {F, D}, t4).isomorphic);
  EXPECT_TRUE(brute_force_tuples_isomorphic_until(g, {C}, g, {D}, t4).isomorphic);
}

TEST(Oracle, NodeFeaturesMustMatch) {
  Matrix xa(2, 1), xb(2, 1);
  xa << 1, 2;
  xb << 1, 3;
  const DynamicGraph a(2, {{0, 1, 1.0, std::nullopt}}, xa);
  const DynamicGraph b(2, {{0, 1, 1.0, std::nullopt}}, xb);
  EXPECT_FALSE(brute_force_isomorphic_until(a, b, 2.0).isomorphic);
  Matrix xc(2, 1);
  xc << 2, 1;
  const DynamicGraph c(2, {{0, 1, 1.0, std::nullopt}}, xc);
  const auto r = brute_force_isomorphic_until(a, c, 2.0);
  ASSERT_TRUE(r.isomorphic);
  EXPECT_EQ(*r.witness, (std::vector<NodeId>{1, 0}));
}

TEST(Oracle, SizeBound) {
  const DynamicGraph g(9, {});
  EXPECT_THROW(brute_force_isomorphic_until(g, g, 1.0), std::length_error);
  EXPECT_NO_THROW(brute_force_isomorphic_until(g, g, 1.0, 9));
}

TEST(Oracle, AgreesWithNaiveEnumerationAndIsSymmetric) {
  std::mt19937_64 rng(11);
  int iso_count = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const DynamicGraph a = small_random_graph(rng, 5, 7, 3);
    const DynamicGraph b = trial % 2 ? permute_graph(a, random_permutation(a.node_count(), rng))
                                     : small_random_graph(rng, 5, 7, 3);
    const double t = static_cast<double>(1 + rng() % 4);
    const auto ab = brute_force_isomorphic_until(a, b, t);
    const auto ba = brute_force_isomorphic_until(b, a, t);
    EXPECT_EQ(ab.isomorphic, naive_isomorphic(a, b, t));
    EXPECT_EQ(ab.isomorphic, ba.isomorphic);
    if (ab.isomorphic) {
      ++iso_count;
      EXPECT_TRUE(witness_valid(a, b, t, *ab.witness));
    }
  }
  EXPECT_GT(iso_count, 100);
}

TEST(Oracle, RelabelingInvariance) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const DynamicGraph a = random_dynamic_graph(7, 12, 4.0, static_cast<std::uint64_t>(trial));
    const DynamicGraph b = permute_graph(a, random_permutation(7, rng));
    for (double t : {0.5, 2.0, 5.0}) EXPECT_TRUE(brute_force_isomorphic_until(a, b, t).isomorphic);
  }
}
