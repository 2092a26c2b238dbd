#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "gsample/sampling.hpp"
#include "oracle.hpp"

using namespace gsample;

namespace {

bool has_zero_degree_vertex(const graph& g) {
  std::set<vertex_id> touched;
  for (const auto& e : g.edges.collect()) {
    touched.insert(e.source);
    touched.insert(e.target);
  }
  for (auto id : sorted_vertex_ids(g))
    if (!touched.count(id)) return true;
  return false;
}

std::vector<edge_id> edge_ids(const graph& g) {
  std::vector<edge_id> ids;
  for (const auto& e : g.edges.collect()) ids.push_back(e.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

bool subset(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Star: center 100 with out-edges to 1, 2, 3.
graph star(const execution_context& ctx) { return make_graph(ctx, {{100, 1}, {100, 2}, {100, 3}}); }

}  // namespace

TEST(KeepDecision, Boundaries) {
  for (std::uint64_t id : {0ULL, 1ULL, 12345ULL, ~0ULL}) {
    for (std::uint64_t seed : {0ULL, 7ULL, 99ULL}) {
      EXPECT_FALSE(keep_decision(id, seed, sample_size(0.0)));
      EXPECT_TRUE(keep_decision(id, seed, sample_size(1.0)));
    }
  }
}

TEST(KeepDecision, MarginalFrequencyMatchesSampleSize) {
  std::size_t kept = 0;
  const std::size_t n = 1'000'000;
  for (std::uint64_t id = 0; id < n; ++id) kept += keep_decision(id, 2024, sample_size(0.3)) ? 1 : 0;
  const double frac = static_cast<double>(kept) / static_cast<double>(n);
  EXPECT_GE(frac, 0.298);
  EXPECT_LE(frac, 0.302);
}

TEST(RandomVertexSample, BoundaryCases) {
  execution_context ctx(2);
  auto g = make_graph(ctx, std::vector<vertex_id>{1, 2, 3, 4}, {{0, 1, 2}, {1, 2, 3}});
  auto full = random_vertex_sample(ctx, g, sample_size(1.0), 5);
  EXPECT_EQ(sorted_vertex_ids(full), (std::vector<vertex_id>{1, 2, 3}));
  EXPECT_EQ(full.edge_count(), 2U);
  auto none = random_vertex_sample(ctx, g, sample_size(0.0), 5);
  EXPECT_EQ(none.vertex_count(), 0U);
  EXPECT_EQ(none.edge_count(), 0U);
}

TEST(RandomEdgeSample, BoundaryCases) {
  execution_context ctx(3);
  auto g = make_graph(ctx, std::vector<vertex_id>{1, 2, 3, 4}, {{0, 1, 2}, {1, 2, 3}});
  auto full = random_edge_sample(ctx, g, sample_size(1.0), 5);
  EXPECT_EQ(full.edge_count(), 2U);
  EXPECT_EQ(sorted_vertex_ids(full), (std::vector<vertex_id>{1, 2, 3}));
  auto none = random_edge_sample(ctx, g, sample_size(0.0), 5);
  EXPECT_EQ(none.vertex_count(), 0U);
  EXPECT_EQ(none.edge_count(), 0U);
}

TEST(RandomVertexNeighborhoodSample, StarOutgoing) {
  execution_context ctx(2);
  auto g = star(ctx);
  auto out = random_vertex_neighborhood_sample(ctx, g, sample_size(1.0), 1, neighborhood_direction::outgoing);
  EXPECT_EQ(out.vertex_count(), 4U);
  EXPECT_EQ(out.edge_count(), 3U);
}

TEST(RandomVertexNeighborhoodSample, StarCenterOnlyFlagged) {
  // Find a seed that flags the center but none of the leaves.
  const sample_size s(0.5);
  std::uint64_t seed = 0;
  for (;; ++seed) {
    if (keep_decision(100, seed, s) && !keep_decision(1, seed, s) && !keep_decision(2, seed, s) &&
        !keep_decision(3, seed, s)) {
      break;
    }
  }
  execution_context ctx(2);
  auto g = star(ctx);
  auto out = random_vertex_neighborhood_sample(ctx, g, s, seed, neighborhood_direction::outgoing);
  EXPECT_EQ(out.vertex_count(), 4U);
  EXPECT_EQ(out.edge_count(), 3U);
  auto in = random_vertex_neighborhood_sample(ctx, g, s, seed, neighborhood_direction::incoming);
  EXPECT_EQ(in.vertex_count(), 0U);
  EXPECT_EQ(in.edge_count(), 0U);
  auto both = random_vertex_neighborhood_sample(ctx, g, s, seed, neighborhood_direction::both);
  EXPECT_EQ(both.edge_count(), 3U);
}

TEST(RandomVertexNeighborhoodSample, ParsesDirection) {
  EXPECT_EQ(parse_direction("in"), neighborhood_direction::incoming);
  EXPECT_EQ(parse_direction("out"), neighborhood_direction::outgoing);
  EXPECT_EQ(parse_direction("both"), neighborhood_direction::both);
  EXPECT_THROW(parse_direction("up"), parameter_error);
}

TEST(Samplers, OutputsAreValidSamplesWithoutIsolatedVertices) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> sd(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto p = oracle::random_graph(rng);
    execution_context ctx(1 + trial % 4);
    auto g = oracle::to_graph(ctx, p);
    const sample_size s(sd(rng));
    const std::uint64_t seed = rng();
    const graph outs[] = {
        random_vertex_sample(ctx, g, s, seed),
        random_edge_sample(ctx, g, s, seed),
        random_vertex_neighborhood_sample(ctx, g, s, seed, neighborhood_direction::incoming),
        random_vertex_neighborhood_sample(ctx, g, s, seed, neighborhood_direction::outgoing),
        random_vertex_neighborhood_sample(ctx, g, s, seed, neighborhood_direction::both),
    };
    for (const auto& out : outs) {
      auto v = validate_sample(g, out);
      EXPECT_TRUE(v) << v.diagnostic;
      EXPECT_FALSE(has_zero_degree_vertex(out));
    }
  }
}

TEST(Samplers, DeterministicAcrossParallelism) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = oracle::random_graph(rng);
    std::vector<std::vector<edge_record>> ref;
    for (std::size_t par : {1, 2, 4, 8}) {
      execution_context ctx(par);
      auto g = oracle::to_graph(ctx, p);
      std::vector<std::vector<edge_record>> got = {
          sorted_edges(random_vertex_sample(ctx, g, sample_size(0.5), 3)),
          sorted_edges(random_edge_sample(ctx, g, sample_size(0.5), 3)),
          sorted_edges(random_vertex_neighborhood_sample(ctx, g, sample_size(0.2), 3,
                                                         neighborhood_direction::both)),
      };
      if (ref.empty()) {
        ref = got;
      } else {
        EXPECT_EQ(got, ref) << "P=" << par;
      }
    }
  }
}

TEST(Samplers, MonotoneInSampleSize) {
  std::mt19937_64 rng(51);
  execution_context ctx(3);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = oracle::to_graph(ctx, oracle::random_graph(rng));
    const std::uint64_t seed = rng();
    double a = std::uniform_real_distribution<double>(0, 1)(rng);
    double b = std::uniform_real_distribution<double>(0, 1)(rng);
    if (a > b) std::swap(a, b);
    EXPECT_TRUE(subset(sorted_vertex_ids(random_vertex_sample(ctx, g, sample_size(a), seed)),
                       sorted_vertex_ids(random_vertex_sample(ctx, g, sample_size(b), seed))));
    EXPECT_TRUE(subset(edge_ids(random_edge_sample(ctx, g, sample_size(a), seed)),
                       edge_ids(random_edge_sample(ctx, g, sample_size(b), seed))));
  }
}

TEST(Samplers, NeighborhoodBothContainsOutgoing) {
  std::mt19937_64 rng(61);
  execution_context ctx(2);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = oracle::to_graph(ctx, oracle::random_graph(rng));
    const std::uint64_t seed = rng();
    const sample_size s(0.3);
    auto both = edge_ids(random_vertex_neighborhood_sample(ctx, g, s, seed, neighborhood_direction::both));
    auto out = edge_ids(random_vertex_neighborhood_sample(ctx, g, s, seed, neighborhood_direction::outgoing));
    auto in = edge_ids(random_vertex_neighborhood_sample(ctx, g, s, seed, neighborhood_direction::incoming));
    EXPECT_TRUE(subset(out, both));
    EXPECT_TRUE(subset(in, both));
  }
}
