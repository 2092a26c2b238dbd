#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "gsample/graph.hpp"
#include "oracle.hpp"

using namespace gsample;

namespace {

std::vector<std::pair<vertex_id, vertex_id>> edge_pairs(const dataset<edge_record>& d) {
  std::vector<std::pair<vertex_id, vertex_id>> out;
  for (const auto& e : d.collect()) out.emplace_back(e.source, e.target);
  std::sort(out.begin(), out.end());
  return out;
}

graph triangle(const execution_context& ctx) { return make_graph(ctx, {{1, 2}, {2, 3}, {3, 1}}); }

}  // namespace

TEST(ValidateSample, AcceptsSubgraphs) {
  execution_context ctx(2);
  auto g = triangle(ctx);
  EXPECT_TRUE(validate_sample(g, g));
  EXPECT_TRUE(validate_sample(g, graph{}));
  auto sub = make_graph(ctx, std::vector<vertex_id>{1, 2}, {{0, 1, 2}});
  EXPECT_TRUE(validate_sample(g, sub));
}

TEST(ValidateSample, RejectsDanglingEdge) {
  execution_context ctx(1);
  auto g = triangle(ctx);
  auto bad = make_graph(ctx, std::vector<vertex_id>{1}, {{0, 1, 2}});
  auto r = validate_sample(g, bad);
  EXPECT_FALSE(r);
  EXPECT_NE(r.diagnostic.find("edge 0"), std::string::npos);
}

TEST(ValidateSample, RejectsForeignElements) {
  execution_context ctx(1);
  auto g = triangle(ctx);
  EXPECT_FALSE(validate_sample(g, make_graph(ctx, std::vector<vertex_id>{1, 9}, {})));
  auto r = validate_sample(g, make_graph(ctx, std::vector<vertex_id>{1, 2}, {{77, 1, 2}}));
  EXPECT_FALSE(r);
  EXPECT_NE(r.diagnostic.find("77"), std::string::npos);
  // Same id, different endpoints.
  EXPECT_FALSE(validate_sample(g, make_graph(ctx, std::vector<vertex_id>{1, 2}, {{0, 2, 1}})));
}

TEST(ValidateSample, SelfLoopNeedsOnlyOneVertex) {
  execution_context ctx(1);
  auto g = make_graph(ctx, {{4, 4}, {4, 5}});
  EXPECT_TRUE(validate_sample(g, make_graph(ctx, std::vector<vertex_id>{4}, {{0, 4, 4}})));
}

TEST(RemoveZeroDegree, DropsIsolatedVertices) {
  for (std::size_t p : {1, 3}) {
    execution_context ctx(p);
    auto g = make_graph(ctx, std::vector<vertex_id>{1, 2, 3}, {{0, 1, 2}});
    auto r = remove_zero_degree(ctx, g);
    EXPECT_EQ(sorted_vertex_ids(r), (std::vector<vertex_id>{1, 2}));
    EXPECT_EQ(r.edge_count(), 1U);

    auto edgeless = make_graph(ctx, std::vector<vertex_id>{1, 2, 3}, {});
    auto e = remove_zero_degree(ctx, edgeless);
    EXPECT_EQ(e.vertex_count(), 0U);
    EXPECT_EQ(e.edge_count(), 0U);

    auto full = triangle(ctx);
    auto same = remove_zero_degree(ctx, full);
    EXPECT_EQ(sorted_vertex_ids(same), sorted_vertex_ids(full));
    EXPECT_EQ(sorted_edges(same), sorted_edges(full));
  }
}

TEST(InducedEdges, KeepsEdgesInsideVertexSet) {
  execution_context ctx(2);
  auto g = triangle(ctx);
  auto keep = [&](std::vector<vertex_id> ids) { return make_dataset(ctx, ids); };
  EXPECT_EQ(edge_pairs(induced_edges(ctx, g, keep({1, 2}))),
            (std::vector<std::pair<vertex_id, vertex_id>>{{1, 2}}));
  EXPECT_EQ(edge_pairs(induced_edges(ctx, g, keep({1, 2, 3}))), edge_pairs(g.edges));
  EXPECT_TRUE(induced_edges(ctx, g, keep({})).empty());
}

TEST(InducedEdges, AllVerticesGiveAllEdges) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    auto p = oracle::random_graph(rng);
    execution_context ctx(1 + i % 4);
    auto g = oracle::to_graph(ctx, p);
    auto all = map(ctx, g.vertices, [](const vertex_record& v) { return v.id; });
    auto got = induced_edges(ctx, g, all).collect();
    auto want = g.edges.collect();
    auto by_id = [](auto& a, auto& b) { return a.id < b.id; };
    std::sort(got.begin(), got.end(), by_id);
    std::sort(want.begin(), want.end(), by_id);
    EXPECT_EQ(got, want);
  }
}

TEST(DegreeDataset, Modes) {
  execution_context ctx(2);
  auto g = make_graph(ctx, {{1, 2}});
  using rec = keyed<vertex_id, std::uint64_t>;
  auto sorted = [](auto d) {
    auto v = d.collect();
    std::sort(v.begin(), v.end());
    return v;
  };
  EXPECT_EQ(sorted(degree_dataset(ctx, g, degree_mode::out)), (std::vector<rec>{{1, 1}, {2, 0}}));
  EXPECT_EQ(sorted(degree_dataset(ctx, g, degree_mode::in)), (std::vector<rec>{{1, 0}, {2, 1}}));
  EXPECT_EQ(sorted(degree_dataset(ctx, g, degree_mode::total)), (std::vector<rec>{{1, 1}, {2, 1}}));
  EXPECT_THROW(parse_degree_mode("sideways"), parameter_error);
  EXPECT_EQ(parse_degree_mode("total"), degree_mode::total);
}

TEST(DegreeDataset, TotalSumsToTwiceEdgeCount) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 30; ++i) {
    auto p = oracle::random_graph(rng);
    execution_context ctx(1 + i % 3);
    auto g = oracle::to_graph(ctx, p);
    std::uint64_t sum = 0;
    auto d = degree_dataset(ctx, g, degree_mode::total);
    EXPECT_EQ(count(d), g.vertex_count());
    for (const auto& [id, deg] : d.collect()) sum += deg;
    EXPECT_EQ(sum, 2 * g.edge_count());
    const auto want = oracle::total_degrees(p);
    for (const auto& [id, deg] : d.collect()) EXPECT_EQ(deg, want.at(id));
  }
}

TEST(SampleSize, RangeChecked) {
  EXPECT_NO_THROW(sample_size(0.0));
  EXPECT_NO_THROW(sample_size(1.0));
  EXPECT_THROW(sample_size(-0.01), parameter_error);
  EXPECT_THROW(sample_size(1.5), parameter_error);
}
