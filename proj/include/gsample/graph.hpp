#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "dataflow.hpp"
#include "errors.hpp"

namespace gsample {

using vertex_id = std::uint64_t;
using edge_id = std::uint64_t;

enum class vertex_flag : std::uint8_t {
  none = 0,
  sampled = 1U << 0U,
  visited = 1U << 1U,
};

constexpr vertex_flag operator|(vertex_flag a, vertex_flag b) noexcept {
  return static_cast<vertex_flag>(static_cast<std::uint8_t>(a) | static_cast<std::uint8_t>(b));
}

constexpr bool has_flag(vertex_flag set, vertex_flag f) noexcept {
  return (static_cast<std::uint8_t>(set) & static_cast<std::uint8_t>(f)) != 0;
}

struct vertex_record {
  vertex_id id = 0;
  vertex_flag flags = vertex_flag::none;

  friend bool operator==(const vertex_record&, const vertex_record&) = default;
};

struct edge_record {
  edge_id id = 0;
  vertex_id source = 0;
  vertex_id target = 0;

  friend bool operator==(const edge_record&, const edge_record&) = default;
};

// Directed multigraph over two partitioned datasets. Self-loops and parallel
// edges (distinct edge ids) are allowed.
struct graph {
  dataset<vertex_record> vertices;
  dataset<edge_record> edges;

  std::size_t vertex_count() const noexcept { return vertices.size(); }
  std::size_t edge_count() const noexcept { return edges.size(); }
};

// Fraction s in [0, 1] of elements a sampler should retain.
class sample_size {
 public:
  constexpr sample_size() = default;
  explicit sample_size(double s) : value_(s) {
    if (!(s >= 0.0 && s <= 1.0)) {
      std::ostringstream msg;
      msg << "sample size must lie in [0, 1], got " << s;
      throw parameter_error(msg.str());
    }
  }
  constexpr double value() const noexcept { return value_; }

 private:
  double value_ = 0.0;
};

// Builds a graph from plain id lists. Vertices are placed by id mod P and
// edges by edge id mod P.
inline graph make_graph(const execution_context& ctx, const std::vector<vertex_id>& vertex_ids,
                        const std::vector<edge_record>& edges) {
  std::vector<vertex_record> vs;
  vs.reserve(vertex_ids.size());
  for (auto id : vertex_ids) vs.push_back({id, vertex_flag::none});
  return {make_dataset_by(ctx, vs, [](const vertex_record& v) { return v.id; }),
          make_dataset_by(ctx, edges, [](const edge_record& e) { return e.id; })};
}

// Vertices are the distinct endpoints; edge ids are assigned 0..n-1.
inline graph make_graph(const execution_context& ctx,
                        const std::vector<std::pair<vertex_id, vertex_id>>& pairs) {
  std::vector<edge_record> edges;
  std::vector<vertex_id> ids;
  edges.reserve(pairs.size());
  ids.reserve(2 * pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    edges.push_back({i, pairs[i].first, pairs[i].second});
    ids.push_back(pairs[i].first);
    ids.push_back(pairs[i].second);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return make_graph(ctx, ids, edges);
}

inline std::vector<vertex_id> sorted_vertex_ids(const graph& g) {
  std::vector<vertex_id> ids;
  ids.reserve(g.vertex_count());
  for (const auto& part : g.vertices.partitions()) {
    for (const auto& v : part) ids.push_back(v.id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

inline std::vector<edge_record> sorted_edges(const graph& g) {
  auto edges = g.edges.collect();
  std::sort(edges.begin(), edges.end(), [](const edge_record& a, const edge_record& b) {
    return std::tie(a.source, a.target, a.id) < std::tie(b.source, b.target, b.id);
  });
  return edges;
}

struct validation_result {
  bool ok = true;
  std::string diagnostic;

  explicit operator bool() const noexcept { return ok; }
};

// Checks the three graph-sample constraints: V_S is a subset of V, E_S is a
// subset of E (matched by edge id, endpoints must agree), and every sampled
// edge has both endpoints in V_S. The diagnostic names the smallest
// violating id.
inline validation_result validate_sample(const graph& original, const graph& sample) {
  const auto v = sorted_vertex_ids(original);
  const auto vs = sorted_vertex_ids(sample);
  for (auto id : vs) {
    if (!std::binary_search(v.begin(), v.end(), id)) {
      return {false, "sampled vertex " + std::to_string(id) + " is not in the original graph"};
    }
  }

  auto by_id = [](const edge_record& a, const edge_record& b) { return a.id < b.id; };
  auto e = original.edges.collect();
  auto es = sample.edges.collect();
  std::sort(e.begin(), e.end(), by_id);
  std::sort(es.begin(), es.end(), by_id);
  for (const auto& edge : es) {
    auto it = std::lower_bound(e.begin(), e.end(), edge, by_id);
    if (it == e.end() || it->id != edge.id) {
      return {false, "sampled edge " + std::to_string(edge.id) + " is not in the original graph"};
    }
    if (it->source != edge.source || it->target != edge.target) {
      return {false, "sampled edge " + std::to_string(edge.id) + " has different endpoints"};
    }
  }
  for (const auto& edge : es) {
    if (!std::binary_search(vs.begin(), vs.end(), edge.source) ||
        !std::binary_search(vs.begin(), vs.end(), edge.target)) {
      return {false, "sampled edge " + std::to_string(edge.id) +
                         " has an endpoint outside the sampled vertex set"};
    }
  }
  return {};
}

namespace detail {

inline dataset<keyed<vertex_id, char>> endpoint_keys(const execution_context& ctx,
                                                     const dataset<edge_record>& edges) {
  return flat_map<keyed<vertex_id, char>>(ctx, edges, [](const edge_record& e, auto&& emit) {
    emit({e.source, 0});
    if (e.target != e.source) emit({e.target, 0});
  });
}

inline dataset<keyed<vertex_id, vertex_record>> key_vertices(const execution_context& ctx,
                                                             const dataset<vertex_record>& vs) {
  return map(ctx, vs, [](const vertex_record& v) { return keyed<vertex_id, vertex_record>(v.id, v); });
}

}  // namespace detail

// Keeps the vertices that occur as source or target of some edge.
inline graph remove_zero_degree(const execution_context& ctx, const graph& g) {
  auto touched = distinct_keys(ctx, detail::endpoint_keys(ctx, g.edges));
  auto touched_keyed = map(ctx, touched, [](vertex_id id) { return keyed<vertex_id, char>(id, 0); });
  auto vertices = join(ctx, detail::key_vertices(ctx, g.vertices), touched_keyed,
                       [](const auto& v, const auto&) { return v.second; });
  return {vertices, g.edges};
}

// Edges whose source and target both occur in kept_vertices, computed as a
// join on the source followed by a join on the target.
inline dataset<edge_record> induced_edges(const execution_context& ctx, const graph& g,
                                          const dataset<vertex_id>& kept_vertices) {
  auto kept = map(ctx, kept_vertices, [](vertex_id id) { return keyed<vertex_id, char>(id, 0); });
  auto by_source =
      map(ctx, g.edges, [](const edge_record& e) { return keyed<vertex_id, edge_record>(e.source, e); });
  auto source_kept = join(ctx, by_source, kept, [](const auto& e, const auto&) {
    return keyed<vertex_id, edge_record>(e.second.target, e.second);
  });
  return join(ctx, source_kept, kept, [](const auto& e, const auto&) { return e.second; });
}

enum class degree_mode { in, out, total };

inline degree_mode parse_degree_mode(std::string_view s) {
  if (s == "in") return degree_mode::in;
  if (s == "out") return degree_mode::out;
  if (s == "total") return degree_mode::total;
  throw parameter_error("unknown degree mode '" + std::string(s) + "'");
}

// One (vertex id, degree) record per vertex, zero-degree vertices included.
inline dataset<keyed<vertex_id, std::uint64_t>> degree_dataset(const execution_context& ctx,
                                                               const graph& g, degree_mode mode) {
  using rec = keyed<vertex_id, std::uint64_t>;
  if (mode != degree_mode::in && mode != degree_mode::out && mode != degree_mode::total) {
    throw parameter_error("unknown degree mode");
  }
  auto ones = flat_map<rec>(ctx, g.edges, [mode](const edge_record& e, auto&& emit) {
    if (mode != degree_mode::in) emit({e.source, 1});
    if (mode != degree_mode::out) emit({e.target, 1});
  });
  auto zeros = map(ctx, g.vertices, [](const vertex_record& v) { return rec(v.id, 0); });
  return reduce_by_key(ctx, concat(zeros, ones), std::plus<>{});
}

}  // namespace gsample
