#pragma once

// Non-iterative samplers: random vertex (RV), random edge (RE) and random
// vertex neighborhood (RVN). Each one keeps an element when its hash-derived
// value r in (0, 1] satisfies r <= s.

#include <cstdint>
#include <string>
#include <string_view>

#include "dataflow.hpp"
#include "graph.hpp"
#include "random.hpp"

namespace gsample {

enum class neighborhood_direction { incoming, outgoing, both };

inline neighborhood_direction parse_direction(std::string_view s) {
  if (s == "in" || s == "incoming") return neighborhood_direction::incoming;
  if (s == "out" || s == "outgoing") return neighborhood_direction::outgoing;
  if (s == "both") return neighborhood_direction::both;
  throw parameter_error("unknown neighborhood direction '" + std::string(s) + "'");
}

inline bool keep_decision(std::uint64_t element_id, std::uint64_t seed, sample_size s) noexcept {
  return unit_hash(seed, element_id) <= s.value();
}

inline graph random_vertex_sample(const execution_context& ctx, const graph& g, sample_size s,
                                  std::uint64_t seed) {
  auto kept = filter(ctx, g.vertices,
                     [&](const vertex_record& v) { return keep_decision(v.id, seed, s); });
  kept = map(ctx, kept, [](vertex_record v) {
    v.flags = v.flags | vertex_flag::sampled;
    return v;
  });
  auto kept_ids = map(ctx, kept, [](const vertex_record& v) { return v.id; });
  graph sampled{kept, induced_edges(ctx, g, kept_ids)};
  return remove_zero_degree(ctx, sampled);
}

inline graph random_edge_sample(const execution_context& ctx, const graph& g, sample_size s,
                                std::uint64_t seed) {
  auto kept_edges =
      filter(ctx, g.edges, [&](const edge_record& e) { return keep_decision(e.id, seed, s); });
  auto endpoints = distinct_keys(ctx, detail::endpoint_keys(ctx, kept_edges));
  auto endpoint_keyed = map(ctx, endpoints, [](vertex_id id) { return keyed<vertex_id, char>(id, 0); });
  auto vertices = join(ctx, detail::key_vertices(ctx, g.vertices), endpoint_keyed,
                       [](const auto& v, const auto&) { return v.second; });
  return {vertices, kept_edges};
}

namespace detail {

struct flagged_edge {
  edge_record edge;
  bool source_sampled = false;
  bool target_sampled = false;
};

}  // namespace detail

// Every vertex is flagged with probability s; an edge survives when its
// flagged endpoint lies on the requested side. Output vertices are the
// endpoints of surviving edges.
inline graph random_vertex_neighborhood_sample(const execution_context& ctx, const graph& g,
                                               sample_size s, std::uint64_t seed,
                                               neighborhood_direction dir) {
  using detail::flagged_edge;
  auto flags = map(ctx, g.vertices, [&](const vertex_record& v) {
    return keyed<vertex_id, bool>(v.id, keep_decision(v.id, seed, s));
  });
  auto by_source = map(ctx, g.edges, [](const edge_record& e) {
    return keyed<vertex_id, edge_record>(e.source, e);
  });
  auto with_source = join(ctx, by_source, flags, [](const auto& e, const auto& f) {
    return keyed<vertex_id, flagged_edge>(e.second.target, {e.second, f.second, false});
  });
  auto with_both = join(ctx, with_source, flags, [](const auto& e, const auto& f) {
    flagged_edge fe = e.second;
    fe.target_sampled = f.second;
    return fe;
  });
  const bool use_out = dir != neighborhood_direction::incoming;
  const bool use_in = dir != neighborhood_direction::outgoing;
  auto kept = filter(ctx, with_both, [=](const flagged_edge& fe) {
    return (use_out && fe.source_sampled) || (use_in && fe.target_sampled);
  });
  auto kept_edges = map(ctx, kept, [](const flagged_edge& fe) { return fe.edge; });

  auto endpoints = distinct_keys(ctx, detail::endpoint_keys(ctx, kept_edges));
  auto endpoint_keyed = map(ctx, endpoints, [](vertex_id id) { return keyed<vertex_id, char>(id, 0); });
  auto vertices = join(ctx, detail::key_vertices(ctx, g.vertices), endpoint_keyed,
                       [&](const auto& v, const auto&) {
                         vertex_record r = v.second;
                         if (keep_decision(r.id, seed, s)) r.flags = r.flags | vertex_flag::sampled;
                         return r;
                       });
  return remove_zero_degree(ctx, graph{vertices, kept_edges});
}

}  // namespace gsample
