#pragma once

// Graph metrics used to judge sample quality.
//
// |E|, degrees and density are taken on the stored directed multigraph.
// Triangles, wedges and neighborhoods are taken on the underlying undirected
// simple graph (directions dropped, self-loops and parallel edges collapsed).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dataflow.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "pregel.hpp"

namespace gsample {

// Denominator used for the local clustering coefficient: d(d-1) counts
// ordered neighbor pairs, d(d-1)/2 unordered ones.
enum class local_cc_mode { directed, undirected };

inline local_cc_mode parse_local_cc_mode(std::string_view s) {
  if (s == "directed") return local_cc_mode::directed;
  if (s == "undirected") return local_cc_mode::undirected;
  throw parameter_error("unknown local clustering mode '" + std::string(s) + "'");
}

// Underlying undirected simple graph in CSR form over positions in the
// ascending vertex id order. dirs[k] records which directions of the pair
// are stored: bit 0 for lower id -> higher id, bit 1 for the reverse.
struct simple_graph {
  std::vector<vertex_id> ids;
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> neighbors;
  std::vector<std::uint8_t> dirs;

  std::size_t vertex_count() const noexcept { return ids.size(); }
  std::size_t degree(std::size_t v) const noexcept { return offsets[v + 1] - offsets[v]; }
  std::uint64_t edge_count() const noexcept { return neighbors.size() / 2; }
};

namespace detail {

inline std::uint32_t dense_index(const std::vector<vertex_id>& ids, vertex_id id) {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) {
    throw parameter_error("edge endpoint " + std::to_string(id) + " is not a vertex");
  }
  return static_cast<std::uint32_t>(it - ids.begin());
}

inline int stored_directions(std::uint8_t bits) noexcept { return (bits & 1) + ((bits >> 1) & 1); }

}  // namespace detail

inline simple_graph build_simple_graph(const execution_context& ctx, const graph& g) {
  using pair_key = std::pair<std::uint32_t, std::uint32_t>;
  simple_graph sg;
  sg.ids = sorted_vertex_ids(g);
  const auto& ids = sg.ids;

  auto pairs = flat_map<keyed<pair_key, std::uint8_t>>(ctx, g.edges, [&](const edge_record& e, auto&& emit) {
    if (e.source == e.target) return;
    const auto s = detail::dense_index(ids, e.source);
    const auto t = detail::dense_index(ids, e.target);
    if (s < t) {
      emit({{s, t}, std::uint8_t{1}});
    } else {
      emit({{t, s}, std::uint8_t{2}});
    }
  });
  auto merged = reduce_by_key(ctx, pairs, [](std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>(a | b);
  });

  const std::size_t n = ids.size();
  sg.offsets.assign(n + 1, 0);
  for (const auto& part : merged.partitions()) {
    for (const auto& [k, bits] : part) {
      ++sg.offsets[k.first + 1];
      ++sg.offsets[k.second + 1];
    }
  }
  for (std::size_t i = 0; i < n; ++i) sg.offsets[i + 1] += sg.offsets[i];
  sg.neighbors.resize(sg.offsets[n]);
  sg.dirs.resize(sg.offsets[n]);
  auto pos = sg.offsets;
  for (const auto& part : merged.partitions()) {
    for (const auto& [k, bits] : part) {
      sg.neighbors[pos[k.first]] = k.second;
      sg.dirs[pos[k.first]++] = bits;
      sg.neighbors[pos[k.second]] = k.first;
      sg.dirs[pos[k.second]++] = bits;
    }
  }
  ctx.parallel_for(ctx.parallelism(), [&](std::size_t p) {
    std::vector<std::pair<std::uint32_t, std::uint8_t>> tmp;
    for (std::size_t v = p; v < n; v += ctx.parallelism()) {
      const auto b = sg.offsets[v], e = sg.offsets[v + 1];
      tmp.clear();
      for (auto k = b; k < e; ++k) tmp.emplace_back(sg.neighbors[k], sg.dirs[k]);
      std::sort(tmp.begin(), tmp.end());
      for (auto k = b; k < e; ++k) {
        sg.neighbors[k] = tmp[k - b].first;
        sg.dirs[k] = tmp[k - b].second;
      }
    }
  });
  return sg;
}

struct triangle_stats {
  std::uint64_t triangles = 0;
  // Per vertex (ascending id order): triangles through the vertex, and the
  // number of stored directed neighbor-to-neighbor links closing them.
  std::vector<std::uint64_t> per_vertex;
  std::vector<std::uint64_t> per_vertex_directed;
};

// Each triangle is found exactly once, at its lowest-ranked vertex under the
// (degree, id) order, by intersecting forward neighbor lists.
inline triangle_stats count_triangles(const execution_context& ctx, const simple_graph& sg) {
  const std::size_t n = sg.vertex_count();
  auto ranks_before = [&](std::uint32_t a, std::uint32_t b) {
    const auto da = sg.degree(a), db = sg.degree(b);
    return da != db ? da < db : a < b;
  };

  struct forward_entry {
    std::uint32_t vertex;
    std::uint8_t multiplicity;
  };
  std::vector<std::size_t> fwd_offsets(n + 1, 0);
  for (std::uint32_t v = 0; v < n; ++v) {
    for (auto k = sg.offsets[v]; k < sg.offsets[v + 1]; ++k) {
      if (ranks_before(v, sg.neighbors[k])) ++fwd_offsets[v + 1];
    }
  }
  for (std::size_t i = 0; i < n; ++i) fwd_offsets[i + 1] += fwd_offsets[i];
  // Forward lists are filtered subsequences of the ascending adjacency, so
  // they are ascending too, which the merge intersection below relies on.
  std::vector<forward_entry> fwd(fwd_offsets[n]);
  ctx.parallel_for(ctx.parallelism(), [&](std::size_t p) {
    for (std::size_t v = p; v < n; v += ctx.parallelism()) {
      auto out = fwd_offsets[v];
      for (auto k = sg.offsets[v]; k < sg.offsets[v + 1]; ++k) {
        const auto u = sg.neighbors[k];
        if (ranks_before(static_cast<std::uint32_t>(v), u)) {
          fwd[out++] = {u, static_cast<std::uint8_t>(detail::stored_directions(sg.dirs[k]))};
        }
      }
    }
  });

  triangle_stats st;
  st.per_vertex.assign(n, 0);
  st.per_vertex_directed.assign(n, 0);
  std::vector<std::uint64_t> partial(ctx.parallelism(), 0);
  ctx.parallel_for(ctx.parallelism(), [&](std::size_t p) {
    auto bump = [&](std::vector<std::uint64_t>& vec, std::size_t i, std::uint64_t by) {
      std::atomic_ref<std::uint64_t>(vec[i]).fetch_add(by, std::memory_order_relaxed);
    };
    std::uint64_t local = 0;
    for (std::size_t u = p; u < n; u += ctx.parallelism()) {
      const auto ub = fwd_offsets[u], ue = fwd_offsets[u + 1];
      for (auto k = ub; k < ue; ++k) {
        const auto v = fwd[k].vertex;
        const auto m_uv = fwd[k].multiplicity;
        auto i = ub, j = fwd_offsets[v];
        const auto je = fwd_offsets[v + 1];
        while (i < ue && j < je) {
          if (fwd[i].vertex < fwd[j].vertex) {
            ++i;
          } else if (fwd[j].vertex < fwd[i].vertex) {
            ++j;
          } else {
            const auto w = fwd[i].vertex;
            ++local;
            bump(st.per_vertex, u, 1);
            bump(st.per_vertex, v, 1);
            bump(st.per_vertex, w, 1);
            bump(st.per_vertex_directed, u, fwd[j].multiplicity);  // v-w
            bump(st.per_vertex_directed, v, fwd[i].multiplicity);  // u-w
            bump(st.per_vertex_directed, w, m_uv);
            ++i;
            ++j;
          }
        }
      }
    }
    partial[p] = local;
  });
  st.triangles = std::accumulate(partial.begin(), partial.end(), std::uint64_t{0});
  return st;
}

inline double density(const graph& g) {
  const auto n = static_cast<double>(g.vertex_count());
  if (g.vertex_count() < 2) throw undefined_metric("density needs at least two vertices");
  return static_cast<double>(g.edge_count()) / (n * (n - 1.0));
}

inline std::uint64_t triangle_count(const execution_context& ctx, const graph& g) {
  return count_triangles(ctx, build_simple_graph(ctx, g)).triangles;
}

inline std::uint64_t wedge_count(const simple_graph& sg) {
  std::uint64_t w = 0;
  for (std::size_t v = 0; v < sg.vertex_count(); ++v) {
    const std::uint64_t d = sg.degree(v);
    if (d >= 2) w += d * (d - 1) / 2;
  }
  return w;
}

inline double global_clustering(const simple_graph& sg, const triangle_stats& t) {
  const auto w = wedge_count(sg);
  if (w == 0) throw undefined_metric("global clustering needs at least one wedge");
  return 3.0 * static_cast<double>(t.triangles) / static_cast<double>(w);
}

inline double global_clustering(const execution_context& ctx, const graph& g) {
  const auto sg = build_simple_graph(ctx, g);
  return global_clustering(sg, count_triangles(ctx, sg));
}

// Per-vertex local clustering in ascending id order; vertices with fewer
// than two neighbors get 0.
inline std::vector<double> local_clustering(const simple_graph& sg, const triangle_stats& t,
                                            local_cc_mode mode) {
  std::vector<double> cc(sg.vertex_count(), 0.0);
  for (std::size_t v = 0; v < sg.vertex_count(); ++v) {
    const auto d = static_cast<double>(sg.degree(v));
    if (sg.degree(v) < 2) continue;
    if (mode == local_cc_mode::directed) {
      cc[v] = static_cast<double>(t.per_vertex_directed[v]) / (d * (d - 1.0));
    } else {
      cc[v] = static_cast<double>(t.per_vertex[v]) / (d * (d - 1.0) / 2.0);
    }
  }
  return cc;
}

inline double avg_local_clustering(const simple_graph& sg, const triangle_stats& t,
                                   local_cc_mode mode) {
  if (sg.vertex_count() == 0) throw undefined_metric("local clustering of an empty graph");
  const auto cc = local_clustering(sg, t, mode);
  double sum = 0.0;
  for (double c : cc) sum += c;
  return sum / static_cast<double>(cc.size());
}

inline double avg_local_clustering(const execution_context& ctx, const graph& g,
                                   local_cc_mode mode = local_cc_mode::directed) {
  const auto sg = build_simple_graph(ctx, g);
  return avg_local_clustering(sg, count_triangles(ctx, sg), mode);
}

namespace detail {

// Min-label propagation over both edge directions. Labels settle at the
// barrier so a change is forwarded in the very next superstep.
struct min_label_program {
  struct state {
    vertex_id label = 0;
    bool changed = true;
  };
  using state_type = state;
  using message_type = vertex_id;

  state init(vertex_id v) const { return {v, true}; }

  void compute(vertex_context<state, vertex_id>& c) const {
    auto& st = c.state();
    if (st.changed) {
      for (const auto& e : c.out_edges()) {
        if (e.neighbor != c.id()) c.send(e.neighbor, st.label);
      }
      for (const auto& e : c.in_edges()) {
        if (e.neighbor != c.id()) c.send(e.neighbor, st.label);
      }
      st.changed = false;
    }
    c.vote_to_halt();
  }

  void deliver(delivery_context<state, vertex_id>& d) const {
    auto& st = d.state();
    for (const auto& m : d.inbox()) {
      if (m.payload < st.label) {
        st.label = m.payload;
        st.changed = true;
      }
    }
  }
};

}  // namespace detail

// Weakly connected component labels (smallest member id), ascending id order.
inline bsp_result<detail::min_label_program::state> wcc_labels(const execution_context& ctx,
                                                               const graph& g,
                                                               std::size_t max_supersteps = 0) {
  bsp_options opts;
  opts.max_supersteps = max_supersteps;
  return run_bsp(ctx, g, detail::min_label_program{}, opts);
}

inline std::uint64_t wcc_count(const execution_context& ctx, const graph& g) {
  auto r = wcc_labels(ctx, g);
  if (!r.converged) throw bsp_error("connected components did not converge");
  std::uint64_t roots = 0;
  for (std::size_t i = 0; i < r.ids.size(); ++i) roots += r.states[i].label == r.ids[i] ? 1 : 0;
  return roots;
}

// Sequential union-find reference for wcc_count.
inline std::uint64_t wcc_count_union_find(const graph& g) {
  const auto ids = sorted_vertex_ids(g);
  std::vector<std::uint32_t> parent(ids.size());
  std::iota(parent.begin(), parent.end(), 0U);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::uint64_t components = ids.size();
  for (const auto& part : g.edges.partitions()) {
    for (const auto& e : part) {
      auto a = find(detail::dense_index(ids, e.source));
      auto b = find(detail::dense_index(ids, e.target));
      if (a != b) {
        parent[std::max(a, b)] = std::min(a, b);
        --components;
      }
    }
  }
  return components;
}

struct degree_summary {
  double average = 0.0;
  std::uint64_t min = 0;
  std::uint64_t max = 0;
};

// Total (in + out) degree statistics over the stored edges.
inline degree_summary degree_stats(const execution_context& ctx, const graph& g) {
  if (g.vertex_count() == 0) throw undefined_metric("degree statistics of an empty graph");
  auto degrees = degree_dataset(ctx, g, degree_mode::total);
  degree_summary s;
  s.min = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t sum = 0;
  for (const auto& part : degrees.partitions()) {
    for (const auto& [id, d] : part) {
      s.min = std::min(s.min, d);
      s.max = std::max(s.max, d);
      sum += d;
    }
  }
  s.average = static_cast<double>(sum) / static_cast<double>(g.vertex_count());
  return s;
}

template <class T>
struct metric {
  std::optional<T> value;
  std::string reason;  // why value is absent

  bool has_value() const noexcept { return value.has_value(); }
  friend bool operator==(const metric&, const metric&) = default;
};

struct metrics_report {
  metric<std::uint64_t> vertex_count;
  metric<std::uint64_t> edge_count;
  metric<double> density;
  metric<std::uint64_t> triangles;
  metric<double> global_cc;
  metric<double> avg_local_cc;
  metric<std::uint64_t> wcc_count;
  metric<double> d_avg;
  metric<std::uint64_t> d_min;
  metric<std::uint64_t> d_max;

  friend bool operator==(const metrics_report&, const metrics_report&) = default;
};

// Calls f(name, field) for every report field in canonical order.
template <class Report, class F>
void for_each_metric(Report& r, F&& f) {
  f("vertex_count", r.vertex_count);
  f("edge_count", r.edge_count);
  f("density", r.density);
  f("triangles", r.triangles);
  f("global_cc", r.global_cc);
  f("avg_local_cc", r.avg_local_cc);
  f("wcc_count", r.wcc_count);
  f("d_avg", r.d_avg);
  f("d_min", r.d_min);
  f("d_max", r.d_max);
}

struct report_options {
  bool skip_heavy = false;  // triangles and clustering coefficients
  local_cc_mode cc_mode = local_cc_mode::directed;
};

inline metrics_report metrics_report_of(const execution_context& ctx, const graph& g,
                                        const report_options& opts = {}) {
  metrics_report r;
  if (g.vertex_count() == 0) {
    for_each_metric(r, [](std::string_view, auto& m) { m.reason = "empty graph"; });
    return r;
  }
  auto guarded = [](auto& field, auto&& compute) {
    try {
      field.value = compute();
    } catch (const undefined_metric& e) {
      field.reason = e.what();
    }
  };

  r.vertex_count.value = g.vertex_count();
  r.edge_count.value = g.edge_count();
  guarded(r.density, [&] { return density(g); });

  if (opts.skip_heavy) {
    r.triangles.reason = r.global_cc.reason = r.avg_local_cc.reason = "skipped";
  } else {
    const auto sg = build_simple_graph(ctx, g);
    const auto t = count_triangles(ctx, sg);
    r.triangles.value = t.triangles;
    guarded(r.global_cc, [&] { return global_clustering(sg, t); });
    guarded(r.avg_local_cc, [&] { return avg_local_clustering(sg, t, opts.cc_mode); });
  }

  r.wcc_count.value = wcc_count(ctx, g);
  const auto deg = degree_stats(ctx, g);
  r.d_avg.value = deg.average;
  r.d_min.value = deg.min;
  r.d_max.value = deg.max;
  return r;
}

struct report_row {
  std::string name;
  std::string a;
  std::string b;
  std::optional<double> ratio;  // b / a
};

namespace detail {

template <class T>
std::optional<double> as_double(const metric<T>& m) {
  if (!m.value) return std::nullopt;
  return static_cast<double>(*m.value);
}

template <class T>
std::string display(const metric<T>& m) {
  if (!m.value) return "—";
  std::ostringstream os;
  if constexpr (std::is_floating_point_v<T>) {
    os << std::fixed << std::setprecision(7) << *m.value;
  } else {
    os << *m.value;
  }
  return os.str();
}

}  // namespace detail

// Side-by-side values and b/a ratios. A ratio is absent when either side is
// null or a is zero while b is not.
inline std::vector<report_row> compare_reports(const metrics_report& a, const metrics_report& b) {
  std::vector<report_row> rows;
  auto fields_b = std::vector<std::optional<double>>{};
  auto display_b = std::vector<std::string>{};
  for_each_metric(b, [&](std::string_view, const auto& m) {
    fields_b.push_back(detail::as_double(m));
    display_b.push_back(detail::display(m));
  });
  std::size_t i = 0;
  for_each_metric(a, [&](std::string_view name, const auto& m) {
    report_row row{std::string(name), detail::display(m), display_b[i], std::nullopt};
    const auto va = detail::as_double(m);
    const auto vb = fields_b[i];
    if (va && vb) {
      if (*va == *vb) {
        row.ratio = 1.0;
      } else if (*va != 0.0) {
        row.ratio = *vb / *va;
      }
    }
    rows.push_back(std::move(row));
    ++i;
  });
  return rows;
}

inline std::string render_comparison(const std::vector<report_row>& rows,
                                     std::string_view a_label = "original",
                                     std::string_view b_label = "sample") {
  std::ostringstream os;
  auto cell = [&](std::string_view s, int w) {
    os << s;
    // The em dash is one column wide but three bytes long.
    const auto len = static_cast<int>(s == "—" ? 1 : s.size());
    for (int k = len; k < w; ++k) os << ' ';
  };
  cell("metric", 14);
  cell(a_label, 18);
  cell(b_label, 18);
  os << "ratio\n";
  for (const auto& r : rows) {
    cell(r.name, 14);
    cell(r.a, 18);
    cell(r.b, 18);
    if (r.ratio) {
      os << std::fixed << std::setprecision(4) << *r.ratio;
    } else {
      os << "—";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace gsample
