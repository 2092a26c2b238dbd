#pragma once

// Multi-walker random walk sampling hosted on the BSP engine.
//
// Each superstep every walker either follows a uniformly chosen outgoing edge
// of its vertex that no walker has traversed yet, or jumps to a uniformly
// chosen other vertex. It jumps with probability j and whenever no
// untraversed outgoing edge is left. A global aggregator counts visited
// vertices; the walk stops after the first superstep at which that count
// reaches ceil(s * |V|).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <span>
#include <vector>

#include "graph.hpp"
#include "pregel.hpp"
#include "random.hpp"

namespace gsample {

struct walk_params {
  sample_size s;
  std::size_t walkers = 1;
  double jump_probability = 0.1;
  std::uint64_t seed = 0;
  std::size_t max_supersteps = 0;  // 0: engine default of 100 * |V|
};

struct walk_result {
  graph sample;
  std::size_t supersteps = 0;
  std::size_t visited = 0;  // before zero-degree removal
  std::size_t target_visited = 0;
};

struct walk_not_converged : bsp_error {
  std::size_t visited;
  walk_not_converged(const std::string& what, std::size_t visited_count)
      : bsp_error(what), visited(visited_count) {}
};

// ceil(s * n) that is robust against s * n landing a rounding error above an
// integer.
inline std::size_t target_visited_count(sample_size s, std::size_t n) {
  const double t = s.value() * static_cast<double>(n);
  const double r = std::round(t);
  if (std::abs(t - r) <= 1e-9 * std::max(1.0, t)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(t));
}

enum class walk_kind : std::uint8_t { walk, jump };

struct walker_message {
  std::uint32_t walker = 0;
  walk_kind kind = walk_kind::walk;
};

struct walk_vertex_state {
  bool visited = false;
  // Permutation of out-edge positions, filled on the first departure. The
  // last `traversed` entries are the edges already walked.
  std::vector<std::uint32_t> out_order;
  std::uint32_t traversed = 0;
  std::vector<std::uint32_t> walkers;  // hosted walkers, ascending
  std::uint64_t arrivals = 0;

  std::span<const std::uint32_t> traversed_positions() const noexcept {
    return {out_order.data() + out_order.size() - traversed, traversed};
  }
};

namespace detail {

// Start vertices: the k vertices with the smallest seeded hash, which is a
// uniform k-subset. Walker ids follow hash order.
inline std::vector<std::pair<vertex_id, std::uint32_t>> choose_start_vertices(
    const std::vector<vertex_id>& ids, std::size_t k, std::uint64_t seed) {
  std::vector<std::pair<std::uint64_t, vertex_id>> ranked;
  ranked.reserve(ids.size());
  for (auto id : ids) ranked.emplace_back(hash_combine(seed, {id, 0x7374617274ULL}), id);
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end());
  std::vector<std::pair<vertex_id, std::uint32_t>> starts;
  for (std::size_t w = 0; w < k; ++w) starts.emplace_back(ranked[w].second, static_cast<std::uint32_t>(w));
  std::sort(starts.begin(), starts.end());
  return starts;
}

struct walk_program {
  using state_type = walk_vertex_state;
  using message_type = walker_message;
  static constexpr std::size_t visited_slot = 0;

  std::vector<std::pair<vertex_id, std::uint32_t>> starts;  // ascending by vertex
  double jump_probability = 0.1;
  std::uint64_t seed = 0;
  std::size_t target = 0;
  std::optional<std::size_t> fixed_supersteps;

  walk_vertex_state init(vertex_id v) const {
    walk_vertex_state st;
    auto it = std::lower_bound(starts.begin(), starts.end(), std::pair<vertex_id, std::uint32_t>{v, 0});
    for (; it != starts.end() && it->first == v; ++it) st.walkers.push_back(it->second);
    st.visited = !st.walkers.empty();
    return st;
  }

  void compute(vertex_context<walk_vertex_state, walker_message>& c) const {
    auto& st = c.state();
    const auto out = c.out_edges();
    const auto& all = c.all_vertices();
    for (std::uint32_t w : st.walkers) {
      const std::uint64_t step = c.superstep();
      const std::size_t untraversed = out.size() - st.traversed;
      const bool jump = untraversed == 0 ||
                        to_unit_closed_open(hash_combine(seed, {w, step, 0})) < jump_probability;
      if (jump) {
        const std::uint64_t h = hash_combine(seed, {w, step, 1});
        vertex_id target = c.id();
        if (all.size() > 1) {
          const auto self = static_cast<std::uint64_t>(
              std::lower_bound(all.begin(), all.end(), c.id()) - all.begin());
          std::uint64_t r = to_bounded(h, all.size() - 1);
          if (r >= self) ++r;
          target = all[r];
        }
        c.send(target, {w, walk_kind::jump});
        continue;
      }
      if (st.out_order.empty()) {
        st.out_order.resize(out.size());
        std::iota(st.out_order.begin(), st.out_order.end(), std::uint32_t{0});
      }
      // Swap the chosen untraversed position behind the untraversed range.
      const auto pick = static_cast<std::size_t>(to_bounded(hash_combine(seed, {w, step, 2}), untraversed));
      std::swap(st.out_order[pick], st.out_order[untraversed - 1]);
      ++st.traversed;
      c.send(out[st.out_order[untraversed - 1]].neighbor, {w, walk_kind::walk});
    }
    st.walkers.clear();
    c.vote_to_halt();
  }

  void deliver(delivery_context<walk_vertex_state, walker_message>& d) const {
    auto& st = d.state();
    if (!st.visited) {
      st.visited = true;
      d.aggregate(visited_slot, 1);
    }
    for (const auto& m : d.inbox()) st.walkers.push_back(m.payload.walker);
    st.arrivals += d.inbox().size();
    std::sort(st.walkers.begin(), st.walkers.end());
  }

  bool halt(const aggregator_values& agg, std::size_t superstep) const {
    if (fixed_supersteps) return superstep >= *fixed_supersteps;
    return static_cast<std::size_t>(agg.value(visited_slot)) >= target;
  }
};

inline void check_walk_params(const graph& g, const walk_params& p) {
  if (g.vertex_count() == 0) throw parameter_error("random walk needs at least one vertex");
  if (p.walkers == 0) throw parameter_error("random walk needs at least one walker");
  if (p.walkers > g.vertex_count()) {
    throw parameter_error("walker count " + std::to_string(p.walkers) + " exceeds vertex count " +
                          std::to_string(g.vertex_count()));
  }
  if (!(p.jump_probability >= 0.0 && p.jump_probability <= 1.0)) {
    throw parameter_error("jump probability must lie in [0, 1]");
  }
}

inline auto run_walk(const execution_context& ctx, const graph& g, const walk_params& p,
                     std::optional<std::size_t> fixed_supersteps) {
  check_walk_params(g, p);
  walk_program program;
  program.starts = choose_start_vertices(sorted_vertex_ids(g), p.walkers, p.seed);
  program.jump_probability = p.jump_probability;
  program.seed = p.seed;
  program.target = target_visited_count(p.s, g.vertex_count());
  program.fixed_supersteps = fixed_supersteps;

  bsp_options opts;
  opts.max_supersteps = fixed_supersteps ? *fixed_supersteps : p.max_supersteps;
  opts.aggregators.push_back(
      {"visited", static_cast<std::int64_t>(program.starts.size()), std::plus<std::int64_t>{}, true});
  auto result = run_bsp(ctx, g, program, opts);
  return std::make_pair(std::move(result), program.target);
}

}  // namespace detail

inline walk_result random_walk_sample(const execution_context& ctx, const graph& g,
                                      const walk_params& p) {
  auto [run, target] = detail::run_walk(ctx, g, p, std::nullopt);
  const auto visited_total = static_cast<std::size_t>(run.aggregates["visited"]);
  if (!run.converged) {
    throw walk_not_converged("random walk did not reach " + std::to_string(target) +
                                 " visited vertices within " + std::to_string(run.supersteps) +
                                 " supersteps (visited " + std::to_string(visited_total) + ")",
                             visited_total);
  }

  std::vector<vertex_id> visited;
  for (std::size_t i = 0; i < run.ids.size(); ++i) {
    if (run.states[i].visited) visited.push_back(run.ids[i]);
  }
  std::vector<vertex_record> records;
  records.reserve(visited.size());
  for (auto id : visited) records.push_back({id, vertex_flag::visited});
  auto vertices = make_dataset_by(ctx, records, [](const vertex_record& v) { return v.id; });
  auto ids = map(ctx, vertices, [](const vertex_record& v) { return v.id; });
  graph sampled{vertices, induced_edges(ctx, g, ids)};

  walk_result out;
  out.sample = remove_zero_degree(ctx, sampled);
  out.supersteps = run.supersteps;
  out.visited = visited.size();
  out.target_visited = target;
  return out;
}

// Runs the walk for exactly `supersteps` supersteps, ignoring the visited
// target, and reports how many walker arrivals each vertex received.
inline std::vector<std::pair<vertex_id, std::uint64_t>> random_walk_arrivals(
    const execution_context& ctx, const graph& g, const walk_params& p, std::size_t supersteps) {
  auto [run, target] = detail::run_walk(ctx, g, p, supersteps);
  (void)target;
  std::vector<std::pair<vertex_id, std::uint64_t>> out;
  out.reserve(run.ids.size());
  for (std::size_t i = 0; i < run.ids.size(); ++i) out.emplace_back(run.ids[i], run.states[i].arrivals);
  return out;
}

}  // namespace gsample
