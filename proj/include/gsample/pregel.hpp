#pragma once

// Bulk-synchronous vertex-centric engine.
//
// A program supplies
//   state_type, message_type
//   state_type init(vertex_id) const
//   void compute(vertex_context<state_type, message_type>&) const
// and optionally
//   void deliver(delivery_context<state_type, message_type>&) const
//   bool halt(const aggregator_values&, std::size_t superstep) const
//
// Each superstep runs compute for every active vertex and every vertex with
// a non-empty inbox, concurrently across partitions. At the barrier the
// outgoing messages are shuffled to their target partitions and sorted by
// (target, sender); deliver, when present, sees the new inbox right there
// and may update the target's state and aggregators. compute sees the same
// messages one superstep later.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "execution.hpp"
#include "graph.hpp"

namespace gsample {

struct adjacent_edge {
  edge_id id = 0;
  vertex_id neighbor = 0;
};

template <class Message>
struct envelope {
  vertex_id sender = 0;
  Message payload{};
};

struct aggregator {
  std::string name;
  std::int64_t initial = 0;
  std::function<std::int64_t(std::int64_t, std::int64_t)> combine = std::plus<std::int64_t>{};
  // false: the value restarts from `initial` every superstep.
  bool accumulate = false;
};

class aggregator_values {
 public:
  aggregator_values() = default;
  explicit aggregator_values(const std::vector<aggregator>& specs) {
    for (const auto& a : specs) {
      names_.push_back(a.name);
      values_.push_back(a.initial);
    }
  }

  std::size_t size() const noexcept { return values_.size(); }
  std::int64_t value(std::size_t slot) const { return values_.at(slot); }
  std::int64_t& value(std::size_t slot) { return values_.at(slot); }

  std::int64_t operator[](std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return values_[i];
    }
    throw parameter_error("unknown aggregator '" + std::string(name) + "'");
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::int64_t> values_;
};

struct bsp_options {
  // 0 selects the default of 100 * |V|.
  std::size_t max_supersteps = 0;
  std::vector<aggregator> aggregators;
};

template <class State>
struct bsp_result {
  std::vector<vertex_id> ids;  // ascending
  std::vector<State> states;   // states[i] belongs to ids[i]
  std::size_t supersteps = 0;
  bool converged = true;
  aggregator_values aggregates;

  const State& state_of(vertex_id id) const {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) throw parameter_error("no vertex " + std::to_string(id));
    return states[static_cast<std::size_t>(it - ids.begin())];
  }
};

namespace detail {

// Read-only topology shared by all supersteps: ascending vertex ids plus
// CSR out/in adjacency indexed by position in that order.
struct bsp_topology {
  std::vector<vertex_id> ids;
  std::vector<std::size_t> out_offsets, in_offsets;
  std::vector<adjacent_edge> out_edges, in_edges;
  bool contiguous = false;  // ids are ids.front() .. ids.front() + n - 1

  std::optional<std::size_t> index_of(vertex_id id) const noexcept {
    if (contiguous) {
      if (id < ids.front() || id - ids.front() >= ids.size()) return std::nullopt;
      return static_cast<std::size_t>(id - ids.front());
    }
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - ids.begin());
  }

  static bsp_topology build(const execution_context& ctx, const graph& g) {
    bsp_topology t;
    t.ids = sorted_vertex_ids(g);
    const std::size_t n = t.ids.size();
    t.contiguous = n > 0 && t.ids.back() - t.ids.front() == n - 1;

    const auto& parts = g.edges.partitions();
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> ends(parts.size());
    ctx.parallel_for(parts.size(), [&](std::size_t p) {
      ends[p].reserve(parts[p].size());
      for (const auto& e : parts[p]) {
        auto s = t.index_of(e.source);
        auto d = t.index_of(e.target);
        if (!s || !d) {
          throw bsp_error("edge " + std::to_string(e.id) + " references a missing vertex");
        }
        ends[p].emplace_back(*s, *d);
      }
    });

    t.out_offsets.assign(n + 1, 0);
    t.in_offsets.assign(n + 1, 0);
    for (const auto& part : ends) {
      for (auto [s, d] : part) {
        ++t.out_offsets[s + 1];
        ++t.in_offsets[d + 1];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      t.out_offsets[i + 1] += t.out_offsets[i];
      t.in_offsets[i + 1] += t.in_offsets[i];
    }
    t.out_edges.resize(t.out_offsets[n]);
    t.in_edges.resize(t.in_offsets[n]);
    auto out_pos = t.out_offsets;
    auto in_pos = t.in_offsets;
    for (std::size_t p = 0; p < parts.size(); ++p) {
      for (std::size_t k = 0; k < parts[p].size(); ++k) {
        const auto& e = parts[p][k];
        auto [s, d] = ends[p][k];
        t.out_edges[out_pos[s]++] = {e.id, e.target};
        t.in_edges[in_pos[d]++] = {e.id, e.source};
      }
    }
    // Edge lists per vertex ordered by edge id, independent of partitioning.
    auto by_id = [](const adjacent_edge& a, const adjacent_edge& b) { return a.id < b.id; };
    ctx.parallel_for(ctx.parallelism(), [&](std::size_t p) {
      for (std::size_t v = p; v < n; v += ctx.parallelism()) {
        std::sort(t.out_edges.begin() + static_cast<std::ptrdiff_t>(t.out_offsets[v]),
                  t.out_edges.begin() + static_cast<std::ptrdiff_t>(t.out_offsets[v + 1]), by_id);
        std::sort(t.in_edges.begin() + static_cast<std::ptrdiff_t>(t.in_offsets[v]),
                  t.in_edges.begin() + static_cast<std::ptrdiff_t>(t.in_offsets[v + 1]), by_id);
      }
    });
    return t;
  }

  std::span<const adjacent_edge> out_of(std::size_t index) const noexcept {
    return {out_edges.data() + out_offsets[index], out_offsets[index + 1] - out_offsets[index]};
  }
  std::span<const adjacent_edge> in_of(std::size_t index) const noexcept {
    return {in_edges.data() + in_offsets[index], in_offsets[index + 1] - in_offsets[index]};
  }
};

template <class Message>
struct routed_message {
  std::size_t target;  // global index
  vertex_id sender;
  Message payload;
};

// Per-partition partial aggregates; unset slots have no contribution yet.
class aggregator_partials {
 public:
  aggregator_partials(const std::vector<aggregator>* specs)
      : specs_(specs), values_(specs->size()) {}

  void add(std::size_t slot, std::int64_t v) {
    if (slot >= values_.size()) throw parameter_error("aggregator slot out of range");
    auto& cur = values_[slot];
    cur = cur ? (*specs_)[slot].combine(*cur, v) : v;
  }
  const std::optional<std::int64_t>& get(std::size_t slot) const { return values_[slot]; }
  void clear() {
    for (auto& v : values_) v.reset();
  }

 private:
  const std::vector<aggregator>* specs_;
  std::vector<std::optional<std::int64_t>> values_;
};

}  // namespace detail

template <class State, class Message>
class vertex_context {
 public:
  vertex_id id() const noexcept { return id_; }
  State& state() noexcept { return *state_; }
  const State& state() const noexcept { return *state_; }
  std::span<const envelope<Message>> inbox() const noexcept { return inbox_; }
  std::size_t superstep() const noexcept { return superstep_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::span<const adjacent_edge> out_edges() const noexcept { return topo_->out_of(index_); }
  std::span<const adjacent_edge> in_edges() const noexcept { return topo_->in_of(index_); }

  // Ascending ids of every vertex in the graph.
  const std::vector<vertex_id>& all_vertices() const noexcept { return topo_->ids; }

  // Aggregator values as of the end of the previous superstep.
  const aggregator_values& aggregated() const noexcept { return *previous_; }

  void send(vertex_id target, Message payload) {
    auto idx = topo_->index_of(target);
    if (!idx) throw bsp_error("message to nonexistent vertex " + std::to_string(target));
    (*outbox_)[*idx % partitions_].push_back({*idx, id_, std::move(payload)});
  }

  void aggregate(std::size_t slot, std::int64_t value) { partials_->add(slot, value); }

  void vote_to_halt() noexcept { halted_ = true; }

 private:
  template <class Program>
  friend auto run_bsp(const execution_context&, const graph&, const Program&, bsp_options)
      -> bsp_result<typename Program::state_type>;

  vertex_id id_ = 0;
  std::size_t index_ = 0;
  State* state_ = nullptr;
  std::span<const envelope<Message>> inbox_;
  std::size_t superstep_ = 0;
  std::uint64_t seed_ = 0;
  std::size_t partitions_ = 1;
  const detail::bsp_topology* topo_ = nullptr;
  std::vector<std::vector<detail::routed_message<Message>>>* outbox_ = nullptr;
  detail::aggregator_partials* partials_ = nullptr;
  const aggregator_values* previous_ = nullptr;
  bool halted_ = false;
};

template <class State, class Message>
class delivery_context {
 public:
  vertex_id id() const noexcept { return id_; }
  State& state() noexcept { return *state_; }
  std::span<const envelope<Message>> inbox() const noexcept { return inbox_; }
  std::size_t superstep() const noexcept { return superstep_; }
  void aggregate(std::size_t slot, std::int64_t value) { partials_->add(slot, value); }

 private:
  template <class Program>
  friend auto run_bsp(const execution_context&, const graph&, const Program&, bsp_options)
      -> bsp_result<typename Program::state_type>;

  vertex_id id_ = 0;
  State* state_ = nullptr;
  std::span<const envelope<Message>> inbox_;
  std::size_t superstep_ = 0;
  detail::aggregator_partials* partials_ = nullptr;
};

template <class P>
concept vertex_program = requires(const P& p, vertex_id v,
                                  vertex_context<typename P::state_type, typename P::message_type>& c) {
  { p.init(v) } -> std::convertible_to<typename P::state_type>;
  p.compute(c);
};

template <class Program>
auto run_bsp(const execution_context& ctx, const graph& g, const Program& program,
             bsp_options options) -> bsp_result<typename Program::state_type> {
  static_assert(vertex_program<Program>);
  using State = typename Program::state_type;
  using Message = typename Program::message_type;
  using routed = detail::routed_message<Message>;

  constexpr bool has_deliver =
      requires(const Program& p, delivery_context<State, Message>& d) { p.deliver(d); };
  constexpr bool has_halt = requires(const Program& p, const aggregator_values& a, std::size_t s) {
    { p.halt(a, s) } -> std::convertible_to<bool>;
  };

  const auto topo = detail::bsp_topology::build(ctx, g);
  const std::size_t n = topo.ids.size();
  const std::size_t parts = ctx.parallelism();
  const std::size_t max_steps = options.max_supersteps ? options.max_supersteps : 100 * n;

  // Vertex at global index i lives in partition i % parts at slot i / parts.
  std::vector<std::vector<State>> states(parts);
  ctx.parallel_for(parts, [&](std::size_t p) {
    for (std::size_t i = p; i < n; i += parts) states[p].push_back(program.init(topo.ids[i]));
  });

  bsp_result<State> result;
  result.aggregates = aggregator_values(options.aggregators);

  auto finish = [&] {
    result.ids = topo.ids;
    result.states.resize(n);
    for (std::size_t i = 0; i < n; ++i) result.states[i] = std::move(states[i % parts][i / parts]);
    return std::move(result);
  };

  if constexpr (has_halt) {
    if (program.halt(result.aggregates, 0)) return finish();
  }
  if (n == 0) return finish();

  std::vector<std::vector<std::size_t>> active(parts);  // ascending local slots
  for (std::size_t p = 0; p < parts; ++p) {
    active[p].resize(p < n ? (n - p + parts - 1) / parts : 0);
    std::iota(active[p].begin(), active[p].end(), std::size_t{0});
  }

  struct receiver {
    std::size_t slot, begin, end;
  };
  std::vector<std::vector<envelope<Message>>> inbox(parts);
  std::vector<std::vector<receiver>> receivers(parts);
  std::vector<std::vector<std::vector<routed>>> outbox(parts, std::vector<std::vector<routed>>(parts));
  std::vector<detail::aggregator_partials> partials(parts, detail::aggregator_partials(&options.aggregators));

  for (std::size_t step = 1; step <= max_steps; ++step) {
    const aggregator_values previous = result.aggregates;

    // Compute phase.
    std::vector<std::vector<std::size_t>> next_active(parts);
    ctx.parallel_for(parts, [&](std::size_t p) {
      for (auto& box : outbox[p]) box.clear();
      partials[p].clear();
      vertex_context<State, Message> c;
      c.superstep_ = step;
      c.seed_ = ctx.seed();
      c.partitions_ = parts;
      c.topo_ = &topo;
      c.outbox_ = &outbox[p];
      c.partials_ = &partials[p];
      c.previous_ = &previous;

      const auto& act = active[p];
      const auto& recv = receivers[p];
      std::size_t a = 0, r = 0;
      while (a < act.size() || r < recv.size()) {
        std::size_t slot;
        std::span<const envelope<Message>> box;
        if (r < recv.size() && (a >= act.size() || recv[r].slot <= act[a])) {
          slot = recv[r].slot;
          box = {inbox[p].data() + recv[r].begin, recv[r].end - recv[r].begin};
          if (a < act.size() && act[a] == slot) ++a;
          ++r;
        } else {
          slot = act[a++];
        }
        const std::size_t index = slot * parts + p;
        c.id_ = topo.ids[index];
        c.index_ = index;
        c.state_ = &states[p][slot];
        c.inbox_ = box;
        c.halted_ = false;
        program.compute(c);
        if (!c.halted_) next_active[p].push_back(slot);
      }
    });

    // Barrier: shuffle, order and deliver.
    std::vector<std::size_t> in_flight(parts, 0);
    ctx.parallel_for(parts, [&](std::size_t t) {
      std::vector<routed> msgs;
      std::size_t total = 0;
      for (std::size_t s = 0; s < parts; ++s) total += outbox[s][t].size();
      msgs.reserve(total);
      for (std::size_t s = 0; s < parts; ++s) {
        msgs.insert(msgs.end(), std::make_move_iterator(outbox[s][t].begin()),
                    std::make_move_iterator(outbox[s][t].end()));
      }
      std::stable_sort(msgs.begin(), msgs.end(), [](const routed& x, const routed& y) {
        return x.target != y.target ? x.target < y.target : x.sender < y.sender;
      });
      in_flight[t] = msgs.size();

      auto& box = inbox[t];
      auto& recv = receivers[t];
      box.clear();
      recv.clear();
      box.reserve(msgs.size());
      for (std::size_t i = 0; i < msgs.size();) {
        std::size_t j = i;
        const std::size_t begin = box.size();
        while (j < msgs.size() && msgs[j].target == msgs[i].target) {
          box.push_back({msgs[j].sender, std::move(msgs[j].payload)});
          ++j;
        }
        recv.push_back({msgs[i].target / parts, begin, box.size()});
        i = j;
      }

      if constexpr (has_deliver) {
        delivery_context<State, Message> d;
        d.superstep_ = step;
        d.partials_ = &partials[t];
        for (const auto& rc : recv) {
          d.id_ = topo.ids[rc.slot * parts + t];
          d.state_ = &states[t][rc.slot];
          d.inbox_ = {box.data() + rc.begin, rc.end - rc.begin};
          program.deliver(d);
        }
      }
    });

    // Aggregator merge in partition order.
    for (std::size_t k = 0; k < options.aggregators.size(); ++k) {
      const auto& spec = options.aggregators[k];
      std::int64_t value = spec.accumulate ? previous.value(k) : spec.initial;
      for (std::size_t p = 0; p < parts; ++p) {
        if (const auto& part = partials[p].get(k)) value = spec.combine(value, *part);
      }
      result.aggregates.value(k) = value;
    }

    active = std::move(next_active);
    result.supersteps = step;

    if constexpr (has_halt) {
      if (program.halt(result.aggregates, step)) return finish();
    }
    bool quiet = true;
    for (std::size_t p = 0; p < parts; ++p) quiet = quiet && in_flight[p] == 0 && active[p].empty();
    if (quiet) return finish();
  }

  result.converged = false;
  return finish();
}

}  // namespace gsample
