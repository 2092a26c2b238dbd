#pragma once

// In-memory partitioned datasets and the transformations the sampling
// operators are composed from: filter, map, flat_map, reduce_by_key, join,
// count and an explicit key shuffle. Every transformation runs one task per
// partition and returns only after all tasks finished.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <type_traits>
#include <utility>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "errors.hpp"
#include "execution.hpp"
#include "random.hpp"

namespace gsample {

// Immutable collection split into one or more partitions. Copies are cheap
// and share the underlying buffers.
template <class T>
class dataset {
 public:
  using value_type = T;
  using partition_type = std::vector<T>;

  dataset() : parts_(std::make_shared<const std::vector<partition_type>>(1)) {}

  explicit dataset(std::vector<partition_type> parts) {
    if (parts.empty()) parts.emplace_back();
    parts_ = std::make_shared<const std::vector<partition_type>>(std::move(parts));
  }

  std::size_t partition_count() const noexcept { return parts_->size(); }
  const partition_type& partition(std::size_t i) const { return (*parts_)[i]; }
  const std::vector<partition_type>& partitions() const noexcept { return *parts_; }

  std::size_t size() const noexcept {
    std::size_t n = 0;
    for (const auto& p : *parts_) n += p.size();
    return n;
  }
  bool empty() const noexcept { return size() == 0; }

  // Concatenation of all partitions in partition order.
  std::vector<T> collect() const {
    std::vector<T> out;
    out.reserve(size());
    for (const auto& p : *parts_) out.insert(out.end(), p.begin(), p.end());
    return out;
  }

 private:
  std::shared_ptr<const std::vector<partition_type>> parts_;
};

// A record with a grouping/join key.
template <class K, class V>
using keyed = std::pair<K, V>;

template <class K>
struct key_hash {
  std::size_t operator()(const K& key) const noexcept {
    if constexpr (std::is_integral_v<K>) {
      return static_cast<std::size_t>(mix64(static_cast<std::uint64_t>(key)));
    } else {
      return std::hash<K>{}(key);
    }
  }
};

template <class A, class B>
struct key_hash<std::pair<A, B>> {
  std::size_t operator()(const std::pair<A, B>& key) const noexcept {
    return static_cast<std::size_t>(
        mix64(key_hash<A>{}(key.first) ^ mix64(key_hash<B>{}(key.second))));
  }
};

// Integer keys go to key mod P; composite keys are hashed first.
template <class K>
std::size_t partition_of(const K& key, std::size_t partitions) noexcept {
  if constexpr (std::is_integral_v<K>) {
    return static_cast<std::size_t>(static_cast<std::uint64_t>(key) % partitions);
  } else {
    return key_hash<K>{}(key) % partitions;
  }
}

// Round-robin distribution of unkeyed elements over ctx.parallelism()
// partitions.
template <class T>
dataset<T> make_dataset(const execution_context& ctx, const std::vector<T>& elements) {
  const std::size_t p = ctx.parallelism();
  std::vector<std::vector<T>> parts(p);
  for (auto& part : parts) part.reserve(elements.size() / p + 1);
  for (std::size_t i = 0; i < elements.size(); ++i) parts[i % p].push_back(elements[i]);
  return dataset<T>(std::move(parts));
}

// Distributes elements by an integer key extracted from each element.
template <class T, class KeyFn>
dataset<T> make_dataset_by(const execution_context& ctx, const std::vector<T>& elements,
                           KeyFn key_of) {
  const std::size_t p = ctx.parallelism();
  std::vector<std::vector<T>> parts(p);
  for (const auto& e : elements) parts[partition_of(key_of(e), p)].push_back(e);
  return dataset<T>(std::move(parts));
}

template <class T, class Pred>
dataset<T> filter(const execution_context& ctx, const dataset<T>& d, Pred pred) {
  std::vector<std::vector<T>> out(d.partition_count());
  ctx.parallel_for(d.partition_count(), [&](std::size_t i) {
    for (const auto& e : d.partition(i)) {
      if (pred(e)) out[i].push_back(e);
    }
  });
  return dataset<T>(std::move(out));
}

// One output element per input element, partition structure preserved.
template <class T, class Fn>
auto map(const execution_context& ctx, const dataset<T>& d, Fn f)
    -> dataset<std::decay_t<std::invoke_result_t<Fn&, const T&>>> {
  using U = std::decay_t<std::invoke_result_t<Fn&, const T&>>;
  std::vector<std::vector<U>> out(d.partition_count());
  ctx.parallel_for(d.partition_count(), [&](std::size_t i) {
    const auto& in = d.partition(i);
    out[i].reserve(in.size());
    for (const auto& e : in) out[i].push_back(f(e));
  });
  return dataset<U>(std::move(out));
}

// f(element, emit) calls emit(u) zero or more times.
template <class U, class T, class Fn>
dataset<U> flat_map(const execution_context& ctx, const dataset<T>& d, Fn f) {
  std::vector<std::vector<U>> out(d.partition_count());
  ctx.parallel_for(d.partition_count(), [&](std::size_t i) {
    auto& dst = out[i];
    auto emit = [&dst](U u) { dst.push_back(std::move(u)); };
    for (const auto& e : d.partition(i)) f(e, emit);
  });
  return dataset<U>(std::move(out));
}

// Union of two datasets; partition i of the result holds partition i of both
// inputs when the partition counts agree.
template <class T>
dataset<T> concat(const dataset<T>& a, const dataset<T>& b) {
  const std::size_t p = std::max(a.partition_count(), b.partition_count());
  std::vector<std::vector<T>> out(p);
  for (std::size_t i = 0; i < p; ++i) {
    if (i < a.partition_count()) out[i] = a.partition(i);
    if (i < b.partition_count()) {
      out[i].insert(out[i].end(), b.partition(i).begin(), b.partition(i).end());
    }
  }
  return dataset<T>(std::move(out));
}

template <class T>
std::size_t count(const dataset<T>& d) noexcept {
  return d.size();
}

// Shuffle: afterwards every record with a given key lives in partition
// partition_of(key, partitions). Relative order of records coming from the
// same source partition is preserved.
template <class K, class V>
dataset<keyed<K, V>> repartition_by_key(const execution_context& ctx,
                                        const dataset<keyed<K, V>>& d, std::size_t partitions) {
  if (partitions == 0) throw parameter_error("repartition_by_key: partition count must be >= 1");
  using record = keyed<K, V>;
  const std::size_t src_count = d.partition_count();
  std::vector<std::vector<std::vector<record>>> buckets(src_count,
                                                        std::vector<std::vector<record>>(partitions));
  ctx.parallel_for(src_count, [&](std::size_t s) {
    for (const auto& r : d.partition(s)) buckets[s][partition_of(r.first, partitions)].push_back(r);
  });
  std::vector<std::vector<record>> out(partitions);
  ctx.parallel_for(partitions, [&](std::size_t t) {
    std::size_t n = 0;
    for (std::size_t s = 0; s < src_count; ++s) n += buckets[s][t].size();
    out[t].reserve(n);
    for (std::size_t s = 0; s < src_count; ++s) {
      out[t].insert(out[t].end(), std::make_move_iterator(buckets[s][t].begin()),
                    std::make_move_iterator(buckets[s][t].end()));
    }
  });
  return dataset<record>(std::move(out));
}

namespace detail {

// Large partitions are aggregated in slices selected by the high bits of the
// key hash, so each slice's hash table stays cache resident. Returns the
// number of slice bits for a partition of n records.
inline unsigned slice_bits(std::size_t n) noexcept {
  constexpr std::size_t slice_records = std::size_t{1} << 15;
  unsigned bits = 0;
  while ((slice_records << bits) < n && bits < 16) ++bits;
  return bits;
}

template <class K, class V>
std::vector<std::vector<keyed<K, V>>> hash_slices(const std::vector<keyed<K, V>>& in, unsigned bits) {
  std::vector<std::vector<keyed<K, V>>> out(std::size_t{1} << bits);
  for (auto& slice : out) slice.reserve((in.size() >> bits) + (in.size() >> (bits + 3)));
  for (const auto& r : in) out[static_cast<std::uint64_t>(key_hash<K>{}(r.first)) >> (64 - bits)].push_back(r);
  return out;
}

// Calls f(slice) for each slice of in, or once with in itself when it is small.
template <class K, class V, class F>
void for_each_slice(const std::vector<keyed<K, V>>& in, unsigned bits, F&& f) {
  if (bits == 0) {
    f(in);
    return;
  }
  for (const auto& slice : hash_slices(in, bits)) f(slice);
}

}  // namespace detail

namespace detail {

// Folds the values of each key in `in`; keys appear in first-seen order
// within each hash slice.
template <class K, class V, class Combine>
std::vector<keyed<K, V>> fold_by_key(const std::vector<keyed<K, V>>& in, Combine& combine) {
  std::vector<keyed<K, V>> dst;
  absl::flat_hash_map<K, std::size_t, key_hash<K>> slot;
  for_each_slice(in, slice_bits(in.size()), [&](const std::vector<keyed<K, V>>& slice) {
    slot.clear();
    for (const auto& [k, v] : slice) {
      auto [it, inserted] = slot.try_emplace(k, dst.size());
      if (inserted) {
        dst.emplace_back(k, v);
      } else {
        dst[it->second].second = combine(dst[it->second].second, v);
      }
    }
  });
  return dst;
}

}  // namespace detail

// One record per distinct key whose value folds all values for that key.
// combine must be associative and commutative: each input partition is
// folded locally before the shuffle, and the partial results again after it.
template <class K, class V, class Combine>
dataset<keyed<K, V>> reduce_by_key(const execution_context& ctx, const dataset<keyed<K, V>>& d,
                                   Combine combine) {
  std::vector<std::vector<keyed<K, V>>> local(d.partition_count());
  ctx.parallel_for(d.partition_count(), [&](std::size_t i) {
    auto c = combine;
    local[i] = detail::fold_by_key(d.partition(i), c);
  });
  auto shuffled = repartition_by_key(ctx, dataset<keyed<K, V>>(std::move(local)), ctx.parallelism());
  std::vector<std::vector<keyed<K, V>>> out(shuffled.partition_count());
  ctx.parallel_for(shuffled.partition_count(), [&](std::size_t i) {
    auto c = combine;
    out[i] = detail::fold_by_key(shuffled.partition(i), c);
  });
  return dataset<keyed<K, V>>(std::move(out));
}

// Inner equi-join on the record keys: f(l, r) is produced for every pair with
// l.first == r.first.
template <class K, class L, class R, class Fn>
auto join(const execution_context& ctx, const dataset<keyed<K, L>>& left,
          const dataset<keyed<K, R>>& right, Fn f)
    -> dataset<std::decay_t<std::invoke_result_t<Fn&, const keyed<K, L>&, const keyed<K, R>&>>> {
  using U = std::decay_t<std::invoke_result_t<Fn&, const keyed<K, L>&, const keyed<K, R>&>>;
  const std::size_t p = ctx.parallelism();
  auto l = repartition_by_key(ctx, left, p);
  auto r = repartition_by_key(ctx, right, p);
  std::vector<std::vector<U>> out(p);
  ctx.parallel_for(p, [&](std::size_t i) {
    const auto& lp = l.partition(i);
    const auto& rp = r.partition(i);
    if (lp.empty() || rp.empty()) return;
    auto& dst = out[i];
    absl::flat_hash_map<K, std::pair<std::size_t, std::size_t>, key_hash<K>> ranges;
    std::vector<std::size_t> order;
    auto join_slice = [&](const std::vector<keyed<K, L>>& ls, const std::vector<keyed<K, R>>& rs) {
      if (ls.empty() || rs.empty()) return;
      // Build side: right records grouped by key, in arrival order.
      ranges.clear();
      for (const auto& rec : rs) ++ranges[rec.first].second;
      std::size_t offset = 0;
      for (auto& [key, range] : ranges) {
        range.first = offset;
        offset += range.second;
        range.second = range.first;
      }
      order.assign(rs.size(), 0);
      for (std::size_t j = 0; j < rs.size(); ++j) order[ranges[rs[j].first].second++] = j;
      for (const auto& lrec : ls) {
        auto it = ranges.find(lrec.first);
        if (it == ranges.end()) continue;
        for (std::size_t j = it->second.first; j < it->second.second; ++j) dst.push_back(f(lrec, rs[order[j]]));
      }
    };
    const unsigned bits = detail::slice_bits(std::max(lp.size(), rp.size()));
    if (bits == 0) {
      join_slice(lp, rp);
      return;
    }
    const auto ls = detail::hash_slices(lp, bits);
    const auto rs = detail::hash_slices(rp, bits);
    for (std::size_t k = 0; k < ls.size(); ++k) join_slice(ls[k], rs[k]);
  });
  return dataset<U>(std::move(out));
}

// Distinct keys of a keyed dataset.
template <class K, class V>
dataset<K> distinct_keys(const execution_context& ctx, const dataset<keyed<K, V>>& d) {
  auto unit = map(ctx, d, [](const keyed<K, V>& r) { return keyed<K, char>(r.first, 0); });
  auto reduced = reduce_by_key(ctx, unit, [](char a, char) { return a; });
  return map(ctx, reduced, [](const keyed<K, char>& r) { return r.first; });
}

}  // namespace gsample
