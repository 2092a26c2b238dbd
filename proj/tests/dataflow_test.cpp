#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "gsample/dataflow.hpp"

using namespace gsample;

namespace {

template <class T>
std::vector<T> sorted(const dataset<T>& d) {
  auto v = d.collect();
  std::sort(v.begin(), v.end());
  return v;
}

const std::size_t kParallelism[] = {1, 2, 4, 8};

}  // namespace

TEST(Filter, KeepsMatchingElements) {
  execution_context ctx(2);
  auto d = make_dataset(ctx, std::vector<int>{1, 2, 3, 4});
  EXPECT_EQ(sorted(filter(ctx, d, [](int x) { return x % 2 == 0; })), (std::vector<int>{2, 4}));
  EXPECT_TRUE(filter(ctx, make_dataset(ctx, std::vector<int>{}), [](int) { return true; }).empty());
  EXPECT_EQ(sorted(filter(ctx, make_dataset(ctx, std::vector<int>{5}), [](int) { return true; })),
            (std::vector<int>{5}));
}

TEST(Filter, FusionEqualsConjunction) {
  std::mt19937_64 rng(11);
  std::vector<int> xs(500);
  for (auto& x : xs) x = static_cast<int>(rng() % 1000);
  for (auto p : kParallelism) {
    execution_context ctx(p);
    auto d = make_dataset(ctx, xs);
    auto even = [](int x) { return x % 2 == 0; };
    auto big = [](int x) { return x > 300; };
    EXPECT_EQ(sorted(filter(ctx, filter(ctx, d, even), big)),
              sorted(filter(ctx, d, [&](int x) { return even(x) && big(x); })));
  }
}

TEST(Map, OneToOne) {
  execution_context ctx(3);
  auto d = make_dataset(ctx, std::vector<int>{1, 2, 3});
  auto m = map(ctx, d, [](int x) { return x + 1; });
  EXPECT_EQ(count(m), count(d));
  EXPECT_EQ(sorted(m), (std::vector<int>{2, 3, 4}));
  EXPECT_TRUE(map(ctx, make_dataset(ctx, std::vector<int>{}), [](int x) { return x; }).empty());

  using flagged = std::pair<std::string, bool>;
  auto f = map(ctx, make_dataset(ctx, std::vector<flagged>{{"a", false}}), [](flagged x) {
    x.second = true;
    return x;
  });
  EXPECT_EQ(f.collect(), (std::vector<flagged>{{"a", true}}));
}

TEST(ReduceByKey, SumsPerKey) {
  execution_context ctx(2);
  using rec = keyed<std::uint64_t, int>;
  auto d = make_dataset(ctx, std::vector<rec>{{1, 2}, {1, 3}, {2, 5}});
  EXPECT_EQ(sorted(reduce_by_key(ctx, d, std::plus<>{})), (std::vector<rec>{{1, 5}, {2, 5}}));
  EXPECT_EQ(sorted(reduce_by_key(ctx, make_dataset(ctx, std::vector<rec>{{7, 1}}), std::plus<>{})),
            (std::vector<rec>{{7, 1}}));
  EXPECT_TRUE(reduce_by_key(ctx, make_dataset(ctx, std::vector<rec>{}), std::plus<>{}).empty());
}

TEST(ReduceByKey, MatchesSequentialFoldOnShuffledInput) {
  using rec = keyed<std::uint64_t, std::int64_t>;
  std::mt19937_64 rng(5);
  std::vector<rec> input;
  for (int i = 0; i < 2000; ++i) {
    input.emplace_back(rng() % 97, static_cast<std::int64_t>(rng() % 1000) - 500);
  }
  std::map<std::uint64_t, std::int64_t> expected;
  for (const auto& [k, v] : input) expected[k] += v;
  const std::vector<rec> want(expected.begin(), expected.end());

  for (auto p : kParallelism) {
    std::shuffle(input.begin(), input.end(), rng);
    execution_context ctx(p);
    EXPECT_EQ(sorted(reduce_by_key(ctx, make_dataset(ctx, input), std::plus<>{})), want) << "P=" << p;
  }
}

TEST(Join, InnerEquiJoin) {
  execution_context ctx(2);
  using lrec = keyed<std::uint64_t, char>;
  using rrec = keyed<std::uint64_t, char>;
  auto concat_values = [](const lrec& l, const rrec& r) { return std::string{l.second, r.second}; };
  auto out = join(ctx, make_dataset(ctx, std::vector<lrec>{{1, 'a'}}),
                  make_dataset(ctx, std::vector<rrec>{{1, 'x'}, {1, 'y'}}), concat_values);
  EXPECT_EQ(sorted(out), (std::vector<std::string>{"ax", "ay"}));
  EXPECT_TRUE(join(ctx, make_dataset(ctx, std::vector<lrec>{{1, 'a'}}),
                   make_dataset(ctx, std::vector<rrec>{{2, 'x'}}), concat_values)
                  .empty());
  EXPECT_TRUE(join(ctx, make_dataset(ctx, std::vector<lrec>{}),
                   make_dataset(ctx, std::vector<rrec>{{1, 'x'}}), concat_values)
                  .empty());
}

TEST(Join, CardinalityMatchesBruteForce) {
  using rec = keyed<std::uint64_t, int>;
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<rec> l, r;
    for (int i = 0; i < 50; ++i) l.emplace_back(rng() % 10, i);
    for (int i = 0; i < 50; ++i) r.emplace_back(rng() % 10, i);
    std::size_t brute = 0;
    std::vector<std::pair<int, int>> brute_pairs;
    for (const auto& a : l)
      for (const auto& b : r)
        if (a.first == b.first) brute_pairs.emplace_back(a.second, b.second);
    brute = brute_pairs.size();
    std::sort(brute_pairs.begin(), brute_pairs.end());
    for (auto p : kParallelism) {
      execution_context ctx(p);
      auto out = join(ctx, make_dataset(ctx, l), make_dataset(ctx, r),
                      [](const rec& a, const rec& b) { return std::pair<int, int>(a.second, b.second); });
      EXPECT_EQ(count(out), brute);
      EXPECT_EQ(sorted(out), brute_pairs);
    }
  }
}

TEST(Count, ExactAndPartitionIndependent) {
  execution_context ctx(4);
  EXPECT_EQ(count(make_dataset(ctx, std::vector<int>{})), 0U);
  EXPECT_EQ(count(make_dataset(ctx, std::vector<char>{'a', 'b', 'c'})), 3U);
  using rec = keyed<std::uint64_t, int>;
  auto d = make_dataset(ctx, std::vector<rec>{{1, 1}, {2, 2}, {3, 3}, {9, 9}});
  EXPECT_EQ(count(repartition_by_key(ctx, d, 3)), count(d));
}

TEST(RepartitionByKey, CoLocatesKeys) {
  execution_context ctx(2);
  using rec = keyed<std::uint64_t, char>;
  auto d = make_dataset(ctx, std::vector<rec>{{1, 'a'}, {1, 'b'}, {2, 'c'}});
  auto r = repartition_by_key(ctx, d, 2);
  ASSERT_EQ(r.partition_count(), 2U);
  for (std::size_t p = 0; p < 2; ++p) {
    for (const auto& [k, v] : r.partition(p)) EXPECT_EQ(k % 2, p);
  }
  std::size_t where_one = 0, ones = 0;
  for (std::size_t p = 0; p < 2; ++p)
    for (const auto& [k, v] : r.partition(p))
      if (k == 1) {
        where_one = p;
        ++ones;
      }
  EXPECT_EQ(ones, 2U);
  EXPECT_EQ(where_one, 1U);

  auto single = repartition_by_key(ctx, d, 1);
  EXPECT_EQ(single.partition_count(), 1U);
  EXPECT_EQ(single.partition(0).size(), 3U);

  EXPECT_THROW(repartition_by_key(ctx, d, 0), parameter_error);
}

TEST(RepartitionByKey, PreservesMultiset) {
  using rec = keyed<std::uint64_t, int>;
  std::mt19937_64 rng(3);
  std::vector<rec> in;
  for (int i = 0; i < 1000; ++i) in.emplace_back(rng(), i);
  execution_context ctx(4);
  auto r = repartition_by_key(ctx, make_dataset(ctx, in), 8);
  EXPECT_EQ(count(r), 1000U);
  std::sort(in.begin(), in.end());
  EXPECT_EQ(sorted(r), in);
}

TEST(Dataflow, OutputsIndependentOfParallelism) {
  using rec = keyed<std::uint64_t, std::uint64_t>;
  std::mt19937_64 rng(23);
  std::vector<rec> l, r;
  for (int i = 0; i < 300; ++i) l.emplace_back(rng() % 40, rng() % 100);
  for (int i = 0; i < 300; ++i) r.emplace_back(rng() % 40, rng() % 100);

  std::vector<rec> ref_reduce;
  std::vector<std::uint64_t> ref_join, ref_filter;
  for (auto p : kParallelism) {
    execution_context ctx(p, 42);
    auto dl = make_dataset(ctx, l);
    auto dr = make_dataset(ctx, r);
    auto red = sorted(reduce_by_key(ctx, dl, std::plus<>{}));
    auto jn = sorted(join(ctx, dl, dr, [](const rec& a, const rec& b) { return a.second * 1000 + b.second; }));
    auto fl = sorted(map(ctx, filter(ctx, dl, [&](const rec& x) { return unit_hash(ctx.seed(), x.second) <= 0.5; }),
                         [](const rec& x) { return x.second; }));
    if (p == 1) {
      ref_reduce = red;
      ref_join = jn;
      ref_filter = fl;
    } else {
      EXPECT_EQ(red, ref_reduce);
      EXPECT_EQ(jn, ref_join);
      EXPECT_EQ(fl, ref_filter);
    }
  }
}

TEST(ExecutionContext, RejectsZeroParallelism) {
  EXPECT_THROW(execution_context(0), parameter_error);
}

TEST(ExecutionContext, PropagatesTaskExceptions) {
  execution_context ctx(4);
  EXPECT_THROW(ctx.parallel_for(8, [](std::size_t i) {
    if (i == 5) throw std::runtime_error("boom");
  }),
               std::runtime_error);
}
