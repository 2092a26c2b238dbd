#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "gsample/io.hpp"
#include "gsample/metrics.hpp"
#include "gsample/random_walk.hpp"
#include "gsample/sampling.hpp"

namespace gsample::cli {

// Bad flags or out-of-range values; reported with exit status 2.
struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class algorithm { rv, re, rvn, rw };

inline algorithm parse_algorithm(std::string_view s) {
  if (s == "rv") return algorithm::rv;
  if (s == "re") return algorithm::re;
  if (s == "rvn") return algorithm::rvn;
  if (s == "rw") return algorithm::rw;
  throw usage_error("unknown algorithm '" + std::string(s) + "' (expected rv, re, rvn or rw)");
}

inline std::string_view algorithm_name(algorithm a) {
  switch (a) {
    case algorithm::rv: return "rv";
    case algorithm::re: return "re";
    case algorithm::rvn: return "rvn";
    case algorithm::rw: return "rw";
  }
  return "?";
}

struct sampler_options {
  std::string algorithm = "rv";
  double sample_size = 0.4;
  std::uint64_t seed = 0;
  std::optional<std::string> direction;
  std::optional<std::size_t> walkers;
  std::optional<double> jump_probability;
};

inline void add_sampler_flags(CLI::App& cmd, sampler_options& o, bool size_required) {
  cmd.add_option("--algorithm", o.algorithm, "rv, re, rvn or rw")->required();
  auto* s = cmd.add_option("--sample-size", o.sample_size, "target ratio in [0,1]");
  if (size_required) s->required();
  cmd.add_option("--seed", o.seed);
  cmd.add_option("--direction", o.direction, "in, out or both (rvn only, default both)");
  cmd.add_option("--walkers", o.walkers, "number of walkers (rw only, default 1)");
  cmd.add_option("--jump-probability", o.jump_probability, "in [0,1] (rw only, default 0.1)");
}

// A sampler with its flags checked; running it may still fail at runtime.
struct sampler {
  algorithm kind = algorithm::rv;
  double s = 0.0;
  std::uint64_t seed = 0;
  neighborhood_direction direction = neighborhood_direction::both;
  std::size_t walkers = 1;
  double jump_probability = 0.1;

  graph operator()(const execution_context& ctx, const graph& g) const {
    switch (kind) {
      case algorithm::rv: return random_vertex_sample(ctx, g, sample_size(s), seed);
      case algorithm::re: return random_edge_sample(ctx, g, sample_size(s), seed);
      case algorithm::rvn: return random_vertex_neighborhood_sample(ctx, g, sample_size(s), seed, direction);
      case algorithm::rw: {
        walk_params p;
        p.s = sample_size(s);
        p.walkers = walkers;
        p.jump_probability = jump_probability;
        p.seed = seed;
        return random_walk_sample(ctx, g, p).sample;
      }
    }
    return {};
  }
};

inline sampler make_sampler(const sampler_options& o) {
  sampler r;
  r.kind = parse_algorithm(o.algorithm);
  if (!(o.sample_size >= 0.0 && o.sample_size <= 1.0)) throw usage_error("--sample-size must be in [0,1]");
  r.s = o.sample_size;
  r.seed = o.seed;
  if (o.direction) {
    if (r.kind != algorithm::rvn) throw usage_error("--direction applies only to --algorithm rvn");
    try {
      r.direction = parse_direction(*o.direction);
    } catch (const parameter_error& e) {
      throw usage_error(e.what());
    }
  }
  if ((o.walkers || o.jump_probability) && r.kind != algorithm::rw) {
    throw usage_error("--walkers and --jump-probability apply only to --algorithm rw");
  }
  if (o.walkers) {
    if (*o.walkers < 1) throw usage_error("--walkers must be at least 1");
    r.walkers = *o.walkers;
  }
  if (o.jump_probability) {
    if (!(*o.jump_probability >= 0.0 && *o.jump_probability <= 1.0)) {
      throw usage_error("--jump-probability must be in [0,1]");
    }
    r.jump_probability = *o.jump_probability;
  }
  return r;
}

inline std::vector<std::size_t> parse_parallelism_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    const auto item = std::string_view(text).substr(pos, end - pos);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size() || v < 1) {
      throw usage_error("--parallelism expects positive integers, got '" + std::string(item) + "'");
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

inline std::size_t parse_parallelism(const std::optional<std::string>& text) {
  if (!text) return std::max(1U, std::thread::hardware_concurrency());
  const auto list = parse_parallelism_list(*text);
  if (list.size() != 1) throw usage_error("--parallelism takes a single value here");
  return list.front();
}

inline void append_bench_rows(const std::filesystem::path& path, const std::vector<std::string>& rows) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw io_error("cannot open " + path.string() + " for appending");
  if (fresh) out << "algorithm,n,m,parallelism,seconds,sample_vertices,sample_edges\n";
  for (const auto& r : rows) out << r << '\n';
  if (!out) throw io_error("failed writing " + path.string());
}

struct bench_row {
  std::size_t parallelism = 1;
  double seconds = 0.0;
  std::uint64_t sample_vertices = 0;
  std::uint64_t sample_edges = 0;
};

// glibc serves large blocks with fresh mmap pages and unmaps them on free,
// so every repetition of a large job pays its page faults again while small
// jobs reuse the heap. Keeping freed memory makes timings comparable across
// graph sizes.
inline void retain_freed_memory() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_MAX, 0);
  mallopt(M_TRIM_THRESHOLD, std::numeric_limits<int>::max());
#endif
}

// Times read + sample + write of `input` at each parallelism degree,
// averaging `repetitions` runs.
inline std::vector<bench_row> run_bench(const std::filesystem::path& input, const sampler& smp,
                                        const std::vector<std::size_t>& parallelism,
                                        std::size_t repetitions, const std::filesystem::path& scratch) {
  retain_freed_memory();
  std::vector<bench_row> rows;
  for (auto p : parallelism) {
    execution_context ctx(p);
    bench_row row;
    row.parallelism = p;
    double total = 0.0;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      const auto g = read_edge_list(ctx, input);
      const auto s = smp(ctx, g);
      write_edge_list(s, scratch);
      total += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      row.sample_vertices = s.vertex_count();
      row.sample_edges = s.edge_count();
    }
    row.seconds = total / static_cast<double>(repetitions);
    rows.push_back(row);
  }
  return rows;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Graph sampling on a partitioned dataflow engine", "gsample"};
  app.require_subcommand(1);

  std::optional<std::string> parallelism;
  auto add_parallelism = [&](CLI::App* cmd) {
    cmd->add_option("--parallelism", parallelism, "worker count (bench: comma-separated list)");
  };

  auto* sample_cmd = app.add_subcommand("sample", "sample a graph and write the sampled edge list");
  sampler_options sample_opts;
  std::string sample_input, sample_output;
  std::optional<std::string> dot_path;
  add_sampler_flags(*sample_cmd, sample_opts, true);
  sample_cmd->add_option("--input", sample_input)->required();
  sample_cmd->add_option("--output", sample_output)->required();
  sample_cmd->add_option("--dot", dot_path, "also write a DOT rendering of the sample");
  add_parallelism(sample_cmd);

  auto* metrics_cmd = app.add_subcommand("metrics", "compute the metrics report of a graph");
  std::string metrics_input;
  std::optional<std::string> metrics_output;
  bool skip_heavy = false;
  std::string cc_mode = "directed";
  metrics_cmd->add_option("--input", metrics_input)->required();
  metrics_cmd->add_option("--output", metrics_output, "report path; .json selects JSON");
  metrics_cmd->add_flag("--skip-heavy-metrics", skip_heavy);
  metrics_cmd->add_option("--local-cc-mode", cc_mode, "directed or undirected denominator");
  add_parallelism(metrics_cmd);

  auto* compare_cmd = app.add_subcommand(
      "compare", "diff two reports, or a graph against a sample of it when --algorithm is given");
  std::vector<std::string> compare_inputs;
  std::optional<std::string> compare_output;
  sampler_options compare_opts;
  compare_opts.algorithm.clear();
  compare_cmd->add_option("--input", compare_inputs, "two report files, or one edge list")->required();
  compare_cmd->add_option("--output", compare_output);
  compare_cmd->add_option("--algorithm", compare_opts.algorithm);
  compare_cmd->add_option("--sample-size", compare_opts.sample_size);
  compare_cmd->add_option("--seed", compare_opts.seed);
  compare_cmd->add_option("--direction", compare_opts.direction);
  compare_cmd->add_option("--walkers", compare_opts.walkers);
  compare_cmd->add_option("--jump-probability", compare_opts.jump_probability);
  compare_cmd->add_flag("--skip-heavy-metrics", skip_heavy);
  add_parallelism(compare_cmd);

  auto* bench_cmd = app.add_subcommand("bench", "time sampling jobs across parallelism degrees");
  sampler_options bench_opts;
  std::optional<std::string> generate, bench_input;
  std::string bench_out = "bench.csv";
  std::size_t repetitions = 3;
  add_sampler_flags(*bench_cmd, bench_opts, false);
  auto* gen_opt = bench_cmd->add_option("--generate", generate, "n=<int>,m=<int>[,gamma=<float>]");
  auto* in_opt = bench_cmd->add_option("--input", bench_input);
  gen_opt->excludes(in_opt);
  bench_cmd->add_option("--out", bench_out, "CSV file to append to");
  bench_cmd->add_option("--repetitions", repetitions)->check(CLI::PositiveNumber);
  add_parallelism(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "gsample: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*sample_cmd) {
      const auto smp = make_sampler(sample_opts);
      execution_context ctx(parse_parallelism(parallelism));
      const auto g = read_edge_list(ctx, sample_input);
      const auto s = smp(ctx, g);
      write_edge_list(s, sample_output);
      if (dot_path) write_dot(ctx, s, *dot_path);
      out << "sampled " << s.vertex_count() << " vertices, " << s.edge_count() << " edges\n";
    } else if (*metrics_cmd) {
      report_options opts;
      opts.skip_heavy = skip_heavy;
      try {
        opts.cc_mode = parse_local_cc_mode(cc_mode);
      } catch (const parameter_error& e) {
        throw usage_error(e.what());
      }
      execution_context ctx(parse_parallelism(parallelism));
      const auto r = metrics_report_of(ctx, read_edge_list(ctx, metrics_input), opts);
      if (metrics_output) {
        write_report(r, *metrics_output);
      } else {
        out << format_report_text(r);
      }
    } else if (*compare_cmd) {
      std::string table;
      report_options opts;
      opts.skip_heavy = skip_heavy;
      if (compare_opts.algorithm.empty()) {
        if (compare_inputs.size() != 2) {
          throw usage_error("compare needs two report files, or one edge list with --algorithm");
        }
        table = render_comparison(compare_reports(read_report(compare_inputs[0]), read_report(compare_inputs[1])),
                                  compare_inputs[0], compare_inputs[1]);
      } else {
        if (compare_inputs.size() != 1) throw usage_error("compare with --algorithm takes one edge list");
        const auto smp = make_sampler(compare_opts);
        execution_context ctx(parse_parallelism(parallelism));
        const auto g = read_edge_list(ctx, compare_inputs[0]);
        const auto s = smp(ctx, g);
        table = render_comparison(compare_reports(metrics_report_of(ctx, g, opts), metrics_report_of(ctx, s, opts)),
                                  "original", algorithm_name(smp.kind));
      }
      out << table;
      if (compare_output) write_file(*compare_output, table);
    } else if (*bench_cmd) {
      if (!generate && !bench_input) throw usage_error("bench needs --generate or --input");
      const auto smp = make_sampler(bench_opts);
      const auto degrees = parallelism ? parse_parallelism_list(*parallelism) : std::vector<std::size_t>{1};

      namespace fs = std::filesystem;
      const auto scratch_dir =
          fs::temp_directory_path() / ("gsample_bench_" + std::to_string(std::random_device{}()));
      fs::create_directories(scratch_dir);
      struct cleanup {
        fs::path p;
        ~cleanup() {
          std::error_code ec;
          fs::remove_all(p, ec);
        }
      } guard{scratch_dir};

      fs::path input;
      std::uint64_t n = 0, m = 0;
      if (generate) {
        synthetic_spec spec;
        try {
          spec = parse_synthetic_spec(*generate);
        } catch (const parameter_error& e) {
          throw usage_error(e.what());
        }
        spec.seed = bench_opts.seed;
        execution_context gen_ctx(*std::max_element(degrees.begin(), degrees.end()));
        const auto g = generate_synthetic(gen_ctx, spec);
        input = scratch_dir / "input.txt";
        write_edge_list(g, input);
        n = g.vertex_count();
        m = g.edge_count();
      } else {
        input = *bench_input;
        execution_context probe(1);
        const auto g = read_edge_list(probe, input);
        n = g.vertex_count();
        m = g.edge_count();
      }

      const auto rows = run_bench(input, smp, degrees, repetitions, scratch_dir / "sample.txt");
      std::vector<std::string> lines;
      for (const auto& r : rows) {
        std::ostringstream line;
        line << algorithm_name(smp.kind) << ',' << n << ',' << m << ',' << r.parallelism << ','
             << std::fixed << std::setprecision(6) << r.seconds << ',' << r.sample_vertices << ','
             << r.sample_edges;
        lines.push_back(line.str());
        out << line.str() << '\n';
      }
      append_bench_rows(bench_out, lines);
    }
  } catch (const usage_error& e) {
    err << "gsample: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "gsample: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace gsample::cli
