#pragma once

// Edge-list ingestion/export, DOT export, the synthetic power-law generator
// and MetricsReport serialization.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dataflow.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "metrics.hpp"
#include "random.hpp"

namespace gsample {

// SNAP-style edge list: one "source target" pair per line separated by a tab
// or a run of blanks; lines starting with the comment prefix and blank lines
// are ignored.
struct edge_list_format {
  char comment = '#';
};

namespace detail {

inline bool is_blank(char c) noexcept { return c == ' ' || c == '\t' || c == '\r'; }

struct chunk_parse {
  std::vector<std::pair<vertex_id, vertex_id>> pairs;
  std::optional<std::pair<std::size_t, std::string>> error;  // (line, message)
};

inline void parse_chunk(std::string_view text, std::size_t first_line, const edge_list_format& fmt,
                        chunk_parse& out) {
  std::size_t line_no = first_line;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    const std::size_t this_line = line_no++;

    std::size_t i = 0;
    while (i < line.size() && is_blank(line[i])) ++i;
    if (i == line.size() || line[i] == fmt.comment) continue;

    vertex_id ids[2];
    int tokens = 0;
    while (i < line.size()) {
      std::size_t j = i;
      while (j < line.size() && !is_blank(line[j])) ++j;
      std::string_view tok = line.substr(i, j - i);
      if (tokens == 2) {
        out.error = {this_line, "expected exactly two ids, found extra token '" + std::string(tok) + "'"};
        return;
      }
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), ids[tokens]);
      if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        out.error = {this_line, "invalid vertex id '" + std::string(tok) + "'"};
        return;
      }
      ++tokens;
      i = j;
      while (i < line.size() && is_blank(line[i])) ++i;
    }
    if (tokens != 2) {
      out.error = {this_line, "expected exactly two ids"};
      return;
    }
    out.pairs.emplace_back(ids[0], ids[1]);
  }
}

}  // namespace detail

// Parses an edge list held in memory. Byte ranges split at line boundaries
// are parsed concurrently; edge ids are 0..|E|-1 in text order.
inline graph parse_edge_list(const execution_context& ctx, std::string_view text,
                             const edge_list_format& fmt = {}) {
  const std::size_t p = ctx.parallelism();
  std::vector<std::size_t> starts{0};
  for (std::size_t k = 1; k < p; ++k) {
    std::size_t cut = std::max(starts.back(), text.size() * k / p);
    if (cut >= text.size()) break;
    // Advance to the first byte after a newline.
    if (cut > 0 && text[cut - 1] != '\n') {
      const auto nl = text.find('\n', cut);
      if (nl == std::string_view::npos) break;
      cut = nl + 1;
    }
    if (cut > starts.back() && cut < text.size()) starts.push_back(cut);
  }
  starts.push_back(text.size());
  const std::size_t chunks = starts.size() - 1;

  std::vector<std::size_t> newlines(chunks, 0);
  ctx.parallel_for(chunks, [&](std::size_t c) {
    newlines[c] = static_cast<std::size_t>(
        std::count(text.begin() + static_cast<std::ptrdiff_t>(starts[c]),
                   text.begin() + static_cast<std::ptrdiff_t>(starts[c + 1]), '\n'));
  });
  std::vector<std::size_t> first_line(chunks, 1);
  for (std::size_t c = 1; c < chunks; ++c) first_line[c] = first_line[c - 1] + newlines[c - 1];

  std::vector<detail::chunk_parse> parsed(chunks);
  ctx.parallel_for(chunks, [&](std::size_t c) {
    detail::parse_chunk(text.substr(starts[c], starts[c + 1] - starts[c]), first_line[c], fmt, parsed[c]);
  });
  for (const auto& c : parsed) {
    if (c.error) {
      throw parse_error("line " + std::to_string(c.error->first) + ": " + c.error->second);
    }
  }

  std::vector<std::size_t> id_base(chunks, 0);
  for (std::size_t c = 1; c < chunks; ++c) id_base[c] = id_base[c - 1] + parsed[c - 1].pairs.size();
  std::vector<std::vector<edge_record>> edge_parts(p);
  std::vector<std::vector<std::vector<edge_record>>> routed(chunks, std::vector<std::vector<edge_record>>(p));
  ctx.parallel_for(chunks, [&](std::size_t c) {
    for (std::size_t k = 0; k < parsed[c].pairs.size(); ++k) {
      const edge_id id = id_base[c] + k;
      routed[c][id % p].push_back({id, parsed[c].pairs[k].first, parsed[c].pairs[k].second});
    }
  });
  ctx.parallel_for(p, [&](std::size_t t) {
    for (std::size_t c = 0; c < chunks; ++c) {
      edge_parts[t].insert(edge_parts[t].end(), routed[c][t].begin(), routed[c][t].end());
    }
  });
  dataset<edge_record> edges(std::move(edge_parts));

  auto ids = distinct_keys(ctx, detail::endpoint_keys(ctx, edges));
  auto vertices = map(ctx, ids, [](vertex_id id) { return vertex_record{id, vertex_flag::none}; });
  return {vertices, edges};
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::string data;
  in.seekg(0, std::ios::end);
  data.resize(static_cast<std::size_t>(in.tellg()));
  in.seekg(0, std::ios::beg);
  in.read(data.data(), static_cast<std::streamsize>(data.size()));
  if (!in) throw io_error("cannot read " + path.string());
  return data;
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw io_error("cannot write " + path.string());
}

inline graph read_edge_list(const execution_context& ctx, const std::filesystem::path& path,
                            const edge_list_format& fmt = {}) {
  const auto text = read_file(path);
  return parse_edge_list(ctx, text, fmt);
}

// Edges ordered by (source, target, edge id), tab separated.
inline std::string format_edge_list(const graph& g) {
  std::string out;
  const auto edges = sorted_edges(g);
  out.reserve(edges.size() * 16);
  char buf[24];
  for (const auto& e : edges) {
    out.append(buf, std::to_chars(buf, buf + sizeof buf, e.source).ptr);
    out.push_back('\t');
    out.append(buf, std::to_chars(buf, buf + sizeof buf, e.target).ptr);
    out.push_back('\n');
  }
  return out;
}

inline void write_edge_list(const graph& g, const std::filesystem::path& path) {
  write_file(path, format_edge_list(g));
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace detail

// DOT digraph whose nodes carry `degree` (total) and `local_cc` (directed
// denominator) attributes for an external layout tool.
inline std::string format_dot(const execution_context& ctx, const graph& g) {
  const auto sg = build_simple_graph(ctx, g);
  const auto tri = count_triangles(ctx, sg);
  const auto cc = local_clustering(sg, tri, local_cc_mode::directed);
  std::vector<std::uint64_t> degree(sg.vertex_count(), 0);
  for (const auto& part : g.edges.partitions()) {
    for (const auto& e : part) {
      ++degree[detail::dense_index(sg.ids, e.source)];
      ++degree[detail::dense_index(sg.ids, e.target)];
    }
  }
  std::ostringstream os;
  os << "digraph sample {\n";
  for (std::size_t v = 0; v < sg.vertex_count(); ++v) {
    os << "  " << sg.ids[v] << " [degree=" << degree[v] << ", local_cc=" << detail::format_double(cc[v])
       << "];\n";
  }
  for (const auto& e : sorted_edges(g)) os << "  " << e.source << " -> " << e.target << ";\n";
  os << "}\n";
  return os.str();
}

inline void write_dot(const execution_context& ctx, const graph& g, const std::filesystem::path& path) {
  write_file(path, format_dot(ctx, g));
}

struct synthetic_spec {
  std::uint64_t vertices = 1;
  std::uint64_t edges = 0;
  double exponent = 2.5;
  std::uint64_t seed = 0;
};

// Power-law graph: vertex i has weight (i + 1)^(-1 / (exponent - 1)), which
// yields expected degrees with a power-law tail of the given exponent. Both
// endpoints of edge k are drawn from the weights with hashes of (seed, k,
// attempt), so the output does not depend on parallelism. Self-loops are
// redrawn; parallel edges are kept.
inline graph generate_synthetic(const execution_context& ctx, const synthetic_spec& spec) {
  if (spec.vertices < 1) throw parameter_error("synthetic graph needs at least one vertex");
  if (!(spec.exponent > 1.0)) throw parameter_error("power-law exponent must be > 1");
  if (spec.vertices == 1 && spec.edges > 0) {
    throw parameter_error("a single vertex admits no edges without self-loops");
  }
  const std::size_t n = spec.vertices;
  std::vector<double> cdf(n);
  const double alpha = 1.0 / (spec.exponent - 1.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += std::pow(static_cast<double>(i + 1), -alpha);
    cdf[i] = total;
  }
  auto draw = [&](std::uint64_t h) -> vertex_id {
    const double u = to_unit_closed_open(h) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<vertex_id>(it - cdf.begin());
  };

  const std::size_t p = ctx.parallelism();
  std::vector<std::vector<edge_record>> parts(p);
  ctx.parallel_for(p, [&](std::size_t part) {
    for (std::uint64_t k = part; k < spec.edges; k += p) {
      for (std::uint64_t attempt = 0;; ++attempt) {
        const vertex_id s = draw(hash_combine(spec.seed, {k, attempt, 0}));
        const vertex_id t = draw(hash_combine(spec.seed, {k, attempt, 1}));
        if (s != t) {
          parts[part].push_back({k, s, t});
          break;
        }
      }
    }
  });

  std::vector<std::vector<vertex_record>> vparts(p);
  ctx.parallel_for(p, [&](std::size_t part) {
    for (std::uint64_t v = part; v < n; v += p) vparts[part].push_back({v, vertex_flag::none});
  });
  return {dataset<vertex_record>(std::move(vparts)), dataset<edge_record>(std::move(parts))};
}

// Parses "n=<int>,m=<int>[,gamma=<float>]".
inline synthetic_spec parse_synthetic_spec(std::string_view text) {
  synthetic_spec spec;
  bool have_n = false, have_m = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto item = text.substr(pos, end - pos);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw parameter_error("expected key=value in '" + std::string(item) + "'");
    const auto key = item.substr(0, eq);
    const auto value = item.substr(eq + 1);
    auto fail = [&] { throw parameter_error("invalid value for '" + std::string(key) + "'"); };
    if (key == "n" || key == "m") {
      std::uint64_t v = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || ptr != value.data() + value.size()) fail();
      (key == "n" ? spec.vertices : spec.edges) = v;
      (key == "n" ? have_n : have_m) = true;
    } else if (key == "gamma") {
      double v = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || ptr != value.data() + value.size()) fail();
      spec.exponent = v;
    } else {
      throw parameter_error("unknown generator parameter '" + std::string(key) + "'");
    }
    pos = end + 1;
  }
  if (!have_n || !have_m) throw parameter_error("generator spec needs both n and m");
  return spec;
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

template <class T>
std::string format_metric_value(const metric<T>& m) {
  if (!m.value) return m.reason.empty() ? "null" : "null (" + m.reason + ")";
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(*m.value);
  } else {
    return std::to_string(*m.value);
  }
}

template <class T>
void parse_metric_value(std::string_view name, std::string_view text, metric<T>& m) {
  m = {};
  if (text.substr(0, 4) == "null") {
    auto rest = text.substr(4);
    while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    if (!rest.empty()) {
      if (rest.front() != '(' || rest.back() != ')') {
        throw parse_error("field " + std::string(name) + ": malformed null reason");
      }
      m.reason = std::string(rest.substr(1, rest.size() - 2));
    }
    return;
  }
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw parse_error("field " + std::string(name) + ": invalid value '" + std::string(text) + "'");
  }
  m.value = v;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

// One "name = value" line per metric; absent values read "null (reason)".
inline std::string format_report_text(const metrics_report& r) {
  std::string out;
  for_each_metric(r, [&](std::string_view name, const auto& m) {
    out.append(name).append(" = ").append(detail::format_metric_value(m)).append("\n");
  });
  return out;
}

inline metrics_report parse_report_text(std::string_view text) {
  metrics_report r;
  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw parse_error("line " + std::to_string(line_no) + ": expected 'metric = value'");
    }
    entries.emplace_back(std::string(detail::trim(line.substr(0, eq))),
                         std::string(detail::trim(line.substr(eq + 1))));
  }
  for (const auto& [name, value] : entries) {
    bool known = false;
    for_each_metric(r, [&](std::string_view field, const auto&) { known = known || field == name; });
    if (!known) throw parse_error("unknown field " + name);
  }
  for_each_metric(r, [&](std::string_view name, auto& m) {
    auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.first == name; });
    if (it == entries.end()) throw parse_error("missing field " + std::string(name));
    detail::parse_metric_value(name, it->second, m);
  });
  return r;
}

inline nlohmann::json report_to_json(const metrics_report& r) {
  nlohmann::json j = nlohmann::json::object();
  nlohmann::json reasons = nlohmann::json::object();
  for_each_metric(r, [&](std::string_view name, const auto& m) {
    const std::string key(name);
    if (m.value) {
      j[key] = *m.value;
    } else {
      j[key] = nullptr;
      reasons[key] = m.reason;
    }
  });
  j["null_reasons"] = reasons;
  return j;
}

inline metrics_report report_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw parse_error("report must be a JSON object");
  metrics_report r;
  for_each_metric(r, [&](std::string_view name, auto& m) {
    const std::string key(name);
    if (!j.contains(key)) throw parse_error("missing field " + key);
    const auto& v = j.at(key);
    m = {};
    if (v.is_null()) {
      if (j.contains("null_reasons") && j["null_reasons"].contains(key)) {
        m.reason = j["null_reasons"][key].template get<std::string>();
      }
      return;
    }
    using T = typename decltype(m.value)::value_type;
    if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw parse_error("field " + key + ": expected a number");
    } else {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.template get<std::int64_t>() >= 0)) {
        throw parse_error("field " + key + ": expected a non-negative integer");
      }
    }
    m.value = v.template get<T>();
  });
  return r;
}

inline std::string format_report_json(const metrics_report& r) { return report_to_json(r).dump(2) + "\n"; }

inline metrics_report parse_report_json(std::string_view text) {
  try {
    return report_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("malformed JSON report: ") + e.what());
  }
}

// `.json` selects the structured form; anything else the key-value text.
inline void write_report(const metrics_report& r, const std::filesystem::path& path) {
  write_file(path, path.extension() == ".json" ? format_report_json(r) : format_report_text(r));
}

inline metrics_report read_report(const std::filesystem::path& path) {
  const auto text = read_file(path);
  return path.extension() == ".json" ? parse_report_json(text) : parse_report_text(text);
}

}  // namespace gsample
