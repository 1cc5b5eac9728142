#include "tvss/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace tvss::io {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t k = 0; k <= s.size(); ++k) {
    if (k == s.size() || s[k] == sep) {
      out.push_back(trim(s.substr(start, k - start)));
      start = k + 1;
    }
  }
  return out;
}

std::size_t parse_index(std::string_view s, std::size_t node_count, const std::string& src, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(src, line, "invalid node index '" + std::string(s) + "'");
  }
  if (v < 1 || v > node_count) {
    throw ParseError(src, line, "node index " + std::string(s) + " outside 1.." + std::to_string(node_count));
  }
  return v - 1;
}

double parse_real(std::string_view s, const std::string& src, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(src, line, "invalid real value '" + std::string(s) + "'");
  }
  return v;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

struct Row {
  std::size_t node;
  double value;
};

std::vector<Row> read_node_values(std::istream& in, std::size_t node_count, const std::string& src) {
  std::string text;
  std::size_t line = 0;
  bool header = false;
  std::vector<Row> rows;
  while (std::getline(in, text)) {
    ++line;
    auto body = trim(text);
    if (body.empty()) continue;
    if (!header) {
      if (body != "node,value") throw ParseError(src, line, "expected header 'node,value'");
      header = true;
      continue;
    }
    auto fields = split(body, ',');
    if (fields.size() != 2) throw ParseError(src, line, "expected 'node,value'");
    rows.push_back({parse_index(fields[0], node_count, src, line), parse_real(fields[1], src, line)});
  }
  if (!header) throw ParseError(src, line, "missing header 'node,value'");
  return rows;
}

}  // namespace

void write_edge_list(std::ostream& out, const EmpiricalGraph& g) {
  out << "#nodes " << g.node_count() << '\n';
  for (const Edge& e : g.edges()) {
    out << (e.u + 1) << '\t' << (e.v + 1) << '\t' << format_double(e.weight) << '\n';
  }
}

EmpiricalGraph read_edge_list(std::istream& in, const std::string& source) {
  std::string text;
  std::size_t line = 0;
  std::size_t node_count = 0;
  bool header = false;
  std::vector<Edge> edges;
  std::vector<std::size_t> lines;
  while (std::getline(in, text)) {
    ++line;
    auto body = trim(text);
    if (body.empty()) continue;
    if (!header) {
      constexpr std::string_view tag = "#nodes ";
      if (body.substr(0, tag.size()) != tag) throw ParseError(source, line, "expected header '#nodes N'");
      auto count = trim(body.substr(tag.size()));
      auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), node_count);
      if (ec != std::errc{} || ptr != count.data() + count.size() || node_count == 0) {
        throw ParseError(source, line, "invalid node count '" + std::string(count) + "'");
      }
      header = true;
      continue;
    }
    auto fields = split(body, '\t');
    if (fields.size() != 3) throw ParseError(source, line, "expected 'i<TAB>j<TAB>w'");
    const auto i = parse_index(fields[0], node_count, source, line);
    const auto j = parse_index(fields[1], node_count, source, line);
    const double w = parse_real(fields[2], source, line);
    if (i == j) throw ParseError(source, line, "self-loop at node " + std::to_string(i + 1));
    if (!(w > 0.0)) throw ParseError(source, line, "non-positive weight");
    edges.push_back({static_cast<NodeIndex>(i), static_cast<NodeIndex>(j), w});
    lines.push_back(line);
  }
  if (!header) throw ParseError(source, line, "missing header '#nodes N'");
  try {
    return EmpiricalGraph(node_count, edges);
  } catch (const GraphError& e) {
    // Only duplicates can fail here; report the file position of the second copy.
    std::vector<std::pair<std::pair<NodeIndex, NodeIndex>, std::size_t>> keyed;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      keyed.push_back({{std::min(edges[k].u, edges[k].v), std::max(edges[k].u, edges[k].v)}, lines[k]});
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t k = 1; k < keyed.size(); ++k) {
      if (keyed[k].first == keyed[k - 1].first) throw ParseError(source, keyed[k].second, e.what());
    }
    throw ParseError(source, line, e.what());
  }
}

void save_edge_list(const std::filesystem::path& path, const EmpiricalGraph& g) {
  auto out = open_out(path);
  write_edge_list(out, g);
  finish(out, path);
}

EmpiricalGraph load_edge_list(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_edge_list(in, path.string());
}

void write_labels(std::ostream& out, const LabelSet& labels) {
  out << "node,value\n";
  for (std::size_t k = 0; k < labels.size(); ++k) {
    out << (labels.nodes()[k] + 1) << ',' << format_double(labels.values()[k]) << '\n';
  }
}

LabelSet read_labels(std::istream& in, std::size_t node_count, const std::string& source) {
  std::vector<LabelSet::Entry> entries;
  for (const Row& r : read_node_values(in, node_count, source)) {
    entries.push_back({static_cast<NodeIndex>(r.node), r.value});
  }
  try {
    return LabelSet(node_count, std::move(entries));
  } catch (const GraphError& e) {
    throw ParseError(source, 0, e.what());
  }
}

void save_labels(const std::filesystem::path& path, const LabelSet& labels) {
  auto out = open_out(path);
  write_labels(out, labels);
  finish(out, path);
}

LabelSet load_labels(const std::filesystem::path& path, std::size_t node_count) {
  auto in = open_in(path);
  return read_labels(in, node_count, path.string());
}

void write_signal(std::ostream& out, const GraphSignal& x) {
  out << "node,value\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    out << (i + 1) << ',' << format_double(x[i]) << '\n';
  }
}

GraphSignal read_signal(std::istream& in, std::size_t node_count, const std::string& source) {
  GraphSignal x(node_count, 0.0);
  std::vector<std::uint8_t> seen(node_count, 0);
  for (const Row& r : read_node_values(in, node_count, source)) {
    if (seen[r.node]) throw ParseError(source, 0, "node " + std::to_string(r.node + 1) + " listed twice");
    seen[r.node] = 1;
    x[r.node] = r.value;
  }
  for (std::size_t i = 0; i < node_count; ++i) {
    if (!seen[i]) throw ParseError(source, 0, "node " + std::to_string(i + 1) + " missing");
  }
  return x;
}

void save_signal(const std::filesystem::path& path, const GraphSignal& x) {
  auto out = open_out(path);
  write_signal(out, x);
  finish(out, path);
}

GraphSignal load_signal(const std::filesystem::path& path, std::size_t node_count) {
  auto in = open_in(path);
  return read_signal(in, node_count, path.string());
}

}  // namespace tvss::io
