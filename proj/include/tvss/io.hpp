#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "tvss/graph.hpp"

namespace tvss::io {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Edge list: header `#nodes N`, then one `i<TAB>j<TAB>w` line per edge with
// 1-based i < j and weights printed with 17 significant digits.
void write_edge_list(std::ostream& out, const EmpiricalGraph& g);
EmpiricalGraph read_edge_list(std::istream& in, const std::string& source = "<stream>");
void save_edge_list(const std::filesystem::path& path, const EmpiricalGraph& g);
EmpiricalGraph load_edge_list(const std::filesystem::path& path);

// Node values: header `node,value`, then one `i,value` row per node (1-based).
// Used for label sets, ground truth and learned labelings.
void write_labels(std::ostream& out, const LabelSet& labels);
LabelSet read_labels(std::istream& in, std::size_t node_count, const std::string& source = "<stream>");
void save_labels(const std::filesystem::path& path, const LabelSet& labels);
LabelSet load_labels(const std::filesystem::path& path, std::size_t node_count);

void write_signal(std::ostream& out, const GraphSignal& x);
/// Every node 1..node_count must appear exactly once.
GraphSignal read_signal(std::istream& in, std::size_t node_count, const std::string& source = "<stream>");
void save_signal(const std::filesystem::path& path, const GraphSignal& x);
GraphSignal load_signal(const std::filesystem::path& path, std::size_t node_count);

/// `%.17g`, with inf/nan spelled the way strtod reads them back.
std::string format_double(double v);

}  // namespace tvss::io
