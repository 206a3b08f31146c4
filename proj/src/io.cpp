#include "edagcn/io.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <string_view>

#include "edagcn/error.hpp"

namespace edagcn {
namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool skippable(std::string_view line) { return line.empty() || line.front() == '#'; }

template <class T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return !text.empty() && ec == std::errc{} && ptr == end;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    cells.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

}  // namespace

namespace {

template <class OnPair>
void read_pairs(const std::filesystem::path& path, OnPair&& on_pair) {
  auto in = open_input(path);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (skippable(line)) continue;
    const auto sep = line.find_first_of(" \t");
    long long u = 0, v = 0;
    if (sep == std::string_view::npos || !parse_number(line.substr(0, sep), u) ||
        !parse_number(line.substr(sep + 1), v) || u < 0 || v < 0)
      throw ParseError("expected \"u<TAB>v\" in " + path.string(), line_no);
    on_pair(static_cast<unsigned long long>(u), static_cast<unsigned long long>(v), line_no);
  }
}

}  // namespace

Graph load_edge_list(const std::filesystem::path& path, std::size_t n_nodes) {
  std::vector<Edge> edges;
  read_pairs(path, [&](unsigned long long u, unsigned long long v, std::size_t line_no) {
    if (u >= n_nodes || v >= n_nodes)
      throw BoundsError("endpoint outside 0.." + std::to_string(n_nodes - 1) + " at line " +
                        std::to_string(line_no) + " of " + path.string());
    if (u == v)
      throw ValidationError("self-loop at line " + std::to_string(line_no) + " of " + path.string());
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  });
  return Graph(n_nodes, std::move(edges));
}

std::size_t edge_list_node_count(const std::filesystem::path& path) {
  unsigned long long count = 0;
  read_pairs(path, [&](unsigned long long u, unsigned long long v, std::size_t line_no) {
    if (std::max(u, v) >= std::numeric_limits<NodeId>::max())
      throw BoundsError("node id too large at line " + std::to_string(line_no) + " of " + path.string());
    count = std::max(count, std::max(u, v) + 1);
  });
  return static_cast<std::size_t>(count);
}

void save_edge_list(const std::filesystem::path& path, const Graph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (const Edge& e : g.edges()) out << e.u << '\t' << e.v << '\n';
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    std::vector<double> row;
    for (std::string_view cell : split(line, ',')) {
      double value = 0.0;
      if (!parse_number(cell, value) || !std::isfinite(value))
        throw ParseError("non-numeric cell \"" + std::string(trim(cell)) + "\"", line_no);
      row.push_back(value);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ShapeError("row at line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                       " columns, expected " + std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ShapeError("feature file " + path.string() + " is empty");
  FeatureMatrix x;
  x.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      x.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return x;
}

LabelData load_labels_and_splits(const std::filesystem::path& labels_path,
                                 const std::filesystem::path& splits_path,
                                 std::optional<std::size_t> n_nodes) {
  std::map<NodeId, int> classes;
  std::size_t max_node = 0;
  bool any = false;
  auto note_node = [&](long long v) {
    max_node = std::max<std::size_t>(max_node, static_cast<std::size_t>(v));
    any = true;
  };
  {
    auto in = open_input(labels_path);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string_view line = trim(raw);
      if (skippable(line)) continue;
      auto cells = split(line, ',');
      long long node = 0, cls = 0;
      if (cells.size() != 2 || !parse_number(cells[0], node) || node < 0 || !parse_number(cells[1], cls))
        throw ParseError("expected \"node,class\" in " + labels_path.string(), line_no);
      if (cls < 0) throw ParseError("negative class index", line_no);
      if (!classes.emplace(static_cast<NodeId>(node), static_cast<int>(cls)).second)
        throw ValidationError("node " + std::to_string(node) + " labeled twice");
      note_node(node);
    }
  }
  std::vector<NodeId> masks[3];
  {
    auto in = open_input(splits_path);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string_view line = trim(raw);
      if (skippable(line)) continue;
      auto cells = split(line, ',');
      long long node = 0;
      if (cells.size() != 2 || !parse_number(cells[0], node) || node < 0)
        throw ParseError("expected \"node,split\" in " + splits_path.string(), line_no);
      const std::string_view name = trim(cells[1]);
      int which = name == "train" ? 0 : name == "val" ? 1 : name == "test" ? 2 : -1;
      if (which < 0) throw ParseError("unknown split \"" + std::string(name) + "\"", line_no);
      masks[which].push_back(static_cast<NodeId>(node));
      note_node(node);
    }
  }
  const std::size_t n = n_nodes.value_or(any ? max_node + 1 : 0);
  if (any && max_node >= n) throw BoundsError("node " + std::to_string(max_node) + " out of range");
  std::vector<std::optional<int>> labels(n);
  for (auto [node, cls] : classes) labels[node] = cls;
  return LabelData::build(std::move(labels), std::move(masks[0]), std::move(masks[1]), std::move(masks[2]));
}

}  // namespace edagcn
