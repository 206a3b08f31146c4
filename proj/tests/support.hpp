#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edagcn/data.hpp"
#include "edagcn/graph.hpp"
#include "edagcn/rng.hpp"

namespace edagcn::test {

inline Graph make_graph(std::size_t n, std::initializer_list<std::pair<NodeId, NodeId>> edges) {
  std::vector<Edge> list;
  for (auto [u, v] : edges) list.emplace_back(u, v);
  return Graph(n, std::move(list));
}

inline Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
  Rng rng = make_rng(seed, 99);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (uniform01(rng) < p) edges.emplace_back(u, v);
  return Graph(n, std::move(edges));
}

inline Graph complete_graph(std::size_t n) { return random_graph(n, 2.0, 0); }

inline LabelData make_labels(const std::vector<int>& y, std::vector<NodeId> train, std::vector<NodeId> val = {},
                             std::vector<NodeId> test = {}, std::optional<std::size_t> classes = std::nullopt) {
  std::vector<std::optional<int>> labels(y.begin(), y.end());
  return LabelData::build(std::move(labels), std::move(train), std::move(val), std::move(test), classes);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("edagcn_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace edagcn::test
