#pragma once

#include <filesystem>
#include <optional>

#include "edagcn/data.hpp"
#include "edagcn/graph.hpp"

namespace edagcn {

/// Reads "u<TAB>v" lines. Blank lines and lines starting with '#' are skipped.
Graph load_edge_list(const std::filesystem::path& path, std::size_t n_nodes);

/// Largest node id in the file plus one; 0 for an empty file.
std::size_t edge_list_node_count(const std::filesystem::path& path);

void save_edge_list(const std::filesystem::path& path, const Graph& g);

/// Headerless numeric CSV; N and F come from the file shape.
FeatureMatrix load_features(const std::filesystem::path& path);

/// Labels "node,class" and splits "node,split" (split in train/val/test).
/// When n_nodes is not given it is 1 + the largest node id seen in either file.
LabelData load_labels_and_splits(const std::filesystem::path& labels_path,
                                 const std::filesystem::path& splits_path,
                                 std::optional<std::size_t> n_nodes = std::nullopt);

}  // namespace edagcn
