#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace diffwarn::net {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;  // stored with first < second

// Simple undirected graph: no self-loops, no parallel edges. Immutable after
// construction; adjacency is built once (CSR) so neighbor scans are cheap.
class Graph {
  public:
    Graph() = default;
    Graph(std::size_t vertex_count, std::vector<Edge> edges,
          std::vector<std::string> vertex_labels = {});

    std::size_t vertex_count() const { return n_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }

    std::span<const Vertex> neighbors(Vertex v) const {
        return {adj_.data() + adj_offset_[v], adj_.data() + adj_offset_[v + 1]};
    }
    std::size_t degree(Vertex v) const {
        return adj_offset_[v + 1] - adj_offset_[v];
    }

    bool has_labels() const { return !labels_.empty(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(Vertex v) const { return labels_[v]; }
    // index of a labeled vertex, or nullopt if the label is unknown
    std::optional<Vertex> vertex_of(const std::string& label) const;

  private:
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<Vertex> adj_;
    std::vector<std::size_t> adj_offset_{0};
    std::vector<std::string> labels_;
    std::unordered_map<std::string, Vertex> label_index_;
};

// Edge-list file: one `u<TAB>v` pair per line, 0-based ids; an optional
// `#vertices <n>` header pins the vertex count (isolated tail vertices would
// otherwise be lost); other lines starting with `#` are ignored.
Graph read_edge_list(const std::filesystem::path& path);
void write_edge_list(const Graph& g, const std::filesystem::path& path);

struct CommunityPartition {
    std::vector<Vertex> assignment;  // vertex -> community index in [0, C)
    std::size_t community_count = 0;
    double modularity_value = 0.0;
};

struct KShellDecomposition {
    std::vector<Vertex> shell_index;  // vertex -> shell
    Vertex k_max = 0;
};

// Meta-level graph whose vertices are communities.
struct CommunityGraph {
    std::size_t community_count = 0;
    std::vector<std::uint32_t> sizes;            // one positive size per community
    std::vector<Edge> meta_edges;                // undirected, indices < community_count

    std::vector<std::vector<Vertex>> adjacency() const;
    std::uint64_t total_size() const;
};

// vertex,community / vertex,shell CSV emitters
std::string partition_csv(const CommunityPartition& p);
std::string shells_csv(const KShellDecomposition& k);

}  // namespace diffwarn::net
