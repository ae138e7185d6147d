#include "diffwarn/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "diffwarn/csv.hpp"

namespace diffwarn::net {

Graph::Graph(std::size_t vertex_count, std::vector<Edge> edges,
             std::vector<std::string> vertex_labels)
    : n_(vertex_count), edges_(std::move(edges)), labels_(std::move(vertex_labels)) {
    for (auto& [u, v] : edges_) {
        if (u == v) throw std::invalid_argument("graph: self-loop " + std::to_string(u));
        if (u > v) std::swap(u, v);
        if (v >= n_)
            throw std::invalid_argument("graph: edge endpoint " + std::to_string(v) +
                                        " out of range (n=" + std::to_string(n_) + ")");
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
        throw std::invalid_argument("graph: duplicate edge");

    if (!labels_.empty()) {
        if (labels_.size() != n_)
            throw std::invalid_argument("graph: label count does not match vertex count");
        for (Vertex v = 0; v < n_; ++v) {
            if (!label_index_.emplace(labels_[v], v).second)
                throw std::invalid_argument("graph: duplicate vertex label " + labels_[v]);
        }
    }

    // CSR adjacency
    std::vector<std::size_t> deg(n_, 0);
    for (const auto& [u, v] : edges_) {
        ++deg[u];
        ++deg[v];
    }
    adj_offset_.assign(n_ + 1, 0);
    for (std::size_t v = 0; v < n_; ++v) adj_offset_[v + 1] = adj_offset_[v] + deg[v];
    adj_.resize(2 * edges_.size());
    std::vector<std::size_t> cursor(adj_offset_.begin(), adj_offset_.end() - 1);
    for (const auto& [u, v] : edges_) {
        adj_[cursor[u]++] = v;
        adj_[cursor[v]++] = u;
    }
    for (Vertex v = 0; v < n_; ++v)
        std::sort(adj_.begin() + adj_offset_[v], adj_.begin() + adj_offset_[v + 1]);
}

std::optional<Vertex> Graph::vertex_of(const std::string& label) const {
    auto it = label_index_.find(label);
    if (it == label_index_.end()) return std::nullopt;
    return it->second;
}

Graph read_edge_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list: " + path.string());
    std::vector<Edge> edges;
    std::size_t declared_n = 0;
    bool have_declared = false;
    std::string line;
    std::size_t lineno = 0;
    std::size_t max_seen = 0;
    bool any_vertex = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            hs >> key;
            if (key == "vertices") {
                if (!(hs >> declared_n))
                    throw ParseError("bad #vertices header", lineno);
                have_declared = true;
            }
            continue;
        }
        std::istringstream ls(line);
        long long u, v;
        if (!(ls >> u >> v) || u < 0 || v < 0)
            throw ParseError("bad edge line: " + line, lineno);
        edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
        max_seen = std::max<std::size_t>(max_seen, std::max(u, v));
        any_vertex = true;
    }
    std::size_t n = have_declared ? declared_n : (any_vertex ? max_seen + 1 : 0);
    return Graph(n, std::move(edges));
}

void write_edge_list(const Graph& g, const std::filesystem::path& path) {
    std::string out = "#vertices " + std::to_string(g.vertex_count()) + "\n";
    for (const auto& [u, v] : g.edges())
        out += std::to_string(u) + "\t" + std::to_string(v) + "\n";
    write_text_file(path, out);
}

std::vector<std::vector<Vertex>> CommunityGraph::adjacency() const {
    std::vector<std::vector<Vertex>> adj(community_count);
    for (const auto& [a, b] : meta_edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& nb : adj) std::sort(nb.begin(), nb.end());
    return adj;
}

std::uint64_t CommunityGraph::total_size() const {
    std::uint64_t s = 0;
    for (auto x : sizes) s += x;
    return s;
}

std::string partition_csv(const CommunityPartition& p) {
    CsvWriter w({"vertex", "community"});
    for (std::size_t v = 0; v < p.assignment.size(); ++v)
        w.add_row({fmt_int(static_cast<long long>(v)), fmt_int(p.assignment[v])});
    return w.text();
}

std::string shells_csv(const KShellDecomposition& k) {
    CsvWriter w({"vertex", "shell"});
    for (std::size_t v = 0; v < k.shell_index.size(); ++v)
        w.add_row({fmt_int(static_cast<long long>(v)), fmt_int(k.shell_index[v])});
    return w.text();
}

}  // namespace diffwarn::net
