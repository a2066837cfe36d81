#include "rescuesim/roadnet.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>
#include <string>

namespace rescuesim {

namespace {

constexpr int kInf = std::numeric_limits<int>::max() / 4;

}  // namespace

RoadGraph::RoadGraph(std::vector<Node> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    for (int i = 0; i < node_count(); ++i) {
        if (nodes_[i].id != i)
            throw ValidationError("node ids must be dense and start at 0, got id " +
                                  std::to_string(nodes_[i].id) + " at index " +
                                  std::to_string(i));
    }
    std::set<std::pair<NodeId, NodeId>> seen;
    for (int i = 0; i < edge_count(); ++i) {
        Edge& e = edges_[i];
        e.id = i;
        if (!valid_node(e.from) || !valid_node(e.to))
            throw ValidationError("edge " + std::to_string(i) + " references unknown node");
        if (e.from == e.to)
            throw ValidationError("edge " + std::to_string(i) + " is a self-loop");
        if (e.length < 1)
            throw ValidationError("edge " + std::to_string(i) + " has length < 1");
        if (!seen.insert({e.from, e.to}).second)
            throw ValidationError("duplicate edge " + std::to_string(e.from) + "->" +
                                  std::to_string(e.to));
    }
    out_.assign(node_count(), {});
    for (const Edge& e : edges_) out_[e.from].push_back(e.id);
    for (auto& lst : out_) {
        std::sort(lst.begin(), lst.end(), [this](EdgeId a, EdgeId b) {
            return edges_[a].to < edges_[b].to;
        });
    }
}

RoadGraph RoadGraph::build_grid(int width, int height, int edge_len) {
    if (width < 1 || height < 1)
        throw ValidationError("grid dimensions must be >= 1");
    if (edge_len < 1) throw ValidationError("grid edge_len must be >= 1");

    std::vector<Node> nodes;
    nodes.reserve(static_cast<size_t>(width) * height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            nodes.push_back(Node{y * width + x, x, y});

    std::vector<Edge> edges;
    auto link = [&](NodeId a, NodeId b) {
        edges.push_back(Edge{static_cast<EdgeId>(edges.size()), a, b, edge_len});
    };
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            NodeId n = y * width + x;
            if (x + 1 < width) {
                link(n, n + 1);
                link(n + 1, n);
            }
            if (y + 1 < height) {
                link(n, n + width);
                link(n + width, n);
            }
        }
    }
    return RoadGraph(std::move(nodes), std::move(edges));
}

const Node& RoadGraph::node(NodeId id) const {
    if (!valid_node(id))
        throw ValidationError("unknown node id " + std::to_string(id));
    return nodes_[id];
}

const Edge& RoadGraph::edge(EdgeId id) const {
    if (id < 0 || id >= edge_count())
        throw ValidationError("unknown edge id " + std::to_string(id));
    return edges_[id];
}

const std::vector<EdgeId>& RoadGraph::out_edges(NodeId id) const {
    if (!valid_node(id))
        throw ValidationError("unknown node id " + std::to_string(id));
    return out_[id];
}

std::optional<EdgeId> RoadGraph::find_edge(NodeId from, NodeId to) const {
    if (!valid_node(from) || !valid_node(to)) return std::nullopt;
    for (EdgeId e : out_[from])
        if (edges_[e].to == to) return e;
    return std::nullopt;
}

int RoadGraph::max_out_degree() const {
    size_t best = 0;
    for (const auto& lst : out_) best = std::max(best, lst.size());
    return static_cast<int>(best);
}

int RoadGraph::max_edge_length() const {
    int best = 0;
    for (const Edge& e : edges_) best = std::max(best, e.length);
    return best;
}

std::vector<int> distances_to(const RoadGraph& graph, NodeId dst) {
    if (!graph.valid_node(dst))
        throw ValidationError("unknown node id " + std::to_string(dst));
    // Dijkstra over reversed edges.
    std::vector<std::vector<std::pair<NodeId, int>>> rev(graph.node_count());
    for (const Edge& e : graph.edges()) rev[e.to].push_back({e.from, e.length});

    std::vector<int> dist(graph.node_count(), kInf);
    dist[dst] = 0;
    using Item = std::pair<int, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0, dst});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (auto [v, len] : rev[u]) {
            if (d + len < dist[v]) {
                dist[v] = d + len;
                pq.push({dist[v], v});
            }
        }
    }
    for (int& d : dist)
        if (d >= kInf) d = -1;
    return dist;
}

Route shortest_path(const RoadGraph& graph, NodeId src, NodeId dst) {
    if (!graph.valid_node(src))
        throw ValidationError("unknown node id " + std::to_string(src));
    std::vector<int> dist = distances_to(graph, dst);
    if (dist[src] < 0)
        throw NoRouteError("no route from node " + std::to_string(src) + " to node " +
                           std::to_string(dst));

    // Walk the shortest-path DAG greedily, taking the smallest next node id at
    // every step; this yields the lexicographically smallest optimal sequence.
    Route route;
    route.nodes.push_back(src);
    NodeId u = src;
    while (u != dst) {
        NodeId best = -1;
        int best_len = 0;
        for (EdgeId eid : graph.out_edges(u)) {
            const Edge& e = graph.edge(eid);
            if (dist[e.to] >= 0 && e.length + dist[e.to] == dist[u]) {
                best = e.to;  // out_edges is sorted by target id
                best_len = e.length;
                break;
            }
        }
        if (best < 0)
            throw std::logic_error("shortest-path DAG walk stuck at node " +
                                   std::to_string(u));
        route.nodes.push_back(best);
        route.total_length += best_len;
        u = best;
    }
    return route;
}

int graph_distance(const RoadGraph& graph, EdgePos pos,
                   const std::vector<int>& dist_table) {
    const Edge& e = graph.edge(pos.edge);
    if (pos.progress < 0 || pos.progress > e.length)
        throw ValidationError("edge progress " + std::to_string(pos.progress) +
                              " outside [0, " + std::to_string(e.length) + "]");
    int head = dist_table[e.to];
    if (head < 0)
        throw NoRouteError("destination unreachable from node " + std::to_string(e.to));
    return (e.length - pos.progress) + head;
}

int graph_distance(const RoadGraph& graph, EdgePos pos, NodeId dst) {
    return graph_distance(graph, pos, distances_to(graph, dst));
}

}  // namespace rescuesim
