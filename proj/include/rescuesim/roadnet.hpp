#pragma once

#include <optional>
#include <vector>

#include "rescuesim/errors.hpp"

namespace rescuesim {

using NodeId = int;
using EdgeId = int;

struct Node {
    NodeId id = 0;
    int x = 0;
    int y = 0;
};

struct Edge {
    EdgeId id = 0;
    NodeId from = 0;
    NodeId to = 0;
    int length = 1;  // cells, >= 1
};

// Position on a directed edge. progress counts cells travelled from the tail
// node: cell 0 is the entry cell, cell length-1 is the stop line at the head
// node. progress == length means standing exactly on the head node.
struct EdgePos {
    EdgeId edge = 0;
    int progress = 0;
};

struct Route {
    std::vector<NodeId> nodes;  // ordered, length >= 1
    int total_length = 0;       // cells, sum of traversed edge lengths
};

// Directed road network. Immutable after construction; shared read-only.
class RoadGraph {
public:
    RoadGraph() = default;
    RoadGraph(std::vector<Node> nodes, std::vector<Edge> edges);

    // width x height lattice, node ids row-major from 0, every adjacent pair
    // connected by one edge per direction of the given length.
    static RoadGraph build_grid(int width, int height, int edge_len);

    int node_count() const { return static_cast<int>(nodes_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    const Node& node(NodeId id) const;
    const Edge& edge(EdgeId id) const;
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }

    // Outgoing edge ids, sorted by target node id.
    const std::vector<EdgeId>& out_edges(NodeId id) const;

    std::optional<EdgeId> find_edge(NodeId from, NodeId to) const;

    bool valid_node(NodeId id) const {
        return id >= 0 && id < node_count();
    }

    int max_out_degree() const;
    int max_edge_length() const;

private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<EdgeId>> out_;
};

// Shortest-path lengths from every node to dst, in cells. Unreachable nodes
// get -1.
std::vector<int> distances_to(const RoadGraph& graph, NodeId dst);

// Minimum-total-length route from src to dst. Ties are broken by returning
// the lexicographically smallest node sequence.
Route shortest_path(const RoadGraph& graph, NodeId src, NodeId dst);

// Cells left to dst from an on-edge position: remaining cells on the current
// edge plus the shortest-path length from the edge's head node to dst.
int graph_distance(const RoadGraph& graph, EdgePos pos, NodeId dst);

// Same, against a precomputed distances_to(dst) table.
int graph_distance(const RoadGraph& graph, EdgePos pos,
                   const std::vector<int>& dist_table);

}  // namespace rescuesim
