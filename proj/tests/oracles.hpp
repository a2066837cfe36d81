#pragma once

// Independent reference implementations used only by tests. These stay
// deliberately naive so they can cross-check the real code paths.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "rescuesim/roadnet.hpp"

namespace rescuesim::oracle {

// Exhaustive enumeration of all simple paths src -> dst; returns the
// minimum-length path, lexicographically smallest among equals.
inline std::optional<Route> brute_force_shortest(const RoadGraph& g, NodeId src,
                                                 NodeId dst) {
    std::optional<Route> best;
    std::vector<bool> visited(g.node_count(), false);
    std::vector<NodeId> stack{src};
    int length = 0;

    std::function<void(NodeId)> dfs = [&](NodeId u) {
        if (u == dst) {
            bool better = !best || length < best->total_length ||
                          (length == best->total_length && stack < best->nodes);
            if (better) best = Route{stack, length};
            return;
        }
        visited[u] = true;
        for (EdgeId eid : g.out_edges(u)) {
            const Edge& e = g.edge(eid);
            if (visited[e.to]) continue;
            stack.push_back(e.to);
            length += e.length;
            dfs(e.to);
            length -= e.length;
            stack.pop_back();
        }
        visited[u] = false;
    };
    dfs(src);
    return best;
}

// Central finite difference of f at x with step h.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Relative-with-floor gradient comparison.
inline bool grad_close(double analytic, double numeric, double rel_tol,
                       double abs_floor) {
    double diff = std::fabs(analytic - numeric);
    double scale = std::max(std::fabs(analytic), std::fabs(numeric));
    return diff <= abs_floor || diff <= rel_tol * scale;
}

}  // namespace rescuesim::oracle
