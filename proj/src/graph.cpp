#include "spinobs/graph.hpp"

#include <fstream>
#include <queue>
#include <sstream>

#include "spinobs/errors.hpp"

namespace spinobs {

void Multigraph::check(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

int Multigraph::add_edge(int u, int v) {
    check(u >= 0 && u < n_ && v >= 0 && v < n_, "edge endpoint out of range");
    check(u != v, "self-loops are not allowed");
    edges_.push_back({u, v});
    if (!edge_activity_.empty()) edge_activity_.push_back(std::nullopt);
    return static_cast<int>(edges_.size()) - 1;
}

void Multigraph::set_edge_activity(int edge_index, const Rat& value) {
    check(edge_index >= 0 && edge_index < edge_count(), "edge index out of range");
    if (edge_activity_.empty()) edge_activity_.resize(edges_.size());
    edge_activity_[static_cast<size_t>(edge_index)] = value;
}

void Multigraph::set_vertex_activity(int v, const Rat& value) {
    check(v >= 0 && v < n_, "vertex index out of range");
    if (vertex_activity_.empty()) vertex_activity_.resize(static_cast<size_t>(n_));
    vertex_activity_[static_cast<size_t>(v)] = value;
}

Rat Multigraph::edge_activity(int e, const Rat& uniform) const {
    if (edge_activity_.empty()) return uniform;
    const auto& v = edge_activity_[static_cast<size_t>(e)];
    return v ? *v : uniform;
}

Rat Multigraph::vertex_activity(int v, const Rat& uniform) const {
    if (vertex_activity_.empty()) return uniform;
    const auto& a = vertex_activity_[static_cast<size_t>(v)];
    return a ? *a : uniform;
}

std::vector<int> Multigraph::degrees() const {
    std::vector<int> deg(static_cast<size_t>(n_), 0);
    for (auto [u, v] : edges_) ++deg[static_cast<size_t>(u)], ++deg[static_cast<size_t>(v)];
    return deg;
}

std::vector<std::vector<int>> Multigraph::adjacency() const {
    std::vector<std::vector<int>> adj(static_cast<size_t>(n_));
    for (auto [u, v] : edges_) {
        adj[static_cast<size_t>(u)].push_back(v);
        adj[static_cast<size_t>(v)].push_back(u);
    }
    return adj;
}

bool Multigraph::is_forest() const {
    // Union-find; any repeated join (including a parallel edge) closes a cycle.
    std::vector<int> parent(static_cast<size_t>(n_));
    for (int i = 0; i < n_; ++i) parent[static_cast<size_t>(i)] = i;
    auto find = [&](int x) {
        while (parent[static_cast<size_t>(x)] != x) {
            parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
            x = parent[static_cast<size_t>(x)];
        }
        return x;
    };
    for (auto [u, v] : edges_) {
        int ru = find(u), rv = find(v);
        if (ru == rv) return false;
        parent[static_cast<size_t>(ru)] = rv;
    }
    return true;
}

bool Multigraph::is_connected() const {
    if (n_ <= 1) return true;
    auto adj = adjacency();
    std::vector<char> seen(static_cast<size_t>(n_), 0);
    std::queue<int> bfs;
    bfs.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!bfs.empty()) {
        int u = bfs.front();
        bfs.pop();
        for (int w : adj[static_cast<size_t>(u)])
            if (!seen[static_cast<size_t>(w)]) {
                seen[static_cast<size_t>(w)] = 1;
                ++reached;
                bfs.push(w);
            }
    }
    return reached == n_;
}

std::optional<std::vector<int>> Multigraph::bipartition() const {
    std::vector<int> color(static_cast<size_t>(n_), -1);
    auto adj = adjacency();
    for (int s = 0; s < n_; ++s) {
        if (color[static_cast<size_t>(s)] != -1) continue;
        color[static_cast<size_t>(s)] = 0;
        std::queue<int> bfs;
        bfs.push(s);
        while (!bfs.empty()) {
            int u = bfs.front();
            bfs.pop();
            for (int w : adj[static_cast<size_t>(u)]) {
                if (color[static_cast<size_t>(w)] == -1) {
                    color[static_cast<size_t>(w)] = 1 - color[static_cast<size_t>(u)];
                    bfs.push(w);
                } else if (color[static_cast<size_t>(w)] == color[static_cast<size_t>(u)]) {
                    return std::nullopt;
                }
            }
        }
    }
    return color;
}

int Multigraph::append_disjoint(const Multigraph& other) {
    int offset = n_;
    n_ += other.n_;
    if (!vertex_activity_.empty() || other.has_vertex_activities())
        vertex_activity_.resize(static_cast<size_t>(n_));
    for (int v = 0; v < other.n_; ++v)
        if (other.has_vertex_activities()) {
            const auto& a = other.vertex_activity_[static_cast<size_t>(v)];
            if (a) vertex_activity_[static_cast<size_t>(offset + v)] = *a;
        }
    for (int e = 0; e < other.edge_count(); ++e) {
        auto [u, v] = other.edges_[static_cast<size_t>(e)];
        int idx = add_edge(u + offset, v + offset);
        if (other.has_edge_activities()) {
            const auto& a = other.edge_activity_[static_cast<size_t>(e)];
            if (a) set_edge_activity(idx, *a);
        }
    }
    return offset;
}

void Multigraph::merge_vertices(int keep, int absorb) {
    check(keep >= 0 && keep < n_ && absorb >= 0 && absorb < n_ && keep != absorb,
          "merge_vertices: bad vertex pair");
    for (auto& [u, v] : edges_) {
        if (u == absorb) u = keep;
        if (v == absorb) v = keep;
        check(u != v, "merge_vertices would create a self-loop");
    }
}

std::vector<int> Multigraph::compact() {
    std::vector<char> used(static_cast<size_t>(n_), 0);
    for (auto [u, v] : edges_) used[static_cast<size_t>(u)] = used[static_cast<size_t>(v)] = 1;
    std::vector<int> remap(static_cast<size_t>(n_), -1);
    int next = 0;
    for (int v = 0; v < n_; ++v)
        if (used[static_cast<size_t>(v)]) remap[static_cast<size_t>(v)] = next++;
    for (auto& [u, v] : edges_) {
        u = remap[static_cast<size_t>(u)];
        v = remap[static_cast<size_t>(v)];
    }
    if (!vertex_activity_.empty()) {
        std::vector<std::optional<Rat>> va(static_cast<size_t>(next));
        for (int v = 0; v < n_; ++v)
            if (remap[static_cast<size_t>(v)] >= 0)
                va[static_cast<size_t>(remap[static_cast<size_t>(v)])] =
                    vertex_activity_[static_cast<size_t>(v)];
        vertex_activity_ = std::move(va);
    }
    n_ = next;
    return remap;
}

std::string Multigraph::to_edge_list() const {
    std::ostringstream out;
    out << n_ << " " << edges_.size() << "\n";
    for (int e = 0; e < edge_count(); ++e) {
        auto [u, v] = edges_[static_cast<size_t>(e)];
        out << u << " " << v;
        if (!edge_activity_.empty() && edge_activity_[static_cast<size_t>(e)])
            out << " " << edge_activity_[static_cast<size_t>(e)]->get_str();
        out << "\n";
    }
    if (!vertex_activity_.empty())
        for (int v = 0; v < n_; ++v)
            if (vertex_activity_[static_cast<size_t>(v)])
                out << "V " << v << " " << vertex_activity_[static_cast<size_t>(v)]->get_str() << "\n";
    return out.str();
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& msg) {
    throw ValidationError("graph file line " + std::to_string(line) + ": " + msg);
}

}  // namespace

Multigraph Multigraph::from_edge_list(std::istream& in) {
    std::string line;
    int lineno = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            std::string trimmed = line;
            auto pos = trimmed.find('#');
            if (pos != std::string::npos) trimmed = trimmed.substr(0, pos);
            bool blank = trimmed.find_first_not_of(" \t\r\n") == std::string::npos;
            if (!blank) {
                line = trimmed;
                return true;
            }
        }
        return false;
    };

    if (!next_line()) throw ValidationError("graph file: empty input");
    std::istringstream head(line);
    long n, m;
    if (!(head >> n >> m) || n < 0 || m < 0) parse_fail(lineno, "expected header 'n m'");
    Multigraph g(static_cast<int>(n));
    for (long e = 0; e < m; ++e) {
        if (!next_line()) parse_fail(lineno, "unexpected end of file: expected " + std::to_string(m) + " edges");
        std::istringstream row(line);
        long u, v;
        std::string act;
        if (!(row >> u >> v)) parse_fail(lineno, "expected edge 'u v [activity]'");
        if (u < 0 || u >= n || v < 0 || v >= n) parse_fail(lineno, "edge endpoint out of range");
        if (u == v) parse_fail(lineno, "self-loop rejected");
        int idx = g.add_edge(static_cast<int>(u), static_cast<int>(v));
        if (row >> act) {
            auto r = try_parse_rational(act);
            if (!r) parse_fail(lineno, "malformed activity '" + act + "'");
            g.set_edge_activity(idx, *r);
        }
        std::string extra;
        if (row >> extra) parse_fail(lineno, "trailing tokens after edge");
    }
    while (next_line()) {
        std::istringstream row(line);
        std::string tag;
        row >> tag;
        if (tag != "V") parse_fail(lineno, "expected vertex-activity line 'V u activity'");
        long v;
        std::string act;
        if (!(row >> v >> act)) parse_fail(lineno, "expected 'V u activity'");
        if (v < 0 || v >= n) parse_fail(lineno, "vertex index out of range");
        auto r = try_parse_rational(act);
        if (!r) parse_fail(lineno, "malformed activity '" + act + "'");
        g.set_vertex_activity(static_cast<int>(v), *r);
    }
    return g;
}

Multigraph Multigraph::from_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open graph file: " + path);
    return from_edge_list(in);
}

Multigraph Multigraph::from_edge_list_string(const std::string& text) {
    std::istringstream in(text);
    return from_edge_list(in);
}

Multigraph path_graph(int edges) {
    Multigraph g(edges + 1);
    for (int i = 0; i < edges; ++i) g.add_edge(i, i + 1);
    return g;
}

Multigraph cycle_graph(int n) {
    Multigraph g(n);
    for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
    return g;
}

Multigraph complete_graph(int n) {
    Multigraph g(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
    return g;
}

Multigraph complete_bipartite(int a, int b) {
    Multigraph g(a + b);
    for (int i = 0; i < a; ++i)
        for (int j = 0; j < b; ++j) g.add_edge(i, a + j);
    return g;
}

Multigraph single_vertex() { return Multigraph(1); }

Multigraph k2() {
    Multigraph g(2);
    g.add_edge(0, 1);
    return g;
}

}  // namespace spinobs
