#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spinobs/rational.hpp"

namespace spinobs {

// Vertex/edge container for all models and gadgets. Parallel edges are
// allowed (gadget composition creates them); self-loops are rejected.
// Optional per-edge/per-vertex activities override the uniform model
// parameters where present.
class Multigraph {
  public:
    Multigraph() = default;
    explicit Multigraph(int n) : n_(n) { check(n >= 0, "vertex count must be >= 0"); }

    int vertex_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    std::pair<int, int> edge(int i) const { return edges_[static_cast<size_t>(i)]; }

    int add_vertex() { return n_++; }
    int add_edge(int u, int v);

    void set_edge_activity(int edge_index, const Rat& value);
    void set_vertex_activity(int v, const Rat& value);
    bool has_edge_activities() const { return !edge_activity_.empty(); }
    bool has_vertex_activities() const { return !vertex_activity_.empty(); }
    // Defaults to `uniform` where no per-element value is set.
    Rat edge_activity(int edge_index, const Rat& uniform) const;
    Rat vertex_activity(int v, const Rat& uniform) const;

    std::vector<int> degrees() const;
    std::vector<std::vector<int>> adjacency() const;  // neighbor lists, multiplicity kept
    bool is_forest() const;
    bool is_connected() const;
    // 2-coloring if bipartite (vector of 0/1), nullopt otherwise.
    std::optional<std::vector<int>> bipartition() const;

    // Appends a disjoint copy of `other`; returns the vertex offset.
    int append_disjoint(const Multigraph& other);
    // Merges vertex b into a (b's edges re-point to a; b stays as isolated slot
    // unless compact() is called). Used by gadget composition.
    void merge_vertices(int keep, int absorb);
    // Drops isolated vertices left behind by merges; returns old->new mapping.
    std::vector<int> compact();

    std::string to_edge_list() const;                       // file format serialization
    static Multigraph from_edge_list(std::istream& in);     // throws ValidationError with line info
    static Multigraph from_edge_list_file(const std::string& path);
    static Multigraph from_edge_list_string(const std::string& text);

  private:
    static void check(bool ok, const std::string& msg);
    int n_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::optional<Rat>> edge_activity_;    // sized lazily
    std::vector<std::optional<Rat>> vertex_activity_;
};

// Convenience builders used all over the tests.
Multigraph path_graph(int edges);
Multigraph cycle_graph(int n);
Multigraph complete_graph(int n);
Multigraph complete_bipartite(int a, int b);
Multigraph single_vertex();
Multigraph k2();

}  // namespace spinobs
