#ifndef LADDER_GRAPH_HPP
#define LADDER_GRAPH_HPP

#include <bit>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace ladder {

// Influence maps are tabulated over all 2^|G| subsets, so |G| is capped.
inline constexpr int kDefaultVertexCap = 12;
inline constexpr int kHardVertexCap = 16;

/// A set of vertices of the base graph, stored as a bit mask over 0..|G|-1.
class VertexSubset {
public:
    constexpr VertexSubset() = default;
    constexpr explicit VertexSubset(std::uint32_t bits) : bits_(bits) {}

    static constexpr VertexSubset full(int n) {
        return VertexSubset(n >= 32 ? ~0u : ((1u << n) - 1u));
    }
    static constexpr VertexSubset single(int x) { return VertexSubset(1u << x); }

    constexpr std::uint32_t bits() const { return bits_; }
    constexpr bool contains(int x) const { return (bits_ >> x) & 1u; }
    constexpr void insert(int x) { bits_ |= (1u << x); }
    constexpr void erase(int x) { bits_ &= ~(1u << x); }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr int size() const { return std::popcount(bits_); }
    constexpr bool subset_of(VertexSubset other) const { return (bits_ & ~other.bits_) == 0; }

    std::vector<int> indices() const;

    friend constexpr VertexSubset operator|(VertexSubset a, VertexSubset b) { return VertexSubset(a.bits_ | b.bits_); }
    friend constexpr VertexSubset operator&(VertexSubset a, VertexSubset b) { return VertexSubset(a.bits_ & b.bits_); }
    friend constexpr VertexSubset operator-(VertexSubset a, VertexSubset b) { return VertexSubset(a.bits_ & ~b.bits_); }
    friend constexpr auto operator<=>(VertexSubset, VertexSubset) = default;

private:
    std::uint32_t bits_ = 0;
};

/// A vertex (x, k) of the ladder G x Z. Ordered by rung first, then vertex.
struct Site {
    int rung = 0;
    int vertex = 0;
    friend constexpr auto operator<=>(const Site&, const Site&) = default;
};

/// The rung interval {first, ..., last}. Rung indices are signed.
struct Window {
    int first = 0;
    int last = 0;

    Window() = default;
    Window(int first_rung, int last_rung);

    int num_rungs() const { return last - first + 1; }
    bool contains(int rung) const { return first <= rung && rung <= last; }
    friend bool operator==(const Window&, const Window&) = default;
};

/// Finite connected simple graph G; rungs of the ladder are copies of it.
class Graph {
public:
    /// Builds from an edge list over vertices 0..n-1. Throws ValidationError on
    /// self-loops, duplicate edges, out-of-range vertices or a disconnected graph.
    Graph(int num_vertices, std::vector<std::pair<int, int>> edges, std::string name = {});

    int size() const { return n_; }
    int degree(int x) const { return static_cast<int>(adj_[x].size()); }
    /// m(x) = deg_G(x) + 2: the largest stable height, also Delta_uu.
    int max_height(int x) const { return degree(x) + 2; }
    const std::vector<int>& neighbors(int x) const { return adj_[x]; }
    VertexSubset neighbor_mask(int x) const { return masks_[x]; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    VertexSubset all() const { return VertexSubset::full(n_); }
    bool adjacent(int x, int y) const { return masks_[x].contains(y); }
    const std::string& name() const { return name_; }

    /// The rung with every vertex at its maximal height.
    std::vector<int> max_rung() const;
    /// True when G is the two-vertex path.
    bool is_two_vertex_path() const { return n_ == 2 && edges_.size() == 1; }

private:
    int n_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> adj_;
    std::vector<VertexSubset> masks_;
    std::string name_;
};

/// Parses "u v" lines (blank lines and '#' comments skipped; a line holding a
/// single label declares an isolated vertex). Labels are renumbered 0..|G|-1
/// in first-appearance order.
Graph parse_graph(std::string_view text, int vertex_cap = kDefaultVertexCap);

/// Built-in graphs: "point", "path2", "path3", "cycle3", and the families
/// "pathN" / "cycleN".
Graph builtin_graph(std::string_view name, int vertex_cap = kDefaultVertexCap);

/// Resolves a --graph argument: a built-in name or a path to an edge-list file.
Graph load_graph(const std::string& source, int vertex_cap = kDefaultVertexCap);

nlohmann::json to_json(const Graph& g);

/// Laplacian of the infinite ladder G x Z.
int laplacian_entry(const Graph& g, Site u, Site v);
bool ladder_adjacent(const Graph& g, Site u, Site v);

/// Number of edges from u to the sink for the window: Delta_uu minus the
/// degree realized inside the window.
int sink_multiplicity(const Graph& g, Window w, Site u);

} // namespace ladder

#endif
