#include "ladder/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ladder/errors.hpp"

namespace ladder {

std::vector<int> VertexSubset::indices() const {
    std::vector<int> out;
    for (std::uint32_t b = bits_; b != 0; b &= b - 1) {
        out.push_back(std::countr_zero(b));
    }
    return out;
}

Window::Window(int first_rung, int last_rung) : first(first_rung), last(last_rung) {
    if (first > last) {
        throw ValidationError("window requires first <= last, got [" + std::to_string(first) + ", " +
                              std::to_string(last) + "]");
    }
}

Graph::Graph(int num_vertices, std::vector<std::pair<int, int>> edges, std::string name)
    : n_(num_vertices), adj_(num_vertices), masks_(num_vertices), name_(std::move(name)) {
    if (n_ < 1) throw ValidationError("graph needs at least one vertex");
    if (n_ > kHardVertexCap) {
        throw FeasibilityError("graph has " + std::to_string(n_) + " vertices; hard limit is " +
                               std::to_string(kHardVertexCap));
    }
    std::set<std::pair<int, int>> seen;
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || u >= n_ || v >= n_) throw ValidationError("edge endpoint out of range");
        if (u == v) throw ValidationError("self-loop at vertex " + std::to_string(u));
        auto key = std::minmax(u, v);
        if (!seen.insert(key).second) {
            throw ValidationError("duplicate edge " + std::to_string(u) + " " + std::to_string(v));
        }
        edges_.emplace_back(key.first, key.second);
        adj_[u].push_back(v);
        adj_[v].push_back(u);
        masks_[u].insert(v);
        masks_[v].insert(u);
    }
    for (auto& a : adj_) std::sort(a.begin(), a.end());

    VertexSubset reached = VertexSubset::single(0);
    std::vector<int> stack{0};
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (int y : adj_[x]) {
            if (!reached.contains(y)) {
                reached.insert(y);
                stack.push_back(y);
            }
        }
    }
    if (reached != all()) throw ValidationError("graph not connected");
}

std::vector<int> Graph::max_rung() const {
    std::vector<int> out(n_);
    for (int x = 0; x < n_; ++x) out[x] = max_height(x);
    return out;
}

namespace {

bool parse_label(std::string_view tok, long& out) {
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc() && res.ptr == tok.data() + tok.size() && out >= 0;
}

Graph make_family(std::string_view name, int vertex_cap) {
    auto suffix = [&](std::string_view prefix) -> int {
        long n = 0;
        if (!parse_label(name.substr(prefix.size()), n)) {
            throw ValidationError("unknown built-in graph '" + std::string(name) + "'");
        }
        return static_cast<int>(n);
    };
    std::vector<std::pair<int, int>> edges;
    int n = 0;
    if (name.starts_with("path")) {
        n = suffix("path");
        for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    } else if (name.starts_with("cycle")) {
        n = suffix("cycle");
        if (n < 3) throw ValidationError("cycles need at least 3 vertices");
        for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    } else {
        throw ValidationError("unknown built-in graph '" + std::string(name) + "'");
    }
    if (n > vertex_cap) {
        throw FeasibilityError("graph has " + std::to_string(n) + " vertices; cap is " + std::to_string(vertex_cap) +
                               " (raise --max-vertices, at most " + std::to_string(kHardVertexCap) + ")");
    }
    return Graph(n, std::move(edges), std::string(name));
}

} // namespace

Graph parse_graph(std::string_view text, int vertex_cap) {
    std::map<long, int> ids;
    auto id_of = [&](long label) {
        auto [it, inserted] = ids.emplace(label, static_cast<int>(ids.size()));
        return it->second;
    };
    std::vector<std::pair<int, int>> edges;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::vector<std::string> toks;
        for (std::string t; ls >> t;) toks.push_back(t);
        if (toks.empty()) continue;
        if (toks.size() > 2) throw ValidationError("line " + std::to_string(lineno) + ": expected \"u v\"");
        long a = 0, b = 0;
        if (!parse_label(toks[0], a) || (toks.size() == 2 && !parse_label(toks[1], b))) {
            throw ValidationError("line " + std::to_string(lineno) + ": vertex labels must be nonnegative integers");
        }
        if (toks.size() == 1) {
            id_of(a);
            continue;
        }
        if (a == b) throw ValidationError("line " + std::to_string(lineno) + ": self-loop");
        int u = id_of(a);
        int v = id_of(b);
        edges.emplace_back(u, v);
    }
    if (ids.empty()) throw ValidationError("graph needs at least one vertex");
    int n = static_cast<int>(ids.size());
    if (n > kHardVertexCap) {
        throw FeasibilityError("graph has " + std::to_string(n) + " vertices; hard limit is " +
                               std::to_string(kHardVertexCap));
    }
    if (n > vertex_cap) {
        throw FeasibilityError("graph has " + std::to_string(n) + " vertices; cap is " + std::to_string(vertex_cap));
    }
    return Graph(n, std::move(edges));
}

Graph builtin_graph(std::string_view name, int vertex_cap) {
    if (name == "point") return Graph(1, {}, "point");
    return make_family(name, vertex_cap);
}

Graph load_graph(const std::string& source, int vertex_cap) {
    std::ifstream f(source);
    if (!f) return builtin_graph(source, vertex_cap);
    std::stringstream ss;
    ss << f.rdbuf();
    Graph g = parse_graph(ss.str(), vertex_cap);
    return Graph(g.size(), g.edges(), source);
}

nlohmann::json to_json(const Graph& g) {
    nlohmann::json edges = nlohmann::json::array();
    for (auto [u, v] : g.edges()) edges.push_back({u, v});
    return {{"vertices", g.size()}, {"edges", edges}, {"m", g.max_rung()}};
}

bool ladder_adjacent(const Graph& g, Site u, Site v) {
    if (u.rung == v.rung) return g.adjacent(u.vertex, v.vertex);
    return u.vertex == v.vertex && std::abs(u.rung - v.rung) == 1;
}

int laplacian_entry(const Graph& g, Site u, Site v) {
    if (u == v) return g.degree(u.vertex) + 2;
    return ladder_adjacent(g, u, v) ? -1 : 0;
}

int sink_multiplicity(const Graph& g, Window w, Site u) {
    if (!w.contains(u.rung) || u.vertex < 0 || u.vertex >= g.size()) {
        throw ValidationError("site outside window");
    }
    int inside = g.degree(u.vertex);
    if (u.rung > w.first) ++inside;
    if (u.rung < w.last) ++inside;
    return laplacian_entry(g, u, u) - inside;
}

} // namespace ladder
