#include "ladder/coding.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <tuple>

#include "ladder/errors.hpp"

namespace ladder {

std::size_t MapTable::Hash::operator()(const InfluenceMap& f) const {
    std::uint64_t h = 1469598103934665603ull;
    for (auto s : f) {
        h ^= s.bits();
        h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
}

int MapTable::intern(const InfluenceMap& f) {
    auto [it, inserted] = ids_.emplace(f, static_cast<int>(maps_.size()));
    if (inserted) maps_.push_back(f);
    return it->second;
}

std::vector<int> CodingAutomaton::successors(int s) const {
    std::vector<int> out;
    for (int t : next[s]) {
        if (t >= 0) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool CodingAutomaton::edge(int s, int t) const {
    return next[s][states[t].rung] == t;
}

CodingAutomaton build_coding(const Graph& g, std::size_t max_states) {
    CodingAutomaton a;
    a.alphabet = enum_rungs(g);
    const int nc = a.alphabet.size();
    const VertexSubset all = g.all();
    std::map<std::tuple<int, std::uint32_t, int>, int> ids;

    auto intern = [&](int rung, const BurnState& st) {
        int map = a.maps.intern(st.influence);
        auto key = std::make_tuple(rung, st.burnt.bits(), map);
        auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        if (a.states.size() >= max_states) {
            throw FeasibilityError("coding automaton exceeds --max-states = " + std::to_string(max_states));
        }
        if (map == a.maps.size() - 1 && !is_monotone(st.influence)) a.maps_monotone = false;
        int id = static_cast<int>(a.states.size());
        a.states.push_back({rung, st.burnt, map});
        a.next.emplace_back(nc, -1);
        ids.emplace(key, id);
        return id;
    };

    for (int c = 0; c < nc; ++c) a.inclusion.push_back(intern(c, first_rung_state(g, a.alphabet[c])));
    for (std::size_t s = 0; s < a.states.size(); ++s) {
        for (int c = 0; c < nc; ++c) {
            const RungConfig& rung = a.alphabet[c];
            VertexSubset burnt = a.states[s].burnt;
            if (rung_burn(g, burnt, rung, {}).empty()) continue;
            // Copy: interning may grow the map table and invalidate references.
            InfluenceMap f = a.maps[a.states[s].map];
            BurnState st = next_rung_state(g, burnt, rung, f);
            if (st.influence[all.bits()] != all) continue;
            int t = intern(c, st);
            a.next[s][c] = t;
        }
    }
    return a;
}

std::optional<std::vector<int>> encode(const Graph& g, const CodingAutomaton& a, const std::vector<RungConfig>& rungs) {
    if (rungs.empty()) throw ValidationError("empty rung sequence");
    std::vector<int> word;
    for (const auto& r : rungs) {
        if (static_cast<int>(r.size()) != g.size()) throw ValidationError("rung width does not match the graph");
        auto c = a.alphabet.find(r);
        if (!c) throw ValidationError("not a valid rung");
        int s = word.empty() ? a.inclusion[*c] : a.next[word.back()][*c];
        if (s < 0) return std::nullopt;
        word.push_back(s);
    }
    return word;
}

std::vector<RungConfig> decode(const CodingAutomaton& a, const std::vector<int>& word) {
    std::vector<RungConfig> out;
    for (int s : word) out.push_back(a.rung_of(s));
    return out;
}

bool accepts(const CodingAutomaton& a, const std::vector<int>& word) {
    if (word.empty()) return false;
    for (int s : word) {
        if (s < 0 || s >= a.size()) return false;
    }
    if (a.inclusion[a.states[word[0]].rung] != word[0]) return false;
    for (std::size_t k = 1; k < word.size(); ++k) {
        if (!a.edge(word[k - 1], word[k])) return false;
    }
    return true;
}

CodingAutomaton restrict(const CodingAutomaton& a, const std::function<bool(const RungConfig&)>& keep) {
    CodingAutomaton r;
    r.alphabet = a.alphabet;
    r.maps = a.maps;
    r.maps_monotone = a.maps_monotone;
    std::vector<int> renumber(a.size(), -1);
    for (int s = 0; s < a.size(); ++s) {
        if (!keep(a.rung_of(s))) continue;
        renumber[s] = static_cast<int>(r.states.size());
        r.states.push_back(a.states[s]);
    }
    if (r.states.empty()) throw ValidationError("restriction keeps no state");
    for (int s = 0; s < a.size(); ++s) {
        if (renumber[s] < 0) continue;
        std::vector<int> row(a.next[s].size(), -1);
        for (std::size_t c = 0; c < row.size(); ++c) {
            int t = a.next[s][c];
            if (t >= 0) row[c] = renumber[t];
        }
        r.next.push_back(std::move(row));
    }
    for (int s : a.inclusion) r.inclusion.push_back(s >= 0 ? renumber[s] : -1);
    return r;
}

CodingAutomaton restrict_non_max(const CodingAutomaton& a) {
    const RungConfig& top = a.alphabet[RungAlphabet::max_index()];
    return restrict(a, [&](const RungConfig& c) { return c != top; });
}

std::vector<BigInt> path_counts(const CodingAutomaton& a, int n_max) {
    std::vector<BigInt> counts;
    std::vector<BigInt> cur(a.size(), 0);
    for (int s : a.inclusion) {
        if (s >= 0) cur[s] += 1;
    }
    for (int n = 1; n <= n_max; ++n) {
        counts.push_back(std::accumulate(cur.begin(), cur.end(), BigInt(0)));
        if (n == n_max) break;
        std::vector<BigInt> nxt(a.size(), 0);
        for (int s = 0; s < a.size(); ++s) {
            if (cur[s] == 0) continue;
            for (int t : a.next[s]) {
                if (t >= 0) nxt[t] += cur[s];
            }
        }
        cur = std::move(nxt);
    }
    return counts;
}

namespace {

// Iterative Tarjan; returns the component id of every state, components in
// reverse topological order.
std::vector<int> strong_components(const CodingAutomaton& a, int& count) {
    const int n = a.size();
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
    std::vector<char> on_stack(n, 0);
    std::vector<std::pair<int, std::size_t>> call;
    int counter = 0;
    count = 0;
    for (int root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        call.push_back({root, 0});
        while (!call.empty()) {
            auto& [v, pos] = call.back();
            if (pos == 0 && index[v] < 0) {
                index[v] = low[v] = counter++;
                stack.push_back(v);
                on_stack[v] = 1;
            }
            const auto& row = a.next[v];
            bool descended = false;
            while (pos < row.size()) {
                int w = row[pos++];
                if (w < 0) continue;
                if (index[w] < 0) {
                    call.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[v] = std::min(low[v], index[w]);
            }
            if (descended) continue;
            if (low[v] == index[v]) {
                for (;;) {
                    int w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = count;
                    if (w == v) break;
                }
                ++count;
            }
            int done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    return comp;
}

struct PowerResult {
    double rho = 0;
    std::vector<double> vec;
    double residual = 0;
    int iterations = 0;
};

// Power iteration of (M + I) on the states listed in `members` for the matrix
// given by the callback apply(in, out), which must write M * in.
template <class Apply>
PowerResult power_iterate(int n, Apply apply, double tol, int max_iter) {
    PowerResult r;
    std::vector<double> v(n, 1.0), w(n);
    for (int it = 1; it <= max_iter; ++it) {
        apply(v, w);
        double top = 0;
        for (int i = 0; i < n; ++i) {
            w[i] += v[i];
            top = std::max(top, w[i]);
        }
        if (top <= 0) throw InternalError("power iteration hit the zero vector");
        for (auto& x : w) x /= top;
        v.swap(w);
        if (it % 8 != 0 && it != max_iter) continue;
        apply(v, w);
        // Rayleigh-type estimate from the largest entry, then the residual.
        int arg = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
        double rho = w[arg] / v[arg];
        double res = 0;
        for (int i = 0; i < n; ++i) res = std::max(res, std::abs(w[i] - rho * v[i]));
        r = {rho, v, res, it};
        if (res < tol) return r;
    }
    throw InternalError("power iteration did not converge to residual " + std::to_string(tol) + " (reached " +
                        std::to_string(r.residual) + ")");
}

} // namespace

Transitivity check_transitive(const CodingAutomaton& a, int power_limit_states) {
    Transitivity t;
    const int n = a.size();
    int comps = 0;
    strong_components(a, comps);
    t.irreducible = comps == 1;
    if (!t.irreducible) return t;

    std::vector<int> level(n, -1);
    std::deque<int> queue{0};
    level[0] = 0;
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (int u : a.next[s]) {
            if (u >= 0 && level[u] < 0) {
                level[u] = level[s] + 1;
                queue.push_back(u);
            }
        }
    }
    int period = 0;
    for (int s = 0; s < n; ++s) {
        for (int u : a.next[s]) {
            if (u >= 0) period = std::gcd(period, std::abs(level[s] + 1 - level[u]));
        }
    }
    t.period = period;
    if (period != 1 || n > power_limit_states) return t;

    t.power_searched = true;
    const int words = (n + 63) / 64;
    using Row = std::vector<std::uint64_t>;
    std::vector<Row> power(n, Row(words, 0));
    for (int s = 0; s < n; ++s) {
        for (int u : a.next[s]) {
            if (u >= 0) power[s][u / 64] |= 1ull << (u % 64);
        }
    }
    auto full = [&](const std::vector<Row>& m) {
        for (const auto& row : m) {
            for (int w = 0; w < words; ++w) {
                std::uint64_t want = (w == words - 1 && n % 64) ? (1ull << (n % 64)) - 1 : ~0ull;
                if (row[w] != want) return false;
            }
        }
        return true;
    };
    const long long bound = static_cast<long long>(n - 1) * (n - 1) + 1;
    for (long long p = 1; p <= bound; ++p) {
        if (full(power)) {
            t.primitive_power = static_cast<int>(p);
            return t;
        }
        // T^{p+1} = T * T^p: row s is the union of the rows of its successors.
        std::vector<Row> next(n, Row(words, 0));
        for (int s = 0; s < n; ++s) {
            for (int u : a.next[s]) {
                if (u < 0) continue;
                for (int w = 0; w < words; ++w) next[s][w] |= power[u][w];
            }
        }
        power.swap(next);
    }
    return t;
}

SpectralData spectral(const CodingAutomaton& a, double tol, int max_iter) {
    const int n = a.size();
    auto forward = [&](const std::vector<double>& v, std::vector<double>& w) {
        for (int s = 0; s < n; ++s) {
            double acc = 0;
            for (int t : a.next[s]) {
                if (t >= 0) acc += v[t];
            }
            w[s] = acc;
        }
    };
    auto backward = [&](const std::vector<double>& v, std::vector<double>& w) {
        std::fill(w.begin(), w.end(), 0.0);
        for (int s = 0; s < n; ++s) {
            for (int t : a.next[s]) {
                if (t >= 0) w[t] += v[s];
            }
        }
    };
    auto right = power_iterate(n, forward, tol, max_iter);
    auto left = power_iterate(n, backward, tol, max_iter);
    SpectralData d;
    d.rho = right.rho;
    d.right = right.vec;
    d.left = left.vec;
    double dot = 0;
    for (int i = 0; i < n; ++i) dot += d.left[i] * d.right[i];
    for (auto& x : d.left) x /= dot;
    d.right_residual = right.residual;
    d.left_residual = left.residual * (1.0 / dot);
    d.iterations = std::max(right.iterations, left.iterations);
    return d;
}

double spectral_radius(const CodingAutomaton& a, double tol) {
    int comps = 0;
    auto comp = strong_components(a, comps);
    std::vector<std::vector<int>> members(comps);
    for (int s = 0; s < a.size(); ++s) members[comp[s]].push_back(s);
    double best = 0;
    for (const auto& m : members) {
        std::vector<int> local(a.size(), -1);
        for (std::size_t i = 0; i < m.size(); ++i) local[m[i]] = static_cast<int>(i);
        bool cyclic = false;
        for (int s : m) {
            for (int t : a.next[s]) cyclic = cyclic || (t >= 0 && local[t] >= 0);
        }
        if (!cyclic) continue;
        auto apply = [&](const std::vector<double>& v, std::vector<double>& w) {
            for (std::size_t i = 0; i < m.size(); ++i) {
                double acc = 0;
                for (int t : a.next[m[i]]) {
                    if (t >= 0 && local[t] >= 0) acc += v[local[t]];
                }
                w[i] = acc;
            }
        };
        best = std::max(best, power_iterate(static_cast<int>(m.size()), apply, tol, 1'000'000).rho);
    }
    return best;
}

ParryChain parry_chain(const CodingAutomaton& a, const SpectralData& s) {
    const int n = a.size();
    ParryChain c;
    c.p.resize(n);
    double z = 0;
    for (int i = 0; i < n; ++i) {
        if (!(s.right[i] > 0) || !(s.left[i] > 0)) throw ValidationError("Perron vectors are not strictly positive");
        for (int t : a.successors(i)) c.p[i].push_back({t, s.right[t] / (s.rho * s.right[i])});
        z += s.left[i] * s.right[i];
    }
    for (int i = 0; i < n; ++i) c.pi.push_back(s.left[i] * s.right[i] / z);
    return c;
}

double entropy_rate(const ParryChain& c) {
    double h = 0;
    for (std::size_t i = 0; i < c.p.size(); ++i) {
        for (auto [t, p] : c.p[i]) {
            if (p > 0) h -= c.pi[i] * p * std::log(p);
        }
    }
    return h;
}

std::vector<std::vector<int>> transition_matrix(const CodingAutomaton& a) {
    std::vector<std::vector<int>> m(a.size(), std::vector<int>(a.size(), 0));
    for (int s = 0; s < a.size(); ++s) {
        for (int t : a.next[s]) {
            if (t >= 0) m[s][t] = 1;
        }
    }
    return m;
}

nlohmann::json to_json(const CodingAutomaton& a) {
    nlohmann::json states = nlohmann::json::array();
    for (int s = 0; s < a.size(); ++s) {
        nlohmann::json table = nlohmann::json::array();
        for (auto v : a.influence(s)) table.push_back(v.indices());
        states.push_back({{"id", s},
                          {"rung", a.rung_of(s)},
                          {"rung_index", a.states[s].rung},
                          {"burnt", a.states[s].burnt.indices()},
                          {"influence", table},
                          {"successors", a.successors(s)}});
    }
    nlohmann::json alphabet = nlohmann::json::array();
    for (const auto& r : a.alphabet.rungs) alphabet.push_back(r);
    return {{"alphabet", alphabet},
            {"inclusion", a.inclusion},
            {"states", states},
            {"num_states", a.size()},
            {"maps_monotone", a.maps_monotone}};
}

} // namespace ladder
