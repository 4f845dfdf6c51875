#ifndef LADDER_CODING_HPP
#define LADDER_CODING_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ladder/burning.hpp"
#include "ladder/census.hpp"
#include "ladder/graph.hpp"

namespace ladder {

/// Hash-consing table: structurally equal influence maps share one id.
class MapTable {
public:
    int intern(const InfluenceMap& f);
    const InfluenceMap& operator[](int id) const { return maps_[id]; }
    int size() const { return static_cast<int>(maps_.size()); }

private:
    struct Hash {
        std::size_t operator()(const InfluenceMap& f) const;
    };
    std::vector<InfluenceMap> maps_;
    std::unordered_map<InfluenceMap, int, Hash> ids_;
};

/// A state (C, B, f) of the coding; rung is an index into the alphabet.
struct CodeSymbol {
    int rung = 0;
    VertexSubset burnt;
    int map = 0;
    friend bool operator==(const CodeSymbol&, const CodeSymbol&) = default;
};

inline constexpr std::size_t kDefaultMaxStates = 1'000'000;

struct CodingAutomaton {
    RungAlphabet alphabet;
    MapTable maps;
    std::vector<CodeSymbol> states;
    /// next[s][c]: the state reached by reading rung c from s, or -1.
    std::vector<std::vector<int>> next;
    /// inclusion[c]: the state i(C) for rung c, or -1 if removed by a restriction.
    std::vector<int> inclusion;
    /// Whether every influence map met during the build was monotone.
    bool maps_monotone = true;

    int size() const { return static_cast<int>(states.size()); }
    const InfluenceMap& influence(int s) const { return maps[states[s].map]; }
    const RungConfig& rung_of(int s) const { return alphabet[states[s].rung]; }
    /// Out-neighbours of s in increasing state order.
    std::vector<int> successors(int s) const;
    bool edge(int s, int t) const;
};

/// Breadth-first closure from the inclusion states, alphabet order first.
CodingAutomaton build_coding(const Graph& g, std::size_t max_states = kDefaultMaxStates);

/// The state word of a rung sequence, or nullopt if it is not left-burnable.
std::optional<std::vector<int>> encode(const Graph& g, const CodingAutomaton& a, const std::vector<RungConfig>& rungs);
/// Projects a state word to its rungs.
std::vector<RungConfig> decode(const CodingAutomaton& a, const std::vector<int>& word);
/// True iff word starts at an inclusion state and follows transitions.
bool accepts(const CodingAutomaton& a, const std::vector<int>& word);

/// Sub-automaton on states whose rung satisfies keep; states keep their relative order.
CodingAutomaton restrict(const CodingAutomaton& a, const std::function<bool(const RungConfig&)>& keep);
/// Keeps every state whose rung is not maximal.
CodingAutomaton restrict_non_max(const CodingAutomaton& a);

/// counts[n - 1] = number of accepted words of length n.
std::vector<BigInt> path_counts(const CodingAutomaton& a, int n_max);

struct Transitivity {
    bool irreducible = false;
    int period = 0;
    /// Smallest p with every entry of T^p positive; nullopt if none exists
    /// or the automaton is larger than the powering limit.
    std::optional<int> primitive_power;
    bool power_searched = false;
};

Transitivity check_transitive(const CodingAutomaton& a, int power_limit_states = 1024);

struct SpectralData {
    double rho = 0;
    std::vector<double> right;  // T v = rho v, max entry 1
    std::vector<double> left;   // u^T T = rho u^T, normalized so u.v = 1
    double right_residual = 0;  // max-norm of T v - rho v
    double left_residual = 0;
    int iterations = 0;
};

/// Perron data by power iteration on T + I (the shift removes periodicity).
SpectralData spectral(const CodingAutomaton& a, double tol = 1e-12, int max_iter = 1'000'000);

/// Largest eigenvalue over the strongly connected components; works for
/// reducible automata such as restrictions.
double spectral_radius(const CodingAutomaton& a, double tol = 1e-12);

struct ParryChain {
    /// Row-stochastic transitions as (target, probability), targets increasing.
    std::vector<std::vector<std::pair<int, double>>> p;
    std::vector<double> pi;
};

ParryChain parry_chain(const CodingAutomaton& a, const SpectralData& s);
double entropy_rate(const ParryChain& c);

nlohmann::json to_json(const CodingAutomaton& a);
/// Dense 0-1 matrix rows.
std::vector<std::vector<int>> transition_matrix(const CodingAutomaton& a);

} // namespace ladder

#endif
