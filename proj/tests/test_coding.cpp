#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "ladder/coding.hpp"
#include "ladder/errors.hpp"

using namespace ladder;

namespace {

const Graph P2 = builtin_graph("path2");

const std::vector<std::vector<int>> kPrintedMatrix{
    {1, 1, 1, 1, 1, 0, 0}, {1, 1, 1, 1, 1, 0, 0}, {1, 1, 1, 1, 1, 0, 0}, {1, 0, 0, 0, 0, 1, 0},
    {1, 0, 0, 0, 0, 0, 1}, {1, 0, 0, 0, 0, 1, 0}, {1, 0, 0, 0, 0, 0, 1},
};

bool permutation_equivalent(const std::vector<std::vector<int>>& a, const std::vector<std::vector<int>>& b) {
    if (a.size() != b.size()) return false;
    std::vector<int> p(a.size());
    std::iota(p.begin(), p.end(), 0);
    do {
        bool same = true;
        for (std::size_t i = 0; i < a.size() && same; ++i)
            for (std::size_t j = 0; j < a.size() && same; ++j) same = a[p[i]][p[j]] == b[i][j];
        if (same) return true;
    } while (std::next_permutation(p.begin(), p.end()));
    return false;
}

std::vector<std::vector<RungConfig>> all_words(const RungAlphabet& a, int len) {
    std::vector<std::vector<RungConfig>> out;
    std::vector<int> idx(len, 0);
    for (;;) {
        std::vector<RungConfig> w;
        for (int i : idx) w.push_back(a[i]);
        out.push_back(w);
        int i = 0;
        while (i < len && idx[i] == a.size() - 1) idx[i++] = 0;
        if (i == len) break;
        ++idx[i];
    }
    return out;
}

} // namespace

TEST_CASE("two-vertex path automaton") {
    auto a = build_coding(P2);
    REQUIRE(a.size() == 7);
    auto m = transition_matrix(a);
    CHECK(permutation_equivalent(m, kPrintedMatrix));
    // Discovery order reproduces the printed order exactly.
    CHECK(m == kPrintedMatrix);
    CHECK(a.rung_of(5) == RungConfig{3, 2});
    CHECK(a.rung_of(6) == RungConfig{2, 3});
    CHECK(a.inclusion == std::vector<int>{0, 1, 2, 3, 4});
    auto t = check_transitive(a);
    CHECK(t.irreducible);
    CHECK(t.period == 1);
    CHECK(t.primitive_power == 3);
    CHECK(a.maps_monotone);
}

TEST_CASE("single-vertex automaton") {
    auto a = build_coding(builtin_graph("point"));
    CHECK(a.size() == 1);
    CHECK(transition_matrix(a) == std::vector<std::vector<int>>{{1}});
    CHECK(check_transitive(a).primitive_power == 1);
    auto s = spectral(a);
    CHECK(s.rho == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("structural facts on several graphs") {
    for (const char* name : {"point", "path2", "path3", "cycle3"}) {
        Graph g = builtin_graph(name);
        auto a = build_coding(g);
        CAPTURE(name);
        int top = a.inclusion[RungAlphabet::max_index()];
        CHECK(a.states[top].burnt == g.all());
        CHECK(a.influence(top) == saturated_map(g));
        for (int s = 0; s < a.size(); ++s) {
            CHECK(a.edge(s, top));
            CHECK_FALSE(a.states[s].burnt.empty());
            CHECK(a.influence(s)[g.all().bits()] == g.all());
        }
        for (int c = 0; c < a.alphabet.size(); ++c) CHECK(a.edge(top, a.inclusion[c]));
        auto t = check_transitive(a);
        CHECK(t.irreducible);
        CHECK(t.primitive_power.has_value());
        CHECK(to_json(a)["num_states"] == a.size());
    }
}

TEST_CASE("encoding is a bijection onto accepted words") {
    for (const char* name : {"path2", "path3"}) {
        Graph g = builtin_graph(name);
        auto a = build_coding(g);
        int max_len = g.size() == 2 ? 6 : 3;
        for (int len = 1; len <= max_len; ++len) {
            std::set<std::vector<int>> words;
            std::size_t burnable = 0;
            for (const auto& w : all_words(a.alphabet, len)) {
                bool left = left_burnable(g, LadderConfig::from_rungs(1, w)).success;
                auto code = encode(g, a, w);
                CHECK(code.has_value() == left);
                if (!code) continue;
                ++burnable;
                CHECK(accepts(a, *code));
                CHECK(decode(a, *code) == w);
                words.insert(*code);
            }
            CHECK(words.size() == burnable);
            CHECK(path_counts(a, len).back() == burnable);
        }
    }
}

TEST_CASE("every accepted word decodes to a left-burnable sequence") {
    auto a = build_coding(builtin_graph("cycle3"));
    Graph g = builtin_graph("cycle3");
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<int> w{a.inclusion[rng() % a.inclusion.size()]};
        int len = 1 + static_cast<int>(rng() % 6);
        while (static_cast<int>(w.size()) < len) {
            auto succ = a.successors(w.back());
            w.push_back(succ[rng() % succ.size()]);
        }
        REQUIRE(accepts(a, w));
        auto rungs = decode(a, w);
        CHECK(left_burnable(g, LadderConfig::from_rungs(1, rungs)).success);
        CHECK(encode(g, a, rungs) == w);
    }
}

TEST_CASE("encoding the leftburn pattern uses the barred state") {
    auto a = build_coding(P2);
    auto w = encode(P2, a, {{3, 1}, {3, 2}, {3, 3}});
    REQUIRE(w.has_value());
    CHECK((*w)[1] == 5);
    CHECK((*w)[1] != a.inclusion[1]);
    CHECK_FALSE(encode(P2, a, {{3, 1}, {1, 3}}).has_value());
    CHECK_THROWS_AS(encode(P2, a, {{2, 2}}), ValidationError);
    CHECK_FALSE(accepts(a, {5}));
}

TEST_CASE("spectral data and the Parry chain") {
    auto a = build_coding(P2);
    auto s = spectral(a);
    CHECK(std::abs(s.rho - (2 + std::sqrt(3.0))) < 1e-9);
    CHECK(s.right_residual < 1e-12);
    CHECK(s.left_residual < 1e-10);
    const double r3 = 1 + std::sqrt(3.0);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(s.right[i] / s.right[3] - r3) < 1e-9);
    for (int i = 3; i < 7; ++i) CHECK(std::abs(s.right[i] / s.right[3] - 1) < 1e-9);
    for (int i = 0; i < 7; ++i) {
        CHECK(s.right[i] > 0);
        CHECK(s.left[i] > 0);
    }
    auto c = parry_chain(a, s);
    for (const auto& row : c.p) {
        double sum = 0;
        for (auto [t, p] : row) sum += p;
        CHECK(std::abs(sum - 1) < 1e-12);
    }
    std::vector<double> moved(7, 0);
    for (int i = 0; i < 7; ++i)
        for (auto [t, p] : c.p[i]) moved[t] += c.pi[i] * p;
    for (int i = 0; i < 7; ++i) CHECK(std::abs(moved[i] - c.pi[i]) < 1e-12);
    CHECK(std::abs(c.pi[0] - (std::sqrt(3.0) - 1) / 2) < 1e-9);
    CHECK(std::abs(entropy_rate(c) - std::log(s.rho)) < 1e-9);
}

TEST_CASE("non-maximal restriction") {
    auto a = build_coding(P2);
    auto r = restrict_non_max(a);
    CHECK(r.size() == 6);
    CHECK(r.inclusion[0] == -1);
    CHECK(path_counts(r, 2).back() == 10);
    double rho0 = spectral_radius(r);
    CHECK(std::abs(rho0 - 2) < 1e-9);
    CHECK(std::log(spectral(a).rho) - std::log(rho0) > 0.1);
    CHECK(std::abs(spectral_radius(a) - (2 + std::sqrt(3.0))) < 1e-9);

    auto same = restrict(a, [](const RungConfig&) { return true; });
    CHECK(transition_matrix(same) == transition_matrix(a));
    auto full = path_counts(a, 8), part = path_counts(r, 8);
    for (int n = 0; n < 8; ++n) CHECK(part[n] <= full[n]);
    CHECK_THROWS_AS(restrict(a, [](const RungConfig&) { return false; }), ValidationError);
}

TEST_CASE("automaton counts match the pruned search") {
    for (auto [name, n] : {std::pair{"path2", 8}, std::pair{"cycle3", 5}, std::pair{"path3", 5}}) {
        Graph g = builtin_graph(name);
        CAPTURE(name);
        for (auto v : {Variant::L, Variant::L0}) {
            auto brute = count_series(g, v, n, CountMethod::Brute);
            auto fast = count_series(g, v, n, CountMethod::Automaton);
            CHECK(brute.values == fast.values);
        }
    }
}

TEST_CASE("state cap") {
    CHECK_THROWS_AS(build_coding(P2, 3), FeasibilityError);
}

TEST_CASE("a reducible automaton is reported as such") {
    auto a = build_coding(P2);
    auto r = restrict_non_max(a);
    auto t = check_transitive(r);
    CHECK_FALSE(t.irreducible);
    CHECK_FALSE(t.primitive_power.has_value());
}
