#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "ladder/burning.hpp"
#include "ladder/census.hpp"
#include "ladder/errors.hpp"

using namespace ladder;

namespace {

const Graph P2 = builtin_graph("path2");

// Counts by testing every raw stable window: no pruning and no alphabet.
std::vector<std::uint64_t> exhaustive_counts(const Graph& g, Variant v, int n_max) {
    std::vector<std::uint64_t> out;
    for (int n = 1; n <= n_max; ++n) {
        const int sites = n * g.size();
        std::vector<int> h(sites, 1);
        std::uint64_t count = 0;
        for (;;) {
            auto cfg = LadderConfig(Window(1, n), g.size(), h);
            bool ok = false;
            bool has_max = false;
            for (int k = 1; k <= n; ++k) has_max = has_max || cfg.rung(k) == g.max_rung();
            switch (v) {
            case Variant::L: ok = left_burnable(g, cfg).success; break;
            case Variant::L0: ok = !has_max && left_burnable(g, cfg).success; break;
            case Variant::S: ok = left_burnable(g, cfg).success && right_burnable(g, cfg).success; break;
            case Variant::S0:
                ok = !has_max && left_burnable(g, cfg).success && right_burnable(g, cfg).success;
                break;
            case Variant::REC: ok = full_burnable(g, cfg).success; break;
            }
            count += ok;
            int i = 0;
            while (i < sites && h[i] == g.max_height(i % g.size())) h[i++] = 1;
            if (i == sites) break;
            ++h[i];
        }
        out.push_back(count);
    }
    return out;
}

} // namespace

TEST_CASE("rung alphabets") {
    auto a = enum_rungs(P2);
    CHECK(a.rungs == std::vector<RungConfig>{{3, 3}, {3, 2}, {2, 3}, {3, 1}, {1, 3}});
    CHECK(a.find({3, 1}) == 3);
    CHECK_FALSE(a.find({2, 2}).has_value());
    CHECK(enum_rungs(builtin_graph("point")).rungs == std::vector<RungConfig>{{2}});

    Graph c3 = builtin_graph("cycle3");
    auto ac = enum_rungs(c3);
    CHECK(ac[0] == RungConfig{4, 4, 4});
    int raw = 0;
    for (int x = 1; x <= 4; ++x)
        for (int y = 1; y <= 4; ++y)
            for (int z = 1; z <= 4; ++z) {
                RungConfig r{x, y, z};
                bool has_max = x == 4 || y == 4 || z == 4;
                bool rec = full_burnable(c3, LadderConfig::from_rungs(0, {r})).success;
                raw += has_max && rec;
                CHECK(ac.find(r).has_value() == (has_max && rec));
            }
    CHECK(ac.size() == raw);
    for (int x = 0; x < 3; ++x) {
        RungConfig cx(3, 3);
        cx[x] = 4;
        CHECK(ac.find(cx).has_value());
    }
}

TEST_CASE("two-vertex path series") {
    auto a = count_series(P2, Variant::L, 8, CountMethod::Brute);
    auto b = count_series(P2, Variant::L0, 8, CountMethod::Brute);
    CHECK(a.at(1) == 5);
    CHECK(a.at(2) == 19);
    CHECK(b.at(1) == 4);
    CHECK(b.at(2) == 10);
    CHECK(renewal_identity_check(a, b, 8));
    auto csv = to_csv(a);
    CHECK(csv.rfind("variant,n,count\nL,1,5\nL,2,19\n", 0) == 0);
}

TEST_CASE("pruned search agrees with raw exhaustive counting") {
    for (const char* name : {"point", "path2", "path3"}) {
        Graph g = builtin_graph(name);
        int n_max = g.size() == 3 ? 2 : (g.size() == 2 ? 4 : 6);
        for (auto v : {Variant::L, Variant::L0, Variant::S, Variant::S0, Variant::REC}) {
            auto s = count_series(g, v, n_max, CountMethod::Brute);
            auto want = exhaustive_counts(g, v, n_max);
            CAPTURE(name);
            CAPTURE(to_string(v));
            for (int n = 1; n <= n_max; ++n) CHECK(s.at(n) == want[n - 1]);
        }
    }
}

TEST_CASE("single vertex") {
    Graph pt = builtin_graph("point");
    auto a = count_series(pt, Variant::L, 10, CountMethod::Brute);
    auto b = count_series(pt, Variant::L0, 10, CountMethod::Brute);
    for (int n = 1; n <= 10; ++n) {
        CHECK(a.at(n) == 1);
        CHECK(b.at(n) == 0);
    }
    CHECK(renewal_identity_check(a, b, 10));
    auto e = entropy_bounds(a);
    for (double u : e.upper) CHECK(u == 0.0);
    for (double l : e.lower) CHECK(l == 0.0);
}

TEST_CASE("renewal identity on the three-vertex path") {
    Graph p3 = builtin_graph("path3");
    auto a = count_series(p3, Variant::L, 6, CountMethod::Brute);
    auto b = count_series(p3, Variant::L0, 6, CountMethod::Brute);
    CHECK(renewal_identity_check(a, b, 6));
    auto broken = a;
    broken.values[3] += 1;
    CHECK_FALSE(renewal_identity_check(broken, b, 6));
}

TEST_CASE("series invariants") {
    const int n_max = 7;
    auto a = count_series(P2, Variant::L, n_max, CountMethod::Brute);
    auto b = count_series(P2, Variant::L0, n_max, CountMethod::Brute);
    auto s = count_series(P2, Variant::S, n_max, CountMethod::Brute);
    auto s0 = count_series(P2, Variant::S0, n_max, CountMethod::Brute);
    auto r = count_series(P2, Variant::REC, 5, CountMethod::Brute);
    for (int n = 1; n <= n_max; ++n) {
        CHECK(b.at(n) <= a.at(n));
        CHECK(s.at(n) <= a.at(n));
        CHECK(s0.at(n) <= s.at(n));
        CHECK(s0.at(n) <= b.at(n));
        if (n <= 5) CHECK(s.at(n) <= r.at(n));
        for (int m = 1; n + m <= n_max; ++m) CHECK(a.at(n + m) <= a.at(n) * a.at(m));
    }
}

TEST_CASE("maximal rungs are renewals") {
    for (int n = 1; n <= 6; ++n) {
        std::vector<BigInt> with_max(n, 0);
        enumerate_configs(P2, Variant::L, n, [&](const std::vector<RungConfig>& w) {
            for (int k = 0; k < n; ++k) with_max[k] += w[k] == RungConfig{3, 3};
        });
        auto a = count_series(P2, Variant::L, n, CountMethod::Brute);
        auto A = [&](int j) -> BigInt { return j == 0 ? BigInt(1) : a.at(j); };
        for (int k = 1; k <= n; ++k) CHECK(with_max[k - 1] == A(k - 1) * A(n - k));
    }
}

TEST_CASE("reflection maps left-burnable sets onto right-burnable sets") {
    for (int n = 1; n <= 5; ++n) {
        std::set<std::vector<RungConfig>> reflected_left, right;
        enumerate_configs(P2, Variant::L, n, [&](const std::vector<RungConfig>& w) {
            reflected_left.insert(std::vector<RungConfig>(w.rbegin(), w.rend()));
        });
        auto alpha = enum_rungs(P2);
        std::vector<int> idx(n, 0);
        for (;;) {
            std::vector<RungConfig> w;
            for (int i : idx) w.push_back(alpha[i]);
            if (right_burnable(P2, LadderConfig::from_rungs(1, w)).success) right.insert(w);
            int i = 0;
            while (i < n && idx[i] == alpha.size() - 1) idx[i++] = 0;
            if (i == n) break;
            ++idx[i];
        }
        CHECK(reflected_left == right);
        CHECK(right.size() == count_series(P2, Variant::L, n, CountMethod::Brute).at(n));
    }
}

TEST_CASE("entropy bounds") {
    auto a = count_series(P2, Variant::L, 10, CountMethod::Brute);
    auto e = entropy_bounds(a);
    const double h = std::log(2 + std::sqrt(3.0));
    for (int n = 1; n <= 10; ++n) {
        CHECK(e.upper[n - 1] >= h - 1e-12);
        CHECK(e.lower[n - 1] <= h + 1e-12);
        if (n > 1) CHECK(e.per_rung[n - 1] < e.per_rung[n - 2]);
    }
    CHECK(e.limit_source == "ratio");
    CHECK(std::abs(e.limit_estimate - h) < 1e-3);
    auto exact = entropy_bounds(a, h);
    CHECK(exact.limit_estimate == h);

    auto s = count_series(P2, Variant::S, 8, CountMethod::Brute);
    CHECK(std::log(s.at(8).convert_to<double>()) / 8 < std::log(a.at(8).convert_to<double>()) / 8);
    CHECK(entropy_bounds(count_series(P2, Variant::L0, 4, CountMethod::Brute)).lower.empty());

    CHECK(std::abs(log_big(BigInt(1) << 3000) - 3000 * std::log(2.0)) < 1e-9);
    CHECK(to_json(e)["rows"].size() == 10);
}

TEST_CASE("caps and bad input") {
    CensusOptions tight;
    tight.max_enum = 100;
    CHECK_THROWS_AS(count_series(P2, Variant::L, 8, CountMethod::Brute, tight), FeasibilityError);
    CHECK_THROWS_AS(count_series(P2, Variant::L, 0, CountMethod::Brute), ValidationError);
    CHECK_THROWS_AS(count_series(P2, Variant::S, 3, CountMethod::Automaton), ValidationError);
    CHECK_THROWS_AS(parse_variant("X"), ValidationError);
    CHECK(parse_variant("S0") == Variant::S0);
    CHECK(parse_method("automaton") == CountMethod::Automaton);
}

TEST_CASE("threaded search sums match the serial search") {
    CensusOptions par;
    par.threads = 3;
    auto serial = count_series(P2, Variant::L, 8, CountMethod::Brute);
    auto threaded = count_series(P2, Variant::L, 8, CountMethod::Brute, par);
    CHECK(serial.values == threaded.values);
}
