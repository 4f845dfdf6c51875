#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ladder/burning.hpp"
#include "ladder/toppling.hpp"

using namespace ladder;

namespace {

const Graph P2 = builtin_graph("path2");

// Replays an avalanche straight from the Laplacian: scan for any unstable
// site, subtract its Laplacian column.
std::pair<std::vector<int>, std::vector<std::int64_t>> replay(const Graph& g, const LadderConfig& c,
                                                              const std::vector<Site>& add) {
    std::vector<int> h(c.heights().begin(), c.heights().end());
    for (auto s : add) ++h[c.index(s)];
    std::vector<std::int64_t> odo(h.size(), 0);
    for (bool any = true; any;) {
        any = false;
        for (std::size_t i = 0; i < h.size(); ++i) {
            Site u = c.site(i);
            if (h[i] <= laplacian_entry(g, u, u)) continue;
            any = true;
            ++odo[i];
            for (std::size_t j = 0; j < h.size(); ++j) h[j] -= laplacian_entry(g, c.site(j), u);
        }
    }
    return {h, odo};
}

LadderConfig random_stable(const Graph& g, Window w, std::mt19937_64& rng) {
    std::vector<int> h;
    for (int k = 0; k < w.num_rungs(); ++k)
        for (int x = 0; x < g.size(); ++x) h.push_back(1 + static_cast<int>(rng() % g.max_height(x)));
    return LadderConfig(w, g.size(), h);
}

std::vector<Schedule> five_schedules() {
    return {Schedule::parallel(), Schedule::canonical(), Schedule::random(1), Schedule::random(2), Schedule::random(3)};
}

} // namespace

TEST_CASE("single-vertex hand example") {
    Graph pt = builtin_graph("point");
    auto c = LadderConfig::from_rungs(1, {{2}, {2}, {2}});
    for (auto s : five_schedules()) {
        auto r = stabilize(pt, c, {{2, 0}}, s);
        CHECK(r.config.heights()[0] == 2);
        CHECK(r.config.heights()[1] == 1);
        CHECK(r.config.heights()[2] == 2);
        CHECK(r.odometer.counts == std::vector<std::int64_t>{1, 2, 1});
        CHECK(r.odometer.to_sink == 2);
    }
}

TEST_CASE("no additions is the identity") {
    std::mt19937_64 rng(1);
    auto c = random_stable(P2, Window(-3, 3), rng);
    auto r = stabilize(P2, c, {}, Schedule::canonical());
    CHECK(r.config == c);
    CHECK(r.odometer.total() == 0);
    CHECK(r.odometer.to_sink == 0);
    CHECK(check_abelian(P2, c, {}, five_schedules()));
}

TEST_CASE("schedules agree with the replay oracle and conserve mass") {
    std::mt19937_64 rng(7);
    for (const char* name : {"point", "path2", "path3", "cycle3"}) {
        Graph g = builtin_graph(name);
        for (int trial = 0; trial < 100; ++trial) {
            Window w(1, 1 + static_cast<int>(rng() % 6));
            auto c = random_stable(g, w, rng);
            std::vector<Site> add;
            int grains = 1 + static_cast<int>(rng() % 5);
            for (int i = 0; i < grains; ++i)
                add.push_back({w.first + static_cast<int>(rng() % w.num_rungs()), static_cast<int>(rng() % g.size())});
            auto [h, odo] = replay(g, c, add);
            for (auto s : five_schedules()) {
                auto r = stabilize(g, c, add, s);
                CHECK(r.config.is_stable(g));
                CHECK(std::vector<int>(r.config.heights().begin(), r.config.heights().end()) == h);
                CHECK(r.odometer.counts == odo);

                std::int64_t before = grains, after = r.odometer.to_sink, sink = 0;
                for (auto v : c.heights()) before += v;
                for (auto v : r.config.heights()) after += v;
                CHECK(before == after);
                for (std::size_t i = 0; i < c.size(); ++i) {
                    Site u = c.site(i);
                    sink += r.odometer.counts[i] * sink_multiplicity(g, w, u);
                    std::int64_t balance = c.heights()[i];
                    for (auto a : add) balance += a == u;
                    for (std::size_t j = 0; j < c.size(); ++j)
                        balance -= laplacian_entry(g, u, c.site(j)) * r.odometer.counts[j];
                    CHECK(balance == r.config.heights()[i]);
                }
                CHECK(sink == r.odometer.to_sink);
            }
        }
    }
}

TEST_CASE("abelian invariance on the two-vertex path") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        Window w(1, 2 + static_cast<int>(rng() % 10));
        auto c = random_stable(P2, w, rng);
        Site s{w.first + static_cast<int>(rng() % w.num_rungs()), static_cast<int>(rng() % 2)};
        CHECK(check_abelian(P2, c, {s}, five_schedules()));
    }
}

TEST_CASE("mid-avalanche heights replay") {
    auto c = LadderConfig::from_rungs(0, {{7, 3}, {3, 3}});
    auto r = stabilize(P2, c, {}, Schedule::canonical());
    CHECK(r.config.is_stable(P2));
    CHECK(check_abelian(P2, c, {}, five_schedules()));
    CHECK_THROWS_AS(stabilize(P2, LadderConfig::from_rungs(0, {{0, 3}}), {}, Schedule::parallel()), ValidationError);
    CHECK_THROWS_AS(stabilize(P2, c, {{5, 0}}, Schedule::parallel()), ValidationError);
}

TEST_CASE("step cap carries the partial odometer") {
    auto c = LadderConfig::uniform(Window(0, 40), {3, 3});
    try {
        stabilize(P2, c, {{20, 0}}, Schedule::canonical(), 10);
        FAIL("expected the cap to trip");
    } catch (const StepCapExceeded& e) {
        CHECK(e.partial().total() == 10);
    }
    CHECK_THROWS_AS(stabilize(P2, c, {{20, 0}}, Schedule::parallel(), 10), FeasibilityError);
    CHECK_THROWS_AS(stabilize(P2, c, {{20, 0}}, Schedule::random(4), 10), FeasibilityError);
}

TEST_CASE("the finite avalanche of the two-vertex path") {
    auto demo = finite_avalanche_demo(16);
    CHECK(left_burnable(P2, demo.config).success);
    for (auto s : five_schedules()) {
        auto r = stabilize(P2, demo.config, {demo.addition}, s);
        std::vector<std::int64_t> row0, row1;
        for (int k = 1; k <= 16; ++k) {
            row0.push_back(r.odometer.at({k, 0}));
            row1.push_back(r.odometer.at({k, 1}));
        }
        std::vector<std::int64_t> want0{0, 0, 1, 2, 1, 1}, want1{0, 0, 0, 1, 1, 1};
        while (want0.size() < 16) want0.push_back(1), want1.push_back(1);
        CHECK(row0 == want0);
        CHECK(row1 == want1);
        CHECK(r.config.is_stable(P2));
    }
}

TEST_CASE("rung-zero blast") {
    Graph pt = builtin_graph("point");
    for (int K : {1, 3, 6}) {
        auto b = rung_zero_blast(pt, LadderConfig::uniform(Window(-K, K), {2}), Schedule::canonical());
        CHECK(b.min_over(-K, K) >= 1);
    }
    auto b = rung_zero_blast(P2, LadderConfig::uniform(Window(-2, 2), {3, 3}), Schedule::parallel());
    CHECK(b.min_over(-2, 2) >= 1);

    std::int64_t prev = 0;
    for (int K : {4, 8, 16}) {
        auto r = rung_zero_blast(P2, LadderConfig::uniform(Window(-K, K), {3, 3}), Schedule::canonical());
        CHECK(r.min_over(-2, 2) > prev);
        prev = r.min_over(-2, 2);
    }
    CHECK_THROWS_AS(rung_zero_blast(P2, LadderConfig::uniform(Window(-2, 3), {3, 3}), Schedule::canonical()), ValidationError);
    auto right_only = LadderConfig::from_rungs(-2, {{3, 3}, {3, 3}, {3, 1}, {2, 3}, {3, 3}});
    CHECK_THROWS_AS(rung_zero_blast(P2, right_only, Schedule::canonical()), ValidationError);
}

TEST_CASE("schedule names round-trip") {
    for (auto s : five_schedules()) {
        auto back = parse_schedule(s.name());
        CHECK(back.kind == s.kind);
        CHECK(back.seed == s.seed);
    }
    CHECK_THROWS_AS(parse_schedule("lifo"), ValidationError);
    CHECK_THROWS_AS(parse_schedule("random:x"), ValidationError);
}
