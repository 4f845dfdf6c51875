#include "ladder/toppling.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <set>

#include "ladder/burning.hpp"

namespace ladder {

std::string Schedule::name() const {
    switch (kind) {
    case Parallel: return "parallel";
    case Canonical: return "canonical";
    case Random: return "random:" + std::to_string(seed);
    }
    return "?";
}

Schedule parse_schedule(const std::string& text) {
    if (text == "parallel") return Schedule::parallel();
    if (text == "canonical") return Schedule::canonical();
    if (text.starts_with("random")) {
        std::uint64_t seed = 0;
        if (text.size() > 6) {
            if (text[6] != ':') throw ValidationError("schedule must be parallel, canonical or random:<seed>");
            try {
                seed = std::stoull(text.substr(7));
            } catch (const std::exception&) {
                throw ValidationError("bad random schedule seed in '" + text + "'");
            }
        }
        return Schedule::random(seed);
    }
    throw ValidationError("schedule must be parallel, canonical or random:<seed>");
}

Odometer::Odometer(Window w, int width_) : window(w), width(width_), counts(static_cast<std::size_t>(w.num_rungs()) * width_, 0) {}

std::vector<std::int64_t> Odometer::rung(int k) const {
    auto begin = counts.begin() + static_cast<std::ptrdiff_t>(index({k, 0}));
    return {begin, begin + width};
}

std::int64_t Odometer::total() const {
    std::int64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

nlohmann::json to_json(const Odometer& o) {
    nlohmann::json rungs = nlohmann::json::array();
    for (int k = o.window.first; k <= o.window.last; ++k) rungs.push_back(o.rung(k));
    return {{"first_rung", o.window.first}, {"counts", rungs}, {"to_sink", o.to_sink}};
}

StepCapExceeded::StepCapExceeded(std::int64_t cap, Odometer partial)
    : FeasibilityError("avalanche exceeded the step cap of " + std::to_string(cap) +
                       " site-topplings (raise --step-cap)"),
      partial_(std::move(partial)) {}

namespace {

class Pile {
public:
    Pile(const Graph& g, const LadderConfig& c)
        : g_(g), w_(c.window()), n_(g.size()), h_(c.heights().begin(), c.heights().end()), odo_(c.window(), g.size()) {
        if (c.width() != g.size()) throw ValidationError("configuration width does not match the graph");
        for (auto v : h_) {
            if (v < 1) throw ValidationError("heights must be positive");
        }
    }

    int size() const { return static_cast<int>(h_.size()); }
    bool unstable(int i) const { return h_[i] > g_.max_height(i % n_); }
    void add(int i) { ++h_[i]; }

    int index(Site s) const {
        if (!w_.contains(s.rung) || s.vertex < 0 || s.vertex >= n_) throw ValidationError("addition outside window");
        return (s.rung - w_.first) * n_ + s.vertex;
    }

    template <class F>
    void topple(int i, F&& on_neighbor) {
        int k = i / n_;
        int x = i % n_;
        h_[i] -= g_.max_height(x);
        ++odo_.counts[i];
        int inside = g_.degree(x);
        for (int y : g_.neighbors(x)) {
            ++h_[k * n_ + y];
            on_neighbor(k * n_ + y);
        }
        if (k > 0) {
            ++h_[i - n_];
            on_neighbor(i - n_);
            ++inside;
        }
        if (k + 1 < w_.num_rungs()) {
            ++h_[i + n_];
            on_neighbor(i + n_);
            ++inside;
        }
        odo_.to_sink += g_.max_height(x) - inside;
    }

    Stabilized finish() const {
        std::vector<int> h(h_.size());
        for (std::size_t i = 0; i < h.size(); ++i) {
            if (h_[i] > std::numeric_limits<int>::max()) throw FeasibilityError("height overflow");
            h[i] = static_cast<int>(h_[i]);
        }
        return {LadderConfig(w_, n_, std::move(h)), odo_};
    }

    const Odometer& odometer() const { return odo_; }

private:
    const Graph& g_;
    Window w_;
    int n_;
    std::vector<std::int64_t> h_;
    Odometer odo_;
};

void run_parallel(Pile& p, std::int64_t cap) {
    std::vector<int> wave;
    for (int i = 0; i < p.size(); ++i) {
        if (p.unstable(i)) wave.push_back(i);
    }
    std::int64_t steps = 0;
    std::vector<char> queued(p.size(), 0);
    while (!wave.empty()) {
        // Every site unstable at the start of the wave topples once; the
        // grains it sends are only looked at in the next wave.
        std::vector<int> touched;
        for (int i : wave) {
            if (++steps > cap) throw StepCapExceeded(cap, p.odometer());
            p.topple(i, [&](int j) { touched.push_back(j); });
        }
        for (int i : wave) touched.push_back(i);
        wave.clear();
        for (int j : touched) {
            if (!queued[j] && p.unstable(j)) {
                queued[j] = 1;
                wave.push_back(j);
            }
        }
        for (int j : wave) queued[j] = 0;
        std::sort(wave.begin(), wave.end());
    }
}

void run_canonical(Pile& p, std::int64_t cap) {
    std::set<int> unstable;
    for (int i = 0; i < p.size(); ++i) {
        if (p.unstable(i)) unstable.insert(i);
    }
    std::int64_t steps = 0;
    while (!unstable.empty()) {
        int i = *unstable.begin();
        if (++steps > cap) throw StepCapExceeded(cap, p.odometer());
        p.topple(i, [&](int j) {
            if (p.unstable(j)) unstable.insert(j);
        });
        if (!p.unstable(i)) unstable.erase(i);
    }
}

void run_random(Pile& p, std::int64_t cap, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> pool;
    std::vector<int> where(p.size(), -1);
    auto enlist = [&](int j) {
        if (where[j] < 0 && p.unstable(j)) {
            where[j] = static_cast<int>(pool.size());
            pool.push_back(j);
        }
    };
    auto delist = [&](int j) {
        int pos = where[j];
        where[pool.back()] = pos;
        pool[pos] = pool.back();
        pool.pop_back();
        where[j] = -1;
    };
    for (int i = 0; i < p.size(); ++i) enlist(i);
    std::int64_t steps = 0;
    while (!pool.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        int i = pool[pick(rng)];
        if (++steps > cap) throw StepCapExceeded(cap, p.odometer());
        p.topple(i, enlist);
        if (!p.unstable(i)) delist(i);
    }
}

} // namespace

Stabilized stabilize(const Graph& g, const LadderConfig& config, const std::vector<Site>& additions,
                     const Schedule& schedule, std::int64_t step_cap) {
    if (step_cap <= 0) throw ValidationError("step cap must be positive");
    Pile p(g, config);
    for (const auto& s : additions) p.add(p.index(s));
    switch (schedule.kind) {
    case Schedule::Parallel: run_parallel(p, step_cap); break;
    case Schedule::Canonical: run_canonical(p, step_cap); break;
    case Schedule::Random: run_random(p, step_cap, schedule.seed); break;
    }
    return p.finish();
}

bool check_abelian(const Graph& g, const LadderConfig& config, const std::vector<Site>& additions,
                   const std::vector<Schedule>& schedules, std::int64_t step_cap) {
    if (schedules.empty()) return true;
    auto ref = stabilize(g, config, additions, schedules.front(), step_cap);
    for (std::size_t i = 1; i < schedules.size(); ++i) {
        auto r = stabilize(g, config, additions, schedules[i], step_cap);
        if (!(r.config == ref.config) || !(r.odometer == ref.odometer)) return false;
    }
    return true;
}

std::int64_t BlastResult::min_over(int first_rung, int last_rung) const {
    std::int64_t m = std::numeric_limits<std::int64_t>::max();
    for (int k = first_rung; k <= last_rung; ++k) {
        if (!odometer.window.contains(k)) throw ValidationError("rung outside blast window");
        m = std::min(m, rung_min[k - odometer.window.first]);
    }
    return m;
}

BlastResult rung_zero_blast(const Graph& g, const LadderConfig& eta, const Schedule& schedule, std::int64_t step_cap) {
    Window w = eta.window();
    if (w.first != -w.last) throw ValidationError("blast needs a symmetric window [-K, K]");
    if (!eta.is_stable(g)) throw ValidationError("blast configuration must be stable");
    if (!left_burnable(g, eta).success) throw ValidationError("blast configuration must be left-burnable");
    std::vector<Site> grains;
    for (int x = 0; x < g.size(); ++x) grains.push_back({0, x});
    auto s = stabilize(g, eta, grains, schedule, step_cap);
    BlastResult out{s.odometer, {}, s.config};
    for (int k = w.first; k <= w.last; ++k) {
        auto r = s.odometer.rung(k);
        out.rung_min.push_back(*std::min_element(r.begin(), r.end()));
    }
    return out;
}

AvalancheDemo finite_avalanche_demo(int last_rung) {
    if (last_rung < 6) throw ValidationError("demo window must reach rung 6");
    std::vector<RungConfig> rungs{{3, 3}, {2, 3}, {3, 1}, {3, 3}, {1, 3}, {3, 3}};
    while (static_cast<int>(rungs.size()) < last_rung) rungs.push_back({3, 3});
    return {LadderConfig::from_rungs(1, rungs), Site{4, 0}};
}

} // namespace ladder
