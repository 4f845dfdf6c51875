#include "ladder/burning.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <set>

#include "ladder/errors.hpp"

namespace ladder {

SiteConfig SiteConfig::from(const LadderConfig& c) {
    SiteConfig out;
    for (std::size_t i = 0; i < c.size(); ++i) {
        out.sites.push_back(c.site(i));
        out.heights.push_back(c.heights()[i]);
    }
    return out;
}

nlohmann::json to_json(const BurnTrace& t) {
    nlohmann::json order = nlohmann::json::array();
    for (const auto& s : t.order) order.push_back({s.rung, s.vertex});
    nlohmann::json per_rung = nlohmann::json::object();
    for (const auto& [k, b] : t.burnt_per_rung) per_rung[std::to_string(k)] = b.indices();
    return {{"success", t.success}, {"order", order}, {"burnt_per_rung", per_rung}};
}

namespace {

// Cells of the box of rungs [lo-1, hi+1]; rung lo-1 and hi+1 lie wholly outside V.
class BurnBox {
public:
    enum Cell : std::uint8_t { Outside, Unburnt, Burnt };

    BurnBox(const Graph& g, const SiteConfig& cfg) : g_(g), n_(g.size()) {
        if (cfg.sites.size() != cfg.heights.size()) throw ValidationError("site/height count mismatch");
        lo_ = hi_ = cfg.sites.empty() ? 0 : cfg.sites.front().rung;
        for (const auto& s : cfg.sites) {
            if (s.vertex < 0 || s.vertex >= n_) throw ValidationError("site vertex out of range");
            lo_ = std::min(lo_, s.rung);
            hi_ = std::max(hi_, s.rung);
        }
        rungs_ = hi_ - lo_ + 3;
        cell_.assign(static_cast<std::size_t>(rungs_) * n_, Outside);
        height_.assign(cell_.size(), 0);
        for (std::size_t i = 0; i < cfg.sites.size(); ++i) {
            int c = index(cfg.sites[i]);
            if (cell_[c] != Outside) throw ValidationError("site listed twice");
            cell_[c] = Unburnt;
            height_[c] = cfg.heights[i];
        }
        remaining_ = static_cast<int>(cfg.sites.size());
    }

    int index(Site s) const { return (s.rung - lo_ + 1) * n_ + s.vertex; }
    Site site(int c) const { return {c / n_ + lo_ - 1, c % n_}; }
    int size() const { return static_cast<int>(cell_.size()); }
    int lo() const { return lo_; }
    int hi() const { return hi_; }
    int width() const { return n_; }
    int remaining() const { return remaining_; }
    Cell cell(int c) const { return cell_[c]; }
    int height(int c) const { return height_[c]; }
    int threshold(int c) const { return g_.max_height(c % n_); }

    template <class F>
    void for_neighbors(int c, F&& f) const {
        int k = c / n_;
        int x = c % n_;
        if (k > 0) f(c - n_);
        if (k + 1 < rungs_) f(c + n_);
        for (int y : g_.neighbors(x)) f(k * n_ + y);
    }

    void mark_burnt(int c) {
        cell_[c] = Burnt;
        --remaining_;
    }

private:
    const Graph& g_;
    int n_;
    int lo_ = 0, hi_ = 0, rungs_ = 0;
    std::vector<Cell> cell_;
    std::vector<int> height_;
    int remaining_ = 0;
};

// Burning engine shared by the canonical and the randomized tie-breaks.
// `reach[c]` marks cells of the complement that count toward the threshold:
// for one-sided burning the component of the complement containing the
// outer rung on that side, for full burning the whole complement.
class Burner {
public:
    Burner(const Graph& g, const SiteConfig& cfg, BurnSide side) : box_(g, cfg), side_(side) {
        reach_.assign(box_.size(), 0);
        std::vector<int> seeds;
        int w = box_.width();
        for (int c = 0; c < box_.size(); ++c) {
            if (box_.cell(c) == BurnBox::Unburnt) continue;
            bool seed = side == BurnSide::Full ||
                        (side == BurnSide::Left && c < w) ||
                        (side == BurnSide::Right && c >= box_.size() - w);
            if (seed) seeds.push_back(c);
        }
        for (int c : seeds) flood(c, nullptr);
    }

    bool burnable(int c) const {
        if (box_.cell(c) != BurnBox::Unburnt) return false;
        int count = 0;
        box_.for_neighbors(c, [&](int d) { count += reach_[d]; });
        return count > 0 && box_.height(c) > box_.threshold(c) - count;
    }

    // Burns c and returns the unburnt cells whose count may have changed.
    std::vector<int> burn(int c) {
        box_.mark_burnt(c);
        std::vector<int> touched;
        flood(c, &touched);
        return touched;
    }

    const BurnBox& box() const { return box_; }

    BurnTrace finish(std::vector<Site> order) const {
        BurnTrace t;
        t.order = std::move(order);
        t.success = box_.remaining() == 0;
        for (int k = box_.lo(); k <= box_.hi(); ++k) {
            VertexSubset b;
            bool any = false;
            for (int x = 0; x < box_.width(); ++x) {
                auto cell = box_.cell(box_.index({k, x}));
                if (cell != BurnBox::Outside) any = true;
                if (cell == BurnBox::Burnt) b.insert(x);
            }
            if (any) t.burnt_per_rung[k] = b;
        }
        return t;
    }

private:
    // Adds c and everything of the complement connected to it to the reached set.
    void flood(int start, std::vector<int>* touched) {
        auto note = [&](int d) {
            if (touched && box_.cell(d) == BurnBox::Unburnt) touched->push_back(d);
        };
        if (side_ == BurnSide::Full) {
            reach_[start] = 1;
            box_.for_neighbors(start, note);
            return;
        }
        if (reach_[start]) return;
        std::deque<int> queue{start};
        reach_[start] = 1;
        while (!queue.empty()) {
            int c = queue.front();
            queue.pop_front();
            box_.for_neighbors(c, [&](int d) {
                note(d);
                if (!reach_[d] && box_.cell(d) != BurnBox::Unburnt) {
                    reach_[d] = 1;
                    queue.push_back(d);
                }
            });
        }
    }

    BurnBox box_;
    BurnSide side_;
    std::vector<std::uint8_t> reach_;
};

} // namespace

BurnTrace burn(const Graph& g, const SiteConfig& cfg, BurnSide side) {
    Burner b(g, cfg, side);
    std::set<int> candidates;
    for (int c = 0; c < b.box().size(); ++c) {
        if (b.box().cell(c) == BurnBox::Unburnt) candidates.insert(c);
    }
    std::vector<Site> order;
    // Every burnable cell stays in `candidates`: a cell is dropped only when it
    // fails the test, and is re-added whenever one of its counts can change.
    while (!candidates.empty()) {
        int c = *candidates.begin();
        candidates.erase(candidates.begin());
        if (!b.burnable(c)) continue;
        order.push_back(b.box().site(c));
        for (int d : b.burn(c)) candidates.insert(d);
    }
    return b.finish(std::move(order));
}

BurnTrace burn_in_order(const Graph& g, const SiteConfig& cfg, BurnSide side, std::uint64_t seed) {
    Burner b(g, cfg, side);
    std::mt19937_64 rng(seed);
    std::vector<Site> order;
    for (;;) {
        std::vector<int> ready;
        for (int c = 0; c < b.box().size(); ++c) {
            if (b.burnable(c)) ready.push_back(c);
        }
        if (ready.empty()) break;
        int c = ready[rng() % ready.size()];
        order.push_back(b.box().site(c));
        b.burn(c);
    }
    return b.finish(std::move(order));
}

BurnTrace left_burnable(const Graph& g, const SiteConfig& cfg) { return burn(g, cfg, BurnSide::Left); }
BurnTrace right_burnable(const Graph& g, const SiteConfig& cfg) { return burn(g, cfg, BurnSide::Right); }
BurnTrace full_burnable(const Graph& g, const SiteConfig& cfg) { return burn(g, cfg, BurnSide::Full); }
BurnTrace left_burnable(const Graph& g, const LadderConfig& c) { return burn(g, SiteConfig::from(c), BurnSide::Left); }
BurnTrace right_burnable(const Graph& g, const LadderConfig& c) { return burn(g, SiteConfig::from(c), BurnSide::Right); }
BurnTrace full_burnable(const Graph& g, const LadderConfig& c) { return burn(g, SiteConfig::from(c), BurnSide::Full); }

bool window_burns(const Graph& g, std::span<const int> heights, int num_rungs, BurnSide side) {
    const int n = g.size();
    std::uint32_t burnt[256];
    std::vector<std::uint32_t> big;
    std::uint32_t* b = burnt;
    if (num_rungs > 256) {
        big.assign(num_rungs, 0);
        b = big.data();
    } else {
        std::fill(burnt, burnt + num_rungs, 0u);
    }
    const std::uint32_t full = VertexSubset::full(n).bits();
    const bool mirror = side == BurnSide::Right;
    auto h = [&](int k, int x) { return heights[static_cast<std::size_t>(mirror ? num_rungs - 1 - k : k) * n + x]; };

    // In window coordinates (after mirroring for Right) every burnt site lies in
    // the left component; the right exterior joins it once the last rung has a
    // burnt site. Full burning counts both exteriors unconditionally.
    bool changed = true;
    while (changed) {
        changed = false;
        for (int k = 0; k < num_rungs; ++k) {
            if (b[k] == full) continue;
            for (;;) {
                bool burned_here = false;
                for (int x = 0; x < n; ++x) {
                    if ((b[k] >> x) & 1u) continue;
                    int count = std::popcount(g.neighbor_mask(x).bits() & b[k]);
                    count += k == 0 ? 1 : static_cast<int>((b[k - 1] >> x) & 1u);
                    if (k + 1 < num_rungs) {
                        count += static_cast<int>((b[k + 1] >> x) & 1u);
                    } else if (side == BurnSide::Full || b[k] != 0) {
                        count += 1;
                    }
                    if (h(k, x) > g.max_height(x) - count) {
                        b[k] |= 1u << x;
                        burned_here = true;
                        changed = true;
                    }
                }
                if (!burned_here) break;
            }
        }
    }
    for (int k = 0; k < num_rungs; ++k) {
        if (b[k] != full) return false;
    }
    return true;
}

bool in_rung_alphabet(const Graph& g, const RungConfig& c) {
    if (static_cast<int>(c.size()) != g.size()) return false;
    bool has_max = false;
    for (int x = 0; x < g.size(); ++x) {
        if (c[x] < 1 || c[x] > g.max_height(x)) return false;
        has_max = has_max || c[x] == g.max_height(x);
    }
    return has_max && window_burns(g, c, 1, BurnSide::Full);
}

VertexSubset rung_burn(const Graph& g, VertexSubset left, const RungConfig& c, VertexSubset right) {
    VertexSubset burnt;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int x = 0; x < g.size(); ++x) {
            if (burnt.contains(x)) continue;
            int count = (g.neighbor_mask(x) & burnt).size() + left.contains(x) + right.contains(x);
            if (c[x] > g.max_height(x) - count) {
                burnt.insert(x);
                changed = true;
            }
        }
    }
    return burnt;
}

InfluenceMap saturated_map(const Graph& g) {
    return InfluenceMap(std::size_t{1} << g.size(), g.all());
}

BurnState first_rung_state(const Graph& g, const RungConfig& c) {
    BurnState s;
    s.burnt = rung_burn(g, g.all(), c, {});
    s.influence.resize(std::size_t{1} << g.size());
    for (std::uint32_t a = 0; a < s.influence.size(); ++a) {
        s.influence[a] = rung_burn(g, g.all(), c, VertexSubset(a));
    }
    return s;
}

namespace {

// Alternates "burn the new rung given the old rung's burnt set" with "let the
// old rungs react to the new rung's burnt set" until the new rung's set stops
// changing. `pending_right` is the pre-declared burnt set to the right.
VertexSubset settle(const Graph& g, VertexSubset old_burnt, const RungConfig& next, const InfluenceMap& f,
                    VertexSubset pending_right) {
    VertexSubset a = rung_burn(g, old_burnt, next, pending_right);
    const std::size_t cap = f.size() + 2;
    for (std::size_t it = 0;; ++it) {
        if (it > cap) throw InternalError("rung/influence alternation did not stabilize");
        VertexSubset a_next = rung_burn(g, f[a.bits()], next, pending_right);
        if (a_next == a) return a;
        a = a_next;
    }
}

} // namespace

BurnState next_rung_state(const Graph& g, VertexSubset burnt, const RungConfig& next, const InfluenceMap& f) {
    BurnState s;
    s.burnt = settle(g, burnt, next, f, {});
    VertexSubset old_now = f[s.burnt.bits()];
    s.influence.resize(f.size());
    for (std::uint32_t a = 0; a < f.size(); ++a) {
        s.influence[a] = settle(g, old_now, next, f, VertexSubset(a));
    }
    return s;
}

bool is_monotone(const InfluenceMap& f) {
    for (std::uint32_t a = 0; a < f.size(); ++a) {
        for (std::uint32_t rest = ~a & (static_cast<std::uint32_t>(f.size()) - 1); rest != 0; rest &= rest - 1) {
            std::uint32_t bigger = a | (rest & -rest);
            if (!f[a].subset_of(f[bigger])) return false;
        }
    }
    return true;
}

LeftmostResult leftmost_schedule(const Graph& g, const std::vector<RungConfig>& rungs) {
    const int m = static_cast<int>(rungs.size());
    for (const auto& c : rungs) {
        if (!in_rung_alphabet(g, c)) throw ValidationError("not a valid rung");
    }
    // Rungs 1..m are the input, rung m+1 is the ghost; index 0 is unused.
    std::vector<RungConfig> h(m + 2);
    for (int k = 1; k <= m; ++k) h[k] = rungs[k - 1];
    h[m + 1] = g.max_rung();
    std::vector<VertexSubset> s(m + 2);

    LeftmostResult out;
    out.burnt_at_phase.assign(m, std::nullopt);
    out.phase_time.assign(m + 1, std::nullopt);
    std::int64_t time = 0;

    auto burnable = [&](int j, int x) {
        if (s[j].contains(x)) return false;
        int count = (g.neighbor_mask(x) & s[j]).size();
        count += j == 1 ? 1 : static_cast<int>(s[j - 1].contains(x));
        if (j <= m) count += static_cast<int>(s[j + 1].contains(x));
        return h[j][x] > g.max_height(x) - count;
    };
    auto next_in_rung = [&](int j) {
        for (int x = 0; x < g.size(); ++x) {
            if (burnable(j, x)) return x;
        }
        return -1;
    };
    auto exhaust = [&](int j) {
        for (int x = next_in_rung(j); x >= 0; x = next_in_rung(j)) {
            s[j].insert(x);
            ++time;
        }
    };

    for (int k = 1; k <= m + 1; ++k) {
        // Rungs 1..k-1 have no burnable site here.
        if (k >= 2) {
            if (next_in_rung(k) < 0) break;
            out.burnt_at_phase[k - 2] = s[k - 1];
            out.phase_time[k - 2] = time;
        }
        exhaust(k);
        for (;;) {
            int j = 1;
            while (j <= k && next_in_rung(j) < 0) ++j;
            if (j > k) break;
            exhaust(j);
        }
    }
    out.phase_time[m] = time;
    out.success = true;
    for (int k = 1; k <= m; ++k) out.success = out.success && s[k] == g.all();
    return out;
}

bool i01_predicate(const Graph& g, const std::vector<RungConfig>& rungs) {
    if (!g.is_two_vertex_path()) throw ValidationError("closed-form predicate applies to the two-vertex path only");
    auto is = [](const RungConfig& r, int a, int b) { return r[0] == a && r[1] == b; };
    const std::size_t m = rungs.size();
    for (const auto& r : rungs) {
        if (r.size() != 2) throw ValidationError("rung width must be 2");
        if (r[0] != 3 && r[1] != 3) return false;
    }
    for (std::size_t k = 0; k < m; ++k) {
        int lone = is(rungs[k], 3, 1) ? 1 : is(rungs[k], 1, 3) ? 0 : -1;
        if (lone < 0) continue;
        // After (3,1) only (3,2) may follow until (3,3); mirrored for (1,3).
        for (std::size_t j = k + 1; j < m; ++j) {
            if (is(rungs[j], 3, 3)) break;
            bool pass = lone == 1 ? is(rungs[j], 3, 2) : is(rungs[j], 2, 3);
            if (!pass) return false;
        }
    }
    return true;
}

} // namespace ladder
