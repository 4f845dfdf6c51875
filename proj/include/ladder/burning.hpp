#ifndef LADDER_BURNING_HPP
#define LADDER_BURNING_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "ladder/config.hpp"
#include "ladder/graph.hpp"

namespace ladder {

enum class BurnSide {
    Left,   // only sites adjacent to the component of the complement reaching -infinity
    Right,  // mirror image of Left
    Full,   // ordinary burning (recurrence test)
};

/// Heights on an arbitrary finite set of ladder sites.
struct SiteConfig {
    std::vector<Site> sites;
    std::vector<int> heights;

    static SiteConfig from(const LadderConfig& c);
    /// Keeps the sites for which keep(site) is true.
    template <class Pred>
    SiteConfig filtered(Pred keep) const {
        SiteConfig out;
        for (std::size_t i = 0; i < sites.size(); ++i) {
            if (keep(sites[i])) {
                out.sites.push_back(sites[i]);
                out.heights.push_back(heights[i]);
            }
        }
        return out;
    }
};

struct BurnTrace {
    /// Burn enumeration v_1, v_2, ... (complete when success).
    std::vector<Site> order;
    /// Burnt vertices of each rung when burning stopped.
    std::map<int, VertexSubset> burnt_per_rung;
    bool success = false;
};

nlohmann::json to_json(const BurnTrace& t);

/// Burning on an arbitrary finite V. Among simultaneously burnable sites the
/// lowest (rung, vertex) burns first, so traces are deterministic.
BurnTrace burn(const Graph& g, const SiteConfig& cfg, BurnSide side);

BurnTrace left_burnable(const Graph& g, const SiteConfig& cfg);
BurnTrace right_burnable(const Graph& g, const SiteConfig& cfg);
BurnTrace full_burnable(const Graph& g, const SiteConfig& cfg);
BurnTrace left_burnable(const Graph& g, const LadderConfig& c);
BurnTrace right_burnable(const Graph& g, const LadderConfig& c);
BurnTrace full_burnable(const Graph& g, const LadderConfig& c);

/// Burn with a caller-chosen tie-break among burnable sites; used to check
/// that the verdict does not depend on the order.
BurnTrace burn_in_order(const Graph& g, const SiteConfig& cfg, BurnSide side, std::uint64_t seed);

/// Verdict-only kernel for whole windows; `heights` is rung-major with
/// num_rungs * |G| entries. This is the census hot path.
bool window_burns(const Graph& g, std::span<const int> heights, int num_rungs, BurnSide side);

/// C is a valid rung: stable, recurrent on a single rung, and maximal at some vertex.
bool in_rung_alphabet(const Graph& g, const RungConfig& c);

/// f : P(G) -> P(G), tabulated on all 2^|G| subsets (index = bit mask).
using InfluenceMap = std::vector<VertexSubset>;

/// Sites of a single rung C that burn when the left copies A and the right
/// copies A_right are already burnt.
VertexSubset rung_burn(const Graph& g, VertexSubset left, const RungConfig& c, VertexSubset right);

struct BurnState {
    VertexSubset burnt;
    InfluenceMap influence;
    friend bool operator==(const BurnState&, const BurnState&) = default;
};

/// The state of the first rung: (g(G, C, {}), A -> g(G, C, A)).
BurnState first_rung_state(const Graph& g, const RungConfig& c);

/// Advances (B, f) across the next rung C by alternating the rung burn with
/// the influence map until the burnt sets stop growing.
BurnState next_rung_state(const Graph& g, VertexSubset burnt, const RungConfig& next, const InfluenceMap& f);

/// Maximal influence map A -> G.
InfluenceMap saturated_map(const Graph& g);
bool is_monotone(const InfluenceMap& f);

struct LeftmostResult {
    bool success = false;
    /// B_k: burnt vertices of rung k at the first burn in rung k+1.
    std::vector<std::optional<VertexSubset>> burnt_at_phase;
    /// T_k: burns performed before the first burn in rung k+1 (k = 1..m);
    /// the last entry is the total number of burns, ghost rung included.
    std::vector<std::optional<std::int64_t>> phase_time;
};

/// Rung-by-rung left burning with a maximal ghost rung appended on the right.
/// Every rung must lie in the alphabet (see census::enum_rungs).
LeftmostResult leftmost_schedule(const Graph& g, const std::vector<RungConfig>& rungs);

/// Closed-form test of left-burnability for the two-vertex path.
bool i01_predicate(const Graph& g, const std::vector<RungConfig>& rungs);

} // namespace ladder

#endif
