#ifndef LADDER_TOPPLING_HPP
#define LADDER_TOPPLING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ladder/config.hpp"
#include "ladder/errors.hpp"
#include "ladder/graph.hpp"

namespace ladder {

inline constexpr std::int64_t kDefaultStepCap = 10'000'000;

/// Which unstable sites topple next.
struct Schedule {
    enum Kind { Parallel, Canonical, Random };
    Kind kind = Parallel;
    std::uint64_t seed = 0;

    static Schedule parallel() { return {Parallel, 0}; }
    /// Least (rung, vertex) first.
    static Schedule canonical() { return {Canonical, 0}; }
    /// Uniform among the currently unstable sites.
    static Schedule random(std::uint64_t seed) { return {Random, seed}; }

    std::string name() const;
};

/// Parses "parallel", "canonical" or "random:<seed>".
Schedule parse_schedule(const std::string& text);

/// Topple counts per site of a window plus the grains that left through the sink.
struct Odometer {
    Window window;
    int width = 0;
    std::vector<std::int64_t> counts;
    std::int64_t to_sink = 0;

    Odometer() = default;
    Odometer(Window w, int width);

    std::int64_t at(Site s) const { return counts[index(s)]; }
    std::int64_t& at(Site s) { return counts[index(s)]; }
    std::vector<std::int64_t> rung(int k) const;
    std::int64_t total() const;

    friend bool operator==(const Odometer&, const Odometer&) = default;

private:
    std::size_t index(Site s) const { return static_cast<std::size_t>(s.rung - window.first) * width + s.vertex; }
};

nlohmann::json to_json(const Odometer& o);

/// Thrown when an avalanche needs more site-topplings than the cap allows.
class StepCapExceeded : public FeasibilityError {
public:
    StepCapExceeded(std::int64_t cap, Odometer partial);
    const Odometer& partial() const { return partial_; }

private:
    Odometer partial_;
};

struct Stabilized {
    LadderConfig config;
    Odometer odometer;
};

/// Adds one grain per listed site (repeats allowed) and topples until stable.
/// Input heights may be any positive integers, so mid-avalanche states replay.
Stabilized stabilize(const Graph& g, const LadderConfig& config, const std::vector<Site>& additions,
                     const Schedule& schedule, std::int64_t step_cap = kDefaultStepCap);

/// True iff every schedule yields the same final configuration and odometer.
bool check_abelian(const Graph& g, const LadderConfig& config, const std::vector<Site>& additions,
                   const std::vector<Schedule>& schedules, std::int64_t step_cap = kDefaultStepCap);

struct BlastResult {
    Odometer odometer;
    /// Minimum topple count over the vertices of each rung, indexed from window.first.
    std::vector<std::int64_t> rung_min;
    LadderConfig final_config;

    std::int64_t min_over(int first_rung, int last_rung) const;
};

/// One grain on every site of rung 0 of a left-burnable configuration on
/// the symmetric window [-K, K], then stabilization.
BlastResult rung_zero_blast(const Graph& g, const LadderConfig& eta, const Schedule& schedule,
                            std::int64_t step_cap = kDefaultStepCap);

/// The two-vertex-path avalanche with finite toppling numbers: rungs 1..6 as
/// printed, padded with maximal rungs up to `last_rung`. The grain goes to
/// vertex 0 of rung 4.
struct AvalancheDemo {
    LadderConfig config;
    Site addition;
};
AvalancheDemo finite_avalanche_demo(int last_rung = 16);

} // namespace ladder

#endif
