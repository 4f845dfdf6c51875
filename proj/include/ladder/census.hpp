#ifndef LADDER_CENSUS_HPP
#define LADDER_CENSUS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "ladder/config.hpp"
#include "ladder/graph.hpp"

namespace ladder {

using BigInt = boost::multiprecision::cpp_int;

/// All valid single rungs, ordered by total height (descending) and then
/// lexicographically descending, so the maximal rung is always index 0.
struct RungAlphabet {
    std::vector<RungConfig> rungs;
    std::map<RungConfig, int> index;

    int size() const { return static_cast<int>(rungs.size()); }
    static constexpr int max_index() { return 0; }
    std::optional<int> find(const RungConfig& c) const;
    const RungConfig& operator[](int i) const { return rungs[i]; }
};

RungAlphabet enum_rungs(const Graph& g);

/// L: left-burnable. L0: left-burnable with no maximal rung. S: left- and
/// right-burnable. S0: S with no maximal rung. REC: recurrent.
enum class Variant { L, L0, S, S0, REC };
enum class CountMethod { Brute, Automaton };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);
std::string to_string(CountMethod m);
CountMethod parse_method(const std::string& s);

inline constexpr std::uint64_t kDefaultMaxEnum = 200'000'000;

struct CensusOptions {
    /// Cap on candidate extensions examined by the pruned search.
    std::uint64_t max_enum = kDefaultMaxEnum;
    /// Cap on automaton size when counting by paths.
    std::size_t max_states = 1'000'000;
    int threads = 1;
};

struct CountSeries {
    Variant variant = Variant::L;
    CountMethod method = CountMethod::Brute;
    /// values[n - 1] is the count on a window of n rungs.
    std::vector<BigInt> values;

    int n_max() const { return static_cast<int>(values.size()); }
    const BigInt& at(int n) const { return values.at(n - 1); }
};

CountSeries count_series(const Graph& g, Variant variant, int n_max, CountMethod method,
                         const CensusOptions& opts = {});

/// Calls visit on every member of the variant's set on a window of n rungs,
/// in lexicographic order of alphabet indices. For REC the rungs range over
/// all stable vectors rather than the alphabet.
void enumerate_configs(const Graph& g, Variant variant, int n,
                       const std::function<void(const std::vector<RungConfig>&)>& visit,
                       const CensusOptions& opts = {});

/// a_n = b_n + sum_{k=1}^n b_{k-1} a_{n-k} with a_0 = b_0 = 1, for n = 1..n_max.
bool renewal_identity_check(const CountSeries& a, const CountSeries& b, int n_max);

struct EntropyTable {
    /// log(a_n) / n.
    std::vector<double> per_rung;
    /// Running minimum of per_rung: an upper bound on the entropy.
    std::vector<double> upper;
    /// log(a_n) / (n + 1), a lower bound when maximal rungs can be spliced in
    /// (variants L, S and REC); empty otherwise.
    std::vector<double> lower;
    double limit_estimate = 0;
    std::string limit_source;
};

/// exact_log_rho, if given, is used as the limit estimate.
EntropyTable entropy_bounds(const CountSeries& s, std::optional<double> exact_log_rho = std::nullopt);

nlohmann::json to_json(const EntropyTable& t);
std::string to_csv(const CountSeries& s);

/// Natural log of a positive big integer, accurate for any size.
double log_big(const BigInt& v);

} // namespace ladder

#endif
