#ifndef LADDER_MEASURES_HPP
#define LADDER_MEASURES_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "ladder/coding.hpp"
#include "ladder/config.hpp"
#include "ladder/graph.hpp"

namespace ladder {

inline constexpr int kDefaultRenewalOrder = 512;

/// Inter-renewal law of the left-burnable measure, computed from the counts
/// b_n of non-maximal left-burnable windows (b_0 = 1).
struct RenewalData {
    int order = 0;                // N: b_0 .. b_N were used
    double lambda = 0;            // root of z * sum_{n<N} b_n z^n = 1
    double lambda_lower = 0;      // root once the certified tail is added
    std::vector<double> log_b;    // log b_0 .. log b_N
    std::vector<double> p;        // p[k - 1] = lambda^k b_{k-1}, k = 1..N
    double tail_bound = 0;        // bound on sum_{k>N} p_k
    double mean_gap = 0;          // sum_{k<=N} k p_k
    double mean_gap_tail = 0;     // bound on sum_{k>N} k p_k
    double alpha = 0;             // a_n ~ alpha lambda^{-n}
    /// ||T0^j||_inf <= growth_const * growth_rate^j for the non-maximal part.
    double growth_rate = 0;
    double growth_const = 0;

    double mass() const;
};

RenewalData renewal_quantities(const CodingAutomaton& a, int order = kDefaultRenewalOrder);

/// Everything the measure computations share for one graph.
struct MeasureContext {
    Graph graph;
    CodingAutomaton automaton;
    SpectralData spectral;
    ParryChain chain;
    RenewalData renewal;
};

/// renewal_order = 0 skips the renewal data; the renewal method then throws.
MeasureContext make_context(const Graph& g, std::size_t max_states = kDefaultMaxStates,
                            int renewal_order = kDefaultRenewalOrder);

/// A cylinder event on rungs first .. first + allowed.size() - 1: the rung
/// at each position must be one of the listed alphabet indices.
struct CylinderEvent {
    int first = 0;
    std::vector<std::vector<int>> allowed;
    /// Set when a requested rung is not in the alphabet; such positions
    /// allow nothing and the probability is 0.
    bool outside_alphabet = false;

    int length() const { return static_cast<int>(allowed.size()); }
    int last() const { return first + length() - 1; }
    /// Image under k -> -k.
    CylinderEvent reflected() const;

    static CylinderEvent exact(const RungAlphabet& alpha, int first, const std::vector<RungConfig>& rungs);
    static CylinderEvent any(const RungAlphabet& alpha, int first, int length);
};

/// Parses "k:a,b;c,d;..." where each rung is a comma list of heights, or
/// "*" for an unconstrained rung, and k is the first rung (default 0).
CylinderEvent parse_event(const RungAlphabet& alpha, const std::string& text);
std::string to_string(const RungAlphabet& alpha, const CylinderEvent& e);

enum class MeasureMethod { Renewal, Parry, FiniteDP };
std::string to_string(MeasureMethod m);
MeasureMethod parse_measure_method(const std::string& s);

enum class Side { Left, Right };

struct CylinderOptions {
    /// Window used by the finite method: [-finite_half_width, finite_half_width].
    int finite_half_width = 32;
    /// Stop the renewal series when the remaining tail is below this.
    double series_tol = 1e-17;
};

struct CylinderResult {
    double value = 0;
    double error_bound = 0;
    MeasureMethod method = MeasureMethod::Parry;
    Side side = Side::Left;
    bool outside_alphabet = false;
    /// finite method only: the window used and the exact ratio.
    std::optional<Window> window;
    std::optional<BigInt> numerator;
    std::optional<BigInt> denominator;
};

CylinderResult cylinder_prob(const MeasureContext& ctx, const CylinderEvent& e, MeasureMethod method,
                             Side side = Side::Left, const CylinderOptions& opts = {});

/// Exact uniform-measure probability of E on Omega^L_{n,m} (or Omega^R_{n,m}).
CylinderResult finite_prob(const MeasureContext& ctx, const CylinderEvent& e, Window w, Side side = Side::Left);

nlohmann::json to_json(const CylinderResult& r);

/// Uniform doubles in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng);
/// Uniform integer in [0, bound) by rejection on the bit length of bound.
BigInt uniform_below(std::mt19937_64& rng, const BigInt& bound);

/// Stationary Parry-chain paths of `width` rungs, projected to rungs; the
/// right-burnable measure is sampled by reversing each path.
std::vector<std::vector<RungConfig>> sample_muL_window(const MeasureContext& ctx, int width, int count,
                                                       std::uint64_t seed, Side side = Side::Left);

/// Exactly uniform draws from Omega^L on a window of fixed length, by
/// sequential choice proportional to exact suffix path counts.
class FiniteSampler {
public:
    FiniteSampler(const CodingAutomaton& a, int length);
    std::vector<RungConfig> draw(std::mt19937_64& rng) const;
    const BigInt& total() const { return total_; }
    int length() const { return length_; }

private:
    const CodingAutomaton& a_;
    int length_;
    // suffix_[j][s]: accepted continuations of j more rungs after state s.
    std::vector<std::vector<BigInt>> suffix_;
    BigInt total_;
};

LadderConfig sample_finite_exact(const CodingAutomaton& a, Window w, std::uint64_t seed);

/// Exactly uniform draws from the recurrent configurations on a window:
/// uniform proposals from the sequences whose blocks of `block` adjacent
/// rungs are all recurrent, accepted when the whole window burns.
class RecurrentSampler {
public:
    RecurrentSampler(const Graph& g, int length, int block = 4);
    std::vector<RungConfig> draw(std::mt19937_64& rng);
    std::uint64_t proposals() const { return proposals_; }
    std::uint64_t accepted() const { return accepted_; }
    /// Upper bound on the number of recurrent configurations.
    const BigInt& proposal_space() const { return total_; }

private:
    const Graph& g_;
    int length_;
    int block_;
    std::vector<RungConfig> rungs_;
    // Sequences of block - 1 rung indices and their successors.
    std::vector<std::vector<int>> states_;
    std::vector<std::vector<int>> succ_;
    std::vector<std::vector<BigInt>> suffix_;
    BigInt total_;
    std::uint64_t proposals_ = 0;
    std::uint64_t accepted_ = 0;
};

struct BoundaryLayer {
    int sigma_left = 0;
    int sigma_right = 0;
    int hat_left = 0;
    int hat_right = 0;
    int tau_left = 0;
    int tau_right = 0;
    /// Notes on sentinel values that were used.
    std::vector<std::string> flags;
};

BoundaryLayer boundary_layer(const Graph& g, const LadderConfig& eta);
nlohmann::json to_json(const BoundaryLayer& b);

enum class MixtureMode { Enumerate, Sample };
MixtureMode parse_mixture_mode(const std::string& s);

struct MixtureOptions {
    MixtureMode mode = MixtureMode::Enumerate;
    std::uint64_t max_configs = 10'000'000;
    int samples = 10'000;
    std::uint64_t seed = 1;
    int block = 5;  // proposal block length for the recurrent sampler
};

struct MixtureRow {
    Window window;
    std::uint64_t configurations = 0;  // enumerated or sampled
    double finite = 0;                 // mu_{n,m}(E)
    double finite_error = 0;           // 0 when enumerated, binomial sigma when sampled
    double left = 0;                   // mu^L(E)
    double right = 0;                  // mu^R(E)
    double weight = 0;                 // -n/(m-n)
    double predicted = 0;              // weight mu^L + (1 - weight) mu^R
    double gap = 0;                    // |finite - predicted|
    double gap_swapped = 0;            // same with the weight m/(m-n) on mu^L
};

/// Compares the finite-volume uniform recurrent measure of E with mixtures
/// of the one-sided measures. The event is given in absolute rung positions.
std::vector<MixtureRow> mixture_experiment(const MeasureContext& ctx, const std::vector<Window>& windows,
                                           const CylinderEvent& e, const MixtureOptions& opts = {});

/// Largest gap over every exact event on rungs [first, first + length):
/// the sup distance between the marginals of the finite measure and the
/// predicted mixture. Enumerate mode only.
std::vector<MixtureRow> mixture_marginal_gap(const MeasureContext& ctx, const std::vector<Window>& windows,
                                             int first, int length, const MixtureOptions& opts = {});

nlohmann::json to_json(const MixtureRow& r);

} // namespace ladder

#endif
