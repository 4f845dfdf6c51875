#include "ladder/census.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

#include "ladder/burning.hpp"
#include "ladder/coding.hpp"
#include "ladder/errors.hpp"

namespace ladder {

std::optional<int> RungAlphabet::find(const RungConfig& c) const {
    auto it = index.find(c);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

namespace {

constexpr double kMaxRawVectors = 5e7;

double raw_vector_count(const Graph& g) {
    double total = 1;
    for (int x = 0; x < g.size(); ++x) total *= g.max_height(x);
    return total;
}

// Every stable height vector on one rung, in odometer order (vertex 0 fastest).
std::vector<RungConfig> stable_rungs(const Graph& g) {
    if (raw_vector_count(g) > kMaxRawVectors) {
        throw FeasibilityError("rung enumeration needs " + std::to_string(raw_vector_count(g)) +
                               " height vectors; limit is " + std::to_string(kMaxRawVectors));
    }
    std::vector<RungConfig> out;
    RungConfig c(g.size(), 1);
    for (;;) {
        out.push_back(c);
        int x = 0;
        while (x < g.size() && c[x] == g.max_height(x)) c[x++] = 1;
        if (x == g.size()) break;
        ++c[x];
    }
    return out;
}

} // namespace

RungAlphabet enum_rungs(const Graph& g) {
    RungAlphabet a;
    for (auto& c : stable_rungs(g)) {
        if (in_rung_alphabet(g, c)) a.rungs.push_back(std::move(c));
    }
    std::sort(a.rungs.begin(), a.rungs.end(), [](const RungConfig& p, const RungConfig& q) {
        int sp = std::accumulate(p.begin(), p.end(), 0);
        int sq = std::accumulate(q.begin(), q.end(), 0);
        if (sp != sq) return sp > sq;
        return p > q;
    });
    for (int i = 0; i < a.size(); ++i) a.index[a.rungs[i]] = i;
    return a;
}

std::string to_string(Variant v) {
    switch (v) {
    case Variant::L: return "L";
    case Variant::L0: return "L0";
    case Variant::S: return "S";
    case Variant::S0: return "S0";
    case Variant::REC: return "REC";
    }
    return "?";
}

Variant parse_variant(const std::string& s) {
    for (auto v : {Variant::L, Variant::L0, Variant::S, Variant::S0, Variant::REC}) {
        if (s == to_string(v)) return v;
    }
    throw ValidationError("variant must be one of L, L0, S, S0, REC");
}

std::string to_string(CountMethod m) { return m == CountMethod::Brute ? "brute" : "automaton"; }

CountMethod parse_method(const std::string& s) {
    if (s == "brute") return CountMethod::Brute;
    if (s == "automaton") return CountMethod::Automaton;
    throw ValidationError("method must be brute or automaton");
}

namespace {

// Depth-first search over rung sequences. A prefix that fails the variant's
// burning test is dropped with its whole subtree: every burning notion used
// here is closed under restriction to a sub-window.
class Search {
public:
    Search(const Graph& g, Variant v, int n_max, const CensusOptions& opts, std::atomic<std::uint64_t>& examined)
        : g_(g), variant_(v), n_max_(n_max), opts_(opts), examined_(examined) {
        if (v == Variant::REC) {
            symbols_ = stable_rungs(g);
        } else {
            auto a = enum_rungs(g);
            symbols_ = a.rungs;
            if (v == Variant::L0 || v == Variant::S0) symbols_.erase(symbols_.begin());
        }
        heights_.resize(static_cast<std::size_t>(n_max) * g.size());
        counts_.assign(n_max, 0);
    }

    int num_symbols() const { return static_cast<int>(symbols_.size()); }
    const RungConfig& symbol(int i) const { return symbols_[i]; }

    // Explores only the first-rung symbols first, first + stride, first + 2 stride, ...
    void run(int first, int stride, const std::function<void(int depth)>* leaf = nullptr) {
        leaf_ = leaf;
        for (int s = first; s < num_symbols(); s += stride) extend(0, s);
    }

    const std::vector<std::uint64_t>& counts() const { return counts_; }
    const std::vector<int>& path() const { return path_; }

private:
    bool accept(int rungs) const {
        std::span<const int> h(heights_.data(), static_cast<std::size_t>(rungs) * g_.size());
        switch (variant_) {
        case Variant::L:
        case Variant::L0: return window_burns(g_, h, rungs, BurnSide::Left);
        case Variant::S:
        case Variant::S0:
            return window_burns(g_, h, rungs, BurnSide::Left) && window_burns(g_, h, rungs, BurnSide::Right);
        case Variant::REC: return window_burns(g_, h, rungs, BurnSide::Full);
        }
        return false;
    }

    void extend(int depth, int s) {
        if (examined_.fetch_add(1, std::memory_order_relaxed) >= opts_.max_enum) {
            throw FeasibilityError("census search exceeded --max-enum = " + std::to_string(opts_.max_enum) +
                                   " candidate extensions");
        }
        std::copy(symbols_[s].begin(), symbols_[s].end(), heights_.begin() + static_cast<std::ptrdiff_t>(depth) * g_.size());
        if (!accept(depth + 1)) return;
        ++counts_[depth];
        path_.push_back(s);
        if (leaf_ && depth + 1 == n_max_) (*leaf_)(depth + 1);
        if (depth + 1 < n_max_) {
            for (int t = 0; t < num_symbols(); ++t) extend(depth + 1, t);
        }
        path_.pop_back();
    }

    const Graph& g_;
    Variant variant_;
    int n_max_;
    const CensusOptions& opts_;
    std::atomic<std::uint64_t>& examined_;
    std::vector<RungConfig> symbols_;
    std::vector<int> heights_;
    std::vector<std::uint64_t> counts_;
    std::vector<int> path_;
    const std::function<void(int)>* leaf_ = nullptr;
};

CountSeries brute_series(const Graph& g, Variant v, int n_max, const CensusOptions& opts) {
    std::atomic<std::uint64_t> examined{0};
    int threads = std::max(1, opts.threads);
    std::vector<std::vector<std::uint64_t>> partial(threads);
    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](int t) {
        try {
            Search s(g, v, n_max, opts, examined);
            s.run(t, threads);
            partial[t] = s.counts();
        } catch (...) {
            errors[t] = std::current_exception();
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    CountSeries out{v, CountMethod::Brute, std::vector<BigInt>(n_max, 0)};
    for (const auto& p : partial) {
        for (int n = 0; n < n_max; ++n) out.values[n] += p[n];
    }
    return out;
}

} // namespace

CountSeries count_series(const Graph& g, Variant variant, int n_max, CountMethod method, const CensusOptions& opts) {
    if (n_max < 1) throw ValidationError("n must be at least 1");
    if (method == CountMethod::Brute) return brute_series(g, variant, n_max, opts);
    if (variant != Variant::L && variant != Variant::L0) {
        throw ValidationError("automaton counting exists only for variants L and L0");
    }
    auto a = build_coding(g, opts.max_states);
    CountSeries out{variant, CountMethod::Automaton, {}};
    out.values = variant == Variant::L ? path_counts(a, n_max) : path_counts(restrict_non_max(a), n_max);
    return out;
}

void enumerate_configs(const Graph& g, Variant variant, int n,
                       const std::function<void(const std::vector<RungConfig>&)>& visit, const CensusOptions& opts) {
    if (n < 1) throw ValidationError("n must be at least 1");
    std::atomic<std::uint64_t> examined{0};
    Search s(g, variant, n, opts, examined);
    std::vector<RungConfig> word(n);
    std::function<void(int)> leaf = [&](int) {
        for (int k = 0; k < n; ++k) word[k] = s.symbol(s.path()[k]);
        visit(word);
    };
    s.run(0, 1, &leaf);
}

bool renewal_identity_check(const CountSeries& a, const CountSeries& b, int n_max) {
    if (a.n_max() < n_max || b.n_max() < n_max) throw ValidationError("series shorter than n_max");
    auto A = [&](int n) -> BigInt { return n == 0 ? BigInt(1) : a.at(n); };
    auto B = [&](int n) -> BigInt { return n == 0 ? BigInt(1) : b.at(n); };
    for (int n = 1; n <= n_max; ++n) {
        BigInt rhs = B(n);
        for (int k = 1; k <= n; ++k) rhs += B(k - 1) * A(n - k);
        if (rhs != A(n)) return false;
    }
    return true;
}

double log_big(const BigInt& v) {
    if (v <= 0) throw ValidationError("log of a non-positive count");
    auto bits = boost::multiprecision::msb(v);
    if (bits < 900) return std::log(v.convert_to<double>());
    auto shift = bits - 900;
    BigInt top = v >> shift;
    return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

EntropyTable entropy_bounds(const CountSeries& s, std::optional<double> exact_log_rho) {
    if (s.values.empty()) throw ValidationError("empty series");
    EntropyTable t;
    bool splice = s.variant == Variant::L || s.variant == Variant::S || s.variant == Variant::REC;
    double best = INFINITY;
    for (int n = 1; n <= s.n_max(); ++n) {
        double l = log_big(s.at(n));
        t.per_rung.push_back(l / n);
        best = std::min(best, l / n);
        t.upper.push_back(best);
        if (splice) t.lower.push_back(l / (n + 1));
    }
    if (exact_log_rho) {
        t.limit_estimate = *exact_log_rho;
        t.limit_source = "automaton";
    } else if (s.n_max() >= 2) {
        t.limit_estimate = log_big(s.at(s.n_max())) - log_big(s.at(s.n_max() - 1));
        t.limit_source = "ratio";
    } else {
        t.limit_estimate = t.per_rung.back();
        t.limit_source = "single term";
    }
    return t;
}

nlohmann::json to_json(const EntropyTable& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < t.per_rung.size(); ++i) {
        nlohmann::json r{{"n", i + 1}, {"log_count_per_rung", t.per_rung[i]}, {"upper", t.upper[i]}};
        if (!t.lower.empty()) r["lower"] = t.lower[i];
        rows.push_back(r);
    }
    return {{"rows", rows}, {"limit_estimate", t.limit_estimate}, {"limit_source", t.limit_source}};
}

std::string to_csv(const CountSeries& s) {
    std::ostringstream out;
    out << "variant,n,count\n";
    for (int n = 1; n <= s.n_max(); ++n) out << to_string(s.variant) << ',' << n << ',' << s.at(n) << '\n';
    return out.str();
}

} // namespace ladder
