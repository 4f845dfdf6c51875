#include "ladder/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "ladder/burning.hpp"
#include "ladder/census.hpp"
#include "ladder/errors.hpp"

namespace ladder {

namespace {

constexpr int kGrowthPower = 64;
constexpr int kMaxSeriesTerms = 1'000'000;

// Log of z * sum_{n <= upto} b_n z^n, summed stably in log space.
double log_partial(const std::vector<double>& log_b, int upto, double log_z) {
    double top = -INFINITY;
    for (int n = 0; n <= upto; ++n) top = std::max(top, log_b[n] + (n + 1) * log_z);
    double acc = 0;
    for (int n = 0; n <= upto; ++n) acc += std::exp(log_b[n] + (n + 1) * log_z - top);
    return top + std::log(acc);
}

// Bisection for the increasing function f on (0, 1] with f < 0 near 0.
template <typename F>
double bisect(F f) {
    double lo = 0, hi = 1;
    for (int it = 0; it < 200 && hi - lo > 0; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (f(mid) < 0 ? lo : hi) = mid;
    }
    return hi;
}

} // namespace

double RenewalData::mass() const {
    double s = 0;
    for (double x : p) s += x;
    return s;
}

RenewalData renewal_quantities(const CodingAutomaton& a, int order) {
    if (order < 4) throw ValidationError("renewal order N must be at least 4");
    RenewalData r;
    r.order = order;
    r.log_b.assign(order + 1, -INFINITY);
    r.log_b[0] = 0;

    std::optional<CodingAutomaton> rest;
    if (a.alphabet.size() > 1) rest = restrict_non_max(a);
    if (rest) {
        auto b = path_counts(*rest, order);
        for (int n = 1; n <= order; ++n) {
            if (b[n - 1] > 0) r.log_b[n] = log_big(b[n - 1]);
        }
        // Row sums of powers of the non-maximal transition matrix.
        const int n = rest->size();
        std::vector<double> c(n, 1.0), d(n);
        std::vector<double> norms{1.0};
        for (int i = 1; i <= kGrowthPower; ++i) {
            for (int s = 0; s < n; ++s) {
                double acc = 0;
                for (int t : rest->next[s]) {
                    if (t >= 0) acc += c[t];
                }
                d[s] = acc;
            }
            c.swap(d);
            norms.push_back(*std::max_element(c.begin(), c.end()));
        }
        // Slack for rounding in the double-precision row sums.
        const double slack = 1 + 1e-12;
        r.growth_rate = norms.back() > 0 ? std::pow(norms.back(), 1.0 / kGrowthPower) * slack : 0;
        r.growth_const = 1;
        for (int i = 0; i < kGrowthPower && r.growth_rate > 0; ++i) {
            r.growth_const = std::max(r.growth_const, norms[i] / std::pow(r.growth_rate, i) * slack);
        }
    }

    const int N = order;
    auto truncated = [&](double z) { return std::exp(log_partial(r.log_b, N - 1, std::log(z))) - 1; };
    r.lambda = bisect(truncated);

    // sum_{n >= N} z^{n+1} b_n <= b_N z^{N+1} K / (1 - z r).
    auto tail = [&](double z) -> double {
        if (r.log_b[N] == -INFINITY) return 0.0;
        const double zr = z * r.growth_rate;
        if (zr >= 1) return INFINITY;
        return std::exp(r.log_b[N] + (N + 1) * std::log(z)) * r.growth_const / (1 - zr);
    };
    if (!std::isfinite(tail(r.lambda))) {
        throw FeasibilityError("renewal tail bound does not converge at N = " + std::to_string(N) +
                               "; increase the renewal order");
    }
    r.lambda_lower = bisect([&](double z) { return truncated(z) + std::min(tail(z), 1.0); });
    r.tail_bound = tail(r.lambda);
    if (r.lambda - r.lambda_lower > 1e-10 || r.tail_bound > 1e-9) {
        throw FeasibilityError("renewal tail bound " + std::to_string(r.tail_bound) + " is too weak at N = " +
                               std::to_string(N) + "; increase the renewal order");
    }

    const double log_l = std::log(r.lambda);
    for (int k = 1; k <= N; ++k) {
        double pk = r.log_b[k - 1] == -INFINITY ? 0.0 : std::exp(k * log_l + r.log_b[k - 1]);
        r.p.push_back(pk);
        r.mean_gap += k * pk;
    }
    if (r.log_b[N] != -INFINITY) {
        const double x = r.lambda * r.growth_rate;
        r.mean_gap_tail = std::exp(r.log_b[N] + (N + 1) * log_l) * r.growth_const *
                          ((N + 1) / (1 - x) + x / ((1 - x) * (1 - x)));
    }
    r.alpha = 1 / (r.lambda * r.mean_gap);
    return r;
}

MeasureContext make_context(const Graph& g, std::size_t max_states, int renewal_order) {
    MeasureContext c{g, build_coding(g, max_states), {}, {}, {}};
    c.spectral = spectral(c.automaton);
    c.chain = parry_chain(c.automaton, c.spectral);
    if (renewal_order > 0) c.renewal = renewal_quantities(c.automaton, renewal_order);
    return c;
}

// ---------------------------------------------------------------------------
// Events

CylinderEvent CylinderEvent::reflected() const {
    CylinderEvent r = *this;
    r.first = -last();
    std::reverse(r.allowed.begin(), r.allowed.end());
    return r;
}

CylinderEvent CylinderEvent::exact(const RungAlphabet& alpha, int first, const std::vector<RungConfig>& rungs) {
    CylinderEvent e;
    e.first = first;
    for (const auto& c : rungs) {
        auto i = alpha.find(c);
        e.allowed.push_back(i ? std::vector<int>{*i} : std::vector<int>{});
        e.outside_alphabet = e.outside_alphabet || !i;
    }
    return e;
}

CylinderEvent CylinderEvent::any(const RungAlphabet& alpha, int first, int length) {
    CylinderEvent e;
    e.first = first;
    std::vector<int> all(alpha.size());
    for (int i = 0; i < alpha.size(); ++i) all[i] = i;
    e.allowed.assign(length, all);
    return e;
}

CylinderEvent parse_event(const RungAlphabet& alpha, const std::string& text) {
    std::string body = text;
    int first = 0;
    if (auto colon = text.find(':'); colon != std::string::npos) {
        try {
            std::size_t used = 0;
            first = std::stoi(text.substr(0, colon), &used);
            if (used != colon) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ValidationError("bad first rung in event '" + text + "'");
        }
        body = text.substr(colon + 1);
    }
    CylinderEvent e = CylinderEvent::any(alpha, first, 0);
    std::vector<int> all(alpha.size());
    for (int i = 0; i < alpha.size(); ++i) all[i] = i;
    std::string item;
    std::stringstream in(body);
    while (std::getline(in, item, '/')) {
        std::stringstream parts(item);
        std::string piece;
        while (std::getline(parts, piece, ';')) {
            if (piece == "*") {
                e.allowed.push_back(all);
                continue;
            }
            RungConfig c;
            std::stringstream hs(piece);
            std::string h;
            while (std::getline(hs, h, ',')) {
                try {
                    c.push_back(std::stoi(h));
                } catch (const std::exception&) {
                    throw ValidationError("bad height '" + h + "' in event '" + text + "'");
                }
            }
            auto i = alpha.find(c);
            e.allowed.push_back(i ? std::vector<int>{*i} : std::vector<int>{});
            e.outside_alphabet = e.outside_alphabet || !i;
            if (!alpha.rungs.empty() && c.size() != alpha[0].size()) {
                throw ValidationError("event rung '" + piece + "' has the wrong number of vertices");
            }
        }
    }
    if (e.allowed.empty()) throw ValidationError("event '" + text + "' has no rungs");
    return e;
}

std::string to_string(const RungAlphabet& alpha, const CylinderEvent& e) {
    auto rung = [&](int i) {
        std::string s;
        for (std::size_t x = 0; x < alpha[i].size(); ++x) s += (x ? "," : "") + std::to_string(alpha[i][x]);
        return s;
    };
    std::string out = std::to_string(e.first) + ":";
    for (int p = 0; p < e.length(); ++p) {
        if (p) out += "/";
        const auto& set = e.allowed[p];
        if (static_cast<int>(set.size()) == alpha.size()) {
            out += "*";
        } else if (set.size() == 1) {
            out += rung(set[0]);
        } else {
            out += "[";
            for (std::size_t j = 0; j < set.size(); ++j) out += (j ? "|" : "") + rung(set[j]);
            out += "]";
        }
    }
    return out;
}

std::string to_string(MeasureMethod m) {
    switch (m) {
    case MeasureMethod::Renewal: return "renewal";
    case MeasureMethod::Parry: return "parry";
    case MeasureMethod::FiniteDP: return "finite_dp";
    }
    return "?";
}

MeasureMethod parse_measure_method(const std::string& s) {
    for (auto m : {MeasureMethod::Renewal, MeasureMethod::Parry, MeasureMethod::FiniteDP}) {
        if (s == to_string(m)) return m;
    }
    throw ValidationError("method must be renewal, parry or finite_dp");
}

// ---------------------------------------------------------------------------
// Cylinder probabilities

namespace {

std::vector<std::vector<char>> allowed_masks(const CodingAutomaton& a, const CylinderEvent& e) {
    std::vector<std::vector<char>> m(e.length(), std::vector<char>(a.alphabet.size(), 0));
    for (int p = 0; p < e.length(); ++p) {
        for (int c : e.allowed[p]) {
            if (c < 0 || c >= a.alphabet.size()) throw ValidationError("event rung index out of range");
            m[p][c] = 1;
        }
    }
    return m;
}

struct RenewalValue {
    double value = 0;
    double truncation = 0;
};

// mu^L(E) = alpha lambda^2 sum over fillings xi between the last renewal
// before the event and the first renewal after it, weight lambda^{|xi|}.
RenewalValue renewal_cylinder(const CodingAutomaton& a, const std::vector<std::vector<char>>& mask, double lambda,
                              double alpha, const RenewalData& rd, double tol) {
    const int n = a.size();
    const int len = static_cast<int>(mask.size());
    const double x = lambda * rd.growth_rate;
    const double geo = x < 1 ? rd.growth_const * x / (1 - x) : INFINITY;

    // Y = sum_{i >= 1} y_i, y_i = lambda^i (non-maximal prefix paths of length i).
    std::vector<double> y(n, 0), Y(n, 0), next(n);
    for (int c = 0; c < a.alphabet.size(); ++c) {
        if (c != RungAlphabet::max_index() && a.inclusion[c] >= 0) y[a.inclusion[c]] += lambda;
    }
    double tail_y = 0;
    for (int it = 0;; ++it) {
        double l1 = 0;
        for (int s = 0; s < n; ++s) {
            Y[s] += y[s];
            l1 += y[s];
        }
        if (l1 == 0) break;
        if (l1 * geo < tol) {
            tail_y = l1 * geo;
            break;
        }
        if (it > kMaxSeriesTerms) throw InternalError("renewal prefix series did not converge");
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < n; ++s) {
            if (y[s] == 0) continue;
            for (int c = 0; c < a.alphabet.size(); ++c) {
                int t = a.next[s][c];
                if (t >= 0 && c != RungAlphabet::max_index()) next[t] += lambda * y[s];
            }
        }
        y.swap(next);
    }

    // H(s) = sum_{j >= 0} lambda^j (non-maximal continuations of length j from s).
    std::vector<double> w(n, 1.0), H(n, 0);
    double tail_h = 0;
    for (int it = 0;; ++it) {
        double top = 0;
        for (int s = 0; s < n; ++s) {
            H[s] += w[s];
            top = std::max(top, w[s]);
        }
        if (top == 0) break;
        if (top * geo < tol) {
            tail_h = top * geo;
            break;
        }
        if (it > kMaxSeriesTerms) throw InternalError("renewal suffix series did not converge");
        for (int s = 0; s < n; ++s) {
            double acc = 0;
            for (int c = 0; c < a.alphabet.size(); ++c) {
                int t = a.next[s][c];
                if (t >= 0 && c != RungAlphabet::max_index()) acc += w[t];
            }
            next[s] = lambda * acc;
        }
        w.swap(next);
    }

    // Entering weights on the first event rung, then through the event.
    std::vector<double> z(n, 0);
    for (int c = 0; c < a.alphabet.size(); ++c) {
        if (mask[0][c] && a.inclusion[c] >= 0) z[a.inclusion[c]] += lambda;
    }
    for (int s = 0; s < n; ++s) {
        if (Y[s] == 0) continue;
        for (int c = 0; c < a.alphabet.size(); ++c) {
            int t = a.next[s][c];
            if (t >= 0 && mask[0][c]) z[t] += lambda * Y[s];
        }
    }
    for (int p = 1; p < len; ++p) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < n; ++s) {
            if (z[s] == 0) continue;
            for (int c = 0; c < a.alphabet.size(); ++c) {
                int t = a.next[s][c];
                if (t >= 0 && mask[p][c]) next[t] += lambda * z[s];
            }
        }
        z.swap(next);
    }
    double total = 0, z_mass = 0;
    for (int s = 0; s < n; ++s) {
        total += z[s] * H[s];
        z_mass += z[s];
    }

    // Truncation of Y costs at most tail_y times the largest continuation
    // weight from a prefix state; bound that weight by a backward pass.
    std::vector<double> back(n);
    for (int s = 0; s < n; ++s) back[s] = H[s] + tail_h;
    for (int p = len - 1; p >= 1; --p) {
        for (int s = 0; s < n; ++s) {
            double acc = 0;
            for (int c = 0; c < a.alphabet.size(); ++c) {
                int t = a.next[s][c];
                if (t >= 0 && mask[p][c]) acc += lambda * back[t];
            }
            next[s] = acc;
        }
        back.swap(next);
    }
    double entry = 0;
    for (int s = 0; s < n; ++s) {
        double acc = 0;
        for (int c = 0; c < a.alphabet.size(); ++c) {
            int t = a.next[s][c];
            if (t >= 0 && mask[0][c]) acc += lambda * back[t];
        }
        entry = std::max(entry, acc);
    }
    const double scale = alpha * lambda * lambda;
    return {scale * total, scale * (tail_y * entry + z_mass * tail_h)};
}

double alpha_at(const RenewalData& rd, double lambda) {
    double mean = 0;
    for (int k = 1; k <= rd.order; ++k) {
        if (rd.log_b[k - 1] != -INFINITY) mean += k * std::exp(k * std::log(lambda) + rd.log_b[k - 1]);
    }
    return 1 / (lambda * mean);
}

double parry_cylinder(const MeasureContext& ctx, const std::vector<std::vector<char>>& mask) {
    const auto& a = ctx.automaton;
    const int n = a.size();
    std::vector<double> w(n, 0), next(n);
    for (int s = 0; s < n; ++s) {
        if (mask[0][a.states[s].rung]) w[s] = ctx.chain.pi[s];
    }
    for (std::size_t p = 1; p < mask.size(); ++p) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < n; ++s) {
            if (w[s] == 0) continue;
            for (auto [t, q] : ctx.chain.p[s]) {
                if (mask[p][a.states[t].rung]) next[t] += w[s] * q;
            }
        }
        w.swap(next);
    }
    double total = 0;
    for (double v : w) total += v;
    return total;
}

double ratio_to_double(const BigInt& num, const BigInt& den) {
    if (den == 0) throw InternalError("empty finite window");
    if (num == 0) return 0;
    // Keep 64 significant bits of the quotient before converting.
    auto shift = std::max<long>(0, 64 + static_cast<long>(boost::multiprecision::msb(den)) -
                                       static_cast<long>(boost::multiprecision::msb(num)));
    BigInt q = (num << shift) / den;
    return std::ldexp(q.convert_to<double>(), -static_cast<int>(shift));
}

} // namespace

CylinderResult finite_prob(const MeasureContext& ctx, const CylinderEvent& e_in, Window w_in, Side side) {
    CylinderEvent e = side == Side::Left ? e_in : e_in.reflected();
    Window w = side == Side::Left ? w_in : Window(-w_in.last, -w_in.first);
    if (e.first < w.first || e.last() > w.last) throw ValidationError("event lies outside the finite window");
    const auto& a = ctx.automaton;
    const int n = a.size();
    auto mask = allowed_masks(a, e);
    auto count = [&](bool constrained) {
        std::vector<BigInt> f(n, 0), next(n);
        for (int k = w.first; k <= w.last; ++k) {
            int p = k - e.first;
            bool fixed = constrained && p >= 0 && p < e.length();
            std::fill(next.begin(), next.end(), BigInt(0));
            if (k == w.first) {
                for (int c = 0; c < a.alphabet.size(); ++c) {
                    if (a.inclusion[c] >= 0 && (!fixed || mask[p][c])) next[a.inclusion[c]] += 1;
                }
            } else {
                for (int s = 0; s < n; ++s) {
                    if (f[s] == 0) continue;
                    for (int c = 0; c < a.alphabet.size(); ++c) {
                        int t = a.next[s][c];
                        if (t >= 0 && (!fixed || mask[p][c])) next[t] += f[s];
                    }
                }
            }
            f.swap(next);
        }
        BigInt total = 0;
        for (const auto& v : f) total += v;
        return total;
    };
    CylinderResult r;
    r.method = MeasureMethod::FiniteDP;
    r.side = side;
    r.outside_alphabet = e.outside_alphabet;
    r.window = w_in;
    r.numerator = count(true);
    r.denominator = count(false);
    r.value = ratio_to_double(*r.numerator, *r.denominator);
    r.error_bound = std::numeric_limits<double>::epsilon();
    return r;
}

CylinderResult cylinder_prob(const MeasureContext& ctx, const CylinderEvent& e_in, MeasureMethod method, Side side,
                             const CylinderOptions& opts) {
    if (e_in.length() < 1) throw ValidationError("event has no rungs");
    if (method == MeasureMethod::FiniteDP) {
        const int h = opts.finite_half_width;
        Window w(std::min(-h, e_in.first), std::max(h, e_in.last()));
        return finite_prob(ctx, e_in, w, side);
    }
    CylinderEvent e = side == Side::Left ? e_in : e_in.reflected();
    auto mask = allowed_masks(ctx.automaton, e);
    CylinderResult r;
    r.method = method;
    r.side = side;
    r.outside_alphabet = e.outside_alphabet;
    if (method == MeasureMethod::Parry) {
        r.value = parry_cylinder(ctx, mask);
        const auto& s = ctx.spectral;
        double vmin = *std::min_element(s.right.begin(), s.right.end());
        double umin = *std::min_element(s.left.begin(), s.left.end());
        r.error_bound = (e.length() + 1) * (s.right_residual / vmin + s.left_residual / umin) +
                        e.length() * 8 * std::numeric_limits<double>::epsilon();
        return r;
    }
    const auto& rd = ctx.renewal;
    if (rd.order == 0) throw FeasibilityError("renewal data was not computed for this context");
    auto main = renewal_cylinder(ctx.automaton, mask, rd.lambda, rd.alpha, rd, opts.series_tol);
    auto low = renewal_cylinder(ctx.automaton, mask, rd.lambda_lower, alpha_at(rd, rd.lambda_lower), rd,
                                opts.series_tol);
    r.value = main.value;
    r.error_bound = main.truncation + std::abs(main.value - low.value) + low.truncation +
                    e.length() * 16 * std::numeric_limits<double>::epsilon();
    return r;
}

nlohmann::json to_json(const CylinderResult& r) {
    nlohmann::json j{{"method", to_string(r.method)},
                     {"side", r.side == Side::Left ? "L" : "R"},
                     {"value", r.value},
                     {"error_bound", r.error_bound},
                     {"outside_alphabet", r.outside_alphabet}};
    if (r.window) j["window"] = {r.window->first, r.window->last};
    if (r.numerator) j["numerator"] = r.numerator->str();
    if (r.denominator) j["denominator"] = r.denominator->str();
    return j;
}

// ---------------------------------------------------------------------------
// Samplers

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

BigInt uniform_below(std::mt19937_64& rng, const BigInt& bound) {
    if (bound <= 0) throw ValidationError("uniform_below needs a positive bound");
    const unsigned bits = boost::multiprecision::msb(bound) + 1;
    for (;;) {
        BigInt v = 0;
        unsigned have = 0;
        while (have < bits) {
            v = (v << 64) | BigInt(rng());
            have += 64;
        }
        v >>= have - bits;
        if (v < bound) return v;
    }
}

namespace {

int draw_index(std::mt19937_64& rng, const std::vector<double>& weights) {
    double u = uniform01(rng);
    double acc = 0;
    int last = -1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0) continue;
        acc += weights[i];
        last = static_cast<int>(i);
        if (u < acc) return last;
    }
    if (last < 0) throw InternalError("no positive weight to sample from");
    return last;  // rounding left u just above the total
}

} // namespace

std::vector<std::vector<RungConfig>> sample_muL_window(const MeasureContext& ctx, int width, int count,
                                                       std::uint64_t seed, Side side) {
    if (width < 1 || count < 0) throw ValidationError("sample width must be positive and count non-negative");
    const auto& a = ctx.automaton;
    std::mt19937_64 rng(seed);
    std::vector<std::vector<RungConfig>> out;
    out.reserve(count);
    std::vector<double> probs;
    for (int i = 0; i < count; ++i) {
        int s = draw_index(rng, ctx.chain.pi);
        std::vector<RungConfig> path{a.rung_of(s)};
        for (int k = 1; k < width; ++k) {
            const auto& row = ctx.chain.p[s];
            probs.clear();
            for (auto [t, q] : row) probs.push_back(q);
            s = row[draw_index(rng, probs)].first;
            path.push_back(a.rung_of(s));
        }
        if (side == Side::Right) std::reverse(path.begin(), path.end());
        out.push_back(std::move(path));
    }
    return out;
}

FiniteSampler::FiniteSampler(const CodingAutomaton& a, int length) : a_(a), length_(length) {
    if (length < 1) throw ValidationError("window must have at least one rung");
    suffix_.assign(length, std::vector<BigInt>(a.size(), 0));
    for (int s = 0; s < a.size(); ++s) suffix_[0][s] = 1;
    for (int j = 1; j < length; ++j) {
        for (int s = 0; s < a.size(); ++s) {
            BigInt acc = 0;
            for (int t : a.next[s]) {
                if (t >= 0) acc += suffix_[j - 1][t];
            }
            suffix_[j][s] = acc;
        }
    }
    for (int s : a.inclusion) {
        if (s >= 0) total_ += suffix_[length - 1][s];
    }
    if (total_ == 0) throw ValidationError("no left-burnable configuration of this length");
}

std::vector<RungConfig> FiniteSampler::draw(std::mt19937_64& rng) const {
    BigInt r = uniform_below(rng, total_);
    int s = -1;
    for (int c = 0; c < a_.alphabet.size(); ++c) {
        int t = a_.inclusion[c];
        if (t < 0) continue;
        if (r < suffix_[length_ - 1][t]) {
            s = t;
            break;
        }
        r -= suffix_[length_ - 1][t];
    }
    std::vector<RungConfig> out{a_.rung_of(s)};
    for (int k = 1; k < length_; ++k) {
        const auto& weights = suffix_[length_ - 1 - k];
        int chosen = -1;
        for (int t : a_.next[s]) {
            if (t < 0) continue;
            if (r < weights[t]) {
                chosen = t;
                break;
            }
            r -= weights[t];
        }
        if (chosen < 0) throw InternalError("suffix counts are inconsistent");
        s = chosen;
        out.push_back(a_.rung_of(s));
    }
    return out;
}

LadderConfig sample_finite_exact(const CodingAutomaton& a, Window w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    FiniteSampler sampler(a, w.num_rungs());
    return LadderConfig::from_rungs(w.first, sampler.draw(rng));
}

namespace {

bool recurrent_block(const Graph& g, const std::vector<RungConfig>& rungs, const std::vector<int>& idx) {
    std::vector<int> h;
    for (int i : idx) h.insert(h.end(), rungs[i].begin(), rungs[i].end());
    return window_burns(g, h, static_cast<int>(idx.size()), BurnSide::Full);
}

constexpr std::uint64_t kMaxProposals = 100'000'000;

} // namespace

RecurrentSampler::RecurrentSampler(const Graph& g, int length, int block) : g_(g), length_(length) {
    if (length < 1) throw ValidationError("window must have at least one rung");
    if (block < 1) throw ValidationError("block length must be positive");
    block_ = std::min(block, length);
    // Single recurrent rungs, in odometer order.
    RungConfig c(g.size(), 1);
    for (;;) {
        if (recurrent_block(g, {c}, {0})) rungs_.push_back(c);
        int x = 0;
        while (x < g.size() && c[x] == g.max_height(x)) c[x++] = 1;
        if (x == g.size()) break;
        ++c[x];
    }
    // States are recurrent windows of block - 1 rungs (or single rungs when block = 1).
    const int span = std::max(1, block_ - 1);
    states_.clear();
    for (int i = 0; i < static_cast<int>(rungs_.size()); ++i) states_.push_back({i});
    for (int j = 1; j < span; ++j) {
        std::vector<std::vector<int>> grown;
        for (const auto& s : states_) {
            for (int i = 0; i < static_cast<int>(rungs_.size()); ++i) {
                auto t = s;
                t.push_back(i);
                if (recurrent_block(g, rungs_, t)) grown.push_back(std::move(t));
            }
        }
        states_ = std::move(grown);
    }
    std::map<std::vector<int>, int> id;
    for (int s = 0; s < static_cast<int>(states_.size()); ++s) id[states_[s]] = s;
    succ_.assign(states_.size(), {});
    for (int s = 0; s < static_cast<int>(states_.size()); ++s) {
        for (int i = 0; i < static_cast<int>(rungs_.size()); ++i) {
            auto w = states_[s];
            w.push_back(i);
            if (block_ == 1) {
                succ_[s].push_back(i);
                continue;
            }
            if (!recurrent_block(g, rungs_, w)) continue;
            w.erase(w.begin());
            succ_[s].push_back(id.at(w));
        }
    }
    const int steps = length_ - span;
    suffix_.assign(steps + 1, std::vector<BigInt>(states_.size(), 0));
    for (auto& v : suffix_[0]) v = 1;
    for (int j = 1; j <= steps; ++j) {
        for (std::size_t s = 0; s < states_.size(); ++s) {
            BigInt acc = 0;
            for (int t : succ_[s]) acc += suffix_[j - 1][t];
            suffix_[j][s] = acc;
        }
    }
    for (const auto& v : suffix_[steps]) total_ += v;
    if (total_ == 0) throw ValidationError("no recurrent configuration of this length");
}

std::vector<RungConfig> RecurrentSampler::draw(std::mt19937_64& rng) {
    const int span = std::max(1, block_ - 1);
    const int steps = length_ - span;
    std::vector<int> heights;
    for (;;) {
        if (++proposals_ > kMaxProposals) {
            throw FeasibilityError("recurrent rejection sampler exceeded " + std::to_string(kMaxProposals) +
                                   " proposals");
        }
        BigInt r = uniform_below(rng, total_);
        int s = 0;
        for (; s < static_cast<int>(states_.size()); ++s) {
            if (r < suffix_[steps][s]) break;
            r -= suffix_[steps][s];
        }
        std::vector<RungConfig> out;
        for (int i : states_[s]) out.push_back(rungs_[i]);
        for (int k = 1; k <= steps; ++k) {
            int chosen = -1;
            for (int t : succ_[s]) {
                if (r < suffix_[steps - k][t]) {
                    chosen = t;
                    break;
                }
                r -= suffix_[steps - k][t];
            }
            s = chosen;
            out.push_back(rungs_[states_[s].back()]);
        }
        heights.clear();
        for (const auto& c : out) heights.insert(heights.end(), c.begin(), c.end());
        if (window_burns(g_, heights, length_, BurnSide::Full)) {
            ++accepted_;
            return out;
        }
    }
}

// ---------------------------------------------------------------------------
// Boundary layer

BoundaryLayer boundary_layer(const Graph& g, const LadderConfig& eta) {
    if (!eta.is_stable(g)) throw ValidationError("configuration is not stable");
    const Window w = eta.window();
    const int n = w.first, m = w.last, len = w.num_rungs();
    auto h = eta.heights();
    const std::size_t width = g.size();
    if (!window_burns(g, h, len, BurnSide::Full)) throw ValidationError("configuration is not recurrent");
    const RungConfig top = g.max_rung();
    auto is_max = [&](int k) { return eta.rung(k) == top; };

    // Left-burnable prefixes and right-burnable suffixes are closed under
    // shortening, so the longest one determines all of them.
    int prefix = 0;
    while (prefix < len && window_burns(g, h.subspan(0, (prefix + 1) * width), prefix + 1, BurnSide::Left)) ++prefix;
    int suffix = 0;
    while (suffix < len &&
           window_burns(g, h.subspan((len - suffix - 1) * width), suffix + 1, BurnSide::Right))
        ++suffix;

    BoundaryLayer b;
    b.sigma_left = n - 1;
    for (int k = n; k < n + prefix; ++k) {
        if (is_max(k)) b.sigma_left = k;
    }
    b.sigma_right = m + 1;
    for (int k = m; k > m - suffix; --k) {
        if (is_max(k)) b.sigma_right = k;
    }
    b.hat_right = n - 1;
    for (int k = n; k < std::min(b.sigma_right, m + 1); ++k) {
        if (is_max(k)) b.hat_right = k;
    }
    b.hat_left = m + 1;
    for (int k = m; k > std::max(b.sigma_left, n - 1); --k) {
        if (is_max(k)) b.hat_left = k;
    }
    if (b.sigma_left == n - 1) b.flags.push_back("sigma_left: no maximal rung ends a left-burnable prefix");
    if (b.sigma_right == m + 1) b.flags.push_back("sigma_right: no maximal rung starts a right-burnable suffix");
    if (b.sigma_left < b.sigma_right) {
        b.tau_left = b.sigma_left;
        b.tau_right = b.sigma_right;
    } else {
        b.tau_left = b.hat_right;
        b.tau_right = b.hat_left;
        b.flags.push_back("overlap: sigma_left >= sigma_right");
        if (b.hat_right == n - 1) b.flags.push_back("hat_right: no maximal rung left of sigma_right");
        if (b.hat_left == m + 1) b.flags.push_back("hat_left: no maximal rung right of sigma_left");
    }
    return b;
}

nlohmann::json to_json(const BoundaryLayer& b) {
    return {{"sigma_left", b.sigma_left}, {"sigma_right", b.sigma_right}, {"hat_left", b.hat_left},
            {"hat_right", b.hat_right},   {"tau_left", b.tau_left},       {"tau_right", b.tau_right},
            {"flags", b.flags}};
}

// ---------------------------------------------------------------------------
// Mixtures

MixtureMode parse_mixture_mode(const std::string& s) {
    if (s == "enumerate") return MixtureMode::Enumerate;
    if (s == "sample") return MixtureMode::Sample;
    throw ValidationError("mode must be enumerate or sample");
}

namespace {

void check_window(const Window& w, int first, int last) {
    if (!(w.first < 0 && w.last > 0)) throw ValidationError("mixture windows must satisfy n < 0 < m");
    if (first < w.first || last > w.last) throw ValidationError("event lies outside a mixture window");
}

void check_raw_size(const Graph& g, const Window& w, std::uint64_t cap) {
    double raw = 1;
    for (int x = 0; x < g.size(); ++x) raw *= g.max_height(x);
    double total = std::pow(raw, w.num_rungs());
    if (total > static_cast<double>(cap)) {
        throw FeasibilityError("enumerating window [" + std::to_string(w.first) + ", " + std::to_string(w.last) +
                               "] means " + std::to_string(total) + " raw configurations; limit is " +
                               std::to_string(cap));
    }
}

// Alphabet index of each rung, -1 for rungs outside the alphabet.
std::vector<int> alphabet_indices(const RungAlphabet& alpha, const std::vector<RungConfig>& rungs, int from,
                                  int count) {
    std::vector<int> out;
    for (int p = 0; p < count; ++p) {
        auto i = alpha.find(rungs[from + p]);
        out.push_back(i ? *i : -1);
    }
    return out;
}

MixtureRow predicted_row(const Window& w, double finite, double left, double right) {
    MixtureRow r;
    r.window = w;
    r.finite = finite;
    r.left = left;
    r.right = right;
    r.weight = static_cast<double>(-w.first) / (w.last - w.first);
    r.predicted = r.weight * left + (1 - r.weight) * right;
    r.gap = std::abs(finite - r.predicted);
    r.gap_swapped = std::abs(finite - ((1 - r.weight) * left + r.weight * right));
    return r;
}

} // namespace

std::vector<MixtureRow> mixture_experiment(const MeasureContext& ctx, const std::vector<Window>& windows,
                                           const CylinderEvent& e, const MixtureOptions& opts) {
    const auto& g = ctx.graph;
    const auto& alpha = ctx.automaton.alphabet;
    const double left = cylinder_prob(ctx, e, MeasureMethod::Parry, Side::Left).value;
    const double right = cylinder_prob(ctx, e, MeasureMethod::Parry, Side::Right).value;
    auto mask = allowed_masks(ctx.automaton, e);
    auto hit = [&](const std::vector<RungConfig>& rungs, const Window& w) {
        auto idx = alphabet_indices(alpha, rungs, e.first - w.first, e.length());
        for (int p = 0; p < e.length(); ++p) {
            if (idx[p] < 0 || !mask[p][idx[p]]) return false;
        }
        return true;
    };
    std::vector<MixtureRow> rows;
    for (const auto& w : windows) {
        check_window(w, e.first, e.last());
        std::uint64_t total = 0, hits = 0;
        double sigma = 0;
        if (opts.mode == MixtureMode::Enumerate) {
            check_raw_size(g, w, opts.max_configs);
            CensusOptions copts;
            copts.max_enum = std::max<std::uint64_t>(opts.max_configs, copts.max_enum);
            enumerate_configs(g, Variant::REC, w.num_rungs(), [&](const std::vector<RungConfig>& rungs) {
                ++total;
                hits += hit(rungs, w);
            }, copts);
        } else {
            RecurrentSampler sampler(g, w.num_rungs(), opts.block);
            std::mt19937_64 rng(opts.seed);
            for (int i = 0; i < opts.samples; ++i) {
                ++total;
                hits += hit(sampler.draw(rng), w);
            }
        }
        double finite = static_cast<double>(hits) / static_cast<double>(total);
        if (opts.mode == MixtureMode::Sample) sigma = std::sqrt(finite * (1 - finite) / static_cast<double>(total));
        auto row = predicted_row(w, finite, left, right);
        row.configurations = total;
        row.finite_error = sigma;
        rows.push_back(row);
    }
    return rows;
}

std::vector<MixtureRow> mixture_marginal_gap(const MeasureContext& ctx, const std::vector<Window>& windows,
                                             int first, int length, const MixtureOptions& opts) {
    if (length < 1) throw ValidationError("marginal window must have at least one rung");
    if (opts.mode != MixtureMode::Enumerate) throw ValidationError("marginal gaps need enumerate mode");
    const auto& g = ctx.graph;
    const auto& alpha = ctx.automaton.alphabet;

    // Predicted one-sided probabilities of every exact assignment.
    std::map<std::vector<int>, std::pair<double, double>> one_sided;
    std::vector<int> idx(length, 0);
    for (;;) {
        CylinderEvent e;
        e.first = first;
        for (int i : idx) e.allowed.push_back({i});
        one_sided[idx] = {cylinder_prob(ctx, e, MeasureMethod::Parry, Side::Left).value,
                          cylinder_prob(ctx, e, MeasureMethod::Parry, Side::Right).value};
        int p = 0;
        while (p < length && idx[p] == alpha.size() - 1) idx[p++] = 0;
        if (p == length) break;
        ++idx[p];
    }

    std::vector<MixtureRow> rows;
    for (const auto& w : windows) {
        check_window(w, first, first + length - 1);
        check_raw_size(g, w, opts.max_configs);
        std::map<std::vector<int>, std::uint64_t> tally;
        std::uint64_t total = 0;
        CensusOptions copts;
        copts.max_enum = std::max<std::uint64_t>(opts.max_configs, copts.max_enum);
        enumerate_configs(g, Variant::REC, w.num_rungs(), [&](const std::vector<RungConfig>& rungs) {
            ++total;
            ++tally[alphabet_indices(alpha, rungs, first - w.first, length)];
        }, copts);
        MixtureRow worst;
        worst.gap = -1;
        auto consider = [&](const std::vector<int>& key, double finite) {
            auto it = one_sided.find(key);
            double l = it == one_sided.end() ? 0.0 : it->second.first;
            double r = it == one_sided.end() ? 0.0 : it->second.second;
            auto row = predicted_row(w, finite, l, r);
            double swapped = std::max(worst.gap_swapped, row.gap_swapped);
            if (row.gap > worst.gap) worst = row;
            worst.gap_swapped = swapped;
        };
        for (const auto& [key, lr] : one_sided) {
            auto it = tally.find(key);
            consider(key, it == tally.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total));
        }
        for (const auto& [key, count] : tally) {
            if (!one_sided.count(key)) consider(key, static_cast<double>(count) / static_cast<double>(total));
        }
        worst.configurations = total;
        rows.push_back(worst);
    }
    return rows;
}

nlohmann::json to_json(const MixtureRow& r) {
    return {{"window", {r.window.first, r.window.last}},
            {"configurations", r.configurations},
            {"finite", r.finite},
            {"finite_error", r.finite_error},
            {"left", r.left},
            {"right", r.right},
            {"weight_left", r.weight},
            {"predicted", r.predicted},
            {"gap", r.gap},
            {"gap_swapped_weight", r.gap_swapped}};
}

} // namespace ladder
