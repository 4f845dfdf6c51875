#include "ladder/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ladder/burning.hpp"
#include "ladder/census.hpp"
#include "ladder/coding.hpp"
#include "ladder/errors.hpp"
#include "ladder/measures.hpp"
#include "ladder/toppling.hpp"

namespace ladder {

namespace {

using nlohmann::json;

struct Globals {
    std::string graph = "path2";
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "csv";
    int threads = 1;
    std::size_t max_states = kDefaultMaxStates;
    std::uint64_t max_enum = kDefaultMaxEnum;
};

// Holds what one run wrote, so the manifest can list it.
class Run {
public:
    Run(const Globals& g, std::vector<std::string> argv) : globals_(g), argv_(std::move(argv)) {
        start_ = std::chrono::steady_clock::now();
        started_at_ = std::time(nullptr);
    }

    void set_command(std::string c, const CLI::App* sub) {
        command_ = std::move(c);
        sub_ = sub;
    }

    // Writes the main output to --out (plus manifest) or to stdout.
    void emit(const std::string& text) {
        if (globals_.out.empty()) {
            std::cout << text;
            std::cout.flush();
            return;
        }
        write_file(globals_.out, text);
    }

    void emit_json(const json& j) { emit(j.dump(2) + "\n"); }

    void write_file(const std::string& path, const std::string& text) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ValidationError("cannot write " + path);
        f << text;
        if (!f) throw ValidationError("failed writing " + path);
        outputs_.push_back(path);
    }

    void finish(const Graph& g) {
        if (outputs_.empty()) return;
        json params = json::object();
        if (sub_) collect(sub_, params);
        double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        std::ostringstream when;
        std::tm tm{};
        gmtime_r(&started_at_, &tm);
        when << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
        json m{{"command", command_},
               {"argv", argv_},
               {"graph", {{"source", globals_.graph}, {"name", g.name()}, {"structure", to_json(g)}}},
               {"parameters", params},
               {"seed", globals_.seed},
               {"format", globals_.format},
               {"tool_version", kToolVersion},
               {"outputs", outputs_},
               {"started_at", when.str()},
               {"wall_clock_seconds", elapsed}};
        for (const auto& path : outputs_) {
            std::ofstream f(path + ".manifest.json");
            if (!f) throw ValidationError("cannot write manifest for " + path);
            f << m.dump(2) << "\n";
        }
    }

    const Globals& globals() const { return globals_; }

private:
    static void collect(const CLI::App* app, json& params) {
        for (const CLI::Option* opt : app->get_options()) {
            std::string name = opt->get_name(false, true);
            if (name.empty() || name == "--help" || name == "-h") continue;
            while (!name.empty() && name[0] == '-') name.erase(0, 1);
            if (opt->count() > 0) {
                auto res = opt->results();
                if (res.size() == 1) {
                    params[name] = res[0];
                } else {
                    params[name] = res;
                }
            } else if (!opt->get_default_str().empty()) {
                params[name] = opt->get_default_str();
            }
        }
        for (const CLI::App* sub : app->get_subcommands()) collect(sub, params[sub->get_name()]);
    }

    const Globals& globals_;
    std::vector<std::string> argv_;
    std::string command_;
    const CLI::App* sub_ = nullptr;
    std::vector<std::string> outputs_;
    std::chrono::steady_clock::time_point start_;
    std::time_t started_at_;
};

bool want_json(const Globals& g) {
    if (g.format != "csv" && g.format != "json") throw ValidationError("--format must be csv or json");
    return g.format == "json";
}

std::string join_ints(const std::vector<int>& v, char sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + std::to_string(v[i]);
    return s;
}

std::string rung_text(const RungConfig& c) { return join_ints(c, ','); }

// "a:b,c:d" -> windows.
std::vector<Window> parse_windows(const std::string& text) {
    std::vector<Window> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto colon = item.find(':', 1);
        if (colon == std::string::npos) throw ValidationError("window '" + item + "' must be first:last");
        try {
            int a = std::stoi(item.substr(0, colon));
            int b = std::stoi(item.substr(colon + 1));
            if (a > b) throw ValidationError("window '" + item + "' is empty");
            out.emplace_back(a, b);
        } catch (const std::logic_error&) {
            throw ValidationError("window '" + item + "' must be first:last");
        }
    }
    if (out.empty()) throw ValidationError("no windows given");
    return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
    std::vector<int> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::logic_error&) {
            throw ValidationError("bad " + what + " '" + item + "'");
        }
    }
    if (out.empty()) throw ValidationError("empty " + what + " list");
    return out;
}

// "rung,vertex;rung,vertex"
std::vector<Site> parse_sites(const std::string& text) {
    std::vector<Site> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ';')) {
        auto v = parse_int_list(item, "site");
        if (v.size() != 2) throw ValidationError("site '" + item + "' must be rung,vertex");
        out.push_back({v[0], v[1]});
    }
    return out;
}

std::string odometer_csv(const Odometer& o) {
    std::ostringstream s;
    s << "rung";
    for (int x = 0; x < o.width; ++x) s << ",v" << x;
    s << "\n";
    for (int k = o.window.first; k <= o.window.last; ++k) {
        s << k;
        for (auto c : o.rung(k)) s << ',' << c;
        s << "\n";
    }
    return s.str();
}

json sample_json(int first, const std::vector<RungConfig>& rungs) {
    return {{"first_rung", first}, {"rungs", rungs}};
}

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

// ---------------------------------------------------------------------------

struct CensusArgs {
    std::string variant = "L";
    int n = 0;
    std::string method = "brute";
};

void run_census(Run& run, const Graph& g, const CensusArgs& a) {
    CensusOptions opts;
    opts.threads = run.globals().threads;
    opts.max_enum = run.globals().max_enum;
    opts.max_states = run.globals().max_states;
    auto series = count_series(g, parse_variant(a.variant), a.n, parse_method(a.method), opts);
    if (!want_json(run.globals())) {
        run.emit(to_csv(series));
        return;
    }
    json counts = json::array();
    for (const auto& v : series.values) counts.push_back(v.str());
    run.emit_json({{"variant", a.variant},
                   {"method", a.method},
                   {"counts", counts},
                   {"entropy", to_json(entropy_bounds(series))}});
}

struct CodingArgs {
    std::string emit;
    bool matrix = false;
};

void run_coding(Run& run, const Graph& g, const CodingArgs& a) {
    auto aut = build_coding(g, run.globals().max_states);
    auto t = check_transitive(aut);
    if (!a.emit.empty()) run.write_file(a.emit, to_json(aut).dump(2) + "\n");
    json summary{{"states", aut.size()},
                 {"alphabet_size", aut.alphabet.size()},
                 {"influence_maps", aut.maps.size()},
                 {"maps_monotone", aut.maps_monotone},
                 {"irreducible", t.irreducible},
                 {"period", t.period},
                 {"primitive_power", t.primitive_power ? json(*t.primitive_power) : json(nullptr)},
                 {"power_searched", t.power_searched}};
    if (a.matrix) summary["matrix"] = transition_matrix(aut);
    if (want_json(run.globals())) {
        run.emit_json(summary);
        return;
    }
    std::ostringstream s;
    s << "key,value\n";
    for (const auto& [k, v] : summary.items()) {
        if (k != "matrix") s << k << ',' << v.dump() << "\n";
    }
    if (a.matrix) {
        for (const auto& row : transition_matrix(aut)) s << "row," << join_ints(row, ' ') << "\n";
    }
    run.emit(s.str());
}

void run_spectral(Run& run, const Graph& g, int order) {
    auto ctx = make_context(g, run.globals().max_states, 0);
    std::string renewal_error;
    try {
        ctx.renewal = renewal_quantities(ctx.automaton, order);
    } catch (const FeasibilityError& e) {
        renewal_error = e.what();
    }
    double rho0 = 0;
    if (ctx.automaton.alphabet.size() > 1) rho0 = spectral_radius(restrict_non_max(ctx.automaton));
    const auto& r = ctx.renewal;
    json scalars{{"rho", ctx.spectral.rho},
                 {"entropy", std::log(ctx.spectral.rho)},
                 {"rho_non_max", rho0},
                 {"entropy_non_max", rho0 > 0 ? json(std::log(rho0)) : json(nullptr)},
                 {"parry_entropy_rate", entropy_rate(ctx.chain)},
                 {"right_residual", ctx.spectral.right_residual},
                 {"left_residual", ctx.spectral.left_residual},
                 {"lambda", r.lambda},
                 {"lambda_lower", r.lambda_lower},
                 {"lambda_times_rho", r.lambda * ctx.spectral.rho},
                 {"renewal_order", r.order},
                 {"renewal_tail_bound", r.tail_bound},
                 {"mean_gap", r.mean_gap},
                 {"mean_gap_tail_bound", r.mean_gap_tail},
                 {"alpha", r.alpha},
                 {"renewal_density", r.alpha * r.lambda},
                 {"max_rung_stationary_mass", ctx.chain.pi[ctx.automaton.inclusion[RungAlphabet::max_index()]]}};
    if (!renewal_error.empty()) {
        // The Perron data stands on its own; renewal fields are left out.
        for (auto k : {"lambda", "lambda_lower", "lambda_times_rho", "renewal_order", "renewal_tail_bound", "mean_gap",
                       "mean_gap_tail_bound", "alpha", "renewal_density"}) {
            scalars.erase(k);
        }
        scalars["renewal_unavailable"] = renewal_error;
    }
    if (!want_json(run.globals())) {
        std::ostringstream s;
        s << "key,value\n";
        for (const auto& [k, v] : scalars.items()) s << k << ',' << (v.is_number_float() ? fmt(v.get<double>()) : v.dump()) << "\n";
        run.emit(s.str());
        return;
    }
    json j = scalars;
    j["right_vector"] = ctx.spectral.right;
    j["left_vector"] = ctx.spectral.left;
    j["stationary"] = ctx.chain.pi;
    std::vector<double> p(r.p.begin(), r.p.begin() + std::min<std::size_t>(r.p.size(), 64));
    if (renewal_error.empty()) j["renewal_p_first_64"] = p;
    run.emit_json(j);
}

struct MeasureArgs {
    std::string event;
    std::string method = "all";
    std::string side = "L";
    int half_width = 32;
    int order = kDefaultRenewalOrder;
};

void run_measure(Run& run, const Graph& g, const MeasureArgs& a) {
    std::vector<MeasureMethod> methods;
    if (a.method == "all") {
        methods = {MeasureMethod::Renewal, MeasureMethod::Parry, MeasureMethod::FiniteDP};
    } else {
        methods = {parse_measure_method(a.method)};
    }
    bool renewal = std::find(methods.begin(), methods.end(), MeasureMethod::Renewal) != methods.end();
    auto ctx = make_context(g, run.globals().max_states, renewal ? a.order : 0);
    auto e = parse_event(ctx.automaton.alphabet, a.event);
    std::vector<Side> sides;
    if (a.side == "L" || a.side == "both") sides.push_back(Side::Left);
    if (a.side == "R" || a.side == "both") sides.push_back(Side::Right);
    if (sides.empty()) throw ValidationError("--side must be L, R or both");
    CylinderOptions opts;
    opts.finite_half_width = a.half_width;
    const std::string ev = to_string(ctx.automaton.alphabet, e);
    json rows = json::array();
    std::ostringstream s;
    s << "window,event,method,side,value,error_budget,outside_alphabet\n";
    for (auto side : sides) {
        for (auto m : methods) {
            auto r = cylinder_prob(ctx, e, m, side, opts);
            std::string window = r.window ? std::to_string(r.window->first) + ":" + std::to_string(r.window->last)
                                          : "infinite";
            s << window << ',' << ev << ',' << to_string(m) << ',' << (side == Side::Left ? "L" : "R") << ','
              << fmt(r.value) << ',' << fmt(r.error_bound) << ',' << (r.outside_alphabet ? "true" : "false")
              << "\n";
            auto j = to_json(r);
            j["event"] = ev;
            rows.push_back(j);
        }
    }
    if (want_json(run.globals())) {
        run.emit_json(rows);
    } else {
        run.emit(s.str());
    }
}

struct SampleArgs {
    std::string kind = "muL";
    int width = 8;
    int count = 10;
    int first = 0;
    int block = 4;
    bool boundary = false;
};

void run_sample(Run& run, const Graph& g, const SampleArgs& a) {
    if (a.count < 0) throw ValidationError("--count must be non-negative");
    std::vector<std::vector<RungConfig>> samples;
    std::optional<MeasureContext> ctx;
    if (a.kind == "muL" || a.kind == "muR") {
        ctx = make_context(g, run.globals().max_states, 0);
        samples = sample_muL_window(*ctx, a.width, a.count, run.globals().seed,
                                    a.kind == "muL" ? Side::Left : Side::Right);
    } else if (a.kind == "finite") {
        auto aut = build_coding(g, run.globals().max_states);
        FiniteSampler s(aut, a.width);
        std::mt19937_64 rng(run.globals().seed);
        for (int i = 0; i < a.count; ++i) samples.push_back(s.draw(rng));
    } else if (a.kind == "recurrent") {
        RecurrentSampler s(g, a.width, a.block);
        std::mt19937_64 rng(run.globals().seed);
        for (int i = 0; i < a.count; ++i) samples.push_back(s.draw(rng));
    } else {
        throw ValidationError("--kind must be muL, muR, finite or recurrent");
    }
    // Every draw is checked against the burning oracle for its measure.
    for (const auto& w : samples) {
        auto cfg = LadderConfig::from_rungs(a.first, w);
        bool ok = a.kind == "muR" ? right_burnable(g, cfg).success
                  : a.kind == "recurrent" ? full_burnable(g, cfg).success
                                          : left_burnable(g, cfg).success;
        if (!ok) throw InternalError("sampler produced a configuration outside its support");
    }
    if (a.boundary && a.kind != "recurrent") throw ValidationError("--boundary needs --kind recurrent");
    std::ostringstream s;
    if (want_json(run.globals()) || a.boundary) {
        // JSON lines: one sample per line.
        for (const auto& w : samples) {
            json j = sample_json(a.first, w);
            if (a.boundary) j["boundary"] = to_json(boundary_layer(g, LadderConfig::from_rungs(a.first, w)));
            s << j.dump() << "\n";
        }
    } else {
        s << "sample,rung";
        for (int x = 0; x < g.size(); ++x) s << ",h" << x;
        s << "\n";
        for (std::size_t i = 0; i < samples.size(); ++i) {
            for (std::size_t k = 0; k < samples[i].size(); ++k) {
                s << i << ',' << a.first + static_cast<int>(k) << ',' << rung_text(samples[i][k]) << "\n";
            }
        }
    }
    run.emit(s.str());
}

struct ToppleArgs {
    std::string config;
    std::string add;
    std::string schedule = "parallel";
    std::string demo;
    int last_rung = 16;
    std::int64_t step_cap = kDefaultStepCap;
    bool check = false;
};

void run_topple(Run& run, const Graph& g_in, const ToppleArgs& a) {
    Graph g = g_in;
    LadderConfig cfg;
    std::vector<Site> adds;
    if (!a.demo.empty()) {
        if (a.demo != "remark4") throw ValidationError("unknown demo '" + a.demo + "'; available: remark4");
        if (!g.is_two_vertex_path()) throw ValidationError("the remark4 demo runs on --graph path2");
        auto d = finite_avalanche_demo(a.last_rung);
        cfg = d.config;
        adds = {d.addition};
    } else {
        if (a.config.empty()) throw ValidationError("topple needs --config or --demo");
        std::ifstream f(a.config);
        if (!f) throw ValidationError("cannot read " + a.config);
        json j;
        try {
            f >> j;
        } catch (const json::exception& e) {
            throw ValidationError(std::string("bad configuration JSON: ") + e.what());
        }
        cfg = config_from_json(j, g);
        adds = a.add.empty() ? std::vector<Site>{} : parse_sites(a.add);
    }
    auto schedule = parse_schedule(a.schedule);
    json j;
    try {
        auto res = stabilize(g, cfg, adds, schedule, a.step_cap);
        j = {{"schedule", schedule.name()}, {"odometer", to_json(res.odometer)}, {"final", rungs_to_json(res.config)}};
        if (a.check) {
            std::vector<Schedule> all{Schedule::parallel(), Schedule::canonical(), Schedule::random(run.globals().seed),
                                      Schedule::random(run.globals().seed + 1), Schedule::random(run.globals().seed + 2)};
            j["abelian_check"] = check_abelian(g, cfg, adds, all, a.step_cap);
        }
        if (!want_json(run.globals())) {
            run.emit(odometer_csv(res.odometer));
            return;
        }
    } catch (const StepCapExceeded& e) {
        std::cerr << "partial odometer: " << to_json(e.partial()).dump() << "\n";
        throw;
    }
    run.emit_json(j);
}

struct BlastArgs {
    std::string ks = "4,8,16";
    int samples = 3;
    int center = 2;
    std::string schedule = "parallel";
    std::int64_t step_cap = kDefaultStepCap;
};

void run_blast(Run& run, const Graph& g, const BlastArgs& a) {
    auto ks = parse_int_list(a.ks, "K");
    int kmax = *std::max_element(ks.begin(), ks.end());
    for (int k : ks) {
        if (k < a.center) throw ValidationError("every K must be at least the centre half-width");
    }
    auto ctx = make_context(g, run.globals().max_states, 0);
    // One long sample per seed; smaller windows are its central restrictions.
    auto draws = sample_muL_window(ctx, 2 * kmax + 1, a.samples, run.globals().seed);
    auto schedule = parse_schedule(a.schedule);
    std::ostringstream s;
    s << "sample,K,center_min,total_topplings,to_sink\n";
    json rows = json::array();
    for (int i = 0; i < a.samples; ++i) {
        auto full = LadderConfig::from_rungs(-kmax, draws[i]);
        json per = json::array();
        std::int64_t prev = -1;
        bool increasing = true;
        for (int k : ks) {
            auto eta = full.restricted(Window(-k, k));
            auto b = rung_zero_blast(g, eta, schedule, a.step_cap);
            auto m = b.min_over(-a.center, a.center);
            increasing = increasing && m > prev;
            prev = m;
            s << i << ',' << k << ',' << m << ',' << b.odometer.total() << ',' << b.odometer.to_sink << "\n";
            per.push_back({{"K", k}, {"center_min", m}, {"rung_min", b.rung_min}, {"total", b.odometer.total()}});
        }
        rows.push_back({{"sample", i}, {"runs", per}, {"strictly_increasing", increasing}});
    }
    if (want_json(run.globals())) {
        run.emit_json(rows);
    } else {
        run.emit(s.str());
    }
}

struct MixtureArgs {
    std::string windows = "-2:2,-3:3";
    std::string event;
    std::string marginal;
    std::string mode = "enumerate";
    int samples = 10'000;
    int block = 5;
    std::uint64_t max_configs = 10'000'000;
};

void run_mixture(Run& run, const Graph& g, const MixtureArgs& a) {
    auto ctx = make_context(g, run.globals().max_states, 0);
    auto windows = parse_windows(a.windows);
    MixtureOptions opts;
    opts.mode = parse_mixture_mode(a.mode);
    opts.samples = a.samples;
    opts.seed = run.globals().seed;
    opts.block = a.block;
    opts.max_configs = a.max_configs;
    std::vector<MixtureRow> rows;
    std::string label;
    if (!a.marginal.empty()) {
        if (!a.event.empty()) throw ValidationError("give --event or --marginal, not both");
        auto v = parse_int_list(a.marginal, "marginal");
        if (v.size() != 2) throw ValidationError("--marginal must be first,length");
        rows = mixture_marginal_gap(ctx, windows, v[0], v[1], opts);
        label = "marginal " + std::to_string(v[0]) + ":" + std::to_string(v[0] + v[1] - 1);
    } else {
        if (a.event.empty()) throw ValidationError("mixture needs --event or --marginal");
        auto e = parse_event(ctx.automaton.alphabet, a.event);
        rows = mixture_experiment(ctx, windows, e, opts);
        label = to_string(ctx.automaton.alphabet, e);
    }
    if (want_json(run.globals())) {
        json j = json::array();
        for (const auto& r : rows) {
            auto x = to_json(r);
            x["event"] = label;
            j.push_back(x);
        }
        run.emit_json(j);
        return;
    }
    std::ostringstream s;
    s << "window_first,window_last,event,configurations,finite,finite_error,left,right,weight_left,predicted,gap,"
         "gap_swapped_weight\n";
    for (const auto& r : rows) {
        s << r.window.first << ',' << r.window.last << ',' << label << ',' << r.configurations << ','
          << fmt(r.finite) << ',' << fmt(r.finite_error) << ',' << fmt(r.left) << ',' << fmt(r.right) << ','
          << fmt(r.weight) << ',' << fmt(r.predicted) << ',' << fmt(r.gap) << ',' << fmt(r.gap_swapped) << "\n";
    }
    run.emit(s.str());
}

struct CycleArgs {
    std::string sizes = "3,4";
    int half_width = 8;
    int samples = 200;
    std::int64_t step_cap = kDefaultStepCap;
};

// Finite-window proxies for the cycle question: one grain at (0, 0) of a
// left-burnable sample on [-K, K]. Nothing here estimates a limit.
void run_cycle_topple(Run& run, const CycleArgs& a) {
    std::ostringstream s;
    s << "cycle,K,samples,p_origin_topples,mean_origin_topples,p_reaches_both_ends,p_every_site_topples\n";
    json rows = json::array();
    for (int n : parse_int_list(a.sizes, "cycle size")) {
        if (n < 3) throw ValidationError("cycles need at least 3 vertices");
        Graph g = builtin_graph("cycle" + std::to_string(n));
        auto ctx = make_context(g, run.globals().max_states, 0);
        auto draws = sample_muL_window(ctx, 2 * a.half_width + 1, a.samples, run.globals().seed);
        int toppled = 0, both = 0, every = 0;
        double mean = 0;
        for (const auto& w : draws) {
            auto cfg = LadderConfig::from_rungs(-a.half_width, w);
            auto res = stabilize(g, cfg, {{0, 0}}, Schedule::parallel(), a.step_cap);
            const auto& o = res.odometer;
            auto origin = o.at({0, 0});
            toppled += origin > 0;
            mean += static_cast<double>(origin);
            auto lo = o.rung(-a.half_width), hi = o.rung(a.half_width);
            bool left_end = std::any_of(lo.begin(), lo.end(), [](auto c) { return c > 0; });
            bool right_end = std::any_of(hi.begin(), hi.end(), [](auto c) { return c > 0; });
            both += left_end && right_end;
            every += std::all_of(o.counts.begin(), o.counts.end(), [](auto c) { return c > 0; });
        }
        const double total = a.samples;
        s << n << ',' << a.half_width << ',' << a.samples << ',' << fmt(toppled / total) << ','
          << fmt(mean / total) << ',' << fmt(both / total) << ',' << fmt(every / total) << "\n";
        rows.push_back({{"cycle", n},
                        {"K", a.half_width},
                        {"samples", a.samples},
                        {"p_origin_topples", toppled / total},
                        {"mean_origin_topples", mean / total},
                        {"p_reaches_both_ends", both / total},
                        {"p_every_site_topples", every / total}});
    }
    if (want_json(run.globals())) {
        run.emit_json(rows);
    } else {
        run.emit(s.str());
    }
}

void run_graph(Run& run, const Graph& g) {
    auto alpha = enum_rungs(g);
    if (want_json(run.globals())) {
        json degrees = json::array();
        for (int x = 0; x < g.size(); ++x) degrees.push_back(g.degree(x));
        run.emit_json({{"name", g.name()}, {"structure", to_json(g)}, {"degrees", degrees}, {"alphabet", alpha.rungs}});
        return;
    }
    std::ostringstream s;
    s << "vertex,degree,max_height,neighbors\n";
    for (int x = 0; x < g.size(); ++x) {
        std::vector<int> nb(g.neighbors(x).begin(), g.neighbors(x).end());
        s << x << ',' << g.degree(x) << ',' << g.max_height(x) << ',' << join_ints(nb, ' ') << "\n";
    }
    run.emit(s.str());
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Sandpiles on ladder graphs G x Z: burning tests, counting, codings, measures and avalanches."};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string("ladder ") + kToolVersion);
    app.failure_message(CLI::FailureMessage::help);

    Globals glob;
    app.add_option("--graph", glob.graph, "Base graph: path2, path3, cycle3, point, pathN, cycleN or a file")
        ->capture_default_str();
    app.add_option("--seed", glob.seed, "Random seed")->capture_default_str();
    app.add_option("--out", glob.out, "Output file (a .manifest.json is written beside it); default stdout");
    app.add_option("--format", glob.format, "csv or json")->capture_default_str()->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", glob.threads, "Worker threads for brute-force counting")->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--max-states", glob.max_states, "Cap on coding-automaton states")->capture_default_str();
    app.add_option("--max-enum", glob.max_enum, "Cap on candidate extensions in brute-force counting")
        ->capture_default_str();

    auto* graph = app.add_subcommand("graph", "Base graph, degrees, threshold heights and the rung alphabet");

    CensusArgs census_args;
    auto* census = app.add_subcommand("census", "Counts of left-, right- and two-sided burnable windows, entropy bounds");
    census->add_option("--variant", census_args.variant, "L, L0, S, S0 or REC")->capture_default_str();
    census->add_option("--n", census_args.n, "Largest window length")->required();
    census->add_option("--method", census_args.method, "brute or automaton (L and L0 only)")->capture_default_str();

    CodingArgs coding_args;
    auto* coding = app.add_subcommand("coding", "Markovian coding automaton of left-burnable sequences");
    coding->add_option("--emit", coding_args.emit, "Write the automaton JSON to this file");
    coding->add_flag("--matrix", coding_args.matrix, "Include the 0-1 transition matrix");

    int spectral_order = kDefaultRenewalOrder;
    auto* spectral_cmd = app.add_subcommand(
        "spectral", "Perron data of the coding, entropy with and without maximal rungs, renewal constants");
    spectral_cmd->add_option("--renewal-order", spectral_order, "Truncation order N of the renewal series")
        ->capture_default_str();

    MeasureArgs measure_args;
    auto* measure = app.add_subcommand("measure", "Cylinder probabilities under the left- or right-burnable limit measure");
    measure->add_option("--event", measure_args.event, "Event, e.g. '0:3,3' or '-1:3,1/*/3,3'")->required();
    measure->add_option("--method", measure_args.method, "renewal, parry, finite_dp or all")->capture_default_str();
    measure->add_option("--side", measure_args.side, "L, R or both")->capture_default_str();
    measure->add_option("--half-width", measure_args.half_width, "Finite window [-h, h] for finite_dp")
        ->capture_default_str();
    measure->add_option("--renewal-order", measure_args.order, "Truncation order of the renewal series")
        ->capture_default_str();

    SampleArgs sample_args;
    auto* sample = app.add_subcommand("sample", "Samples: stationary Markov coding, exact uniform finite windows, recurrent windows");
    sample->add_option("--kind", sample_args.kind, "muL, muR, finite or recurrent")->capture_default_str();
    sample->add_option("--width", sample_args.width, "Rungs per sample")->capture_default_str();
    sample->add_option("--count", sample_args.count, "Number of samples")->capture_default_str();
    sample->add_option("--first", sample_args.first, "Index of the first rung")->capture_default_str();
    sample->add_option("--block", sample_args.block, "Proposal block length for recurrent sampling")
        ->capture_default_str();
    sample->add_flag("--boundary", sample_args.boundary, "Attach boundary-layer statistics (recurrent only)");

    ToppleArgs topple_args;
    auto* topple = app.add_subcommand("topple", "Stabilize a configuration after adding grains; prints the odometer");
    topple->add_option("--config", topple_args.config, "Configuration JSON file");
    topple->add_option("--add", topple_args.add, "Grains as 'rung,vertex;rung,vertex'");
    topple->add_option("--schedule", topple_args.schedule, "parallel, canonical or random:<seed>")
        ->capture_default_str();
    topple->add_option("--demo", topple_args.demo, "remark4: the avalanche with finite toppling numbers");
    topple->add_option("--last-rung", topple_args.last_rung, "Window end for the demo")->capture_default_str();
    topple->add_option("--step-cap", topple_args.step_cap, "Maximum number of topplings")->capture_default_str();
    topple->add_flag("--check-schedules", topple_args.check, "Also compare five schedules");

    BlastArgs blast_args;
    auto* blast = app.add_subcommand("blast", "Grain on every site of rung 0 of a left-burnable sample; odometer growth with K");
    blast->add_option("--K", blast_args.ks, "Comma list of half-widths")->capture_default_str();
    blast->add_option("--samples", blast_args.samples, "Number of seeded samples")->capture_default_str();
    blast->add_option("--center", blast_args.center, "Half-width of the rungs whose minimum is reported")
        ->capture_default_str();
    blast->add_option("--schedule", blast_args.schedule, "Toppling schedule")->capture_default_str();
    blast->add_option("--step-cap", blast_args.step_cap, "Maximum number of topplings")->capture_default_str();

    MixtureArgs mixture_args;
    auto* mixture = app.add_subcommand("mixture", "Finite uniform recurrent measure against mixtures of the one-sided limits");
    mixture->add_option("--windows", mixture_args.windows, "Windows 'n:m,n:m' with n < 0 < m")->capture_default_str();
    mixture->add_option("--event", mixture_args.event, "Event in absolute rung positions");
    mixture->add_option("--marginal", mixture_args.marginal, "first,length: largest gap over all exact events there");
    mixture->add_option("--mode", mixture_args.mode, "enumerate or sample")->capture_default_str();
    mixture->add_option("--samples", mixture_args.samples, "Samples per window in sample mode")->capture_default_str();
    mixture->add_option("--block", mixture_args.block, "Proposal block length in sample mode")->capture_default_str();
    mixture->add_option("--max-configs", mixture_args.max_configs, "Cap on raw configurations per enumerated window")
        ->capture_default_str();

    auto* experiment = app.add_subcommand("experiment", "Exploratory experiments");
    experiment->require_subcommand(1);
    CycleArgs cycle_args;
    auto* cycle = experiment->add_subcommand(
        "cycle-topple", "Cycle bases: finite-window avalanche proxies from one grain at (0,0); no limit is claimed");
    cycle->add_option("--sizes", cycle_args.sizes, "Cycle lengths")->capture_default_str();
    cycle->add_option("--K", cycle_args.half_width, "Window half-width")->capture_default_str();
    cycle->add_option("--samples", cycle_args.samples, "Samples per cycle")->capture_default_str();
    cycle->add_option("--step-cap", cycle_args.step_cap, "Maximum topplings per avalanche")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::vector<std::string> args(argv, argv + argc);
    Run run(glob, args);
    try {
        want_json(glob);
        Graph g = load_graph(glob.graph);
        if (*graph) {
            run.set_command("graph", graph);
            run_graph(run, g);
        } else if (*census) {
            run.set_command("census", census);
            run_census(run, g, census_args);
        } else if (*coding) {
            run.set_command("coding", coding);
            run_coding(run, g, coding_args);
        } else if (*spectral_cmd) {
            run.set_command("spectral", spectral_cmd);
            run_spectral(run, g, spectral_order);
        } else if (*measure) {
            run.set_command("measure", measure);
            run_measure(run, g, measure_args);
        } else if (*sample) {
            run.set_command("sample", sample);
            run_sample(run, g, sample_args);
        } else if (*topple) {
            run.set_command("topple", topple);
            run_topple(run, g, topple_args);
        } else if (*blast) {
            run.set_command("blast", blast);
            run_blast(run, g, blast_args);
        } else if (*mixture) {
            run.set_command("mixture", mixture);
            run_mixture(run, g, mixture_args);
        } else if (*cycle) {
            run.set_command("experiment cycle-topple", cycle);
            run_cycle_topple(run, cycle_args);
        }
        run.finish(g);
    } catch (const FeasibilityError& e) {
        std::cerr << "error (feasibility cap): " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace ladder
