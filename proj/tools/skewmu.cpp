// skewmu: command-line front end.
//
// Every option can also come from a JSON config (--config FILE) whose keys are the long
// option names; flags given on the command line win. Exit status: 0 success, 2 invalid
// input, 3 budget or resource failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <new>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "skewmu/io.hpp"
#include "skewmu/skewmu.hpp"

using namespace skewmu;
using io::json;

namespace {

constexpr int exit_validation = 2;
constexpr int exit_resource = 3;

/// String-valued options of one subcommand, resolved against the config file after parsing.
class Params {
public:
    Params(CLI::App* cmd, std::string name) : cmd_(cmd), name_(std::move(name)) {}

    void add(const std::string& key, std::string def, const std::string& help) {
        auto& slot = values_[key];
        slot = std::move(def);
        options_[key] = cmd_->add_option("--" + key, slot, help)->capture_default_str();
    }

    void add_flag(const std::string& key, const std::string& help) {
        auto& slot = values_[key];
        slot = "false";
        options_[key] = cmd_->add_flag_callback("--" + key, [&slot] { slot = "true"; }, help);
    }

    void resolve(const json& file) {
        const json* scope = &file;
        if (file.contains(name_) && file.at(name_).is_object()) scope = &file.at(name_);
        for (auto& [key, value] : values_) {
            if (options_.at(key)->count() > 0) continue;
            for (const json* src : {scope, &file}) {
                if (!src->contains(key)) continue;
                const json& v = src->at(key);
                value = v.is_string() ? v.get<std::string>() : v.dump();
                break;
            }
        }
    }

    const std::string& str(const std::string& key) const { return values_.at(key); }
    std::int64_t i64(const std::string& key) const {
        const auto v = io::parse_int_list(str(key));
        if (v.size() != 1) throw validation_error("--" + key + " needs one integer");
        return v[0];
    }
    double num(const std::string& key) const {
        const auto v = io::parse_double_list(str(key));
        if (v.size() != 1) throw validation_error("--" + key + " needs one number");
        return v[0];
    }
    bool flag(const std::string& key) const { return str(key) == "true"; }

    json as_json() const {
        json j;
        j["command"] = name_;
        for (const auto& [k, v] : values_)
            if (k != "out" && k != "json" && k != "mobius-cache") j[k] = v;
        return j;
    }
    std::string hash() const { return io::config_hash(as_json()); }
    bool parsed() const { return cmd_->parsed(); }

private:
    CLI::App* cmd_;
    std::string name_;
    std::map<std::string, std::string> values_;
    std::map<std::string, CLI::Option*> options_;
};

unsigned thread_count() {
    if (const char* env = std::getenv("SKEWMU_THREADS")) {
        const auto v = io::parse_int_list(env);
        if (v.size() != 1 || v[0] < 1) throw validation_error("SKEWMU_THREADS must be a positive integer");
        return static_cast<unsigned>(v[0]);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Output stream for --out: "-" is standard output.
class Output {
public:
    explicit Output(const std::string& path) {
        if (path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw error("cannot open " + path + " for writing");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

FourierSeries series_arg(const std::string& text) {
    json j;
    try {
        j = text.find_first_of("{[\"") == std::string::npos ? json(text) : json::parse(text);
    } catch (const json::exception& e) {
        throw validation_error("bad series spec '" + text + "': " + e.what());
    }
    return io::parse_series(j);
}

io::Observable observable_arg(const std::string& text) {
    json j;
    try {
        j = text.find_first_of("{[\"") == std::string::npos ? json(text) : json::parse(text);
    } catch (const json::exception& e) {
        throw validation_error("bad observable spec '" + text + "': " + e.what());
    }
    return io::parse_observable(j);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

ProductPoint random_point(std::mt19937_64& rng) {
    const double t = uniform01(rng), x = uniform01(rng), y = uniform01(rng), z = uniform01(rng);
    return {t, NilPoint::from_unit_cube(x, y, z)};
}

ProductPoint start_arg(const std::string& text, std::mt19937_64& rng) {
    if (text == "random") return random_point(rng);
    const auto v = io::parse_double_list(text);
    if (v.size() != 4) throw validation_error("--start needs 'random' or 't,x,y,z'");
    return {frac(v[0]), NilPoint::from_unit_cube(v[1], v[2], v[3])};
}

io::ParsedAlpha alpha_arg(const Params& p) {
    return io::parse_alpha(p.str("alpha"), static_cast<int>(p.i64("k-max")), p.i64("q-cap"));
}

struct BuiltFlow {
    FlowSpec flow;
    double tail_bound = 0.0;
};

BuiltFlow flow_arg(const Params& p, const io::ParsedAlpha& a) {
    const std::string kind = p.str("flow");
    const FourierSeries phi = series_arg(p.str("phi"));
    const FourierSeries psi = series_arg(p.str("psi"));
    if (kind == "t") return {make_T(a.rot, phi, psi), 0.0};
    if (kind == "s") return {make_S(a.rot, phi, series_arg(p.str("phi2")), psi), 0.0};
    if (kind == "t1") {
        const auto cls = classify(a.cf, p.num("B"));
        const auto c = build_conjugacy(phi, psi, a.cf, cls, TailProfile{}, p.i64("truncation"));
        return {c.T1, c.tail_bound};
    }
    throw validation_error("--flow must be t, s or t1");
}

void add_alpha(Params& p, const std::string& def) {
    p.add("alpha", def, "rotation number: dec:, rat:, cf:, golden, liouville:B,levels");
    p.add("k-max", "64", "maximum number of partial quotients");
    p.add("q-cap", "1000000000000000", "stop after the first q_k above this");
}

void add_flow(Params& p, const std::string& kind) {
    p.add("flow", kind, "t, s or t1");
    p.add("phi", "cos", "phi series (preset or JSON)");
    p.add("phi2", "zero", "second fiber series for --flow s");
    p.add("psi", "zero", "psi series (preset or JSON)");
    p.add("B", "3", "classification exponent B > 2");
    p.add("truncation", "64", "frequency truncation for the cobounding series");
}

MobiusTable mobius_for(const Params& p, std::int64_t N) {
    const std::string cache = p.str("mobius-cache");
    if (!cache.empty() && std::ifstream(cache)) {
        auto t = MobiusTable::load(cache);
        if (t.n_max() >= N) return t;
    }
    auto t = mobius_sieve(std::max<std::int64_t>(N, 1));
    if (!cache.empty()) t.save(cache);
    return t;
}

int run_sieve(const Params& p) {
    const std::int64_t n = p.i64("n");
    const std::string method = p.str("method");
    if (method != "linear" && method != "segmented") throw validation_error("--method must be linear or segmented");
    const auto t = mobius_sieve(n, method == "linear" ? SieveMethod::linear : SieveMethod::segmented);
    t.save(p.str("out"));
    const auto s = control_stats(t, n);
    std::cout << "n_max=" << n << " mertens_ratio=" << io::format_double(s.mertens_ratio)
              << " squarefree_density=" << io::format_double(s.squarefree_density) << '\n';
    return 0;
}

int run_convergents(const Params& p) {
    const auto a = alpha_arg(p);
    const auto cls = classify(a.cf, p.num("B"));
    const int K = std::min<int>(a.cf.size(), static_cast<int>(p.i64("k")));
    Output out(p.str("out"));
    io::CsvWriter csv(out.stream(), p.hash(), 0.0, {"k", "a_k", "l_k", "q_k", "class"});
    for (int k = 1; k <= K; ++k) {
        const QClass c = cls.at(k);
        csv.row({std::int64_t{k}, a.cf.a(k), a.cf.l(k), a.cf.q(k),
                 std::string(c == QClass::sharp ? "sharp" : c == QClass::flat ? "flat" : "unknown")});
    }
    return 0;
}

int run_decompose(const Params& p) {
    const auto a = alpha_arg(p);
    const auto cls = classify(a.cf, p.num("B"));
    const FourierSeries f = series_arg(p.str("f"));
    const auto [f1, f2] = decompose(f, cls, a.cf);
    const auto g = cobound(f2, a.cf, cls, TailProfile{}, p.i64("truncation"));
    Output out(p.str("out"));
    io::CsvWriter csv(out.stream(), p.hash(), g.tail_bound, {"m", "re", "im", "part", "g_re", "g_im"});
    for (const auto& t : f.terms()) {
        const bool res = f1.coeff(t.m) != complex{};
        const complex gc = g.g.coeff(t.m);
        csv.row({t.m, t.c.real(), t.c.imag(), std::int64_t{res ? 1 : 2}, gc.real(), gc.imag()});
    }
    return 0;
}

int run_correlate(const Params& p) {
    const auto a = alpha_arg(p);
    const auto built = flow_arg(p, a);
    const auto obs = observable_arg(p.str("obs"));
    const std::int64_t N = p.i64("n");
    auto checkpoints = io::parse_int_list(p.str("checkpoints"));
    std::erase_if(checkpoints, [N](std::int64_t c) { return c > N; });
    if (checkpoints.empty() || checkpoints.back() != N) checkpoints.push_back(N);
    std::mt19937_64 rng(static_cast<std::uint64_t>(p.i64("seed")));
    const ProductPoint P0 = start_arg(p.str("start"), rng);
    const bool control = p.flag("control");
    std::optional<MobiusTable> mu;
    if (!control) mu = mobius_for(p, N);
    const auto res = mobius_correlation(built.flow, obs, P0, N, checkpoints, mu ? &*mu : nullptr,
                                        control ? Weights::ones : Weights::mobius);
    Output out(p.str("out"));
    io::CsvWriter csv(out.stream(), p.hash(), built.tail_bound, {"n", "re_avg", "im_avg", "abs_avg"});
    for (const auto& r : res) csv.row({r.n, r.average.real(), r.average.imag(), std::abs(r.average)});
    return 0;
}

int run_expsum(const Params& p) {
    const auto coeffs = io::parse_double_list(p.str("poly"));
    const std::int64_t N = p.i64("n");
    auto checkpoints = io::parse_int_list(p.str("checkpoints"));
    std::erase_if(checkpoints, [N](std::int64_t c) { return c > N; });
    if (checkpoints.empty() || checkpoints.back() != N) checkpoints.push_back(N);
    const auto mu = mobius_for(p, N);
    Output out(p.str("out"));
    io::CsvWriter csv(out.stream(), p.hash(), 0.0, {"N", "re", "im", "abs_over_N"});
    for (const auto c : checkpoints) {
        const complex s = mu_exponential_sum(coeffs, p.i64("a"), p.i64("q"), c, mu);
        csv.row({c, s.real(), s.imag(), std::abs(s) / static_cast<double>(c)});
    }
    return 0;
}

int run_orbit(const Params& p) {
    const auto a = alpha_arg(p);
    const auto built = flow_arg(p, a);
    std::mt19937_64 rng(static_cast<std::uint64_t>(p.i64("seed")));
    const ProductPoint P0 = start_arg(p.str("start"), rng);
    const std::int64_t N = p.i64("n"), stride = p.i64("stride");
    if (stride < 1) throw validation_error("--stride must be positive");
    const std::string method = p.str("method");
    Output out(p.str("out"));
    io::CsvWriter csv(out.stream(), p.hash(), built.tail_bound, {"n", "t", "x", "y", "z"});
    const auto emit = [&](std::int64_t n, const ProductPoint& P) {
        csv.row({n, P.t, P.p.rep().x, P.p.rep().y, P.p.rep().z});
    };
    if (method == "step") {
        OrbitStream s(built.flow, P0);
        emit(0, P0);
        for (std::int64_t n = 1; n <= N; ++n) {
            s.advance();
            if (n % stride == 0) emit(n, s.current());
        }
        return 0;
    }
    if (method != "closed" && method != "geometric") throw validation_error("--method must be step, closed or geometric");
    const SumMethod sm = method == "closed" ? SumMethod::direct : SumMethod::geometric;
    for (std::int64_t n = 0; n <= N; n += stride) emit(n, orbit_closed_form(built.flow, P0, n, sm));
    return 0;
}

struct ShadowSetup {
    io::ParsedAlpha alpha;
    DenominatorClassification cls;
    Conjugacy conj;
    int k_index = 0;
    double epsilon = 0.0;
    std::int64_t L = 0;
    std::vector<ProductPoint> trials;
};

void add_shadow(Params& p) {
    add_alpha(p, "liouville:3,2");
    p.add("B", "3", "classification exponent B > 2");
    p.add("phi", R"({"real":true,"coeffs":[[2,0.25,0],[-2,0.25,0]]})", "phi series (resonant modes are kept)");
    p.add("psi", R"({"real":true,"coeffs":[[2,0,-0.1],[-2,0,0.1]]})", "psi series");
    p.add("truncation", "64", "frequency truncation for the cobounding series");
    p.add("k", "0", "convergent index (0 = first index with q_k in Q_sharp)");
    p.add("eps", "0.01", "epsilon (1/epsilon must be an integer)");
    p.add("trials", "100", "number of random trial points");
    p.add("seed", "1", "random seed");
    p.add("budget", "100000000", "step budget");
}

ShadowSetup shadow_setup(const Params& p) {
    ShadowSetup s{alpha_arg(p), {}, {}, 0, 0.0, 0, {}};
    s.cls = classify(s.alpha.cf, p.num("B"));
    s.conj = build_conjugacy(series_arg(p.str("phi")), series_arg(p.str("psi")), s.alpha.cf, s.cls, TailProfile{},
                             p.i64("truncation"));
    s.k_index = static_cast<int>(p.i64("k"));
    if (s.k_index == 0) {
        const auto sharp = s.cls.sharp_indices();
        if (sharp.empty()) throw validation_error("Q_sharp(B) is empty for this alpha");
        s.k_index = sharp.front();
    }
    s.epsilon = p.num("eps");
    s.L = grid_lipschitz(s.conj.T1, s.epsilon);
    std::mt19937_64 rng(static_cast<std::uint64_t>(p.i64("seed")));
    for (std::int64_t i = 0; i < p.i64("trials"); ++i) s.trials.push_back(random_point(rng));
    return s;
}

void write_shadow_csv(const Params& p, const ShadowSetup& s, const ShadowingReport& r) {
    Output out(p.str("out"));
    io::CsvWriter csv(out.stream(), p.hash(), s.conj.tail_bound,
                      {"trial", "t", "x", "y", "z", "grid_distance", "max_pointwise", "average"});
    for (std::size_t i = 0; i < r.trials.size(); ++i) {
        const auto& tr = r.trials[i];
        const auto& g = tr.start.p.rep();
        csv.row({static_cast<std::int64_t>(i), tr.start.t, g.x, g.y, g.z, tr.initial_distance, tr.max_pointwise,
                 tr.average});
    }
}

int run_shadow(const Params& p) {
    const auto s = shadow_setup(p);
    const auto r = verify_shadowing(s.conj.T1, s.alpha.cf, s.cls, s.k_index, s.epsilon, s.L, s.trials, p.i64("budget"),
                                    3, thread_count());
    write_shadow_csv(p, s, r);
    std::cerr << "q_k=" << r.q << " n_k=" << r.n_k << " L=" << r.L << " #F(k)=" << r.grid_cardinality
              << " max_pointwise=" << io::format_double(r.max_pointwise) << (r.success ? " (< 20 eps)" : " (>= 20 eps)")
              << '\n';
    return 0;
}

int run_complexity(const Params& p) {
    const auto s = shadow_setup(p);
    const unsigned threads = thread_count();
    const auto r = verify_shadowing(s.conj.T1, s.alpha.cf, s.cls, s.k_index, s.epsilon, s.L, s.trials, p.i64("budget"),
                                    3, threads);
    write_shadow_csv(p, s, r);
    std::mt19937_64 rng(static_cast<std::uint64_t>(p.i64("seed")) + 1);
    const auto sample = empirical_sample(s.conj.T1, random_point(rng), p.i64("burn-in"), p.i64("sample"), 1);
    const auto cover = estimate_sn(s.conj.T1, sample, r.n_k, 20.0 * s.epsilon, 3, threads);
    json rep = {{"config_hash", p.hash()},
                {"n", cover.n},
                {"epsilon", cover.epsilon},
                {"centers_used", cover.centers_used},
                {"covered_mass", cover.covered_mass},
                {"sample_size", cover.sample_size},
                {"q_k", r.q},
                {"n_k", r.n_k},
                {"L", r.L},
                {"grid_cardinality", r.grid_cardinality},
                {"max_pointwise", r.max_pointwise},
                {"shadowing_ok", r.success},
                {"tail_bound", s.conj.tail_bound}};
    const std::string path = p.str("json");
    if (path == "-") {
        std::cout << rep.dump(2) << '\n';
    } else {
        std::ofstream f(path);
        if (!f) throw error("cannot open " + path + " for writing");
        f << rep.dump(2) << '\n';
    }
    return 0;
}

int run_distality(const Params& p) {
    const auto a = alpha_arg(p);
    const auto built = flow_arg(p, a);
    const std::int64_t N = p.i64("n");
    auto checkpoints = io::parse_int_list(p.str("checkpoints"));
    std::erase_if(checkpoints, [N](std::int64_t c) { return c > N; });
    if (checkpoints.empty() || checkpoints.back() != N) checkpoints.push_back(N);
    std::mt19937_64 rng(static_cast<std::uint64_t>(p.i64("seed")));
    Output out(p.str("out"));
    io::CsvWriter csv(out.stream(), p.hash(), built.tail_bound, {"pair", "n", "window_min", "initial_distance"});
    for (std::int64_t i = 0; i < p.i64("pairs"); ++i) {
        const ProductPoint P = random_point(rng), Q = random_point(rng);
        const auto r = distality_probe(built.flow, P, Q, N, 3, checkpoints);
        const double d0 = d_prod(P, Q);
        for (std::size_t c = 0; c < r.checkpoints.size(); ++c) csv.row({i, r.checkpoints[c], r.window_min[c], d0});
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"skewmu: Heisenberg skew products, Mobius correlations and covering estimates"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config; keys are long option names");

    std::vector<std::pair<std::unique_ptr<Params>, int (*)(const Params&)>> commands;
    const auto sub = [&](const std::string& name, const std::string& help, int (*fn)(const Params&)) -> Params& {
        auto* cmd = app.add_subcommand(name, help);
        commands.emplace_back(std::make_unique<Params>(cmd, name), fn);
        return *commands.back().first;
    };

    auto& sieve = sub("sieve", "build a Mobius table and write the cache file", run_sieve);
    sieve.add("n", "1000000", "table size");
    sieve.add("method", "linear", "linear or segmented");
    sieve.add("out", "mu.bin", "cache file");

    auto& conv = sub("convergents", "partial quotients, convergents and their B-class", run_convergents);
    add_alpha(conv, "golden");
    conv.add("k", "20", "rows to print");
    conv.add("B", "3", "classification exponent B > 2");
    conv.add("out", "-", "CSV output");

    auto& dec = sub("decompose", "split a series over M1(B)/M2(B) and solve for g", run_decompose);
    add_alpha(dec, "golden");
    dec.add("B", "3", "classification exponent B > 2");
    dec.add("f", "cos", "series (preset or JSON)");
    dec.add("truncation", "64", "tail-bound direct-sum range");
    dec.add("out", "-", "CSV output");

    auto& corr = sub("correlate", "Mobius correlation averages along an orbit", run_correlate);
    add_alpha(corr, "rat:1/2");
    add_flow(corr, "t");
    corr.add("obs", "fA", "observable (preset or JSON)");
    corr.add("n", "1000000", "orbit length N");
    corr.add("checkpoints", "1e3,1e4,1e5,1e6", "checkpoint list");
    corr.add("start", "random", "'random' or t,x,y,z");
    corr.add("seed", "1", "random seed");
    corr.add_flag("control", "use all-ones weights instead of mu");
    corr.add("mobius-cache", "", "optional sieve cache file");
    corr.add("out", "-", "CSV output");

    auto& exps = sub("expsum", "sum of mu(n) e(f(n)) over an arithmetic progression", run_expsum);
    exps.add("poly", "0,0.5", "coefficients c0,c1,... of f");
    exps.add("a", "0", "residue");
    exps.add("q", "1", "modulus");
    exps.add("n", "1000000", "N");
    exps.add("checkpoints", "1e4,1e5,1e6", "checkpoint list");
    exps.add("mobius-cache", "", "optional sieve cache file");
    exps.add("out", "-", "CSV output");

    auto& cplx = sub("complexity", "shadowing check plus a greedy covering estimate", run_complexity);
    add_shadow(cplx);
    cplx.add("sample", "300", "empirical sample size");
    cplx.add("burn-in", "1000", "burn-in steps before sampling");
    cplx.add("json", "-", "JSON covering report");
    cplx.add("out", "shadow.csv", "CSV of per-trial shadowing distances");

    auto& shadow = sub("shadow", "shadowing of random points by the F(k) grid", run_shadow);
    add_shadow(shadow);
    shadow.add("out", "-", "CSV output");

    auto& dist = sub("distality", "minimum orbit distance of random pairs", run_distality);
    add_alpha(dist, "golden");
    add_flow(dist, "s");
    dist.add("n", "100000", "orbit length");
    dist.add("pairs", "20", "number of random pairs");
    dist.add("seed", "1", "random seed");
    dist.add("checkpoints", "1e3,1e4,1e5", "window ends");
    dist.add("out", "-", "CSV output");

    auto& orb = sub("orbit", "orbit coordinates", run_orbit);
    add_alpha(orb, "golden");
    add_flow(orb, "t");
    orb.add("n", "100", "orbit length");
    orb.add("stride", "1", "emit every stride-th point");
    orb.add("start", "random", "'random' or t,x,y,z");
    orb.add("seed", "1", "random seed");
    orb.add("method", "step", "step, closed or geometric");
    orb.add("out", "-", "CSV output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_validation;
    }

    try {
        json file = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw validation_error("cannot read config " + config_path);
            try {
                file = json::parse(in);
            } catch (const json::exception& e) {
                throw validation_error("bad config " + config_path + ": " + e.what());
            }
            if (!file.is_object()) throw validation_error("config must be a JSON object");
        }
        for (auto& entry : commands) entry.first->resolve(file);
        for (auto& [params, fn] : commands)
            if (params->parsed()) return fn(*params);
        return exit_validation;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const undecidable_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const small_divisor_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const precision_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const std::bad_alloc&) {
        std::cerr << "error: out of memory\n";
        return exit_resource;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_resource;
    }
}
