// Command-line front end. Exit codes: 0 all checks passed, 1 a check failed
// or a domain error, 2 usage, parse or I/O error.
#include "nilspace/gowers.hpp"
#include "nilspace/homogeneity.hpp"
#include "nilspace/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using nlohmann::json;
using namespace nilspace;

namespace {

constexpr const char* kSchemaVersion = "1.0";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Collected while a command runs; turned into the report at the end.
struct Report {
    std::vector<std::string> argv;
    std::string digest_input;
    json results = json::object();
    json checks = json::array();

    void check(const std::string& name, bool pass) {
        checks.push_back({{"name", name}, {"status", pass ? "pass" : "fail"}});
    }
    bool all_pass() const {
        for (const auto& c : checks)
            if (c["status"] != "pass") return false;
        return true;
    }
};

json num(double v, double tol) { return {{"value", v}, {"tolerance", tol}}; }
json exact(std::int64_t v) { return {{"value", v}, {"tolerance", 0}}; }
json complex_num(Complex z, double tol) { return {{"re", z.real()}, {"im", z.imag()}, {"tolerance", tol}}; }

std::string fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_file(const std::string& path, Report& rep) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    rep.digest_input += path + '\n' + ss.str();
    return ss.str();
}

json read_json(const std::string& path, Report& rep) {
    try {
        return json::parse(read_file(path, rep));
    } catch (const json::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
}

json parse_inline_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw UsageError(what + ": " + e.what());
    }
}

// Parsing boundary: library parse failures become usage errors.
template <class Fn>
auto parsed(Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    } catch (const json::exception& e) {
        throw UsageError(e.what());
    }
}

FilteredGroup parse_X(const std::string& text) {
    return parsed([&] { return parse_filtered_any(text); });
}

std::vector<std::int64_t> parse_ints(const std::string& text) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoll(item, &used));
            while (used < item.size() && item[used] == ' ') ++used;
            if (used != item.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw UsageError("expected comma-separated integers, got \"" + text + "\"");
        }
    }
    return out;
}

// An element is an integer (rank one) or an array of residues.
Residues element_from_json(const json& v, const FiniteAbelianPGroup& g) {
    Residues r;
    if (v.is_number_integer()) r = {v.get<std::int64_t>()};
    else if (v.is_array()) r = v.get<Residues>();
    else throw UsageError("group element must be an integer or an array of integers");
    if (r.size() != g.rank()) throw UsageError("group element has wrong length for " + g.to_string());
    return g.reduce(r);
}

json element_to_json(const Residues& r) { return r; }

FpFunction fp_function_from_json(const json& j) {
    return parsed([&] {
        std::int64_t p = j.at("p").get<std::int64_t>();
        int n = j.at("n").get<int>();
        std::vector<Complex> values;
        for (const auto& v : j.at("values")) {
            if (v.is_array()) values.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
            else values.emplace_back(v.get<double>(), 0.0);
        }
        return FpFunction(p, n, values);
    });
}

PolyMap polymap_from_json(const json& j) {
    return parsed([&] {
        PolyMap f(j.at("n").get<int>(), parse_filtered_any(j.at("target").get<std::string>()));
        for (const auto& c : j.at("coeffs")) {
            auto w = c.at("w").get<MultiIndex>();
            if (static_cast<int>(w.size()) != f.n) throw std::invalid_argument("multi-index has wrong length");
            f.set(w, element_from_json(c.at("a"), f.target.group()));
        }
        return f;
    });
}

json polymap_to_json(const PolyMap& f) {
    json coeffs = json::array();
    for (const auto& [w, a] : f.normalized().coeffs) coeffs.push_back({{"w", w}, {"a", a}});
    return {{"n", f.n}, {"target", f.target.to_string()}, {"coeffs", coeffs}};
}

// Table on {0,1}^n; top vertex may be omitted for corners.
CubeMap cube_from_json(const json& values, const FilteredGroup& F, bool corner) {
    const std::size_t len = values.size();
    int n = 0;
    while ((std::size_t{1} << n) < len + (corner ? 1 : 0)) ++n;
    const std::size_t full = std::size_t{1} << n;
    if (len != full && !(corner && len + 1 == full)) throw UsageError("cube table length must be 2^n");
    CubeMap q(F.group_ptr(), n);
    for (std::size_t v = 0; v < len; ++v) q.set(static_cast<std::uint32_t>(v), element_from_json(values[v], F.group()));
    return q;
}

json filtration_json(const FilteredGroup& F) {
    json levels = json::array();
    for (int i = 1; i <= F.degree(); ++i) levels.push_back(F.level(i).exponents);
    return {{"text", F.to_string()}, {"group", F.group().to_string()}, {"degree", F.degree()}, {"level_exponents", levels}};
}

std::string text_value(const json& v) {
    if (v.is_object() && v.contains("value")) return v["value"].dump();
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

void emit(const Report& rep, bool as_json, double ms) {
    if (as_json) {
        json out{{"schema_version", kSchemaVersion},
                 {"command", rep.argv},
                 {"inputs_digest", fnv1a(rep.digest_input)},
                 {"results", rep.results},
                 {"checks", rep.checks},
                 {"status", rep.all_pass() ? "pass" : "fail"},
                 {"wall_time_ms", ms}};
        std::cout << out.dump(2) << '\n';
        return;
    }
    for (const auto& [k, v] : rep.results.items()) std::cout << k << ": " << text_value(v) << '\n';
    for (const auto& c : rep.checks)
        std::cout << (c["status"] == "pass" ? "PASS " : "FAIL ") << c["name"].get<std::string>() << '\n';
}

// ---------------------------------------------------------------------------

void cmd_catalog(Report& rep, std::int64_t p, int k, std::uint64_t bound) {
    auto members = parsed([&] { return enumerate_Qpk(p, k, bound); });
    json list = json::array();
    for (const auto& m : members) {
        list.push_back({{"name", m.name()},
                        {"multiplicities", m.a},
                        {"log_order", m.log_order()},
                        {"filtration", m.realize().to_string()}});
    }
    rep.results["count"] = exact(static_cast<std::int64_t>(members.size()));
    rep.results["members"] = list;
}

void cmd_homog_check(Report& rep, const std::string& X) {
    FilteredGroup F = parse_X(X);
    int bad = p_homogeneity_violation(F);
    json structure = json::array();
    for (int i = 1; i <= F.degree(); ++i) structure.push_back(structure_group(F, i).to_string());
    rep.results["filtration"] = filtration_json(F);
    rep.results["p_homogeneous"] = bad < 0;
    rep.results["violating_index"] = exact(bad);
    rep.results["structure_groups"] = structure;
    rep.check("p-homogeneous", bad < 0);
}

void cmd_homog_classify(Report& rep, const std::string& X) {
    FilteredGroup F = parse_X(X);
    auto c = classify_cyclic(F);
    rep.results["filtration"] = filtration_json(F);
    rep.results["p_homogeneous"] = c.homogeneous;
    rep.results["delta"] = c.delta;
    rep.results["violating_index"] = exact(c.violating_index);
    rep.check("p-homogeneous", c.homogeneous);
}

void cmd_quotient(Report& rep, const std::string& X, const std::vector<std::string>& H, int audit_n) {
    auto expr = parsed([&] { return parse_nilspace(X); });
    if (!expr.all_blocks()) throw UsageError("--X must be a product of building blocks");
    auto blocks = expr.block_list();
    int kmax = 0;
    for (const auto& b : blocks) kmax = std::max(kmax, b.k);
    std::size_t dim = 0;
    for (const auto& b : blocks)
        if (b.k == kmax && (b.k - b.l) % (b.p - 1) == 0) ++dim;
    std::vector<FpVector> vecs;
    for (const auto& h : H) {
        auto v = parse_ints(h);
        if (v.size() != dim) throw UsageError("--H vectors need " + std::to_string(dim) + " entries");
        vecs.push_back(FpVector(v.begin(), v.end()));
    }
    auto q = quotient_by_subspace(blocks, FpSubspace::span(expr.p, dim, vecs));
    bool fib = q.projection && check_fibration(*q.projection, audit_n, FibrationMode::Both);
    json A = q.A;
    rep.results["quotient"] = q.name();
    rep.results["quotient_filtration"] = realize(q.factors, expr.p, kmax).to_string();
    rep.results["dim_H"] = exact(q.dim_H);
    rep.results["log_order_source"] = exact(q.log_order_source);
    rep.results["log_order_quotient"] = exact(q.log_order_quotient);
    rep.results["change_of_basis_columns"] = A;
    rep.check("phi is a filtered isomorphism", q.phi_is_filtered_iso);
    rep.check("projection is a fibration", fib);
    rep.check("log order drops by dim H", q.log_order_source - q.log_order_quotient == q.dim_H);
}

void cmd_cube_check(Report& rep, const std::string& X, const std::string& values) {
    FilteredGroup F = parse_X(X);
    CubeMap q = cube_from_json(parse_inline_json(values, "--values"), F, false);
    json coeffs = json::array();
    auto a = mobius_coeffs(q);
    for (std::uint32_t v = 0; v < a.vertices(); ++v) coeffs.push_back(a.at(v));
    rep.results["n"] = exact(q.dim());
    rep.results["mobius_coefficients"] = coeffs;
    rep.check("is cube", is_cube(q, F));
}

void cmd_cube_complete(Report& rep, const std::string& X, const std::string& values) {
    FilteredGroup F = parse_X(X);
    CubeMap q = cube_from_json(parse_inline_json(values, "--values"), F, true);
    auto all = complete_corner(Corner{q}, F);
    json list = json::array();
    for (const auto& x : all) list.push_back(x);
    rep.results["n"] = exact(q.dim());
    rep.results["completions"] = list;
    rep.results["count"] = exact(static_cast<std::int64_t>(all.size()));
    rep.check("corner completes", !all.empty());
}

void cmd_cube_count(Report& rep, const std::string& X, int n) {
    FilteredGroup F = parse_X(X);
    rep.results["n"] = exact(n);
    double c = cube_count(F, n);
    if (c < 9007199254740992.0) rep.results["count"] = exact(static_cast<std::int64_t>(c));
    else rep.results["count"] = num(c, c * 1e-15);
}

void cmd_poly_eval(Report& rep, const std::string& file, const std::string& x) {
    PolyMap f = polymap_from_json(read_json(file, rep));
    auto pt = parse_ints(x);
    if (static_cast<int>(pt.size()) != f.n) throw UsageError("--x has wrong length");
    rep.results["value"] = eval(f, pt);
}

void cmd_poly_diff(Report& rep, const std::string& file, const std::string& h) {
    PolyMap f = polymap_from_json(read_json(file, rep));
    auto dir = parse_ints(h);
    if (static_cast<int>(dir.size()) != f.n) throw UsageError("--direction has wrong length");
    rep.results["derivative"] = polymap_to_json(derivative(f, dir));
}

void cmd_poly_check(Report& rep, const std::string& file) {
    PolyMap f = polymap_from_json(read_json(file, rep));
    rep.results["height"] = exact(f.height());
    rep.check("polynomial map is a morphism", is_morphism(f));
}

void cmd_gowers_norm(Report& rep, const std::string& file, int k, bool naive) {
    FpFunction f = fp_function_from_json(read_json(file, rep));
    const double tol = 1e-9;
    rep.results["k"] = exact(k);
    rep.results["norm"] = num(gowers_norm(f, k, naive), tol);
}

void cmd_gowers_search(Report& rep, const std::string& file, int k, const std::string& mode, std::uint64_t budget) {
    FpFunction f = fp_function_from_json(read_json(file, rep));
    SearchMode m = mode == "exhaustive" ? SearchMode::Exhaustive
                   : mode == "coefficient" ? SearchMode::Coefficient
                                          : SearchMode::Auto;
    auto s = inverse_search(f, k, m, budget);
    rep.results["correlation"] = num(s.correlation, 1e-12);
    rep.results["candidates"] = exact(static_cast<std::int64_t>(s.candidates));
    rep.results["partial"] = s.partial;
    rep.results["mode_used"] = s.mode_used == SearchMode::Exhaustive ? "exhaustive" : "coefficient";
    rep.results["best"] = {{"p", s.best.p}, {"n", s.best.n}, {"k", s.best.k}, {"modulus", s.best.modulus()},
                           {"values", s.best.values}};
    rep.check("search completed", !s.partial);
}

void cmd_gowers_gvn(Report& rep, int M, int k, const std::vector<std::string>& files, bool ones, std::int64_t p,
                    int D) {
    std::vector<FpFunction> fs;
    if (ones) {
        auto S = parsed([&] { return gvn_set(p, M, k + 1); });
        for (std::size_t i = 0; i < S.size(); ++i) fs.push_back(constant_function(p, D));
    } else {
        for (const auto& file : files) fs.push_back(fp_function_from_json(read_json(file, rep)));
        if (fs.empty()) throw UsageError("give --f files or --ones");
    }
    rep.results["average"] = complex_num(gvn_average(M, k, fs), 1e-9);
    rep.results["functions"] = exact(static_cast<std::int64_t>(fs.size()));
}

void cmd_gowers_rank1(Report& rep, const std::string& file) {
    json j = read_json(file, rep);
    Rank1Input in = parsed([&] {
        Rank1Input r;
        r.m = j.at("m").get<int>();
        r.s = j.at("s").get<int>();
        r.fiber_of = j.at("fiber_of").get<std::vector<int>>();
        for (const auto& v : j.at("h")) {
            if (v.is_array()) r.h.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
            else r.h.emplace_back(v.get<double>(), 0.0);
        }
        return r;
    });
    auto terms = rank1_decompose(in);
    auto back = rank1_reconstruct(terms, in.m, in.s);
    double err = 0;
    for (std::size_t i = 0; i < back.size(); ++i) err = std::max(err, std::abs(back[i] - in.h[i]));
    rep.results["terms"] = exact(static_cast<std::int64_t>(terms.size()));
    rep.results["bound"] = exact(static_cast<std::int64_t>(rank1_bound(in)));
    rep.results["max_reconstruction_error"] = num(err, 1e-9);
    rep.check("reconstruction", err <= 1e-9);
    rep.check("term count within bound", terms.size() <= rank1_bound(in));
}

void cmd_balance(Report& rep, const std::string& target, const std::string& file, int n) {
    FilteredGroup F = parse_X(target);
    json j = read_json(file, rep);
    BoxMap phi = parsed([&] {
        std::int64_t p = j.at("p").get<std::int64_t>();
        int D = j.at("D").get<int>();
        BoxMap b(F.group_ptr(), std::vector<std::int64_t>(static_cast<std::size_t>(D), 0),
                 std::vector<int>(static_cast<std::size_t>(D), static_cast<int>(p - 1)));
        const auto& values = j.at("values");
        if (values.size() != b.points()) throw std::invalid_argument("phi needs p^D values");
        for (std::uint64_t x = 0; x < b.points(); ++x) b.set(x, element_from_json(values[x], F.group()));
        return b;
    });
    std::int64_t p = j.at("p").get<std::int64_t>();
    rep.results["n"] = exact(n);
    rep.results["distance"] = num(balance_distance(phi, p, F, n), 1e-12);
}

int cmd_verify(Report& rep, const std::string& level, std::uint64_t seed, const std::string& fault) {
    VerifyOptions o;
    o.quick = level == "quick";
    o.seed = seed;
    o.inject_fault = fault;
    json list = json::array();
    for (auto fn : all_criteria()) {
        auto r = fn(o);
        list.push_back({{"id", r.id},
                        {"name", r.name},
                        {"status", r.pass ? "pass" : "fail"},
                        {"detail", r.detail},
                        {"seconds", num(r.seconds, 0.01)},
                        {"time_limit_seconds", r.time_limit_seconds}});
        rep.check("C" + std::to_string(r.id) + " " + r.name, r.pass);
        if (!r.pass) std::cerr << "FAIL C" << r.id << " " << r.name << ": " << r.detail << '\n';
    }
    rep.results["level"] = level;
    rep.results["seed"] = exact(static_cast<std::int64_t>(seed));
    rep.results["criteria"] = list;
    rep.results["tolerances"] = {{"gowers_norm", 1e-9}, {"ncpoly_flatness", 1e-9}, {"fourier_identity", 1e-9},
                                 {"gvn_vs_brute", 1e-9}, {"inverse_exact", 1e-9}, {"inverse_noisy_min", 0.9},
                                 {"rank1_reconstruction", 0}};
    return 0;
}

bool valid_prime(std::int64_t p) {
    if (p < 2) return false;
    for (std::int64_t d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nilspace: filtered p-groups, cubes, polynomial maps and Gowers analysis"};
    app.require_subcommand(1);
    app.fallthrough();
    bool as_json = false;
    std::uint64_t seed = 1;
    app.add_flag("--json", as_json, "Emit a JSON report");
    app.add_option("--seed", seed, "Seed for randomized sweeps");

    auto prime = CLI::Validator(
        [](std::string& s) {
            try {
                if (valid_prime(std::stoll(s))) return std::string();
            } catch (...) {
            }
            return "not a prime: " + s;
        },
        "PRIME");

    Report rep;
    for (int i = 0; i < argc; ++i) rep.argv.emplace_back(argv[i]);
    for (int i = 1; i < argc; ++i) rep.digest_input += std::string(argv[i]) + '\0';
    std::function<int()> action;

    std::int64_t p = 2;
    int k = 1, n = 1, M = 1, D = 1;
    std::uint64_t bound = 0, budget = 10000000;
    std::string X, values, file, x_text, h_text, mode = "auto", level, fault, target;
    std::vector<std::string> H, files;
    bool naive = false, ones = false;
    int audit_n = 2;

    auto add_catalog = [&](CLI::App* parent, const std::string& name) {
        auto* c = parent->add_subcommand(name, "Enumerate Q_{p,k} members of bounded order");
        c->add_option("--p", p)->required()->check(prime);
        c->add_option("--k", k)->required()->check(CLI::Range(1, 64));
        c->add_option("--bound", bound)->required();
        c->callback([&] { action = [&] { cmd_catalog(rep, p, k, bound); return 0; }; });
    };
    auto add_check = [&](CLI::App* parent, const std::string& name) {
        auto* c = parent->add_subcommand(name, "Algebraic p-homogeneity test");
        c->add_option("--X", X, "Filtration or product expression")->required();
        c->callback([&] { action = [&] { cmd_homog_check(rep, X); return 0; }; });
    };
    auto add_quotient = [&](CLI::App* parent, const std::string& name) {
        auto* c = parent->add_subcommand(name, "Quotient of a building-block product by a subspace");
        c->add_option("--X", X)->required();
        c->add_option("--H", H, "Spanning vector, comma-separated; repeatable");
        c->add_option("--audit-n", audit_n, "Dimension bound for the fibration audit")->check(CLI::Range(0, 5));
        c->callback([&] { action = [&] { cmd_quotient(rep, X, H, audit_n); return 0; }; });
    };

    add_catalog(&app, "catalog");
    add_check(&app, "check-homog");
    add_quotient(&app, "quotient");
    auto* homog = app.add_subcommand("homog", "Homogeneity commands");
    homog->require_subcommand(1);
    add_check(homog, "check");
    add_quotient(homog, "quotient");
    add_catalog(homog, "catalog");
    {
        auto* c = homog->add_subcommand("classify", "Cyclic classification");
        c->add_option("--X", X)->required();
        c->callback([&] { action = [&] { cmd_homog_classify(rep, X); return 0; }; });
    }

    auto* cube = app.add_subcommand("cube", "Cube commands");
    cube->require_subcommand(1);
    {
        auto* c = cube->add_subcommand("check", "Is a table on {0,1}^n a cube");
        c->add_option("--X", X)->required();
        c->add_option("--values", values, "JSON array of 2^n elements")->required();
        c->callback([&] { action = [&] { cmd_cube_check(rep, X, values); return 0; }; });
        auto* d = cube->add_subcommand("complete", "All completions of a corner");
        d->add_option("--X", X)->required();
        d->add_option("--values", values, "JSON array of 2^n - 1 or 2^n elements")->required();
        d->callback([&] { action = [&] { cmd_cube_complete(rep, X, values); return 0; }; });
        auto* e = cube->add_subcommand("count", "|Cu^n|");
        e->add_option("--X", X)->required();
        e->add_option("--n", n)->required()->check(CLI::Range(0, 30));
        e->callback([&] { action = [&] { cmd_cube_count(rep, X, n); return 0; }; });
    }

    auto* poly = app.add_subcommand("poly", "Polynomial map commands");
    poly->require_subcommand(1);
    {
        auto* c = poly->add_subcommand("eval", "Evaluate at a point");
        c->add_option("--poly", file)->required();
        c->add_option("--x", x_text)->required();
        c->callback([&] { action = [&] { cmd_poly_eval(rep, file, x_text); return 0; }; });
        auto* d = poly->add_subcommand("diff", "Derivative along h");
        d->add_option("--poly", file)->required();
        d->add_option("--direction", h_text)->required();
        d->callback([&] { action = [&] { cmd_poly_diff(rep, file, h_text); return 0; }; });
        auto* e = poly->add_subcommand("check", "Morphism test");
        e->add_option("--poly", file)->required();
        e->callback([&] { action = [&] { cmd_poly_check(rep, file); return 0; }; });
    }

    auto add_balance = [&](CLI::App* parent) {
        auto* c = parent->add_subcommand("balance", "Balance distance of a map Z_p^D -> X");
        c->add_option("--X", target, "Target filtration")->required();
        c->add_option("--phi", file, "JSON table {p, D, values}")->required();
        c->add_option("--n", n)->required()->check(CLI::Range(0, 6));
        c->callback([&] { action = [&] { cmd_balance(rep, target, file, n); return 0; }; });
    };

    auto* gowers = app.add_subcommand("gowers", "Gowers-norm commands");
    gowers->require_subcommand(1);
    {
        auto* c = gowers->add_subcommand("norm", "||f||_{U^k}");
        c->add_option("--f", file)->required();
        c->add_option("--k", k)->required()->check(CLI::Range(1, 12));
        c->add_flag("--naive", naive, "Direct 2^k-fold sum");
        c->callback([&] { action = [&] { cmd_gowers_norm(rep, file, k, naive); return 0; }; });
        auto* d = gowers->add_subcommand("search", "Best correlating non-classical polynomial");
        d->add_option("--f", file)->required();
        d->add_option("--k", k)->required()->check(CLI::Range(1, 12));
        d->add_option("--mode", mode)->check(CLI::IsMember({"auto", "exhaustive", "coefficient"}));
        d->add_option("--budget", budget);
        d->callback([&] { action = [&] { cmd_gowers_search(rep, file, k, mode, budget); return 0; }; });
        auto* e = gowers->add_subcommand("gvn", "Generalized von Neumann average");
        e->add_option("--M", M)->required()->check(CLI::Range(1, 8));
        e->add_option("--k", k)->required()->check(CLI::Range(1, 64));
        e->add_option("--f", files, "One JSON function per element of S_{k+1,M}");
        e->add_flag("--ones", ones, "Use all-ones functions");
        e->add_option("--p", p)->check(prime);
        e->add_option("--D", D)->check(CLI::Range(1, 12));
        e->callback([&] { action = [&] { cmd_gowers_gvn(rep, M, k, files, ones, p, D); return 0; }; });
        auto* f = gowers->add_subcommand("rank1", "Rank-one decomposition");
        f->add_option("--input", file)->required();
        f->callback([&] { action = [&] { cmd_gowers_rank1(rep, file); return 0; }; });
        add_balance(gowers);
    }
    add_balance(&app);

    {
        auto* c = app.add_subcommand("verify", "Run the acceptance suite");
        c->add_option("level", level)->required()->check(CLI::IsMember({"quick", "full"}));
        c->add_option("--inject-fault", fault)->check(CLI::IsMember({"m_i_table"}));
        c->callback([&] { action = [&] { return cmd_verify(rep, level, seed, fault); }; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        action();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    emit(rep, as_json, ms);
    return rep.all_pass() ? 0 : 1;
}
