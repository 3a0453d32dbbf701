#include "nilspace/gowers.hpp"
#include "nilspace/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace nilspace {

namespace {

std::uint64_t checked_size(std::int64_t p, int n) {
    if (!is_prime(p)) throw std::invalid_argument("FpFunction: p must be prime");
    if (n < 0) throw std::invalid_argument("FpFunction: n must be >= 0");
    std::uint64_t s = 1;
    for (int i = 0; i < n; ++i) {
        s *= static_cast<std::uint64_t>(p);
        if (s > kMaxFpFunctionSize) throw std::invalid_argument("FpFunction: p^n exceeds 10^6");
    }
    return s;
}

Complex unit(std::int64_t j, std::int64_t m) {
    double theta = 2.0 * std::numbers::pi * static_cast<double>(mod_floor(j, m)) / static_cast<double>(m);
    return {std::cos(theta), std::sin(theta)};
}

}  // namespace

FpFunction::FpFunction(std::int64_t p_, int n_) : p(p_), n(n_), values(checked_size(p_, n_), Complex(0.0)) {}

FpFunction::FpFunction(std::int64_t p_, int n_, std::vector<Complex> v) : p(p_), n(n_), values(std::move(v)) {
    if (values.size() != checked_size(p, n)) throw std::invalid_argument("FpFunction: table size is not p^n");
}

bool FpFunction::one_bounded() const {
    return std::all_of(values.begin(), values.end(), [](Complex c) { return std::abs(c) <= 1.0 + 1e-12; });
}

std::uint64_t FpFunction::index_of(const std::vector<std::int64_t>& x) const {
    if (static_cast<int>(x.size()) != n) throw std::invalid_argument("FpFunction: point dimension mismatch");
    std::uint64_t idx = 0;
    for (int i = n; i-- > 0;) idx = idx * static_cast<std::uint64_t>(p) + static_cast<std::uint64_t>(mod_floor(x[i], p));
    return idx;
}

std::vector<std::int64_t> FpFunction::point_at(std::uint64_t index) const {
    std::vector<std::int64_t> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        x[i] = static_cast<std::int64_t>(index % static_cast<std::uint64_t>(p));
        index /= static_cast<std::uint64_t>(p);
    }
    return x;
}

std::uint64_t FpFunction::add_index(std::uint64_t a, std::uint64_t b) const {
    const auto P = static_cast<std::uint64_t>(p);
    std::uint64_t out = 0, stride = 1;
    for (int i = 0; i < n; ++i) {
        out += ((a % P + b % P) % P) * stride;
        a /= P;
        b /= P;
        stride *= P;
    }
    return out;
}

FpFunction constant_function(std::int64_t p, int n, Complex c) {
    FpFunction f(p, n);
    std::fill(f.values.begin(), f.values.end(), c);
    return f;
}

namespace {

std::vector<std::uint64_t> shift_table(const FpFunction& f, std::uint64_t h) {
    std::vector<std::uint64_t> s(f.size());
    for (std::uint64_t x = 0; x < f.size(); ++x) s[x] = f.add_index(x, h);
    return s;
}

FpFunction derivative_by_index(const FpFunction& f, std::uint64_t h) {
    FpFunction out(f.p, f.n);
    for (std::uint64_t x = 0; x < f.size(); ++x) out.values[x] = f.values[f.add_index(x, h)] * std::conj(f.values[x]);
    return out;
}

Complex mean(const std::vector<Complex>& v) {
    Complex s = 0;
    for (auto c : v) s += c;
    return s / static_cast<double>(v.size());
}

// ||f||_{U^k}^{2^k} by the derivative recursion.
double gowers_power(const FpFunction& f, int k) {
    if (k == 1) return std::norm(mean(f.values));
    std::vector<double> per_h(f.size());
    for (std::uint64_t h = 0; h < f.size(); ++h) per_h[h] = gowers_power(derivative_by_index(f, h), k - 1);
    return std::accumulate(per_h.begin(), per_h.end(), 0.0) / static_cast<double>(f.size());
}

double gowers_power_naive(const FpFunction& f, int k) {
    const std::uint64_t N = f.size();
    double total = 1;
    for (int i = 0; i <= k; ++i) total *= static_cast<double>(N);
    if (total > 1e8) throw std::invalid_argument("gowers_norm: naive audit exceeds 10^8 parameter tuples");
    std::vector<Complex> per_x(N);
    parallel_for(N, [&](std::uint64_t x) {
        std::vector<std::uint64_t> h(static_cast<std::size_t>(k), 0);
        std::vector<std::uint64_t> vert(std::size_t{1} << k);
        Complex acc = 0;
        while (true) {
            vert[0] = x;
            Complex prod = f.values[x];
            for (std::uint32_t v = 1; v < vert.size(); ++v) {
                int low = std::countr_zero(v);
                vert[v] = f.add_index(vert[v & (v - 1)], h[static_cast<std::size_t>(low)]);
                Complex val = f.values[vert[v]];
                prod *= (std::popcount(v) % 2) ? std::conj(val) : val;
            }
            acc += prod;
            std::size_t i = 0;
            for (; i < h.size(); ++i) {
                if (++h[i] < N) break;
                h[i] = 0;
            }
            if (i == h.size()) break;
        }
        per_x[x] = acc;
    });
    Complex s = 0;
    for (auto c : per_x) s += c;
    s /= total;
    if (std::abs(s.imag()) > 1e-9) throw std::logic_error("gowers_norm: average has an imaginary part");
    return s.real();
}

}  // namespace

FpFunction mult_derivative(const FpFunction& f, const std::vector<std::int64_t>& h) {
    return derivative_by_index(f, f.index_of(h));
}

double gowers_norm(const FpFunction& f, int k, bool naive) {
    if (k < 1) throw std::invalid_argument("gowers_norm: k must be >= 1");
    double power;
    if (naive) {
        power = gowers_power_naive(f, k);
    } else if (k == 1) {
        power = gowers_power(f, 1);
    } else {
        std::vector<double> per_h(f.size());
        parallel_for(f.size(), [&](std::uint64_t h) { per_h[h] = gowers_power(derivative_by_index(f, h), k - 1); }, 1);
        power = std::accumulate(per_h.begin(), per_h.end(), 0.0) / static_cast<double>(f.size());
    }
    if (power < 0) power = 0;
    return std::pow(power, 1.0 / static_cast<double>(1u << k));
}

std::vector<Complex> fourier_transform(const FpFunction& f) {
    const std::uint64_t N = f.size();
    std::vector<Complex> out(N);
    parallel_for(N, [&](std::uint64_t xi) {
        auto a = f.point_at(xi);
        Complex acc = 0;
        for (std::uint64_t x = 0; x < N; ++x) {
            auto b = f.point_at(x);
            std::int64_t dot = 0;
            for (int i = 0; i < f.n; ++i) dot += a[i] * b[i];
            acc += f.values[x] * unit(-dot, f.p);
        }
        out[xi] = acc / static_cast<double>(N);
    });
    return out;
}

int ncpoly_r(std::int64_t p, int k) {
    if (k < 1) return 1;
    return (k - 1) / static_cast<int>(p - 1) + 1;
}

namespace {

// All `order`-fold differences of the table along the given directions
// (nondecreasing sequences) vanish mod m.
bool differences_vanish(std::int64_t p, int n, std::int64_t m, const std::vector<std::int64_t>& values, int order,
                        const std::vector<std::uint64_t>& directions) {
    FpFunction shape(p, n);
    const std::uint64_t N = shape.size();
    if (order <= 0) return std::all_of(values.begin(), values.end(), [m](std::int64_t v) { return v % m == 0; });
    std::vector<std::vector<std::uint64_t>> shifts;
    for (auto d : directions) shifts.push_back(shift_table(shape, d));
    std::uint64_t budget = 200000000;
    std::function<bool(const std::vector<std::int64_t>&, std::size_t, int)> rec =
        [&](const std::vector<std::int64_t>& t, std::size_t first, int depth) -> bool {
        std::vector<std::int64_t> d(N);
        for (std::size_t dir = first; dir < shifts.size(); ++dir) {
            if (budget < N) throw std::runtime_error("ncpoly_check: difference budget exhausted");
            budget -= N;
            bool zero = true;
            for (std::uint64_t x = 0; x < N; ++x) {
                d[x] = mod_floor(t[shifts[dir][x]] - t[x], m);
                zero = zero && d[x] == 0;
            }
            if (zero) continue;
            if (depth + 1 == order) return false;
            if (!rec(d, dir, depth + 1)) return false;
        }
        return true;
    };
    return rec(values, 0, 0);
}

std::vector<std::uint64_t> generator_directions(std::int64_t p, int n) {
    std::vector<std::uint64_t> dirs;
    std::uint64_t s = 1;
    for (int i = 0; i < n; ++i) {
        dirs.push_back(s);
        s *= static_cast<std::uint64_t>(p);
    }
    return dirs;
}

}  // namespace

bool ncpoly_check(const NCPoly& P, bool audit) {
    FpFunction shape(P.p, P.n);
    if (P.values.size() != shape.size()) throw std::invalid_argument("ncpoly_check: table size is not p^n");
    if (shape.size() > 10000) throw std::invalid_argument("ncpoly_check: p^n exceeds 10^4");
    std::vector<std::uint64_t> dirs;
    if (audit) {
        if (shape.size() > 81) throw std::invalid_argument("ncpoly_check: audit mode needs p^n <= 81");
        for (std::uint64_t h = 1; h < shape.size(); ++h) dirs.push_back(h);
    } else {
        dirs = generator_directions(P.p, P.n);
    }
    return differences_vanish(P.p, P.n, P.modulus(), P.values, P.k + 1, dirs);
}

int ncpoly_degree(std::int64_t p, int n, int r, const std::vector<std::int64_t>& values) {
    const std::int64_t m = checked_pow(p, r);
    auto dirs = generator_directions(p, n);
    if (std::all_of(values.begin(), values.end(), [m](std::int64_t v) { return mod_floor(v, m) == 0; })) return -1;
    const int limit = (n + 1) * r * static_cast<int>(p) + 1;
    for (int d = 0; d <= limit; ++d)
        if (differences_vanish(p, n, m, values, d + 1, dirs)) return d;
    throw std::logic_error("ncpoly_degree: no finite degree found");
}

NCPoly make_ncpoly(std::int64_t p, int n, int k, std::vector<std::int64_t> values) {
    NCPoly P;
    P.p = p;
    P.n = n;
    P.k = k;
    P.r = ncpoly_r(p, k);
    const std::int64_t m = P.modulus();
    for (auto& v : values) v = mod_floor(v, m);
    P.values = std::move(values);
    P.verified = ncpoly_check(P);
    return P;
}

FpFunction phase(const NCPoly& P) {
    FpFunction f(P.p, P.n);
    if (P.values.size() != f.size()) throw std::invalid_argument("phase: table size is not p^n");
    const std::int64_t m = P.modulus();
    for (std::uint64_t x = 0; x < f.size(); ++x) f.values[x] = unit(P.values[x], m);
    return f;
}

Complex correlation(const FpFunction& f, const NCPoly& P) {
    if (f.p != P.p || f.n != P.n || P.values.size() != f.size())
        throw std::invalid_argument("correlation: dimension mismatch");
    const std::int64_t m = P.modulus();
    Complex acc = 0;
    for (std::uint64_t x = 0; x < f.size(); ++x) acc += f.values[x] * unit(-P.values[x], m);
    return acc / static_cast<double>(f.size());
}

SearchResult inverse_search(const FpFunction& f, int k, SearchMode mode, std::uint64_t budget) {
    if (k < 1) throw std::invalid_argument("inverse_search: k must be >= 1");
    const std::int64_t p = f.p;
    const int r = ncpoly_r(p, k);
    const std::int64_t m = checked_pow(p, r);
    const std::uint64_t N = f.size();
    if (N > 10000) throw std::invalid_argument("inverse_search: p^n exceeds 10^4");

    long double exhaustive_count = std::pow(static_cast<long double>(m), static_cast<long double>(N));
    if (mode == SearchMode::Auto)
        mode = exhaustive_count <= static_cast<long double>(budget) ? SearchMode::Exhaustive : SearchMode::Coefficient;
    if (mode == SearchMode::Exhaustive && exhaustive_count > static_cast<long double>(budget))
        throw std::invalid_argument("inverse_search: exhaustive family exceeds the budget");

    // twiddle[x][j] = f(x) e(-j/m)
    std::vector<Complex> twiddle(N * static_cast<std::uint64_t>(m));
    for (std::uint64_t x = 0; x < N; ++x)
        for (std::int64_t j = 0; j < m; ++j) twiddle[x * m + j] = f.values[x] * unit(-j, m);

    SearchResult res;
    res.mode_used = mode;
    res.best.p = p;
    res.best.n = f.n;
    res.best.k = k;
    res.best.r = r;
    res.best.values.assign(N, 0);
    res.correlation = -1;
    NCPoly cand = res.best;
    auto consider = [&](const std::vector<std::int64_t>& table) {
        cand.values = table;
        if (!ncpoly_check(cand)) return;
        ++res.candidates;
        Complex acc = 0;
        for (std::uint64_t x = 0; x < N; ++x) acc += twiddle[x * m + table[x]];
        double c = std::abs(acc) / static_cast<double>(N);
        if (c > res.correlation + 1e-12) {
            res.correlation = c;
            res.best.values = table;
            res.best.verified = true;
        }
    };

    if (mode == SearchMode::Exhaustive) {
        std::vector<std::int64_t> table(N, 0);
        while (true) {
            consider(table);
            std::uint64_t i = 0;
            for (; i < N; ++i) {
                if (++table[i] < m) break;
                table[i] = 0;
            }
            if (i == N) break;
        }
    } else {
        // Z_{k,l} on Z_{p^r} with the largest l; its exact degree is k.
        FilteredGroup Z = make_Zkl(p, k, k - (r - 1) * static_cast<int>(p - 1));
        BoxMap shape(Z.group_ptr(), std::vector<std::int64_t>(static_cast<std::size_t>(f.n), 0),
                     std::vector<int>(static_cast<std::size_t>(f.n), static_cast<int>(p - 1)));
        std::vector<MultiIndex> monomials;
        std::vector<std::vector<std::int64_t>> choices;
        for (std::uint64_t i = 0; i < shape.points(); ++i) {
            MultiIndex w = shape.offset_at(i);
            int ht = std::accumulate(w.begin(), w.end(), 0);
            if (ht > k) continue;
            std::vector<std::int64_t> opts;
            for (const auto& e : Z.level(ht).elements(Z.group())) opts.push_back(e[0]);
            monomials.push_back(w);
            choices.push_back(opts);
        }
        // binom(x, w) mod m for every monomial and point.
        std::vector<std::vector<std::int64_t>> basis(monomials.size(), std::vector<std::int64_t>(N));
        for (std::size_t t = 0; t < monomials.size(); ++t)
            for (std::uint64_t x = 0; x < N; ++x) {
                auto pt = f.point_at(x);
                std::vector<std::int64_t> w(monomials[t].begin(), monomials[t].end());
                basis[t][x] = mod_floor(multibinom(pt, w), m);
            }
        std::vector<std::size_t> digit(monomials.size(), 0);
        std::uint64_t visited = 0;
        while (true) {
            if (visited++ >= budget) {
                res.partial = true;
                break;
            }
            std::vector<std::int64_t> table(N, 0);
            for (std::size_t t = 0; t < monomials.size(); ++t) {
                std::int64_t c = choices[t][digit[t]];
                if (c == 0) continue;
                for (std::uint64_t x = 0; x < N; ++x)
                    table[x] = static_cast<std::int64_t>((table[x] + static_cast<__int128>(c) * basis[t][x]) % m);
            }
            consider(table);
            std::size_t i = 0;
            for (; i < digit.size(); ++i) {
                if (++digit[i] < choices[i].size()) break;
                digit[i] = 0;
            }
            if (i == digit.size()) break;
        }
    }
    if (res.correlation < 0) res.correlation = 0;
    return res;
}

std::vector<std::vector<int>> gvn_set(std::int64_t p, int M, int r) {
    std::vector<std::vector<int>> out;
    std::vector<int> z(static_cast<std::size_t>(M), 0);
    while (true) {
        if (std::accumulate(z.begin(), z.end(), 0) < r) out.push_back(z);
        int i = 0;
        for (; i < M; ++i) {
            if (++z[i] < p) break;
            z[i] = 0;
        }
        if (i == M) break;
    }
    return out;
}

Complex gvn_average(int M, int k, const std::vector<FpFunction>& fs, std::uint64_t budget) {
    if (M < 1) throw std::invalid_argument("gvn_average: M must be >= 1");
    if (k < 0) throw std::invalid_argument("gvn_average: k must be >= 0");
    if (fs.empty()) throw std::invalid_argument("gvn_average: no functions");
    const std::int64_t p = fs.front().p;
    const int D = fs.front().n;
    for (const auto& f : fs)
        if (f.p != p || f.n != D) throw std::invalid_argument("gvn_average: functions on different domains");
    auto S = gvn_set(p, M, k + 1);
    if (S.size() != fs.size())
        throw std::invalid_argument("gvn_average: expected " + std::to_string(S.size()) + " functions, got " +
                                    std::to_string(fs.size()));
    const std::uint64_t N = fs.front().size();
    long double total = std::pow(static_cast<long double>(N), M + 1);
    if (total > static_cast<long double>(budget)) throw std::invalid_argument("gvn_average: evaluation budget exceeded");

    const FpFunction& shape = fs.front();
    // scaled[c][t] = index of c * t.
    std::vector<std::vector<std::uint64_t>> scaled(static_cast<std::size_t>(p), std::vector<std::uint64_t>(N, 0));
    for (std::int64_t c = 1; c < p; ++c)
        for (std::uint64_t t = 0; t < N; ++t) scaled[c][t] = shape.add_index(scaled[c - 1][t], t);

    std::vector<Complex> per_x(N);
    parallel_for(N, [&](std::uint64_t x) {
        std::vector<std::uint64_t> t(static_cast<std::size_t>(M), 0);
        Complex acc = 0;
        while (true) {
            Complex prod = 1;
            for (std::size_t s = 0; s < S.size(); ++s) {
                std::uint64_t pt = x;
                for (int j = 0; j < M; ++j)
                    if (S[s][j]) pt = shape.add_index(pt, scaled[S[s][j]][t[j]]);
                prod *= fs[s].values[pt];
            }
            acc += prod;
            int i = 0;
            for (; i < M; ++i) {
                if (++t[i] < N) break;
                t[i] = 0;
            }
            if (i == M) break;
        }
        per_x[x] = acc;
    }, 1);
    Complex s = 0;
    for (auto c : per_x) s += c;
    return s / static_cast<double>(total);
}

double cube_count(const FilteredGroup& f, int n) {
    double c = 1;
    for (std::uint32_t w = 0; w < (1u << n); ++w) c *= static_cast<double>(f.level_size(std::popcount(w)));
    return c;
}

double balance_distance(const BoxMap& phi, std::int64_t p, const FilteredGroup& target, int n) {
    if (n < 0 || n > 6) throw std::invalid_argument("balance_distance: n must be in [0,6]");
    if (!(phi.group() == target.group())) throw std::invalid_argument("balance_distance: phi is not into target");
    const int D = static_cast<int>(phi.dim());
    for (int i = 0; i < D; ++i)
        if (phi.base()[i] != 0 || phi.extents()[i] != p - 1)
            throw std::invalid_argument("balance_distance: phi must be a table on [0,p-1]^D");
    const double total_cubes = cube_count(target, n);
    if (total_cubes > 1e6) throw std::invalid_argument("balance_distance: |Cu^n(target)| exceeds 10^6");
    if (!is_hom_Zpn(phi, p, target)) throw std::invalid_argument("balance_distance: phi is not a morphism");

    const auto& g = target.group();
    const std::size_t m = g.rank();
    const std::uint32_t verts = 1u << n;
    FpFunction shape(p, D);
    const std::uint64_t N = shape.size();
    long double params = std::pow(static_cast<long double>(N), n + 1);
    if (params > 1e8L) throw std::invalid_argument("balance_distance: parameter space exceeds 10^8");

    // Mixed-radix key over the Mobius coefficients a_w in G_{|w|}.
    std::vector<std::uint64_t> stride(verts);
    {
        std::uint64_t s = 1;
        for (std::uint32_t w = 0; w < verts; ++w) {
            stride[w] = s;
            s *= target.level_size(std::popcount(w));
        }
    }
    std::vector<std::vector<std::int64_t>> step(static_cast<std::size_t>(n + 1), std::vector<std::int64_t>(m));
    std::vector<std::vector<std::int64_t>> radix(static_cast<std::size_t>(n + 1), std::vector<std::int64_t>(m));
    for (int j = 0; j <= n; ++j)
        for (std::size_t c = 0; c < m; ++c) {
            int e = target.level(j).exponents[c];
            step[j][c] = checked_pow(p, e);
            radix[j][c] = checked_pow(p, g.orders()[c] - e);
        }

    std::vector<std::uint32_t> counts(static_cast<std::size_t>(total_cubes), 0);
    std::vector<std::uint64_t> t(static_cast<std::size_t>(n + 1), 0);
    std::vector<std::uint64_t> vert(verts);
    CubeMap cube(target.group_ptr(), n);
    while (true) {
        vert[0] = t[0];
        for (std::uint32_t v = 1; v < verts; ++v)
            vert[v] = shape.add_index(vert[v & (v - 1)], t[1 + static_cast<std::size_t>(std::countr_zero(v))]);
        for (std::uint32_t v = 0; v < verts; ++v) cube.set(v, phi.at(vert[v]));
        CubeMap a = mobius_coeffs(cube);
        std::uint64_t key = 0;
        for (std::uint32_t w = 0; w < verts; ++w) {
            int lvl = std::popcount(w);
            const std::int64_t* coeff = a.raw(w);
            std::uint64_t local = 0, mul = 1;
            for (std::size_t c = 0; c < m; ++c) {
                if (coeff[c] % step[lvl][c] != 0) throw std::logic_error("balance_distance: image is not a cube");
                local += static_cast<std::uint64_t>(coeff[c] / step[lvl][c]) * mul;
                mul *= static_cast<std::uint64_t>(radix[lvl][c]);
            }
            key += local * stride[w];
        }
        ++counts[key];
        std::size_t i = 0;
        for (; i < t.size(); ++i) {
            if (++t[i] < N) break;
            t[i] = 0;
        }
        if (i == t.size()) break;
    }
    const double T = static_cast<double>(params);
    const double u = 1.0 / total_cubes;
    double tv = 0;
    for (auto c : counts) tv += std::abs(static_cast<double>(c) / T - u);
    return 0.5 * tv;
}

namespace {

void split_pair(Complex alpha, const std::vector<int>& a, const std::vector<int>& b, int m, std::vector<Rank1Term>& out) {
    const int s = static_cast<int>(a.size());
    auto delta = [m](int x) {
        std::vector<double> v(static_cast<std::size_t>(m), 0.0);
        v[x] = 1.0;
        return v;
    };
    auto diff = [m](int x0, int x1) {
        std::vector<double> v(static_cast<std::size_t>(m), 0.0);
        v[x0] = 1.0;
        v[x1] = -1.0;
        return v;
    };
    // Peel the last coordinate: alpha(1_{a'}1_{aK} - 1_{b'}1_{bK})
    //   = 1_{b'} alpha(1_{aK} - 1_{bK}) + alpha(1_{a'} - 1_{b'}) 1_{aK}.
    // Unrolled over the coordinates from last to first.
    for (int z = s - 1; z >= 0; --z) {
        if (a[z] != b[z]) {
            Rank1Term t;
            t.lambda = alpha;
            t.designated = z;
            t.factors.resize(static_cast<std::size_t>(s));
            for (int y = 0; y < z; ++y) t.factors[y] = delta(b[y]);
            t.factors[z] = diff(a[z], b[z]);
            for (int y = z + 1; y < s; ++y) t.factors[y] = delta(a[y]);
            out.push_back(std::move(t));
        }
    }
}

}  // namespace

std::vector<Rank1Term> rank1_decompose(const Rank1Input& in, double tol) {
    const int m = in.m, s = in.s;
    if (m < 1 || s < 1) throw std::invalid_argument("rank1_decompose: need |X| >= 1 and |S| >= 1");
    if (static_cast<int>(in.fiber_of.size()) != m) throw std::invalid_argument("rank1_decompose: fiber map size");
    double total = std::pow(static_cast<double>(m), s);
    if (total > 1e5) throw std::invalid_argument("rank1_decompose: |X|^|S| exceeds 10^5");
    if (in.h.size() != static_cast<std::size_t>(total)) throw std::invalid_argument("rank1_decompose: table size");

    // Group points of X^S by product fiber, in index order.
    std::map<std::vector<int>, std::vector<std::uint64_t>> fibers;
    double scale = 1;
    for (auto v : in.h) scale = std::max(scale, std::abs(v));
    for (std::uint64_t idx = 0; idx < in.h.size(); ++idx) {
        std::vector<int> key(static_cast<std::size_t>(s));
        std::uint64_t rest = idx;
        for (int z = 0; z < s; ++z) {
            key[z] = in.fiber_of[rest % static_cast<std::uint64_t>(m)];
            rest /= static_cast<std::uint64_t>(m);
        }
        fibers[key].push_back(idx);
    }
    auto coords = [&](std::uint64_t idx) {
        std::vector<int> c(static_cast<std::size_t>(s));
        for (int z = 0; z < s; ++z) {
            c[z] = static_cast<int>(idx % static_cast<std::uint64_t>(m));
            idx /= static_cast<std::uint64_t>(m);
        }
        return c;
    };
    std::vector<Rank1Term> out;
    for (const auto& [key, pts] : fibers) {
        Complex sum = 0;
        for (auto i : pts) sum += in.h[i];
        if (std::abs(sum) > tol * scale * static_cast<double>(pts.size())) {
            std::string f;
            for (int v : key) f += (f.empty() ? "" : ",") + std::to_string(v);
            throw std::invalid_argument("rank1_decompose: nonzero mean on fiber (" + f + ")");
        }
        std::vector<std::uint64_t> support;
        for (auto i : pts)
            if (in.h[i] != Complex(0.0)) support.push_back(i);
        // Chain of two-entry functions through consecutive support points.
        Complex partial = 0;
        for (std::size_t j = 0; j + 1 < support.size(); ++j) {
            partial += in.h[support[j]];
            if (partial == Complex(0.0)) continue;
            split_pair(partial, coords(support[j]), coords(support[j + 1]), m, out);
        }
    }
    return out;
}

std::vector<Complex> rank1_reconstruct(const std::vector<Rank1Term>& terms, int m, int s) {
    std::uint64_t total = 1;
    for (int z = 0; z < s; ++z) total *= static_cast<std::uint64_t>(m);
    std::vector<Complex> h(total, 0.0);
    for (const auto& t : terms) {
        for (std::uint64_t idx = 0; idx < total; ++idx) {
            double prod = 1;
            std::uint64_t rest = idx;
            for (int z = 0; z < s && prod != 0; ++z) {
                prod *= t.factors[z][rest % static_cast<std::uint64_t>(m)];
                rest /= static_cast<std::uint64_t>(m);
            }
            if (prod != 0) h[idx] += t.lambda * prod;
        }
    }
    return h;
}

std::uint64_t rank1_bound(const Rank1Input& in) {
    std::map<int, std::uint64_t> fiber_size;
    for (int f : in.fiber_of) ++fiber_size[f];
    // Product fibers are products of X-fibers; sum (|F| - 1) * s over them.
    std::vector<std::uint64_t> sizes;
    for (auto& [f, c] : fiber_size) sizes.push_back(c);
    std::uint64_t bound = 0;
    std::vector<std::size_t> digit(static_cast<std::size_t>(in.s), 0);
    while (true) {
        std::uint64_t prod = 1;
        for (auto d : digit) prod *= sizes[d];
        bound += (prod - 1) * static_cast<std::uint64_t>(in.s);
        std::size_t i = 0;
        for (; i < digit.size(); ++i) {
            if (++digit[i] < sizes.size()) break;
            digit[i] = 0;
        }
        if (i == digit.size()) break;
    }
    return bound;
}

}  // namespace nilspace
