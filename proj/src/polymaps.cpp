#include "nilspace/polymaps.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace nilspace {

bool ColexLess::operator()(const MultiIndex& a, const MultiIndex& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t i = a.size(); i-- > 0;)
        if (a[i] != b[i]) return a[i] < b[i];
    return false;
}

namespace {

int weight(const MultiIndex& w) { return std::accumulate(w.begin(), w.end(), 0); }

bool is_zero(const Residues& a) {
    return std::all_of(a.begin(), a.end(), [](std::int64_t x) { return x == 0; });
}

}  // namespace

int PolyMap::height() const {
    int h = -1;
    for (const auto& [w, a] : coeffs)
        if (!is_zero(a)) h = std::max(h, weight(w));
    return h;
}

PolyMap PolyMap::normalized() const {
    PolyMap out(n, target);
    for (const auto& [w, a] : coeffs)
        if (!is_zero(a)) out.coeffs.emplace(w, a);
    return out;
}

void PolyMap::set(const MultiIndex& w, const Residues& a) {
    if (static_cast<int>(w.size()) != n) throw std::invalid_argument("PolyMap: multi-index length");
    for (int x : w)
        if (x < 0) throw std::invalid_argument("PolyMap: negative multi-index");
    coeffs[w] = target.group().reduce(a);
}

Residues eval(const PolyMap& f, const std::vector<std::int64_t>& x) {
    if (static_cast<int>(x.size()) != f.n) throw std::invalid_argument("eval: point dimension mismatch");
    const auto& g = f.target.group();
    Residues acc = g.zero();
    std::vector<std::int64_t> wi(x.size());
    for (const auto& [w, a] : f.coeffs) {
        std::copy(w.begin(), w.end(), wi.begin());
        BigInt c = multibinom(x, wi);
        if (c != 0) acc = g.add(acc, g.scale(c, a));
    }
    return acc;
}

PolyMap derivative(const PolyMap& f, const std::vector<std::int64_t>& h) {
    if (static_cast<int>(h.size()) != f.n) throw std::invalid_argument("derivative: direction dimension mismatch");
    const auto& g = f.target.group();
    PolyMap out(f.n, f.target);
    // binom(x+h, w) = sum_{u <= w} binom(h, w-u) binom(x, u); the u = w term cancels.
    for (const auto& [w, a] : f.coeffs) {
        MultiIndex u(w.size(), 0);
        std::vector<std::int64_t> diff(w.size());
        while (true) {
            if (u != w) {
                for (std::size_t i = 0; i < w.size(); ++i) diff[i] = w[i] - u[i];
                BigInt c = multibinom(h, diff);
                if (c != 0) {
                    auto it = out.coeffs.find(u);
                    Residues add = g.scale(c, a);
                    if (it == out.coeffs.end())
                        out.coeffs.emplace(u, add);
                    else
                        it->second = g.add(it->second, add);
                }
            }
            std::size_t i = 0;
            while (i < u.size() && u[i] == w[i]) u[i++] = 0;
            if (i == u.size()) break;
            ++u[i];
        }
    }
    return out.normalized();
}

PolyMap from_values(const BoxMap& values, const FilteredGroup& target) {
    if (!(values.group() == target.group())) throw std::invalid_argument("from_values: group mismatch");
    for (auto b : values.base())
        if (b != 0) throw std::invalid_argument("from_values: box base must be 0");
    const auto& g = target.group();
    BoxMap t = values;
    const auto& ext = values.extents();
    for (std::size_t axis = 0; axis < ext.size(); ++axis) {
        for (int d = 1; d <= ext[axis]; ++d) {
            for (std::uint64_t idx = t.points(); idx-- > 0;) {
                auto off = t.offset_at(idx);
                if (off[axis] < d) continue;
                auto prev = off;
                --prev[axis];
                t.set(idx, g.sub(t.at(idx), t.at(prev)));
            }
        }
    }
    PolyMap out(static_cast<int>(ext.size()), target);
    for (std::uint64_t idx = 0; idx < t.points(); ++idx) {
        Residues a = t.at(idx);
        if (!is_zero(a)) out.coeffs.emplace(t.offset_at(idx), a);
    }
    return out;
}

bool is_morphism(const PolyMap& f, const FilteredGroup& target) {
    if (!(f.target.group() == target.group())) throw std::invalid_argument("is_morphism: group mismatch");
    for (const auto& [w, a] : f.coeffs)
        if (!target.level(weight(w)).contains(target.group(), a)) return false;
    return true;
}

bool is_morphism(const PolyMap& f) { return is_morphism(f, f.target); }

std::vector<BigInt> newton_coeffs_int(const std::vector<std::int64_t>& values) {
    std::vector<BigInt> t(values.begin(), values.end());
    std::vector<BigInt> out;
    while (!t.empty()) {
        out.push_back(t.front());
        for (std::size_t i = 0; i + 1 < t.size(); ++i) t[i] = t[i + 1] - t[i];
        t.pop_back();
    }
    return out;
}

BoxMap restrict_to_pbox(const PolyMap& f, std::int64_t p) {
    BoxMap out(f.target.group_ptr(), std::vector<std::int64_t>(static_cast<std::size_t>(f.n), 0),
               std::vector<int>(static_cast<std::size_t>(f.n), static_cast<int>(p - 1)));
    for (std::uint64_t idx = 0; idx < out.points(); ++idx) {
        auto off = out.offset_at(idx);
        out.set(idx, eval(f, std::vector<std::int64_t>(off.begin(), off.end())));
    }
    return out;
}

namespace {

void require_pbox(const BoxMap& f, std::int64_t p) {
    for (auto b : f.base())
        if (b != 0) throw std::invalid_argument("table must be based at 0");
    for (int e : f.extents())
        if (e != p - 1) throw std::invalid_argument("table must live on [0,p-1]^n");
}

}  // namespace

bool hom_pn_test(const BoxMap& f, std::int64_t p, const FilteredGroup& fg) {
    require_pbox(f, p);
    if (static_cast<std::int64_t>(f.dim()) * (p - 1) > kMaxCubeDim)
        throw std::invalid_argument("hom_pn_test: n(p-1) exceeds cap");
    return is_cube(compose_box_cube(f), fg);
}

bool is_hom_Zpn(const BoxMap& f, std::int64_t p, const FilteredGroup& fg, DirectionMode mode) {
    require_pbox(f, p);
    if (!(f.group() == fg.group())) throw std::invalid_argument("is_hom_Zpn: group mismatch");
    if (f.points() > 100000) throw std::invalid_argument("is_hom_Zpn: p^n exceeds 10^5");
    const auto& g = fg.group();
    const std::size_t m = g.rank();
    const std::size_t N = f.points();
    const std::size_t n = f.dim();

    int top = 1;
    while (!fg.level(top).is_zero(g)) ++top;

    std::vector<std::int64_t> base(N * m);
    for (std::size_t x = 0; x < N; ++x) {
        auto v = f.at(x);
        std::copy(v.begin(), v.end(), base.begin() + static_cast<std::ptrdiff_t>(x * m));
    }

    // Shift tables: shift[d][x] = index of x + direction d in Z_p^n.
    std::vector<std::vector<std::size_t>> shift;
    std::vector<std::int64_t> stride(n, 1);
    for (std::size_t i = 1; i < n; ++i) stride[i] = stride[i - 1] * p;
    auto add_direction = [&](const std::vector<std::int64_t>& h) {
        std::vector<std::size_t> s(N);
        for (std::size_t x = 0; x < N; ++x) {
            std::size_t y = 0;
            std::size_t rest = x;
            for (std::size_t i = 0; i < n; ++i) {
                std::int64_t c = static_cast<std::int64_t>(rest % static_cast<std::size_t>(p));
                rest /= static_cast<std::size_t>(p);
                y += static_cast<std::size_t>(mod_floor(c + h[i], p) * stride[i]);
            }
            s[x] = y;
        }
        shift.push_back(std::move(s));
    };
    if (mode == DirectionMode::Generators) {
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::int64_t> h(n, 0);
            h[i] = 1;
            add_direction(h);
        }
    } else {
        for (std::size_t d = 1; d < N; ++d) {
            std::vector<std::int64_t> h(n);
            std::size_t rest = d;
            for (std::size_t i = 0; i < n; ++i) {
                h[i] = static_cast<std::int64_t>(rest % static_cast<std::size_t>(p));
                rest /= static_cast<std::size_t>(p);
            }
            add_direction(h);
        }
    }

    std::vector<std::vector<std::int64_t>> steps(static_cast<std::size_t>(top + 1), std::vector<std::int64_t>(m));
    for (int j = 0; j <= top; ++j)
        for (std::size_t c = 0; c < m; ++c) steps[j][c] = checked_pow(g.p(), fg.level(j).exponents[c]);

    std::uint64_t budget = 50000000;
    std::function<bool(const std::vector<std::int64_t>&, std::size_t, int)> rec =
        [&](const std::vector<std::int64_t>& t, std::size_t first_dir, int level) -> bool {
        if (level > top) return true;
        std::vector<std::int64_t> d(N * m);
        for (std::size_t dir = first_dir; dir < shift.size(); ++dir) {
            if (budget < N) throw std::runtime_error("is_hom_Zpn: direction budget exhausted");
            budget -= N;
            const auto& s = shift[dir];
            const auto& st = steps[static_cast<std::size_t>(level)];
            for (std::size_t x = 0; x < N; ++x) {
                for (std::size_t c = 0; c < m; ++c) {
                    std::int64_t v = t[s[x] * m + c] - t[x * m + c];
                    if (v < 0) v += g.moduli()[c];
                    if (v % st[c] != 0) return false;
                    d[x * m + c] = v;
                }
            }
            if (!rec(d, dir, level + 1)) return false;
        }
        return true;
    };
    return rec(base, 0, 1);
}

std::vector<std::int64_t> m_i_p(std::int64_t p, int i) {
    if (!is_prime(p)) throw std::invalid_argument("m_i_p: p must be prime");
    if (i < 0 || i > p - 1) throw std::invalid_argument("m_i_p: need 0 <= i <= p-1");
    std::vector<std::int64_t> out(static_cast<std::size_t>(p), 0);
    for (std::int64_t x = i; x < p; ++x) {
        BigInt b = binom(BigInt(p - i - 1), static_cast<std::uint64_t>(x - i));
        out[x] = static_cast<std::int64_t>(((x - i) % 2) ? BigInt(-b) : b);
    }
    return out;
}

PolyMap m_i_polymap(std::int64_t p, int i, int R) {
    FilteredGroup target = make_Hip_truncated(p, i, R);
    auto period = m_i_p(p, i);
    int top = target.degree() + 1;
    BoxMap values(target.group_ptr(), {0}, {top});
    for (int x = 0; x <= top; ++x) values.set(static_cast<std::uint64_t>(x), {period[x % p]});
    return from_values(values, target);
}

std::int64_t g_prime_t(std::int64_t p, const std::vector<int>& t, const std::vector<std::int64_t>& x) {
    if (t.size() != x.size()) throw std::invalid_argument("g_prime_t: length mismatch");
    std::int64_t prod = 1;
    for (std::size_t j = 0; j < t.size(); ++j) {
        if (t[j] < 0 || t[j] >= p) throw std::invalid_argument("g_prime_t: t outside [0,p-1]");
        prod *= m_i_p(p, t[j])[mod_floor(x[j], p)];
        if (prod == 0) break;
    }
    return prod;
}

std::vector<std::int64_t> apply_Ap(const std::vector<std::int64_t>& v) {
    const std::size_t p = v.size();
    if (p < 2) throw std::invalid_argument("apply_Ap: length must be >= 2");
    std::vector<std::int64_t> out(p);
    for (std::size_t i = 0; i < p; ++i) out[i] = v[(i + 1) % p] - v[i];
    return out;
}

std::vector<std::int64_t> apply_Ap_power(const std::vector<std::int64_t>& v, int times) {
    std::vector<std::int64_t> out = v;
    for (int t = 0; t < times; ++t) out = apply_Ap(out);
    return out;
}

std::vector<std::int64_t> cyclic_difference(const std::vector<std::int64_t>& v) { return apply_Ap(v); }

std::optional<int> is_circular(const std::vector<std::int64_t>& v) {
    const std::int64_t p = static_cast<std::int64_t>(v.size());
    if (p == 2) {
        if (v[0] == -v[1]) return 1;
        return std::nullopt;
    }
    if (p < 2 || p % 2 == 0) throw std::invalid_argument("is_circular: length must be a prime");
    for (std::int64_t i = 0; i < p; ++i) {
        if (v[i] != 0) continue;
        bool ok = true;
        for (std::int64_t j = 1; j <= (p - 1) / 2 && ok; ++j)
            ok = v[mod_floor(i + j, p)] == -v[mod_floor(i - j, p)];
        if (ok) return static_cast<int>(i + 1);
    }
    return std::nullopt;
}

bool check_circular_power(const std::vector<std::int64_t>& v) {
    if (!is_circular(v)) throw std::invalid_argument("check_circular_power: input is not circular");
    const std::int64_t p = static_cast<std::int64_t>(v.size());
    auto w = apply_Ap_power(v, static_cast<int>(p - 1));
    if (!is_circular(w)) return false;
    return std::all_of(w.begin(), w.end(), [p](std::int64_t x) { return x % p == 0; });
}

}  // namespace nilspace
