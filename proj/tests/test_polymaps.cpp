#include "nilspace/polymaps.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <functional>
#include <random>

using namespace nilspace;

namespace {

PolyMap random_poly(const FilteredGroup& F, int n, int max_height, std::mt19937_64& rng, bool morphism) {
    PolyMap f(n, F);
    const auto& g = F.group();
    std::function<void(MultiIndex&, int, int)> rec = [&](MultiIndex& w, int pos, int left) {
        if (pos == n) {
            int h = max_height - left;
            if (morphism) {
                const auto& lvl = F.level(h);
                f.set(w, lvl.element_at(g, rng() % lvl.size(g)));
            } else {
                f.set(w, g.element_at(rng() % g.order_u64()));
            }
            return;
        }
        for (int a = 0; a <= left; ++a) {
            w[pos] = a;
            rec(w, pos + 1, left - a);
        }
    };
    MultiIndex w(static_cast<std::size_t>(n), 0);
    rec(w, 0, max_height);
    return f.normalized();
}

std::vector<std::int64_t> pt(const std::vector<int>& off) { return {off.begin(), off.end()}; }

BoxMap pbox_table(const FilteredGroup& F, std::int64_t p, int n) {
    return BoxMap(F.group_ptr(), std::vector<std::int64_t>(static_cast<std::size_t>(n), 0),
                  std::vector<int>(static_cast<std::size_t>(n), static_cast<int>(p - 1)));
}

// Iterated cyclic differences along standard generators, computed on the
// table of Z_p^n -> G directly, with repeated directions.
bool hom_Zpn_oracle(const BoxMap& f, std::int64_t p, const FilteredGroup& F) {
    const auto& g = F.group();
    const int n = static_cast<int>(f.base().size());
    std::vector<Residues> vals(f.points());
    for (std::uint64_t i = 0; i < f.points(); ++i) vals[i] = f.at(i);
    auto shift = [&](std::uint64_t idx, int dir) {
        auto off = f.offset_at(idx);
        off[dir] = (off[dir] + 1) % p;
        return f.index_of(off);
    };
    int top = F.degree() + 1;
    std::function<bool(const std::vector<Residues>&, int, int)> rec = [&](const std::vector<Residues>& t, int depth, int mindir) {
        for (const auto& x : t)
            if (!F.level(depth).contains(g, x)) return false;
        if (depth == top) return true;
        for (int d = mindir; d < n; ++d) {
            std::vector<Residues> next(t.size());
            for (std::uint64_t i = 0; i < t.size(); ++i) next[i] = g.sub(t[shift(i, d)], t[i]);
            if (!rec(next, depth + 1, d)) return false;
        }
        return true;
    };
    return rec(vals, 0, 0);
}

std::vector<std::int64_t> random_circular(std::int64_t p, std::mt19937_64& rng) {
    std::vector<std::int64_t> v(static_cast<std::size_t>(p));
    std::int64_t c = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(p));
    v[c] = 0;
    for (std::int64_t j = 1; j <= (p - 1) / 2; ++j) {
        std::int64_t a = static_cast<std::int64_t>(rng() % 41) - 20;
        v[mod_floor(c + j, p)] = a;
        v[mod_floor(c - j, p)] = -a;
    }
    return v;
}

}  // namespace

TEST(Eval, Examples) {
    auto Z9 = make_Dk(FiniteAbelianPGroup(3, {2}), 2);
    PolyMap f(1, Z9);
    f.set({0}, {0});
    f.set({1}, {1});
    f.set({2}, {1});
    EXPECT_EQ(eval(f, {3}), Residues({6}));
    PolyMap c(2, Z9);
    c.set({0, 0}, {4});
    EXPECT_EQ(eval(c, {-5, 17}), Residues({4}));
    PolyMap line(1, Z9);
    line.set({1}, {2});
    for (std::int64_t x = -10; x <= 10; ++x) EXPECT_EQ(eval(line, {x}), Residues({mod_floor(2 * x, 9)}));
    EXPECT_THROW(eval(line, {1, 2}), std::invalid_argument);
    EXPECT_EQ(PolyMap(2, Z9).height(), -1);
}

TEST(Derivative, Examples) {
    auto Z9 = make_Dk(FiniteAbelianPGroup(3, {2}), 2);
    PolyMap c(1, Z9);
    c.set({0}, {5});
    EXPECT_TRUE(derivative(c, {1}).normalized().coeffs.empty());
    PolyMap q(1, Z9);
    q.set({2}, {4});
    auto d = derivative(q, {1}).normalized();
    ASSERT_EQ(d.coeffs.size(), 1u);
    EXPECT_EQ(d.coeffs.begin()->first, MultiIndex({1}));
    EXPECT_EQ(d.coeffs.begin()->second, Residues({4}));
}

TEST(Derivative, MatchesPointwiseDifference) {
    std::mt19937_64 rng(8);
    auto F = make_Dk(FiniteAbelianPGroup(3, {3, 1}), 4);
    for (int t = 0; t < 40; ++t) {
        int n = 1 + static_cast<int>(rng() % 3);
        auto f = random_poly(F, n, 4, rng, false);
        std::vector<std::int64_t> h(static_cast<std::size_t>(n)), x(static_cast<std::size_t>(n));
        for (auto& v : h) v = static_cast<std::int64_t>(rng() % 11) - 5;
        auto df = derivative(f, h);
        EXPECT_LE(df.height(), std::max(f.height() - 1, -1));
        for (int s = 0; s < 10; ++s) {
            std::vector<std::int64_t> xh(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) {
                x[j] = static_cast<std::int64_t>(rng() % 21) - 10;
                xh[j] = x[j] + h[j];
            }
            EXPECT_EQ(eval(df, x), F.group().sub(eval(f, xh), eval(f, x)));
        }
    }
}

TEST(FromValues, Examples) {
    auto Z9 = make_Dk(FiniteAbelianPGroup(3, {2}), 2);
    BoxMap v(Z9.group_ptr(), {0}, {2});
    for (int x = 0; x <= 2; ++x) v.set(static_cast<std::uint64_t>(x), {x});
    auto f = from_values(v, Z9);
    ASSERT_EQ(f.coeffs.size(), 1u);
    EXPECT_EQ(f.coeffs.at({1}), Residues({1}));
    EXPECT_EQ(newton_coeffs_int({1, -2, 1}), std::vector<BigInt>({1, -3, 6}));
    BoxMap shifted(Z9.group_ptr(), {1}, {2});
    EXPECT_THROW(from_values(shifted, Z9), std::invalid_argument);
}

TEST(FromValues, RoundTrip) {
    std::mt19937_64 rng(9);
    auto F = make_Dk(FiniteAbelianPGroup(2, {3, 2}), 3);
    for (int t = 0; t < 40; ++t) {
        int n = 1 + static_cast<int>(rng() % 3);
        auto f = random_poly(F, n, 3, rng, false);
        BoxMap box(F.group_ptr(), std::vector<std::int64_t>(static_cast<std::size_t>(n), 0), std::vector<int>(static_cast<std::size_t>(n), 3));
        for (std::uint64_t i = 0; i < box.points(); ++i) box.set(i, eval(f, pt(box.offset_at(i))));
        auto g = from_values(box, F);
        EXPECT_EQ(g.coeffs, f.coeffs);
        for (std::uint64_t i = 0; i < box.points(); ++i) EXPECT_EQ(eval(g, pt(box.offset_at(i))), box.at(i));
    }
}

TEST(Morphisms, ChainLookup) {
    auto Z = make_Zkl(3, 4, 2);
    PolyMap f(1, Z);
    f.set({2}, {1});
    EXPECT_TRUE(is_morphism(f));
    PolyMap g(1, Z);
    g.set({3}, {1});
    EXPECT_FALSE(is_morphism(g));
    g.set({3}, {3});
    EXPECT_TRUE(is_morphism(g));
    g.set({5}, {3});
    EXPECT_FALSE(is_morphism(g));
    auto D = make_Dk(FiniteAbelianPGroup(5, {1, 1}), 3);
    std::mt19937_64 rng(10);
    for (int t = 0; t < 20; ++t) EXPECT_TRUE(is_morphism(random_poly(D, 2, 3, rng, false)));
}

TEST(Morphisms, HeightCriterionMatchesCubes) {
    // Morphisms send the diagonal cubes x + h(v_1 + ... + v_m) to cubes.
    std::mt19937_64 rng(12);
    for (const auto& F : {make_Zkl(3, 4, 2), make_Zkl(2, 3, 1), make_Dk(FiniteAbelianPGroup(3, {1}), 2)}) {
        for (int t = 0; t < 30; ++t) {
            auto f = random_poly(F, 1, F.degree() + 1, rng, t % 2 == 0);
            bool all_cubes = true;
            for (int m = 1; m <= F.degree() + 1; ++m)
                for (std::int64_t x = 0; x < 4; ++x)
                    for (std::int64_t h = 1; h <= 3; ++h) {
                        CubeMap q(F.group_ptr(), m);
                        // x + h * (v_1 + ... + v_m)
                        for (std::uint32_t v = 0; v < q.vertices(); ++v) q.set(v, eval(f, {x + h * std::popcount(v)}));
                        all_cubes = all_cubes && is_cube(q, F);
                    }
            if (is_morphism(f)) EXPECT_TRUE(all_cubes);
        }
    }
}

TEST(HomPn, Examples) {
    auto D1 = make_Dk(FiniteAbelianPGroup(3, {1}), 1);
    auto id = pbox_table(D1, 3, 1);
    for (int x = 0; x <= 2; ++x) id.set(static_cast<std::uint64_t>(x), {x});
    EXPECT_TRUE(hom_pn_test(id, 3, D1));
    EXPECT_TRUE(is_hom_Zpn(id, 3, D1));
    std::mt19937_64 rng(13);
    bool found_false = false;
    auto t2 = pbox_table(D1, 3, 2);
    for (int t = 0; t < 50 && !found_false; ++t) {
        for (std::uint64_t i = 0; i < t2.points(); ++i) t2.set(i, {static_cast<std::int64_t>(rng() % 3)});
        found_false = !hom_pn_test(t2, 3, D1);
    }
    EXPECT_TRUE(found_false);
    EXPECT_THROW(hom_pn_test(pbox_table(D1, 3, 11), 3, D1), std::invalid_argument);
}

TEST(HomZpn, Examples) {
    auto Z = make_Zkl(3, 4, 2);
    auto t = pbox_table(Z, 3, 1);
    for (std::uint64_t i = 0; i < 3; ++i) t.set(i, {static_cast<std::int64_t>(i)});
    EXPECT_TRUE(is_hom_Zpn(t, 3, Z));
    EXPECT_TRUE(hom_Zpn_oracle(t, 3, Z));
    for (std::uint64_t i = 0; i < 3; ++i) t.set(i, {7});
    EXPECT_TRUE(is_hom_Zpn(t, 3, Z));
    // x -> x into D_1(Z_9) fails: the wrap-around difference is -8.
    auto D = make_Dk(FiniteAbelianPGroup(3, {2}), 1);
    auto u = pbox_table(D, 3, 1);
    for (std::uint64_t i = 0; i < 3; ++i) u.set(i, {static_cast<std::int64_t>(i)});
    EXPECT_FALSE(is_hom_Zpn(u, 3, D));
}

TEST(HomZpn, AgreesWithOracleAndAllDirections) {
    std::mt19937_64 rng(14);
    for (const auto& F : {make_Zkl(3, 4, 2), make_Zkl(2, 3, 1), make_Zkl(3, 3, 1), make_Dk(FiniteAbelianPGroup(3, {1}), 2),
                          make_Dk(FiniteAbelianPGroup(2, {2}), 2)})
        for (int n = 1; n <= 2; ++n) {
            const std::int64_t p = F.group().p();
            for (int t = 0; t < 60; ++t) {
                BoxMap tab = pbox_table(F, p, n);
                if (t % 2 == 0) {
                    auto f = random_poly(F, n, F.degree() + 1, rng, true);
                    for (std::uint64_t i = 0; i < tab.points(); ++i) tab.set(i, eval(f, pt(tab.offset_at(i))));
                } else {
                    for (std::uint64_t i = 0; i < tab.points(); ++i) tab.set(i, F.group().element_at(rng() % F.group().order_u64()));
                }
                bool gen = is_hom_Zpn(tab, p, F);
                EXPECT_EQ(gen, hom_Zpn_oracle(tab, p, F)) << F.to_string();
                EXPECT_EQ(gen, is_hom_Zpn(tab, p, F, DirectionMode::AllDirections)) << F.to_string();
            }
        }
}

TEST(HomPn, ImpliesHomZpnOnHomogeneousTargets) {
    std::mt19937_64 rng(15);
    for (const auto& F : {make_Zkl(3, 4, 2), make_Zkl(2, 2, 1), make_Zkl(3, 3, 1), make_Dk(FiniteAbelianPGroup(3, {1}), 2)}) {
        const std::int64_t p = F.group().p();
        for (int n = 1; n * (p - 1) <= 6; ++n) {
            for (int t = 0; t < 400; ++t) {
                BoxMap tab = pbox_table(F, p, n);
                for (std::uint64_t i = 0; i < tab.points(); ++i) tab.set(i, F.group().element_at(rng() % F.group().order_u64()));
                if (!hom_pn_test(tab, p, F)) continue;
                EXPECT_TRUE(is_hom_Zpn(tab, p, F)) << F.to_string();
            }
            // Morphism restrictions always pass both.
            for (int t = 0; t < 20; ++t) {
                auto f = random_poly(F, n, F.degree() + 1, rng, true);
                auto tab = restrict_to_pbox(f, p);
                EXPECT_TRUE(hom_pn_test(tab, p, F));
                EXPECT_TRUE(is_hom_Zpn(tab, p, F));
            }
        }
    }
}

TEST(MiP, Examples) {
    EXPECT_EQ(m_i_p(3, 0), std::vector<std::int64_t>({1, -2, 1}));
    EXPECT_EQ(m_i_p(3, 1), std::vector<std::int64_t>({0, 1, -1}));
    EXPECT_EQ(m_i_p(3, 2), std::vector<std::int64_t>({0, 0, 1}));
    EXPECT_THROW(m_i_p(3, 3), std::invalid_argument);
    EXPECT_THROW(m_i_p(4, 0), std::invalid_argument);
}

TEST(MiP, DerivativeShiftsIndex) {
    for (std::int64_t p : {2, 3, 5, 7, 11, 13})
        for (int i = 0; i < p; ++i) {
            auto m = m_i_p(p, i);
            for (int x = 0; x < i; ++x) EXPECT_EQ(m[x], 0);
            EXPECT_EQ(m[i], 1);
            if (i >= 1) EXPECT_EQ(cyclic_difference(m), m_i_p(p, i - 1));
        }
}

TEST(MiP, PolymapIsMorphismIntoHip) {
    for (std::int64_t p : {2, 3, 5})
        for (int i = 0; i < p; ++i) {
            auto f = m_i_polymap(p, i, 3);
            EXPECT_TRUE(is_morphism(f)) << p << " " << i;
            auto period = m_i_p(p, i);
            const auto mod = f.target.group().modulus(0);
            for (std::int64_t x = 0; x < 3 * p; ++x) EXPECT_EQ(eval(f, {x}), Residues({mod_floor(period[x % p], mod)}));
        }
}

TEST(GPrime, Values) {
    EXPECT_EQ(g_prime_t(3, {0, 0}, {0, 0}), 1);
    for (std::int64_t p : {2, 3, 5})
        for (int n = 1; n <= 2; ++n) {
            std::vector<int> t(static_cast<std::size_t>(n), 0);
            while (true) {
                std::vector<std::int64_t> tx(t.begin(), t.end());
                EXPECT_EQ(g_prime_t(p, t, tx), 1);
                for (int j = 0; j < n; ++j)
                    for (int below = 0; below < t[j]; ++below) {
                        auto x = tx;
                        x[j] = below;
                        EXPECT_EQ(g_prime_t(p, t, x), 0);
                    }
                int j = 0;
                for (; j < n; ++j) {
                    if (++t[j] < p) break;
                    t[j] = 0;
                }
                if (j == n) break;
            }
        }
}

TEST(GPrime, DerivativeDivisibility) {
    const std::int64_t p = 3;
    for (int t0 = 0; t0 < 3; ++t0)
        for (int t1 = 0; t1 < 3; ++t1)
            for (int a0 = 0; a0 <= 5; ++a0)
                for (int a1 = 0; a1 <= 5; ++a1) {
                    // Table of g'_t on one period, differenced cyclically a0 and a1 times.
                    std::vector<std::vector<std::int64_t>> T(3, std::vector<std::int64_t>(3));
                    for (int x = 0; x < 3; ++x)
                        for (int y = 0; y < 3; ++y) T[x][y] = g_prime_t(p, {t0, t1}, {x, y});
                    for (int s = 0; s < a0; ++s) {
                        auto U = T;
                        for (int x = 0; x < 3; ++x)
                            for (int y = 0; y < 3; ++y) U[x][y] = T[(x + 1) % 3][y] - T[x][y];
                        T = U;
                    }
                    for (int s = 0; s < a1; ++s) {
                        auto U = T;
                        for (int x = 0; x < 3; ++x)
                            for (int y = 0; y < 3; ++y) U[x][y] = T[x][(y + 1) % 3] - T[x][y];
                        T = U;
                    }
                    int r = std::max(0, (a0 - t0 - 1) / 2 + 1) * (a0 > t0) + std::max(0, (a1 - t1 - 1) / 2 + 1) * (a1 > t1);
                    std::int64_t pr = 1;
                    for (int k = 0; k < r; ++k) pr *= p;
                    for (const auto& row : T)
                        for (auto v : row) EXPECT_EQ(v % pr, 0) << t0 << t1 << " " << a0 << a1;
                }
}

TEST(Circular, Examples) {
    EXPECT_EQ(apply_Ap({0, 1, -1}), std::vector<std::int64_t>({1, -2, 1}));
    EXPECT_EQ(apply_Ap({4, 4, 4, 4, 4}), std::vector<std::int64_t>(5, 0));
    EXPECT_EQ(apply_Ap_power({0, 1, -1}, 2), std::vector<std::int64_t>({-3, 3, 0}));
    EXPECT_EQ(is_circular({0, 1, -1}), std::optional<int>(1));
    EXPECT_EQ(is_circular({-3, 3, 0}), std::optional<int>(3));
    EXPECT_TRUE(is_circular({0, 0, 0}).has_value());
    EXPECT_FALSE(is_circular({1, 1, 1}).has_value());
    EXPECT_TRUE(check_circular_power({0, 1, -1}));
    EXPECT_TRUE(check_circular_power({0, 0, 0}));
    EXPECT_THROW(check_circular_power({1, 1, 1}), std::invalid_argument);
}

TEST(Circular, PowerSweep) {
    std::mt19937_64 rng(16);
    for (std::int64_t p : {3, 5, 7})
        for (int t = 0; t < 10000; ++t) {
            auto v = random_circular(p, rng);
            ASSERT_TRUE(is_circular(v).has_value());
            EXPECT_TRUE(check_circular_power(v));
            // Independent recomputation of the (p-1)-st cyclic difference.
            auto w = v;
            for (int s = 0; s < p - 1; ++s) {
                std::vector<std::int64_t> u(w.size());
                for (std::size_t i = 0; i < w.size(); ++i) u[i] = w[(i + 1) % w.size()] - w[i];
                w = u;
            }
            for (auto x : w) EXPECT_EQ(x % p, 0);
        }
}
