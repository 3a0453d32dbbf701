#include "nilspace/cubes.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>
#include <set>

using namespace nilspace;

namespace {

CubeMap cube_of(const FilteredGroup& F, const std::vector<Residues>& values) {
    int n = std::countr_zero(values.size());
    CubeMap q(F.group_ptr(), n);
    for (std::size_t v = 0; v < values.size(); ++v) q.set(static_cast<std::uint32_t>(v), values[v]);
    return q;
}

// Random cube of F built from coefficients a_w in G_{|w|}.
CubeMap random_cube(const FilteredGroup& F, int n, std::mt19937_64& rng) {
    CubeMap a(F.group_ptr(), n);
    for (std::uint32_t w = 0; w < a.vertices(); ++w) {
        const auto& lvl = F.level(std::popcount(w));
        a.set(w, lvl.element_at(F.group(), rng() % lvl.size(F.group())));
    }
    return mobius_reconstruct(a);
}

std::vector<FilteredGroup> small_filtrations() {
    return {make_Dk(FiniteAbelianPGroup(3, {1}), 1), make_Dk(FiniteAbelianPGroup(3, {1}), 2),
            make_Zkl(3, 4, 2),                       make_Zkl(2, 3, 1),
            make_Zkl(2, 2, 1),                       make_Dk(FiniteAbelianPGroup(2, {1, 1}), 1),
            make_Dk(FiniteAbelianPGroup(2, {2}), 2)};
}

}  // namespace

TEST(Mobius, Examples) {
    auto F = make_Dk(FiniteAbelianPGroup(3, {2}), 2);
    auto a = mobius_coeffs(cube_of(F, {{0}, {1}, {2}, {5}}));
    EXPECT_EQ(a.at(3), Residues({2}));
    auto c = mobius_coeffs(cube_of(F, {{4}, {4}, {4}, {4}}));
    EXPECT_EQ(c.at(0), Residues({4}));
    for (std::uint32_t w = 1; w < 4; ++w) EXPECT_EQ(c.at(w), Residues({0}));
    // x + v_1 h_1 + v_2 h_2 + v_3 h_3 in Z_9.
    CubeMap s(F.group_ptr(), 3);
    for (std::uint32_t v = 0; v < 8; ++v) s.set(v, {mod_floor(1 + 2 * (v & 1) + 4 * ((v >> 1) & 1) + 7 * ((v >> 2) & 1), 9)});
    auto sa = mobius_coeffs(s);
    EXPECT_EQ(sa.at(0), Residues({1}));
    EXPECT_EQ(sa.at(1), Residues({2}));
    EXPECT_EQ(sa.at(2), Residues({4}));
    EXPECT_EQ(sa.at(4), Residues({7}));
    for (std::uint32_t w : {3u, 5u, 6u, 7u}) EXPECT_EQ(sa.at(w), Residues({0}));
}

TEST(Mobius, ReconstructionExhaustive) {
    for (const auto& F : {make_Dk(FiniteAbelianPGroup(3, {1}), 1), make_Dk(FiniteAbelianPGroup(2, {2}), 1)}) {
        const auto& g = F.group();
        for (int n = 1; n <= 3; ++n) {
            CubeMap q(F.group_ptr(), n);
            std::vector<std::uint64_t> idx(q.vertices(), 0);
            while (true) {
                for (std::uint32_t v = 0; v < q.vertices(); ++v) q.set(v, g.element_at(idx[v]));
                EXPECT_EQ(mobius_reconstruct(mobius_coeffs(q)), q);
                std::size_t v = 0;
                for (; v < idx.size(); ++v) {
                    if (++idx[v] < g.order_u64()) break;
                    idx[v] = 0;
                }
                if (v == idx.size()) break;
            }
        }
    }
}

TEST(Mobius, ReconstructionRandom) {
    std::mt19937_64 rng(1);
    auto F = make_Dk(FiniteAbelianPGroup(3, {3, 1}), 1);
    for (int n = 4; n <= 8; ++n)
        for (int t = 0; t < 20; ++t) {
            CubeMap q(F.group_ptr(), n);
            for (std::uint32_t v = 0; v < q.vertices(); ++v) q.set(v, F.group().element_at(rng() % 81));
            EXPECT_EQ(mobius_reconstruct(mobius_coeffs(q)), q);
        }
}

TEST(Cubes, Examples) {
    auto D1 = make_Dk(FiniteAbelianPGroup(3, {1}), 1);
    EXPECT_TRUE(is_cube(cube_of(D1, {{0}, {1}, {1}, {2}}), D1));
    EXPECT_FALSE(is_cube(cube_of(D1, {{0}, {1}, {1}, {0}}), D1));
    std::mt19937_64 rng(2);
    auto D3 = make_Dk(FiniteAbelianPGroup(2, {2}), 3);
    for (int t = 0; t < 50; ++t) {
        CubeMap q(D3.group_ptr(), 3);
        for (std::uint32_t v = 0; v < 8; ++v) q.set(v, {static_cast<std::int64_t>(rng() % 4)});
        EXPECT_TRUE(is_cube(q, D3));
    }
    auto other = make_Dk(FiniteAbelianPGroup(3, {2}), 1);
    EXPECT_THROW(is_cube(cube_of(D1, {{0}, {1}}), other), std::invalid_argument);
}

TEST(Cubes, CountD1Z3) {
    auto D1 = make_Dk(FiniteAbelianPGroup(3, {1}), 1);
    int count = 0;
    for (int t = 0; t < 81; ++t) {
        CubeMap q(D1.group_ptr(), 2);
        int x = t;
        for (std::uint32_t v = 0; v < 4; ++v, x /= 3) q.set(v, {x % 3});
        count += is_cube(q, D1);
    }
    EXPECT_EQ(count, 27);
}

TEST(GrayCode, Examples) {
    auto F = make_Dk(FiniteAbelianPGroup(3, {2}), 1);
    EXPECT_EQ(gray_code_sum(cube_of(F, {{4}, {4}, {4}, {4}})), Residues({0}));
    EXPECT_EQ(gray_code_sum(cube_of(F, {{2}, {7}})), Residues({5}));
}

// Exhaustive up to 10^6 tables, random beyond that.
TEST(GrayCode, CharacterizesDnMinusOne) {
    std::mt19937_64 rng(7);
    for (const auto& A : {FiniteAbelianPGroup(3, {1}), FiniteAbelianPGroup(3, {2}), FiniteAbelianPGroup(2, {1, 1})})
        for (int n = 2; n <= 3; ++n) {
            FilteredGroup F = make_Dk(A, n - 1);
            const std::uint64_t N = A.order_u64();
            CubeMap q(F.group_ptr(), n);
            const double tables = std::pow(static_cast<double>(N), q.vertices());
            int cubes = 0;
            if (tables > 1e6) {
                for (int t = 0; t < 200000; ++t) {
                    for (std::uint32_t v = 0; v < q.vertices(); ++v) q.set(v, A.element_at(rng() % N));
                    // Every fourth table is forced onto the Gray-sum hyperplane.
                    if (t % 4 == 0) q.set(q.vertices() - 1, A.sub(q.at(q.vertices() - 1), gray_code_sum(q)));
                    bool cube = is_cube(q, F);
                    cubes += cube;
                    EXPECT_EQ(cube, gray_code_sum(q) == A.zero());
                }
                EXPECT_GE(cubes, 50000);
                continue;
            }
            std::vector<std::uint64_t> idx(q.vertices(), 0);
            while (true) {
                for (std::uint32_t v = 0; v < q.vertices(); ++v) q.set(v, A.element_at(idx[v]));
                EXPECT_EQ(is_cube(q, F), gray_code_sum(q) == A.zero());
                std::size_t v = 0;
                for (; v < idx.size(); ++v) {
                    if (++idx[v] < N) break;
                    idx[v] = 0;
                }
                if (v == idx.size()) break;
            }
        }
}

TEST(Corners, Examples) {
    auto D1 = make_Dk(FiniteAbelianPGroup(3, {1}), 1);
    EXPECT_EQ(complete_corner(Corner{cube_of(D1, {{0}, {1}, {1}, {0}})}, D1), std::vector<Residues>({{2}}));
    auto D2 = make_Dk(FiniteAbelianPGroup(3, {1}), 2);
    EXPECT_EQ(complete_corner(Corner{cube_of(D2, {{0}, {1}, {2}, {0}})}, D2).size(), 3u);
    // A corner whose lower face is not a cube.
    auto D1n3 = make_Dk(FiniteAbelianPGroup(3, {1}), 1);
    CubeMap bad(D1n3.group_ptr(), 3);
    bad.set(3, {1});
    bad.set(1, {0});
    bad.set(2, {0});
    EXPECT_THROW(complete_corner(Corner{bad}, D1n3), std::invalid_argument);
}

TEST(Corners, CountsMatchBruteForce) {
    std::mt19937_64 rng(3);
    for (const auto& F : small_filtrations()) {
        const auto& g = F.group();
        for (int n = 1; n <= F.degree() + 1 && n <= 5; ++n)
            for (int t = 0; t < 20; ++t) {
                CubeMap q = random_cube(F, n, rng);
                auto got = complete_corner(Corner{q}, F);
                std::vector<Residues> brute;
                const std::uint32_t top = q.vertices() - 1;
                for (std::uint64_t x = 0; x < g.order_u64(); ++x) {
                    q.set(top, g.element_at(x));
                    if (is_cube(q, F)) brute.push_back(g.element_at(x));
                }
                EXPECT_EQ(got, brute);
                EXPECT_EQ(got.size(), F.level_size(n));
                auto canon = complete_corner_canonical(Corner{q}, F);
                q.set(top, canon);
                EXPECT_EQ(mobius_coeffs(q).at(top), g.zero());
            }
    }
}

TEST(MaximalCube, Examples) {
    auto q = maximal_cube_p(3, 1);
    EXPECT_EQ(q.apply_vertex(0), std::vector<std::int64_t>({0}));
    EXPECT_EQ(q.apply_vertex(1), std::vector<std::int64_t>({1}));
    EXPECT_EQ(q.apply_vertex(2), std::vector<std::int64_t>({1}));
    EXPECT_EQ(q.apply_vertex(3), std::vector<std::int64_t>({2}));
    auto id = maximal_cube_p(2, 3);
    for (std::uint32_t v = 0; v < 8; ++v)
        EXPECT_EQ(id.apply_vertex(v), std::vector<std::int64_t>({v & 1, (v >> 1) & 1, (v >> 2) & 1}));
    for (std::int64_t p : {2, 3, 5})
        for (int n = 1; n <= 2; ++n) {
            auto m = maximal_cube_p(p, n);
            std::set<std::vector<std::int64_t>> image;
            for (std::uint32_t v = 0; v < (1u << (n * (p - 1))); ++v) image.insert(m.apply_vertex(v));
            EXPECT_EQ(image.size(), static_cast<std::size_t>(std::pow(p, n)));
        }
    EXPECT_THROW(maximal_cube_p(7, 4), std::invalid_argument);
}

TEST(MaximalCube, Box) {
    auto q = maximal_cube_box({0, 0}, {1, 2});
    for (std::uint32_t v = 0; v < 8; ++v)
        EXPECT_EQ(q.apply_vertex(v), std::vector<std::int64_t>({v & 1, ((v >> 1) & 1) + ((v >> 2) & 1)}));
    auto c = maximal_cube_box({4, -1}, {0, 0});
    EXPECT_EQ(c.apply_vertex(0), std::vector<std::int64_t>({4, -1}));
}

TEST(Boxes, HomBoxTest) {
    auto D1 = make_Dk(FiniteAbelianPGroup(3, {1}), 1);
    BoxMap f(D1.group_ptr(), {0}, {2});
    for (int x = 0; x <= 2; ++x) f.set(static_cast<std::uint64_t>(x), {x});
    EXPECT_TRUE(hom_box_test(f, D1));
    f.set(1, {2});
    EXPECT_FALSE(hom_box_test(f, D1));
    BoxMap c(D1.group_ptr(), {5, 5}, {2, 1});
    for (std::uint64_t i = 0; i < c.points(); ++i) c.set(i, {1});
    EXPECT_TRUE(hom_box_test(c, D1));
}

TEST(Boxes, CompleteBoxCorner) {
    auto D1 = make_Dk(FiniteAbelianPGroup(3, {1}), 1);
    BoxMap f(D1.group_ptr(), {0}, {2});
    f.set(0, {0});
    f.set(1, {1});
    EXPECT_EQ(complete_box_corner(f, D1), Residues({2}));
    // Unit box reduces to the cube case.
    std::mt19937_64 rng(4);
    for (const auto& F : small_filtrations()) {
        for (int n = 1; n <= 3; ++n) {
            CubeMap q = random_cube(F, n, rng);
            BoxMap b(F.group_ptr(), std::vector<std::int64_t>(static_cast<std::size_t>(n), 0), std::vector<int>(static_cast<std::size_t>(n), 1));
            for (std::uint32_t v = 0; v < q.vertices(); ++v) b.set(v, q.at(v));
            EXPECT_EQ(complete_box_corner_all(b, F), complete_corner(Corner{q}, F));
        }
    }
    // Count of completions on a longer box.
    auto Z = make_Zkl(3, 4, 2);
    BoxMap g(Z.group_ptr(), {0, 0}, {2, 1});
    for (std::uint64_t i = 0; i < g.points(); ++i) {
        auto o = g.offset_at(i);
        g.set(i, {o[0] * o[0] + 2 * o[1]});
    }
    EXPECT_EQ(complete_box_corner_all(g, Z).size(), Z.level_size(3));
}

TEST(Boxes, ExtendSimplicialIsUnique) {
    std::mt19937_64 rng(5);
    for (const auto& F : small_filtrations()) {
        const int k = F.degree();
        for (int n = k + 1; n <= std::min(k + 3, 6); ++n) {
            CubeMap q = random_cube(F, n, rng);
            BoxMap full(F.group_ptr(), std::vector<std::int64_t>(static_cast<std::size_t>(n), 0), std::vector<int>(static_cast<std::size_t>(n), 1));
            std::vector<bool> in_s(q.vertices());
            BoxMap partial = full;
            for (std::uint32_t v = 0; v < q.vertices(); ++v) {
                full.set(v, q.at(v));
                in_s[v] = std::popcount(v) <= k;
                partial.set(v, in_s[v] ? q.at(v) : F.group().zero());
            }
            auto ext = extend_simplicial(partial, in_s, F);
            EXPECT_EQ(ext, full);
        }
    }
    auto D1 = make_Dk(FiniteAbelianPGroup(3, {1}), 1);
    BoxMap whole(D1.group_ptr(), {0}, {2});
    for (int x = 0; x <= 2; ++x) whole.set(static_cast<std::uint64_t>(x), {x});
    EXPECT_EQ(extend_simplicial(whole, {true, true, true}, D1), whole);
    EXPECT_THROW(extend_simplicial(whole, {true, false, true}, D1), std::invalid_argument);
}

TEST(FaceMaps, CountsAgainstGeneration) {
    // Independent generation: each output coordinate is v_i, p-1-v_i or a
    // constant; exactly k are non-constant, on distinct inputs.
    auto brute = [](int k, int n, std::int64_t p) {
        std::size_t count = 0;
        const int options = 2 * k + static_cast<int>(p);
        std::vector<int> choice(static_cast<std::size_t>(n), 0);
        while (true) {
            std::set<int> used;
            int nonconst = 0;
            bool ok = true;
            for (int c : choice)
                if (c < 2 * k) {
                    ++nonconst;
                    ok = ok && used.insert(c / 2).second;
                }
            if (ok && nonconst == k) ++count;
            int j = 0;
            for (; j < n; ++j) {
                if (++choice[j] < options) break;
                choice[j] = 0;
            }
            if (j == n) break;
        }
        return count;
    };
    auto formula = [](int k, int n, std::int64_t p) {
        double binom = 1;
        for (int i = 0; i < k; ++i) binom = binom * (n - i) / (i + 1);
        double fact = 1;
        for (int i = 2; i <= k; ++i) fact *= i;
        return static_cast<std::size_t>(binom * std::pow(2, k) * fact * std::pow(p, n - k));
    };
    EXPECT_EQ(p_face_maps(1, 1, 3).size(), 2u);
    EXPECT_EQ(p_face_maps(0, 2, 3).size(), 9u);
    EXPECT_EQ(p_face_maps(1, 2, 2).size(), 8u);
    for (std::int64_t p : {2, 3})
        for (int n = 0; n <= 3; ++n)
            for (int k = 0; k <= n; ++k) {
                auto maps = p_face_maps(k, n, p);
                EXPECT_EQ(maps.size(), brute(k, n, p));
                EXPECT_EQ(maps.size(), formula(k, n, p));
                for (const auto& m : maps) EXPECT_TRUE(m.is_p_face_map());
            }
}

TEST(FaceMaps, CubeClosureUnderDiscreteMorphisms) {
    std::mt19937_64 rng(6);
    for (const auto& F : small_filtrations())
        for (int t = 0; t < 30; ++t) {
            const int n = 1 + static_cast<int>(rng() % 4), m = 1 + static_cast<int>(rng() % 4);
            CubeMap q = random_cube(F, n, rng);
            // Output coordinate i is v_j, 1 - v_j or a constant.
            std::vector<int> kind(static_cast<std::size_t>(n)), src(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                kind[i] = static_cast<int>(rng() % 4);
                src[i] = static_cast<int>(rng() % static_cast<std::uint64_t>(m));
            }
            CubeMap r(F.group_ptr(), m);
            for (std::uint32_t v = 0; v < r.vertices(); ++v) {
                std::uint32_t image = 0;
                for (int i = 0; i < n; ++i) {
                    std::uint32_t bit = (v >> src[i]) & 1u;
                    std::uint32_t out = kind[i] == 0 ? bit : kind[i] == 1 ? 1u - bit : static_cast<std::uint32_t>(kind[i] - 2);
                    image |= out << i;
                }
                r.set(v, q.at(image));
            }
            EXPECT_TRUE(is_cube(r, F));
        }
}

TEST(Caps, HardErrors) {
    auto D1 = make_Dk(FiniteAbelianPGroup(2, {1}), 1);
    EXPECT_THROW(CubeMap(D1.group_ptr(), 21), std::invalid_argument);
    EXPECT_THROW(BoxMap(D1.group_ptr(), {0, 0}, {1000, 1000}), std::invalid_argument);
}
