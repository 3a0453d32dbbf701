#include "nilspace/homogeneity.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <functional>
#include <random>
#include <set>

using namespace nilspace;

namespace {

const std::vector<BlockFactor> kX = {{3, 4, 2}, {3, 4, 4}};

// Number of multiplicity vectors a with sum_l a_l r(k,l,p) <= e, by recursion.
std::size_t count_members(std::int64_t p, int k, int e) {
    std::function<std::size_t(int, int)> rec = [&](int l, int left) -> std::size_t {
        if (l > k) return 1;
        std::size_t total = 0;
        int r = block_r(p, k, l);
        for (int a = 0; a * r <= left; ++a) total += rec(l + 1, left - a * r);
        return total;
    };
    return rec(1, e);
}

std::uint64_t kernel_size(const FilteredHomomorphism& psi) {
    const auto& g = psi.source.group();
    std::uint64_t z = 0;
    for (std::uint64_t i = 0; i < g.order_u64(); ++i) z += psi.apply(g.element_at(i)) == psi.target.group().zero();
    return z;
}

// Random translation tuple: uniform coefficients on admissible monomials.
TranslationTuple random_translation(const HighCharSpace& s, std::mt19937_64& rng) {
    TranslationTuple t = identity_translation(s);
    for (auto& c : t.T1) c = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(s.p));
    for (int i = 2; i <= s.k(); ++i) {
        auto& poly = t.T[static_cast<std::size_t>(i - 2)];
        const int N = s.prefix_dim(i);
        MultiIndex w(static_cast<std::size_t>(N), 0);
        std::function<void(int, int)> rec = [&](int v, int wdeg) {
            if (v == N) {
                Residues a(static_cast<std::size_t>(s.a[i - 1]));
                for (auto& c : a) c = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(s.p));
                poly.set(w, a);
                return;
            }
            int weight = 1;
            while (v >= s.offset[weight]) ++weight;
            for (int e = 0; e <= s.p - 1 && wdeg + weight * e <= i - 1; ++e) {
                w[v] = e;
                rec(v + 1, wdeg + weight * e);
            }
            w[v] = 0;
        };
        rec(0, 0);
    }
    return t;
}

std::vector<std::uint64_t> compose(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    std::vector<std::uint64_t> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[b[i]];
    return out;
}

bool preserves_cubes(const FilteredGroup& X, const std::vector<std::uint64_t>& perm, int n, int trials, std::mt19937_64& rng) {
    const auto& g = X.group();
    for (int t = 0; t < trials; ++t) {
        CubeMap a(X.group_ptr(), n);
        for (std::uint32_t w = 0; w < a.vertices(); ++w) {
            const auto& lvl = X.level(std::popcount(w));
            a.set(w, lvl.element_at(g, rng() % lvl.size(g)));
        }
        CubeMap q = mobius_reconstruct(a), image(X.group_ptr(), n);
        for (std::uint32_t v = 0; v < q.vertices(); ++v) image.set(v, g.element_at(perm[g.index_of(q.at(v))]));
        if (!is_cube(image, X)) return false;
    }
    return true;
}

}  // namespace

TEST(Parsing, ProductForm) {
    auto e = parse_nilspace("Z(4,2;3) x D(2;Z[3^1 x 3^1])");
    EXPECT_EQ(e.p, 3);
    EXPECT_TRUE(e.all_blocks());
    EXPECT_EQ(e.block_list().size(), 3u);
    EXPECT_EQ(e.realize(), product(product(make_Zkl(3, 4, 2), make_Dk(FiniteAbelianPGroup(3, {1}), 2)),
                                   make_Dk(FiniteAbelianPGroup(3, {1}), 2)));
    EXPECT_FALSE(parse_nilspace("D(2;Z[2^2])").all_blocks());
    EXPECT_EQ(parse_filtered_any("Z(4,2;3)"), parse_filtered_any("F[p=3,k=4; Z9,Z9,3Z9,3Z9]"));
    for (const char* bad : {"Z(4,2;4)", "Z(2,3;3)", "Z(4,2;3)xZ(1,1;2)", "Z(4,2;3", "D(0;Z[3^1])", "Y(1,1;3)"}) {
        try {
            parse_nilspace(bad);
            ADD_FAILURE() << bad;
        } catch (const std::invalid_argument& err) {
            EXPECT_NE(std::string(err.what()).find("byte"), std::string::npos) << err.what();
        }
    }
}

TEST(Parsing, NamesRoundTrip) {
    for (std::int64_t p : {2, 3, 5})
        for (int k = 1; k <= 6; ++k)
            for (int l = 1; l <= k; ++l) {
                BlockFactor b{p, k, l};
                auto e = parse_nilspace(b.name());
                ASSERT_EQ(e.block_list().size(), 1u);
                EXPECT_EQ(e.block_list()[0].canonical(), b.canonical());
                EXPECT_EQ(b.canonical().realize().with_degree(k), b.realize());
            }
    EXPECT_EQ(type_name({}), "1");
}

TEST(Catalog, Examples) {
    auto m = enumerate_Qpk(3, 2, 9);
    ASSERT_EQ(m.size(), 6u);
    std::vector<std::uint64_t> orders;
    for (const auto& q : m) orders.push_back(q.realize().group().order_u64());
    EXPECT_EQ(orders, std::vector<std::uint64_t>({1, 3, 3, 9, 9, 9}));
    EXPECT_EQ(enumerate_Qpk(3, 2, 0).size(), 1u);
    EXPECT_EQ(enumerate_Qpk(3, 2, 2).size(), 1u);
    EXPECT_THROW(enumerate_Qpk(4, 2, 9), std::invalid_argument);
}

TEST(Catalog, CountsAndHomogeneity) {
    for (std::int64_t p : {2, 3, 5})
        for (int k = 1; k <= 5; ++k)
            for (int e = 0; e <= 4; ++e) {
                std::uint64_t bound = 1;
                for (int i = 0; i < e; ++i) bound *= static_cast<std::uint64_t>(p);
                auto m = enumerate_Qpk(p, k, bound);
                EXPECT_EQ(m.size(), count_members(p, k, e)) << p << " " << k << " " << e;
                std::set<std::vector<int>> seen;
                for (const auto& q : m) {
                    EXPECT_TRUE(seen.insert(q.a).second);
                    auto F = q.realize();
                    EXPECT_TRUE(is_p_homogeneous_nilspace(GroupNilspace{F}));
                    EXPECT_EQ(F.group().order_u64(), static_cast<std::uint64_t>(std::pow(p, q.log_order())));
                    EXPECT_LE(F.group().order_u64(), bound);
                }
            }
}

TEST(Homogeneity, NilspaceExamples) {
    auto bad = FilteredGroup(make_group(3, {2}), {ComponentwiseSubgroup{{0}}, ComponentwiseSubgroup{{0}}, ComponentwiseSubgroup{{0}}});
    EXPECT_FALSE(is_p_homogeneous_nilspace(GroupNilspace{bad}));
    EXPECT_TRUE(is_p_homogeneous_nilspace(GroupNilspace{make_Dk(FiniteAbelianPGroup(3, {1, 1}), 3)}));
}

TEST(Quotient, Examples) {
    EXPECT_EQ(quotient_by_subspace(kX, FpSubspace::full(3, 2)).name(), "D(2;Z[3^1])");
    EXPECT_EQ(quotient_by_subspace(kX, FpSubspace::span(3, 2, {{1, 0}})).name(), "D(2;Z[3^1])xD(4;Z[3^1])");
    EXPECT_EQ(quotient_by_subspace(kX, FpSubspace::span(3, 2, {{1, 1}})).name(), "Z(4,2;3)");
    EXPECT_EQ(quotient_by_subspace(kX, FpSubspace(3, 2)).name(), "Z(4,2;3)xD(4;Z[3^1])");
}

TEST(Quotient, Soundness) {
    std::mt19937_64 rng(21);
    const std::vector<std::vector<BlockFactor>> sources = {
        kX,
        {{3, 4, 2}, {3, 4, 2}, {3, 4, 4}},
        {{2, 3, 1}, {2, 3, 2}, {2, 3, 3}},
        {{3, 3, 1}, {3, 3, 3}, {3, 3, 2}},
        {{5, 5, 1}, {5, 5, 5}},
    };
    for (const auto& x : sources) {
        const std::int64_t p = x[0].p;
        const int k = x[0].k;
        std::size_t top = 0;
        for (const auto& b : x) top += b.exact_degree() == k;
        for (int t = 0; t < 12; ++t) {
            std::vector<FpVector> gens(rng() % (top + 1));
            for (auto& v : gens) {
                v.resize(top);
                for (auto& c : v) c = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(p));
            }
            auto H = FpSubspace::span(p, top, gens);
            auto q = quotient_by_subspace(x, H);
            EXPECT_NE(q.det_mod_p % p, 0);
            EXPECT_EQ(q.log_order_quotient, q.log_order_source - static_cast<int>(H.dimension()));
            int lo = 0;
            for (const auto& b : q.factors) lo += b.r();
            EXPECT_EQ(lo, q.log_order_quotient);
            // Another basis of the same subspace.
            std::vector<FpVector> mixed = H.basis();
            for (std::size_t i = 1; i < mixed.size(); ++i)
                for (std::size_t j = 0; j < top; ++j) mixed[i][j] = mod_floor(mixed[i][j] + 2 * mixed[i - 1][j], p);
            if (!mixed.empty())
                for (auto& c : mixed[0]) c = mod_floor(c * (p - 1), p);
            EXPECT_EQ(quotient_by_subspace(x, FpSubspace::span(p, top, mixed)).name(), q.name());
            // The projection is a fibration onto a homogeneous nilspace with
            // kernel of size p^{dim H}.
            ASSERT_TRUE(q.projection.has_value());
            const auto& psi = *q.projection;
            EXPECT_TRUE(psi.well_defined());
            EXPECT_TRUE(psi.is_filtered());
            EXPECT_TRUE(is_p_homogeneous_nilspace(GroupNilspace{psi.target}));
            EXPECT_TRUE(check_fibration(psi, 2, FibrationMode::Levelwise));
            if (psi.source.group().order_u64() <= 729) {
                EXPECT_EQ(kernel_size(psi), static_cast<std::uint64_t>(std::pow(p, H.dimension())));
                if (t < 3) EXPECT_NO_THROW(EXPECT_TRUE(check_fibration(psi, 2, FibrationMode::Both)));
            }
        }
    }
}

TEST(Fibrations, Examples) {
    auto Z9 = make_Dk(FiniteAbelianPGroup(3, {2}), 2);
    EXPECT_TRUE(check_fibration(identity_hom(Z9), 2, FibrationMode::Both));
    // Z_3 -> Z_9, 1 -> 3: injective but not onto any level.
    FilteredHomomorphism inc{make_Dk(FiniteAbelianPGroup(3, {1}), 2), Z9, {{3}}};
    EXPECT_TRUE(inc.well_defined());
    EXPECT_FALSE(check_fibration(inc, 2, FibrationMode::Both));
    FilteredHomomorphism bad{make_Dk(FiniteAbelianPGroup(3, {1}), 2), Z9, {{1}}};
    EXPECT_FALSE(bad.well_defined());
    // Z_9 -> Z_3 mod 3 with D_1 target is filtered; onto D_2 it is not.
    FilteredHomomorphism proj{make_Zkl(3, 3, 1), make_Dk(FiniteAbelianPGroup(3, {1}), 1).with_degree(3), {{1}}};
    EXPECT_TRUE(proj.is_filtered());
    EXPECT_TRUE(check_fibration(proj, 3, FibrationMode::Both));
}

TEST(Fibrations, LevelwiseAgreesWithAudit) {
    std::mt19937_64 rng(22);
    const std::vector<FilteredGroup> spaces = {make_Zkl(3, 3, 1), make_Zkl(2, 2, 1), make_Dk(FiniteAbelianPGroup(2, {1, 1}), 2),
                                               make_Dk(FiniteAbelianPGroup(3, {1}), 2).with_degree(3),
                                               product(make_Zkl(2, 2, 1), make_Zkl(2, 2, 2))};
    int tested = 0, fibrations = 0;
    for (const auto& S : spaces)
        for (const auto& T : spaces) {
            if (S.group().p() != T.group().p()) continue;
            for (int t = 0; t < 30; ++t) {
                FilteredHomomorphism psi{S, T, {}};
                for (std::size_t j = 0; j < S.group().rank(); ++j)
                    psi.images.push_back(T.group().element_at(rng() % T.group().order_u64()));
                if (!psi.well_defined() || !psi.is_filtered()) continue;
                ++tested;
                bool both = false;
                EXPECT_NO_THROW(both = check_fibration(psi, 2, FibrationMode::Both));
                fibrations += both;
            }
        }
    EXPECT_GT(tested, 20);
    EXPECT_GT(fibrations, 0);
}

TEST(Lift, IdentityAndSplitting) {
    auto D = make_Dk(FiniteAbelianPGroup(3, {1}), 2);
    BoxMap f(D.group_ptr(), {0, 0}, {2, 2});
    for (std::uint64_t i = 0; i < f.points(); ++i) {
        auto o = f.offset_at(i);
        f.set(i, {mod_floor(o[0] * o[1] + 2 * o[0], 3)});
    }
    EXPECT_EQ(lift_morphism(identity_hom(D), f).g, f);
    for (std::int64_t p : {2, 3}) {
        FilteredGroup X = make_Zkl(p, static_cast<int>(p), 1);
        FilteredGroup Y = make_Dk(FiniteAbelianPGroup(p, {1}), 1).with_degree(static_cast<int>(p));
        FilteredHomomorphism psi{X, Y, {{1}}};
        BoxMap id(Y.group_ptr(), {0}, {static_cast<int>(p - 1)});
        for (int x = 0; x < p; ++x) id.set(static_cast<std::uint64_t>(x), {x});
        auto lift = lift_morphism(psi, id);
        for (std::uint64_t x = 0; x < id.points(); ++x) EXPECT_EQ(psi.apply(lift.g.at(x)), id.at(x));
        EXPECT_TRUE(is_hom_Zpn(lift.g, p, X, DirectionMode::AllDirections));
    }
}

TEST(Lift, EveryMorphismLiftsExhaustive) {
    FilteredGroup X = make_Zkl(3, 3, 1);
    FilteredGroup Y = make_Dk(FiniteAbelianPGroup(3, {1}), 1).with_degree(3);
    FilteredHomomorphism psi{X, Y, {{1}}};
    int morphisms = 0;
    for (int code = 0; code < 27; ++code) {
        BoxMap f(Y.group_ptr(), {0}, {2});
        for (int x = 0, c = code; x < 3; ++x, c /= 3) f.set(static_cast<std::uint64_t>(x), {c % 3});
        if (!is_hom_Zpn(f, 3, Y)) continue;
        ++morphisms;
        auto lift = lift_morphism(psi, f);
        for (std::uint64_t x = 0; x < 3; ++x) EXPECT_EQ(psi.apply(lift.g.at(x)), f.at(x));
        EXPECT_TRUE(is_hom_Zpn(lift.g, 3, X));
    }
    EXPECT_EQ(morphisms, 9);  // affine maps Z_3 -> Z_3
}

TEST(Translations, Basics) {
    auto s = make_high_char_space(3, {1, 1, 1});
    auto id = identity_translation(s);
    EXPECT_TRUE(is_valid_translation(s, id));
    auto perm = translation_permutation(s, id);
    for (std::uint64_t i = 0; i < perm.size(); ++i) EXPECT_EQ(perm[i], i);
    auto shift = id;
    shift.T1 = {2};
    const auto& g = s.X.group();
    for (std::uint64_t i = 0; i < g.order_u64(); ++i) {
        auto x = g.element_at(i);
        EXPECT_EQ(apply_translation(s, shift, x), g.add(x, Residues({2, 0, 0})));
    }
    // x_1^2 has weight 2, too heavy for T_2.
    auto heavy = id;
    heavy.T[0].set({2}, {1});
    EXPECT_FALSE(is_valid_translation(s, heavy));
    EXPECT_THROW(make_high_char_space(2, {1, 1, 1}), std::invalid_argument);
}

TEST(Translations, CompositionClosureAndRoundTrip) {
    std::mt19937_64 rng(23);
    for (const auto& [p, a] : std::vector<std::pair<std::int64_t, std::vector<int>>>{{3, {1, 1, 1}}, {3, {2, 1}}, {2, {1, 2}}, {5, {1, 1, 1}}}) {
        auto s = make_high_char_space(p, a);
        for (int t = 0; t < 6; ++t) {
            auto t1 = random_translation(s, rng), t2 = random_translation(s, rng);
            ASSERT_TRUE(is_valid_translation(s, t1));
            auto p1 = translation_permutation(s, t1), p2 = translation_permutation(s, t2);
            EXPECT_EQ(std::set<std::uint64_t>(p1.begin(), p1.end()).size(), p1.size());
            auto c = compose(p1, p2);
            for (int n = 1; n <= s.k() + 1; ++n) EXPECT_TRUE(preserves_cubes(s.X, c, n, 10, rng));
            auto back = tuple_from_map(s, c);
            EXPECT_TRUE(is_valid_translation(s, back));
            EXPECT_EQ(translation_permutation(s, back), c);
            EXPECT_EQ(translation_permutation(s, tuple_from_map(s, p1)), p1);
            EXPECT_TRUE(translation_p_power_check(p1, p, s.k(), 1));
            if (s.k() < p) {
                auto it = p1;
                for (int j = 1; j < p; ++j) it = compose(p1, it);
                for (std::uint64_t i = 0; i < it.size(); ++i) EXPECT_EQ(it[i], i);
            }
        }
    }
}

TEST(Translations, PPowerOrders) {
    for (std::int64_t p : {2, 3, 5})
        for (int k = 1; k <= 5; ++k)
            for (int l = 1; l <= k; ++l) {
                auto Z = make_Zkl(p, k, l);
                auto perm = group_translation_permutation(Z, {1});
                EXPECT_TRUE(translation_p_power_check(perm, p, k, l));
                if (block_r(p, k, l) > 1) EXPECT_FALSE(translation_p_power_check(perm, p, k, k));
                auto id = group_translation_permutation(Z, {0});
                EXPECT_TRUE(translation_p_power_check(id, p, k, k));
            }
}

TEST(Subgroups, GeneratedSize) {
    FiniteAbelianPGroup g(3, {2, 1});
    EXPECT_EQ(generated_subgroup_size(g, {}), 1u);
    EXPECT_EQ(generated_subgroup_size(g, {{1, 0}}), 9u);
    EXPECT_EQ(generated_subgroup_size(g, {{3, 0}, {0, 1}}), 9u);
    EXPECT_EQ(generated_subgroup_size(g, {{1, 1}, {0, 1}}), 27u);
}
