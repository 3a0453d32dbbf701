#pragma once

#include "nilspace/polymaps.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace nilspace {

struct GroupNilspace {
    FilteredGroup F;
};

bool is_p_homogeneous_nilspace(const GroupNilspace& x);

/// Building block Z_{k,l}^{(p)}.
struct BlockFactor {
    std::int64_t p = 2;
    int k = 1;
    int l = 1;

    int r() const { return block_r(p, k, l); }
    int exact_degree() const;  // l + (p-1) * floor((k-l)/(p-1))
    FilteredGroup realize() const { return make_Zkl(p, k, l); }
    // "D(l;Z[p^1])" when r = 1, else "Z(k*,l;p)" with k* the exact degree.
    std::string name() const;
    BlockFactor canonical() const { return BlockFactor{p, exact_degree(), l}; }

    bool operator==(const BlockFactor& o) const { return p == o.p && k == o.k && l == o.l; }
};

// Canonical multiset: canonical() factors sorted by (l, exact degree).
std::vector<BlockFactor> canonical_type(std::vector<BlockFactor> factors);
std::string type_name(const std::vector<BlockFactor>& factors);  // "1" when empty
FilteredGroup realize(const std::vector<BlockFactor>& factors, std::int64_t p, int degree = -1);

/// Parsed form of the product mini-language "Z(4,2;3)xD(2;Z[3^1 x 3^2])".
struct NilspaceExpr {
    std::int64_t p = 0;
    std::vector<FilteredGroup> factors;
    // Building-block reading of each factor, when it is one (D over Z_p^m splits
    // into m copies of Z_{k,k}).
    std::vector<std::vector<BlockFactor>> blocks;
    bool all_blocks() const;
    std::vector<BlockFactor> block_list() const;
    FilteredGroup realize() const;
};

NilspaceExpr parse_nilspace(std::string_view text);
// Accepts either the product mini-language or the "F[...]" filtration form.
FilteredGroup parse_filtered_any(std::string_view text);

struct QpkMember {
    std::int64_t p;
    int k;
    std::vector<int> a;  // a[l-1] = multiplicity of Z_{k,l}

    std::vector<BlockFactor> factors() const;
    FilteredGroup realize() const;
    int log_order() const;
    std::string name() const;
};

// All members with |group| <= bound, ordered by order then colex on a.
// The trivial member is always included.
std::vector<QpkMember> enumerate_Qpk(std::int64_t p, int k, std::uint64_t bound);

/// Homomorphism given by the images of the standard generators of source.
struct FilteredHomomorphism {
    FilteredGroup source;
    FilteredGroup target;
    std::vector<Residues> images;

    Residues apply(const Residues& x) const;
    bool well_defined() const;
    bool is_filtered() const;
};

FilteredHomomorphism identity_hom(const FilteredGroup& f);

// Size of the subgroup generated by gens (closure enumeration, capped).
std::uint64_t generated_subgroup_size(const FiniteAbelianPGroup& g, const std::vector<Residues>& gens,
                                      std::uint64_t cap = 4000000);

enum class FibrationMode { Levelwise, Audit, Both };

bool fibration_levelwise(const FilteredHomomorphism& psi);
// Corner lifting at dimensions 0..n_max. Corners are enumerated exhaustively
// when there are at most `exhaustive_cap` of them, otherwise sampled.
bool fibration_audit(const FilteredHomomorphism& psi, int n_max, std::uint64_t exhaustive_cap = 200000,
                     std::uint64_t samples = 20000, std::uint64_t seed = 1);
// Both mode throws std::runtime_error when the two paths disagree.
bool check_fibration(const FilteredHomomorphism& psi, int n_max, FibrationMode mode = FibrationMode::Levelwise);

struct QuotientResult {
    std::vector<BlockFactor> factors;            // canonical, trivial factors dropped
    std::vector<BlockFactor> source_normalized;  // X reordered by descending r
    std::vector<std::vector<std::int64_t>> A;    // columns of the change of basis
    std::int64_t det_mod_p = 0;
    std::vector<int> b;          // b_i per block of the top structure group
    std::vector<int> block_r;    // r of each block
    int log_order_source = 0;
    int log_order_quotient = 0;
    int dim_H = 0;
    bool phi_is_filtered_iso = false;
    // X (in the caller's factor order) -> realized quotient.
    std::optional<FilteredHomomorphism> projection;

    std::string name() const { return type_name(factors); }
};

// X given as building blocks of common degree bound k = max factor k; H lives
// in the top structure group, one coordinate per factor of exact degree k in
// the order those factors appear in X.
QuotientResult quotient_by_subspace(const std::vector<BlockFactor>& x, const FpSubspace& h);

struct LiftResult {
    BoxMap g;
    bool corrected = false;
    std::uint64_t attempts = 0;
};

// f: table on [0,p-1]^n into psi.target; returns g into psi.source with
// psi o g = f and g a morphism from D_1(Z_p^n).
LiftResult lift_morphism(const FilteredHomomorphism& psi, const BoxMap& f, std::uint64_t max_attempts = 1000000);

/// X = prod_{i<=k} D_i(Z_p^{a_i}) with k <= p.
struct HighCharSpace {
    std::int64_t p;
    std::vector<int> a;
    FilteredGroup X;
    std::vector<int> offset;  // first coordinate of block i (0-based i)

    int k() const { return static_cast<int>(a.size()); }
    int prefix_dim(int i) const;  // a_1 + ... + a_{i-1}, i is 1-based
};

HighCharSpace make_high_char_space(std::int64_t p, const std::vector<int>& a);

// T1 is a constant in Z_p^{a_1}; T[i-2] is a polynomial in the first
// a_1+..+a_{i-1} coordinates with values in D_{i-1}(Z_p^{a_i}).
struct TranslationTuple {
    Residues T1;
    std::vector<PolyMap> T;
};

TranslationTuple identity_translation(const HighCharSpace& s);
// Coefficients live on monomials of weighted degree <= i-1, where a coordinate
// from block j has weight j, and each exponent is at most p-1.
bool is_valid_translation(const HighCharSpace& s, const TranslationTuple& t);
Residues apply_translation(const HighCharSpace& s, const TranslationTuple& t, const Residues& x);
// Reads a tuple back from an arbitrary map given as a permutation of X.
TranslationTuple tuple_from_map(const HighCharSpace& s, const std::vector<std::uint64_t>& perm);
std::vector<std::uint64_t> translation_permutation(const HighCharSpace& s, const TranslationTuple& t);
std::vector<std::uint64_t> group_translation_permutation(const FilteredGroup& f, const Residues& g);
// order(perm) divides p^{floor((k-level)/(p-1))+1}.
bool translation_p_power_check(const std::vector<std::uint64_t>& perm, std::int64_t p, int k, int level);

}  // namespace nilspace
