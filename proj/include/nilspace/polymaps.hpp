#pragma once

#include "nilspace/cubes.hpp"

#include <map>
#include <optional>
#include <vector>

namespace nilspace {

using MultiIndex = std::vector<int>;

// Colexicographic: last coordinate most significant.
struct ColexLess {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

// f(x) = sum_w coeffs[w] * binom(x, w) on Z^n, values in target's group.
struct PolyMap {
    int n = 0;
    FilteredGroup target;
    std::map<MultiIndex, Residues, ColexLess> coeffs;

    PolyMap(int n_, FilteredGroup target_) : n(n_), target(std::move(target_)) {}

    int height() const;  // max |w| over nonzero coefficients, -1 if zero map
    PolyMap normalized() const;  // drops zero coefficients
    void set(const MultiIndex& w, const Residues& a);
};

Residues eval(const PolyMap& f, const std::vector<std::int64_t>& x);
PolyMap derivative(const PolyMap& f, const std::vector<std::int64_t>& h);
PolyMap from_values(const BoxMap& values, const FilteredGroup& target);
bool is_morphism(const PolyMap& f, const FilteredGroup& target);
bool is_morphism(const PolyMap& f);

// Forward-difference Newton coefficients of an integer table on [0, len).
std::vector<BigInt> newton_coeffs_int(const std::vector<std::int64_t>& values);

// f on [0, p-1]^n as a BoxMap.
BoxMap restrict_to_pbox(const PolyMap& f, std::int64_t p);

bool hom_pn_test(const BoxMap& f, std::int64_t p, const FilteredGroup& fg);

enum class DirectionMode { Generators, AllDirections };

// f is a table on [0,p-1]^n read as a map Z_p^n -> G.
bool is_hom_Zpn(const BoxMap& f, std::int64_t p, const FilteredGroup& fg,
                DirectionMode mode = DirectionMode::Generators);

// One period of m_i^(p).
std::vector<std::int64_t> m_i_p(std::int64_t p, int i);
// m_i^(p) as a polynomial map into H_i^(p) reduced mod p^R.
PolyMap m_i_polymap(std::int64_t p, int i, int R);

std::int64_t g_prime_t(std::int64_t p, const std::vector<int>& t, const std::vector<std::int64_t>& x);

std::vector<std::int64_t> apply_Ap(const std::vector<std::int64_t>& v);
std::vector<std::int64_t> apply_Ap_power(const std::vector<std::int64_t>& v, int times);
// Returns a 1-based witnessing center, or nullopt.
std::optional<int> is_circular(const std::vector<std::int64_t>& v);
bool check_circular_power(const std::vector<std::int64_t>& v);

// Cyclic forward difference over one period.
std::vector<std::int64_t> cyclic_difference(const std::vector<std::int64_t>& v);

}  // namespace nilspace
