#pragma once

#include "nilspace/polymaps.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace nilspace {

using Complex = std::complex<double>;

inline constexpr std::uint64_t kMaxFpFunctionSize = 1000000;

/// Complex-valued table on F_p^n, mixed-radix index with coordinate 1 least
/// significant.
struct FpFunction {
    std::int64_t p = 2;
    int n = 0;
    std::vector<Complex> values;

    FpFunction(std::int64_t p_, int n_);  // zero function
    FpFunction(std::int64_t p_, int n_, std::vector<Complex> v);

    std::uint64_t size() const { return values.size(); }
    bool one_bounded() const;
    std::uint64_t index_of(const std::vector<std::int64_t>& x) const;  // reduces mod p
    std::vector<std::int64_t> point_at(std::uint64_t index) const;
    // Index of point(a) + point(b).
    std::uint64_t add_index(std::uint64_t a, std::uint64_t b) const;
};

FpFunction constant_function(std::int64_t p, int n, Complex c = 1.0);

// x -> f(x + h) conj(f(x)).
FpFunction mult_derivative(const FpFunction& f, const std::vector<std::int64_t>& h);

// ||f||_{U^k}. The default path is the derivative recursion; `naive` sums the
// 2^k-fold product over all (x, h_1..h_k) directly.
double gowers_norm(const FpFunction& f, int k, bool naive = false);

// fhat(xi) = E_x f(x) e(-xi.x / p), indexed like f.
std::vector<Complex> fourier_transform(const FpFunction& f);

int ncpoly_r(std::int64_t p, int k);  // floor((k-1)/(p-1)) + 1

/// Table of j in [0, p^r) standing for j/p^r in T.
struct NCPoly {
    std::int64_t p = 2;
    int n = 0;
    int k = 0;
    int r = 1;
    std::vector<std::int64_t> values;
    bool verified = false;

    std::int64_t modulus() const { return checked_pow(p, r); }
};

// Builds the table, reduces values mod p^r and runs ncpoly_check.
NCPoly make_ncpoly(std::int64_t p, int n, int k, std::vector<std::int64_t> values);

// All (k+1)-fold differences vanish. Generator mode differences along e_i with
// repetition; audit mode uses every h in F_p^n (p^n <= 81).
bool ncpoly_check(const NCPoly& P, bool audit = false);
// Smallest d with all (d+1)-fold differences vanishing, for a table mod p^r.
int ncpoly_degree(std::int64_t p, int n, int r, const std::vector<std::int64_t>& values);

FpFunction phase(const NCPoly& P);
// E_x f(x) conj(e(P(x))).
Complex correlation(const FpFunction& f, const NCPoly& P);

enum class SearchMode { Exhaustive, Coefficient, Auto };

struct SearchResult {
    NCPoly best;
    double correlation = 0;  // |E f e(-P)|
    std::uint64_t candidates = 0;
    bool partial = false;     // budget hit before the family was exhausted
    SearchMode mode_used = SearchMode::Exhaustive;
};

// Exhaustive: every table in [0,p^r)^{p^n} of degree <= k. Coefficient:
// x -> sum_w c_w binom(x, w) with c_w in level |w| of Z_{k,l}, l = k-(r-1)(p-1),
// each candidate re-certified. Ties keep the first candidate in enumeration order.
SearchResult inverse_search(const FpFunction& f, int k, SearchMode mode = SearchMode::Auto,
                            std::uint64_t budget = 10000000);

// S_{r,M} = {z in [0,p-1]^M : |z| < r}, colex order.
std::vector<std::vector<int>> gvn_set(std::int64_t p, int M, int r);

// E_{x,t_1..t_M} prod_{z in S_{k+1,M}} f_z(x + sum_j t_j z_j); fs follows gvn_set order.
Complex gvn_average(int M, int k, const std::vector<FpFunction>& fs, std::uint64_t budget = 100000000);

// Total variation between the pushforward of the cube-parameter measure on
// (Z_p^D)^{n+1} under phi and the uniform measure on Cu^n(target). phi is a
// table on [0,p-1]^D.
double balance_distance(const BoxMap& phi, std::int64_t p, const FilteredGroup& target, int n);

// |Cu^n(F)| = prod_{w in {0,1}^n} |G_{|w|}|, as a double.
double cube_count(const FilteredGroup& f, int n);

/// h on X^S, X = {0..m-1} partitioned into fibers; index has coordinate z = 0
/// least significant.
struct Rank1Input {
    int m = 0;
    int s = 0;
    std::vector<int> fiber_of;
    std::vector<Complex> h;
};

struct Rank1Term {
    Complex lambda;
    std::vector<std::vector<double>> factors;  // factors[z][x], values in {0, 1, -1}
    int designated = 0;                        // factor with zero mean on each fiber
};

std::vector<Rank1Term> rank1_decompose(const Rank1Input& in, double tol = 1e-9);
std::vector<Complex> rank1_reconstruct(const std::vector<Rank1Term>& terms, int m, int s);
// sum over product fibers F of (|F| - 1) * s.
std::uint64_t rank1_bound(const Rank1Input& in);

}  // namespace nilspace
