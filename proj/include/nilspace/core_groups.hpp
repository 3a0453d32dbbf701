#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nilspace {

using BigInt = boost::multiprecision::cpp_int;
using Residues = std::vector<std::int64_t>;
using FpVector = std::vector<std::int64_t>;

bool is_prime(std::int64_t n);

// base^exp, throws std::overflow_error past int64 range.
std::int64_t checked_pow(std::int64_t base, int exp);

// Non-negative representative of a mod m (m > 0).
inline std::int64_t mod_floor(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

std::int64_t mod_floor(const BigInt& a, std::int64_t m);

/// Product of cyclic groups Z_{p^{r_1}} x ... x Z_{p^{r_m}}.
///
/// Elements are residue vectors; the group is a value type and is compared
/// structurally, so two separately built copies of Z_9 are the same group.
class FiniteAbelianPGroup {
public:
    static constexpr int kMaxLogOrder = 40;

    FiniteAbelianPGroup(std::int64_t p, std::vector<int> orders);

    std::int64_t p() const { return p_; }
    const std::vector<int>& orders() const { return orders_; }
    const std::vector<std::int64_t>& moduli() const { return moduli_; }
    std::int64_t modulus(std::size_t j) const { return moduli_.at(j); }
    std::size_t rank() const { return orders_.size(); }
    int log_order() const { return log_order_; }
    bool is_trivial() const { return orders_.empty(); }

    BigInt order() const;
    // Throws std::overflow_error if the order does not fit in 63 bits.
    std::uint64_t order_u64() const;

    Residues zero() const { return Residues(rank(), 0); }
    Residues reduce(const Residues& a) const;
    bool is_reduced(const Residues& a) const;
    Residues add(const Residues& a, const Residues& b) const;
    Residues sub(const Residues& a, const Residues& b) const;
    Residues neg(const Residues& a) const;
    Residues scale(std::int64_t n, const Residues& a) const;
    Residues scale(const BigInt& n, const Residues& a) const;

    // Mixed-radix index with component 0 least significant.
    std::uint64_t index_of(const Residues& a) const;
    Residues element_at(std::uint64_t index) const;

    // Smallest e with p^e * a = 0.
    int log_element_order(const Residues& a) const;

    std::string to_string() const;  // "Z[3^2 x 3^1]"

    bool operator==(const FiniteAbelianPGroup& o) const {
        return p_ == o.p_ && orders_ == o.orders_;
    }

private:
    std::int64_t p_;
    std::vector<int> orders_;
    std::vector<std::int64_t> moduli_;
    int log_order_ = 0;
};

using GroupPtr = std::shared_ptr<const FiniteAbelianPGroup>;

GroupPtr make_group(std::int64_t p, std::vector<int> orders);
GroupPtr share(const FiniteAbelianPGroup& g);

// Parses "Z[3^2 x 3^1]"; "Z[]" is the trivial group (prime given separately).
FiniteAbelianPGroup parse_group(std::string_view text,
                                std::optional<std::int64_t> trivial_prime = std::nullopt);

struct GroupElement {
    GroupPtr group;
    Residues residues;
};

GroupElement make_element(GroupPtr g, const Residues& residues);
GroupElement elem_add(const GroupElement& a, const GroupElement& b);
GroupElement elem_scalar(std::int64_t n, const GroupElement& a);
GroupElement elem_scalar(const BigInt& n, const GroupElement& a);

/// prod_j p^{e_j} Z_{p^{r_j}}; e_j == r_j is the zero component.
struct ComponentwiseSubgroup {
    std::vector<int> exponents;

    static ComponentwiseSubgroup whole(const FiniteAbelianPGroup& g);
    static ComponentwiseSubgroup zero(const FiniteAbelianPGroup& g);

    bool valid_for(const FiniteAbelianPGroup& g) const;
    bool contains(const FiniteAbelianPGroup& g, const Residues& x) const;
    bool is_subgroup_of(const ComponentwiseSubgroup& other) const;
    bool is_zero(const FiniteAbelianPGroup& g) const;
    ComponentwiseSubgroup intersect(const ComponentwiseSubgroup& other) const;
    int log_order(const FiniteAbelianPGroup& g) const;
    std::uint64_t size(const FiniteAbelianPGroup& g) const;
    // Enumeration in mixed-radix order of the subgroup's own coordinates.
    Residues element_at(const FiniteAbelianPGroup& g, std::uint64_t index) const;
    std::vector<Residues> elements(const FiniteAbelianPGroup& g) const;

    bool operator==(const ComponentwiseSubgroup& o) const { return exponents == o.exponents; }
};

// binom(n, k) with binom(n, k) = 0 for 0 <= n < k and
// binom(-n, k) = (-1)^k binom(n + k - 1, k).
BigInt binom(const BigInt& n, std::uint64_t k);
BigInt multibinom(const std::vector<BigInt>& n, const std::vector<std::uint64_t>& i);
BigInt multibinom(const std::vector<std::int64_t>& n, const std::vector<std::int64_t>& i);

std::int64_t inverse_mod(std::int64_t a, std::int64_t p);

/// Subspace of F_p^dim kept in reduced row-echelon form.
class FpSubspace {
public:
    FpSubspace(std::int64_t p, std::size_t dim);
    static FpSubspace span(std::int64_t p, std::size_t dim, const std::vector<FpVector>& vectors);
    static FpSubspace full(std::int64_t p, std::size_t dim);

    std::int64_t p() const { return p_; }
    std::size_t ambient_dim() const { return dim_; }
    std::size_t dimension() const { return rows_.size(); }
    const std::vector<FpVector>& basis() const { return rows_; }
    const std::vector<std::size_t>& pivots() const { return pivots_; }

    FpVector reduce(const FpVector& v) const;  // remainder after echelon elimination
    bool contains(const FpVector& v) const;
    bool contains(const FpSubspace& other) const;
    FpSubspace intersect(const FpSubspace& other) const;
    FpSubspace sum(const FpSubspace& other) const;
    // Returns false if v was already in the span.
    bool insert(const FpVector& v);

    bool operator==(const FpSubspace& o) const {
        return p_ == o.p_ && dim_ == o.dim_ && rows_ == o.rows_;
    }

private:
    std::int64_t p_;
    std::size_t dim_;
    std::vector<FpVector> rows_;
    std::vector<std::size_t> pivots_;
};

// Vectors extending partial's basis to a basis of within. Picks, at every
// step, the lexicographically smallest vector of within outside the current span.
std::vector<FpVector> subspace_complete_basis(const FpSubspace& partial, const FpSubspace& within);

}  // namespace nilspace
