#pragma once

#include "nilspace/core_groups.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace nilspace {

/// A finite abelian p-group with a non-increasing chain of componentwise
/// subgroups G_0 = G_1 = G >= G_2 >= ... >= G_{k+1} = 0.
///
/// The chain is stored for indices 0..k+1; level(i) for i > k+1 is the zero
/// subgroup. `degree` is an upper bound; `exact()` says whether G_k != 0.
class FilteredGroup {
public:
    // levels[i-1] is G_i for i = 1..k; G_0 and G_{k+1} are filled in.
    FilteredGroup(GroupPtr group, const std::vector<ComponentwiseSubgroup>& levels);

    const GroupPtr& group_ptr() const { return group_; }
    const FiniteAbelianPGroup& group() const { return *group_; }
    std::int64_t p() const { return group_->p(); }
    int degree() const { return degree_; }
    bool exact() const;

    const ComponentwiseSubgroup& level(int i) const;
    std::uint64_t level_size(int i) const { return level(i).size(*group_); }

    // Same group and chain, degree bound raised to k (k >= degree()).
    FilteredGroup with_degree(int k) const;

    // "F[p=3,k=4; Z9,Z9,Z9,3Z9,3Z9]" listing G_1..G_k.
    std::string to_string() const;

    bool operator==(const FilteredGroup& o) const;

private:
    GroupPtr group_;
    int degree_;
    std::vector<ComponentwiseSubgroup> chain_;
    ComponentwiseSubgroup zero_;
};

/// Level j of H_i^(p) is p^{exponent(j)} Z.
struct IntegerFiltrationProfile {
    std::int64_t p;
    int i;
    int exponent(int j) const;
};

FilteredGroup make_Dk(const FiniteAbelianPGroup& a, int k);
FilteredGroup make_Zkl(std::int64_t p, int k, int l);
IntegerFiltrationProfile make_Hip_profile(std::int64_t p, int i);
// H_i^(p) reduced into Z_{p^R}: levels p^{min(R, exponent(j))} Z_{p^R}.
FilteredGroup make_Hip_truncated(std::int64_t p, int i, int R);

int block_r(std::int64_t p, int k, int l);  // floor((k-l)/(p-1)) + 1

FilteredGroup product(const FilteredGroup& f, const FilteredGroup& g);
FilteredGroup product(const std::vector<FilteredGroup>& factors, std::int64_t p);
FilteredGroup trivial_filtered(std::int64_t p);

// First index i with p*G_i not inside G_{i+p-1}, or -1.
int p_homogeneity_violation(const FilteredGroup& f);
bool is_p_homogeneous(const FilteredGroup& f);

struct CyclicClassification {
    bool homogeneous = false;
    std::vector<int> delta;     // drop set, ascending
    int violating_index = -1;   // set when !homogeneous
};

// Requires a cyclic group and exact degree.
CyclicClassification classify_cyclic(const FilteredGroup& f);

// G_i / G_{i+1} in invariant-factor form.
FiniteAbelianPGroup structure_group(const FilteredGroup& f, int i);

// Parses the "F[p=..,k=..; ...]" text form. Errors cite byte offsets.
FilteredGroup parse_filtration(std::string_view text);

}  // namespace nilspace
