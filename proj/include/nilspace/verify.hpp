#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nilspace {

struct VerifyOptions {
    bool quick = false;     // smaller sample sizes, same checks
    std::uint64_t seed = 1;
    // "" or "m_i_table": corrupts one entry of the m_i^(p) tables fed to the
    // calculus check.
    std::string inject_fault;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
    double time_limit_seconds = 0;
};

using CriterionFn = CriterionResult (*)(const VerifyOptions&);

CriterionResult criterion_quotient_examples(const VerifyOptions& o);
CriterionResult criterion_mi_calculus(const VerifyOptions& o);
CriterionResult criterion_cube_counting(const VerifyOptions& o);
CriterionResult criterion_corner_completion(const VerifyOptions& o);
CriterionResult criterion_homogeneity_equivalence(const VerifyOptions& o);
CriterionResult criterion_hom_p_inclusion(const VerifyOptions& o);
CriterionResult criterion_cyclic_classification(const VerifyOptions& o);
CriterionResult criterion_splitting_witness(const VerifyOptions& o);
CriterionResult criterion_gowers_suite(const VerifyOptions& o);
CriterionResult criterion_inverse_search(const VerifyOptions& o);
CriterionResult criterion_balance(const VerifyOptions& o);
CriterionResult criterion_gvn(const VerifyOptions& o);
CriterionResult criterion_rank1(const VerifyOptions& o);

const std::vector<CriterionFn>& all_criteria();
std::vector<CriterionResult> run_all_criteria(const VerifyOptions& o);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace nilspace
