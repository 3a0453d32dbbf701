#pragma once

#include "nilspace/filtrations.hpp"

#include <cstdint>
#include <vector>

namespace nilspace {

inline constexpr int kMaxCubeDim = 20;
inline constexpr std::uint64_t kMaxBoxPoints = 1000000;

// Table on {0,1}^n. Bit i of the vertex index is coordinate v(i+1).
class CubeMap {
public:
    CubeMap(GroupPtr group, int n);

    const GroupPtr& group_ptr() const { return group_; }
    const FiniteAbelianPGroup& group() const { return *group_; }
    int dim() const { return n_; }
    std::uint32_t vertices() const { return 1u << n_; }

    Residues at(std::uint32_t v) const;
    void set(std::uint32_t v, const Residues& value);
    std::int64_t* raw(std::uint32_t v) { return data_.data() + v * group_->rank(); }
    const std::int64_t* raw(std::uint32_t v) const { return data_.data() + v * group_->rank(); }

    bool operator==(const CubeMap& o) const {
        return *group_ == *o.group_ && n_ == o.n_ && data_ == o.data_;
    }

private:
    GroupPtr group_;
    int n_;
    std::vector<std::int64_t> data_;
};

// A CubeMap whose top vertex 1^n is ignored.
struct Corner {
    CubeMap table;
};

// Table on B_{a,l} = prod [a_i, a_i + l_i], coordinate 1 least significant.
class BoxMap {
public:
    BoxMap(GroupPtr group, std::vector<std::int64_t> base, std::vector<int> extents);

    const GroupPtr& group_ptr() const { return group_; }
    const FiniteAbelianPGroup& group() const { return *group_; }
    const std::vector<std::int64_t>& base() const { return base_; }
    const std::vector<int>& extents() const { return extents_; }
    std::size_t dim() const { return extents_.size(); }
    std::uint64_t points() const { return points_; }
    int total_extent() const;

    // Offsets relative to base.
    std::uint64_t index_of(const std::vector<int>& offset) const;
    std::vector<int> offset_at(std::uint64_t index) const;

    Residues at(std::uint64_t index) const;
    Residues at(const std::vector<int>& offset) const { return at(index_of(offset)); }
    void set(std::uint64_t index, const Residues& value);
    void set(const std::vector<int>& offset, const Residues& value) { set(index_of(offset), value); }

    // Sub-box with the given offset-base and extents.
    BoxMap sub_box(const std::vector<int>& offset, const std::vector<int>& extents) const;

    bool operator==(const BoxMap& o) const {
        return *group_ == *o.group_ && base_ == o.base_ && extents_ == o.extents_ && data_ == o.data_;
    }

private:
    GroupPtr group_;
    std::vector<std::int64_t> base_;
    std::vector<int> extents_;
    std::uint64_t points_ = 1;
    std::vector<std::int64_t> data_;
};

/// Affine map Z^n -> Z^m, x -> base + sum_i x_i columns[i], restricted to
/// {0,1}^n (discrete cube) or [0, p-1]^n (p-discrete cube).
struct AffineCubeMorphism {
    enum class Domain { DiscreteCube, PCube };
    Domain domain = Domain::DiscreteCube;
    std::int64_t p = 2;
    int in_dim = 0;
    int out_dim = 0;
    std::vector<std::int64_t> base;
    std::vector<std::vector<std::int64_t>> columns;

    std::vector<std::int64_t> apply(const std::vector<std::int64_t>& x) const;
    std::vector<std::int64_t> apply_vertex(std::uint32_t v) const;  // DiscreteCube only

    // Each output coordinate is v_i, p-1-v_i or a constant in [0,p-1], and
    // the non-constant ones use distinct inputs.
    bool is_p_face_map() const;
};

CubeMap mobius_coeffs(const CubeMap& q);
CubeMap mobius_reconstruct(const CubeMap& coeffs);  // q(v) = sum_{w <= v} a_w
bool is_cube(const CubeMap& q, const FilteredGroup& f);
Residues gray_code_sum(const CubeMap& q);

// All x such that setting q(1^n) = x gives a cube, sorted by group index.
std::vector<Residues> complete_corner(const Corner& c, const FilteredGroup& f);
// The completion whose top Mobius coefficient is zero.
Residues complete_corner_canonical(const Corner& c, const FilteredGroup& f);

AffineCubeMorphism maximal_cube_p(std::int64_t p, int n);
AffineCubeMorphism maximal_cube_box(const std::vector<std::int64_t>& a, const std::vector<int>& l);

// f o q_{a,l} as a cube of dimension |l|.
CubeMap compose_box_cube(const BoxMap& f);
bool hom_box_test(const BoxMap& f, const FilteredGroup& fg);

// The top value of f is ignored and recomputed.
Residues complete_box_corner(const BoxMap& f, const FilteredGroup& fg);
std::vector<Residues> complete_box_corner_all(const BoxMap& f, const FilteredGroup& fg);

// Extends f from the simplicial set {x : in_s[x]} (base must be 0) to the
// whole box, filling points in colex order.
BoxMap extend_simplicial(const BoxMap& f, const std::vector<bool>& in_s, const FilteredGroup& fg);

std::vector<AffineCubeMorphism> p_face_maps(int k, int n, std::int64_t p);

}  // namespace nilspace
