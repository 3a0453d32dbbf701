#include "nilspace/cubes.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <stdexcept>
#include <string>

namespace nilspace {

CubeMap::CubeMap(GroupPtr group, int n) : group_(std::move(group)), n_(n) {
    if (!group_) throw std::invalid_argument("CubeMap: null group");
    if (n < 0 || n > kMaxCubeDim)
        throw std::invalid_argument("CubeMap: dimension " + std::to_string(n) + " exceeds cap " +
                                    std::to_string(kMaxCubeDim));
    data_.assign(static_cast<std::size_t>(vertices()) * group_->rank(), 0);
}

Residues CubeMap::at(std::uint32_t v) const {
    const auto* p = raw(v);
    return Residues(p, p + group_->rank());
}

void CubeMap::set(std::uint32_t v, const Residues& value) {
    Residues r = group_->reduce(value);
    std::copy(r.begin(), r.end(), raw(v));
}

BoxMap::BoxMap(GroupPtr group, std::vector<std::int64_t> base, std::vector<int> extents)
    : group_(std::move(group)), base_(std::move(base)), extents_(std::move(extents)) {
    if (!group_) throw std::invalid_argument("BoxMap: null group");
    if (base_.size() != extents_.size()) throw std::invalid_argument("BoxMap: base/extents length mismatch");
    for (int l : extents_) {
        if (l < 0) throw std::invalid_argument("BoxMap: negative extent");
        points_ *= static_cast<std::uint64_t>(l + 1);
        if (points_ > kMaxBoxPoints) throw std::invalid_argument("BoxMap: box exceeds 10^6 points");
    }
    data_.assign(points_ * group_->rank(), 0);
}

int BoxMap::total_extent() const {
    int s = 0;
    for (int l : extents_) s += l;
    return s;
}

std::uint64_t BoxMap::index_of(const std::vector<int>& offset) const {
    std::uint64_t idx = 0;
    for (std::size_t i = extents_.size(); i-- > 0;) {
        if (offset[i] < 0 || offset[i] > extents_[i]) throw std::out_of_range("BoxMap: point outside box");
        idx = idx * static_cast<std::uint64_t>(extents_[i] + 1) + static_cast<std::uint64_t>(offset[i]);
    }
    return idx;
}

std::vector<int> BoxMap::offset_at(std::uint64_t index) const {
    std::vector<int> off(extents_.size());
    for (std::size_t i = 0; i < extents_.size(); ++i) {
        off[i] = static_cast<int>(index % static_cast<std::uint64_t>(extents_[i] + 1));
        index /= static_cast<std::uint64_t>(extents_[i] + 1);
    }
    return off;
}

Residues BoxMap::at(std::uint64_t index) const {
    const auto* p = data_.data() + index * group_->rank();
    return Residues(p, p + group_->rank());
}

void BoxMap::set(std::uint64_t index, const Residues& value) {
    Residues r = group_->reduce(value);
    std::copy(r.begin(), r.end(), data_.begin() + static_cast<std::ptrdiff_t>(index * group_->rank()));
}

BoxMap BoxMap::sub_box(const std::vector<int>& offset, const std::vector<int>& extents) const {
    std::vector<std::int64_t> nb(base_.size());
    for (std::size_t i = 0; i < base_.size(); ++i) {
        if (offset[i] < 0 || offset[i] + extents[i] > extents_[i])
            throw std::out_of_range("BoxMap::sub_box: outside the box");
        nb[i] = base_[i] + offset[i];
    }
    BoxMap out(group_, nb, extents);
    for (std::uint64_t idx = 0; idx < out.points(); ++idx) {
        auto off = out.offset_at(idx);
        for (std::size_t i = 0; i < off.size(); ++i) off[i] += offset[i];
        out.set(idx, at(off));
    }
    return out;
}

std::vector<std::int64_t> AffineCubeMorphism::apply(const std::vector<std::int64_t>& x) const {
    if (static_cast<int>(x.size()) != in_dim) throw std::invalid_argument("AffineCubeMorphism: input dimension");
    std::vector<std::int64_t> out = base;
    for (int i = 0; i < in_dim; ++i)
        for (int j = 0; j < out_dim; ++j) out[j] += x[i] * columns[i][j];
    return out;
}

std::vector<std::int64_t> AffineCubeMorphism::apply_vertex(std::uint32_t v) const {
    std::vector<std::int64_t> x(static_cast<std::size_t>(in_dim));
    for (int i = 0; i < in_dim; ++i) x[i] = (v >> i) & 1u;
    return apply(x);
}

bool AffineCubeMorphism::is_p_face_map() const {
    if (domain != Domain::PCube) return false;
    std::vector<bool> used(static_cast<std::size_t>(in_dim), false);
    int moving = 0;
    for (int j = 0; j < out_dim; ++j) {
        int which = -1;
        for (int i = 0; i < in_dim; ++i) {
            std::int64_t c = columns[i][j];
            if (c == 0) continue;
            if (which >= 0 || (c != 1 && c != -1)) return false;
            which = i;
        }
        if (which < 0) {
            if (base[j] < 0 || base[j] > p - 1) return false;
            continue;
        }
        if (used[which]) return false;
        used[which] = true;
        ++moving;
        std::int64_t c = columns[which][j];
        if ((c == 1 && base[j] != 0) || (c == -1 && base[j] != p - 1)) return false;
    }
    return moving == in_dim;
}

namespace {

void check_group(const CubeMap& q, const FilteredGroup& f) {
    if (!(q.group() == f.group()))
        throw std::invalid_argument("group mismatch: cube in " + q.group().to_string() + ", filtration on " +
                                    f.group().to_string());
}

// In-place Mobius transform over each component.
void mobius_inplace(std::vector<std::int64_t>& a, int n, const std::vector<std::int64_t>& moduli) {
    const std::size_t m = moduli.size();
    for (int b = 0; b < n; ++b) {
        const std::uint32_t bit = 1u << b;
        for (std::uint32_t v = 0; v < (1u << n); ++v) {
            if (!(v & bit)) continue;
            std::int64_t* dst = a.data() + v * m;
            const std::int64_t* src = a.data() + (v ^ bit) * m;
            for (std::size_t j = 0; j < m; ++j) {
                std::int64_t s = dst[j] - src[j];
                dst[j] = s < 0 ? s + moduli[j] : s;
            }
        }
    }
}

}  // namespace

CubeMap mobius_coeffs(const CubeMap& q) {
    CubeMap out = q;
    std::vector<std::int64_t> buf(out.raw(0), out.raw(0) + static_cast<std::size_t>(q.vertices()) * q.group().rank());
    mobius_inplace(buf, q.dim(), q.group().moduli());
    std::copy(buf.begin(), buf.end(), out.raw(0));
    return out;
}

CubeMap mobius_reconstruct(const CubeMap& coeffs) {
    CubeMap out = coeffs;
    const auto& mod = coeffs.group().moduli();
    const std::size_t m = mod.size();
    for (int b = 0; b < coeffs.dim(); ++b) {
        const std::uint32_t bit = 1u << b;
        for (std::uint32_t v = 0; v < coeffs.vertices(); ++v) {
            if (!(v & bit)) continue;
            std::int64_t* dst = out.raw(v);
            const std::int64_t* src = out.raw(v ^ bit);
            for (std::size_t j = 0; j < m; ++j) {
                std::int64_t s = dst[j] + src[j];
                dst[j] = s >= mod[j] ? s - mod[j] : s;
            }
        }
    }
    return out;
}

bool is_cube(const CubeMap& q, const FilteredGroup& f) {
    check_group(q, f);
    const auto& g = q.group();
    const std::size_t m = g.rank();
    const int n = q.dim();
    std::vector<std::int64_t> buf(q.raw(0), q.raw(0) + static_cast<std::size_t>(q.vertices()) * m);
    mobius_inplace(buf, n, g.moduli());
    std::vector<std::vector<std::int64_t>> steps(static_cast<std::size_t>(n + 1), std::vector<std::int64_t>(m));
    for (int w = 0; w <= n; ++w)
        for (std::size_t j = 0; j < m; ++j) steps[w][j] = checked_pow(g.p(), f.level(w).exponents[j]);
    for (std::uint32_t w = 0; w < q.vertices(); ++w) {
        const auto& st = steps[static_cast<std::size_t>(std::popcount(w))];
        const std::int64_t* a = buf.data() + w * m;
        for (std::size_t j = 0; j < m; ++j)
            if (a[j] % st[j] != 0) return false;
    }
    return true;
}

Residues gray_code_sum(const CubeMap& q) {
    const auto& g = q.group();
    Residues acc = g.zero();
    for (std::uint32_t v = 0; v < q.vertices(); ++v) {
        Residues x = q.at(v);
        acc = ((q.dim() - std::popcount(v)) % 2) ? g.sub(acc, x) : g.add(acc, x);
    }
    return acc;
}

namespace {

CubeMap lower_face(const CubeMap& q, int j) {
    CubeMap face(q.group_ptr(), q.dim() - 1);
    for (std::uint32_t u = 0; u < face.vertices(); ++u) {
        std::uint32_t low = u & ((1u << j) - 1);
        std::uint32_t high = (u >> j) << (j + 1);
        face.set(u, q.at(low | high));
    }
    return face;
}

Residues corner_offset(const Corner& c) {
    const auto& q = c.table;
    const auto& g = q.group();
    const std::uint32_t top = q.vertices() - 1;
    Residues acc = g.zero();
    for (std::uint32_t u = 0; u < top; ++u) {
        Residues x = q.at(u);
        acc = ((q.dim() - std::popcount(u)) % 2) ? g.sub(acc, x) : g.add(acc, x);
    }
    return g.neg(acc);
}

void check_corner(const Corner& c, const FilteredGroup& f) {
    check_group(c.table, f);
    for (int j = 0; j < c.table.dim(); ++j) {
        if (!is_cube(lower_face(c.table, j), f))
            throw std::invalid_argument("invalid corner: face v(" + std::to_string(j + 1) + ")=0 is not a cube");
    }
}

}  // namespace

std::vector<Residues> complete_corner(const Corner& c, const FilteredGroup& f) {
    check_corner(c, f);
    const auto& g = c.table.group();
    Residues x0 = corner_offset(c);
    std::vector<Residues> out;
    for (const auto& h : f.level(c.table.dim()).elements(g)) out.push_back(g.add(x0, h));
    std::sort(out.begin(), out.end(),
              [&](const Residues& a, const Residues& b) { return g.index_of(a) < g.index_of(b); });
    return out;
}

Residues complete_corner_canonical(const Corner& c, const FilteredGroup& f) {
    check_corner(c, f);
    return corner_offset(c);
}

AffineCubeMorphism maximal_cube_p(std::int64_t p, int n) {
    if (!is_prime(p)) throw std::invalid_argument("maximal_cube_p: p must be prime");
    const int dim = n * static_cast<int>(p - 1);
    if (dim > kMaxCubeDim)
        throw std::invalid_argument("maximal_cube_p: n(p-1) = " + std::to_string(dim) + " exceeds cap");
    AffineCubeMorphism m;
    m.domain = AffineCubeMorphism::Domain::DiscreteCube;
    m.p = p;
    m.in_dim = dim;
    m.out_dim = n;
    m.base.assign(static_cast<std::size_t>(n), 0);
    for (int t = 0; t < dim; ++t) {
        std::vector<std::int64_t> col(static_cast<std::size_t>(n), 0);
        col[t / (p - 1)] = 1;
        m.columns.push_back(col);
    }
    return m;
}

AffineCubeMorphism maximal_cube_box(const std::vector<std::int64_t>& a, const std::vector<int>& l) {
    if (a.size() != l.size()) throw std::invalid_argument("maximal_cube_box: length mismatch");
    int total = 0;
    for (int x : l) {
        if (x < 0) throw std::invalid_argument("maximal_cube_box: negative extent");
        total += x;
    }
    if (total > kMaxCubeDim) throw std::invalid_argument("maximal_cube_box: |l| exceeds cap");
    AffineCubeMorphism m;
    m.in_dim = total;
    m.out_dim = static_cast<int>(l.size());
    m.base = a;
    for (std::size_t i = 0; i < l.size(); ++i) {
        for (int t = 0; t < l[i]; ++t) {
            std::vector<std::int64_t> col(l.size(), 0);
            col[i] = 1;
            m.columns.push_back(col);
        }
    }
    return m;
}

CubeMap compose_box_cube(const BoxMap& f) {
    const int total = f.total_extent();
    if (total > kMaxCubeDim) throw std::invalid_argument("box cube dimension exceeds cap");
    CubeMap q(f.group_ptr(), total);
    std::vector<int> off(f.dim());
    for (std::uint32_t v = 0; v < q.vertices(); ++v) {
        int bit = 0;
        for (std::size_t i = 0; i < f.dim(); ++i) {
            off[i] = 0;
            for (int t = 0; t < f.extents()[i]; ++t, ++bit) off[i] += (v >> bit) & 1u;
        }
        q.set(v, f.at(off));
    }
    return q;
}

bool hom_box_test(const BoxMap& f, const FilteredGroup& fg) { return is_cube(compose_box_cube(f), fg); }

namespace {

void check_box_corner(const BoxMap& f, const FilteredGroup& fg) {
    std::vector<int> zero(f.dim(), 0);
    for (std::size_t j = 0; j < f.dim(); ++j) {
        if (f.extents()[j] == 0) continue;
        auto l = f.extents();
        --l[j];
        if (!hom_box_test(f.sub_box(zero, l), fg))
            throw std::invalid_argument("box corner precondition fails in direction " + std::to_string(j + 1));
    }
}

}  // namespace

Residues complete_box_corner(const BoxMap& f, const FilteredGroup& fg) {
    check_box_corner(f, fg);
    return complete_corner_canonical(Corner{compose_box_cube(f)}, fg);
}

std::vector<Residues> complete_box_corner_all(const BoxMap& f, const FilteredGroup& fg) {
    check_box_corner(f, fg);
    return complete_corner(Corner{compose_box_cube(f)}, fg);
}

BoxMap extend_simplicial(const BoxMap& f, const std::vector<bool>& in_s, const FilteredGroup& fg) {
    if (in_s.size() != f.points()) throw std::invalid_argument("extend_simplicial: mask size mismatch");
    for (auto b : f.base())
        if (b != 0) throw std::invalid_argument("extend_simplicial: box base must be 0");
    for (std::uint64_t idx = 0; idx < f.points(); ++idx) {
        if (!in_s[idx]) continue;
        auto off = f.offset_at(idx);
        for (std::size_t j = 0; j < off.size(); ++j) {
            if (off[j] == 0) continue;
            --off[j];
            if (!in_s[f.index_of(off)]) throw std::invalid_argument("extend_simplicial: set is not simplicial");
            ++off[j];
        }
        if (!hom_box_test(f.sub_box(std::vector<int>(f.dim(), 0), off), fg))
            throw std::invalid_argument("extend_simplicial: values fail the box test below a point of S");
    }
    BoxMap g = f;
    std::vector<int> zero(f.dim(), 0);
    for (std::uint64_t idx = 0; idx < g.points(); ++idx) {
        if (in_s[idx]) continue;
        auto off = g.offset_at(idx);
        g.set(idx, complete_box_corner(g.sub_box(zero, off), fg));
    }
    return g;
}

std::vector<AffineCubeMorphism> p_face_maps(int k, int n, std::int64_t p) {
    if (k < 0 || k > n) throw std::invalid_argument("p_face_maps: need 0 <= k <= n");
    std::vector<AffineCubeMorphism> out;
    AffineCubeMorphism cur;
    cur.domain = AffineCubeMorphism::Domain::PCube;
    cur.p = p;
    cur.in_dim = k;
    cur.out_dim = n;
    cur.base.assign(static_cast<std::size_t>(n), 0);
    cur.columns.assign(static_cast<std::size_t>(k), std::vector<std::int64_t>(static_cast<std::size_t>(n), 0));
    std::vector<bool> used(static_cast<std::size_t>(k), false);
    std::function<void(int, int)> rec = [&](int j, int n_used) {
        if (j == n) {
            if (n_used == k) out.push_back(cur);
            return;
        }
        if (n - j > k - n_used) {
            for (std::int64_t c = 0; c < p; ++c) {
                cur.base[j] = c;
                rec(j + 1, n_used);
            }
            cur.base[j] = 0;
        }
        for (int i = 0; i < k; ++i) {
            if (used[i]) continue;
            used[i] = true;
            for (int sign : {1, -1}) {
                cur.columns[i][j] = sign;
                cur.base[j] = sign == 1 ? 0 : p - 1;
                rec(j + 1, n_used + 1);
            }
            cur.columns[i][j] = 0;
            cur.base[j] = 0;
            used[i] = false;
        }
    };
    rec(0, 0);
    return out;
}

}  // namespace nilspace
