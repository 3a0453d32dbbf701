#include "nilspace/homogeneity.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <cctype>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace nilspace {

bool is_p_homogeneous_nilspace(const GroupNilspace& x) { return is_p_homogeneous(x.F); }

int BlockFactor::exact_degree() const {
    const int q = static_cast<int>(p - 1);
    return l + q * ((k - l) / q);
}

std::string BlockFactor::name() const {
    if (r() == 1) return "D(" + std::to_string(l) + ";Z[" + std::to_string(p) + "^1])";
    return "Z(" + std::to_string(exact_degree()) + "," + std::to_string(l) + ";" + std::to_string(p) + ")";
}

std::vector<BlockFactor> canonical_type(std::vector<BlockFactor> factors) {
    for (auto& f : factors) f = f.canonical();
    std::sort(factors.begin(), factors.end(), [](const BlockFactor& a, const BlockFactor& b) {
        if (a.l != b.l) return a.l < b.l;
        return a.k < b.k;
    });
    return factors;
}

std::string type_name(const std::vector<BlockFactor>& factors) {
    if (factors.empty()) return "1";
    std::string s;
    for (const auto& f : canonical_type(factors)) {
        if (!s.empty()) s += "x";
        s += f.name();
    }
    return s;
}

FilteredGroup realize(const std::vector<BlockFactor>& factors, std::int64_t p, int degree) {
    FilteredGroup acc = trivial_filtered(p);
    for (const auto& f : factors) {
        if (f.p != p) throw std::invalid_argument("realize: prime mismatch");
        acc = product(acc, f.realize());
    }
    if (degree > acc.degree()) acc = acc.with_degree(degree);
    return acc;
}

bool NilspaceExpr::all_blocks() const {
    return std::all_of(blocks.begin(), blocks.end(), [](const auto& b) { return !b.empty(); });
}

std::vector<BlockFactor> NilspaceExpr::block_list() const {
    if (!all_blocks()) throw std::invalid_argument("nilspace is not a product of building blocks");
    std::vector<BlockFactor> out;
    for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
    return out;
}

FilteredGroup NilspaceExpr::realize() const { return product(factors, p); }

namespace {

struct Parser {
    std::string_view s;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("parse error at byte " + std::to_string(pos) + ": " + what);
    }
    void ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool at(char c) {
        ws();
        return pos < s.size() && s[pos] == c;
    }
    void expect(char c) {
        if (!at(c)) fail(std::string("expected '") + c + "'");
        ++pos;
    }
    std::int64_t integer() {
        ws();
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (start == pos) fail("expected integer");
        if (pos - start > 18) fail("integer too large");
        return std::stoll(std::string(s.substr(start, pos - start)));
    }
};

}  // namespace

NilspaceExpr parse_nilspace(std::string_view text) {
    Parser ps{text};
    NilspaceExpr out;
    auto set_prime = [&](std::int64_t p, std::size_t at) {
        if (!is_prime(p)) {
            ps.pos = at;
            ps.fail("p = " + std::to_string(p) + " is not prime");
        }
        if (out.p && out.p != p) {
            ps.pos = at;
            ps.fail("mixed primes");
        }
        out.p = p;
    };
    while (true) {
        ps.ws();
        std::size_t start = ps.pos;
        if (ps.at('Z')) {
            ++ps.pos;
            ps.expect('(');
            auto k = ps.integer();
            ps.expect(',');
            auto l = ps.integer();
            ps.expect(';');
            std::size_t pat = ps.pos;
            auto p = ps.integer();
            ps.expect(')');
            set_prime(p, pat);
            if (l < 1 || l > k) {
                ps.pos = start;
                ps.fail("Z(k,l;p) needs 1 <= l <= k");
            }
            BlockFactor b{p, static_cast<int>(k), static_cast<int>(l)};
            out.factors.push_back(b.realize());
            out.blocks.push_back({b});
        } else if (ps.at('D')) {
            ++ps.pos;
            ps.expect('(');
            auto k = ps.integer();
            ps.expect(';');
            ps.expect('Z');
            ps.expect('[');
            std::vector<int> orders;
            std::int64_t p = 0;
            while (true) {
                std::size_t pat = ps.pos;
                auto q = ps.integer();
                ps.expect('^');
                auto r = ps.integer();
                set_prime(q, pat);
                p = q;
                if (r < 1) ps.fail("exponent must be >= 1");
                orders.push_back(static_cast<int>(r));
                if (ps.at('x')) {
                    ++ps.pos;
                    continue;
                }
                break;
            }
            ps.expect(']');
            ps.expect(')');
            if (k < 1) {
                ps.pos = start;
                ps.fail("D(k;...) needs k >= 1");
            }
            out.factors.push_back(make_Dk(FiniteAbelianPGroup(p, orders), static_cast<int>(k)));
            std::vector<BlockFactor> bl;
            if (std::all_of(orders.begin(), orders.end(), [](int r) { return r == 1; }))
                for (std::size_t i = 0; i < orders.size(); ++i)
                    bl.push_back(BlockFactor{p, static_cast<int>(k), static_cast<int>(k)});
            out.blocks.push_back(bl);
        } else {
            ps.fail("expected 'Z(' or 'D('");
        }
        if (ps.at('x')) {
            ++ps.pos;
            continue;
        }
        break;
    }
    ps.ws();
    if (ps.pos != text.size()) ps.fail("trailing characters");
    return out;
}

FilteredGroup parse_filtered_any(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i < text.size() && text[i] == 'F') return parse_filtration(text);
    return parse_nilspace(text).realize();
}

std::vector<BlockFactor> QpkMember::factors() const {
    std::vector<BlockFactor> out;
    for (int l = 1; l <= k; ++l)
        for (int c = 0; c < a[static_cast<std::size_t>(l - 1)]; ++c) out.push_back(BlockFactor{p, k, l});
    return out;
}

FilteredGroup QpkMember::realize() const { return nilspace::realize(factors(), p, k); }

int QpkMember::log_order() const {
    int s = 0;
    for (int l = 1; l <= k; ++l) s += a[static_cast<std::size_t>(l - 1)] * block_r(p, k, l);
    return s;
}

std::string QpkMember::name() const {
    std::string s;
    for (const auto& f : factors()) {
        if (!s.empty()) s += "x";
        s += "Z(" + std::to_string(f.k) + "," + std::to_string(f.l) + ";" + std::to_string(p) + ")";
    }
    return s.empty() ? "1" : s;
}

std::vector<QpkMember> enumerate_Qpk(std::int64_t p, int k, std::uint64_t bound) {
    if (!is_prime(p)) throw std::invalid_argument("enumerate_Qpk: p must be prime");
    if (k < 1) throw std::invalid_argument("enumerate_Qpk: k must be >= 1");
    int max_log = 0;
    if (bound >= 1) {
        std::uint64_t acc = 1;
        while (acc <= bound / static_cast<std::uint64_t>(p)) {
            acc *= static_cast<std::uint64_t>(p);
            ++max_log;
        }
    }
    std::vector<QpkMember> out;
    std::vector<int> a(static_cast<std::size_t>(k), 0);
    std::function<void(int, int)> rec = [&](int l, int used) {
        if (l > k) {
            out.push_back(QpkMember{p, k, a});
            return;
        }
        int r = block_r(p, k, l);
        for (int c = 0; used + c * r <= max_log; ++c) {
            a[static_cast<std::size_t>(l - 1)] = c;
            rec(l + 1, used + c * r);
        }
        a[static_cast<std::size_t>(l - 1)] = 0;
    };
    rec(1, 0);
    std::sort(out.begin(), out.end(), [](const QpkMember& x, const QpkMember& y) {
        int ox = x.log_order(), oy = y.log_order();
        if (ox != oy) return ox < oy;
        return ColexLess{}(x.a, y.a);
    });
    return out;
}

Residues FilteredHomomorphism::apply(const Residues& x) const {
    const auto& tg = target.group();
    Residues acc = tg.zero();
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j] != 0) acc = tg.add(acc, tg.scale(x[j], images[j]));
    return acc;
}

bool FilteredHomomorphism::well_defined() const {
    const auto& sg = source.group();
    const auto& tg = target.group();
    if (images.size() != sg.rank()) return false;
    for (std::size_t j = 0; j < images.size(); ++j) {
        if (!tg.is_reduced(images[j])) return false;
        Residues z = tg.scale(sg.modulus(j), images[j]);
        if (z != tg.zero()) return false;
    }
    return true;
}

namespace {

std::vector<Residues> level_generators(const FilteredGroup& f, int i) {
    const auto& g = f.group();
    std::vector<Residues> gens;
    for (std::size_t j = 0; j < g.rank(); ++j) {
        int e = f.level(i).exponents[j];
        if (e >= g.orders()[j]) continue;
        Residues x = g.zero();
        x[j] = checked_pow(g.p(), e);
        gens.push_back(x);
    }
    return gens;
}

}  // namespace

bool FilteredHomomorphism::is_filtered() const {
    int top = std::max(source.degree(), target.degree()) + 1;
    for (int i = 0; i <= top; ++i)
        for (const auto& x : level_generators(source, i))
            if (!target.level(i).contains(target.group(), apply(x))) return false;
    return true;
}

FilteredHomomorphism identity_hom(const FilteredGroup& f) {
    std::vector<Residues> images;
    for (std::size_t j = 0; j < f.group().rank(); ++j) {
        Residues e = f.group().zero();
        e[j] = 1;
        images.push_back(e);
    }
    return FilteredHomomorphism{f, f, images};
}

std::uint64_t generated_subgroup_size(const FiniteAbelianPGroup& g, const std::vector<Residues>& gens,
                                      std::uint64_t cap) {
    std::vector<std::uint64_t> members{0};
    std::unordered_set<std::uint64_t> in{0};
    for (const auto& x : gens) {
        Residues step = g.reduce(x);
        Residues t = step;
        std::vector<std::uint64_t> current = members;
        while (!in.count(g.index_of(t))) {
            for (auto idx : current) {
                auto y = g.add(g.element_at(idx), t);
                auto yi = g.index_of(y);
                if (in.insert(yi).second) members.push_back(yi);
            }
            if (members.size() > cap) throw std::runtime_error("generated_subgroup_size: cap exceeded");
            t = g.add(t, step);
        }
    }
    return members.size();
}

bool fibration_levelwise(const FilteredHomomorphism& psi) {
    if (!psi.well_defined() || !psi.is_filtered()) return false;
    int top = std::max(psi.source.degree(), psi.target.degree()) + 1;
    for (int i = 0; i <= top; ++i) {
        std::vector<Residues> imgs;
        for (const auto& x : level_generators(psi.source, i)) imgs.push_back(psi.apply(x));
        if (generated_subgroup_size(psi.target.group(), imgs) != psi.target.level_size(i)) return false;
    }
    return true;
}

bool fibration_audit(const FilteredHomomorphism& psi, int n_max, std::uint64_t exhaustive_cap, std::uint64_t samples,
                     std::uint64_t seed) {
    if (!psi.well_defined() || !psi.is_filtered()) return false;
    const auto& X = psi.source;
    const auto& Y = psi.target;
    const auto& xg = X.group();
    const auto& yg = Y.group();
    std::mt19937_64 rng(seed);
    for (int n = 0; n <= n_max; ++n) {
        const std::uint32_t verts = 1u << n;
        const std::uint32_t top = verts - 1;
        std::vector<std::uint64_t> sizes(verts, 1);
        long double total = 1;
        for (std::uint32_t w = 0; w < top; ++w) {
            sizes[w] = X.level_size(std::popcount(w));
            total *= static_cast<long double>(sizes[w]);
        }
        const bool exhaustive = total <= static_cast<long double>(exhaustive_cap);
        const std::uint64_t runs = exhaustive ? static_cast<std::uint64_t>(total) : samples;
        std::vector<std::uint64_t> digit(verts, 0);
        for (std::uint64_t run = 0; run < runs; ++run) {
            if (!exhaustive)
                for (std::uint32_t w = 0; w < top; ++w) digit[w] = rng() % sizes[w];
            CubeMap coeffs(psi.source.group_ptr(), n);
            for (std::uint32_t w = 0; w < top; ++w)
                coeffs.set(w, X.level(std::popcount(w)).element_at(xg, digit[w]));
            CubeMap corner = mobius_reconstruct(coeffs);
            CubeMap image(psi.target.group_ptr(), n);
            for (std::uint32_t v = 0; v < top; ++v) image.set(v, psi.apply(corner.at(v)));
            std::vector<Residues> cx = complete_corner(Corner{corner}, X);
            std::vector<Residues> cy;
            try {
                cy = complete_corner(Corner{image}, Y);
            } catch (const std::invalid_argument&) {
                return false;
            }
            std::unordered_set<std::uint64_t> reach;
            for (const auto& x : cx) reach.insert(yg.index_of(psi.apply(x)));
            for (const auto& y : cy)
                if (!reach.count(yg.index_of(y))) return false;
            if (exhaustive) {
                for (std::uint32_t w = 0; w < top; ++w) {
                    if (++digit[w] < sizes[w]) break;
                    digit[w] = 0;
                }
            }
        }
    }
    return true;
}

bool check_fibration(const FilteredHomomorphism& psi, int n_max, FibrationMode mode) {
    if (n_max < 0 || n_max > 5) throw std::invalid_argument("check_fibration: n_max must be in [0,5]");
    switch (mode) {
        case FibrationMode::Levelwise:
            return fibration_levelwise(psi);
        case FibrationMode::Audit:
            return fibration_audit(psi, n_max);
        case FibrationMode::Both: {
            bool a = fibration_levelwise(psi);
            bool b = fibration_audit(psi, n_max);
            if (a != b) throw std::runtime_error("check_fibration: levelwise and corner-lifting paths disagree");
            return a;
        }
    }
    return false;
}

namespace {

std::int64_t det_mod(std::vector<std::vector<std::int64_t>> m, std::int64_t p) {
    const std::size_t n = m.size();
    std::int64_t det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && mod_floor(m[piv][c], p) == 0) ++piv;
        if (piv == n) return 0;
        if (piv != c) {
            std::swap(m[piv], m[c]);
            det = mod_floor(-det, p);
        }
        std::int64_t inv = inverse_mod(m[c][c], p);
        det = mod_floor(det * mod_floor(m[c][c], p), p);
        for (std::size_t r = c + 1; r < n; ++r) {
            std::int64_t f = mod_floor(m[r][c] * inv, p);
            for (std::size_t j = c; j < n; ++j) m[r][j] = mod_floor(m[r][j] - f * m[c][j], p);
        }
    }
    return det;
}

// Inverse of a square matrix over Z/q with q = p^r, given invertible mod p.
std::vector<std::vector<std::int64_t>> inverse_mod_pr(std::vector<std::vector<std::int64_t>> m, std::int64_t p,
                                                      std::int64_t q) {
    const std::size_t n = m.size();
    std::vector<std::vector<std::int64_t>> inv(n, std::vector<std::int64_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
    auto mulmod = [q](std::int64_t a, std::int64_t b) {
        return static_cast<std::int64_t>(static_cast<__int128>(mod_floor(a, q)) * mod_floor(b, q) % q);
    };
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && mod_floor(m[piv][c], p) == 0) ++piv;
        if (piv == n) throw std::logic_error("inverse_mod_pr: singular mod p");
        std::swap(m[piv], m[c]);
        std::swap(inv[piv], inv[c]);
        std::int64_t u = inverse_mod(mod_floor(m[c][c], q), q);
        for (std::size_t j = 0; j < n; ++j) {
            m[c][j] = mulmod(m[c][j], u);
            inv[c][j] = mulmod(inv[c][j], u);
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            std::int64_t f = mod_floor(m[r][c], q);
            if (f == 0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                m[r][j] = mod_floor(m[r][j] - mulmod(f, m[c][j]), q);
                inv[r][j] = mod_floor(inv[r][j] - mulmod(f, inv[c][j]), q);
            }
        }
    }
    return inv;
}

}  // namespace

QuotientResult quotient_by_subspace(const std::vector<BlockFactor>& x, const FpSubspace& h) {
    if (x.empty()) throw std::invalid_argument("quotient_by_subspace: empty product");
    const std::int64_t p = x.front().p;
    int k = 0;
    for (const auto& f : x) {
        if (f.p != p) throw std::invalid_argument("quotient_by_subspace: mixed primes");
        if (f.l < 1 || f.l > f.k) throw std::invalid_argument("quotient_by_subspace: invalid block");
        k = std::max(k, f.k);
    }
    const int q = static_cast<int>(p - 1);
    std::vector<std::size_t> contrib, rest;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].k == k && (k - x[i].l) % q == 0)
            contrib.push_back(i);
        else
            rest.push_back(i);
    }
    const std::size_t m = contrib.size();
    if (h.p() != p || h.ambient_dim() != m)
        throw std::invalid_argument("quotient_by_subspace: H is not inside the top structure group (expected F_" +
                                    std::to_string(p) + "^" + std::to_string(m) + ")");

    // Normalized order: contributing factors by descending r (stable).
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::size_t a, std::size_t b) { return x[contrib[a]].r() > x[contrib[b]].r(); });
    std::vector<int> r_of(m);
    for (std::size_t t = 0; t < m; ++t) r_of[t] = x[contrib[perm[t]]].r();

    std::vector<FpVector> hv;
    for (const auto& v : h.basis()) {
        FpVector w(m);
        for (std::size_t t = 0; t < m; ++t) w[t] = v[perm[t]];
        hv.push_back(w);
    }
    FpSubspace H = FpSubspace::span(p, m, hv);

    QuotientResult res;
    res.dim_H = static_cast<int>(H.dimension());
    for (std::size_t t = 0; t < m; ++t) res.source_normalized.push_back(x[contrib[perm[t]]]);
    for (auto i : rest) res.source_normalized.push_back(x[i]);

    // Blocks of equal r, in descending r.
    std::vector<std::pair<std::size_t, std::size_t>> blocks;
    for (std::size_t t = 0; t < m;) {
        std::size_t e = t;
        while (e < m && r_of[e] == r_of[t]) ++e;
        blocks.push_back({t, e});
        t = e;
    }

    FpSubspace U(p, m), Hprev(p, m), chosen(p, m);
    std::vector<FpVector> cols;
    std::vector<bool> is_v;
    std::vector<std::size_t> col_block;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        for (std::size_t t = blocks[bi].first; t < blocks[bi].second; ++t) {
            FpVector e(m, 0);
            e[t] = 1;
            U.insert(e);
        }
        FpSubspace Hi = H.intersect(U);
        auto vs = subspace_complete_basis(Hprev, Hi);
        for (const auto& v : vs) {
            if (!chosen.insert(v)) throw std::logic_error("quotient: dependent column");
            cols.push_back(v);
            is_v.push_back(true);
            col_block.push_back(bi);
        }
        auto ws = subspace_complete_basis(chosen, U);
        for (const auto& w : ws) {
            chosen.insert(w);
            cols.push_back(w);
            is_v.push_back(false);
            col_block.push_back(bi);
        }
        res.b.push_back(static_cast<int>(vs.size()));
        res.block_r.push_back(r_of[blocks[bi].first]);
        Hprev = Hi;
    }
    res.A = cols;
    {
        std::vector<std::vector<std::int64_t>> rows(m, std::vector<std::int64_t>(m));
        for (std::size_t c = 0; c < m; ++c)
            for (std::size_t t = 0; t < m; ++t) rows[t][c] = cols[c][t];
        res.det_mod_p = m == 0 ? 1 : det_mod(rows, p);
    }
    if (res.det_mod_p == 0) throw std::logic_error("quotient: change of basis is singular");

    // Column-ordered quotient factors, then the untouched ones.
    std::vector<BlockFactor> qfactors;
    std::vector<int> col_keep_r(m);
    for (std::size_t c = 0; c < m; ++c) {
        BlockFactor f = res.source_normalized[c];
        f.l = k - (r_of[blocks[col_block[c]].first] - 1) * q;
        if (is_v[c]) {
            col_keep_r[c] = f.r() - 1;
            if (f.l <= k - 1) qfactors.push_back(BlockFactor{p, k - 1, f.l});
        } else {
            col_keep_r[c] = f.r();
            qfactors.push_back(BlockFactor{p, k, f.l});
        }
    }
    for (auto i : rest) qfactors.push_back(x[i]);
    res.factors = canonical_type(qfactors);
    for (const auto& f : x) res.log_order_source += f.r();
    for (const auto& f : qfactors) res.log_order_quotient += f.r();
    if (res.log_order_quotient != res.log_order_source - res.dim_H)
        throw std::logic_error("quotient: order bookkeeping failed");

    // Phi: X' -> X sends the generator of column c to sum_t c_t p^{r_t - r_c} e_t.
    FilteredGroup Xfg = realize(x, p, k);
    std::vector<BlockFactor> xprime;
    for (std::size_t c = 0; c < m; ++c) {
        BlockFactor f{p, k, k - (r_of[blocks[col_block[c]].first] - 1) * q};
        xprime.push_back(f);
    }
    for (auto i : rest) xprime.push_back(x[i]);
    FilteredGroup Xp = realize(xprime, p, k);
    const auto& xg = Xfg.group();
    std::vector<Residues> phi_images;
    for (std::size_t c = 0; c < m; ++c) {
        Residues img = xg.zero();
        int rc = r_of[blocks[col_block[c]].first];
        for (std::size_t t = 0; t < m; ++t) {
            if (cols[c][t] == 0) continue;
            img[contrib[perm[t]]] = mod_floor(cols[c][t] * checked_pow(p, r_of[t] - rc), xg.modulus(contrib[perm[t]]));
        }
        phi_images.push_back(img);
    }
    for (auto i : rest) {
        Residues img = xg.zero();
        img[i] = 1;
        phi_images.push_back(img);
    }
    FilteredHomomorphism phi{Xp, Xfg, phi_images};
    try {
        res.phi_is_filtered_iso = fibration_levelwise(phi) && Xp.group().log_order() == xg.log_order();
    } catch (const std::runtime_error&) {
        res.phi_is_filtered_iso = false;
    }

    // Phi^{-1} by back substitution over the blocks, then reduce the v-columns.
    std::vector<std::vector<std::vector<std::int64_t>>> diag_inv(blocks.size());
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        auto [s, e] = blocks[bi];
        std::vector<std::vector<std::int64_t>> d(e - s, std::vector<std::int64_t>(e - s));
        for (std::size_t t = s; t < e; ++t)
            for (std::size_t c = s; c < e; ++c) d[t - s][c - s] = cols[c][t];
        diag_inv[bi] = inverse_mod_pr(d, p, checked_pow(p, r_of[s]));
    }
    FilteredGroup Q = realize(qfactors, p, k);
    const auto& qg = Q.group();
    auto project = [&](const Residues& xv) {
        std::vector<std::int64_t> y(m, 0);
        for (std::size_t bi = blocks.size(); bi-- > 0;) {
            auto [s, e] = blocks[bi];
            std::int64_t mod = checked_pow(p, r_of[s]);
            std::vector<std::int64_t> rhs(e - s);
            for (std::size_t t = s; t < e; ++t) {
                __int128 acc = xv[contrib[perm[t]]];
                for (std::size_t c = e; c < m; ++c) {
                    if (cols[c][t] == 0) continue;
                    acc -= static_cast<__int128>(cols[c][t]) * checked_pow(p, r_of[t] - r_of[c]) % mod * y[c];
                }
                rhs[t - s] = static_cast<std::int64_t>(((acc % mod) + mod) % mod);
            }
            for (std::size_t c = s; c < e; ++c) {
                __int128 acc = 0;
                for (std::size_t t = s; t < e; ++t) acc += static_cast<__int128>(diag_inv[bi][c - s][t - s]) * rhs[t - s];
                y[c] = static_cast<std::int64_t>(acc % mod);
            }
        }
        Residues out = qg.zero();
        std::size_t pos = 0;
        for (std::size_t c = 0; c < m; ++c) {
            if (col_keep_r[c] == 0) continue;
            out[pos] = mod_floor(y[c], checked_pow(p, col_keep_r[c]));
            ++pos;
        }
        for (auto i : rest) out[pos++] = xv[i];
        return out;
    };
    std::vector<Residues> proj_images;
    for (std::size_t j = 0; j < xg.rank(); ++j) {
        Residues e = xg.zero();
        e[j] = 1;
        proj_images.push_back(project(e));
    }
    res.projection = FilteredHomomorphism{Xfg, Q, proj_images};
    return res;
}

LiftResult lift_morphism(const FilteredHomomorphism& psi, const BoxMap& f, std::uint64_t max_attempts) {
    const std::int64_t p = psi.source.p();
    if (!(f.group() == psi.target.group())) throw std::invalid_argument("lift_morphism: f is not into psi's target");
    if (!is_hom_Zpn(f, p, psi.target)) throw std::invalid_argument("lift_morphism: f is not a morphism");
    if (f.points() > 10000) throw std::invalid_argument("lift_morphism: p^n exceeds 10^4");
    if (!is_p_homogeneous(psi.source)) throw std::invalid_argument("lift_morphism: source is not p-homogeneous");
    if (!fibration_levelwise(psi)) throw std::invalid_argument("lift_morphism: psi is not a fibration");

    const auto& X = psi.source;
    const auto& xg = X.group();
    const auto& yg = psi.target.group();
    PolyMap b = from_values(f, psi.target);

    // Preimage of each image value inside X_i, first in enumeration order.
    std::map<int, std::map<std::uint64_t, Residues>> pre;
    std::map<int, std::vector<Residues>> kernel;
    auto level_tables = [&](int i) {
        if (pre.count(i)) return;
        auto& tab = pre[i];
        auto& ker = kernel[i];
        std::uint64_t sz = X.level_size(i);
        if (sz > 2000000) throw std::invalid_argument("lift_morphism: level too large to search");
        for (std::uint64_t idx = 0; idx < sz; ++idx) {
            Residues xv = X.level(i).element_at(xg, idx);
            Residues yv = psi.apply(xv);
            tab.emplace(yg.index_of(yv), xv);
            if (yv == yg.zero()) ker.push_back(xv);
        }
    };

    PolyMap a(b.n, X);
    std::vector<MultiIndex> support;
    for (std::uint64_t idx = 0; idx < f.points(); ++idx) {
        MultiIndex w = f.offset_at(idx);
        int ht = std::accumulate(w.begin(), w.end(), 0);
        level_tables(ht);
        auto it = b.coeffs.find(w);
        Residues target = it == b.coeffs.end() ? yg.zero() : it->second;
        auto found = pre[ht].find(yg.index_of(target));
        if (found == pre[ht].end()) throw std::runtime_error("lift_morphism: coefficient has no preimage in X_i");
        a.coeffs[w] = found->second;
        support.push_back(w);
    }

    auto accept = [&](const PolyMap& cand) -> std::optional<BoxMap> {
        BoxMap g = restrict_to_pbox(cand, p);
        for (std::uint64_t idx = 0; idx < g.points(); ++idx)
            if (psi.apply(g.at(idx)) != f.at(idx)) return std::nullopt;
        if (!is_hom_Zpn(g, p, X)) return std::nullopt;
        return g;
    };

    LiftResult out{BoxMap(xg.zero().empty() ? X.group_ptr() : X.group_ptr(), f.base(), f.extents())};
    if (auto g = accept(a)) {
        out.g = *g;
        out.attempts = 1;
        return out;
    }
    // Correction search over kernel-valued coefficients, first support index fastest.
    std::vector<std::size_t> digit(support.size(), 0);
    for (std::uint64_t attempt = 2; attempt <= max_attempts; ++attempt) {
        std::size_t i = 0;
        for (; i < support.size(); ++i) {
            int ht = std::accumulate(support[i].begin(), support[i].end(), 0);
            if (++digit[i] < kernel[ht].size()) break;
            digit[i] = 0;
        }
        if (i == support.size()) break;
        PolyMap cand = a;
        for (std::size_t s = 0; s < support.size(); ++s) {
            int ht = std::accumulate(support[s].begin(), support[s].end(), 0);
            cand.coeffs[support[s]] = xg.add(a.coeffs[support[s]], kernel[ht][digit[s]]);
        }
        if (auto g = accept(cand)) {
            out.g = *g;
            out.corrected = true;
            out.attempts = attempt;
            return out;
        }
    }
    throw std::runtime_error("lift_morphism: correction search exhausted without a lift");
}

int HighCharSpace::prefix_dim(int i) const { return offset[static_cast<std::size_t>(i - 1)]; }

HighCharSpace make_high_char_space(std::int64_t p, const std::vector<int>& a) {
    const int k = static_cast<int>(a.size());
    if (k < 1) throw std::invalid_argument("make_high_char_space: need k >= 1");
    if (k > p) throw std::invalid_argument("make_high_char_space: need k <= p");
    std::vector<FilteredGroup> fs;
    std::vector<int> offset;
    int acc = 0;
    for (int i = 1; i <= k; ++i) {
        offset.push_back(acc);
        acc += a[static_cast<std::size_t>(i - 1)];
        fs.push_back(make_Dk(FiniteAbelianPGroup(p, std::vector<int>(static_cast<std::size_t>(a[i - 1]), 1)), i));
    }
    offset.push_back(acc);
    FilteredGroup X = product(fs, p).with_degree(k);
    return HighCharSpace{p, a, X, offset};
}

namespace {

FilteredGroup block_target(const HighCharSpace& s, int i) {
    return make_Dk(FiniteAbelianPGroup(s.p, std::vector<int>(static_cast<std::size_t>(s.a[i - 1]), 1)), i - 1);
}

}  // namespace

TranslationTuple identity_translation(const HighCharSpace& s) {
    TranslationTuple t;
    t.T1 = Residues(static_cast<std::size_t>(s.a[0]), 0);
    for (int i = 2; i <= s.k(); ++i) t.T.emplace_back(s.prefix_dim(i), block_target(s, i));
    return t;
}

bool is_valid_translation(const HighCharSpace& s, const TranslationTuple& t) {
    if (static_cast<int>(t.T1.size()) != s.a[0]) return false;
    if (static_cast<int>(t.T.size()) != s.k() - 1) return false;
    for (int i = 2; i <= s.k(); ++i) {
        const auto& poly = t.T[static_cast<std::size_t>(i - 2)];
        if (poly.n != s.prefix_dim(i)) return false;
        if (!(poly.target.group() == block_target(s, i).group())) return false;
        for (const auto& [w, c] : poly.coeffs) {
            if (std::all_of(c.begin(), c.end(), [](std::int64_t v) { return v == 0; })) continue;
            int wdeg = 0;
            for (int j = 1; j < i; ++j)
                for (int v = s.offset[j - 1]; v < s.offset[j]; ++v) {
                    if (w[v] > s.p - 1) return false;
                    wdeg += j * w[v];
                }
            if (wdeg > i - 1) return false;
        }
    }
    return true;
}

Residues apply_translation(const HighCharSpace& s, const TranslationTuple& t, const Residues& x) {
    const auto& g = s.X.group();
    Residues shift = g.zero();
    for (int v = 0; v < s.a[0]; ++v) shift[v] = t.T1[v];
    for (int i = 2; i <= s.k(); ++i) {
        std::vector<std::int64_t> prefix(x.begin(), x.begin() + s.prefix_dim(i));
        Residues val = eval(t.T[static_cast<std::size_t>(i - 2)], prefix);
        for (int v = 0; v < s.a[i - 1]; ++v) shift[s.offset[i - 1] + v] = val[v];
    }
    return g.add(x, shift);
}

std::vector<std::uint64_t> translation_permutation(const HighCharSpace& s, const TranslationTuple& t) {
    const auto& g = s.X.group();
    std::uint64_t n = g.order_u64();
    std::vector<std::uint64_t> perm(n);
    for (std::uint64_t i = 0; i < n; ++i) perm[i] = g.index_of(apply_translation(s, t, g.element_at(i)));
    return perm;
}

TranslationTuple tuple_from_map(const HighCharSpace& s, const std::vector<std::uint64_t>& perm) {
    const auto& g = s.X.group();
    TranslationTuple t = identity_translation(s);
    Residues img0 = g.element_at(perm[0]);
    for (int v = 0; v < s.a[0]; ++v) t.T1[v] = img0[v];
    for (int i = 2; i <= s.k(); ++i) {
        int N = s.prefix_dim(i);
        FilteredGroup tgt = block_target(s, i);
        BoxMap vals(tgt.group_ptr(), std::vector<std::int64_t>(static_cast<std::size_t>(N), 0),
                    std::vector<int>(static_cast<std::size_t>(N), static_cast<int>(s.p - 1)));
        for (std::uint64_t idx = 0; idx < vals.points(); ++idx) {
            auto off = vals.offset_at(idx);
            Residues x = g.zero();
            for (int v = 0; v < N; ++v) x[v] = off[v];
            Residues y = g.element_at(perm[g.index_of(x)]);
            Residues d(static_cast<std::size_t>(s.a[i - 1]));
            for (int v = 0; v < s.a[i - 1]; ++v) d[v] = y[s.offset[i - 1] + v];
            vals.set(idx, d);
        }
        t.T[static_cast<std::size_t>(i - 2)] = from_values(vals, tgt);
    }
    return t;
}

std::vector<std::uint64_t> group_translation_permutation(const FilteredGroup& f, const Residues& gshift) {
    const auto& g = f.group();
    std::uint64_t n = g.order_u64();
    std::vector<std::uint64_t> perm(n);
    for (std::uint64_t i = 0; i < n; ++i) perm[i] = g.index_of(g.add(g.element_at(i), gshift));
    return perm;
}

bool translation_p_power_check(const std::vector<std::uint64_t>& perm, std::int64_t p, int k, int level) {
    if (level < 1 || level > k) throw std::invalid_argument("translation_p_power_check: level out of range");
    std::int64_t N = checked_pow(p, (k - level) / static_cast<int>(p - 1) + 1);
    for (std::uint64_t x = 0; x < perm.size(); ++x) {
        std::uint64_t y = x;
        for (std::int64_t t = 0; t < N; ++t) y = perm[y];
        if (y != x) return false;
    }
    return true;
}

}  // namespace nilspace
