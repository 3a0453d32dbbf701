#include "nilspace/core_groups.hpp"

#include <algorithm>
#include <limits>
#include <tuple>
#include <cctype>
#include <numeric>
#include <stdexcept>

namespace nilspace {

bool is_prime(std::int64_t n) {
    if (n < 2) return false;
    for (std::int64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

std::int64_t checked_pow(std::int64_t base, int exp) {
    if (exp < 0) throw std::invalid_argument("checked_pow: negative exponent");
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (__builtin_mul_overflow(r, base, &r))
            throw std::overflow_error("checked_pow: overflow");
    }
    return r;
}

std::int64_t mod_floor(const BigInt& a, std::int64_t m) {
    BigInt r = a % m;
    if (r < 0) r += m;
    return static_cast<std::int64_t>(r);
}

FiniteAbelianPGroup::FiniteAbelianPGroup(std::int64_t p, std::vector<int> orders)
    : p_(p), orders_(std::move(orders)) {
    if (!is_prime(p_)) throw std::invalid_argument("group: p = " + std::to_string(p_) + " is not prime");
    for (int r : orders_) {
        if (r < 1) throw std::invalid_argument("group: cyclic factor exponents must be >= 1");
        log_order_ += r;
    }
    if (log_order_ > kMaxLogOrder)
        throw std::invalid_argument("group: sum of exponents exceeds " + std::to_string(kMaxLogOrder));
    moduli_.reserve(orders_.size());
    for (int r : orders_) {
        std::int64_t m = checked_pow(p_, r);
        if (m > (std::int64_t{1} << 62)) throw std::invalid_argument("group: cyclic factor too large");
        moduli_.push_back(m);
    }
}

BigInt FiniteAbelianPGroup::order() const {
    BigInt r = 1;
    for (auto m : moduli_) r *= m;
    return r;
}

std::uint64_t FiniteAbelianPGroup::order_u64() const {
    BigInt o = order();
    if (o > BigInt(std::numeric_limits<std::int64_t>::max()))
        throw std::overflow_error("group order exceeds 63 bits");
    return static_cast<std::uint64_t>(o);
}

Residues FiniteAbelianPGroup::reduce(const Residues& a) const {
    if (a.size() != rank()) throw std::invalid_argument("element length does not match group rank");
    Residues out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = mod_floor(a[j], moduli_[j]);
    return out;
}

bool FiniteAbelianPGroup::is_reduced(const Residues& a) const {
    if (a.size() != rank()) return false;
    for (std::size_t j = 0; j < a.size(); ++j)
        if (a[j] < 0 || a[j] >= moduli_[j]) return false;
    return true;
}

Residues FiniteAbelianPGroup::add(const Residues& a, const Residues& b) const {
    Residues out(rank());
    for (std::size_t j = 0; j < rank(); ++j) {
        std::int64_t s = a[j] + b[j];
        if (s >= moduli_[j]) s -= moduli_[j];
        out[j] = s;
    }
    return out;
}

Residues FiniteAbelianPGroup::sub(const Residues& a, const Residues& b) const {
    Residues out(rank());
    for (std::size_t j = 0; j < rank(); ++j) {
        std::int64_t s = a[j] - b[j];
        if (s < 0) s += moduli_[j];
        out[j] = s;
    }
    return out;
}

Residues FiniteAbelianPGroup::neg(const Residues& a) const {
    Residues out(rank());
    for (std::size_t j = 0; j < rank(); ++j) out[j] = a[j] == 0 ? 0 : moduli_[j] - a[j];
    return out;
}

Residues FiniteAbelianPGroup::scale(std::int64_t n, const Residues& a) const {
    Residues out(rank());
    for (std::size_t j = 0; j < rank(); ++j) {
        __int128 v = static_cast<__int128>(mod_floor(n, moduli_[j])) * a[j];
        out[j] = static_cast<std::int64_t>(v % moduli_[j]);
    }
    return out;
}

Residues FiniteAbelianPGroup::scale(const BigInt& n, const Residues& a) const {
    Residues out(rank());
    for (std::size_t j = 0; j < rank(); ++j) {
        __int128 v = static_cast<__int128>(mod_floor(n, moduli_[j])) * a[j];
        out[j] = static_cast<std::int64_t>(v % moduli_[j]);
    }
    return out;
}

std::uint64_t FiniteAbelianPGroup::index_of(const Residues& a) const {
    std::uint64_t idx = 0;
    for (std::size_t j = rank(); j-- > 0;) idx = idx * static_cast<std::uint64_t>(moduli_[j]) + a[j];
    return idx;
}

Residues FiniteAbelianPGroup::element_at(std::uint64_t index) const {
    Residues out(rank());
    for (std::size_t j = 0; j < rank(); ++j) {
        out[j] = static_cast<std::int64_t>(index % moduli_[j]);
        index /= moduli_[j];
    }
    return out;
}

int FiniteAbelianPGroup::log_element_order(const Residues& a) const {
    int best = 0;
    for (std::size_t j = 0; j < rank(); ++j) {
        std::int64_t x = mod_floor(a[j], moduli_[j]);
        if (x == 0) continue;
        int v = 0;
        while (x % p_ == 0) {
            x /= p_;
            ++v;
        }
        best = std::max(best, orders_[j] - v);
    }
    return best;
}

std::string FiniteAbelianPGroup::to_string() const {
    std::string s = "Z[";
    for (std::size_t j = 0; j < rank(); ++j) {
        if (j) s += " x ";
        s += std::to_string(p_) + "^" + std::to_string(orders_[j]);
    }
    return s + "]";
}

GroupPtr make_group(std::int64_t p, std::vector<int> orders) {
    return std::make_shared<const FiniteAbelianPGroup>(p, std::move(orders));
}

GroupPtr share(const FiniteAbelianPGroup& g) { return std::make_shared<const FiniteAbelianPGroup>(g); }

namespace {

struct Cursor {
    std::string_view s;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("parse error at byte " + std::to_string(pos) + ": " + what);
    }
    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool peek(char c) {
        skip_ws();
        return pos < s.size() && s[pos] == c;
    }
    void expect(char c) {
        if (!peek(c)) fail(std::string("expected '") + c + "'");
        ++pos;
    }
    std::int64_t integer() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (start == pos) fail("expected integer");
        return std::stoll(std::string(s.substr(start, pos - start)));
    }
};

}  // namespace

FiniteAbelianPGroup parse_group(std::string_view text, std::optional<std::int64_t> trivial_prime) {
    Cursor c{text};
    c.expect('Z');
    c.expect('[');
    std::optional<std::int64_t> p;
    std::vector<int> orders;
    if (!c.peek(']')) {
        while (true) {
            std::int64_t q = c.integer();
            c.expect('^');
            std::int64_t r = c.integer();
            if (p && *p != q) c.fail("mixed primes in group");
            p = q;
            orders.push_back(static_cast<int>(r));
            if (c.peek('x')) {
                ++c.pos;
                continue;
            }
            break;
        }
    }
    c.expect(']');
    c.skip_ws();
    if (c.pos != text.size()) c.fail("trailing characters");
    if (!p) {
        if (!trivial_prime) c.fail("trivial group needs an explicit prime");
        p = trivial_prime;
    }
    return FiniteAbelianPGroup(*p, orders);
}

GroupElement make_element(GroupPtr g, const Residues& residues) {
    if (!g) throw std::invalid_argument("make_element: null group");
    Residues r = g->reduce(residues);
    return GroupElement{std::move(g), std::move(r)};
}

namespace {
void require_same(const GroupElement& a, const GroupElement& b) {
    if (!a.group || !b.group || !(*a.group == *b.group))
        throw std::invalid_argument("group mismatch: " + (a.group ? a.group->to_string() : "null") + " vs " +
                                    (b.group ? b.group->to_string() : "null"));
}
}  // namespace

GroupElement elem_add(const GroupElement& a, const GroupElement& b) {
    require_same(a, b);
    return GroupElement{a.group, a.group->add(a.residues, b.residues)};
}

GroupElement elem_scalar(std::int64_t n, const GroupElement& a) {
    return GroupElement{a.group, a.group->scale(n, a.residues)};
}

GroupElement elem_scalar(const BigInt& n, const GroupElement& a) {
    return GroupElement{a.group, a.group->scale(n, a.residues)};
}

ComponentwiseSubgroup ComponentwiseSubgroup::whole(const FiniteAbelianPGroup& g) {
    return ComponentwiseSubgroup{std::vector<int>(g.rank(), 0)};
}

ComponentwiseSubgroup ComponentwiseSubgroup::zero(const FiniteAbelianPGroup& g) {
    return ComponentwiseSubgroup{g.orders()};
}

bool ComponentwiseSubgroup::valid_for(const FiniteAbelianPGroup& g) const {
    if (exponents.size() != g.rank()) return false;
    for (std::size_t j = 0; j < exponents.size(); ++j)
        if (exponents[j] < 0 || exponents[j] > g.orders()[j]) return false;
    return true;
}

bool ComponentwiseSubgroup::contains(const FiniteAbelianPGroup& g, const Residues& x) const {
    for (std::size_t j = 0; j < exponents.size(); ++j) {
        std::int64_t step = checked_pow(g.p(), exponents[j]);
        if (mod_floor(x[j], g.moduli()[j]) % step != 0) return false;
    }
    return true;
}

bool ComponentwiseSubgroup::is_subgroup_of(const ComponentwiseSubgroup& other) const {
    for (std::size_t j = 0; j < exponents.size(); ++j)
        if (exponents[j] < other.exponents[j]) return false;
    return true;
}

bool ComponentwiseSubgroup::is_zero(const FiniteAbelianPGroup& g) const { return exponents == g.orders(); }

ComponentwiseSubgroup ComponentwiseSubgroup::intersect(const ComponentwiseSubgroup& other) const {
    ComponentwiseSubgroup out{exponents};
    for (std::size_t j = 0; j < exponents.size(); ++j)
        out.exponents[j] = std::max(exponents[j], other.exponents[j]);
    return out;
}

int ComponentwiseSubgroup::log_order(const FiniteAbelianPGroup& g) const {
    int s = 0;
    for (std::size_t j = 0; j < exponents.size(); ++j) s += g.orders()[j] - exponents[j];
    return s;
}

std::uint64_t ComponentwiseSubgroup::size(const FiniteAbelianPGroup& g) const {
    return static_cast<std::uint64_t>(checked_pow(g.p(), log_order(g)));
}

Residues ComponentwiseSubgroup::element_at(const FiniteAbelianPGroup& g, std::uint64_t index) const {
    Residues out(g.rank());
    for (std::size_t j = 0; j < g.rank(); ++j) {
        std::int64_t count = checked_pow(g.p(), g.orders()[j] - exponents[j]);
        std::int64_t step = checked_pow(g.p(), exponents[j]);
        out[j] = static_cast<std::int64_t>(index % count) * step;
        index /= count;
    }
    return out;
}

std::vector<Residues> ComponentwiseSubgroup::elements(const FiniteAbelianPGroup& g) const {
    std::uint64_t n = size(g);
    std::vector<Residues> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(element_at(g, i));
    return out;
}

BigInt binom(const BigInt& n, std::uint64_t k) {
    if (n < 0) {
        BigInt r = binom(-n + BigInt(k) - 1, k);
        return (k % 2) ? BigInt(-r) : r;
    }
    if (n < k) return 0;
    BigInt r = 1;
    for (std::uint64_t i = 0; i < k; ++i) {
        r *= (n - i);
        r /= (i + 1);
    }
    return r;
}

BigInt multibinom(const std::vector<BigInt>& n, const std::vector<std::uint64_t>& i) {
    if (n.size() != i.size()) throw std::invalid_argument("multibinom: length mismatch");
    BigInt r = 1;
    for (std::size_t j = 0; j < n.size() && r != 0; ++j) r *= binom(n[j], i[j]);
    return r;
}

BigInt multibinom(const std::vector<std::int64_t>& n, const std::vector<std::int64_t>& i) {
    if (n.size() != i.size()) throw std::invalid_argument("multibinom: length mismatch");
    BigInt r = 1;
    for (std::size_t j = 0; j < n.size() && r != 0; ++j) {
        if (i[j] < 0) throw std::invalid_argument("multibinom: negative lower index");
        r *= binom(BigInt(n[j]), static_cast<std::uint64_t>(i[j]));
    }
    return r;
}

std::int64_t inverse_mod(std::int64_t a, std::int64_t p) {
    std::int64_t t = 0, nt = 1, r = p, nr = mod_floor(a, p);
    while (nr != 0) {
        std::int64_t q = r / nr;
        std::tie(t, nt) = std::make_pair(nt, t - q * nt);
        std::tie(r, nr) = std::make_pair(nr, r - q * nr);
    }
    if (r != 1) throw std::invalid_argument("inverse_mod: not invertible");
    return mod_floor(t, p);
}

FpSubspace::FpSubspace(std::int64_t p, std::size_t dim) : p_(p), dim_(dim) {
    if (!is_prime(p)) throw std::invalid_argument("FpSubspace: p must be prime");
}

FpSubspace FpSubspace::span(std::int64_t p, std::size_t dim, const std::vector<FpVector>& vectors) {
    FpSubspace s(p, dim);
    for (const auto& v : vectors) s.insert(v);
    return s;
}

FpSubspace FpSubspace::full(std::int64_t p, std::size_t dim) {
    FpSubspace s(p, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        FpVector e(dim, 0);
        e[i] = 1;
        s.insert(e);
    }
    return s;
}

FpVector FpSubspace::reduce(const FpVector& v) const {
    if (v.size() != dim_) throw std::invalid_argument("FpSubspace: vector dimension mismatch");
    FpVector r(dim_);
    for (std::size_t i = 0; i < dim_; ++i) r[i] = mod_floor(v[i], p_);
    for (std::size_t k = 0; k < rows_.size(); ++k) {
        std::int64_t c = r[pivots_[k]];
        if (c == 0) continue;
        for (std::size_t i = 0; i < dim_; ++i) r[i] = mod_floor(r[i] - c * rows_[k][i], p_);
    }
    return r;
}

bool FpSubspace::contains(const FpVector& v) const {
    FpVector r = reduce(v);
    return std::all_of(r.begin(), r.end(), [](std::int64_t x) { return x == 0; });
}

bool FpSubspace::contains(const FpSubspace& other) const {
    if (other.dim_ != dim_ || other.p_ != p_) return false;
    return std::all_of(other.rows_.begin(), other.rows_.end(), [&](const FpVector& v) { return contains(v); });
}

bool FpSubspace::insert(const FpVector& v) {
    FpVector r = reduce(v);
    std::size_t piv = 0;
    while (piv < dim_ && r[piv] == 0) ++piv;
    if (piv == dim_) return false;
    std::int64_t inv = inverse_mod(r[piv], p_);
    for (auto& x : r) x = mod_floor(x * inv, p_);
    for (auto& row : rows_) {
        std::int64_t c = row[piv];
        if (c == 0) continue;
        for (std::size_t i = 0; i < dim_; ++i) row[i] = mod_floor(row[i] - c * r[i], p_);
    }
    auto it = std::lower_bound(pivots_.begin(), pivots_.end(), piv);
    std::size_t at = static_cast<std::size_t>(it - pivots_.begin());
    pivots_.insert(it, piv);
    rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(at), r);
    return true;
}

FpSubspace FpSubspace::sum(const FpSubspace& other) const {
    FpSubspace s = *this;
    for (const auto& v : other.rows_) s.insert(v);
    return s;
}

FpSubspace FpSubspace::intersect(const FpSubspace& other) const {
    if (other.dim_ != dim_ || other.p_ != p_) throw std::invalid_argument("FpSubspace: ambient mismatch");
    // Zassenhaus: rows (u | u) and (w | 0); the rows of the echelon form with
    // zero left half span the intersection.
    FpSubspace z(p_, 2 * dim_);
    for (const auto& u : rows_) {
        FpVector row(2 * dim_);
        std::copy(u.begin(), u.end(), row.begin());
        std::copy(u.begin(), u.end(), row.begin() + static_cast<std::ptrdiff_t>(dim_));
        z.insert(row);
    }
    for (const auto& w : other.rows_) {
        FpVector row(2 * dim_, 0);
        std::copy(w.begin(), w.end(), row.begin());
        z.insert(row);
    }
    FpSubspace out(p_, dim_);
    for (std::size_t k = 0; k < z.rows_.size(); ++k) {
        if (z.pivots_[k] < dim_) continue;
        out.insert(FpVector(z.rows_[k].begin() + static_cast<std::ptrdiff_t>(dim_), z.rows_[k].end()));
    }
    return out;
}

std::vector<FpVector> subspace_complete_basis(const FpSubspace& partial, const FpSubspace& within) {
    if (!within.contains(partial))
        throw std::invalid_argument("subspace_complete_basis: partial is not contained in within");
    // With the echelon basis b_1..b_d of `within`, lexicographic order on
    // vectors equals lexicographic order on coefficient tuples, so the
    // smallest vector outside the current span is the last b_t not yet in it.
    FpSubspace current = partial;
    std::vector<FpVector> added;
    const auto& b = within.basis();
    for (std::size_t t = b.size(); t-- > 0;) {
        if (current.insert(b[t])) added.push_back(b[t]);
    }
    return added;
}

}  // namespace nilspace
