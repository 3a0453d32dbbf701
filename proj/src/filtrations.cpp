#include "nilspace/filtrations.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace nilspace {

FilteredGroup::FilteredGroup(GroupPtr group, const std::vector<ComponentwiseSubgroup>& levels)
    : group_(std::move(group)), degree_(static_cast<int>(levels.size())) {
    if (!group_) throw std::invalid_argument("FilteredGroup: null group");
    zero_ = ComponentwiseSubgroup::zero(*group_);
    chain_.reserve(levels.size() + 2);
    chain_.push_back(levels.empty() ? zero_ : levels.front());
    for (const auto& l : levels) {
        if (!l.valid_for(*group_)) throw std::invalid_argument("FilteredGroup: level does not fit the group");
        chain_.push_back(l);
    }
    chain_.push_back(zero_);
    if (!(chain_[1] == ComponentwiseSubgroup::whole(*group_)))
        throw std::invalid_argument("FilteredGroup: G_1 must be the whole group");
    for (std::size_t i = 0; i + 1 < chain_.size(); ++i)
        if (!chain_[i + 1].is_subgroup_of(chain_[i]))
            throw std::invalid_argument("FilteredGroup: chain is not non-increasing at index " + std::to_string(i));
}

bool FilteredGroup::exact() const { return degree_ == 0 || !chain_[degree_].is_zero(*group_); }

const ComponentwiseSubgroup& FilteredGroup::level(int i) const {
    if (i < 0) i = 0;
    if (i > degree_ + 1) return zero_;
    return chain_[static_cast<std::size_t>(i)];
}

FilteredGroup FilteredGroup::with_degree(int k) const {
    if (k < degree_) throw std::invalid_argument("with_degree: cannot lower the degree bound");
    std::vector<ComponentwiseSubgroup> levels;
    for (int i = 1; i <= k; ++i) levels.push_back(level(i));
    return FilteredGroup(group_, levels);
}

bool FilteredGroup::operator==(const FilteredGroup& o) const {
    return *group_ == *o.group_ && degree_ == o.degree_ && chain_ == o.chain_;
}

namespace {

std::string subgroup_text(const FiniteAbelianPGroup& g, const ComponentwiseSubgroup& h) {
    if (g.rank() == 0 || h.is_zero(g)) return "0";
    std::string s;
    for (std::size_t j = 0; j < g.rank(); ++j) {
        if (j) s += "x";
        if (h.exponents[j] == g.orders()[j]) {
            s += "0";
            continue;
        }
        if (h.exponents[j] > 0) s += std::to_string(checked_pow(g.p(), h.exponents[j]));
        s += "Z" + std::to_string(g.moduli()[j]);
    }
    return s;
}

}  // namespace

std::string FilteredGroup::to_string() const {
    std::string s = "F[p=" + std::to_string(p()) + ",k=" + std::to_string(degree_) + ";";
    for (int i = 1; i <= degree_; ++i) {
        s += (i == 1 ? " " : ",");
        s += subgroup_text(*group_, chain_[static_cast<std::size_t>(i)]);
    }
    return s + "]";
}

int IntegerFiltrationProfile::exponent(int j) const {
    if (j <= i) return 0;
    int base = std::max(i, 1);  // H_0 is H_1
    if (j <= base) return 0;
    return (j - base - 1) / static_cast<int>(p - 1) + 1;
}

FilteredGroup make_Dk(const FiniteAbelianPGroup& a, int k) {
    if (k < 1) throw std::invalid_argument("make_Dk: degree must be >= 1");
    std::vector<ComponentwiseSubgroup> levels(static_cast<std::size_t>(k), ComponentwiseSubgroup::whole(a));
    return FilteredGroup(share(a), levels);
}

int block_r(std::int64_t p, int k, int l) { return (k - l) / static_cast<int>(p - 1) + 1; }

FilteredGroup make_Zkl(std::int64_t p, int k, int l) {
    if (!is_prime(p)) throw std::invalid_argument("make_Zkl: p must be prime");
    if (l < 1 || l > k) throw std::invalid_argument("make_Zkl: need 1 <= l <= k");
    int r = block_r(p, k, l);
    FiniteAbelianPGroup g(p, {r});
    std::vector<ComponentwiseSubgroup> levels;
    for (int i = 1; i <= k; ++i) {
        int e = i <= l ? 0 : std::min(r, (i - l - 1) / static_cast<int>(p - 1) + 1);
        levels.push_back(ComponentwiseSubgroup{{e}});
    }
    return FilteredGroup(share(g), levels);
}

IntegerFiltrationProfile make_Hip_profile(std::int64_t p, int i) {
    if (!is_prime(p)) throw std::invalid_argument("make_Hip_profile: p must be prime");
    if (i < 0) throw std::invalid_argument("make_Hip_profile: i must be >= 0");
    return IntegerFiltrationProfile{p, i};
}

FilteredGroup make_Hip_truncated(std::int64_t p, int i, int R) {
    if (R < 1) throw std::invalid_argument("make_Hip_truncated: R must be >= 1");
    auto prof = make_Hip_profile(p, i);
    FiniteAbelianPGroup g(p, {R});
    std::vector<ComponentwiseSubgroup> levels;
    for (int j = 1; prof.exponent(j) < R; ++j) levels.push_back(ComponentwiseSubgroup{{prof.exponent(j)}});
    return FilteredGroup(share(g), levels);
}

FilteredGroup trivial_filtered(std::int64_t p) {
    return FilteredGroup(make_group(p, {}), {});
}

FilteredGroup product(const FilteredGroup& f, const FilteredGroup& g) {
    if (f.p() != g.p()) throw std::invalid_argument("product: prime mismatch");
    std::vector<int> orders = f.group().orders();
    orders.insert(orders.end(), g.group().orders().begin(), g.group().orders().end());
    auto grp = make_group(f.p(), orders);
    int k = std::max(f.degree(), g.degree());
    std::vector<ComponentwiseSubgroup> levels;
    for (int i = 1; i <= k; ++i) {
        std::vector<int> e = f.level(i).exponents;
        const auto& e2 = g.level(i).exponents;
        e.insert(e.end(), e2.begin(), e2.end());
        levels.push_back(ComponentwiseSubgroup{e});
    }
    return FilteredGroup(grp, levels);
}

FilteredGroup product(const std::vector<FilteredGroup>& factors, std::int64_t p) {
    FilteredGroup acc = trivial_filtered(p);
    for (const auto& f : factors) acc = product(acc, f);
    return acc;
}

int p_homogeneity_violation(const FilteredGroup& f) {
    const auto& g = f.group();
    const int p = static_cast<int>(f.p());
    for (int i = 0; i <= f.degree(); ++i) {
        const auto& gi = f.level(i);
        const auto& target = f.level(i + p - 1);
        for (std::size_t j = 0; j < g.rank(); ++j) {
            if (gi.exponents[j] >= g.orders()[j]) continue;
            Residues gen = g.zero();
            gen[j] = checked_pow(g.p(), gi.exponents[j]);
            if (!target.contains(g, g.scale(g.p(), gen))) return i;
        }
    }
    return -1;
}

bool is_p_homogeneous(const FilteredGroup& f) { return p_homogeneity_violation(f) < 0; }

CyclicClassification classify_cyclic(const FilteredGroup& f) {
    if (f.group().rank() != 1) throw std::invalid_argument("classify_cyclic: group is not cyclic");
    if (!f.exact()) throw std::invalid_argument("classify_cyclic: filtration is not of exact degree");
    CyclicClassification out;
    int v = p_homogeneity_violation(f);
    if (v >= 0) {
        out.violating_index = v;
        return out;
    }
    out.homogeneous = true;
    for (int i = 1; i <= f.degree(); ++i) {
        int e = f.level(i).exponents[0];
        int e1 = f.level(i + 1).exponents[0];
        if (e1 == e + 1) out.delta.push_back(i);
    }
    return out;
}

FiniteAbelianPGroup structure_group(const FilteredGroup& f, int i) {
    if (i < 1 || i > f.degree()) throw std::invalid_argument("structure_group: level out of range");
    std::vector<int> orders;
    for (std::size_t j = 0; j < f.group().rank(); ++j) {
        int d = f.level(i + 1).exponents[j] - f.level(i).exponents[j];
        if (d > 0) orders.push_back(d);
    }
    std::sort(orders.rbegin(), orders.rend());
    return FiniteAbelianPGroup(f.p(), orders);
}

namespace {

struct TextCursor {
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
    void keyword(std::string_view w) {
        ws();
        if (s.substr(pos, w.size()) != w) fail("expected '" + std::string(w) + "'");
        pos += w.size();
    }
    bool digit() {
        ws();
        return pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]));
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

// Returns (coefficient, modulus) per component; modulus 0 marks a bare "0".
std::vector<std::pair<std::int64_t, std::int64_t>> parse_subgroup(TextCursor& c) {
    std::vector<std::pair<std::int64_t, std::int64_t>> comps;
    while (true) {
        std::int64_t coef = 1;
        if (c.digit()) {
            coef = c.integer();
            if (!c.at('Z')) {
                if (coef != 0) c.fail("expected 'Z' after coefficient");
                comps.push_back({0, 0});
                goto next;
            }
        }
        c.expect('Z');
        comps.push_back({coef, c.integer()});
    next:
        if (c.at('x')) {
            ++c.pos;
            continue;
        }
        return comps;
    }
}

int log_p(std::int64_t value, std::int64_t p, TextCursor& c) {
    int e = 0;
    while (value > 1 && value % p == 0) {
        value /= p;
        ++e;
    }
    if (value != 1) c.fail("value is not a power of p");
    return e;
}

}  // namespace

FilteredGroup parse_filtration(std::string_view text) {
    TextCursor c{text};
    c.keyword("F");
    c.expect('[');
    c.keyword("p");
    c.expect('=');
    std::int64_t p = c.integer();
    if (!is_prime(p)) c.fail("p is not prime");
    c.expect(',');
    c.keyword("k");
    c.expect('=');
    int k = static_cast<int>(c.integer());
    c.expect(';');
    if (k == 0) {
        c.expect(']');
        return trivial_filtered(p);
    }
    std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> raw;
    std::vector<std::size_t> offsets;
    for (int i = 1; i <= k; ++i) {
        if (i > 1) c.expect(',');
        c.ws();
        offsets.push_back(c.pos);
        raw.push_back(parse_subgroup(c));
    }
    c.expect(']');
    c.ws();
    if (c.pos != text.size()) c.fail("trailing characters");

    std::vector<int> orders;
    for (auto [coef, mod] : raw[0]) {
        c.pos = offsets[0];
        if (mod == 0 || coef != 1) c.fail("G_1 must be the whole group");
        orders.push_back(log_p(mod, p, c));
    }
    auto g = make_group(p, orders);
    std::vector<ComponentwiseSubgroup> levels;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        c.pos = offsets[i];
        const auto& comps = raw[i];
        ComponentwiseSubgroup h{std::vector<int>(orders.size())};
        if (comps.size() == 1 && comps[0].second == 0) {
            h = ComponentwiseSubgroup::zero(*g);
        } else {
            if (comps.size() != orders.size()) c.fail("component count does not match the group");
            for (std::size_t j = 0; j < comps.size(); ++j) {
                auto [coef, mod] = comps[j];
                if (mod == 0) {
                    h.exponents[j] = orders[j];
                    continue;
                }
                if (mod != g->moduli()[j]) c.fail("modulus does not match the group");
                int e = log_p(coef, p, c);
                if (e > orders[j]) c.fail("coefficient exceeds the modulus");
                h.exponents[j] = e;
            }
        }
        levels.push_back(h);
    }
    try {
        return FilteredGroup(g, levels);
    } catch (const std::invalid_argument& e) {
        c.pos = offsets.back();
        c.fail(e.what());
    }
}

}  // namespace nilspace
