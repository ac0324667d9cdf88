#include "critnum/group.hpp"

#include "critnum/number_theory.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <stdexcept>

namespace critnum {

std::uint32_t GroupSpec::order() const
{
    std::uint32_t n = 1;
    for (auto d : invariant_factors)
        n *= d;
    return n;
}

std::string GroupSpec::to_string() const
{
    if (invariant_factors.empty())
        return "C1";
    std::string out;
    for (std::size_t i = 0; i < invariant_factors.size(); ++i) {
        if (i)
            out += 'x';
        out += 'C' + std::to_string(invariant_factors[i]);
    }
    return out;
}

GroupSpec GroupSpec::cyclic(std::uint32_t n)
{
    if (n == 0)
        throw std::invalid_argument("cyclic group of order 0");
    GroupSpec g;
    if (n > 1)
        g.invariant_factors.push_back(n);
    return g;
}

namespace {

// Per-prime exponent lists (descending) to invariant factors.
GroupSpec from_primary(std::map<std::uint64_t, std::vector<unsigned>> primary)
{
    std::size_t k = 0;
    for (auto & [p, exps] : primary) {
        std::sort(exps.begin(), exps.end(), std::greater<>());
        k = std::max(k, exps.size());
    }
    // d_k collects the largest exponent of each prime, d_{k-1} the second largest, ...
    std::vector<std::uint32_t> factors(k, 1);
    for (const auto & [p, exps] : primary)
        for (std::size_t j = 0; j < exps.size(); ++j)
            for (unsigned e = 0; e < exps[j]; ++e)
                factors[k - 1 - j] *= static_cast<std::uint32_t>(p);
    GroupSpec g;
    g.invariant_factors = std::move(factors);
    return g;
}

} // namespace

GroupSpec GroupSpec::from_cyclic_orders(std::span<const std::uint32_t> orders)
{
    std::map<std::uint64_t, std::vector<unsigned>> primary;
    for (auto n : orders) {
        if (n < 1)
            throw std::invalid_argument("cyclic factor of order 0");
        for (auto [p, e] : factorize(n))
            primary[p].push_back(e);
    }
    return from_primary(std::move(primary));
}

GroupSpec parse_group_spec(std::string_view text)
{
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c)))
            s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s.empty())
        throw std::invalid_argument("empty group descriptor");

    auto parse_number = [&](std::string_view digits) -> std::uint32_t {
        if (digits.empty() || digits.size() > 9
            || !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            throw std::invalid_argument("malformed group descriptor: '" + std::string(text) + "'");
        auto n = static_cast<std::uint32_t>(std::stoul(std::string(digits)));
        if (n < 2)
            throw std::invalid_argument("cyclic factor must be >= 2 in '" + std::string(text) + "'");
        return n;
    };

    std::vector<std::uint32_t> orders;
    if (std::isdigit(static_cast<unsigned char>(s.front()))) {
        orders.push_back(parse_number(s));
    }
    else {
        std::size_t pos = 0;
        while (true) {
            if (pos >= s.size() || s[pos] != 'c')
                throw std::invalid_argument("malformed group descriptor: '" + std::string(text) + "'");
            auto end = s.find('x', pos);
            auto stop = end == std::string::npos ? s.size() : end;
            orders.push_back(parse_number(std::string_view(s).substr(pos + 1, stop - pos - 1)));
            if (end == std::string::npos)
                break;
            pos = end + 1;
        }
    }
    std::uint64_t total = 1;
    for (auto n : orders) {
        total *= n;
        if (total > (1u << 30))
            throw std::invalid_argument("group order too large: '" + std::string(text) + "'");
    }
    return GroupSpec::from_cyclic_orders(orders);
}

std::vector<GroupSpec> enumerate_abelian_groups(std::uint32_t n)
{
    if (n < 1)
        throw std::invalid_argument("enumerate_abelian_groups: n must be >= 1");
    const auto fac = factorize(n);
    std::vector<std::vector<std::vector<unsigned>>> choices;
    for (auto [p, e] : fac)
        choices.push_back(integer_partitions(e));

    std::vector<GroupSpec> out;
    std::vector<std::size_t> pick(fac.size(), 0);
    while (true) {
        std::map<std::uint64_t, std::vector<unsigned>> primary;
        for (std::size_t i = 0; i < fac.size(); ++i)
            primary[fac[i].first] = choices[i][pick[i]];
        out.push_back(from_primary(std::move(primary)));
        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == choices[i].size())
            pick[i++] = 0;
        if (i == pick.size())
            break;
    }
    std::sort(out.begin(), out.end(), [](const GroupSpec & a, const GroupSpec & b) {
        return a.invariant_factors > b.invariant_factors;
    });
    return out;
}

Group::Group(GroupSpec spec) :
    spec_(std::move(spec)),
    order_(spec_.order()),
    inner_(spec_.invariant_factors.empty() ? 1 : spec_.invariant_factors.back()),
    outer_(order_ / inner_)
{
    for (std::size_t i = 0; i < spec_.invariant_factors.size(); ++i) {
        auto d = spec_.invariant_factors[i];
        if (d < 2)
            throw std::invalid_argument("invariant factor must be >= 2");
        if (i + 1 < spec_.invariant_factors.size() && spec_.invariant_factors[i + 1] % d != 0)
            throw std::invalid_argument("invariant factors must form a divisibility chain");
    }

    if (order_ <= 64) {
        word_plan_.resize(order_);
        for (Element g = 0; g < order_; ++g) {
            std::map<int, std::uint64_t> by_shift;
            for (const auto & seg : segments_for(g)) {
                std::uint64_t mask = seg.len == 64 ? ~0ull : ((1ull << seg.len) - 1) << seg.src;
                by_shift[static_cast<int>(seg.dst) - static_cast<int>(seg.src)] |= mask;
            }
            for (auto [shift, mask] : by_shift)
                word_plan_[g].emplace_back(mask, shift);
        }
    }
}

void Group::check(Element a) const
{
    if (a >= order_)
        throw std::out_of_range("element index " + std::to_string(a) + " out of range for " + spec_.to_string());
}

std::vector<std::uint32_t> Group::coords(Element a) const
{
    check(a);
    const auto & f = spec_.invariant_factors;
    std::vector<std::uint32_t> c(f.size());
    for (std::size_t i = f.size(); i-- > 0;) {
        c[i] = a % f[i];
        a /= f[i];
    }
    return c;
}

Element Group::from_coords(std::span<const std::uint32_t> c) const
{
    const auto & f = spec_.invariant_factors;
    if (c.size() != f.size())
        throw std::invalid_argument("coordinate count does not match group rank");
    Element a = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (c[i] >= f[i])
            throw std::out_of_range("coordinate out of range");
        a = a * f[i] + c[i];
    }
    return a;
}

Element Group::add(Element a, Element b) const
{
    check(a);
    check(b);
    const auto & f = spec_.invariant_factors;
    if (f.size() <= 1)
        return order_ == 0 ? 0 : (a + b) % order_;
    Element r = 0, scale = 1;
    for (std::size_t i = f.size(); i-- > 0;) {
        const auto ca = a % f[i], cb = b % f[i];
        a /= f[i];
        b /= f[i];
        r += ((ca + cb) % f[i]) * scale;
        scale *= f[i];
    }
    return r;
}

Element Group::neg(Element a) const
{
    check(a);
    const auto & f = spec_.invariant_factors;
    Element r = 0, scale = 1;
    for (std::size_t i = f.size(); i-- > 0;) {
        const auto c = a % f[i];
        a /= f[i];
        r += ((f[i] - c) % f[i]) * scale;
        scale *= f[i];
    }
    return r;
}

Element Group::multiple(Element a, std::int64_t k) const
{
    check(a);
    const auto & f = spec_.invariant_factors;
    Element r = 0, scale = 1;
    for (std::size_t i = f.size(); i-- > 0;) {
        const std::int64_t d = f[i];
        const std::int64_t c = a % f[i];
        a /= f[i];
        std::int64_t v = ((c * (k % d)) % d + d) % d;
        r += static_cast<Element>(v) * scale;
        scale *= f[i];
    }
    return r;
}

std::uint32_t Group::element_order(Element a) const
{
    std::uint32_t ord = 1;
    for (Element x = a; x != 0; x = add(x, a))
        ++ord;
    return ord;
}

std::uint64_t Group::full_word_mask() const
{
    return order_ >= 64 ? ~0ull : (1ull << order_) - 1;
}

std::uint32_t Group::outer_add(std::uint32_t o1, std::uint32_t o2) const
{
    const auto & f = spec_.invariant_factors;
    if (f.size() <= 1)
        return 0;
    std::uint32_t r = 0, scale = 1;
    for (std::size_t i = f.size() - 1; i-- > 0;) {
        const auto c1 = o1 % f[i], c2 = o2 % f[i];
        o1 /= f[i];
        o2 /= f[i];
        r += ((c1 + c2) % f[i]) * scale;
        scale *= f[i];
    }
    return r;
}

std::vector<Group::Segment> Group::segments_for(Element g) const
{
    // Element index = outer * inner_ + last coordinate. Translation by g moves
    // block o to block o + g_outer and rotates it by g_inner.
    const std::uint32_t g_outer = g / inner_, g_inner = g % inner_;
    std::vector<Segment> segs;
    segs.reserve(2 * outer_);
    for (std::uint32_t o = 0; o < outer_; ++o) {
        const std::uint32_t o2 = outer_add(o, g_outer);
        if (inner_ - g_inner > 0)
            segs.push_back({o * inner_, o2 * inner_ + g_inner, inner_ - g_inner});
        if (g_inner > 0)
            segs.push_back({o * inner_ + inner_ - g_inner, o2 * inner_, g_inner});
    }
    return segs;
}

namespace {

inline std::uint64_t extract_bits(std::span<const std::uint64_t> w, std::size_t pos, unsigned len)
{
    const std::size_t word = pos / 64;
    const unsigned bit = pos % 64;
    std::uint64_t v = w[word] >> bit;
    if (bit != 0 && bit + len > 64)
        v |= w[word + 1] << (64 - bit);
    return len == 64 ? v : v & ((1ull << len) - 1);
}

inline void or_bits(std::span<std::uint64_t> w, std::size_t pos, std::uint64_t v, unsigned len)
{
    const std::size_t word = pos / 64;
    const unsigned bit = pos % 64;
    w[word] |= v << bit;
    if (bit != 0 && bit + len > 64)
        w[word + 1] |= v >> (64 - bit);
}

} // namespace

void Group::translate_or(std::span<std::uint64_t> dst, std::span<const std::uint64_t> src, Element g) const
{
    check(g);
    if (order_ <= 64) {
        dst[0] |= translate_word(src[0], g);
        return;
    }
    for (const auto & seg : segments_for(g)) {
        for (std::uint32_t off = 0; off < seg.len; off += 64) {
            const unsigned len = std::min<std::uint32_t>(64, seg.len - off);
            const auto v = extract_bits(src, seg.src + off, len);
            if (v)
                or_bits(dst, seg.dst + off, v, len);
        }
    }
}

GroupPtr make_group(GroupSpec spec)
{
    return std::make_shared<const Group>(std::move(spec));
}

} // namespace critnum
