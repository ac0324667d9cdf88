#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace critnum {

/// Dense element index in [0, |G|-1] under the mixed-radix encoding of the
/// invariant factors (first factor most significant). Index 0 is the identity.
using Element = std::uint32_t;

/// A finite abelian group as its invariant factors d1 | d2 | ... | dk, each >= 2.
/// The trivial group has no factors.
struct GroupSpec
{
    std::vector<std::uint32_t> invariant_factors;

    std::uint32_t order() const;
    bool is_cyclic() const { return invariant_factors.size() <= 1; }

    /// "C91", "C2xC4"; the trivial group prints as "C1".
    std::string to_string() const;

    /// Canonical form of C_{n1} + ... + C_{nk} for arbitrary cyclic orders.
    static GroupSpec from_cyclic_orders(std::span<const std::uint32_t> orders);

    static GroupSpec cyclic(std::uint32_t n);

    auto operator<=>(const GroupSpec&) const = default;
};

/// Parses "C<n>", "C<n>xC<m>x...", or a bare integer n (meaning C_n), case-insensitively.
/// Throws std::invalid_argument on malformed text or any factor < 2.
GroupSpec parse_group_spec(std::string_view text);

/// All isomorphism classes of abelian groups of order n, canonical, in
/// descending lexicographic order of the invariant-factor lists (cyclic first).
std::vector<GroupSpec> enumerate_abelian_groups(std::uint32_t n);

/// Immutable arithmetic context for one group. Also owns the translation
/// plans used by the bit-packed set kernels.
class Group
{
public:
    explicit Group(GroupSpec spec);

    const GroupSpec & spec() const { return spec_; }
    std::uint32_t order() const { return order_; }

    std::vector<std::uint32_t> coords(Element a) const;
    Element from_coords(std::span<const std::uint32_t> coords) const;

    Element add(Element a, Element b) const;
    Element neg(Element a) const;
    Element sub(Element a, Element b) const { return add(a, neg(b)); }
    Element multiple(Element a, std::int64_t k) const;
    std::uint32_t element_order(Element a) const;

    /// Throws std::out_of_range if a is not a valid element index.
    void check(Element a) const;

    /// dst |= src + g on bit arrays of length order() (word count = words()).
    void translate_or(std::span<std::uint64_t> dst, std::span<const std::uint64_t> src, Element g) const;

    /// Single-word fast path; only valid when order() <= 64.
    std::uint64_t translate_word(std::uint64_t x, Element g) const
    {
        std::uint64_t r = 0;
        for (const auto & [mask, shift] : word_plan_[g]) {
            const std::uint64_t v = x & mask;
            r |= shift >= 0 ? v << shift : v >> -shift;
        }
        return r;
    }

    std::size_t words() const { return (order_ + 63) / 64; }
    std::uint64_t full_word_mask() const;

private:
    struct Segment
    {
        std::uint32_t src;
        std::uint32_t dst;
        std::uint32_t len;
    };

    std::vector<Segment> segments_for(Element g) const;
    std::uint32_t outer_add(std::uint32_t o1, std::uint32_t o2) const;

    GroupSpec spec_;
    std::uint32_t order_;
    std::uint32_t inner_;      // largest invariant factor (contiguous block length)
    std::uint32_t outer_;      // order_ / inner_
    std::vector<std::vector<std::pair<std::uint64_t, int>>> word_plan_;
};

using GroupPtr = std::shared_ptr<const Group>;

GroupPtr make_group(GroupSpec spec);
inline GroupPtr make_cyclic(std::uint32_t n) { return make_group(GroupSpec::cyclic(n)); }

} // namespace critnum
