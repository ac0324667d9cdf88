#pragma once

#include "critnum/group.hpp"

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace critnum {

/// Bit-packed subset of a group's elements. Bit i is set iff element i is a member.
class GroupSubset
{
public:
    explicit GroupSubset(GroupPtr group);
    GroupSubset(GroupPtr group, std::span<const Element> elements);
    GroupSubset(GroupPtr group, std::initializer_list<Element> elements);

    static GroupSubset full(GroupPtr group);
    static GroupSubset singleton(GroupPtr group, Element a);

    const Group & group() const { return *group_; }
    const GroupPtr & group_ptr() const { return group_; }

    bool contains(Element a) const { return (bits_[a / 64] >> (a % 64)) & 1u; }
    void insert(Element a);
    void erase(Element a);

    std::size_t size() const { return cardinality_; }
    bool empty() const { return cardinality_ == 0; }
    bool is_full() const { return cardinality_ == group_->order(); }

    /// Sorted element indices.
    std::vector<Element> elements() const;
    Element first() const;

    std::span<const std::uint64_t> words() const { return bits_; }

    /// this |= src + g
    void or_translated(const GroupSubset & src, Element g);
    GroupSubset translated(Element g) const;

    GroupSubset & operator|=(const GroupSubset & other);
    GroupSubset & operator&=(const GroupSubset & other);
    /// Set difference.
    GroupSubset & operator-=(const GroupSubset & other);

    friend GroupSubset operator|(GroupSubset a, const GroupSubset & b) { return a |= b; }
    friend GroupSubset operator&(GroupSubset a, const GroupSubset & b) { return a &= b; }
    friend GroupSubset operator-(GroupSubset a, const GroupSubset & b) { return a -= b; }

    bool is_subset_of(const GroupSubset & other) const;
    bool operator==(const GroupSubset & other) const;

    /// "{1,4,7}"
    std::string to_string() const;

    /// Throws std::invalid_argument unless both subsets live in the same group.
    void require_same_group(const GroupSubset & other) const;

private:
    void recount();

    GroupPtr group_;
    std::vector<std::uint64_t> bits_;
    std::size_t cardinality_ = 0;
};

/// Sum of the listed elements in the group (0 for an empty list).
Element sum_of(const Group & g, std::span<const Element> elements);

} // namespace critnum
