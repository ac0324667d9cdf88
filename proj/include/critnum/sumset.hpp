#pragma once

#include "critnum/subset.hpp"

#include <optional>
#include <span>
#include <vector>

namespace critnum {

/// A + B. Throws on group mismatch or an empty operand.
GroupSubset sumset(const GroupSubset & a, const GroupSubset & b);

/// Left fold of sumset over one or more sets.
GroupSubset iterated_sumset(std::span<const GroupSubset> sets);

/// Layers Sigma_0(A) .. Sigma_|A|(A) of restricted sumsets, Sigma_0 = {0}.
class RestrictedSumsetTable
{
public:
    /// With keep_prefixes, the per-prefix layers are retained so that witness() works.
    explicit RestrictedSumsetTable(const GroupSubset & source, bool keep_prefixes = false);

    const GroupSubset & source() const { return source_; }
    std::size_t max_k() const { return layers_.size() - 1; }
    const GroupSubset & layer(std::size_t k) const { return layers_.at(k); }
    const std::vector<GroupSubset> & layers() const { return layers_; }

    /// Union of layers 1..|A|, i.e. Sigma(A).
    GroupSubset union_nonempty() const;

    /// A k-element subset of the source summing to x, if x is in Sigma_k.
    std::optional<std::vector<Element>> witness(std::size_t k, Element x) const;

private:
    GroupSubset source_;
    std::vector<Element> elements_;
    std::vector<GroupSubset> layers_;
    // prefix_[j][k] = Sigma_k of the first j elements (only with keep_prefixes).
    std::vector<std::vector<GroupSubset>> prefix_;
};

inline RestrictedSumsetTable restricted_sumsets(const GroupSubset & a, bool keep_prefixes = false)
{
    return RestrictedSumsetTable(a, keep_prefixes);
}

/// Sigma(A): all sums of nonempty subsets of A. Sigma of the empty set is empty.
GroupSubset sigma(const GroupSubset & a);

/// A nonempty subset of A summing to x, or nullopt if x is not in Sigma(A).
std::optional<std::vector<Element>> sigma_witness(const GroupSubset & a, Element x);

/// Some difference d with A = {a0 + v d : v in [0, |A|-1]}; smallest nonzero d
/// when |A| >= 2, 0 for singletons. nullopt if A is not an arithmetic progression.
std::optional<Element> detect_ap(const GroupSubset & a);

/// True if A is an arithmetic progression with difference d.
bool is_ap_with_difference(const GroupSubset & a, Element d);

/// Every nonzero d for which A is an arithmetic progression with difference d.
std::vector<Element> ap_differences(const GroupSubset & a);

namespace kernel {

/// One closure step on a single-word set: R | (R + e) | {e}. Requires |G| <= 64.
inline std::uint64_t sigma_step(const Group & g, std::uint64_t r, Element e)
{
    return r | g.translate_word(r, e) | (1ull << e);
}

/// Single-word A + B for |G| <= 64.
inline std::uint64_t sumset_word(const Group & g, std::uint64_t a, std::uint64_t b)
{
    std::uint64_t r = 0;
    for (; b; b &= b - 1)
        r |= g.translate_word(a, static_cast<Element>(std::countr_zero(b)));
    return r;
}

} // namespace kernel

} // namespace critnum
