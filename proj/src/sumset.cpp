#include "critnum/sumset.hpp"

#include <stdexcept>

namespace critnum {

GroupSubset sumset(const GroupSubset & a, const GroupSubset & b)
{
    a.require_same_group(b);
    if (a.empty() || b.empty())
        throw std::invalid_argument("sumset of an empty set");
    GroupSubset out(a.group_ptr());
    for (auto e : b.elements())
        out.or_translated(a, e);
    return out;
}

GroupSubset iterated_sumset(std::span<const GroupSubset> sets)
{
    if (sets.empty())
        throw std::invalid_argument("iterated_sumset needs at least one set");
    GroupSubset acc = sets.front();
    if (acc.empty())
        throw std::invalid_argument("sumset of an empty set");
    for (std::size_t i = 1; i < sets.size(); ++i)
        acc = sumset(acc, sets[i]);
    return acc;
}

RestrictedSumsetTable::RestrictedSumsetTable(const GroupSubset & source, bool keep_prefixes) :
    source_(source),
    elements_(source.elements())
{
    const auto & gp = source.group_ptr();
    const std::size_t m = elements_.size();
    layers_.assign(m + 1, GroupSubset(gp));
    layers_[0].insert(0);
    if (keep_prefixes)
        prefix_.push_back(layers_);
    for (std::size_t j = 0; j < m; ++j) {
        // High to low so each element is used at most once.
        for (std::size_t k = j + 1; k >= 1; --k)
            layers_[k].or_translated(layers_[k - 1], elements_[j]);
        if (keep_prefixes)
            prefix_.push_back(layers_);
    }
}

GroupSubset RestrictedSumsetTable::union_nonempty() const
{
    GroupSubset out(source_.group_ptr());
    for (std::size_t k = 1; k < layers_.size(); ++k)
        out |= layers_[k];
    return out;
}

std::optional<std::vector<Element>> RestrictedSumsetTable::witness(std::size_t k, Element x) const
{
    if (prefix_.empty())
        throw std::logic_error("RestrictedSumsetTable built without prefix layers");
    if (k > max_k() || !layers_[k].contains(x))
        return std::nullopt;
    const auto & g = source_.group();
    std::vector<Element> chosen;
    for (std::size_t j = elements_.size(); j > 0 && k > 0; --j) {
        if (prefix_[j - 1][k].contains(x))
            continue;
        chosen.push_back(elements_[j - 1]);
        x = g.sub(x, elements_[j - 1]);
        --k;
    }
    if (k != 0 || x != 0)
        throw std::logic_error("restricted sumset backtrack failed");
    return chosen;
}

GroupSubset sigma(const GroupSubset & a)
{
    const auto & g = a.group();
    if (g.order() <= 64) {
        std::uint64_t r = 0;
        for (auto e : a.elements())
            r = kernel::sigma_step(g, r, e);
        GroupSubset out(a.group_ptr());
        for (; r; r &= r - 1)
            out.insert(static_cast<Element>(std::countr_zero(r)));
        return out;
    }
    GroupSubset r(a.group_ptr());
    for (auto e : a.elements()) {
        GroupSubset shifted = r.translated(e);
        r |= shifted;
        r.insert(e);
    }
    return r;
}

std::optional<std::vector<Element>> sigma_witness(const GroupSubset & a, Element x)
{
    const auto & g = a.group();
    g.check(x);
    const auto elems = a.elements();
    // snapshots[j] = Sigma of the first j elements
    std::vector<GroupSubset> snapshots;
    snapshots.reserve(elems.size() + 1);
    snapshots.emplace_back(a.group_ptr());
    for (auto e : elems) {
        GroupSubset next = snapshots.back();
        next.or_translated(snapshots.back(), e);
        next.insert(e);
        snapshots.push_back(std::move(next));
    }
    if (!snapshots.back().contains(x))
        return std::nullopt;

    std::vector<Element> chosen;
    for (std::size_t j = elems.size(); j > 0; --j) {
        if (snapshots[j - 1].contains(x))
            continue;
        // x entered at step j: either x == e_j, or x - e_j was already reachable.
        const Element e = elems[j - 1];
        chosen.push_back(e);
        if (x == e)
            return chosen;
        x = g.sub(x, e);
    }
    throw std::logic_error("sigma backtrack failed");
}

bool is_ap_with_difference(const GroupSubset & a, Element d)
{
    const auto & g = a.group();
    g.check(d);
    if (a.empty())
        return false;
    if (a.size() == 1)
        return true;
    if (d == 0)
        return false;
    // A start is a member whose predecessor is absent.
    std::optional<Element> start;
    for (auto x : a.elements()) {
        if (!a.contains(g.sub(x, d))) {
            if (start)
                return false;
            start = x;
        }
    }
    if (!start) {
        // No start: A is a union of cosets of <d>; an AP only if it is exactly one.
        return a.size() == g.element_order(d);
    }
    Element x = *start;
    for (std::size_t v = 0; v < a.size(); ++v) {
        if (!a.contains(x))
            return false;
        x = g.add(x, d);
    }
    return true;
}

std::vector<Element> ap_differences(const GroupSubset & a)
{
    std::vector<Element> out;
    for (Element d = 1; d < a.group().order(); ++d)
        if (is_ap_with_difference(a, d))
            out.push_back(d);
    return out;
}

std::optional<Element> detect_ap(const GroupSubset & a)
{
    if (a.empty())
        throw std::invalid_argument("detect_ap of an empty set");
    if (a.size() == 1)
        return Element{0};
    for (Element d = 1; d < a.group().order(); ++d)
        if (is_ap_with_difference(a, d))
            return d;
    return std::nullopt;
}

} // namespace critnum
