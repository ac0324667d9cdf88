#include "critnum/subset.hpp"

#include <stdexcept>

namespace critnum {

GroupSubset::GroupSubset(GroupPtr group) :
    group_(std::move(group)),
    bits_(group_->words(), 0)
{
}

GroupSubset::GroupSubset(GroupPtr group, std::span<const Element> elements) :
    GroupSubset(std::move(group))
{
    for (auto a : elements)
        insert(a);
}

GroupSubset::GroupSubset(GroupPtr group, std::initializer_list<Element> elements) :
    GroupSubset(std::move(group), std::span<const Element>(elements.begin(), elements.size()))
{
}

GroupSubset GroupSubset::full(GroupPtr group)
{
    GroupSubset s(std::move(group));
    const auto n = s.group_->order();
    for (std::size_t w = 0; w < s.bits_.size(); ++w) {
        const std::size_t lo = w * 64;
        s.bits_[w] = n - lo >= 64 ? ~0ull : (1ull << (n - lo)) - 1;
    }
    s.cardinality_ = n;
    return s;
}

GroupSubset GroupSubset::singleton(GroupPtr group, Element a)
{
    GroupSubset s(std::move(group));
    s.insert(a);
    return s;
}

void GroupSubset::insert(Element a)
{
    group_->check(a);
    auto & w = bits_[a / 64];
    const auto m = 1ull << (a % 64);
    if (!(w & m)) {
        w |= m;
        ++cardinality_;
    }
}

void GroupSubset::erase(Element a)
{
    group_->check(a);
    auto & w = bits_[a / 64];
    const auto m = 1ull << (a % 64);
    if (w & m) {
        w &= ~m;
        --cardinality_;
    }
}

std::vector<Element> GroupSubset::elements() const
{
    std::vector<Element> out;
    out.reserve(cardinality_);
    for (std::size_t w = 0; w < bits_.size(); ++w)
        for (auto x = bits_[w]; x; x &= x - 1)
            out.push_back(static_cast<Element>(w * 64 + std::countr_zero(x)));
    return out;
}

Element GroupSubset::first() const
{
    for (std::size_t w = 0; w < bits_.size(); ++w)
        if (bits_[w])
            return static_cast<Element>(w * 64 + std::countr_zero(bits_[w]));
    throw std::logic_error("first() on empty subset");
}

void GroupSubset::or_translated(const GroupSubset & src, Element g)
{
    require_same_group(src);
    group_->translate_or(bits_, src.bits_, g);
    recount();
}

GroupSubset GroupSubset::translated(Element g) const
{
    GroupSubset out(group_);
    out.or_translated(*this, g);
    return out;
}

GroupSubset & GroupSubset::operator|=(const GroupSubset & other)
{
    require_same_group(other);
    for (std::size_t w = 0; w < bits_.size(); ++w)
        bits_[w] |= other.bits_[w];
    recount();
    return *this;
}

GroupSubset & GroupSubset::operator&=(const GroupSubset & other)
{
    require_same_group(other);
    for (std::size_t w = 0; w < bits_.size(); ++w)
        bits_[w] &= other.bits_[w];
    recount();
    return *this;
}

GroupSubset & GroupSubset::operator-=(const GroupSubset & other)
{
    require_same_group(other);
    for (std::size_t w = 0; w < bits_.size(); ++w)
        bits_[w] &= ~other.bits_[w];
    recount();
    return *this;
}

bool GroupSubset::is_subset_of(const GroupSubset & other) const
{
    require_same_group(other);
    for (std::size_t w = 0; w < bits_.size(); ++w)
        if (bits_[w] & ~other.bits_[w])
            return false;
    return true;
}

bool GroupSubset::operator==(const GroupSubset & other) const
{
    return group_->spec() == other.group_->spec() && bits_ == other.bits_;
}

std::string GroupSubset::to_string() const
{
    std::string out = "{";
    bool first_item = true;
    for (auto a : elements()) {
        if (!first_item)
            out += ',';
        out += std::to_string(a);
        first_item = false;
    }
    return out + "}";
}

void GroupSubset::require_same_group(const GroupSubset & other) const
{
    if (group_ != other.group_ && group_->spec() != other.group_->spec())
        throw std::invalid_argument("subsets belong to different groups: " + group_->spec().to_string()
                                    + " vs " + other.group_->spec().to_string());
}

void GroupSubset::recount()
{
    std::size_t c = 0;
    for (auto w : bits_)
        c += static_cast<std::size_t>(std::popcount(w));
    cardinality_ = c;
}

Element sum_of(const Group & g, std::span<const Element> elements)
{
    Element s = 0;
    for (auto a : elements)
        s = g.add(s, a);
    return s;
}

} // namespace critnum
