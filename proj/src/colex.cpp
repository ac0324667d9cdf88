#include "critnum/colex.hpp"

#include "critnum/number_theory.hpp"

namespace critnum::colex {

std::uint64_t rank(std::span<const std::uint32_t> combination)
{
    std::uint64_t r = 0;
    for (std::size_t i = 0; i < combination.size(); ++i)
        r += binomial(combination[i], i + 1);
    return r;
}

std::vector<std::uint32_t> unrank(std::uint64_t r, std::uint32_t k)
{
    std::vector<std::uint32_t> c(k);
    for (std::uint32_t i = k; i-- > 0;) {
        // largest v with C(v, i+1) <= r
        std::uint32_t v = i;
        while (binomial(v + 1, i + 1) <= r)
            ++v;
        c[i] = v;
        r -= binomial(v, i + 1);
    }
    return c;
}

int advance_from(std::vector<std::uint32_t> & c, std::uint32_t m, std::uint32_t from)
{
    const auto k = static_cast<std::uint32_t>(c.size());
    for (std::uint32_t j = from; j < k; ++j) {
        const std::uint32_t limit = j + 1 < k ? c[j + 1] : m;
        if (c[j] + 1 < limit) {
            ++c[j];
            for (std::uint32_t t = 0; t < j; ++t)
                c[t] = t;
            return static_cast<int>(j);
        }
    }
    return -1;
}

} // namespace critnum::colex
