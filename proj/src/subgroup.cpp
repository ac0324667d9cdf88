#include "critnum/subgroup.hpp"

#include "critnum/number_theory.hpp"

#include <stdexcept>
#include <string>

namespace critnum {

Subgroup subgroup_of_index_p(const GroupPtr & g, std::uint32_t p)
{
    if (!is_prime(p))
        throw std::invalid_argument(std::to_string(p) + " is not prime");
    const auto n = g->order();
    if (n % p != 0)
        throw std::invalid_argument(std::to_string(p) + " does not divide |G| = " + std::to_string(n));

    // p divides every invariant factor from the first one it divides onward,
    // so the last coordinate always qualifies.
    const std::uint32_t last = g->spec().invariant_factors.back();
    Subgroup h{GroupSubset(g), p, {}, std::vector<std::uint32_t>(n)};
    for (Element a = 0; a < n; ++a) {
        const std::uint32_t residue = (a % last) % p;
        h.coset_of[a] = residue;
        if (residue == 0)
            h.members.insert(a);
    }
    // Elements 0..p-1 have last coordinate 0..p-1 and all other coordinates 0.
    for (Element a = 0; a < p; ++a)
        h.coset_reps.push_back(a);
    return h;
}

bool is_subgroup(const GroupSubset & h)
{
    const auto & g = h.group();
    if (!h.contains(0))
        return false;
    const auto elems = h.elements();
    for (auto a : elems) {
        if (!h.contains(g.neg(a)))
            return false;
        for (auto b : elems)
            if (!h.contains(g.add(a, b)))
                return false;
    }
    return g.order() % h.size() == 0;
}

} // namespace critnum
