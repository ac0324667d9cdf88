#pragma once

#include "critnum/subset.hpp"

#include <cstdint>
#include <vector>

namespace critnum {

/// A subgroup H of G with its coset structure.
struct Subgroup
{
    GroupSubset members;
    std::uint32_t index = 0;          ///< (G : H)
    std::vector<Element> coset_reps; ///< one per coset, identity first
    std::vector<std::uint32_t> coset_of; ///< element -> position in coset_reps
};

/// Kernel of x -> (last coordinate of x) mod p. Requires p prime dividing |G|.
/// coset_reps are the p smallest-index elements in distinct cosets, so the
/// coset of rep j corresponds to residue j in Z/p.
Subgroup subgroup_of_index_p(const GroupPtr & g, std::uint32_t p);

/// Index i with a in coset_reps[i] + H.
inline std::uint32_t quotient_project(const Subgroup & h, Element a) { return h.coset_of.at(a); }

/// Checks closure under addition and negation and |H| * index = |G|.
bool is_subgroup(const GroupSubset & h);

} // namespace critnum
