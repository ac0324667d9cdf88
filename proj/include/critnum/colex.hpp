#pragma once

#include <cstdint>
#include <span>
#include <vector>

// Combinations of k positions out of [0, m), sorted ascending, in colexicographic order.
namespace critnum::colex {

std::uint64_t rank(std::span<const std::uint32_t> combination);

std::vector<std::uint32_t> unrank(std::uint64_t rank, std::uint32_t k);

/// Smallest j >= from such that position j can be incremented; increments it,
/// resets positions below j to 0..j-1 and returns j. Returns -1 when exhausted.
int advance_from(std::vector<std::uint32_t> & combination, std::uint32_t m, std::uint32_t from = 0);

} // namespace critnum::colex
