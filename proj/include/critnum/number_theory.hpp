#pragma once

#include <cstdint>
#include <vector>

namespace critnum {

/// Exact floor(sqrt(n)) for 64-bit n.
std::uint64_t isqrt(std::uint64_t n);

/// floor(2 * sqrt(n)) computed exactly as isqrt(4n).
std::uint64_t floor_two_sqrt(std::uint64_t n);

bool is_prime(std::uint64_t n);

/// Smallest prime divisor of n (n >= 2).
std::uint64_t smallest_prime_factor(std::uint64_t n);

/// Prime factorization as (prime, exponent) pairs in increasing prime order.
std::vector<std::pair<std::uint64_t, unsigned>> factorize(std::uint64_t n);

/// Primes <= limit by sieve.
std::vector<std::uint32_t> primes_up_to(std::uint32_t limit);

/// Binomial coefficient, saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Integer partitions of n, each in non-increasing order, listed lexicographically descending.
std::vector<std::vector<unsigned>> integer_partitions(unsigned n);

/// True when p < q are primes with p + floor(2 sqrt(p-2)) + 1 < q < 2p.
bool in_prime_window(std::uint64_t p, std::uint64_t q);

} // namespace critnum
