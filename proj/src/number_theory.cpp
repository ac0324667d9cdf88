#include "critnum/number_theory.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace critnum {

std::uint64_t isqrt(std::uint64_t n)
{
    if (n < 2)
        return n;
    // Newton iteration from an over-estimate; converges monotonically downward.
    std::uint64_t x = std::min<std::uint64_t>(n, 1ull << 32);
    std::uint64_t y = (x + n / x) / 2;
    while (y < x) {
        x = y;
        y = (x + n / x) / 2;
    }
    return x;
}

std::uint64_t floor_two_sqrt(std::uint64_t n)
{
    if (n > std::numeric_limits<std::uint64_t>::max() / 4)
        throw std::overflow_error("floor_two_sqrt: argument too large");
    return isqrt(4 * n);
}

bool is_prime(std::uint64_t n)
{
    if (n < 2)
        return false;
    if (n % 2 == 0)
        return n == 2;
    for (std::uint64_t d = 3; d <= n / d; d += 2)
        if (n % d == 0)
            return false;
    return true;
}

std::uint64_t smallest_prime_factor(std::uint64_t n)
{
    if (n < 2)
        throw std::invalid_argument("smallest_prime_factor: n must be >= 2");
    if (n % 2 == 0)
        return 2;
    for (std::uint64_t d = 3; d <= n / d; d += 2)
        if (n % d == 0)
            return d;
    return n;
}

std::vector<std::pair<std::uint64_t, unsigned>> factorize(std::uint64_t n)
{
    std::vector<std::pair<std::uint64_t, unsigned>> out;
    for (std::uint64_t d = 2; d <= n / d; ++d) {
        unsigned e = 0;
        while (n % d == 0) {
            n /= d;
            ++e;
        }
        if (e)
            out.emplace_back(d, e);
    }
    if (n > 1)
        out.emplace_back(n, 1);
    return out;
}

std::vector<std::uint32_t> primes_up_to(std::uint32_t limit)
{
    std::vector<bool> composite(limit + 1, false);
    std::vector<std::uint32_t> primes;
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (composite[i])
            continue;
        primes.push_back(static_cast<std::uint32_t>(i));
        for (std::uint64_t j = i * i; j <= limit; j += i)
            composite[j] = true;
    }
    return primes;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n)
        return 0;
    if (k > n - k)
        k = n - k;
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > std::numeric_limits<std::uint64_t>::max())
            return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(r);
}

namespace {

void partitions_rec(unsigned rest, unsigned max_part, std::vector<unsigned>& cur,
                    std::vector<std::vector<unsigned>>& out)
{
    if (rest == 0) {
        out.push_back(cur);
        return;
    }
    for (unsigned part = std::min(rest, max_part); part >= 1; --part) {
        cur.push_back(part);
        partitions_rec(rest - part, part, cur, out);
        cur.pop_back();
    }
}

} // namespace

std::vector<std::vector<unsigned>> integer_partitions(unsigned n)
{
    std::vector<std::vector<unsigned>> out;
    std::vector<unsigned> cur;
    partitions_rec(n, n, cur, out);
    return out;
}

bool in_prime_window(std::uint64_t p, std::uint64_t q)
{
    if (!is_prime(p) || !is_prime(q) || p < 3)
        return false;
    return p + floor_two_sqrt(p - 2) + 1 < q && q < 2 * p;
}

} // namespace critnum
