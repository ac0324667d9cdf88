#pragma once

#include "critnum/group.hpp"
#include "critnum/subset.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace critnum {

/// Which clause of the closed-form casework produced a value.
enum class CrCase
{
    trivial_order,      ///< |G| <= 2, cr(G) = |G|
    prime_order,        ///< |G| = p, floor(2 sqrt(p-2))
    exception_list,     ///< C3+C3, C2+C2, C4, C6, C2+C4, C8
    odd_prime_window,   ///< |G|/p = q odd prime, 2 < p < q <= p + floor(2 sqrt(p-2)) + 1
    theorem_window,     ///< |G| = pq, p + floor(2 sqrt(p-2)) + 1 < q < 2p (inside the general clause)
    general,            ///< |G|/p + p - 2
};

std::string_view to_string(CrCase c);

struct CrResult
{
    GroupSpec group;
    std::uint32_t value = 0;
    CrCase case_label = CrCase::general;
    std::uint32_t p = 0; ///< smallest prime divisor of |G| (0 for the trivial group)
};

CrResult cr_formula(const GroupSpec & g);

class BudgetExceeded : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Enumeration limit: a single size-l scan may visit at most this many subsets.
struct Budget
{
    std::uint64_t max_subsets = 1'000'000'000ull;
};

/// Outcome of checking every size-l subset of G \ {0} for spanning.
struct SpanScan
{
    std::uint32_t size = 0;
    std::uint64_t total = 0;       ///< C(|G|-1, l)
    bool all_span = true;
    /// First non-spanning subset in colex order over the nonzero elements.
    std::optional<std::vector<Element>> counterexample;
    std::optional<std::uint64_t> counterexample_rank;
};

/// Parallel scan (OpenMP over colex rank ranges) with incremental closures and
/// suffix pruning. Throws BudgetExceeded if C(|G|-1, l) > budget.
SpanScan spanning_all_of_size(const GroupPtr & g, std::uint32_t l, const Budget & budget = {});

/// Serial reference: plain colex enumeration, a fresh closure per subset.
SpanScan spanning_all_of_size_reference(const GroupPtr & g, std::uint32_t l);

struct OracleOutcome
{
    GroupSpec group;
    bool complete = false;                  ///< false when the budget stopped the search
    std::uint32_t value = 0;                ///< valid when complete
    std::uint32_t lower_bound = 1;          ///< cr(G) >= lower_bound is established
    std::optional<std::uint32_t> upper_bound;
    std::optional<GroupSubset> failing_witness; ///< size lower_bound - 1, does not span
    bool guided = true;                     ///< formula-guided path sufficed
    std::vector<SpanScan> scans;
};

/// Exhaustive critical number. First looks for a failing set of size
/// formula-1, then confirms size formula spans; falls back to an unguided
/// search from l = 1 if either step contradicts the formula.
OracleOutcome cr_bruteforce(const GroupPtr & g, const Budget & budget = {});

/// (H \ {0}) plus the p-2 smallest members of the coset of the smallest
/// element outside H, with H of index p. Requires p = smallest prime divisor and |G| > p.
GroupSubset extremal_witness(const GroupPtr & g, std::uint32_t p);

struct CrTableRow
{
    CrResult formula;
    std::optional<OracleOutcome> oracle; ///< nullopt when the budget was exceeded
    std::optional<OracleOutcome> partial;
    bool agree() const { return oracle && oracle->complete && oracle->value == formula.value; }
};

std::vector<CrTableRow> cr_table(std::uint32_t min_order, std::uint32_t max_order, const Budget & budget = {});

/// CSV with header `order,group,formula,case_label,oracle,agree,witness_size`.
std::string cr_table_csv(const std::vector<CrTableRow> & rows);

} // namespace critnum
