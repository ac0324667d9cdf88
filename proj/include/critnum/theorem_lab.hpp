#pragma once

#include "critnum/group.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Exhaustive and seeded-random checks of the addition theorems over Z/p.
namespace critnum::lab {

enum class Theorem
{
    cauchy_davenport,
    diderrich,
    ddsh_bound,    ///< |Sigma_k(S)| >= min{p, k(|S|-k)+1}
    ddsh_spanning, ///< |S| = floor(sqrt(4p-7)), k = floor(|S|/2) => Sigma_k(S) = Z/p
};

enum class Mode
{
    exhaustive,
    sampled,
};

std::string_view to_string(Theorem t);
std::string_view to_string(Mode m);

/// One checked configuration: the sets involved, the restricted-sum order k
/// (ddsh only), the observed cardinality and the theorem's lower bound.
struct Instance
{
    std::uint64_t ordinal = 0;
    std::vector<std::vector<Element>> sets;
    std::uint32_t k = 0;
    std::int64_t actual = 0;
    std::int64_t bound = 0;

    std::string describe() const;
};

struct BoundReport
{
    Theorem theorem = Theorem::cauchy_davenport;
    std::uint32_t p = 0;
    std::uint32_t s = 0; ///< number of summands (0 where not applicable)
    Mode mode = Mode::exhaustive;
    std::uint64_t seed = 0;
    std::uint64_t instances = 0;
    std::uint64_t violation_count = 0;
    std::vector<Instance> violations; ///< lowest ordinals first, capped
    std::map<std::int64_t, std::uint64_t> slack_histogram; ///< actual - bound -> count
    std::optional<Instance> tight; ///< lowest-ordinal instance with actual == bound

    bool ok() const { return violation_count == 0; }
    std::optional<std::int64_t> min_slack() const;

    /// `theorem,p,s,mode,instances,violations,min_slack,seed`
    std::string row() const;
    static std::string_view header() { return "theorem,p,s,mode,instances,violations,min_slack,seed"; }
};

struct Options
{
    Mode mode = Mode::exhaustive;
    std::uint64_t seed = 1;
    std::uint64_t samples = 100000;
    std::uint64_t budget = 20'000'000'000ull; ///< max instances in exhaustive mode
};

/// |A_1 + ... + A_s| >= min{p, sum |A_i| - s + 1} over nonempty A_i.
BoundReport verify_cauchy_davenport(std::uint32_t p, std::uint32_t s, const Options & opt);

/// |A_1 + ... + A_s| >= min{p, sum |A_i| - 1} where A_1..A_{s-1} are arithmetic
/// progressions whose difference sets {d != 0 : A is an AP with difference d}
/// are pairwise disjoint, and A_s is an arbitrary nonempty set.
BoundReport verify_diderrich(std::uint32_t p, std::uint32_t s, const Options & opt);

/// Both items of the restricted-sumset theorem: {bound report, spanning report}.
std::vector<BoundReport> verify_ddsh(std::uint32_t p, const Options & opt);

/// Difference set of a subset of Z/p given as a bit mask (p <= 64).
std::uint64_t ap_difference_mask(std::uint64_t set, std::uint32_t p);

/// All distinct arithmetic-progression subsets of Z/p as bit masks, ascending (p <= 64).
std::vector<std::uint64_t> arithmetic_progressions(std::uint32_t p);

} // namespace critnum::lab
