#include "critnum/colex.hpp"
#include "critnum/critical_number.hpp"
#include "critnum/number_theory.hpp"
#include "critnum/sumset.hpp"

#include <algorithm>
#include <atomic>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace critnum {

namespace {

constexpr std::uint64_t none = std::numeric_limits<std::uint64_t>::max();

// Closure storage for groups that fit one machine word.
struct WordClosures
{
    const Group & g;
    std::uint64_t full;
    std::vector<std::uint64_t> level;

    WordClosures(const Group & group, std::uint32_t l) : g(group), full(group.full_word_mask()), level(l + 1, 0) {}

    void step(std::uint32_t i, Element e) { level[i] = kernel::sigma_step(g, level[i + 1], e); }
    bool is_full(std::uint32_t i) const { return level[i] == full; }
};

// Multi-word closures; level i occupies words [i*w, (i+1)*w).
struct MultiClosures
{
    const Group & g;
    std::size_t w;
    std::vector<std::uint64_t> level;
    std::vector<std::uint64_t> full;

    MultiClosures(const Group & group, std::uint32_t l) :
        g(group), w(group.words()), level((l + 1) * group.words(), 0), full(group.words(), 0)
    {
        for (Element a = 0; a < g.order(); ++a)
            full[a / 64] |= 1ull << (a % 64);
    }

    void step(std::uint32_t i, Element e)
    {
        std::span<std::uint64_t> dst(level.data() + i * w, w);
        std::span<const std::uint64_t> src(level.data() + (i + 1) * w, w);
        std::copy(src.begin(), src.end(), dst.begin());
        g.translate_or(dst, src, e);
        dst[e / 64] |= 1ull << (e % 64);
    }

    bool is_full(std::uint32_t i) const
    {
        return std::equal(full.begin(), full.end(), level.begin() + static_cast<std::ptrdiff_t>(i * w));
    }
};

// Scans colex ranks [begin, end) of l-subsets of the nonzero elements
// (position c <-> element c + 1). Returns the first failing rank or `none`.
// Stops early once every remaining rank is >= `bound`.
template <typename Closures>
std::uint64_t scan_range(const Group & g, std::uint32_t l, std::uint64_t begin, std::uint64_t end,
                         const std::atomic<std::uint64_t> & bound)
{
    const std::uint32_t m = g.order() - 1;
    Closures cl(g, l);
    auto c = colex::unrank(begin, l);
    std::uint64_t rank = begin;
    int recompute = static_cast<int>(l) - 1;

    while (rank < end) {
        if (rank >= bound.load(std::memory_order_relaxed))
            return none;
        bool jumped = false;
        for (int i = recompute; i >= 0; --i) {
            const auto ui = static_cast<std::uint32_t>(i);
            cl.step(ui, c[ui] + 1);
            if (i > 0 && cl.is_full(ui)) {
                // Every subset sharing positions i.. spans; skip the whole block.
                std::uint64_t base = 0;
                for (std::uint32_t j = ui; j < l; ++j)
                    base += binomial(c[j], j + 1);
                rank = base + binomial(c[ui], ui);
                recompute = colex::advance_from(c, m, ui);
                jumped = true;
                break;
            }
        }
        if (jumped) {
            if (recompute < 0)
                break;
            continue;
        }
        if (!cl.is_full(0))
            return rank;
        ++rank;
        recompute = colex::advance_from(c, m, 0);
        if (recompute < 0)
            break;
    }
    return none;
}

std::vector<Element> elements_of(const std::vector<std::uint32_t> & positions)
{
    std::vector<Element> out;
    out.reserve(positions.size());
    for (auto c : positions)
        out.push_back(c + 1);
    return out;
}

} // namespace

SpanScan spanning_all_of_size(const GroupPtr & gp, std::uint32_t l, const Budget & budget)
{
    const Group & g = *gp;
    if (g.order() < 2)
        throw std::invalid_argument("spanning scan needs |G| >= 2");
    const std::uint32_t m = g.order() - 1;
    SpanScan out;
    out.size = l;
    out.total = binomial(m, l);
    if (out.total > budget.max_subsets)
        throw BudgetExceeded("C(" + std::to_string(m) + "," + std::to_string(l) + ") = " + std::to_string(out.total)
                             + " subsets exceeds budget " + std::to_string(budget.max_subsets));
    if (out.total == 0 || l == 0) {
        // l = 0: the empty set never spans a nontrivial group.
        if (l == 0) {
            out.all_span = false;
            out.counterexample = std::vector<Element>{};
            out.counterexample_rank = 0;
        }
        return out;
    }

    std::atomic<std::uint64_t> best{none};
    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    const std::uint64_t chunks = std::min<std::uint64_t>(out.total, static_cast<std::uint64_t>(threads) * 64);
    const std::uint64_t chunk = (out.total + chunks - 1) / chunks;
    const bool small = g.order() <= 64;

#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(chunks); ++k) {
        const std::uint64_t begin = static_cast<std::uint64_t>(k) * chunk;
        if (begin >= out.total || begin >= best.load(std::memory_order_relaxed))
            continue;
        const std::uint64_t end = std::min(out.total, begin + chunk);
        const std::uint64_t hit = small ? scan_range<WordClosures>(g, l, begin, end, best)
                                        : scan_range<MultiClosures>(g, l, begin, end, best);
        if (hit != none) {
            auto cur = best.load();
            while (hit < cur && !best.compare_exchange_weak(cur, hit)) {
            }
        }
    }

    if (best.load() != none) {
        out.all_span = false;
        out.counterexample_rank = best.load();
        out.counterexample = elements_of(colex::unrank(best.load(), l));
    }
    return out;
}

SpanScan spanning_all_of_size_reference(const GroupPtr & gp, std::uint32_t l)
{
    const std::uint32_t m = gp->order() - 1;
    SpanScan out;
    out.size = l;
    out.total = binomial(m, l);
    if (l > m)
        return out;
    std::vector<std::uint32_t> c(l);
    for (std::uint32_t i = 0; i < l; ++i)
        c[i] = i;
    std::uint64_t rank = 0;
    while (true) {
        const auto elems = elements_of(c);
        if (!sigma(GroupSubset(gp, elems)).is_full()) {
            out.all_span = false;
            out.counterexample = elems;
            out.counterexample_rank = rank;
            return out;
        }
        ++rank;
        if (colex::advance_from(c, m, 0) < 0)
            return out;
    }
}

} // namespace critnum
