#include "critnum/theorem_lab.hpp"

#include "critnum/critical_number.hpp"
#include "critnum/number_theory.hpp"
#include "critnum/random.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <sstream>
#include <stdexcept>

namespace critnum::lab {

namespace {

constexpr std::size_t kViolationCap = 16;

class CyclicWords
{
public:
    explicit CyclicWords(std::uint32_t p) :
        p_(p),
        full_(p == 64 ? ~0ull : (1ull << p) - 1)
    {}

    std::uint32_t p() const { return p_; }
    std::uint64_t full() const { return full_; }

    std::uint64_t rot(std::uint64_t x, std::uint32_t g) const
    {
        if (g == 0)
            return x;
        return ((x << g) | (x >> (p_ - g))) & full_;
    }

    std::uint64_t sum(std::uint64_t a, std::uint64_t b) const
    {
        if (std::popcount(a) < std::popcount(b))
            std::swap(a, b);
        std::uint64_t r = 0;
        for (; b; b &= b - 1)
            r |= rot(a, static_cast<std::uint32_t>(std::countr_zero(b)));
        return r;
    }

    static std::vector<Element> elements(std::uint64_t x)
    {
        std::vector<Element> out;
        for (; x; x &= x - 1)
            out.push_back(static_cast<Element>(std::countr_zero(x)));
        return out;
    }

    std::uint64_t random_nonempty(Rng & rng) const
    {
        const auto size = 1 + static_cast<std::uint32_t>(uniform_below(rng, p_));
        return of_size(rng, size);
    }

    std::uint64_t of_size(Rng & rng, std::uint32_t size) const
    {
        std::uint64_t x = 0;
        for (auto e : sample_distinct(rng, 0, p_, size))
            x |= 1ull << e;
        return x;
    }

private:
    std::uint32_t p_;
    std::uint64_t full_;
};

// Per-thread accumulator. Everything merges additively except the capped
// violation list and the tight instance, which keep the lowest ordinals, so
// the merged report does not depend on how the work was split.
struct Tally
{
    std::int64_t slack_offset = 0;
    std::uint64_t instances = 0;
    std::uint64_t violation_count = 0;
    std::vector<Instance> violations;
    std::vector<std::uint64_t> histogram;
    std::optional<Instance> tight;

    explicit Tally(std::int64_t max_abs_slack = 0) :
        slack_offset(max_abs_slack),
        histogram(static_cast<std::size_t>(2 * max_abs_slack + 1), 0)
    {}

    template <class Make>
    void record(std::uint64_t ordinal, std::int64_t actual, std::int64_t bound, Make && make)
    {
        ++instances;
        ++histogram.at(static_cast<std::size_t>(actual - bound + slack_offset));
        if (actual < bound)
            add_violation(ordinal, actual, bound, make);
        if (actual == bound && (!tight || ordinal < tight->ordinal))
            tight = build(ordinal, actual, bound, make);
    }

    template <class Make>
    void add_violation(std::uint64_t ordinal, std::int64_t actual, std::int64_t bound, Make && make)
    {
        ++violation_count;
        if (violations.size() < kViolationCap || ordinal < violations.back().ordinal)
            insert_violation(build(ordinal, actual, bound, make));
    }

    void insert_violation(Instance inst)
    {
        auto pos = std::upper_bound(violations.begin(), violations.end(), inst.ordinal,
                                    [](std::uint64_t o, const Instance & v) { return o < v.ordinal; });
        violations.insert(pos, std::move(inst));
        if (violations.size() > kViolationCap)
            violations.pop_back();
    }

    void merge(Tally && o)
    {
        instances += o.instances;
        violation_count += o.violation_count;
        for (auto & v : o.violations)
            insert_violation(std::move(v));
        for (std::size_t i = 0; i < histogram.size(); ++i)
            histogram[i] += o.histogram[i];
        if (o.tight && (!tight || o.tight->ordinal < tight->ordinal))
            tight = std::move(o.tight);
    }

    template <class Make>
    static Instance build(std::uint64_t ordinal, std::int64_t actual, std::int64_t bound, Make && make)
    {
        Instance inst = make();
        inst.ordinal = ordinal;
        inst.actual = actual;
        inst.bound = bound;
        return inst;
    }
};

class Tallies
{
public:
    explicit Tallies(std::int64_t max_abs_slack)
    {
        const int n = omp_get_max_threads();
        for (int i = 0; i < n; ++i)
            per_thread_.emplace_back(max_abs_slack);
    }

    Tally & local() { return per_thread_.at(static_cast<std::size_t>(omp_get_thread_num())); }

    BoundReport finish(BoundReport report)
    {
        Tally total = std::move(per_thread_.front());
        for (std::size_t i = 1; i < per_thread_.size(); ++i)
            total.merge(std::move(per_thread_[i]));
        report.instances = total.instances;
        report.violation_count = total.violation_count;
        report.violations = std::move(total.violations);
        report.tight = std::move(total.tight);
        for (std::size_t i = 0; i < total.histogram.size(); ++i)
            if (total.histogram[i])
                report.slack_histogram[static_cast<std::int64_t>(i) - total.slack_offset] = total.histogram[i];
        return report;
    }

private:
    std::vector<Tally> per_thread_;
};

void require_small_prime(std::uint32_t p)
{
    if (!is_prime(p))
        throw std::invalid_argument("p must be prime, got " + std::to_string(p));
    if (p > 64)
        throw std::invalid_argument("theorem lab supports p <= 61");
}

void require_budget(long double instances, std::uint64_t budget)
{
    if (instances > static_cast<long double>(budget)) {
        std::ostringstream os;
        os << "exhaustive run needs " << static_cast<double>(instances) << " instances, budget is " << budget;
        throw BudgetExceeded(os.str());
    }
}

BoundReport blank(Theorem t, std::uint32_t p, std::uint32_t s, const Options & opt)
{
    BoundReport r;
    r.theorem = t;
    r.p = p;
    r.s = s;
    r.mode = opt.mode;
    r.seed = opt.mode == Mode::sampled ? opt.seed : 0;
    return r;
}

std::vector<std::vector<Element>> as_sets(std::span<const std::uint64_t> masks)
{
    std::vector<std::vector<Element>> out;
    for (auto m : masks)
        out.push_back(CyclicWords::elements(m));
    return out;
}

// ---------------------------------------------------------------------------
// Cauchy-Davenport

struct CdSweep
{
    const CyclicWords & z;
    std::uint32_t s;
    std::uint64_t nonempty;
    Tally & tally;
    std::vector<std::uint64_t> masks;

    // Fills positions depth..s-1 given the partial sum of positions < depth.
    void run(std::uint32_t depth, std::uint64_t acc, std::int64_t size_total, std::uint64_t ordinal)
    {
        if (depth == s) {
            const std::int64_t p = z.p();
            tally.record(ordinal, std::popcount(acc), std::min(p, size_total - s + 1),
                         [&] { return Instance{.sets = as_sets(masks)}; });
            return;
        }
        for (std::uint64_t m = 1; m <= z.full(); ++m) {
            masks[depth] = m;
            run(depth + 1, z.sum(acc, m), size_total + std::popcount(m), ordinal * nonempty + (m - 1));
        }
    }
};

} // namespace

std::string_view to_string(Theorem t)
{
    switch (t) {
    case Theorem::cauchy_davenport: return "cauchy-davenport";
    case Theorem::diderrich: return "diderrich";
    case Theorem::ddsh_bound: return "ddsh-1";
    case Theorem::ddsh_spanning: return "ddsh-2";
    }
    return "?";
}

std::string_view to_string(Mode m) { return m == Mode::exhaustive ? "exhaustive" : "sampled"; }

std::string Instance::describe() const
{
    std::ostringstream os;
    const char * names = sets.size() == 1 ? "S" : "A";
    for (std::size_t i = 0; i < sets.size(); ++i) {
        os << names;
        if (sets.size() > 1)
            os << i + 1;
        os << "={";
        for (std::size_t j = 0; j < sets[i].size(); ++j)
            os << (j ? "," : "") << sets[i][j];
        os << "} ";
    }
    if (k)
        os << "k=" << k << ' ';
    os << "actual=" << actual << " bound=" << bound;
    return os.str();
}

std::optional<std::int64_t> BoundReport::min_slack() const
{
    if (slack_histogram.empty())
        return std::nullopt;
    return slack_histogram.begin()->first;
}

std::string BoundReport::row() const
{
    std::ostringstream os;
    os << to_string(theorem) << ',' << p << ',';
    if (s)
        os << s;
    else
        os << '-';
    os << ',' << to_string(mode) << ',' << instances << ',' << violation_count << ',';
    if (auto m = min_slack())
        os << *m;
    else
        os << '-';
    os << ',';
    if (mode == Mode::sampled)
        os << seed;
    else
        os << '-';
    return os.str();
}

std::uint64_t ap_difference_mask(std::uint64_t set, std::uint32_t p)
{
    require_small_prime(p);
    const CyclicWords z(p);
    const int size = std::popcount(set);
    std::uint64_t out = 0;
    if (size == 0)
        return 0;
    for (std::uint32_t d = 1; d < p; ++d) {
        // A is an AP with difference d iff |A \ (A + d)| == 1 (a single start),
        // or A is fixed by +d (then A is empty or Z/p since p is prime).
        const std::uint64_t shifted = z.rot(set, d);
        const int starts = std::popcount(set & ~shifted);
        if (starts == 1 || (starts == 0 && size == static_cast<int>(p)))
            out |= 1ull << d;
    }
    return out;
}

std::vector<std::uint64_t> arithmetic_progressions(std::uint32_t p)
{
    require_small_prime(p);
    std::vector<std::uint64_t> out;
    for (std::uint32_t start = 0; start < p; ++start)
        for (std::uint32_t d = 1; d < p; ++d) {
            std::uint64_t set = 0;
            for (std::uint32_t len = 1; len <= p; ++len) {
                set |= 1ull << ((start + static_cast<std::uint64_t>(len - 1) * d) % p);
                out.push_back(set);
            }
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

BoundReport verify_cauchy_davenport(std::uint32_t p, std::uint32_t s, const Options & opt)
{
    require_small_prime(p);
    if (s < 2)
        throw std::invalid_argument("cauchy-davenport needs s >= 2");
    const CyclicWords z(p);
    const std::int64_t span = static_cast<std::int64_t>(s) * p + 1;
    Tallies tallies(span);

    if (opt.mode == Mode::exhaustive) {
        const std::uint64_t nonempty = z.full();
        long double total = 1;
        for (std::uint32_t i = 0; i < s; ++i)
            total *= static_cast<long double>(nonempty);
        require_budget(total, opt.budget);

        // Shard by the first set.
        #pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t first = 1; first <= static_cast<std::int64_t>(nonempty); ++first) {
            CdSweep sweep{z, s, nonempty, tallies.local(), std::vector<std::uint64_t>(s)};
            const auto m = static_cast<std::uint64_t>(first);
            sweep.masks[0] = m;
            sweep.run(1, m, std::popcount(m), m - 1);
        }
    } else {
        #pragma omp parallel for schedule(dynamic, 64)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(opt.samples); ++i) {
            auto rng = stream_rng(opt.seed, static_cast<std::uint64_t>(i));
            std::vector<std::uint64_t> masks(s);
            std::uint64_t acc = 0;
            std::int64_t size_total = 0;
            for (std::uint32_t j = 0; j < s; ++j) {
                masks[j] = z.random_nonempty(rng);
                acc = j ? z.sum(acc, masks[j]) : masks[j];
                size_total += std::popcount(masks[j]);
            }
            tallies.local().record(static_cast<std::uint64_t>(i), std::popcount(acc),
                                   std::min<std::int64_t>(p, size_total - s + 1),
                                   [&] { return Instance{.sets = as_sets(masks)}; });
        }
    }
    return tallies.finish(blank(Theorem::cauchy_davenport, p, s, opt));
}

namespace {

struct ApFamilies
{
    std::vector<std::uint64_t> aps;
    std::vector<std::uint64_t> diffs;
    std::vector<std::vector<std::uint32_t>> families; // indices into aps, ascending
};

ApFamilies admissible_families(std::uint32_t p, std::uint32_t count)
{
    ApFamilies out;
    out.aps = arithmetic_progressions(p);
    for (auto a : out.aps)
        out.diffs.push_back(ap_difference_mask(a, p));

    std::vector<std::uint32_t> chosen;
    auto extend = [&](auto && self, std::uint32_t from, std::uint64_t used) -> void {
        if (chosen.size() == count) {
            out.families.push_back(chosen);
            return;
        }
        for (std::uint32_t i = from; i < out.aps.size(); ++i) {
            if (out.diffs[i] & used)
                continue;
            chosen.push_back(i);
            self(self, i + 1, used | out.diffs[i]);
            chosen.pop_back();
        }
    };
    extend(extend, 0, 0);
    return out;
}

// A random AP, as (set, difference mask). Lengths 2..p-2 are the only ones
// with a two-element difference set, so they are the only ones that can sit
// next to another AP in an admissible family.
std::pair<std::uint64_t, std::uint64_t> random_ap(const CyclicWords & z, Rng & rng, bool alone)
{
    const std::uint32_t p = z.p();
    const std::uint32_t lo = alone ? 1 : 2;
    const std::uint32_t hi = alone ? p : p - 2;
    const auto len = lo + static_cast<std::uint32_t>(uniform_below(rng, hi - lo + 1));
    const auto start = static_cast<std::uint32_t>(uniform_below(rng, p));
    const auto d = 1 + static_cast<std::uint32_t>(uniform_below(rng, p - 1));
    std::uint64_t set = 0;
    for (std::uint32_t v = 0; v < len; ++v)
        set |= 1ull << ((start + static_cast<std::uint64_t>(v) * d) % p);
    return {set, ap_difference_mask(set, p)};
}

} // namespace

BoundReport verify_diderrich(std::uint32_t p, std::uint32_t s, const Options & opt)
{
    require_small_prime(p);
    if (s < 2)
        throw std::invalid_argument("diderrich needs s >= 2");
    // Every AP in a family of two or more owns a pair {d, -d} of differences.
    if (s > 2 && s - 1 > (p - 1) / 2)
        throw std::invalid_argument("no admissible AP family of size " + std::to_string(s - 1) + " in Z/" +
                                    std::to_string(p));
    const CyclicWords z(p);
    const std::int64_t span = static_cast<std::int64_t>(s) * p + 1;
    Tallies tallies(span);
    const std::int64_t pp = p;

    if (opt.mode == Mode::exhaustive) {
        const std::uint64_t nonempty = z.full();
        // Counting the families is cheap next to the sweep; check the budget after.
        const auto fam = admissible_families(p, s - 1);
        require_budget(static_cast<long double>(fam.families.size()) * nonempty, opt.budget);

        #pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t fi = 0; fi < static_cast<std::int64_t>(fam.families.size()); ++fi) {
            const auto & family = fam.families[static_cast<std::size_t>(fi)];
            std::uint64_t folded = 0;
            std::int64_t sizes = 0;
            for (std::size_t j = 0; j < family.size(); ++j) {
                const auto a = fam.aps[family[j]];
                folded = j ? z.sum(folded, a) : a;
                sizes += std::popcount(a);
            }
            Tally & tally = tallies.local();
            for (std::uint64_t e = 1; e <= nonempty; ++e) {
                const auto ordinal = static_cast<std::uint64_t>(fi) * nonempty + (e - 1);
                tally.record(ordinal, std::popcount(z.sum(folded, e)), std::min(pp, sizes + std::popcount(e) - 1), [&] {
                    std::vector<std::uint64_t> masks;
                    for (auto idx : family)
                        masks.push_back(fam.aps[idx]);
                    masks.push_back(e);
                    return Instance{.sets = as_sets(masks)};
                });
            }
        }
    } else {
        #pragma omp parallel for schedule(dynamic, 64)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(opt.samples); ++i) {
            auto rng = stream_rng(opt.seed, static_cast<std::uint64_t>(i));
            std::vector<std::uint64_t> masks;
            std::uint64_t used = 0;
            while (masks.size() < s - 1) {
                auto [set, diffs] = random_ap(z, rng, s == 2);
                if (diffs & used)
                    continue;
                used |= diffs;
                masks.push_back(set);
            }
            // The exceptional set goes to a random slot of the fold.
            const auto slot = static_cast<std::size_t>(uniform_below(rng, s));
            masks.insert(masks.begin() + static_cast<std::ptrdiff_t>(slot), z.random_nonempty(rng));
            std::uint64_t acc = 0;
            std::int64_t sizes = 0;
            for (std::size_t j = 0; j < masks.size(); ++j) {
                acc = j ? z.sum(acc, masks[j]) : masks[j];
                sizes += std::popcount(masks[j]);
            }
            tallies.local().record(static_cast<std::uint64_t>(i), std::popcount(acc), std::min(pp, sizes - 1),
                                   [&] { return Instance{.sets = as_sets(masks)}; });
        }
    }
    return tallies.finish(blank(Theorem::diderrich, p, s, opt));
}

namespace {

// layers[k] = Sigma_k(S) for k = 0..|S|.
void restricted_layers(const CyclicWords & z, std::uint64_t set, std::vector<std::uint64_t> & layers)
{
    const int m = std::popcount(set);
    layers.assign(static_cast<std::size_t>(m) + 1, 0);
    layers[0] = 1;
    int seen = 0;
    for (std::uint64_t rest = set; rest; rest &= rest - 1) {
        const auto e = static_cast<std::uint32_t>(std::countr_zero(rest));
        ++seen;
        for (int k = seen; k >= 1; --k)
            layers[static_cast<std::size_t>(k)] |= z.rot(layers[static_cast<std::size_t>(k - 1)], e);
    }
}

struct DdshCheck
{
    const CyclicWords & z;
    std::uint32_t spanning_size;
    Tally & bound_tally;
    Tally & span_tally;
    std::vector<std::uint64_t> layers;

    void check(std::uint64_t set, std::uint64_t ordinal, bool bound_item, bool spanning_item)
    {
        const std::int64_t p = z.p();
        const std::int64_t m = std::popcount(set);
        restricted_layers(z, set, layers);
        auto make_for = [&](std::int64_t k) {
            return [&, k] { return Instance{.sets = {CyclicWords::elements(set)}, .k = static_cast<std::uint32_t>(k)}; };
        };
        if (bound_item) {
            for (std::int64_t k = 1; k <= m; ++k) {
                const std::int64_t bound = std::min(p, k * (m - k) + 1);
                bound_tally.record(ordinal * (static_cast<std::uint64_t>(p) + 1) + static_cast<std::uint64_t>(k),
                                   std::popcount(layers[static_cast<std::size_t>(k)]), bound, make_for(k));
                // k in [2, |S|-1] forces k(|S|-k)+1 >= |S|; a failure here is an arithmetic bug.
                if (k >= 2 && k <= m - 1 && k * (m - k) + 1 < m)
                    bound_tally.add_violation(ordinal * (static_cast<std::uint64_t>(p) + 1) + static_cast<std::uint64_t>(k),
                                              k * (m - k) + 1, m, make_for(k));
            }
        }
        if (spanning_item && m == spanning_size) {
            const std::int64_t k = m / 2;
            span_tally.record(ordinal, std::popcount(layers[static_cast<std::size_t>(k)]), p, make_for(k));
        }
    }
};

} // namespace

std::vector<BoundReport> verify_ddsh(std::uint32_t p, const Options & opt)
{
    require_small_prime(p);
    const CyclicWords z(p);
    const auto spanning_size = static_cast<std::uint32_t>(isqrt(4ull * p - 7));
    const std::int64_t span = static_cast<std::int64_t>(p) * p + 1;
    Tallies bounds(span);
    Tallies spans(span);

    if (opt.mode == Mode::exhaustive) {
        require_budget(std::ldexp(1.0L, static_cast<int>(p)), opt.budget);
        const std::int64_t total = static_cast<std::int64_t>(z.full()) + 1;
        #pragma omp parallel
        {
            DdshCheck checker{z, spanning_size, bounds.local(), spans.local(), {}};
            #pragma omp for schedule(dynamic, 256)
            for (std::int64_t set = 1; set < total; ++set)
                checker.check(static_cast<std::uint64_t>(set), static_cast<std::uint64_t>(set), true, true);
        }
    } else {
        #pragma omp parallel
        {
            DdshCheck checker{z, spanning_size, bounds.local(), spans.local(), {}};
            #pragma omp for schedule(dynamic, 64)
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(opt.samples); ++i) {
                auto rng = stream_rng(opt.seed, static_cast<std::uint64_t>(i));
                checker.check(z.random_nonempty(rng), static_cast<std::uint64_t>(i), true, false);
                checker.check(z.of_size(rng, spanning_size), static_cast<std::uint64_t>(i), false, true);
            }
        }
    }
    return {bounds.finish(blank(Theorem::ddsh_bound, p, 0, opt)), spans.finish(blank(Theorem::ddsh_spanning, p, 0, opt))};
}

} // namespace critnum::lab
