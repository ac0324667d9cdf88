#include "critnum/critical_number.hpp"
#include "critnum/sumset.hpp"
#include "critnum/theorem_lab.hpp"

#include <doctest.h>

#include <omp.h>

#include <map>
#include <set>

using namespace critnum;
using namespace critnum::lab;

namespace {

using Set = std::set<std::uint32_t>;

// Independent oracles on std::set over Z/p.
Set add(const Set & a, const Set & b, std::uint32_t p)
{
    Set out;
    for (auto x : a)
        for (auto y : b)
            out.insert((x + y) % p);
    return out;
}

Set from_mask(std::uint64_t m)
{
    Set out;
    for (std::uint32_t i = 0; i < 64; ++i)
        if (m >> i & 1)
            out.insert(i);
    return out;
}

std::vector<Set> all_nonempty(std::uint32_t p)
{
    std::vector<Set> out;
    for (std::uint64_t m = 1; m < (1ull << p); ++m)
        out.push_back(from_mask(m));
    return out;
}

// Nonzero d for which A = {a, a+d, ..., a+(|A|-1)d}, by construction.
Set brute_diffs(const Set & a, std::uint32_t p)
{
    Set out;
    for (std::uint32_t d = 1; d < p; ++d)
        for (std::uint32_t start = 0; start < p; ++start) {
            Set ap;
            for (std::uint32_t v = 0; v < a.size(); ++v)
                ap.insert((start + v * d) % p);
            if (ap == a) {
                out.insert(d);
                break;
            }
        }
    return out;
}

bool disjoint(const Set & a, const Set & b)
{
    for (auto x : a)
        if (b.count(x))
            return false;
    return true;
}

std::map<std::int64_t, std::uint64_t> cd_histogram_oracle(std::uint32_t p)
{
    std::map<std::int64_t, std::uint64_t> hist;
    const auto sets = all_nonempty(p);
    for (const auto & a : sets)
        for (const auto & b : sets) {
            const std::int64_t bound = std::min<std::int64_t>(p, static_cast<std::int64_t>(a.size() + b.size()) - 1);
            ++hist[static_cast<std::int64_t>(add(a, b, p).size()) - bound];
        }
    return hist;
}

Options exhaustive() { return Options{.mode = Mode::exhaustive}; }

Options sampled(std::uint64_t seed, std::uint64_t samples)
{
    return Options{.mode = Mode::sampled, .seed = seed, .samples = samples};
}

} // namespace

TEST_CASE("instance-level examples")
{
    CHECK(add({0, 1}, {0, 2}, 5).size() == 4);
    const Set z7{0, 1, 2, 3, 4, 5, 6};
    CHECK(add(z7, z7, 7).size() == 7);

    // Diderrich example: differences {1,6} and {3,4} are disjoint.
    CHECK(ap_difference_mask(0b110, 7) == ((1u << 1) | (1u << 6)));
    CHECK(ap_difference_mask(0b1001, 7) == ((1u << 3) | (1u << 4)));
    CHECK(add(add({1, 2}, {0, 3}, 7), {0, 1, 5}, 7).size() == 7);

    // S={1,2,3}, k=2 in Z/7: Sigma_2 = {3,4,5}.
    auto g = make_cyclic(7);
    auto table = restricted_sumsets(GroupSubset(g, {1, 2, 3}));
    CHECK(table.layer(2).size() == 3);
}

TEST_CASE("arithmetic progressions and their difference sets")
{
    for (std::uint32_t p : {2u, 3u, 5u, 7u, 11u}) {
        auto g = make_cyclic(p);
        std::set<std::uint64_t> expected;
        for (std::uint64_t m = 1; m < (1ull << p); ++m) {
            const auto diffs = brute_diffs(from_mask(m), p);
            std::uint64_t dm = 0;
            for (auto d : diffs)
                dm |= 1ull << d;
            CHECK(ap_difference_mask(m, p) == dm);
            if (!diffs.empty() || from_mask(m).size() == 1)
                expected.insert(m);

            // Cross-check against the generic detector.
            GroupSubset s(g);
            for (auto e : from_mask(m))
                s.insert(e);
            std::uint64_t generic = 0;
            for (auto d : ap_differences(s))
                generic |= 1ull << d;
            CHECK(generic == dm);
        }
        const auto aps = arithmetic_progressions(p);
        CHECK(std::set<std::uint64_t>(aps.begin(), aps.end()) == expected);
        CHECK(aps.size() == expected.size());
    }
    // Z/5: every nonempty subset is an AP.
    CHECK(arithmetic_progressions(5).size() == 31);
    // Z/7: 7 singletons, 21 pairs, 21 triples, 21 quadruples, 21 quintuples, 7 sextuples, Z/7.
    CHECK(arithmetic_progressions(7).size() == 99);
}

TEST_CASE("cauchy-davenport exhaustive matches the oracle histogram")
{
    for (std::uint32_t p : {2u, 3u, 5u, 7u}) {
        auto r = verify_cauchy_davenport(p, 2, exhaustive());
        const std::uint64_t n = (1ull << p) - 1;
        CHECK(r.instances == n * n);
        CHECK(r.ok());
        CHECK(r.slack_histogram == cd_histogram_oracle(p));
        REQUIRE(r.tight.has_value());
        CHECK(r.tight->actual == r.tight->bound);
        // Lowest ordinal: A={0}, B={0}.
        CHECK(r.tight->ordinal == 0);
    }
    auto r5 = verify_cauchy_davenport(5, 2, exhaustive());
    CHECK(r5.instances == 961);
    CHECK(r5.row() == "cauchy-davenport,5,2,exhaustive,961,0,0,-");
}

TEST_CASE("cauchy-davenport with three summands")
{
    auto r = verify_cauchy_davenport(3, 3, exhaustive());
    CHECK(r.instances == 343);
    CHECK(r.ok());
    std::uint64_t tight = 0;
    const auto sets = all_nonempty(3);
    for (const auto & a : sets)
        for (const auto & b : sets)
            for (const auto & c : sets) {
                const auto bound = std::min<std::int64_t>(3, static_cast<std::int64_t>(a.size() + b.size() + c.size()) - 2);
                if (static_cast<std::int64_t>(add(add(a, b, 3), c, 3).size()) == bound)
                    ++tight;
            }
    CHECK(r.slack_histogram.at(0) == tight);

    for (std::uint32_t p : {5u, 7u, 11u, 13u})
        for (std::uint32_t s : {3u, 4u}) {
            auto sr = verify_cauchy_davenport(p, s, sampled(11, 4000));
            CHECK(sr.instances == 4000);
            CHECK(sr.ok());
            CHECK(sr.tight.has_value());
        }
}

TEST_CASE("diderrich exhaustive agrees with an independent family enumeration")
{
    for (std::uint32_t p : {5u, 7u}) {
        const auto sets = all_nonempty(p);
        std::vector<std::pair<Set, Set>> aps;
        for (const auto & a : sets) {
            auto d = brute_diffs(a, p);
            if (!d.empty())
                aps.emplace_back(a, d);
        }
        for (std::uint32_t s : {2u, 3u}) {
            std::uint64_t instances = 0, violations = 0, tight = 0;
            auto visit = [&](const Set & folded, std::size_t sizes) {
                for (const auto & e : sets) {
                    ++instances;
                    const auto actual = static_cast<std::int64_t>(add(folded, e, p).size());
                    const auto bound = std::min<std::int64_t>(p, static_cast<std::int64_t>(sizes + e.size()) - 1);
                    violations += actual < bound;
                    tight += actual == bound;
                }
            };
            if (s == 2) {
                for (const auto & [a, d] : aps)
                    visit(a, a.size());
            } else {
                for (std::size_t i = 0; i < aps.size(); ++i)
                    for (std::size_t j = i + 1; j < aps.size(); ++j)
                        if (disjoint(aps[i].second, aps[j].second))
                            visit(add(aps[i].first, aps[j].first, p), aps[i].first.size() + aps[j].first.size());
            }
            auto r = verify_diderrich(p, s, exhaustive());
            CHECK(r.instances == instances);
            CHECK(r.violation_count == violations);
            CHECK(violations == 0);
            CHECK(r.slack_histogram.at(0) == tight);
        }
    }
}

TEST_CASE("diderrich sampled and preconditions")
{
    auto r = verify_diderrich(23, 4, sampled(7, 3000));
    CHECK(r.ok());
    CHECK(r.instances == 3000);
    CHECK(r.row().starts_with("diderrich,23,4,sampled,3000,0,"));
    CHECK(r.row().ends_with(",7"));

    CHECK_THROWS_AS(verify_diderrich(5, 4, exhaustive()), std::invalid_argument);
    CHECK_THROWS_AS(verify_diderrich(9, 2, exhaustive()), std::invalid_argument);
    CHECK_THROWS_AS(verify_cauchy_davenport(5, 1, exhaustive()), std::invalid_argument);
    CHECK_THROWS_AS(verify_cauchy_davenport(13, 3, exhaustive()), BudgetExceeded);
}

TEST_CASE("ddsh exhaustive")
{
    for (std::uint32_t p : {3u, 5u, 7u, 11u, 13u}) {
        auto reports = verify_ddsh(p, exhaustive());
        REQUIRE(reports.size() == 2);
        const auto & bound = reports[0];
        CHECK(bound.theorem == Theorem::ddsh_bound);
        CHECK(bound.instances == static_cast<std::uint64_t>(p) << (p - 1)); // sum of |S| over all S
        CHECK(bound.ok());
        CHECK(bound.tight.has_value());
    }

    // Oracle for the bound item at p=7: every S, every k, full histogram.
    {
        auto g = make_cyclic(7);
        std::map<std::int64_t, std::uint64_t> hist;
        for (std::uint64_t m = 1; m < 128; ++m) {
            std::vector<Element> elems;
            for (auto e : from_mask(m))
                elems.push_back(e);
            const auto size = static_cast<std::int64_t>(elems.size());
            for (std::int64_t k = 1; k <= size; ++k) {
                Set sums;
                for (std::uint64_t sub = 0; sub < (1ull << size); ++sub) {
                    if (std::popcount(sub) != k)
                        continue;
                    std::uint32_t t = 0;
                    for (std::int64_t i = 0; i < size; ++i)
                        if (sub >> i & 1)
                            t += elems[static_cast<std::size_t>(i)];
                    sums.insert(t % 7);
                }
                ++hist[static_cast<std::int64_t>(sums.size()) - std::min<std::int64_t>(7, k * (size - k) + 1)];
            }
        }
        CHECK(verify_ddsh(7, exhaustive())[0].slack_histogram == hist);
    }

    // The spanning item fails on these subsets (counts frozen from an
    // independent enumeration): Sigma_{floor(m/2)} misses part of Z/p.
    const std::map<std::uint32_t, std::pair<std::uint64_t, std::uint64_t>> frozen{
        {3, {3, 3}}, {5, {10, 10}}, {7, {35, 35}}, {11, {462, 77}}, {13, {1716, 858}}};
    for (const auto & [p, counts] : frozen) {
        const auto r = verify_ddsh(p, exhaustive())[1];
        CHECK(r.instances == counts.first);
        CHECK(r.violation_count == counts.second);
        REQUIRE_FALSE(r.violations.empty());
        CHECK(r.violations.front().actual < static_cast<std::int64_t>(p));
    }
}

TEST_CASE("sampled runs are reproducible and thread-count independent")
{
    const int saved = omp_get_max_threads();
    auto run = [] {
        std::vector<std::string> out;
        auto add_report = [&](const BoundReport & r) {
            std::string line = r.row();
            for (const auto & [slack, n] : r.slack_histogram)
                line += " " + std::to_string(slack) + ":" + std::to_string(n);
            for (const auto & v : r.violations)
                line += " | " + v.describe();
            if (r.tight)
                line += " tight " + std::to_string(r.tight->ordinal) + " " + r.tight->describe();
            out.push_back(line);
        };
        add_report(verify_cauchy_davenport(13, 4, sampled(5, 2000)));
        add_report(verify_diderrich(23, 4, sampled(7, 2000)));
        for (const auto & r : verify_ddsh(31, sampled(3, 500)))
            add_report(r);
        add_report(verify_diderrich(7, 3, exhaustive()));
        return out;
    };
    omp_set_num_threads(1);
    const auto one = run();
    omp_set_num_threads(4);
    const auto four = run();
    omp_set_num_threads(saved);
    CHECK(one == four);
    CHECK(one == run());
    CHECK(one != std::vector<std::string>{});
}
