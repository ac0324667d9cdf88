#include "critnum/number_theory.hpp"
#include "critnum/proof_tracer.hpp"
#include "critnum/random.hpp"
#include "critnum/sumset.hpp"

#include <doctest.h>

#include <omp.h>

#include <set>
#include <sstream>

using namespace critnum;
using namespace critnum::tracer;

namespace {

std::set<Element> as_set(const GroupSubset & s)
{
    auto e = s.elements();
    return {e.begin(), e.end()};
}

// Independent check of a witness list: plain modular arithmetic on integers.
bool resums(const std::vector<Element> & w, Element x, std::uint32_t n, const std::set<Element> & s)
{
    if (w.empty())
        return false;
    std::uint64_t sum = 0;
    std::set<Element> seen;
    for (auto e : w) {
        if (!s.count(e) || !seen.insert(e).second)
            return false;
        sum += e;
    }
    return sum % n == x;
}

GroupSubset random_window_set(const GroupPtr & g, std::uint32_t p, std::uint32_t q, std::uint64_t seed, std::uint64_t i)
{
    auto rng = stream_rng(seed, i);
    const auto e = sample_distinct(rng, 1, g->order(), p + q - 2);
    return GroupSubset(g, std::vector<Element>(e.begin(), e.end()));
}

// Elements of C_pq with residue c mod p, given by their quotient by p.
std::vector<Element> in_coset(std::uint32_t p, std::uint32_t c, std::initializer_list<std::uint32_t> multiples)
{
    std::vector<Element> out;
    for (auto m : multiples)
        out.push_back(m * p + c);
    return out;
}

GroupSubset from_parts(const GroupPtr & g, std::initializer_list<std::vector<Element>> parts)
{
    GroupSubset s(g);
    for (const auto & part : parts)
        for (auto e : part)
            s.insert(e);
    return s;
}

} // namespace

TEST_CASE("coset_decompose on the C15 example")
{
    auto g = make_cyclic(15);
    const auto h = subgroup_of_index_p(g, 3);
    CHECK(as_set(h.members) == std::set<Element>{0, 3, 6, 9, 12});
    const auto dec = coset_decompose(GroupSubset(g, {3, 6, 1, 4, 7, 2, 11}), h);
    CHECK(as_set(dec.s0) == std::set<Element>{3, 6});
    REQUIRE(dec.s() == 2);
    CHECK(dec.blocks[0].rep == 1);
    CHECK(as_set(dec.blocks[0].members) == std::set<Element>{1, 4, 7});
    CHECK(dec.blocks[1].rep == 2);
    CHECK(as_set(dec.blocks[1].members) == std::set<Element>{2, 11});
    CHECK(dec.t == 1);
    CHECK(dec.r == 0);
    CHECK(dec.u == 1);

    const auto inside = coset_decompose(GroupSubset(g, {3, 9, 12}), h);
    CHECK(inside.s() == 0);
    CHECK(inside.t + inside.r + inside.u == 0);
    CHECK(inside.s0 == GroupSubset(g, {3, 9, 12}));

    CHECK_THROWS_AS(coset_decompose(GroupSubset(g, {0, 1}), h), std::invalid_argument);
}

TEST_CASE("decomposition invariants on random sets")
{
    for (auto [n, p] : {std::pair{91u, 7u}, std::pair{209u, 11u}}) {
        auto g = make_cyclic(n);
        const auto h = subgroup_of_index_p(g, p);
        for (std::uint64_t i = 0; i < 1000; ++i) {
            auto rng = stream_rng(21, i);
            const auto size = 1 + static_cast<std::uint32_t>(uniform_below(rng, n - 1));
            const auto e = sample_distinct(rng, 1, n, size);
            const GroupSubset set(g, std::vector<Element>(e.begin(), e.end()));
            const auto dec = coset_decompose(set, h);

            std::size_t large = 0;
            for (std::uint32_t b = 0; b < dec.t; ++b)
                large += dec.block_size(b);
            CHECK(dec.s0.size() + large + dec.r + 2 * dec.u == set.size());
            CHECK(dec.s() == dec.t + dec.r + dec.u);
            CHECK(dec.s() <= p - 1);

            GroupSubset rebuilt = dec.s0;
            std::set<std::uint32_t> cosets;
            std::size_t total = dec.s0.size();
            for (std::uint32_t b = 0; b < dec.s(); ++b) {
                const auto & blk = dec.blocks[b];
                CHECK(blk.coset != 0);
                CHECK(cosets.insert(blk.coset).second);
                CHECK(blk.rep == blk.members.first());
                for (auto m : blk.members.elements())
                    CHECK(m % p == blk.coset);
                rebuilt |= blk.members;
                total += blk.members.size();
                const auto sz = dec.block_size(b);
                if (b < dec.t)
                    CHECK(sz >= 3);
                else if (b < dec.t + dec.r)
                    CHECK(sz == 1);
                else
                    CHECK(sz == 2);
                if (b > 0 && b < dec.t) {
                    const auto prev = dec.block_size(b - 1);
                    CHECK((prev > sz || (prev == sz && dec.blocks[b - 1].rep < blk.rep)));
                }
                if (b > dec.t && b != dec.t + dec.r)
                    CHECK(dec.blocks[b - 1].rep < blk.rep);
            }
            CHECK(rebuilt == set);
            CHECK(total == set.size());
        }
    }
}

TEST_CASE("collapse_of")
{
    auto g = make_cyclic(15);
    const auto dec = coset_decompose(GroupSubset(g, {3, 6, 1, 4, 7, 2, 11}), subgroup_of_index_p(g, 3));
    const std::vector<std::uint32_t> a{3, 1}, b{1, 1}, c{0, 2}, d{2, 1};
    CHECK(collapse_of(dec, a) == 2);
    CHECK(collapse_of(dec, b) == 0);
    CHECK(collapse_of(dec, c) == 3);
    CHECK(collapse_of(dec, d) == 0);
    const std::vector<std::uint32_t> too_big{4, 1}, short_vec{1};
    CHECK_THROWS_AS(collapse_of(dec, too_big), std::out_of_range);
    CHECK_THROWS_AS(collapse_of(dec, short_vec), std::out_of_range);
}

TEST_CASE("construction sets and the quotient cover")
{
    auto g = make_cyclic(15);
    const auto dec = coset_decompose(GroupSubset(g, {3, 6, 1, 4, 7, 2, 11}), subgroup_of_index_p(g, 3));
    const auto cs = build_construction_sets(dec, Variant::lemma_4_3);
    REQUIRE(cs.a_sets.size() == 1);
    CHECK(as_set(cs.a_sets[0]) == std::set<Element>{1, 2});
    CHECK(cs.b0 == 2);
    CHECK(as_set(cs.d) == std::set<Element>{0, 2});
    CHECK(hypothesis_feed_ok(dec, cs));

    const auto cover = quotient_cover_check(cs, 3);
    CHECK(cover.covers);
    CHECK(cover.missed.empty());
    for (Element c = 0; c < 3; ++c) {
        REQUIRE(cover.choices[c].has_value());
        CHECK(cs.d.contains(cover.choices[c]->d));
        REQUIRE(cover.choices[c]->a.size() == 1);
        CHECK(cs.a_sets[0].contains(cover.choices[c]->a[0]));
        CHECK((cover.choices[c]->d + cover.choices[c]->a[0]) % 3 == c);
    }

    // Dropping A_1 leaves D = {0,2}: class 1 is missed.
    auto broken = cs;
    broken.a_sets.clear();
    broken.a_coeff.clear();
    const auto miss = quotient_cover_check(broken, 3);
    CHECK_FALSE(miss.covers);
    CHECK(miss.missed == std::vector<Element>{1});

    // No pair blocks: D is the identity class.
    const auto no_pairs = coset_decompose(GroupSubset(g, {1, 4, 7}), subgroup_of_index_p(g, 3));
    const auto cs0 = build_construction_sets(no_pairs, Variant::lemma_4_3);
    CHECK(as_set(cs0.d) == std::set<Element>{0});

    // Lemma 4.7 with |S_1| = 4 leaves the single class 2 a_1.
    const auto four = coset_decompose(GroupSubset(g, {1, 4, 7, 10}), subgroup_of_index_p(g, 3));
    const auto cs7 = build_construction_sets(four, Variant::lemma_4_7);
    CHECK(as_set(cs7.a_sets[0]) == std::set<Element>{2});
    CHECK_THROWS_AS(build_construction_sets(dec, Variant::lemma_4_7), std::invalid_argument);
}

TEST_CASE("fiber_cover mechanics in C15")
{
    auto g = make_cyclic(15);
    const auto dec = coset_decompose(GroupSubset(g, {3, 6, 1, 4, 7, 2, 11}), subgroup_of_index_p(g, 3));
    CHECK(as_set(sigma(dec.s0)) == std::set<Element>{3, 6, 9});

    // f = (1,2): {0,3,6,9} + {1,4,7} + {13} lies in 1 + 2*2 = 2 (mod 3).
    const auto fiber = fiber_cover(dec, Representation{.x = 2, .f = {1, 2}});
    std::set<Element> expected;
    for (Element a : {0, 3, 6, 9})
        for (Element b : {1, 4, 7})
            expected.insert((a + b + 13) % 15);
    CHECK(as_set(fiber) == expected);
    for (auto e : fiber.elements())
        CHECK(e % 3 == 2);

    // f = (1,1) lands in the identity coset.
    for (auto e : fiber_cover(dec, Representation{.x = 0, .f = {1, 1}}).elements())
        CHECK(e % 3 == 0);

    // Fully collapsed with S_0 empty: the single element sum(S).
    const auto bare = coset_decompose(GroupSubset(g, {1, 4, 7, 2, 11}), subgroup_of_index_p(g, 3));
    CHECK(as_set(fiber_cover(bare, Representation{.x = 10, .f = {3, 2}})) == std::set<Element>{(1 + 4 + 7 + 2 + 11) % 15});
}

TEST_CASE("find_representation in C91")
{
    auto g = make_cyclic(91);
    const auto h = subgroup_of_index_p(g, 7);
    for (std::uint64_t i = 0; i < 50; ++i) {
        const auto dec = coset_decompose(random_window_set(g, 7, 13, 5, i), h);
        const auto cs = build_construction_sets(dec, Variant::lemma_4_3);
        CHECK(hypothesis_feed_ok(dec, cs));
        for (Element x = 0; x < 91; ++x) {
            const auto rep = find_representation(dec, x, 1);
            std::uint64_t cls = 0, total = 0;
            for (std::size_t b = 0; b < dec.s(); ++b) {
                cls += static_cast<std::uint64_t>(rep.f[b]) * dec.blocks[b].rep;
                total += rep.f[b];
            }
            CHECK(cls % 7 == x % 7);
            CHECK(total > 0);
            CHECK(rep.collapse <= 1);
            CHECK(rep.collapse == collapse_of(dec, rep.f));
            if (dec.t >= floor_two_sqrt(5)) {
                CHECK(rep.route == Route::lemma_4_2);
                CHECK(rep.collapse == 0);
            }
        }
    }
}

TEST_CASE("quotient covers hold where the strict AP hypothesis does not")
{
    // Blocks in cosets c and -c give APs with the same difference set, so the
    // disjoint-differences form of the AP sumset bound does not apply; the
    // covers used by the case analysis are complete anyway.
    auto g = make_cyclic(91);
    const auto h = subgroup_of_index_p(g, 7);
    int strict_failures = 0;
    for (std::uint64_t i = 0; i < 500; ++i) {
        const auto dec = coset_decompose(random_window_set(g, 7, 13, 9, i), h);
        if (dec.s0.size() >= floor_two_sqrt(11))
            continue;
        const auto cs = build_construction_sets(dec, Variant::lemma_4_3);
        CHECK(hypothesis_feed_ok(dec, cs));
        strict_failures += !hypothesis_feed_disjoint(dec, cs);
        CHECK(quotient_cover_check(cs, 7).covers);
        if (dec.s0.size() <= 2 && dec.block_size(0) >= 4)
            CHECK(quotient_cover_check(build_construction_sets(dec, Variant::lemma_4_7), 7).covers);
    }
    CHECK(strict_failures > 0);
}

TEST_CASE("lemma 4.2 route on a structured set")
{
    // |S_0| = 2, blocks 3,3,3,3,2,2: s = p-1, t = 4 = floor(2 sqrt 5).
    auto g = make_cyclic(91);
    const auto set = from_parts(g, {in_coset(7, 0, {1, 2}), in_coset(7, 1, {0, 1, 2}), in_coset(7, 2, {0, 1, 2}),
                                    in_coset(7, 3, {0, 1, 2}), in_coset(7, 4, {0, 1, 2}), in_coset(7, 5, {0, 1}),
                                    in_coset(7, 6, {0, 1})});
    REQUIRE(set.size() == 18);
    const auto dec = coset_decompose(set, subgroup_of_index_p(g, 7));
    CHECK(dec.t == 4);
    CHECK(dec.u == 2);
    for (Element x = 0; x < 91; ++x) {
        const auto rep = find_representation(dec, x, 0);
        CHECK(rep.route == Route::lemma_4_2);
        CHECK(rep.collapse == 0);
        for (auto f : rep.f)
            CHECK((f == 1 || f == 2));
        for (std::size_t b = dec.t; b < dec.s(); ++b)
            CHECK(rep.f[b] == 1);
    }
    const auto cert = certify_span(set);
    CHECK(cert.case_label == CertCase::prop_4_6);
    CHECK(cert.max_collapse_seen == 0);
    CHECK(validate_certificate(cert).ok);
}

TEST_CASE("certify_span on C91 samples")
{
    auto g = make_cyclic(91);
    std::set<CertCase> seen;
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto set = random_window_set(g, 7, 13, 1, i);
        CHECK(sigma(set).is_full());
        const auto cert = certify_span(set);
        seen.insert(cert.case_label);
        const auto s = as_set(set);
        REQUIRE(cert.witnesses.size() == 91);
        for (Element x = 0; x < 91; ++x)
            CHECK(resums(cert.witnesses[x], x, 91, s));
        CHECK(validate_certificate(cert).ok);
        CHECK(cert.lemma_4_4_implication_failures == 0);
        for (const auto & t : cert.traces)
            if (t) {
                CHECK(t->fiber_size >= 13);
                CHECK(t->rep.collapse <= 1);
            }
        const auto direct = certify_direct(set);
        CHECK(validate_certificate(direct).ok);
    }
    CHECK(seen.count(CertCase::prop_4_5));
    CHECK(seen.count(CertCase::prop_4_8));
}

TEST_CASE("certify_span case dispatch and preconditions")
{
    auto g = make_cyclic(91);
    // H \ {0} entirely plus 6 elements outside H.
    std::vector<Element> h_all;
    for (Element m = 1; m < 13; ++m)
        h_all.push_back(7 * m);
    const auto set41 = from_parts(g, {h_all, {1, 2, 3, 4, 5, 6}});
    const auto cert = certify_span(set41);
    CHECK(cert.case_label == CertCase::prop_4_1);
    CHECK(validate_certificate(cert).ok);

    auto set = random_window_set(g, 7, 13, 1, 0);
    auto smaller = set;
    smaller.erase(smaller.elements().back());
    CHECK_THROWS_AS(certify_span(smaller), std::invalid_argument);

    auto larger = set;
    for (Element e = 1; larger.size() == set.size(); ++e)
        larger.insert(e);
    CHECK_THROWS_AS(certify_span(larger), std::invalid_argument);
    const auto truncated = certify_span(larger, CertifyOptions{.truncate = true});
    CHECK(truncated.set.size() == 18);
    CHECK(validate_certificate(truncated).ok);

    CHECK_THROWS_AS(certify_span(GroupSubset(make_cyclic(15), {1, 2, 3, 4, 5, 6})), std::invalid_argument);
    CHECK_THROWS_AS(certify_span(GroupSubset(make_cyclic(77), {1})), std::invalid_argument);
    CHECK(window_primes(*make_cyclic(91)).has_value());
    CHECK(window_primes(*make_cyclic(209)).has_value());
    CHECK_FALSE(window_primes(*make_cyclic(77)).has_value());
    CHECK(window_primes(*make_group(parse_group_spec("C7xC13"))).has_value()); // isomorphic to C91
    CHECK_FALSE(window_primes(*make_group(parse_group_spec("C3xC3"))).has_value());

    CHECK_THROWS_AS(certify_direct(GroupSubset(make_cyclic(12), {3, 6})), TheoremContradiction);
}

TEST_CASE("every case is reachable in C209")
{
    auto g = make_cyclic(209);
    std::set<CertCase> seen;
    for (std::uint64_t i = 0; i < 60; ++i) {
        const auto set = random_window_set(g, 11, 19, 3, i);
        const auto cert = certify_span(set);
        seen.insert(cert.case_label);
        CHECK(validate_certificate(cert).ok);
    }
    // |S_0| = 2 and blocks 3,3,3,3,3,3,2,2,2,2: every block has at most 3 elements.
    std::vector<Element> parts{11, 22};
    for (Element c = 1; c < 11; ++c)
        for (Element m = 0; m < (c <= 6 ? 3u : 2u); ++m)
            parts.push_back(11 * m + c);
    const GroupSubset set46(g, parts);
    REQUIRE(set46.size() == 28);
    const auto cert = certify_span(set46);
    CHECK(cert.case_label == CertCase::prop_4_6);
    CHECK(validate_certificate(cert).ok);
}

TEST_CASE("validation catches tampering")
{
    auto g = make_cyclic(91);
    auto cert = certify_span(random_window_set(g, 7, 13, 1, 3));
    REQUIRE(validate_certificate(cert).ok);

    auto bad = cert;
    bad.witnesses[17] = bad.witnesses[18];
    auto v = validate_certificate(bad);
    CHECK_FALSE(v.ok);
    REQUIRE_FALSE(v.failures.empty());
    CHECK(v.failures.front().starts_with("x=17:"));

    auto wrong_f = cert;
    for (auto & t : wrong_f.traces)
        if (t) {
            t->rep.f[0] = t->rep.f[0] == 2 ? 3 : 2;
            break;
        }
    CHECK_FALSE(validate_certificate(wrong_f).ok);

    auto missing = cert;
    missing.witnesses.pop_back();
    CHECK_FALSE(validate_certificate(missing).ok);

    auto relabeled = cert;
    relabeled.case_label = cert.case_label == CertCase::prop_4_5 ? CertCase::prop_4_8 : CertCase::prop_4_5;
    CHECK_FALSE(validate_certificate(relabeled).ok);
}

TEST_CASE("certificate files round-trip")
{
    auto g = make_cyclic(91);
    std::vector<SpanCertificate> certs;
    for (std::uint64_t i = 0; i < 5; ++i)
        certs.push_back(certify_span(random_window_set(g, 7, 13, 2, i)));
    certs.push_back(certify_direct(certs.front().set));

    std::ostringstream out;
    write_certificates(out, certs);
    const auto text = out.str();
    CHECK(text.starts_with("group: C91\np: 7\nq: 13\ncertificates: 6\ncase_counts: "));

    std::istringstream in(text);
    const auto file = read_certificates(in);
    REQUIRE(file.certificates.size() == 6);
    for (const auto & c : file.certificates)
        CHECK(validate_certificate(c).ok);
    std::ostringstream again;
    write_certificates(again, file.certificates);
    CHECK(again.str() == text);

    auto expect_error = [](std::string s) {
        std::istringstream is(s);
        CHECK_THROWS_AS(read_certificates(is), std::runtime_error);
    };
    expect_error(text.substr(0, text.size() / 2));
    expect_error("group: C91\np: 7\n");
    std::string miscount = text;
    miscount.replace(miscount.find("certificates: 6"), 15, "certificates: 5");
    expect_error(miscount);
    std::string badlist = text;
    badlist.replace(badlist.find("\n0: ["), 5, "\n0: (");
    expect_error(badlist);
}

TEST_CASE("certificates do not depend on the thread count")
{
    auto g = make_cyclic(209);
    auto run = [&] {
        std::vector<SpanCertificate> certs;
        for (std::uint64_t i = 0; i < 5; ++i)
            certs.push_back(certify_span(random_window_set(g, 11, 19, 4, i)));
        std::ostringstream os;
        write_certificates(os, certs);
        return os.str();
    };
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto one = run();
    omp_set_num_threads(4);
    const auto four = run();
    omp_set_num_threads(saved);
    CHECK(one == four);
}
