#include "critnum/proof_tracer.hpp"

#include "critnum/number_theory.hpp"
#include "critnum/sumset.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace critnum::tracer {

namespace {

std::uint32_t mod_add(std::uint32_t a, std::uint32_t b, std::uint32_t p) { return (a + b) % p; }
std::uint32_t mod_sub(std::uint32_t a, std::uint32_t b, std::uint32_t p) { return (a + p - b % p) % p; }
std::uint32_t mod_mul(std::uint64_t k, std::uint32_t a, std::uint32_t p) { return static_cast<std::uint32_t>(k % p * a % p); }

std::uint32_t block_class_sum(const CosetDecomposition & dec, std::span<const std::uint32_t> f)
{
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i < dec.blocks.size(); ++i)
        sum = mod_add(sum, mod_mul(f[i], dec.blocks[i].coset, dec.p), dec.p);
    return sum;
}

// Sums of the last k A-sets, with reach[m] = {0}; used to prune the cover search.
std::vector<GroupSubset> suffix_reach(const ConstructionSets & cs)
{
    const std::size_t m = cs.a_sets.size();
    std::vector<GroupSubset> reach(m + 1, GroupSubset(cs.quotient));
    reach[m].insert(0);
    for (std::size_t i = m; i-- > 0;)
        reach[i] = sumset(cs.a_sets[i], reach[i + 1]);
    return reach;
}

struct CoverSearch
{
    const ConstructionSets & cs;
    const std::vector<GroupSubset> & reach;
    std::uint32_t p;
    std::vector<Element> picked;

    // Calls accept(picked) for each decomposition of rem from A_i..A_m until it returns true.
    template <class Accept>
    bool run(std::size_t i, Element rem, Accept && accept)
    {
        if (i == cs.a_sets.size())
            return rem == 0 && accept(picked);
        for (auto a : cs.a_sets[i].elements()) {
            const Element next = mod_sub(rem, a, p);
            if (!reach[i + 1].contains(next))
                continue;
            picked.push_back(a);
            if (run(i + 1, next, accept))
                return true;
            picked.pop_back();
        }
        return false;
    }
};

// D elements in preference order: b0 (no collapse) first, then b0 - b_j by j.
std::vector<Element> d_order(const ConstructionSets & cs)
{
    std::vector<Element> order = cs.d.elements();
    std::stable_sort(order.begin(), order.end(),
                     [&](Element a, Element b) { return cs.d_choice[a] < cs.d_choice[b]; });
    return order;
}

std::vector<std::uint32_t> translate(const CosetDecomposition & dec, const ConstructionSets & cs, Element d,
                                     std::span<const Element> a)
{
    std::vector<std::uint32_t> f(dec.s(), 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int k = cs.a_coeff[i][a[i]];
        if (k < 0)
            throw std::logic_error("cover choice outside its construction set");
        f[i] = static_cast<std::uint32_t>(k);
    }
    const int j = cs.d_choice.at(d);
    if (j < 0)
        throw std::logic_error("cover choice outside D");
    if (j > 0)
        f[dec.t + dec.r + static_cast<std::size_t>(j) - 1] = 0;
    return f;
}

Representation finish(const CosetDecomposition & dec, Element x, std::vector<std::uint32_t> f, Route route)
{
    Representation rep{.x = x, .f = std::move(f), .collapse = 0, .route = route};
    rep.collapse = collapse_of(dec, rep.f);
    if (block_class_sum(dec, rep.f) != quotient_project(dec.h, x))
        throw std::logic_error("coefficient translation broke the coset congruence at x=" + std::to_string(x));
    return rep;
}

Representation via_lemma_4_2(const CosetDecomposition & dec, Element x)
{
    const std::uint32_t p = dec.p;
    const auto zp = make_cyclic(p);
    std::vector<std::uint32_t> all_ones(dec.s(), 1);
    const Element target = mod_sub(quotient_project(dec.h, x), block_class_sum(dec, all_ones), p);

    std::vector<std::uint32_t> f = all_ones;
    if (target != 0) {
        GroupSubset classes(zp);
        std::vector<int> block_of(p, -1);
        for (std::uint32_t i = 0; i < dec.t; ++i) {
            classes.insert(dec.blocks[i].coset);
            block_of[dec.blocks[i].coset] = static_cast<int>(i);
        }
        const auto chosen = sigma_witness(classes, target);
        if (!chosen)
            throw TheoremContradiction("x=" + std::to_string(x) + ": the " + std::to_string(dec.t) +
                                       " large-block classes do not reach class " + std::to_string(target));
        for (auto c : *chosen)
            f[static_cast<std::size_t>(block_of[c])] = 2;
    }
    return finish(dec, x, std::move(f), Route::lemma_4_2);
}

Representation via_cover(const CosetDecomposition & dec, const ConstructionSets & cs,
                         const std::vector<GroupSubset> & reach, Element x, std::uint32_t max_collapse)
{
    const std::uint32_t p = dec.p;
    const Element target = quotient_project(dec.h, x);
    const Route route = cs.variant == Variant::lemma_4_7 ? Route::lemma_4_7 : Route::lemma_4_3;
    std::optional<Representation> found;
    CoverSearch search{cs, reach, p, {}};
    for (auto d : d_order(cs)) {
        const bool collapses_pair = cs.d_choice[d] > 0;
        if (collapses_pair && max_collapse < 1)
            continue;
        const Element rem = mod_sub(target, d, p);
        if (!reach[0].contains(rem))
            continue;
        search.picked.clear();
        search.run(0, rem, [&](const std::vector<Element> & picked) {
            auto f = translate(dec, cs, d, picked);
            if (std::accumulate(f.begin(), f.end(), std::uint64_t{0}) == 0)
                return false;
            auto rep = finish(dec, x, std::move(f), route);
            if (rep.collapse > max_collapse)
                return false;
            found = std::move(rep);
            return true;
        });
        if (found)
            return *found;
    }
    throw TheoremContradiction("x=" + std::to_string(x) + ": no " + std::string(to_string(route)) +
                               " representation with collapse <= " + std::to_string(max_collapse));
}

bool use_lemma_4_2(const CosetDecomposition & dec, Variant variant)
{
    return variant == Variant::lemma_4_3 && dec.t >= floor_two_sqrt(dec.p - 2);
}

class FiberTables
{
public:
    explicit FiberTables(const CosetDecomposition & dec) :
        dec_(dec),
        base_(sigma(dec.s0))
    {
        base_.insert(0);
        for (const auto & b : dec.blocks)
            tables_.emplace_back(b.members, true);
    }

    // stages[i] = base + layers of blocks 0..i-1.
    std::vector<GroupSubset> fold(const Representation & rep) const
    {
        if (rep.f.size() != dec_.s())
            throw std::out_of_range("coefficient vector has the wrong length");
        std::vector<GroupSubset> stages{base_};
        std::uint32_t expected = 0;
        for (std::size_t i = 0; i < rep.f.size(); ++i) {
            stages.push_back(sumset(stages.back(), tables_[i].layer(rep.f[i])));
            expected = mod_add(expected, mod_mul(rep.f[i], dec_.blocks[i].coset, dec_.p), dec_.p);
            for (auto e : stages.back().elements())
                if (quotient_project(dec_.h, e) != expected)
                    throw std::logic_error("partial fiber left its coset at block " + std::to_string(i + 1));
        }
        return stages;
    }

    std::vector<Element> extract(const Representation & rep, const std::vector<GroupSubset> & stages, Element x) const
    {
        const auto & g = *dec_.group;
        std::vector<Element> out;
        Element y = x;
        for (std::size_t i = rep.f.size(); i-- > 0;) {
            const auto & layer = tables_[i].layer(rep.f[i]);
            std::optional<Element> pick;
            for (auto l : layer.elements())
                if (stages[i].contains(g.sub(y, l))) {
                    pick = l;
                    break;
                }
            if (!pick)
                throw std::logic_error("fiber backtrack failed");
            if (rep.f[i] > 0) {
                auto part = tables_[i].witness(rep.f[i], *pick);
                out.insert(out.end(), part->begin(), part->end());
            }
            y = g.sub(y, *pick);
        }
        if (y != 0 || out.empty()) {
            auto part = sigma_witness(dec_.s0, y);
            if (!part)
                throw std::logic_error("fiber base does not contain the residue");
            out.insert(out.end(), part->begin(), part->end());
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    const CosetDecomposition & dec_;
    GroupSubset base_;
    std::vector<RestrictedSumsetTable> tables_;
};

struct CaseChoice
{
    CertCase label;
    std::uint32_t max_collapse = 0;
    Variant variant = Variant::lemma_4_3;
};

CaseChoice dispatch(const CosetDecomposition & dec, std::uint32_t q)
{
    const auto s0 = dec.s0.size();
    const auto cr_h = floor_two_sqrt(q - 2);
    if (s0 >= cr_h)
        return {CertCase::prop_4_1, 0, Variant::lemma_4_3};
    if (s0 >= 3)
        return {CertCase::prop_4_5, 1, Variant::lemma_4_3};
    const std::uint32_t s1 = dec.s() ? dec.block_size(0) : 0;
    if (s1 <= 3)
        return {CertCase::prop_4_6, dec.s() == dec.p - 1 ? 0u : 1u, Variant::lemma_4_3};
    return {CertCase::prop_4_8, 1, Variant::lemma_4_7};
}

bool lemma_4_4_inequality(const CosetDecomposition & dec, std::uint32_t q, std::uint32_t collapse)
{
    const std::int64_t s0 = static_cast<std::int64_t>(dec.s0.size());
    const std::int64_t lhs = static_cast<std::int64_t>(dec.p + q - 2) + std::max<std::int64_t>(1, s0 - 1) - collapse - dec.s();
    return lhs >= static_cast<std::int64_t>(q);
}

// First failure by target index, so the error does not depend on scheduling.
void raise_first(const std::vector<std::string> & errors)
{
    for (const auto & e : errors)
        if (!e.empty())
            throw TheoremContradiction(e);
}

std::vector<std::vector<Element>> prop_4_1_witnesses(const CosetDecomposition & dec)
{
    const auto & g = *dec.group;
    const std::uint32_t p = dec.p;
    const auto n = g.order();
    if (sigma(dec.s0) != dec.h.members)
        throw TheoremContradiction("Sigma(S_0) != H although |S_0| reaches cr(H)");

    // p-1 smallest elements outside H; subset sums of their classes cover Z/p.
    std::vector<Element> b;
    for (auto e : dec.set.elements())
        if (!dec.h.members.contains(e) && b.size() < p - 1)
            b.push_back(e);
    if (b.size() < p - 1)
        throw TheoremContradiction("fewer than p-1 elements outside H");
    // reach[j] = classes reachable from the first j elements, empty sum allowed.
    std::vector<std::vector<bool>> reach(b.size() + 1, std::vector<bool>(p, false));
    reach[0][0] = true;
    for (std::size_t j = 0; j < b.size(); ++j) {
        const auto c = quotient_project(dec.h, b[j]);
        for (std::uint32_t v = 0; v < p; ++v)
            if (reach[j][v])
                reach[j + 1][v] = reach[j + 1][mod_add(v, c, p)] = true;
    }

    std::vector<std::vector<Element>> out(n);
    std::vector<std::string> errors(n);
    #pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t xi = 0; xi < static_cast<std::int64_t>(n); ++xi) {
        const auto x = static_cast<Element>(xi);
        std::uint32_t cls = quotient_project(dec.h, x);
        if (!reach[b.size()][cls]) {
            errors[x] = "x=" + std::to_string(x) + ": class not covered by the p-1 two-element sets";
            continue;
        }
        std::vector<Element> chosen;
        Element y = x;
        for (std::size_t j = b.size(); j > 0; --j) {
            if (reach[j - 1][cls])
                continue;
            chosen.push_back(b[j - 1]);
            cls = mod_sub(cls, quotient_project(dec.h, b[j - 1]), p);
            y = g.sub(y, b[j - 1]);
        }
        auto rest = sigma_witness(dec.s0, y);
        if (!rest) {
            errors[x] = "x=" + std::to_string(x) + ": residue " + std::to_string(y) + " not in Sigma(S_0)";
            continue;
        }
        chosen.insert(chosen.end(), rest->begin(), rest->end());
        std::sort(chosen.begin(), chosen.end());
        out[x] = std::move(chosen);
    }
    raise_first(errors);
    return out;
}

std::string join(std::span<const Element> v)
{
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ',';
        out += std::to_string(v[i]);
    }
    return out + "]";
}

} // namespace

std::string_view to_string(Variant v) { return v == Variant::lemma_4_7 ? "lemma-4.7" : "lemma-4.3"; }

std::string_view to_string(Route r)
{
    switch (r) {
    case Route::lemma_4_2: return "lemma-4.2";
    case Route::lemma_4_3: return "lemma-4.3";
    case Route::lemma_4_7: return "lemma-4.7";
    }
    return "?";
}

std::string_view to_string(CertCase c)
{
    switch (c) {
    case CertCase::prop_4_1: return "prop-4.1";
    case CertCase::prop_4_5: return "prop-4.5";
    case CertCase::prop_4_6: return "prop-4.6";
    case CertCase::prop_4_8: return "prop-4.8";
    case CertCase::direct_dp: return "direct-dp";
    }
    return "?";
}

std::optional<CertCase> parse_cert_case(std::string_view s)
{
    for (auto c : {CertCase::prop_4_1, CertCase::prop_4_5, CertCase::prop_4_6, CertCase::prop_4_8, CertCase::direct_dp})
        if (to_string(c) == s)
            return c;
    return std::nullopt;
}

CosetDecomposition coset_decompose(const GroupSubset & set, const Subgroup & h)
{
    set.require_same_group(h.members);
    if (!is_prime(h.index))
        throw std::invalid_argument("subgroup index must be prime");
    if (set.contains(0))
        throw std::invalid_argument("S must not contain the identity");

    CosetDecomposition dec{
        .group = set.group_ptr(),
        .h = h,
        .p = h.index,
        .set = set,
        .s0 = set & h.members,
        .blocks = {},
    };
    std::vector<std::optional<Block>> by_coset(h.index);
    for (auto e : set.elements()) {
        const auto c = quotient_project(h, e);
        if (c == 0)
            continue;
        if (!by_coset[c])
            by_coset[c] = Block{.rep = e, .coset = c, .members = GroupSubset(set.group_ptr())};
        by_coset[c]->members.insert(e);
    }
    std::vector<Block> large, singles, pairs;
    for (auto & b : by_coset) {
        if (!b)
            continue;
        const auto n = b->members.size();
        (n >= 3 ? large : n == 1 ? singles : pairs).push_back(std::move(*b));
    }
    auto by_rep = [](const Block & a, const Block & b) { return a.rep < b.rep; };
    std::sort(large.begin(), large.end(), [](const Block & a, const Block & b) {
        if (a.members.size() != b.members.size())
            return a.members.size() > b.members.size();
        return a.rep < b.rep;
    });
    std::sort(singles.begin(), singles.end(), by_rep);
    std::sort(pairs.begin(), pairs.end(), by_rep);
    dec.t = static_cast<std::uint32_t>(large.size());
    dec.r = static_cast<std::uint32_t>(singles.size());
    dec.u = static_cast<std::uint32_t>(pairs.size());
    for (auto * part : {&large, &singles, &pairs})
        for (auto & b : *part)
            dec.blocks.push_back(std::move(b));
    return dec;
}

std::uint32_t collapse_of(const CosetDecomposition & dec, std::span<const std::uint32_t> f)
{
    if (f.size() != dec.s())
        throw std::out_of_range("expected " + std::to_string(dec.s()) + " coefficients, got " + std::to_string(f.size()));
    std::uint32_t c = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto size = dec.block_size(i);
        if (f[i] > size)
            throw std::out_of_range("coefficient f_" + std::to_string(i + 1) + "=" + std::to_string(f[i]) +
                                    " exceeds |S_" + std::to_string(i + 1) + "|=" + std::to_string(size));
        if (f[i] == 0 || f[i] == size)
            c += size - 1;
    }
    return c;
}

ConstructionSets build_construction_sets(const CosetDecomposition & dec, Variant variant)
{
    const std::uint32_t p = dec.p;
    const auto zp = make_cyclic(p);
    ConstructionSets cs{.variant = variant, .quotient = zp, .a_sets = {}, .d = GroupSubset(zp)};
    if (variant == Variant::lemma_4_7 && (dec.t == 0 || dec.block_size(0) < 4))
        throw std::invalid_argument("lemma-4.7 construction needs |S_1| >= 4");

    for (std::uint32_t i = 0; i < dec.t + dec.r; ++i) {
        const auto & b = dec.blocks[i];
        GroupSubset a(cs.quotient);
        std::vector<int> coeff(p, -1);
        std::uint32_t lo = 1, hi = b.members.size() - 1;
        if (i >= dec.t) {
            lo = 0;
            hi = 1;
        } else if (i == 0 && variant == Variant::lemma_4_7) {
            lo = 2;
            hi = b.members.size() - 2;
        }
        for (std::uint32_t k = lo; k <= hi; ++k) {
            const auto c = mod_mul(k, b.coset, p);
            a.insert(c);
            if (coeff[c] < 0)
                coeff[c] = static_cast<int>(k);
        }
        cs.a_sets.push_back(std::move(a));
        cs.a_coeff.push_back(std::move(coeff));
    }

    for (std::uint32_t j = 0; j < dec.u; ++j)
        cs.b0 = mod_add(cs.b0, dec.blocks[dec.t + dec.r + j].coset, p);
    cs.d_choice.assign(p, -1);
    cs.d.insert(cs.b0);
    cs.d_choice[cs.b0] = 0;
    for (std::uint32_t j = 0; j < dec.u; ++j) {
        const auto c = mod_sub(cs.b0, dec.blocks[dec.t + dec.r + j].coset, p);
        cs.d.insert(c);
        cs.d_choice[c] = static_cast<int>(j + 1);
    }
    return cs;
}

bool hypothesis_feed_ok(const CosetDecomposition & dec, const ConstructionSets & cs)
{
    std::vector<bool> seen(dec.p, false);
    for (std::uint32_t i = 0; i < dec.t; ++i) {
        const auto d = dec.blocks[i].coset;
        if (d == 0 || seen[d])
            return false;
        seen[d] = true;
        if (!is_ap_with_difference(cs.a_sets[i], d))
            return false;
    }
    return true;
}

bool hypothesis_feed_disjoint(const CosetDecomposition & dec, const ConstructionSets & cs)
{
    std::vector<bool> used(dec.p, false);
    for (std::uint32_t i = 0; i < dec.t; ++i)
        for (auto d : ap_differences(cs.a_sets[i])) {
            if (used[d])
                return false;
            used[d] = true;
        }
    return true;
}

CoverResult quotient_cover_check(const ConstructionSets & cs, std::uint32_t p)
{
    if (cs.quotient->order() != p)
        throw std::invalid_argument("construction sets live in a different quotient");
    const auto reach = suffix_reach(cs);
    const auto total = sumset(cs.d, reach[0]);
    CoverResult out;
    out.covers = total.is_full();
    out.choices.resize(p);
    CoverSearch search{cs, reach, p, {}};
    for (Element c = 0; c < p; ++c) {
        if (!total.contains(c)) {
            out.missed.push_back(c);
            continue;
        }
        for (auto d : d_order(cs)) {
            search.picked.clear();
            if (search.run(0, mod_sub(c, d, p), [](const auto &) { return true; })) {
                out.choices[c] = CoverChoice{.d = d, .a = search.picked};
                break;
            }
        }
    }
    return out;
}

Representation find_representation(const CosetDecomposition & dec, Element x, std::uint32_t max_collapse, Variant variant)
{
    dec.group->check(x);
    if (use_lemma_4_2(dec, variant))
        return via_lemma_4_2(dec, x);
    const auto cs = build_construction_sets(dec, variant);
    return via_cover(dec, cs, suffix_reach(cs), x, max_collapse);
}

GroupSubset fiber_cover(const CosetDecomposition & dec, const Representation & rep)
{
    return FiberTables(dec).fold(rep).back();
}

std::optional<WindowPrimes> window_primes(const Group & g)
{
    if (!g.spec().is_cyclic())
        return std::nullopt;
    const auto f = factorize(g.order());
    if (f.size() != 2 || f[0].second != 1 || f[1].second != 1)
        return std::nullopt;
    const auto p = static_cast<std::uint32_t>(f[0].first), q = static_cast<std::uint32_t>(f[1].first);
    if (!in_prime_window(p, q))
        return std::nullopt;
    return WindowPrimes{p, q};
}

SpanCertificate certify_span(const GroupSubset & input, const CertifyOptions & opt)
{
    const auto & gp = input.group_ptr();
    const auto primes = window_primes(*gp);
    if (!primes)
        throw std::invalid_argument(gp->spec().to_string() + " is not C_pq with primes in the window");
    const auto [p, q] = *primes;
    if (input.contains(0))
        throw std::invalid_argument("S must not contain the identity");
    const std::size_t need = p + q - 2;
    GroupSubset set = input;
    if (input.size() > need && opt.truncate) {
        auto elems = input.elements();
        elems.resize(need);
        set = GroupSubset(gp, elems);
    }
    if (set.size() != need)
        throw std::invalid_argument("|S| must be p+q-2 = " + std::to_string(need) + ", got " +
                                    std::to_string(set.size()));

    const auto h = subgroup_of_index_p(gp, p);
    const auto dec = coset_decompose(set, h);
    const auto choice = dispatch(dec, q);
    const auto n = gp->order();

    SpanCertificate cert{.group = gp, .p = p, .q = q, .set = set, .case_label = choice.label};
    cert.traces.resize(n);
    if (choice.label == CertCase::prop_4_1) {
        cert.witnesses = prop_4_1_witnesses(dec);
        return cert;
    }

    const bool lemma_4_2 = use_lemma_4_2(dec, choice.variant);
    const auto cs = build_construction_sets(dec, choice.variant);
    const auto reach = suffix_reach(cs);
    const FiberTables tables(dec);
    cert.witnesses.resize(n);
    std::vector<std::string> errors(n);

    #pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t xi = 0; xi < static_cast<std::int64_t>(n); ++xi) {
        const auto x = static_cast<Element>(xi);
        try {
            auto rep = lemma_4_2 ? via_lemma_4_2(dec, x) : via_cover(dec, cs, reach, x, choice.max_collapse);
            const auto stages = tables.fold(rep);
            const auto & fiber = stages.back();
            if (!fiber.contains(x))
                throw TheoremContradiction("x=" + std::to_string(x) + ": fiber of size " + std::to_string(fiber.size()) +
                                           " misses the target");
            cert.witnesses[x] = tables.extract(rep, stages, x);
            const auto fiber_size = static_cast<std::uint32_t>(fiber.size());
            const bool holds = lemma_4_4_inequality(dec, q, rep.collapse);
            cert.traces[x] = Trace{.rep = std::move(rep), .fiber_size = fiber_size, .lemma_4_4_holds = holds};
        } catch (const std::exception & e) {
            errors[x] = e.what();
        }
    }
    raise_first(errors);

    for (const auto & t : cert.traces) {
        cert.max_collapse_seen = std::max(cert.max_collapse_seen, t->rep.collapse);
        if (t->lemma_4_4_holds && t->fiber_size < q)
            ++cert.lemma_4_4_implication_failures;
    }
    return cert;
}

SpanCertificate certify_direct(const GroupSubset & set)
{
    const auto & gp = set.group_ptr();
    const auto n = gp->order();
    SpanCertificate cert{.group = gp, .set = set, .case_label = CertCase::direct_dp};
    if (auto w = window_primes(*gp)) {
        cert.p = w->p;
        cert.q = w->q;
    } else if (n > 1) {
        cert.p = static_cast<std::uint32_t>(smallest_prime_factor(n));
        cert.q = static_cast<std::uint32_t>(n / cert.p);
    }
    cert.witnesses.resize(n);
    cert.traces.resize(n);

    // Prefix closures shared by every target; backtracking as in sigma_witness.
    const auto elems = set.elements();
    std::vector<GroupSubset> prefix{GroupSubset(gp)};
    for (auto e : elems) {
        GroupSubset next = prefix.back();
        next.or_translated(prefix.back(), e);
        next.insert(e);
        prefix.push_back(std::move(next));
    }
    for (Element x = 0; x < n; ++x)
        if (!prefix.back().contains(x))
            throw TheoremContradiction("x=" + std::to_string(x) + " is not a subset sum of S");

    const auto & g = *gp;
    #pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t xi = 0; xi < static_cast<std::int64_t>(n); ++xi) {
        Element y = static_cast<Element>(xi);
        std::vector<Element> chosen;
        for (std::size_t j = elems.size(); j > 0; --j) {
            if (prefix[j - 1].contains(y))
                continue;
            chosen.push_back(elems[j - 1]);
            if (y == elems[j - 1])
                break;
            y = g.sub(y, elems[j - 1]);
        }
        std::sort(chosen.begin(), chosen.end());
        cert.witnesses[static_cast<std::size_t>(xi)] = std::move(chosen);
    }
    return cert;
}

Verdict validate_certificate(const SpanCertificate & cert)
{
    Verdict v;
    auto fail = [&](std::string msg) {
        v.ok = false;
        v.failures.push_back(std::move(msg));
    };
    if (!cert.group) {
        fail("certificate has no group");
        return v;
    }
    const auto & g = *cert.group;
    const auto n = g.order();
    if (cert.set.group_ptr() != cert.group && cert.set.group().spec() != g.spec())
        fail("set lives in a different group");
    if (cert.witnesses.size() != n) {
        fail("expected " + std::to_string(n) + " witnesses, got " + std::to_string(cert.witnesses.size()));
        return v;
    }

    for (Element x = 0; x < n; ++x) {
        const auto & w = cert.witnesses[x];
        const std::string at = "x=" + std::to_string(x) + ": ";
        if (w.empty()) {
            fail(at + "empty witness");
            continue;
        }
        Element sum = 0;
        bool bad = false;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] >= n || !cert.set.contains(w[i])) {
                fail(at + "element " + std::to_string(w[i]) + " is not in S");
                bad = true;
                break;
            }
            if (i && w[i] <= w[i - 1]) {
                fail(at + "witness elements are not distinct and ascending");
                bad = true;
                break;
            }
            sum = g.add(sum, w[i]);
        }
        if (!bad && sum != x)
            fail(at + "witness sums to " + std::to_string(sum));
    }

    if (cert.case_label == CertCase::direct_dp)
        return v;

    // Everything below re-derives the case analysis from S alone.
    const auto primes = window_primes(g);
    if (!primes || primes->p != cert.p || primes->q != cert.q) {
        fail("group/prime data do not describe a window group");
        return v;
    }
    const auto p = cert.p, q = cert.q;
    if (cert.set.size() != p + q - 2 || cert.set.contains(0)) {
        fail("S must have p+q-2 nonzero elements");
        return v;
    }
    const auto dec = coset_decompose(cert.set, subgroup_of_index_p(cert.group, p));
    const auto choice = dispatch(dec, q);
    if (choice.label != cert.case_label)
        fail("case label " + std::string(to_string(cert.case_label)) + " but S falls under " +
             std::string(to_string(choice.label)));
    if (cert.traces.size() != n && !cert.traces.empty())
        fail("trace list has the wrong length");

    for (Element x = 0; x < cert.traces.size(); ++x) {
        const auto & t = cert.traces[x];
        const std::string at = "x=" + std::to_string(x) + ": ";
        if (!t) {
            if (cert.case_label != CertCase::prop_4_1)
                fail(at + "missing trace");
            continue;
        }
        const auto & f = t->rep.f;
        std::uint32_t c = 0;
        try {
            c = collapse_of(dec, f);
        } catch (const std::out_of_range & e) {
            fail(at + e.what());
            continue;
        }
        if (t->rep.x != x)
            fail(at + "trace target mismatch");
        if (std::accumulate(f.begin(), f.end(), std::uint64_t{0}) == 0)
            fail(at + "all coefficients are zero");
        if (block_class_sum(dec, f) != quotient_project(dec.h, x))
            fail(at + "coefficients violate the coset congruence");
        if (c != t->rep.collapse)
            fail(at + "recorded collapse " + std::to_string(t->rep.collapse) + ", actual " + std::to_string(c));
        if (c > choice.max_collapse)
            fail(at + "collapse " + std::to_string(c) + " exceeds " + std::to_string(choice.max_collapse));
        if (t->rep.route == Route::lemma_4_7 && (f[0] < 2 || f[0] + 2 > dec.block_size(0)))
            fail(at + "f_1 outside [2, |S_1|-2]");
        if (t->rep.route == Route::lemma_4_2)
            for (auto fi : f)
                if (fi != 1 && fi != 2)
                    fail(at + "lemma-4.2 coefficients must be 1 or 2");
        // The witness must take exactly f_i elements from block i.
        std::vector<std::uint32_t> used(dec.s(), 0);
        for (auto e : cert.witnesses[x]) {
            if (e >= n)
                continue;
            for (std::size_t i = 0; i < dec.s(); ++i)
                if (dec.blocks[i].members.contains(e))
                    ++used[i];
        }
        if (used != f)
            fail(at + "witness does not follow the coefficients");
        if (t->lemma_4_4_holds != lemma_4_4_inequality(dec, q, c))
            fail(at + "recorded Lemma 4.4 inequality is wrong");
    }
    return v;
}

void write_certificates(std::ostream & os, const std::vector<SpanCertificate> & certs)
{
    if (certs.empty())
        throw std::invalid_argument("no certificates to write");
    const auto & first = certs.front();
    std::map<std::string, std::size_t> counts;
    for (const auto & c : certs) {
        if (c.group->spec() != first.group->spec())
            throw std::invalid_argument("certificates for different groups in one file");
        ++counts[std::string(to_string(c.case_label))];
    }
    os << "group: " << first.group->spec().to_string() << '\n';
    os << "p: " << first.p << '\n';
    os << "q: " << first.q << '\n';
    os << "certificates: " << certs.size() << '\n';
    os << "case_counts:";
    for (const auto & [label, n] : counts)
        os << ' ' << label << '=' << n;
    os << '\n';
    for (std::size_t i = 0; i < certs.size(); ++i) {
        const auto & c = certs[i];
        os << "certificate: " << i << '\n';
        os << "case: " << to_string(c.case_label) << '\n';
        os << "set: " << join(c.set.elements()) << '\n';
        for (Element x = 0; x < c.witnesses.size(); ++x) {
            os << x << ": " << join(c.witnesses[x]);
            if (x < c.traces.size() && c.traces[x]) {
                const auto & t = *c.traces[x];
                os << " f=" << join(t.rep.f) << " route=" << to_string(t.rep.route) << " collapse=" << t.rep.collapse
                   << " fiber=" << t.fiber_size;
            }
            os << '\n';
        }
    }
}

namespace {

std::vector<std::uint32_t> parse_list(std::string_view s, std::size_t line)
{
    auto bad = [&] { return std::runtime_error("line " + std::to_string(line) + ": malformed list"); };
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        throw bad();
    s = s.substr(1, s.size() - 2);
    std::vector<std::uint32_t> out;
    while (!s.empty()) {
        const auto comma = s.find(',');
        const auto item = s.substr(0, comma);
        std::uint32_t v = 0;
        if (item.empty())
            throw bad();
        for (char ch : item) {
            if (ch < '0' || ch > '9')
                throw bad();
            v = v * 10 + static_cast<std::uint32_t>(ch - '0');
        }
        out.push_back(v);
        if (comma == std::string_view::npos)
            break;
        s = s.substr(comma + 1);
        if (s.empty())
            throw bad();
    }
    return out;
}

std::optional<Route> parse_route(std::string_view s)
{
    for (auto r : {Route::lemma_4_2, Route::lemma_4_3, Route::lemma_4_7})
        if (to_string(r) == s)
            return r;
    return std::nullopt;
}

} // namespace

CertificateFile read_certificates(std::istream & is)
{
    std::string line;
    std::size_t lineno = 0;
    auto err = [&](const std::string & msg) { return std::runtime_error("line " + std::to_string(lineno) + ": " + msg); };
    auto next = [&]() -> bool {
        while (std::getline(is, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (!line.empty())
                return true;
        }
        return false;
    };
    auto header = [&](std::string_view key) -> std::string {
        if (!next())
            throw err("missing '" + std::string(key) + "'");
        const std::string prefix = std::string(key) + ": ";
        if (!line.starts_with(prefix) && line != std::string(key) + ":")
            throw err("expected '" + std::string(key) + ":'");
        return line.size() > prefix.size() ? line.substr(prefix.size()) : std::string{};
    };
    auto number = [&](const std::string & s) -> std::uint32_t {
        try {
            std::size_t pos = 0;
            const auto v = std::stoul(s, &pos);
            if (pos != s.size())
                throw std::invalid_argument(s);
            return static_cast<std::uint32_t>(v);
        } catch (const std::logic_error &) {
            throw err("expected a number, got '" + s + "'");
        }
    };

    CertificateFile file;
    GroupPtr group;
    try {
        group = make_group(parse_group_spec(header("group")));
    } catch (const std::invalid_argument & e) {
        throw err(e.what());
    }
    const auto p = number(header("p"));
    const auto q = number(header("q"));
    const auto count = number(header("certificates"));
    const auto counts_line = header("case_counts");

    std::map<std::string, std::size_t> counts;
    for (std::uint32_t i = 0; i < count; ++i) {
        if (number(header("certificate")) != i)
            throw err("certificates out of order");
        const auto label = parse_cert_case(header("case"));
        if (!label)
            throw err("unknown case label");
        ++counts[std::string(to_string(*label))];
        const auto set_elems = parse_list(header("set"), lineno);
        for (auto e : set_elems)
            if (e >= group->order())
                throw err("set element out of range");
        SpanCertificate cert{.group = group, .p = p, .q = q, .set = GroupSubset(group, set_elems), .case_label = *label};
        cert.witnesses.resize(group->order());
        cert.traces.resize(group->order());
        for (Element x = 0; x < group->order(); ++x) {
            if (!next())
                throw err("missing record for x=" + std::to_string(x));
            std::istringstream ls(line);
            std::string key, list;
            ls >> key >> list;
            if (key != std::to_string(x) + ":")
                throw err("expected record for x=" + std::to_string(x));
            cert.witnesses[x] = parse_list(list, lineno);
            std::string field;
            Trace trace;
            bool traced = false;
            while (ls >> field) {
                traced = true;
                const auto eq = field.find('=');
                if (eq == std::string::npos)
                    throw err("malformed field '" + field + "'");
                const auto name = field.substr(0, eq), value = field.substr(eq + 1);
                if (name == "f")
                    trace.rep.f = parse_list(value, lineno);
                else if (name == "route") {
                    const auto r = parse_route(value);
                    if (!r)
                        throw err("unknown route");
                    trace.rep.route = *r;
                } else if (name == "collapse")
                    trace.rep.collapse = number(value);
                else if (name == "fiber")
                    trace.fiber_size = number(value);
                else
                    throw err("unknown field '" + name + "'");
            }
            if (traced) {
                trace.rep.x = x;
                cert.traces[x] = std::move(trace);
            }
        }
        // Derived summary fields are recomputed rather than stored.
        if (cert.case_label != CertCase::direct_dp && window_primes(*group)) {
            const auto dec = coset_decompose(cert.set, subgroup_of_index_p(group, p));
            for (auto & t : cert.traces)
                if (t) {
                    try {
                        t->lemma_4_4_holds = lemma_4_4_inequality(dec, q, collapse_of(dec, t->rep.f));
                    } catch (const std::out_of_range &) {
                    }
                    cert.max_collapse_seen = std::max(cert.max_collapse_seen, t->rep.collapse);
                    if (t->lemma_4_4_holds && t->fiber_size < q)
                        ++cert.lemma_4_4_implication_failures;
                }
        }
        file.certificates.push_back(std::move(cert));
    }
    std::string expected;
    for (const auto & [label, n] : counts)
        expected += (expected.empty() ? "" : " ") + label + "=" + std::to_string(n);
    if (counts_line != expected)
        throw std::runtime_error("case_counts '" + counts_line + "' do not match the records ('" + expected + "')");
    if (next())
        throw err("trailing content");
    return file;
}

} // namespace critnum::tracer
