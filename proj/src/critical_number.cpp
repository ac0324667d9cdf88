#include "critnum/critical_number.hpp"

#include "critnum/number_theory.hpp"
#include "critnum/subgroup.hpp"
#include "critnum/sumset.hpp"

#include <algorithm>
#include <sstream>

namespace critnum {

std::string_view to_string(CrCase c)
{
    switch (c) {
        case CrCase::trivial_order: return "trivial-order";
        case CrCase::prime_order: return "prime-order";
        case CrCase::exception_list: return "exception-list";
        case CrCase::odd_prime_window: return "odd-prime-window";
        case CrCase::theorem_window: return "theorem-1.1-window";
        case CrCase::general: return "general";
    }
    return "?";
}

CrResult cr_formula(const GroupSpec & g)
{
    const std::uint32_t n = g.order();
    CrResult r{g, 0, CrCase::general, 0};
    if (n <= 2) {
        r.value = n;
        r.case_label = CrCase::trivial_order;
        r.p = n == 2 ? 2 : 0;
        return r;
    }
    const auto p = static_cast<std::uint32_t>(smallest_prime_factor(n));
    r.p = p;
    if (n == p) {
        r.value = static_cast<std::uint32_t>(floor_two_sqrt(p - 2));
        r.case_label = CrCase::prime_order;
        return r;
    }
    static const std::vector<std::vector<std::uint32_t>> exceptions = {{3, 3}, {2, 2}, {4}, {6}, {2, 4}, {8}};
    const std::uint32_t q = n / p;
    if (std::find(exceptions.begin(), exceptions.end(), g.invariant_factors) != exceptions.end()) {
        r.value = q + p - 1;
        r.case_label = CrCase::exception_list;
        return r;
    }
    if (q % 2 == 1 && is_prime(q) && 2 < p && p < q && q <= p + floor_two_sqrt(p - 2) + 1) {
        r.value = q + p - 1;
        r.case_label = CrCase::odd_prime_window;
        return r;
    }
    r.value = q + p - 2;
    r.case_label = in_prime_window(p, q) ? CrCase::theorem_window : CrCase::general;
    return r;
}

GroupSubset extremal_witness(const GroupPtr & g, std::uint32_t p)
{
    const auto n = g->order();
    if (n < 2 || smallest_prime_factor(n) != p)
        throw std::invalid_argument(std::to_string(p) + " is not the smallest prime divisor of |G| = " + std::to_string(n));
    if (n == p)
        throw std::invalid_argument("extremal witness needs |G| > p");
    const Subgroup h = subgroup_of_index_p(g, p);
    GroupSubset s = h.members;
    s.erase(0);
    Element a = 0;
    while (h.members.contains(a))
        ++a;
    const auto target = h.coset_of[a];
    std::uint32_t taken = 0;
    for (Element x = a; x < n && taken + 2 < p; ++x) {
        if (h.coset_of[x] == target) {
            s.insert(x);
            ++taken;
        }
    }
    if (taken + 2 != p)
        throw std::logic_error("coset smaller than p - 2");
    return s;
}

OracleOutcome cr_bruteforce(const GroupPtr & g, const Budget & budget)
{
    const auto n = g->order();
    if (n < 2)
        throw std::invalid_argument("cr_bruteforce requires |G| >= 2");
    const std::uint32_t m = n - 1;
    const auto formula = cr_formula(g->spec());
    const std::uint32_t v = formula.value;

    OracleOutcome out;
    out.group = g->spec();

    auto record_witness = [&](const std::vector<Element> & elems) {
        out.failing_witness = GroupSubset(g, elems);
        out.lower_bound = std::max<std::uint32_t>(out.lower_bound, static_cast<std::uint32_t>(elems.size()) + 1);
    };

    // Guided phase 1: a non-spanning set of size v - 1.
    bool witness_ok = false;
    if (v >= 2) {
        if (binomial(m, v - 1) <= budget.max_subsets) {
            auto scan = spanning_all_of_size(g, v - 1, budget);
            if (!scan.all_span) {
                record_witness(*scan.counterexample);
                witness_ok = true;
            }
            out.scans.push_back(std::move(scan));
        }
        else if (n > formula.p && formula.p != 0) {
            auto w = extremal_witness(g, formula.p);
            if (w.size() == v - 1 && !sigma(w).is_full()) {
                record_witness(w.elements());
                witness_ok = true;
            }
        }
    }
    else {
        witness_ok = true;
    }

    // Guided phase 2: every set of size v spans.
    if (binomial(m, v) > budget.max_subsets) {
        out.complete = false;
        out.guided = witness_ok;
        return out;
    }
    auto confirm = spanning_all_of_size(g, v, budget);
    const bool confirm_ok = confirm.all_span;
    out.scans.push_back(std::move(confirm));

    if (witness_ok && confirm_ok) {
        out.complete = true;
        out.value = v;
        out.upper_bound = v;
        out.lower_bound = v;
        return out;
    }

    // The formula was contradicted: search without guidance.
    out.guided = false;
    out.scans.clear();
    out.failing_witness.reset();
    out.lower_bound = 1;
    std::optional<std::vector<Element>> previous_cex;
    for (std::uint32_t l = 1; l <= m + 1; ++l) {
        if (binomial(m, l) > budget.max_subsets) {
            out.complete = false;
            return out;
        }
        auto scan = spanning_all_of_size(g, l, budget);
        const bool all = scan.all_span;
        auto cex = scan.counterexample;
        out.scans.push_back(std::move(scan));
        if (all) {
            out.complete = true;
            out.value = l;
            out.lower_bound = l;
            out.upper_bound = l;
            if (previous_cex)
                out.failing_witness = GroupSubset(g, *previous_cex);
            return out;
        }
        previous_cex = std::move(cex);
        out.lower_bound = l + 1;
    }
    throw std::logic_error("unguided search did not terminate");
}

std::vector<CrTableRow> cr_table(std::uint32_t min_order, std::uint32_t max_order, const Budget & budget)
{
    std::vector<CrTableRow> rows;
    for (std::uint32_t n = std::max<std::uint32_t>(min_order, 1); n <= max_order; ++n) {
        for (const auto & spec : enumerate_abelian_groups(n)) {
            CrTableRow row{cr_formula(spec), std::nullopt, std::nullopt};
            if (n >= 2) {
                auto outcome = cr_bruteforce(make_group(spec), budget);
                if (outcome.complete)
                    row.oracle = std::move(outcome);
                else
                    row.partial = std::move(outcome);
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string cr_table_csv(const std::vector<CrTableRow> & rows)
{
    std::ostringstream os;
    os << "order,group,formula,case_label,oracle,agree,witness_size\n";
    for (const auto & row : rows) {
        os << row.formula.group.order() << ',' << row.formula.group.to_string() << ',' << row.formula.value << ','
           << to_string(row.formula.case_label) << ',';
        if (row.oracle) {
            os << row.oracle->value << ',' << (row.agree() ? "true" : "false") << ',';
            if (row.oracle->failing_witness)
                os << row.oracle->failing_witness->size();
        }
        else {
            os << "skipped,skipped,";
        }
        os << '\n';
    }
    return os.str();
}

} // namespace critnum
