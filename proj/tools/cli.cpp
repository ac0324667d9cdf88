#include "critnum/cli.hpp"

#include "critnum/critical_number.hpp"
#include "critnum/number_theory.hpp"
#include "critnum/proof_tracer.hpp"
#include "critnum/random.hpp"
#include "critnum/sumset.hpp"
#include "critnum/theorem_lab.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace critnum::cli {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char * kVersion = CRITNUM_VERSION;

class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct Globals
{
    int threads = 0;
    std::string format = "text";
    bool no_cache = false;
    std::string budget = "1e9";
    std::uint64_t seed = 1;
};

struct Report
{
    std::vector<Json> records;
    int exit_code = exit_ok;
    std::string verdict = "pass";
    bool cacheable = true;

    void add(Json j) { records.push_back(std::move(j)); }

    // A disagreement outranks a budget stop, which outranks success.
    void flag(int code)
    {
        if (code == exit_disagreement) {
            exit_code = code;
            verdict = "fail";
        } else if (code == exit_budget && exit_code == exit_ok) {
            exit_code = code;
            verdict = "budget-exceeded";
        }
    }
};

std::uint64_t parse_budget(const std::string & s)
{
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception &) {
        pos = 0;
    }
    if (pos != s.size() || !(v >= 1) || v > 1.8e19)
        throw UsageError("--budget must be a positive count, got '" + s + "'");
    return static_cast<std::uint64_t>(v);
}

GroupPtr parse_group(const std::string & s)
{
    try {
        return make_group(parse_group_spec(s));
    } catch (const std::invalid_argument & e) {
        throw UsageError(e.what());
    }
}

Json elements_of(const GroupSubset & s)
{
    Json a = Json::array();
    for (auto e : s.elements())
        a.push_back(e);
    return a;
}

std::vector<Element> parse_element_list(std::string text, const Group & g)
{
    for (char & c : text)
        if (c == ',' || c == '[' || c == ']' || c == '{' || c == '}')
            c = ' ';
    std::istringstream is(text);
    std::vector<Element> out;
    std::string tok;
    while (is >> tok) {
        std::size_t pos = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(tok, &pos);
        } catch (const std::exception &) {
            pos = 0;
        }
        if (pos != tok.size() || tok.front() == '-')
            throw UsageError("not an element index: '" + tok + "'");
        if (v >= g.order())
            throw UsageError("element " + tok + " is outside " + g.spec().to_string());
        out.push_back(static_cast<Element>(v));
    }
    return out;
}

std::string fnv1a_hex(const std::string & s)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

// ---------------------------------------------------------------------------
// Commands

void cmd_formula(const GroupPtr & g, Report & rep)
{
    const auto r = cr_formula(g->spec());
    rep.add({{"type", "formula"},
             {"group", g->spec().to_string()},
             {"order", g->order()},
             {"value", r.value},
             {"case", to_string(r.case_label)},
             {"p", r.p}});
}

void cmd_oracle(const GroupPtr & g, std::uint64_t budget, Report & rep)
{
    const auto f = cr_formula(g->spec());
    OracleOutcome out;
    try {
        out = cr_bruteforce(g, Budget{budget});
    } catch (const BudgetExceeded & e) {
        rep.add({{"type", "oracle"}, {"group", g->spec().to_string()}, {"formula", f.value}, {"error", e.what()}});
        rep.flag(exit_budget);
        return;
    }
    for (const auto & s : out.scans)
        rep.add({{"type", "scan"},
                 {"size", s.size},
                 {"total", s.total},
                 {"all_span", s.all_span},
                 {"counterexample", s.counterexample ? Json(*s.counterexample) : Json(nullptr)}});
    const bool agree = out.complete && out.value == f.value;
    rep.add({{"type", "oracle"},
             {"group", g->spec().to_string()},
             {"formula", f.value},
             {"case", to_string(f.case_label)},
             {"complete", out.complete},
             {"oracle", out.complete ? Json(out.value) : Json(nullptr)},
             {"lower_bound", out.lower_bound},
             {"upper_bound", out.upper_bound ? Json(*out.upper_bound) : Json(nullptr)},
             {"witness_size", out.failing_witness ? Json(out.failing_witness->size()) : Json(nullptr)},
             {"witness", out.failing_witness ? elements_of(*out.failing_witness) : Json(nullptr)},
             {"guided", out.guided},
             {"agree", out.complete ? Json(agree) : Json(nullptr)}});
    if (!out.complete)
        rep.flag(exit_budget);
    else if (!agree)
        rep.flag(exit_disagreement);
}

Json bound_record(const lab::BoundReport & r)
{
    Json hist = Json::object();
    for (const auto & [slack, n] : r.slack_histogram)
        hist[std::to_string(slack)] = n;
    Json violations = Json::array();
    for (std::size_t i = 0; i < r.violations.size() && i < 5; ++i)
        violations.push_back(r.violations[i].describe());
    const auto ms = r.min_slack();
    return {{"type", "bound"},
            {"theorem", lab::to_string(r.theorem)},
            {"p", r.p},
            {"s", r.s ? Json(r.s) : Json(nullptr)},
            {"mode", lab::to_string(r.mode)},
            {"instances", r.instances},
            {"violations", r.violation_count},
            {"min_slack", ms ? Json(*ms) : Json(nullptr)},
            {"seed", r.mode == lab::Mode::sampled ? Json(r.seed) : Json(nullptr)},
            {"row", r.row()},
            {"slack_histogram", hist},
            {"tight", r.tight ? Json(r.tight->describe()) : Json(nullptr)},
            {"first_violations", violations}};
}

struct VerifyArgs
{
    std::string theorem;
    std::uint32_t p = 0;
    std::uint32_t s = 2;
    bool exhaustive = false;
    bool sampled = false;
    std::uint64_t samples = 10000;
    std::string item = "both";
};

void cmd_verify(const VerifyArgs & a, const Globals & g, Report & rep)
{
    lab::Options opt;
    opt.mode = a.sampled ? lab::Mode::sampled : lab::Mode::exhaustive;
    opt.seed = g.seed;
    opt.samples = a.samples;
    opt.budget = parse_budget(g.budget);
    std::vector<lab::BoundReport> reports;
    try {
        if (a.theorem == "cauchy-davenport")
            reports.push_back(lab::verify_cauchy_davenport(a.p, a.s, opt));
        else if (a.theorem == "diderrich")
            reports.push_back(lab::verify_diderrich(a.p, a.s, opt));
        else {
            auto both = lab::verify_ddsh(a.p, opt);
            if (a.item != "2")
                reports.push_back(std::move(both[0]));
            if (a.item != "1")
                reports.push_back(std::move(both[1]));
        }
    } catch (const BudgetExceeded & e) {
        rep.add({{"type", "bound"}, {"theorem", a.theorem}, {"p", a.p}, {"error", e.what()}});
        rep.flag(exit_budget);
        return;
    } catch (const std::invalid_argument & e) {
        throw UsageError(e.what());
    }
    for (const auto & r : reports) {
        rep.add(bound_record(r));
        if (!r.ok())
            rep.flag(exit_disagreement);
    }
}

void cmd_witness(const GroupPtr & g, std::optional<std::uint32_t> p_opt, Report & rep)
{
    if (g->order() < 2)
        throw UsageError("the trivial group has no extremal witness");
    const auto p = p_opt.value_or(static_cast<std::uint32_t>(smallest_prime_factor(g->order())));
    GroupSubset w(g);
    try {
        w = extremal_witness(g, p);
    } catch (const std::invalid_argument & e) {
        throw UsageError(e.what());
    }
    const auto closure = sigma(w);
    const auto bound = static_cast<std::uint64_t>(p - 1) * (g->order() / p);
    rep.add({{"type", "witness"},
             {"group", g->spec().to_string()},
             {"p", p},
             {"size", w.size()},
             {"elements", elements_of(w)},
             {"closure_size", closure.size()},
             {"bound", bound},
             {"spans", closure.is_full()}});
    if (closure.is_full() || closure.size() > bound)
        rep.flag(exit_disagreement);
}

struct CertifyArgs
{
    std::string group;
    std::optional<std::uint64_t> random;
    std::optional<std::string> set;
    std::optional<std::string> set_file;
    std::optional<std::uint32_t> size;
    std::string method = "both";
    std::optional<std::string> cert_out;
    bool truncate = false;
};

std::vector<GroupSubset> certify_inputs(const GroupPtr & g, const CertifyArgs & a, std::uint64_t seed)
{
    std::vector<GroupSubset> sets;
    if (a.random) {
        std::uint32_t size = 0;
        if (a.size)
            size = *a.size;
        else if (auto w = tracer::window_primes(*g))
            size = w->p + w->q - 2;
        else
            throw UsageError(g->spec().to_string() + " is outside the prime window; pass --size for random sets");
        if (size == 0 || size >= g->order())
            throw UsageError("--size must be in [1, |G|-1]");
        for (std::uint64_t i = 0; i < *a.random; ++i) {
            auto rng = stream_rng(seed, i);
            const auto e = sample_distinct(rng, 1, g->order(), size);
            sets.emplace_back(g, std::vector<Element>(e.begin(), e.end()));
        }
    } else if (a.set) {
        sets.emplace_back(g, parse_element_list(*a.set, *g));
    } else {
        std::ifstream in(*a.set_file);
        if (!in)
            throw UsageError("cannot read " + *a.set_file);
        std::string line;
        while (std::getline(in, line)) {
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#')
                continue;
            sets.emplace_back(g, parse_element_list(line, *g));
        }
        if (sets.empty())
            throw UsageError(*a.set_file + " contains no sets");
    }
    return sets;
}

void cmd_certify(const CertifyArgs & a, const Globals & g, Report & rep)
{
    const auto group = parse_group(a.group);
    const auto sets = certify_inputs(group, a, g.seed);
    const bool use_tracer = a.method != "dp";
    const bool use_dp = a.method != "tracer";

    std::vector<tracer::SpanCertificate> produced;
    std::map<std::string, std::uint64_t> cases;
    std::uint64_t agree = 0, validated = 0, certified = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        const auto & set = sets[i];
        if (set.contains(0))
            throw UsageError("set " + std::to_string(i) + " contains the identity");
        const bool spans = sigma(set).is_full();
        Json rec{{"type", "certificate"}, {"index", i}, {"size", set.size()}, {"set", elements_of(set)}, {"sigma_spans", spans}};

        std::optional<bool> tracer_ok, dp_ok;
        bool valid = true;
        if (use_tracer) {
            try {
                auto cert = tracer::certify_span(set, tracer::CertifyOptions{.truncate = a.truncate});
                const auto v = tracer::validate_certificate(cert);
                rec["tracer"] = "ok";
                rec["case"] = tracer::to_string(cert.case_label);
                rec["max_collapse"] = cert.max_collapse_seen;
                rec["tracer_valid"] = v.ok;
                valid = valid && v.ok;
                tracer_ok = true;
                ++cases[std::string(tracer::to_string(cert.case_label))];
                produced.push_back(std::move(cert));
            } catch (const tracer::TheoremContradiction & e) {
                rec["tracer"] = std::string("contradiction: ") + e.what();
                tracer_ok = false;
            } catch (const std::invalid_argument & e) {
                throw UsageError("set " + std::to_string(i) + ": " + e.what());
            }
        }
        if (use_dp) {
            try {
                auto cert = tracer::certify_direct(set);
                const auto v = tracer::validate_certificate(cert);
                rec["dp"] = "ok";
                rec["dp_valid"] = v.ok;
                valid = valid && v.ok;
                dp_ok = true;
                produced.push_back(std::move(cert));
            } catch (const tracer::TheoremContradiction & e) {
                rec["dp"] = std::string("not spanning: ") + e.what();
                dp_ok = false;
            }
        }
        // Every route must reach the same conclusion as the plain closure.
        const bool routes_agree = (!tracer_ok || *tracer_ok == spans) && (!dp_ok || *dp_ok == spans);
        const bool ok = routes_agree && valid && spans;
        rec["agree"] = routes_agree;
        agree += routes_agree;
        validated += valid;
        certified += ok;
        rep.add(std::move(rec));
        if (!ok)
            rep.flag(exit_disagreement);
    }

    Json case_counts = Json::object();
    for (const auto & [label, n] : cases)
        case_counts[label] = n;
    rep.add({{"type", "certify-summary"},
             {"sets", sets.size()},
             {"method", a.method},
             {"agree", agree},
             {"validated", validated},
             {"certified", certified},
             {"cases", case_counts}});

    if (a.cert_out) {
        rep.cacheable = false;
        if (!produced.empty()) {
            std::ofstream out(*a.cert_out);
            if (!out)
                throw UsageError("cannot write " + *a.cert_out);
            tracer::write_certificates(out, produced);
        }
        rep.add({{"type", "file"}, {"path", *a.cert_out}, {"certificates", produced.size()}});
    }
}

struct TableArgs
{
    std::uint32_t min_order = 2;
    std::uint32_t max_order = 24;
    std::optional<std::string> orders;
    std::optional<std::string> out;
};

void resolve_orders(TableArgs & a)
{
    if (a.orders) {
        const auto dots = a.orders->find("..");
        try {
            if (dots == std::string::npos)
                throw std::invalid_argument("missing ..");
            std::size_t p1 = 0, p2 = 0;
            const auto lo = a.orders->substr(0, dots), hi = a.orders->substr(dots + 2);
            a.min_order = static_cast<std::uint32_t>(std::stoul(lo, &p1));
            a.max_order = static_cast<std::uint32_t>(std::stoul(hi, &p2));
            if (p1 != lo.size() || p2 != hi.size())
                throw std::invalid_argument("trailing characters");
        } catch (const std::exception &) {
            throw UsageError("--orders expects a..b, got '" + *a.orders + "'");
        }
    }
    if (a.min_order < 1 || a.min_order > a.max_order)
        throw UsageError("empty order range");
}

void cmd_table(const TableArgs & a, const Globals & g, Report & rep)
{
    const auto rows = cr_table(a.min_order, a.max_order, Budget{parse_budget(g.budget)});
    std::uint64_t agree = 0, disagree = 0, skipped = 0;
    for (const auto & row : rows) {
        const auto & f = row.formula;
        Json rec{{"type", "table-row"},
                 {"order", f.group.order()},
                 {"group", f.group.to_string()},
                 {"formula", f.value},
                 {"case", to_string(f.case_label)}};
        if (row.oracle) {
            rec["oracle"] = row.oracle->value;
            rec["agree"] = row.agree();
            rec["witness_size"] =
                row.oracle->failing_witness ? Json(row.oracle->failing_witness->size()) : Json(nullptr);
            (row.agree() ? agree : disagree) += 1;
        } else if (!row.partial) {
            rec["oracle"] = "n/a";
            rec["agree"] = nullptr;
        } else {
            rec["oracle"] = "skipped";
            rec["agree"] = nullptr;
            rec["lower_bound"] = row.partial ? Json(row.partial->lower_bound) : Json(nullptr);
            ++skipped;
        }
        rep.add(std::move(rec));
    }
    rep.add({{"type", "table-summary"}, {"rows", rows.size()}, {"agree", agree}, {"disagree", disagree}, {"skipped", skipped}});
    if (a.out) {
        rep.cacheable = false;
        std::ofstream out(*a.out);
        if (!out)
            throw UsageError("cannot write " + *a.out);
        out << cr_table_csv(rows);
        rep.add({{"type", "file"}, {"path", *a.out}, {"rows", rows.size()}});
    }
    if (disagree)
        rep.flag(exit_disagreement);
    else if (skipped)
        rep.flag(exit_budget);
}

void cmd_validate(const std::string & path, Report & rep)
{
    rep.cacheable = false;
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot read " + path);
    tracer::CertificateFile file;
    try {
        file = tracer::read_certificates(in);
    } catch (const std::exception & e) {
        throw UsageError(path + ": " + e.what());
    }
    std::uint64_t good = 0;
    for (std::size_t i = 0; i < file.certificates.size(); ++i) {
        const auto & c = file.certificates[i];
        const auto v = tracer::validate_certificate(c);
        Json failures = Json::array();
        for (std::size_t k = 0; k < v.failures.size() && k < 5; ++k)
            failures.push_back(v.failures[k]);
        rep.add({{"type", "validation"},
                 {"index", i},
                 {"group", c.group->spec().to_string()},
                 {"case", tracer::to_string(c.case_label)},
                 {"ok", v.ok},
                 {"failure_count", v.failures.size()},
                 {"failures", failures}});
        good += v.ok;
        if (!v.ok)
            rep.flag(exit_disagreement);
    }
    rep.add({{"type", "validate-summary"}, {"certificates", file.certificates.size()}, {"valid", good}});
}

// ---------------------------------------------------------------------------
// Cache: one JSON object per line, the last entry for a key wins.

struct Cache
{
    fs::path file;

    std::optional<std::pair<int, std::vector<Json>>> lookup(const std::string & key) const
    {
        std::ifstream in(file);
        if (!in)
            return std::nullopt;
        std::optional<std::pair<int, std::vector<Json>>> hit;
        std::string line;
        while (std::getline(in, line)) {
            const auto j = Json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object() || j.value("key", "") != key)
                continue;
            if (!j.contains("records") || !j["records"].is_array() || !j.contains("exit_code"))
                continue;
            std::vector<Json> records(j["records"].begin(), j["records"].end());
            if (fnv1a_hex(Json(records).dump()) != j.value("digest", ""))
                continue;
            hit.emplace(j["exit_code"].get<int>(), std::move(records));
        }
        return hit;
    }

    bool store(const std::string & key, const Report & rep) const
    {
        std::error_code ec;
        fs::create_directories(file.parent_path(), ec);
        std::ofstream out(file, std::ios::app);
        if (!out)
            return false;
        const Json entry{{"key", key},
                         {"verdict", rep.verdict},
                         {"exit_code", rep.exit_code},
                         {"digest", fnv1a_hex(Json(rep.records).dump())},
                         {"records", rep.records}};
        out << entry.dump() << '\n';
        return static_cast<bool>(out);
    }
};

std::string render_text(const Json & rec)
{
    std::string line = rec.value("type", "record");
    for (const auto & [k, v] : rec.items()) {
        if (k == "type")
            continue;
        line += ' ';
        line += k;
        line += '=';
        if (v.is_string())
            line += v.get<std::string>();
        else if (v.is_null())
            line += '-';
        else
            line += v.dump();
    }
    return line;
}

std::string render(const std::vector<Json> & records, const std::string & format)
{
    std::string out;
    for (const auto & r : records) {
        out += format == "json" ? r.dump() : render_text(r);
        out += '\n';
    }
    return out;
}

} // namespace

Environment environment_from_process()
{
    Environment env;
    if (const char * dir = std::getenv("CRITNUM_CACHE_DIR"); dir && *dir)
        env.cache_dir = dir;
    else if (const char * home = std::getenv("HOME"); home && *home)
        env.cache_dir = (fs::path(home) / ".cache" / "critnum").string();
    return env;
}

RunResult execute(const std::vector<std::string> & args, const Environment & env)
{
    const auto start = std::chrono::steady_clock::now();
    Globals g;
    CLI::App app{"Critical numbers of finite abelian groups: closed form, exhaustive oracle, "
                 "addition-theorem checks and spanning certificates.",
                 "critnum"};
    app.require_subcommand(1);
    app.add_option("--threads", g.threads, "Worker threads (default: all cores)")->check(CLI::PositiveNumber);
    app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"text", "json"}));
    app.add_flag("--no-cache", g.no_cache, "Bypass the results cache");
    app.add_option("--budget", g.budget, "Maximum subsets per exhaustive scan");
    app.add_option("--seed", g.seed, "Seed for randomized commands");

    std::string group_arg;
    auto * formula = app.add_subcommand("formula", "Closed-form critical number");
    formula->add_option("group", group_arg, "Group, e.g. C91 or C2xC4")->required();

    auto * oracle = app.add_subcommand("oracle", "Exhaustive critical number, compared with the closed form");
    oracle->add_option("group", group_arg)->required();

    VerifyArgs va;
    auto * verify = app.add_subcommand("verify", "Check an addition theorem over Z/p");
    verify->add_option("theorem", va.theorem)->required()->check(CLI::IsMember({"cauchy-davenport", "diderrich", "ddsh"}));
    verify->add_option("--p", va.p, "Prime modulus")->required();
    verify->add_option("--s", va.s, "Number of summands");
    auto * ex = verify->add_flag("--exhaustive", va.exhaustive, "Enumerate every instance (default)");
    verify->add_flag("--sampled", va.sampled, "Seeded random instances")->excludes(ex);
    verify->add_option("--samples", va.samples, "Instances in sampled mode");
    verify->add_option("--item", va.item, "ddsh item: 1 (bound), 2 (spanning) or both")
        ->check(CLI::IsMember({"1", "2", "both"}));

    std::optional<std::uint32_t> witness_p;
    auto * witness = app.add_subcommand("witness", "Large non-spanning set built from an index-p subgroup");
    witness->add_option("group", group_arg)->required();
    witness->add_option("--p", witness_p, "Index of the subgroup (default: smallest prime divisor)");

    CertifyArgs ca;
    auto * certify = app.add_subcommand("certify", "Spanning certificates for C_pq in the prime window");
    certify->add_option("group", ca.group)->required();
    auto * source = certify->add_option_group("source", "Where the sets come from");
    source->add_option("--random", ca.random, "Number of seeded random sets");
    source->add_option("--set", ca.set, "One set, e.g. 1,2,5");
    source->add_option("--set-file", ca.set_file, "One set per line");
    source->require_option(1);
    certify->add_option("--size", ca.size, "Size of random sets (default p+q-2)");
    certify->add_option("--method", ca.method)->check(CLI::IsMember({"tracer", "dp", "both"}));
    certify->add_option("--cert-out", ca.cert_out, "Write certificates to this file");
    certify->add_flag("--truncate", ca.truncate, "Keep the p+q-2 smallest elements of larger sets");

    TableArgs ta;
    auto * table = app.add_subcommand("table", "Closed form against the oracle over a range of orders");
    auto * max_opt = table->add_option("--max-order", ta.max_order);
    auto * min_opt = table->add_option("--min-order", ta.min_order);
    table->add_option("--orders", ta.orders, "Range a..b")->excludes(max_opt)->excludes(min_opt);
    table->add_option("--out", ta.out, "CSV output path");

    std::string validate_path;
    auto * validate = app.add_subcommand("validate", "Re-check a certificate file");
    validate->add_option("file", validate_path)->required();

    for (auto * sub : app.get_subcommands({}))
        sub->fallthrough();

    RunResult result;
    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::CallForHelp &) {
        result.payload = app.help();
        return result;
    } catch (const CLI::CallForAllHelp &) {
        result.payload = app.help("", CLI::AppFormatMode::All);
        return result;
    } catch (const CLI::ParseError & e) {
        result.exit_code = exit_usage;
        result.errors = "critnum: " + std::string(e.what()) + "\nRun with --help for usage.\n";
        return result;
    }

    const auto * sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    Report rep;
    Json params = Json::object();
    const int saved_threads = omp_get_max_threads();
    if (g.threads > 0)
        omp_set_num_threads(g.threads);

    std::string cache_status = "off";
    try {
        parse_budget(g.budget);
        // Canonical parameter echo; this is also the cache key.
        if (command == "formula" || command == "oracle" || command == "witness")
            params["group"] = parse_group(group_arg)->spec().to_string();
        if (command == "oracle")
            params["budget"] = parse_budget(g.budget);
        if (command == "witness")
            params["p"] = witness_p ? Json(*witness_p) : Json(nullptr);
        if (command == "verify") {
            params = {{"theorem", va.theorem},
                      {"p", va.p},
                      {"s", va.s},
                      {"mode", va.sampled ? "sampled" : "exhaustive"},
                      {"item", va.theorem == "ddsh" ? Json(va.item) : Json(nullptr)},
                      {"samples", va.sampled ? Json(va.samples) : Json(nullptr)},
                      {"seed", va.sampled ? Json(g.seed) : Json(nullptr)},
                      {"budget", parse_budget(g.budget)}};
        }
        if (command == "certify") {
            params = {{"group", parse_group(ca.group)->spec().to_string()},
                      {"random", ca.random ? Json(*ca.random) : Json(nullptr)},
                      {"set", ca.set ? Json(*ca.set) : Json(nullptr)},
                      {"set_file", ca.set_file ? Json(*ca.set_file) : Json(nullptr)},
                      {"size", ca.size ? Json(*ca.size) : Json(nullptr)},
                      {"method", ca.method},
                      {"truncate", ca.truncate},
                      {"seed", ca.random ? Json(g.seed) : Json(nullptr)},
                      {"cert_out", ca.cert_out ? Json(*ca.cert_out) : Json(nullptr)}};
        }
        if (command == "table") {
            resolve_orders(ta);
            params = {{"min_order", ta.min_order},
                      {"max_order", ta.max_order},
                      {"orders", ta.orders ? Json(*ta.orders) : Json(nullptr)},
                      {"budget", parse_budget(g.budget)},
                      {"out", ta.out ? Json(*ta.out) : Json(nullptr)}};
        }
        if (command == "validate")
            params["file"] = validate_path;

        const Json run{{"type", "run"}, {"command", command}, {"params", params}, {"version", kVersion}};
        const std::string key = run.dump();
        // Commands that write or read files always run.
        const bool touches_files = command == "validate" || (command == "certify" && (ca.cert_out || ca.set_file)) ||
                                   (command == "table" && ta.out);
        std::optional<Cache> cache;
        if (env.cache_dir && !g.no_cache && !touches_files)
            cache = Cache{fs::path(*env.cache_dir) / "results.jsonl"};
        else if (touches_files)
            cache_status = "bypass";

        std::optional<std::pair<int, std::vector<Json>>> hit;
        if (cache)
            hit = cache->lookup(key);
        if (hit) {
            cache_status = "hit";
            rep.exit_code = hit->first;
            rep.records = std::move(hit->second);
        } else {
            rep.add(run);
            if (command == "formula")
                cmd_formula(parse_group(group_arg), rep);
            else if (command == "oracle")
                cmd_oracle(parse_group(group_arg), parse_budget(g.budget), rep);
            else if (command == "verify")
                cmd_verify(va, g, rep);
            else if (command == "witness")
                cmd_witness(parse_group(group_arg), witness_p, rep);
            else if (command == "certify")
                cmd_certify(ca, g, rep);
            else if (command == "table")
                cmd_table(ta, g, rep);
            else if (command == "validate")
                cmd_validate(validate_path, rep);
            rep.add({{"type", "verdict"}, {"verdict", rep.verdict}, {"exit_code", rep.exit_code}});
            if (cache && rep.cacheable)
                cache_status = cache->store(key, rep) ? "miss" : "unavailable";
            else if (cache)
                cache_status = "bypass";
        }
    } catch (const UsageError & e) {
        rep.records.clear();
        rep.exit_code = exit_usage;
        rep.add({{"type", "error"}, {"command", command}, {"message", e.what()}});
        rep.add({{"type", "verdict"}, {"verdict", "error"}, {"exit_code", exit_usage}});
        result.errors = "critnum " + command + ": " + e.what() + "\n";
    }
    omp_set_num_threads(saved_threads);

    const auto wall_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    result.exit_code = rep.exit_code;
    result.payload = render(rep.records, g.format);
    if (g.format == "json")
        result.header = Json{{"type", "header"}, {"tool", "critnum"}, {"version", kVersion}, {"wall_ms", wall_ms},
                             {"cache", cache_status}}
                            .dump();
    else
        result.header = "# critnum " + std::string(kVersion) + " wall_ms=" + std::to_string(wall_ms) +
                        " cache=" + cache_status;
    return result;
}

} // namespace critnum::cli
