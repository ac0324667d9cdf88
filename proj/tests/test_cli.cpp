#include "critnum/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace critnum::cli;
using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

RunResult run(std::vector<std::string> args, const Environment & env = {})
{
    return execute(args, env);
}

std::vector<Json> records(const RunResult & r)
{
    std::vector<Json> out;
    std::istringstream is(r.payload);
    std::string line;
    while (std::getline(is, line))
        out.push_back(Json::parse(line));
    return out;
}

std::vector<Json> run_json(std::vector<std::string> args, const Environment & env = {})
{
    args.insert(args.begin(), {"--format", "json"});
    return records(run(std::move(args), env));
}

Json first_of(const std::vector<Json> & recs, const std::string & type)
{
    for (const auto & r : recs)
        if (r["type"] == type)
            return r;
    return nullptr;
}

std::size_t count_of(const std::vector<Json> & recs, const std::string & type)
{
    std::size_t n = 0;
    for (const auto & r : recs)
        n += r["type"] == type;
    return n;
}

struct TempDir
{
    fs::path path;
    TempDir()
    {
        static int counter = 0;
        path = fs::temp_directory_path() / ("critnum-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("formula and the record envelope")
{
    const auto r = run({"formula", "C91"});
    CHECK(r.exit_code == exit_ok);
    CHECK(r.header.find("cache=off") != std::string::npos);
    CHECK(r.payload.find("formula group=C91 order=91 value=18") != std::string::npos);

    const auto recs = run_json({"formula", "C2xC4"});
    REQUIRE(recs.size() == 3);
    CHECK(recs.front()["type"] == "run");
    CHECK(recs.front()["command"] == "formula");
    CHECK(recs.front()["params"]["group"] == "C2xC4");
    CHECK(recs[1]["value"] == 5);
    CHECK(recs[1]["case"] == "exception-list");
    CHECK(recs.back() == Json{{"type", "verdict"}, {"verdict", "pass"}, {"exit_code", 0}});

    // Spellings of the same group share one canonical echo.
    CHECK(run_json({"formula", "C4xC2"})[0]["params"]["group"] == "C2xC4");
}

TEST_CASE("oracle exit codes")
{
    auto agree = run_json({"oracle", "C8"});
    CHECK(first_of(agree, "oracle")["agree"] == true);
    CHECK(agree.back()["exit_code"] == exit_ok);

    auto c9 = run({"oracle", "C9"});
    CHECK(c9.exit_code == exit_disagreement);
    const auto c9o = first_of(records(run({"--format", "json", "oracle", "C9"})), "oracle");
    CHECK(c9o["formula"] == 4);
    CHECK(c9o["oracle"] == 5);
    CHECK(c9o["witness"] == Json::array({1, 3, 4, 5}));

    auto c91 = run({"--format", "json", "oracle", "C91"});
    CHECK(c91.exit_code == exit_budget);
    const auto o = first_of(records(c91), "oracle");
    CHECK(o["complete"] == false);
    CHECK(o["oracle"].is_null());
    CHECK(o["lower_bound"] == 18);
    CHECK(o["witness_size"] == 17);
    CHECK(records(c91).back()["verdict"] == "budget-exceeded");
}

TEST_CASE("verify")
{
    auto cd = run_json({"verify", "cauchy-davenport", "--p", "5"});
    CHECK(first_of(cd, "bound")["row"] == "cauchy-davenport,5,2,exhaustive,961,0,0,-");
    CHECK(cd.back()["exit_code"] == exit_ok);

    auto ddsh = run_json({"verify", "ddsh", "--p", "7"});
    CHECK(count_of(ddsh, "bound") == 2);
    CHECK(ddsh[1]["theorem"] == "ddsh-1");
    CHECK(ddsh[1]["violations"] == 0);
    CHECK(ddsh[2]["theorem"] == "ddsh-2");
    CHECK(ddsh[2]["violations"] == 35);
    CHECK(ddsh.back()["exit_code"] == exit_disagreement);
    CHECK(run({"verify", "ddsh", "--p", "7", "--item", "1"}).exit_code == exit_ok);

    auto sampled = run_json({"--seed", "9", "verify", "diderrich", "--p", "23", "--s", "4", "--sampled", "--samples", "300"});
    CHECK(first_of(sampled, "bound")["instances"] == 300);
    CHECK(first_of(sampled, "bound")["seed"] == 9);
    CHECK(sampled.back()["exit_code"] == exit_ok);

    CHECK(run({"verify", "diderrich", "--p", "5", "--s", "4"}).exit_code == exit_usage);
    CHECK(run({"verify", "cauchy-davenport", "--p", "9"}).exit_code == exit_usage);
    CHECK(run({"verify", "cauchy-davenport", "--p", "5", "--sampled", "--exhaustive"}).exit_code == exit_usage);
    CHECK(run({"--budget", "100", "verify", "cauchy-davenport", "--p", "7"}).exit_code == exit_budget);
}

TEST_CASE("witness")
{
    const auto w = first_of(run_json({"witness", "C91"}), "witness");
    CHECK(w["p"] == 7);
    CHECK(w["size"] == 17);
    CHECK(w["closure_size"] == 78);
    CHECK(w["bound"] == 78);
    CHECK(w["spans"] == false);
    CHECK(run({"witness", "C7", "--p", "7"}).exit_code == exit_usage);
    CHECK(run({"witness", "C2xC4", "--p", "2"}).exit_code == exit_ok);
}

TEST_CASE("table")
{
    auto t = run_json({"table", "--orders", "3..8"});
    CHECK(count_of(t, "table-row") == 9);
    CHECK(first_of(t, "table-summary")["agree"] == 9);
    CHECK(t.front()["params"]["min_order"] == 3);
    CHECK(t.back()["exit_code"] == exit_ok);

    CHECK(run({"table", "--orders", "9..9"}).exit_code == exit_disagreement);
    CHECK(run({"--budget", "100", "table", "--orders", "13..13"}).exit_code == exit_budget);
    CHECK(run({"table", "--orders", "8..3"}).exit_code == exit_usage);
    CHECK(run({"table", "--orders", "3..8", "--max-order", "9"}).exit_code == exit_usage);

    TempDir dir;
    const auto csv = (dir.path / "t.csv").string();
    CHECK(run({"table", "--max-order", "4", "--out", csv}).exit_code == exit_ok);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "order,group,formula,case_label,oracle,agree,witness_size");
}

TEST_CASE("certify, write and validate")
{
    TempDir dir;
    const auto file = (dir.path / "certs.txt").string();
    auto recs = run_json({"certify", "C91", "--random", "5", "--method", "both", "--cert-out", file});
    CHECK(count_of(recs, "certificate") == 5);
    const auto summary = first_of(recs, "certify-summary");
    CHECK(summary["agree"] == 5);
    CHECK(summary["validated"] == 5);
    CHECK(first_of(recs, "file")["certificates"] == 10);
    CHECK(recs.back()["exit_code"] == exit_ok);

    auto v = run_json({"validate", file});
    CHECK(first_of(v, "validate-summary")["valid"] == 10);
    CHECK(v.back()["exit_code"] == exit_ok);

    // Replace the first witness with a wrong one.
    std::ifstream in(file);
    std::stringstream text;
    text << in.rdbuf();
    in.close();
    auto s = text.str();
    const auto pos = s.find("\n0: [");
    REQUIRE(pos != std::string::npos);
    s.insert(pos + 5, "1,");
    std::ofstream(file) << s;
    auto bad = run_json({"validate", file});
    CHECK(bad.back()["exit_code"] == exit_disagreement);
    CHECK(first_of(bad, "validation")["ok"] == false);

    std::ofstream(file) << "group: C91\nnonsense\n";
    CHECK(run({"validate", file}).exit_code == exit_usage);
    CHECK(run({"validate", (dir.path / "missing").string()}).exit_code == exit_usage);
}

TEST_CASE("certify inputs")
{
    auto one = run_json({"certify", "C91", "--set", "1,2,3", "--method", "dp"});
    CHECK(first_of(one, "certificate")["sigma_spans"] == false);
    CHECK(first_of(one, "certificate")["agree"] == true);
    CHECK(one.back()["exit_code"] == exit_disagreement);

    CHECK(run({"certify", "C15", "--random", "2"}).exit_code == exit_usage);
    CHECK(run({"certify", "C15", "--random", "2", "--size", "6", "--method", "dp"}).exit_code != exit_usage);
    CHECK(run({"certify", "C91", "--set", "0,1,2"}).exit_code == exit_usage);
    CHECK(run({"certify", "C91", "--set", "1,200"}).exit_code == exit_usage);
    CHECK(run({"certify", "C91"}).exit_code == exit_usage);
    CHECK(run({"certify", "C91", "--random", "1", "--set", "1"}).exit_code == exit_usage);

    TempDir dir;
    const auto sets = (dir.path / "sets.txt").string();
    std::ofstream(sets) << "# two sets\n1,2,4,8,16,32,64,5,10,20,40,80,3,6,12,24,48,7\n\n[1, 7, 8, 14, 15, 21, 22, 28, 29, 35, 42, 49, 56, 63, 70, 77, 84, 2]\n";
    auto recs = run_json({"certify", "C91", "--set-file", sets, "--method", "tracer"});
    CHECK(count_of(recs, "certificate") == 2);
    CHECK(first_of(recs, "certify-summary")["certified"] == 2);
}

TEST_CASE("usage handling")
{
    CHECK(run({}).exit_code == exit_usage);
    CHECK(run({"bogus"}).exit_code == exit_usage);
    CHECK(run({"formula"}).exit_code == exit_usage);
    CHECK(run({"formula", "Q8"}).exit_code == exit_usage);
    CHECK(run({"--format", "yaml", "formula", "C5"}).exit_code == exit_usage);
    CHECK(run({"--budget", "-3", "formula", "C5"}).exit_code == exit_usage);
    CHECK(run({"--threads", "0", "formula", "C5"}).exit_code == exit_usage);

    const auto help = run({"--help"});
    CHECK(help.exit_code == exit_ok);
    CHECK(help.payload.find("certify") != std::string::npos);
    CHECK(run({"certify", "--help"}).exit_code == exit_ok);

    // Global options are accepted after the subcommand too.
    const auto late = run({"formula", "C5", "--format", "json", "--threads", "2"});
    CHECK(late.exit_code == exit_ok);
    CHECK(records(late)[1]["value"] == 3);
}

TEST_CASE("results cache")
{
    TempDir dir;
    Environment env{dir.path.string()};
    const std::vector<std::string> args{"verify", "cauchy-davenport", "--p", "5"};

    const auto first = run(args, env);
    CHECK(first.header.find("cache=miss") != std::string::npos);
    const auto second = run(args, env);
    CHECK(second.header.find("cache=hit") != std::string::npos);
    CHECK(second.payload == first.payload);
    CHECK(second.exit_code == first.exit_code);

    auto bypass = args;
    bypass.push_back("--no-cache");
    CHECK(run(bypass, env).header.find("cache=off") != std::string::npos);

    // Exit codes replay too.
    const auto c9 = run({"oracle", "C9"}, env);
    const auto c9_again = run({"oracle", "C9"}, env);
    CHECK(c9_again.header.find("cache=hit") != std::string::npos);
    CHECK(c9_again.exit_code == exit_disagreement);
    CHECK(c9_again.payload == c9.payload);

    // Different parameters, different key.
    CHECK(run({"verify", "cauchy-davenport", "--p", "7"}, env).header.find("cache=miss") != std::string::npos);

    // A damaged entry is ignored and the command reruns.
    const auto store = dir.path / "results.jsonl";
    std::vector<std::string> lines;
    {
        std::ifstream in(store);
        for (std::string l; std::getline(in, l);)
            lines.push_back(l);
    }
    REQUIRE(lines.size() == 3);
    auto entry = Json::parse(lines[0]);
    entry["records"][1]["violations"] = 7;
    {
        std::ofstream out(store);
        out << entry.dump() << "\n" << lines[1] << "\n" << lines[2] << "\nnot json\n";
    }
    const auto rerun = run(args, env);
    CHECK(rerun.header.find("cache=miss") != std::string::npos);
    CHECK(rerun.payload == first.payload);

    // File-writing commands never touch the cache.
    const auto csv = (dir.path / "t.csv").string();
    CHECK(run({"table", "--max-order", "3", "--out", csv}, env).header.find("cache=bypass") != std::string::npos);
}

TEST_CASE("payload is independent of the thread count")
{
    const std::vector<std::vector<std::string>> commands{
        {"certify", "C209", "--random", "12", "--method", "both"},
        {"--seed", "5", "verify", "diderrich", "--p", "11", "--s", "3", "--sampled", "--samples", "2000"},
        {"verify", "ddsh", "--p", "11"},
        {"table", "--orders", "3..12"},
    };
    for (const auto & cmd : commands) {
        std::string reference;
        for (const char * threads : {"1", "4", "8"}) {
            auto args = cmd;
            args.insert(args.begin(), {"--threads", threads, "--format", "json"});
            const auto r = run(args);
            if (reference.empty())
                reference = r.payload;
            CHECK(r.payload == reference);
        }
    }
}
