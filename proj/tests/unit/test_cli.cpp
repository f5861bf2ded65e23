#include "run.hpp"

#include "confmatch/bifurcation.hpp"
#include "confmatch/leading_order.hpp"
#include "confmatch/spectral.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

using namespace confmatch;
using namespace confmatch::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("confmatch_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p)
{
    std::vector<std::vector<std::string>> rows;
    std::ifstream is(p);
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

RunConfig config(Command c, std::map<std::string, std::string> kv, const fs::path& dir)
{
    RunConfig cfg;
    cfg.command = c;
    cfg.params = std::move(kv);
    cfg.output_dir = dir;
    return cfg;
}

int call(std::vector<std::string> args)
{
    std::vector<char*> argv;
    static std::string prog = "confmatch";
    argv.push_back(prog.data());
    for (std::string& a : args) argv.push_back(a.data());
    return main_entry(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_SUITE("cli")
{
    TEST_CASE("command names")
    {
        for (const char* n : {"direct", "outer", "inner", "match", "branch", "leading", "scan-T"})
            CHECK(to_string(parse_command(n)) == n);
        CHECK_THROWS_AS(parse_command("plot"), ValidationError);
    }

    TEST_CASE("config file parsing")
    {
        const fs::path d = scratch("cfg");
        std::ofstream(d / "a.cfg") << "# sweep\n l = 1 \nh0=0.47   # tip\n\nM=64\n";
        const auto kv = read_config_file(d / "a.cfg");
        CHECK(kv.size() == 3);
        CHECK(kv.at("l") == "1");
        CHECK(kv.at("h0") == "0.47");
        CHECK(kv.at("M") == "64");
        std::ofstream(d / "bad.cfg") << "l 1\n";
        CHECK_THROWS_AS(read_config_file(d / "bad.cfg"), ValidationError);
        CHECK_THROWS_AS(read_config_file(d / "missing.cfg"), ValidationError);
    }

    TEST_CASE("empty profile is header only")
    {
        const fs::path d = scratch("empty");
        emit_profile(d / "p.csv", {});
        CHECK(slurp(d / "p.csv") == "theta,x,h,node_set\n");
    }

    TEST_CASE("profile rows sorted by x with round-trip precision")
    {
        const fs::path d = scratch("rows");
        const std::vector<ProfileRow> rows = {{0.3, 2.0 / 3.0, 0.1, "outer"}, {0.1, 1e-17, std::acos(-1.0), "inner"},
                                              {0.2, 0.5, -0.25, "inner"}};
        emit_profile(d / "p.csv", rows);
        const auto t = read_csv(d / "p.csv");
        REQUIRE(t.size() == 4);
        CHECK(std::stod(t[1][1]) == 1e-17);
        CHECK(std::stod(t[1][2]) == std::acos(-1.0));
        CHECK(std::stod(t[3][1]) == 2.0 / 3.0);
        CHECK(t[2][3] == "inner");
        CHECK(t[3][3] == "outer");
        emit_profile(d / "p.json", rows, Format::json);
        const auto j = read_json(d / "p.json");
        REQUIRE(j.size() == 3);
        CHECK(j[2]["x"].get<double>() == 2.0 / 3.0);
    }

    TEST_CASE("branch table and fold sidecar")
    {
        const fs::path d = scratch("branch");
        std::vector<double> grid;
        for (int k = 1; k < 100; ++k) grid.push_back(k / 100.0);
        Branch b = leading_branch(1.0, grid);
        b.fold = find_fold(b);
        BranchPoint bad;
        bad.h0 = 0.995;
        bad.converged = false;
        b.points.push_back(bad);
        emit_branch(d / "branch.csv", b);
        const auto t = read_csv(d / "branch.csv");
        CHECK(t[0] == std::vector<std::string>{"h0", "q", "stable", "converged", "method"});
        REQUIRE(t.size() == 101);
        CHECK(t[1][4] == "leading");
        CHECK(t.back()[3] == "false");
        double qmax = 0.0;
        for (std::size_t k = 1; k < t.size(); ++k) qmax = std::max(qmax, std::stod(t[k][1]));
        REQUIRE(fs::exists(fold_sidecar(d / "branch.csv")));
        const auto f = read_json(fold_sidecar(d / "branch.csv"));
        CHECK(f["q_star"].get<double>() >= qmax);
        CHECK(f["q_star"].get<double>() - qmax <= 1e-4);

        Branch mono = leading_branch(1.0, {0.1, 0.2, 0.3});
        mono.fold = find_fold(mono);
        emit_branch(d / "mono.csv", mono);
        CHECK_FALSE(fs::exists(fold_sidecar(d / "mono.csv")));
    }

    TEST_CASE("sha256 test vector")
    {
        const fs::path d = scratch("sha");
        std::ofstream(d / "abc", std::ios::binary) << "abc";
        CHECK(sha256_hex(d / "abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    TEST_CASE("direct run writes profile and manifest")
    {
        const fs::path d = scratch("direct");
        const RunOutcome r = run(config(Command::direct, {{"l", "1"}, {"h0", "0.47"}, {"M", "256"}}, d));
        REQUIRE(r.exit_code == 0);
        const auto t = read_csv(d / "profile.csv");
        REQUIRE(t.size() == 257);
        for (std::size_t k = 1; k < t.size(); ++k) CHECK(t[k][3] == "single");
        for (std::size_t k = 2; k < t.size(); ++k) CHECK(std::stod(t[k][1]) >= std::stod(t[k - 1][1]));
        const auto m = read_json(d / "manifest.json");
        CHECK(m["command"] == "direct");
        CHECK(m["config"]["h0"] == "0.47");
        CHECK(m["summary"]["converged"] == true);
        REQUIRE(m["files"].size() == 1);
        CHECK(m["files"][0]["name"] == "profile.csv");
        CHECK(m["files"][0]["sha256"] == sha256_hex(d / "profile.csv"));
    }

    TEST_CASE("identical configs give identical tables")
    {
        const fs::path a = scratch("det_a"), b = scratch("det_b");
        const std::map<std::string, std::string> kv = {{"hout0", "1"}, {"eps", "0.1"}};
        REQUIRE(run(config(Command::match, kv, a)).exit_code == 0);
        REQUIRE(run(config(Command::match, kv, b)).exit_code == 0);
        CHECK(slurp(a / "matched_profile.csv") == slurp(b / "matched_profile.csv"));
    }

    TEST_CASE("matched run tags both node sets")
    {
        const fs::path d = scratch("match");
        const RunOutcome r =
            run(config(Command::match, {{"hout0", "1"}, {"eps", "0.1"}, {"Mout", "128"}, {"Min", "32"}}, d));
        REQUIRE(r.exit_code == 0);
        std::set<std::string> tags;
        const auto t = read_csv(d / "matched_profile.csv");
        CHECK(t.size() == 65);
        for (std::size_t k = 1; k < t.size(); ++k) tags.insert(t[k][3]);
        CHECK(tags == std::set<std::string>{"inner", "outer"});
    }

    TEST_CASE("validation failures exit 1")
    {
        const fs::path d = scratch("invalid");
        CHECK(run(config(Command::direct, {{"l", "1"}, {"h0", "1.5"}}, d)).exit_code == 1);
        CHECK(run(config(Command::direct, {{"l", "1"}}, d)).exit_code == 1);
        CHECK(run(config(Command::direct, {{"l", "1"}, {"h0", "0.3"}, {"q", "2"}}, d)).exit_code == 1);
        CHECK(run(config(Command::direct, {{"h0", "0.3"}, {"M", "100"}}, d)).exit_code == 1);
        CHECK(run(config(Command::match, {{"hout0", "1"}, {"eps", "0.1"}, {"l", "1"}}, d)).exit_code == 1);
        CHECK_FALSE(fs::exists(d / "manifest.json"));
    }

    TEST_CASE("non-convergence exits 2 and still writes files")
    {
        const fs::path d = scratch("diverge");
        const RunOutcome r = run(config(Command::direct, {{"h0", "0.995"}, {"M", "64"}}, d));
        CHECK(r.exit_code == 2);
        CHECK(fs::exists(d / "profile.csv"));
        CHECK(read_json(d / "manifest.json")["summary"]["converged"] == false);
    }

    TEST_CASE("internal failures exit 3")
    {
        const fs::path d = scratch("internal");
        std::ofstream(d / "file") << "x";
        CHECK(run(config(Command::leading, {{"h0", "0.5"}}, d / "file" / "sub")).exit_code == 3);
    }

    TEST_CASE("flags override the config file")
    {
        const fs::path d = scratch("override");
        std::ofstream(d / "run.cfg") << "l=1\nh0=0.3\n";
        CHECK(call({"leading", "--config", (d / "run.cfg").string(), "--h0", "0.2", "-o", (d / "out").string()}) == 0);
        const auto m = read_json(d / "out" / "manifest.json");
        CHECK(m["config"]["h0"] == "0.2");
        CHECK(m["config"]["l"] == "1");
        const auto t = read_csv(d / "out" / "branch.csv");
        REQUIRE(t.size() == 2);
        CHECK(std::stod(t[1][1]) == leading_q(1.0, 0.2));
        CHECK(call({"leading", "--format", "xml"}) == 1);
        CHECK(call({"direct", "--h0"}) == 1);
    }

    TEST_CASE("json output mirrors the tables")
    {
        const fs::path d = scratch("json");
        RunConfig cfg = config(Command::outer, {{"hout0", "1"}}, d);
        cfg.format = Format::json;
        REQUIRE(run(cfg).exit_code == 0);
        const auto j = read_json(d / "profile.json");
        CHECK(j.size() == 128);
        CHECK(j[0]["node_set"] == "single");
    }

    TEST_CASE("inner and scan runs")
    {
        const fs::path d = scratch("inner");
        REQUIRE(run(config(Command::inner, {{"eta", "0.6"}, {"T", "0.5"}}, d / "one")).exit_code == 0);
        CHECK(read_json(d / "one" / "manifest.json")["summary"]["Q"].get<double>() > 0.0);
        CHECK(run(config(Command::inner, {{"eta", "0.6"}, {"hout0", "1"}}, d / "two")).exit_code == 1);
        REQUIRE(run(config(Command::scan_T, {{"hout0", "1"}, {"grid", "0.3,0.5,0.8"}}, d / "scan")).exit_code == 0);
        const auto t = read_csv(d / "scan" / "scan.csv");
        REQUIRE(t.size() == 4);
        CHECK(t[0][0] == "T");
        CHECK(read_json(d / "scan" / "fit.json")["slope"].is_number());
    }

    TEST_CASE("branch runs for each method")
    {
        const fs::path d = scratch("branches");
        REQUIRE(run(config(Command::branch, {{"method", "leading"}}, d / "lead")).exit_code == 0);
        CHECK(read_csv(d / "lead" / "branch.csv")[1][4] == "leading");
        CHECK(fs::exists(d / "lead" / "branch_fold.json"));
        REQUIRE(run(config(Command::branch, {{"method", "matched"}, {"hout0", "1"}, {"eps", "0.17,0.1,0.03"}}, d / "m"))
                    .exit_code == 0);
        CHECK(read_csv(d / "m" / "branch.csv").size() == 4);
        const RunOutcome r =
            run(config(Command::branch, {{"method", "direct"}, {"M", "64"}, {"grid", "0.3,0.5,0.995"}}, d / "dir"));
        CHECK(r.exit_code == 2);
        const auto t = read_csv(d / "dir" / "branch.csv");
        REQUIRE(t.size() == 4);
        CHECK(t[3][3] == "false");
        CHECK(run(config(Command::branch, {{"method", "spline"}}, d / "bad")).exit_code == 1);
    }
}
