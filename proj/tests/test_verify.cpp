#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "mfhawkes/verify.hpp"
#include "support.hpp"

using namespace mfh;

namespace
{
//! Reduced ensemble sizes so a whole suite runs in seconds
std::string small_config(std::string const& family, std::string const& params,
                         std::string const& enabled)
{
    return R"({
  "model": {"family": ")" + family + R"(", "params": )" + params + R"(},
  "grid": {"T": 5.0, "n_steps": 250},
  "ensemble": {"N": [20, 40, 80], "replicates": 60, "master_seed": 99,
               "clt_N": 100, "clt_replicates": 120, "limit_draws": 300,
               "reference_draws": 300, "cox_replicates": 100},
  "tests": {"enabled": )" + enabled + R"(, "alpha": 0.01,
            "tolerances": {"closed_form": 1e-4, "closed_form_steps": 400,
                           "route_seeds": 5}}
})";
}

std::string report_csv(TestReport const& r)
{
    std::ostringstream os;
    write_report_csv(os, r);
    return os.str();
}

std::string report_text(TestReport const& r)
{
    std::ostringstream os;
    write_report_text(os, r);
    return os.str();
}

#ifdef MFHAWKES_CLI
int run_cli(std::string const& args)
{
    std::string const cmd = std::string(MFHAWKES_CLI) + " " + args + " >/dev/null 2>&1";
    int const status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

std::filesystem::path write_file(std::filesystem::path const& p, std::string const& text)
{
    std::ofstream(p) << text;
    return p;
}
}  // namespace

TEST_SUITE("verify")
{
TEST_CASE("check catalogue")
{
    auto const& checks = suite_checks();
    CHECK(checks.size() == 22);
    std::set<std::string> names;
    std::size_t hypotheses = 0;
    for (auto const& c : checks)
    {
        names.insert(c.name);
        hypotheses += c.hypothesis;
        CHECK_FALSE(c.anchor.empty());
    }
    CHECK(names.size() == checks.size());
    CHECK(hypotheses == 8);
    CHECK(checks.front().name == "lln_decay");
    CHECK(to_string(CheckStatus::documented) == "documented");
}

TEST_CASE("nothing enabled skips everything")
{
    auto const cfg = parse_config(small_config("sigmoid_erlang", "[2, 2]", "[]"));
    auto const r = run_verification_suite(cfg);
    CHECK(r.passed);
    CHECK_FALSE(r.rerun);
    for (auto const& c : r.checks)
        CHECK(c.status == CheckStatus::skip);
}

TEST_CASE("constant rate passes the whole suite")
{
    auto const cfg = parse_config(small_config("constant_rate", "[1.0]", "[\"all\"]"));
    auto const r = run_verification_suite(cfg);
    INFO(report_text(r));
    CHECK(r.hard_failures == 0);
    CHECK(r.passed);
}

TEST_CASE("reports do not depend on the worker count")
{
    auto const cfg = parse_config(small_config(
        "sigmoid_erlang", "[2, 2]",
        R"(["lln_decay", "clt_Y_half", "route_agreement", "cox_variance_ratio",
            "multiclass_reduction"])"));
    auto const a = run_verification_suite(cfg, 1);
    auto const b = run_verification_suite(cfg, 3);
    CHECK(report_csv(a) == report_csv(b));
    CHECK(report_text(a) == report_text(b));
    CHECK(report_csv(a).rfind("check,anchor,kind,statistic,relation,threshold,status,detail",
                              0)
          == 0);
}

TEST_CASE("failed attempt is rerun once with a new seed")
{
    auto cfg = parse_config(small_config("sigmoid_erlang", "[2, 2]", R"(["route_agreement"])"));
    cfg.tests.tol.route_gap = 1e-300;
    auto const r = run_verification_suite(cfg);
    CHECK(r.rerun);
    CHECK_FALSE(r.first_attempt.empty());
    CHECK(r.master_seed == cfg.seed().reseeded(1).master_seed);
    CHECK(r.hard_failures == 1);
    CHECK_FALSE(r.passed);
    CHECK(report_text(r).find("rerun: yes") != std::string::npos);
}

#ifdef MFHAWKES_CLI
TEST_CASE("command-line exit codes")
{
    auto const dir = test::scratch_dir("cli");
    auto const good = write_file(dir / "good.json",
                                 small_config("sigmoid_erlang", "[2, 2]", "[]"));
    auto const bad = write_file(dir / "bad.json", R"({"grid": {"T": -1}})");
    auto const unknown = write_file(
        dir / "unknown.json",
        small_config("sigmoid_erlang", "[2, 2]", "[]").replace(1, 0, "\"extra\": 1,"));

    CHECK(run_cli("solve-limit --config " + good.string() + " --out " + (dir / "o").string())
          == 0);
    CHECK(std::filesystem::exists(dir / "o" / "limit.csv"));
    CHECK(run_cli("solve-limit --config " + bad.string()) == 2);
    CHECK(run_cli("solve-limit --config " + unknown.string()) == 2);
    CHECK(run_cli("solve-limit --config " + (dir / "missing.json").string()) == 2);
    CHECK(run_cli("regimes --regime chaotic --config " + good.string()) == 2);
    CHECK(run_cli("cox-approx --replicates 10 --config " + good.string()) == 2);
    CHECK(run_cli("no-such-command") == 2);
    CHECK(run_cli("verify --config " + good.string() + " --out " + (dir / "v").string())
          == 0);
    CHECK(std::filesystem::exists(dir / "v" / "report.csv"));
    CHECK(std::filesystem::exists(dir / "v" / "report_timing.csv"));
}
#endif
}
