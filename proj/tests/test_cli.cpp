#include "doctest.h"

#include "cli/commands.hpp"
#include "cli/reference_tables.hpp"

#include "json.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct cli_result {
    int exit_code = -1;
    std::string out;
    std::string err;
};

cli_result run_cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    cli_result r;
    r.exit_code = qtail::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string run_binary(const std::string& args, int& exit_code) {
    const std::string cmd = std::string(QTAIL_BINARY_PATH) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        out.append(buf.data(), got);
    }
    const int status = pclose(pipe);
    exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("csv header is exact and stable") {
    const cli_result plain = run_cli({"busy-period", "--lambda", "1",
                                      "--service", "0.5", "--dt", "0.01",
                                      "--dp", "0.01", "--t", "1,2"});
    CHECK(plain.exit_code == 0);
    CHECK(plain.out.rfind("t,cdf,tau\n", 0) == 0);

    const cli_result bounds = run_cli({"busy-period", "--lambda", "1",
                                       "--service", "0.5", "--dt", "0.01",
                                       "--dp", "0.01", "--t", "1,2",
                                       "--with-bounds"});
    CHECK(bounds.out.rfind("t,cdf,tau,bound_chebyshev,bound_atom\n", 0) == 0);

    const cli_result exact = run_cli({"busy-cycle", "--lambda", "1",
                                      "--service", "0", "--dt", "0.01",
                                      "--dp", "0.01", "--t", "1,2"});
    CHECK(exact.out.rfind("t,cdf,tau,exact_exponential\n", 0) == 0);

    // Lines end with a bare LF; no CR anywhere.
    CHECK(plain.out.find('\r') == std::string::npos);
}

TEST_CASE("json document carries manifest, rows, derived in order") {
    const cli_result r = run_cli({"busy-cycle", "--lambda", "1", "--service",
                                  "1", "--dt", "0.05", "--dp", "0.01", "--t",
                                  "2,3", "--format", "json"});
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::ordered_json::parse(r.out);
    std::vector<std::string> keys;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        keys.push_back(it.key());
    }
    REQUIRE(keys == std::vector<std::string>{"manifest", "rows", "derived"});

    CHECK(doc["manifest"]["subcommand"] == "busy-cycle");
    CHECK(doc["manifest"]["tool_version"] == "1.0.0");
    CHECK(doc["manifest"]["timestamp"].is_null());
    CHECK(doc["manifest"]["parameters"]["lambda"] == 1.0);

    std::vector<std::string> dkeys;
    for (auto it = doc["derived"].begin(); it != doc["derived"].end(); ++it) {
        dkeys.push_back(it.key());
    }
    CHECK(dkeys == std::vector<std::string>{"K", "D", "omega", "N", "L", "U"});
    CHECK(doc["rows"].size() == 2);
    CHECK(doc["rows"][0]["t"] == 2.0);
    CHECK(doc["rows"][0].contains("cdf"));
    CHECK(doc["rows"][0].contains("tau"));
    CHECK(doc["rows"][0].contains("clamped"));
}

TEST_CASE("derived parameters recompute bit-exactly from the manifest echo") {
    const cli_result r = run_cli({"busy-period", "--lambda", "2", "--service",
                                  "0.5", "--dt", "0.02", "--dp", "0.005",
                                  "--l-exponent", "4", "--t", "1,2",
                                  "--format", "json"});
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::ordered_json::parse(r.out);
    const auto& p = doc["manifest"]["parameters"];
    const qtail::mdinf::queue_params q(p["lambda"].get<double>(),
                                       p["service"].get<double>());
    const qtail::mdinf::window w = qtail::mdinf::truncation_window(
        q, p["dp"].get<double>(), p["l_exponent"].get<int>(),
        qtail::mdinf::target_kind::busy_period);
    const qtail::pab::inversion_spec spec{p["dt"].get<double>(),
                                          p["dp"].get<double>(), w.lower,
                                          w.upper};
    const qtail::pab::derived_params d = qtail::pab::derive_params(spec);
    CHECK(doc["derived"]["L"].get<double>() == w.lower);
    CHECK(doc["derived"]["U"].get<double>() == w.upper);
    CHECK(doc["derived"]["K"].get<double>() == d.k);
    CHECK(doc["derived"]["D"].get<double>() == d.d);
    CHECK(doc["derived"]["omega"].get<double>() == d.omega);
    CHECK(doc["derived"]["N"].get<std::int64_t>() == d.n_terms);
}

TEST_CASE("csv and json agree numerically") {
    const std::vector<std::string> base{"busy-period", "--lambda", "1",
                                        "--service", "1",    "--dt", "0.05",
                                        "--dp",      "0.01", "--t",  "2,3,4"};
    auto with_format = [&](const char* fmt) {
        std::vector<std::string> args = base;
        args.push_back("--format");
        args.push_back(fmt);
        return run_cli(args);
    };
    const cli_result csv = with_format("csv");
    const cli_result json = with_format("json");
    REQUIRE(csv.exit_code == 0);
    REQUIRE(json.exit_code == 0);

    const auto doc = nlohmann::ordered_json::parse(json.out);
    std::istringstream lines(csv.out);
    std::string line;
    std::getline(lines, line); // header
    for (const auto& row : doc["rows"]) {
        REQUIRE(std::getline(lines, line));
        std::istringstream cells(line);
        std::string cell;
        std::getline(cells, cell, ',');
        CHECK(std::stod(cell) == row["t"].get<double>());
        std::getline(cells, cell, ',');
        CHECK(std::stod(cell) == row["cdf"].get<double>());
        std::getline(cells, cell, ',');
        CHECK(std::stod(cell) == row["tau"].get<double>());
    }
}

TEST_CASE("t-range expands to the same bytes as an explicit list") {
    const cli_result listed = run_cli({"busy-cycle", "--lambda", "1",
                                       "--service", "1", "--dt", "0.05",
                                       "--dp", "0.01", "--t", "2,2.5,3,3.5,4"});
    const cli_result ranged = run_cli({"busy-cycle", "--lambda", "1",
                                       "--service", "1", "--dt", "0.05",
                                       "--dp", "0.01", "--t-range", "2:4:0.5"});
    REQUIRE(listed.exit_code == 0);
    REQUIRE(ranged.exit_code == 0);
    CHECK(listed.out == ranged.out);
}

TEST_CASE("reruns are byte-identical") {
    const std::vector<std::string> args{"busy-period", "--lambda", "1",
                                        "--service", "1",    "--dt", "0.05",
                                        "--dp",      "0.01", "--t",  "2,3",
                                        "--format",  "json"};
    const cli_result one = run_cli(args);
    const cli_result two = run_cli(args);
    CHECK(one.out == two.out);

    const std::vector<std::string> sim{"simulate",  "--lambda", "1",
                                       "--service", "1",        "--kind",
                                       "busy-period", "--samples", "2000",
                                       "--seed",    "9"};
    CHECK(run_cli(sim).out == run_cli(sim).out);
}

TEST_CASE("validation failures exit 2 and name the flag") {
    const cli_result bad_dp = run_cli({"busy-period", "--lambda", "1",
                                       "--service", "1", "--dt", "0.01",
                                       "--dp", "0.7", "--t", "1"});
    CHECK(bad_dp.exit_code == 2);
    CHECK(bad_dp.err.find("--dp") != std::string::npos);
    CHECK(bad_dp.err.find("(0, 0.5)") != std::string::npos);

    const cli_result bad_service = run_cli({"busy-period", "--lambda", "1",
                                            "--service", "0", "--dt", "0.01",
                                            "--dp", "0.01", "--t", "1"});
    CHECK(bad_service.exit_code == 2);
    CHECK(bad_service.err.find("--service") != std::string::npos);

    const cli_result bad_lambda = run_cli({"moments", "--lambda", "-1",
                                           "--service", "1"});
    CHECK(bad_lambda.exit_code == 2);
    CHECK(bad_lambda.err.find("--lambda") != std::string::npos);

    const cli_result both_grids = run_cli(
        {"busy-period", "--lambda", "1", "--service", "1", "--dt", "0.01",
         "--dp", "0.01", "--t", "1", "--t-range", "1:2:1"});
    CHECK(both_grids.exit_code == 2);

    const cli_result no_grid = run_cli({"busy-period", "--lambda", "1",
                                        "--service", "1", "--dt", "0.01",
                                        "--dp", "0.01"});
    CHECK(no_grid.exit_code == 2);
    CHECK(no_grid.err.find("--t") != std::string::npos);

    const cli_result unknown = run_cli({"frobnicate"});
    CHECK(unknown.exit_code == 2);

    const cli_result bad_range = run_cli({"busy-period", "--lambda", "1",
                                          "--service", "1", "--dt", "0.01",
                                          "--dp", "0.01", "--t-range", "5:1:1"});
    CHECK(bad_range.exit_code == 2);
}

TEST_CASE("moments subcommand output") {
    const cli_result r = run_cli(
        {"moments", "--lambda", "1", "--service", "1", "--recursion"});
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::ordered_json::parse(r.out);
    const double e = std::exp(1.0);
    CHECK(doc["busy_period"]["mean"].get<double>() ==
          doctest::Approx(e - 1.0).epsilon(1e-12));
    CHECK(doc["busy_cycle"]["mean"].get<double>() ==
          doctest::Approx(e).epsilon(1e-12));
    CHECK(doc["busy_cycle"]["variance"].get<double>() ==
          doctest::Approx(e * e - 2.0 * e).epsilon(1e-12));
    CHECK(doc["recursion"]["max_relative_gap"].get<double>() < 1e-9);
    CHECK(doc["recursion"]["busy_period_raw"].size() == 2);

    const cli_result bad_order = run_cli(
        {"moments", "--lambda", "1", "--service", "1", "--order", "11"});
    CHECK(bad_order.exit_code == 2);
    CHECK(bad_order.err.find("--order") != std::string::npos);
}

TEST_CASE("simulate subcommand reports the atom and honors the seed") {
    const cli_result r = run_cli({"simulate", "--lambda", "1", "--service",
                                  "1", "--kind", "busy-period", "--samples",
                                  "20000", "--seed", "42", "--t", "1,2"});
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::ordered_json::parse(r.out);
    CHECK(doc["summary"]["samples"] == 20000);
    CHECK(doc["summary"]["seed"] == 42);
    const double atom = doc["summary"]["atom_fraction"].get<double>();
    CHECK(atom == doctest::Approx(std::exp(-1.0)).epsilon(0.03));
    // F(a) equals the atom mass for the busy period.
    CHECK(doc["rows"][0]["ecdf"].get<double>() == atom);

    const cli_result cycle = run_cli({"simulate", "--lambda", "1", "--service",
                                      "1", "--kind", "busy-cycle",
                                      "--samples", "1000", "--seed", "1"});
    const auto cdoc = nlohmann::ordered_json::parse(cycle.out);
    CHECK_FALSE(cdoc["summary"].contains("atom_fraction"));

    const cli_result csv = run_cli({"simulate", "--lambda", "1", "--service",
                                    "1", "--kind", "busy-period", "--samples",
                                    "1000", "--seed", "42", "--format", "csv"});
    CHECK(csv.out.rfind("key,value\n", 0) == 0);
    CHECK(csv.out.find("atom_fraction,") != std::string::npos);

    // Degenerate service: every busy period is the zero-length one.
    const cli_result zero = run_cli({"simulate", "--lambda", "1", "--service",
                                     "0", "--kind", "busy-period", "--samples",
                                     "500", "--seed", "3"});
    const auto zdoc = nlohmann::ordered_json::parse(zero.out);
    CHECK(zdoc["summary"]["mean"].get<double>() == 0.0);
    CHECK(zdoc["summary"]["variance"].get<double>() == 0.0);
}

TEST_CASE("reproduce-table writes files and a faithful report") {
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "qtail_test_rt31";
    std::filesystem::remove_all(dir);
    const cli_result r =
        run_cli({"reproduce-table", "3.1", "--output", dir.string()});
    REQUIRE(r.exit_code == 0);
    const auto csv_path = dir / "table_3_1.csv";
    const auto report_path = dir / "report_3_1.json";
    REQUIRE(std::filesystem::exists(csv_path));
    REQUIRE(std::filesystem::exists(report_path));

    const auto report = nlohmann::ordered_json::parse(slurp(report_path));
    CHECK(report["gates"]["cdf"]["pass"].get<bool>());
    CHECK(report["gates"]["cdf"]["max_abs_deviation"].get<double>() < 0.01);
    CHECK(report["gates"]["bound_chebyshev"]["pass"].get<bool>());
    CHECK(report["gates"]["bound_atom"]["pass"].get<bool>());
    CHECK(report["moment_recovery"]["mean"]["relative_error"].get<double>() <
          0.05);
    CHECK(report["derived"]["N"] == 46467);
    CHECK(report["known_misprints"].size() == 2);

    const std::string csv = slurp(csv_path);
    CHECK(csv.find("known_misprint") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("reproduce-table lists misprints that sit outside the rows") {
    // Table 4.2's flagged cell is the published VAR[Z] line under the
    // table, not a t-indexed row; it must show up with a null t and leave
    // the row gates untouched.
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "qtail_test_rt42";
    std::filesystem::remove_all(dir);
    const cli_result r =
        run_cli({"reproduce-table", "4.2", "--output", dir.string()});
    REQUIRE(r.exit_code == 0);
    const auto report =
        nlohmann::ordered_json::parse(slurp(dir / "report_4_2.json"));
    REQUIRE(report["known_misprints"].size() == 1);
    CHECK(report["known_misprints"][0]["column"] == "VAR[Z]");
    CHECK(report["known_misprints"][0]["t"].is_null());
    CHECK(report["gates"]["cdf"]["pass"].get<bool>());
    CHECK(report["gates"]["cdf"]["excluded_misprint"].empty());
    std::filesystem::remove_all(dir);
}

TEST_CASE("reproduce-table rejects unknown ids") {
    const cli_result r = run_cli({"reproduce-table", "9.9", "--output", "/tmp"});
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("9.9") != std::string::npos);
}

TEST_CASE("every published table is registered") {
    for (const char* id : {"3.1", "3.2", "3.3", "4.1", "4.2", "4.3", "4.4"}) {
        const auto* t = qtail::cli::find_reference_table(id);
        REQUIRE(t != nullptr);
        CHECK_FALSE(t->rows.empty());
    }
    CHECK(qtail::cli::find_reference_table("5.1") == nullptr);
}

TEST_CASE("the installed binary matches the in-process entry point") {
    int code = -1;
    const std::string out = run_binary(
        "busy-cycle --lambda 1 --service 0 --dt 0.01 --dp 0.01 --t 1,2", code);
    CHECK(code == 0);
    const cli_result in_process =
        run_cli({"busy-cycle", "--lambda", "1", "--service", "0", "--dt",
                 "0.01", "--dp", "0.01", "--t", "1,2"});
    CHECK(out == in_process.out);

    int help_code = -1;
    (void)run_binary("--help", help_code);
    CHECK(help_code == 0);

    int bad_code = -1;
    (void)run_binary("busy-period --lambda 1 --service 1 --dt 0.01 --dp 0.9 --t 1",
                     bad_code);
    CHECK(bad_code == 2);
}

TEST_CASE("output lands in the file given by --output") {
    const std::filesystem::path path =
        std::filesystem::temp_directory_path() / "qtail_test_out.csv";
    std::filesystem::remove(path);
    const cli_result r = run_cli({"busy-cycle", "--lambda", "1", "--service",
                                  "0", "--dt", "0.01", "--dp", "0.01", "--t",
                                  "1", "--output", path.string()});
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.empty());
    const std::string content = slurp(path);
    CHECK(content.rfind("t,cdf,tau,exact_exponential\n", 0) == 0);
    std::filesystem::remove(path);
}

TEST_CASE("plot sidecar holds two whitespace-separated columns") {
    const std::filesystem::path path =
        std::filesystem::temp_directory_path() / "qtail_test_plot.dat";
    std::filesystem::remove(path);
    const cli_result r = run_cli({"busy-cycle", "--lambda", "1", "--service",
                                  "0", "--dt", "0.01", "--dp", "0.01", "--t",
                                  "1,2", "--plot", path.string()});
    REQUIRE(r.exit_code == 0);
    // Data only, one "t cdf" pair per line: directly loadable by plotters.
    std::istringstream in(slurp(path));
    double t = 0.0;
    double cdf = 0.0;
    REQUIRE((in >> t >> cdf));
    CHECK(t == 1.0);
    CHECK(cdf == doctest::Approx(0.632119).epsilon(1e-4));
    REQUIRE((in >> t >> cdf));
    CHECK(t == 2.0);
    std::filesystem::remove(path);
}
