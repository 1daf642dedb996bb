#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli.hpp"
#include "superrad/geometry.hpp"

using nlohmann::json;
using superrad::kPi;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = superrad::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST(Cli, ParseAngle) {
    EXPECT_DOUBLE_EQ(superrad::cli::parse_angle("0.4pi"), 0.4 * kPi);
    EXPECT_DOUBLE_EQ(superrad::cli::parse_angle("pi"), kPi);
    EXPECT_DOUBLE_EQ(superrad::cli::parse_angle("-pi"), -kPi);
    EXPECT_DOUBLE_EQ(superrad::cli::parse_angle("0.5*pi"), 0.5 * kPi);
    EXPECT_DOUBLE_EQ(superrad::cli::parse_angle("1.25"), 1.25);
    EXPECT_THROW(superrad::cli::parse_angle("abc"), std::runtime_error);
    EXPECT_THROW(superrad::cli::parse_angle("1.2x"), std::runtime_error);
}

TEST(Cli, SlopeJson) {
    const auto r = run({"slope", "--family", "line", "--n", "10", "--d", "0.2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["N"], 10);
    EXPECT_EQ(j["superradiant"], true);
    EXPECT_TRUE(j["k_f"].is_null());
    EXPECT_EQ(j["provenance"]["subcommand"], "slope");
}

TEST(Cli, SlopeDirectionalPartialAndSecond) {
    auto r = run({"slope", "--n", "6", "--d", "0.3", "--kind", "directional", "--phi", "0.4pi", "--alpha",
                  "0.6pi", "--ki", "0,0,1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_FALSE(json::parse(r.out)["k_f"].is_null());
    r = run({"slope", "--n", "6", "--d", "0.3", "--second"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_FALSE(json::parse(r.out)["gddot0"].is_null());
    EXPECT_EQ(run({"slope", "--n", "6", "--alpha", "0.5pi", "--second"}).code, 2);
    EXPECT_EQ(run({"slope", "--n", "6", "--alpha", "0.5pi", "--reading", "other"}).code, 2);
}

TEST(Cli, ThresholdCubic) {
    const auto r = run({"threshold", "--dim", "3", "--d", "1.0", "--n1-max", "30"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["n1_threshold"], 14);
    EXPECT_EQ(j["kind"], "total");
}

TEST(Cli, FitAndLimit) {
    auto r = run({"fit", "--dim", "3", "--d", "1.0", "--n1-lo", "6", "--n1-hi", "20"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(json::parse(r.out).contains("D_times_d2"));
    r = run({"limit1d", "--d", "0.3", "--nu-max", "1000"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_FALSE(json::parse(r.out)["tail_bound"].is_null());
}

TEST(Cli, OracleExitCodes) {
    auto r = run({"oracle", "--n", "3", "--seed", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["pass"], true);
    // an impossible tolerance is reported as a failed consistency check
    r = run({"oracle", "--n", "3", "--seed", "4", "--tol", "1e-15"});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(run({"oracle", "--n", "9"}).code, 2);
}

TEST(Cli, MapWritesCsvAndPgm) {
    const auto dir = std::filesystem::temp_directory_path();
    const auto csv = dir / "superrad_cli_map.csv";
    const auto pgm = dir / "superrad_cli_map.pgm";
    const std::vector<std::string> args{"map", "--family", "line", "--kind", "directional", "--phi", "0.4pi",
                                        "--n-min", "2", "--n-max", "12", "--d-min", "0.1", "--d-max", "1.0",
                                        "--d-step", "0.1", "--csv", csv.string(), "--pgm", pgm.string()};
    ASSERT_EQ(run(args).code, 0);
    const std::string first_csv = slurp(csv);
    const std::string first_pgm = slurp(pgm);
    EXPECT_EQ(first_pgm.rfind("P2\n", 0), 0u);
    EXPECT_NE(first_pgm.find("\n11 10\n255\n"), std::string::npos);
    EXPECT_NE(first_csv.find("x,y,value,mask\n"), std::string::npos);
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(slurp(csv), first_csv);
    EXPECT_EQ(slurp(pgm), first_pgm);
    std::filesystem::remove(csv);
    std::filesystem::remove(pgm);
}

TEST(Cli, CoupleAndThinToStdout) {
    auto r = run({"couple", "--n", "3", "--d", "0.4"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("n,m,Gamma,Omega\n"), std::string::npos);
    r = run({"thin", "--n", "50", "--d", "0.5", "--p", "0.5", "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("# seed=3\n"), std::string::npos);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"--bogus"}).code, 2);
    EXPECT_EQ(run({"slope", "--family", "hexagon"}).code, 2);
    EXPECT_EQ(run({"slope", "--phi", "x", "--kind", "directional"}).code, 2);
    EXPECT_EQ(run({"map", "--axes", "n-n"}).code, 2);
    EXPECT_EQ(run({"slope", "--cloud", "/nonexistent/cloud.txt"}).code, 2);
    EXPECT_EQ(run({"slope", "--n", "4", "--out", "/nonexistent/dir/out.json"}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
}
