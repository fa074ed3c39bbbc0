#include "expsumkit/expsum.hpp"
#include "expsumkit/remez.hpp"

#include "doctest_real.hpp"
#include <json.hpp>

#include <array>
#include <cstdlib>
#include <cstdio>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace esk;
using nlohmann::json;

namespace {
struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args)
{
    std::string cmd = std::string(ESK_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
    int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

// strtod, unlike stod, returns 0 or inf on underflow and overflow instead of throwing
double num(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

std::string tmp_path(const char* name) { return std::string("/tmp/esk_cli_test_") + name; }
} // namespace

TEST_CASE("rhohat-table")
{
    Run r = run("rhohat-table --r 2^-2,0.5 --transform phi,p1");
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("# expsumkit-csv v1", 0) == 0);
    auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == std::vector<std::string>{"r", "kind", "rho_hat", "rho_hat_sq"});
    CHECK(rows[2][1] == "p1");
    CHECK(num(rows[2][2]) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(num(rows[1][2]) == doctest::Approx(5.99070).epsilon(1e-5));

    Run d = run("rhohat-table");
    REQUIRE(d.code == 0);
    CHECK(csv_rows(d.out).size() == 1 + 20 * 5);
}

TEST_CASE("hr-table in JSON")
{
    Run r = run("hr-table --r 0.5 --format json");
    REQUIRE(r.code == 0);
    json doc = json::parse(r.out);
    CHECK(doc["meta"]["command"] == "hr-table");
    REQUIRE(doc["data"].size() == 1);
    CHECK(num(doc["data"][0]["h_r"].get<std::string>()) == doctest::Approx(1.7627472).epsilon(1e-7));
}

TEST_CASE("gauss-expsum JSON reads back bit for bit")
{
    Run r = run("gauss-expsum --m 5 --transform phi --a 2^-4 --eta 0.5 --bits 160 --format json");
    REQUIRE(r.code == 0);
    json doc = json::parse(r.out);
    PrecisionContext ctx(160);
    PrecisionScope ps(160);
    ExpSum back;
    for (const auto& row : doc["data"]) {
        back.t.emplace_back(row["t"].get<std::string>());
        back.c.emplace_back(row["c"].get<std::string>());
    }
    PowerKernel k{Real(0.5), Real(0.0625), Real(1)};
    Transform phi(TransformKind::Phi, Real(0.0625), ctx);
    ExpSum ref = gauss_expsum(k, phi, 5, default_mds(Real(0.0625)), ctx);
    REQUIRE(back.size() == 5);
    for (int v = 0; v < 5; ++v) {
        CHECK(back.t[v] == ref.t[v]);
        CHECK(back.c[v] == ref.c[v]);
    }
    Real mx(doc["meta"]["max_abs_error"].get<std::string>());
    Real sb(doc["meta"]["stenger_bound"].get<std::string>());
    CHECK(mx > 0);
    CHECK(mx < sb);
}

TEST_CASE("gauss-expsum curve with expansion columns")
{
    const std::string curve = tmp_path("curve.csv");
    Run r = run("gauss-expsum --m 2 --transform phi --curve " + curve + " --expansion-terms 6 --out " +
                tmp_path("params.csv"));
    REQUIRE(r.code == 0);
    FILE* f = std::fopen(curve.c_str(), "r");
    REQUIRE(f);
    std::string text;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), f)) > 0) text.append(buf.data(), n);
    std::fclose(f);
    auto rows = csv_rows(text);
    REQUIRE(rows.size() > 100);
    CHECK(rows[0] == std::vector<std::string>{"x", "E", "partial_sum", "envelope"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        double e = num(rows[i][1]), p = num(rows[i][2]), env = num(rows[i][3]);
        CHECK(std::fabs(e - p) <= env * (1 + 1e-12));
    }
}

TEST_CASE("best-expsum writes 2M+1 alternation points")
{
    const std::string alt = tmp_path("alt.csv");
    Run r = run("best-expsum --m 3 --alt-out " + alt);
    REQUIRE(r.code == 0);
    auto rows = csv_rows(r.out);
    CHECK(rows.size() == 1 + 3);
    FILE* f = std::fopen(alt.c_str(), "r");
    REQUIRE(f);
    std::string text;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), f)) > 0) text.append(buf.data(), n);
    std::fclose(f);
    CHECK(csv_rows(text).size() == 1 + 7);
}

TEST_CASE("phi-sample endpoints")
{
    Run r = run("phi-sample --r 0.25 --points 5 --format json");
    REQUIRE(r.code == 0);
    json doc = json::parse(r.out);
    REQUIRE(doc["data"].size() == 5);
    CHECK(num(doc["data"][0]["phi"].get<std::string>()) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(num(doc["data"][2]["phi"].get<std::string>()) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(num(doc["data"][4]["phi"].get<std::string>()) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("basis-sample scaled values stay within one")
{
    Run r = run("basis-sample --r 0.5 --nmax 4 --per-decade 8");
    REQUIRE(r.code == 0);
    auto rows = csv_rows(r.out);
    REQUIRE(rows.size() > 10);
    CHECK(rows[0] == std::vector<std::string>{"x", "n", "chi", "scaled"});
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::fabs(num(rows[i][3])) <= 1 + 1e-12);
}

TEST_CASE("emh-scan stays below its bound")
{
    Run r = run("emh-scan --m 3 --points 9 --route det");
    REQUIRE(r.code == 0);
    auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 1 + 3 * 9);
    CHECK(rows[0] == std::vector<std::string>{"M", "h", "emh_rel", "bound"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        double v = num(rows[i][2]), b = num(rows[i][3]);
        CHECK(v > 0);
        CHECK(v <= b);
    }
}

TEST_CASE("mre-scan")
{
    Run r = run("mre-scan --m 3 --transform p2 --mds 24,48,96");
    REQUIRE(r.code == 0);
    auto rows = csv_rows(r.out);
    CHECK(rows.size() == 1 + 3);
}

TEST_CASE("exit codes")
{
    CHECK(run("").code == 2);
    CHECK(run("no-such-command").code == 2);
    CHECK(run("gauss-expsum --m 0").code == 2);
    CHECK(run("gauss-expsum --m 2 --a 2").code == 2);
    CHECK(run("gauss-expsum --m 2 --transform zzz").code == 2);
    CHECK(run("hr-table --r 1.5").code == 2);
    CHECK(run("gauss-expsum --m 2 --bits 32").code == 2);
    CHECK(run("emh-scan --m 20 --bits 64 --route det --points 2").code == 3);
    CHECK(run("--help").code == 0);
}
