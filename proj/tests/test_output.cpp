#include <doctest.h>

#include <filesystem>
#include <limits>

#include "casimir/output.hpp"
#include "casimir/scenario.hpp"

using namespace casimir;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("csv format") {
    const std::string csv = format_csv({{"t(s)", {0.0, 0.1}}, {"x_S(m)", {1e-9, -2.5e-9}}});
    CHECK(csv ==
          "#t(s),x_S(m)\n"
          "0.0000000000000000e+00,1.0000000000000001e-09\n"
          "1.0000000000000001e-01,-2.5000000000000001e-09\n");
    CHECK_THROWS(format_csv({{"a", {1.0}}, {"b", {1.0, 2.0}}}));
}

TEST_CASE("svg plot contract") {
    PlotSpec p{"two points", "time (s)", "x (m)", false, {{"s", {0.0, 1.0}, {1.0, 2.0}}}, {}};
    const std::string svg = emit_plot(p);
    CHECK(count(svg, "<polyline") == 1);
    CHECK(svg.find("time (s)") != std::string::npos);
    CHECK(svg.find("x (m)") != std::string::npos);
    CHECK(emit_plot(p) == svg);

    PlotSpec empty{"e", "x", "y", false, {{"s", {}, {}}}, {}};
    CHECK_THROWS(emit_plot(empty));

    const double nan = std::numeric_limits<double>::quiet_NaN();
    PlotSpec lg{"log", "tau2f (s)", "amplitude (m)", true,
                {{"a", {0, 1, 2, 3, 4, 5}, {nan, 2e-9, 3e-9, -1.0, 5e-9, 6e-9}}}, {{0.0, "pull-in"}}};
    const std::string s2 = emit_plot(lg);
    CHECK(count(s2, "<polyline") == 2);  // broken at the non-renderable value
    CHECK(s2.find("stroke=\"red\"") != std::string::npos);
    CHECK(s2.find("nan") == std::string::npos);
}

TEST_CASE("sha256 known answer") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("scenario outputs are reproducible") {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "casimir_repro_test";
    fs::remove_all(root);
    ScenarioSpec s = builtin_scenario("fig3");
    s.points = 201;
    const auto a = run_scenario(s, {(root / "a").string(), 1, true});
    const auto b = run_scenario(s, {(root / "b").string(), 1, true});
    REQUIRE(a.files.size() == b.files.size());
    REQUIRE(a.files.size() >= 4);
    for (std::size_t i = 0; i < a.files.size(); ++i) {
        CHECK(a.files[i].path == b.files[i].path);
        CHECK(a.files[i].sha256 == b.files[i].sha256);
        CHECK(read_file((root / "a" / a.files[i].path).string()) == read_file((root / "b" / b.files[i].path).string()));
    }
    // the echoed config reproduces the run
    const auto c = run_scenario(parse_config(a.config_echo), {(root / "c").string(), 1, true});
    for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(a.files[i].sha256 == c.files[i].sha256);
    fs::remove_all(root);
}
