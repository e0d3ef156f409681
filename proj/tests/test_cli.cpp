#include "fracobs/config.hpp"
#include "fracobs/expression.hpp"
#include "fracobs/runner.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace fracobs;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool mentions(const ConfigError& e, const std::string& needle) {
    for (const auto& m : e.errors()) {
        if (m.find(needle) != std::string::npos) {
            return true;
        }
    }
    return false;
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("fracobs_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("expression arithmetic and precedence") {
    CHECK(Expression::parse("1 + 2 * 3")(0.0) == doctest::Approx(7.0));
    CHECK(Expression::parse("2^3^2")(0.0) == doctest::Approx(512.0));
    CHECK(Expression::parse("-2^2")(0.0) == doctest::Approx(-4.0));
    CHECK(Expression::parse("(1 - x) * (1 + x)")(0.5) == doctest::Approx(0.75));
    CHECK(Expression::parse("max(x, 0) + min(1, pow(x, 2))")(-3.0) == doctest::Approx(1.0));
    CHECK(Expression::parse("sin(pi/2) + exp(0) + sqrt(4) + abs(-1)")(0.0) == doctest::Approx(5.0));
    CHECK(Expression::parse("1e-3 * 2.5E2")(0.0) == doctest::Approx(0.25));
    const double v = Expression::parse("-inf")(0.0);
    CHECK((std::isinf(v) && v < 0));
    const Expression two = Expression::parse("x*y - z", {"x", "y", "z"});
    CHECK(two(std::vector<double>{2.0, 3.0, 1.0}) == doctest::Approx(5.0));
}

TEST_CASE("expression errors carry a position") {
    for (const char* bad : {"1 +", "foo(x)", "sin(x", "x y", "min(1)", "", "2 ** 3", "y"}) {
        CHECK_THROWS_AS(Expression::parse(bad), UsageError);
    }
    try {
        Expression::parse("1 + (2 * ");
        FAIL("no throw");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("position") != std::string::npos);
    }
}

TEST_CASE("config defaults and defaulted list") {
    const ExperimentConfig c = parse_config(R"({"command": "solve", "lower": "-inf"})");
    CHECK(c.solver.omega == 1.5);
    CHECK(c.solver.tol == 1e-10);
    CHECK(c.n == 64);
    CHECK(c.s == 0.5);
    CHECK(c.kernel.name == "fractional_laplacian");
    auto has = [&](const std::string& k) {
        return std::find(c.defaulted.begin(), c.defaulted.end(), k) != c.defaulted.end();
    };
    CHECK(has("solver.omega"));
    CHECK(has("n"));
    CHECK_FALSE(has("lower"));
    CHECK_FALSE(has("command"));
}

TEST_CASE("config validation messages") {
    try {
        parse_config(R"({"command": "solve", "s": 1.2})");
        FAIL("no throw");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "s must lie in (0,1)"));
    }
    try {
        parse_config(R"({"command": "solve", "kernel": {"name": "gaussian"}})");
        FAIL("no throw");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "unknown kernel 'gaussian'"));
        for (const auto& k : known_kernels()) {
            CHECK(mentions(e, k));
        }
    }
}

TEST_CASE("config collects every error, including unknown keys") {
    try {
        parse_config(R"({"command": "solve", "s": "half", "n": 0, "colour": 1, "solver": {"omga": 1.2}})");
        FAIL("no throw");
    } catch (const ConfigError& e) {
        CHECK(e.errors().size() >= 3);
        CHECK(mentions(e, "colour"));
        CHECK(mentions(e, "solver.omga"));
        CHECK(mentions(e, "s"));
    }
}

TEST_CASE("malformed JSON reports a location") {
    try {
        parse_config("{\"command\": \"solve\",, }");
        FAIL("no throw");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "malformed JSON at byte"));
    }
    CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
}

TEST_CASE("nodal data must match n") {
    CHECK_THROWS_AS(parse_config(R"({"command": "solve", "n": 3, "lower": [0, 1]})"), ConfigError);
    CHECK_NOTHROW(parse_config(R"({"command": "solve", "n": 3, "lower": [0, 1, 0.5]})"));
}

TEST_CASE("emit/parse round trip over generated configs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        ExperimentConfig c;
        c.command = known_commands()[static_cast<std::size_t>(trial) % known_commands().size()];
        c.s = 0.05 + 0.9 * unit(rng);
        c.n = 1 + static_cast<int>(unit(rng) * 40);
        c.domain = {-1.0 - unit(rng), 1.0 + unit(rng)};
        c.lambda = unit(rng) < 0.5 ? 0.0 : unit(rng);
        c.kernel.name = known_kernels()[static_cast<std::size_t>(trial / 3) % known_kernels().size()];
        c.kernel.value = 0.5 + unit(rng);
        if (trial % 4 == 0) {
            c.kernel.band = std::array<double, 2>{0.5, 1.5 + unit(rng)};
        }
        c.solver.omega = 0.1 + 1.8 * unit(rng);
        c.solver.tol = std::pow(10.0, -6.0 - 6.0 * unit(rng));
        c.solver.epsilon = {unit(rng) + 0.1, 0.05};
        c.f = trial % 2 ? DataField(std::string("sin(x) + 1")) : DataField(std::vector<double>(c.n, unit(rng)));
        c.lower = std::vector<double>(static_cast<std::size_t>(c.n), -unit(rng));
        c.upper = std::string("1 + x^2");
        c.loads = {std::string("1"), std::vector<double>(static_cast<std::size_t>(c.n), 0.25)};
        c.pairs = {{-0.5, 0.5}, {0.1, 0.7 + unit(rng)}};
        c.set = {{-0.5, -0.25}, {0.25, 0.5}};
        c.capacity_kernels = {"fractional_laplacian", "constant"};
        if (trial % 5 == 0) {
            c.f_vec = "x";
        }
        const std::string text = emit_config(c);
        const ExperimentConfig back = parse_config(text);
        CHECK(back == c);
        CHECK(back.defaulted.empty());
        CHECK(emit_config(back) == text);
    }
}

TEST_CASE("runner writes results and metadata deterministically") {
    const ExperimentConfig c = parse_config(
        R"({"command": "solve", "n": 16, "s": 0.6, "f": "-4", "lower": "-0.2 - x^2/4"})");
    std::string first;
    for (const char* name : {"a", "b"}) {
        const auto dir = scratch(std::string("solve_") + name);
        RunOptions o;
        o.out_dir = dir.string();
        REQUIRE(run_experiment(c, o) == kExitOk);
        const std::string csv = slurp(dir / "result.csv");
        const std::string meta = slurp(dir / "metadata.json");
        CHECK(csv.rfind("x,u,residual,psi,active_lower\n", 0) == 0);
        CHECK(csv.find('\r') == std::string::npos);
        CHECK(meta.find("\"defaulted\"") != std::string::npos);
        CHECK(meta.find("\"lewy_stampacchia\"") != std::string::npos);
        CHECK(std::filesystem::exists(dir / "timings.json"));
        if (first.empty()) {
            first = csv + meta;
        } else {
            CHECK(csv + meta == first);
        }
    }
}

TEST_CASE("runner exit codes") {
    RunOptions o;
    ExperimentConfig bad = parse_config(R"({"command": "solve"})");
    bad.s = 2.0;
    o.out_dir = scratch("bad").string();
    CHECK(run_experiment(bad, o) == kExitValidation);
    CHECK(slurp(std::filesystem::path(o.out_dir) / "metadata.json").find("s must lie in (0,1)") != std::string::npos);

    ExperimentConfig slow = parse_config(R"({"command": "solve", "n": 24, "f": "1", "lower": "-1",
                                             "solver": {"max_iter": 2}})");
    o.out_dir = scratch("slow").string();
    CHECK(run_experiment(slow, o) == kExitNotConverged);

    ExperimentConfig ka = parse_config(R"({"command": "kernel-ka", "s": 0.8, "pairs": [[-0.5, 0.5]]})");
    o.out_dir = scratch("ka").string();
    CHECK(run_experiment(ka, o) == kExitOk);
    const std::string csv = slurp(std::filesystem::path(o.out_dir) / "kernel_ka.csv");
    CHECK(csv.find(",1\n") != std::string::npos);  // negative value flagged
}
