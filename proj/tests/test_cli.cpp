#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef FRACMAT_CLI_PATH
#error "FRACMAT_CLI_PATH must point at the built binary"
#endif

namespace {

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const std::string out_path = "cli_out_" + std::to_string(counter) + ".txt";
    const std::string err_path = "cli_err_" + std::to_string(counter) + ".txt";
    ++counter;
    const std::string cmd =
        std::string(FRACMAT_CLI_PATH) + " " + args + " > " + out_path + " 2> " + err_path;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return r;
}

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s)
        if (c == '\n')
            ++n;
    return n;
}

} // namespace

TEST_CASE("matpow on an explicit diagonal") {
    const RunResult r = run_cli("matpow --diag 1,2 --alpha 0.5");
    REQUIRE(r.code == 0);
    const nlohmann::json doc = nlohmann::json::parse(r.out);
    CHECK(doc["schema"] == 1);
    CHECK(doc["alpha"] == 0.5);
    const auto entries = doc["matrix"]["entries"].get<std::vector<double>>();
    REQUIRE(entries.size() == 3);
    CHECK(entries[0] == Catch::Approx(1.0));
    CHECK(entries[1] == Catch::Approx(-0.41421356).margin(1e-6));
    CHECK(entries[2] == Catch::Approx(std::sqrt(2.0)));
}

TEST_CASE("matpow with an integer exponent") {
    const RunResult r = run_cli("matpow --diag 1,2 --alpha 2");
    REQUIRE(r.code == 0);
    const nlohmann::json doc = nlohmann::json::parse(r.out);
    const auto entries = doc["matrix"]["entries"].get<std::vector<double>>();
    CHECK(entries[1] == Catch::Approx(-3.0));
}

TEST_CASE("matpow rejects a negative diagonal with exit 3") {
    const RunResult r = run_cli("matpow --diag 1,-2 --alpha 0.5");
    CHECK(r.code == 3);
    CHECK(count_lines(r.err) == 1);
    CHECK(r.err.find("fracmat:") == 0);
}

TEST_CASE("gl computes the antiderivative of x") {
    const RunResult r = run_cli("gl --f x --alpha -1 --a 0 --x 1 --n 1000");
    REQUIRE(r.code == 0);
    const nlohmann::json doc = nlohmann::json::parse(r.out);
    CHECK(doc["value_re"].get<double>() == Catch::Approx(0.5).margin(1e-3));
    CHECK(doc["method"] == "gl-left");
    CHECK(doc["n"] == 1000);
}

TEST_CASE("gl csv output carries the per-node table") {
    const RunResult r = run_cli("gl --f x --alpha 0.5 --a 0 --x 1 --n 8 --format csv");
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("node,x_k,value\n", 0) == 0);
    CHECK(count_lines(r.out) == 9); // header + 8 nodes
}

TEST_CASE("gl right side emits both parts") {
    const RunResult r =
        run_cli("gl --f \"(1-x)^2\" --alpha 2 --side right --x 0 --b 1 --n 64");
    REQUIRE(r.code == 0);
    const nlohmann::json doc = nlohmann::json::parse(r.out);
    CHECK(doc["value_re"].get<double>() == Catch::Approx(2.0).margin(1e-8));
    CHECK(std::abs(doc["value_im"].get<double>()) <= 1e-10);
    CHECK(doc["method"] == "gl-right");
}

TEST_CASE("dwrt half derivative of x^2") {
    const RunResult r = run_cli("dwrt --f x^2 --g x --alpha 0.5 --a 0 --x 1 --n 512");
    REQUIRE(r.code == 0);
    const nlohmann::json doc = nlohmann::json::parse(r.out);
    const double want = std::tgamma(3.0) / std::tgamma(2.5);
    CHECK(doc["value_re"].get<double>() == Catch::Approx(want).margin(5e-2));
}

TEST_CASE("semigroup matrix output") {
    const RunResult r = run_cli("semigroup --diag 1,2 --t 0.5");
    REQUIRE(r.code == 0);
    const nlohmann::json doc = nlohmann::json::parse(r.out);
    CHECK(doc["strategy"] == "eigen");
    const auto entries = doc["matrix"]["entries"].get<std::vector<double>>();
    CHECK(entries[1] == Catch::Approx(std::exp(-0.5) - std::exp(-1.0)).margin(1e-10));
}

TEST_CASE("semigroup characteristic trajectory") {
    const RunResult r = run_cli(
        "semigroup --characteristic --g \"-x^2\" --a 1 --b 10 --x0 3 --t-max 7 --steps 7 "
        "--direction backward --extend");
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("t,X\n", 0) == 0);
    CHECK(count_lines(r.out) == 9);
    // Final row: X_3(7) = sqrt(7 + 9) = 4.
    const std::string last = r.out.substr(r.out.rfind("7,"));
    CHECK(last.find("7,4") == 0);
}

TEST_CASE("tolerance failures exit with 4") {
    const RunResult r = run_cli("balakrishnan-check --diag 1,2 --alpha 0.5 --tolerance 0");
    CHECK(r.code == 4);
    CHECK(count_lines(r.err) == 1);
}

TEST_CASE("matpow from g samples") {
    const RunResult r = run_cli("matpow --g x --a 0 --x 1 --n 4 --alpha 1");
    REQUIRE(r.code == 0);
    const nlohmann::json doc = nlohmann::json::parse(r.out);
    const auto diag = doc["diag"].get<std::vector<double>>();
    REQUIRE(diag.size() == 4);
    for (double d : diag)
        CHECK(d == Catch::Approx(4.0));
}

TEST_CASE("balakrishnan-check report") {
    const RunResult r = run_cli("balakrishnan-check --diag 1,2 --alpha 0.5");
    REQUIRE(r.code == 0);
    const nlohmann::json doc = nlohmann::json::parse(r.out);
    CHECK(doc["method"] == "bf01");
    CHECK(doc["max_abs_error_vs_closed_form"].get<double>() <= 1e-5);
    CHECK(doc["panels"].get<int>() > 0);
}

TEST_CASE("converge emits a rate report") {
    const RunResult r = run_cli(
        "converge --f x --g x --alpha 0.5 --a 0 --x 1 --n-min 64 --levels 4 --regime bounded");
    REQUIRE(r.code == 0);
    const nlohmann::json doc = nlohmann::json::parse(r.out);
    CHECK(doc["passed"].get<bool>());
    CHECK(doc["slope"].get<double>() >= 0.45);
    const RunResult csv = run_cli(
        "converge --f x --g x --alpha 0.5 --a 0 --x 1 --n-min 64 --levels 4 --format csv");
    CHECK(csv.out.rfind("n,h,error\n", 0) == 0);
}

TEST_CASE("--out writes the payload to a file") {
    const std::string path = "cli_out_file.json";
    const RunResult r = run_cli("matpow --diag 1,2 --alpha 0.5 --out " + path);
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    const nlohmann::json doc = nlohmann::json::parse(slurp(path));
    CHECK(doc["schema"] == 1);
    std::remove(path.c_str());
}

TEST_CASE("dwrt csv holds one row per node") {
    const RunResult r =
        run_cli("dwrt --f x^2 --g x^2 --alpha 1 --a 0 --x 1 --n 16 --format csv");
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("node,x_k,value\n", 0) == 0);
    CHECK(count_lines(r.out) == 17);
}

TEST_CASE("converge classifies the regime automatically") {
    const RunResult r = run_cli(
        "converge --f x --g x --alpha 0.5 --a 0 --x 1 --n-min 64 --levels 4 --regime auto");
    REQUIRE(r.code == 0);
    const nlohmann::json doc = nlohmann::json::parse(r.out);
    CHECK(doc["regime"] == "bounded");
    CHECK(doc["passed"].get<bool>());
}

TEST_CASE("selftest passes") {
    const RunResult r = run_cli("selftest");
    CHECK(r.code == 0);
    CHECK(r.out.find("symfun identities") != std::string::npos);
}

TEST_CASE("validation failures exit with 2 and one diagnostic line") {
    for (const std::string& args : {std::string("gl --f \"x +\" --alpha 0.5 --a 0 --x 1"),
                                    std::string("matpow --alpha 0.5"),
                                    std::string("dwrt --f x --g x --alpha 0.5 --method nope --a 0 --x 1"),
                                    std::string("no-such-command")}) {
        const RunResult r = run_cli(args);
        INFO(args);
        CHECK(r.code == 2);
        CHECK(count_lines(r.err) == 1);
    }
}

TEST_CASE("identical configurations produce identical bytes") {
    const std::string examples[] = {
        "matpow --diag 1,2 --alpha 0.5",
        "gl --f x --alpha -1 --a 0 --x 1 --n 1000",
        "gl --f x --alpha 0.5 --a 0 --x 1 --n 64 --format csv",
        "dwrt --f x^2 --g x^1.5 --alpha 0.5 --a 0 --x 1 --n 64",
        "semigroup --diag 1,2 --t 0.5",
        "balakrishnan-check --diag 1,2 --alpha 0.5",
        "converge --f x --g x --alpha 0.5 --a 0 --x 1 --n-min 64 --levels 4",
    };
    for (const std::string& args : examples) {
        const RunResult first = run_cli(args);
        const RunResult second = run_cli(args);
        INFO(args);
        CHECK(first.code == 0);
        CHECK(first.out == second.out);
    }
}
