#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "ummc/errors.hpp"
#include "ummc/fixtures.hpp"
#include "ummc/prism.hpp"
#include "ummc/umm.hpp"
#include "support.hpp"

using namespace ummc;
using namespace ummc::testsupport;

namespace {

std::string read_golden(const char* name) {
    std::ifstream in(std::string(UMMC_GOLDEN_DIR) + "/" + name, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

PatternMixture deterministic_k1() {
    StateSpace space(2, {{1, {"a"}}, {2, {"b"}}}, false);
    std::vector<std::vector<double>> p = {{0, 0, 0}, {0, 0.0, 1.0}, {0, 1.0, 0.0}};
    return PatternMixture(space, {p}, {0.0, 1.0, 0.0});
}

}  // namespace

TEST_CASE("deterministic K=1 export matches the hand-written golden file") {
    PrismDocument doc =
        export_prism(deterministic_k1(), {1.0}, {{1, "a"}, {2, "b"}});
    CHECK(doc.full_text() == read_golden("deterministic_k1.pm"));
}

TEST_CASE("bundled fixture export matches its golden file byte for byte") {
    PrismDocument doc = export_prism(fixtures::yoshi_mixture(),
                                     fixtures::yoshi_example_theta(),
                                     fixtures::yoshi_state_names());
    CHECK(doc.full_text() == read_golden("yoshi_umm.pm"));
}

TEST_CASE("zero-probability updates are omitted from the text") {
    PrismDocument doc = export_prism(fixtures::yoshi_mixture(),
                                     fixtures::yoshi_example_theta(),
                                     fixtures::yoshi_state_names());
    // Pattern 2 never enters feed: only the init command (which encodes
    // iota) may target (s'=2)&(k'=2); the state commands must omit it.
    std::istringstream lines(doc.model_text);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.find("[] (s=0)") != std::string::npos) {
            CHECK(line.find("(s'=2)&(k'=2)") != std::string::npos);
        } else if (line.find("[] (s=") != std::string::npos) {
            CHECK(line.find("(s'=2)&(k'=2)") == std::string::npos);
        }
    }
    CHECK(doc.model_text.find(" 0:(") == std::string::npos);
}

TEST_CASE("export is deterministic") {
    auto once = export_prism(fixtures::yoshi_mixture(), {0.7, 0.3},
                             fixtures::yoshi_state_names());
    auto twice = export_prism(fixtures::yoshi_mixture(), {0.7, 0.3},
                              fixtures::yoshi_state_names());
    CHECK(once.full_text() == twice.full_text());
}

TEST_CASE("per-command update probabilities sum to 1") {
    PrismDocument doc = export_prism(fixtures::yoshi_mixture(),
                                     fixtures::yoshi_example_theta(),
                                     fixtures::yoshi_state_names());
    ReparsedUmm reparsed = reparse(doc.full_text());
    const int total = reparsed.n * reparsed.K;
    for (int row = 0; row <= total; ++row) {
        double sum = 0.0;
        for (int col = 0; col <= total; ++col)
            sum += reparsed.matrix[static_cast<std::size_t>(row)]
                                  [static_cast<std::size_t>(col)];
        CHECK(std::fabs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("reparse(export) reproduces build_umm on random mixtures") {
    std::mt19937_64 rng(107);
    std::uniform_int_distribution<int> n_pick(2, 6);
    std::uniform_int_distribution<int> k_pick(1, 3);
    for (int round = 0; round < 30; ++round) {
        int n = n_pick(rng);
        int K = k_pick(rng);
        PatternMixture mixture = random_mixture(n, K, rng);
        std::vector<double> theta = random_theta(K, rng);

        std::map<State, std::string> names;
        for (State s = 1; s <= n; ++s) names[s] = "e" + std::to_string(s);

        PrismDocument doc = export_prism(mixture, theta, names);
        ReparsedUmm reparsed = reparse(doc.full_text());
        Umm umm = build_umm(mixture, theta);

        REQUIRE(reparsed.n == n);
        REQUIRE(reparsed.K == K);
        const int total = n * K;
        double worst = 0.0;
        for (int r = 0; r <= total; ++r)
            for (int c = 0; c <= total; ++c)
                worst = std::max(worst,
                                 std::fabs(reparsed.matrix[static_cast<std::size_t>(r)]
                                                          [static_cast<std::size_t>(c)] -
                                           umm.dtmc().trans(r, c)));
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("tampering with a probability is detected by the round trip") {
    PrismDocument doc = export_prism(fixtures::yoshi_mixture(),
                                     fixtures::yoshi_example_theta(),
                                     fixtures::yoshi_state_names());
    std::string text = doc.full_text();
    std::size_t pos = text.find("0.105:");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 5, "0.205");

    ReparsedUmm reparsed = reparse(text);
    Umm umm = build_umm(fixtures::yoshi_mixture(), fixtures::yoshi_example_theta());
    double worst = 0.0;
    const int total = reparsed.n * reparsed.K;
    for (int r = 0; r <= total; ++r)
        for (int c = 0; c <= total; ++c)
            worst = std::max(worst,
                             std::fabs(reparsed.matrix[static_cast<std::size_t>(r)]
                                                      [static_cast<std::size_t>(c)] -
                                       umm.dtmc().trans(r, c)));
    CHECK(worst > 1e-12);
}

TEST_CASE("reparse rejects malformed input with line numbers") {
    CHECK_THROWS_AS((void)reparse(""), ParseError);
    CHECK_THROWS_AS((void)reparse("mdp\n"), ParseError);
    try {
        reparse("dtmc\n\nmodule M\n  s:[0..2] init 0;\n  k:[0..oops] init 0;\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position() == 5);
    }
    // A command for a state out of range.
    CHECK_THROWS_AS(
        (void)reparse("dtmc\n\nmodule M\n  s:[0..1] init 0;\n  k:[0..1] init 0;\n"
                      "  [] (s=7) -> 1:(s'=1)&(k'=1);\nendmodule\n"),
        ParseError);
    // Missing command for a state.
    CHECK_THROWS_AS(
        (void)reparse("dtmc\n\nmodule M\n  s:[0..1] init 0;\n  k:[0..1] init 0;\n"
                      "  [] (s=0) -> 1:(s'=1)&(k'=1);\nendmodule\n"),
        ParseError);
}

TEST_CASE("q1 property text is exact and parses in the formula grammar") {
    QuestionParams params{1, 5, std::nullopt};
    std::string text = export_properties(QuestionId::Q1, params);
    CHECK(text == "P=?[(!\"feed\") U<=5 ((alpha=1)&\"feed\")]");
    Query q = parse_query(text);
    CHECK_FALSE(q.bound);
    const auto* until = std::get_if<UntilNode>(&q.path->node());
    REQUIRE(until != nullptr);
    CHECK(*until->bound == 5);
}

TEST_CASE("q2 property text uses the min-filter power composition") {
    QuestionParams params{1, 12, std::nullopt};
    std::string text = export_properties(QuestionId::Q2, params);
    CHECK(text.find("pow(filter(min,") != std::string::npos);
    CHECK(text.find(",4)") != std::string::npos);
    CHECK(text.find("F<=12") != std::string::npos);
}

TEST_CASE("q4 property text sums over the entry labels") {
    QuestionParams params{2, 5, 10};
    std::string text = export_properties(QuestionId::Q4, params,
                                         {"seeY", "feed", "seeP", "pick"});
    CHECK(std::count(text.begin(), text.end(), '+') == 3);
    CHECK(text.find("U<=10") != std::string::npos);
    // Unbounded N2 drops the bound.
    QuestionParams unbounded{2, 5, std::nullopt};
    std::string text2 = export_properties(QuestionId::Q4, unbounded, {"feed"});
    CHECK(text2.find("U ((alpha=2)&\"feed\")") != std::string::npos);
    CHECK_THROWS_AS((void)export_properties(QuestionId::Q4, unbounded, {}), Error);
}

TEST_CASE("property export rejects invalid pattern indices") {
    QuestionParams params{0, 5, std::nullopt};
    CHECK_THROWS_AS((void)export_properties(QuestionId::Q1, params), Error);
}
