#include <doctest.h>

#include <random>
#include <sstream>

#include "ummc/errors.hpp"
#include "ummc/model.hpp"
#include "support.hpp"

using namespace ummc;

namespace {

Dtmc two_state_identity() {
    StateSpace space(2, {{1, {"a"}}, {2, {"b"}}}, false);
    return Dtmc(space, {0.0, 0.5, 0.5},
                {{0, 0, 0}, {0, 1.0, 0.0}, {0, 0.0, 1.0}});
}

const std::map<std::string, State> kAbMapping = {{"a", 1}, {"b", 2}};

}  // namespace

TEST_CASE("state space basics") {
    StateSpace space(3, {{1, {"a"}}, {2, {"a", "b"}}}, false);
    CHECK(space.n_states() == 3);
    CHECK(space.first_state() == 1);
    CHECK(space.labels_of(1) == std::set<std::string>{"a"});
    CHECK(space.labels_of(3).empty());  // lookup is total
    CHECK_THROWS_AS((void)space.labels_of(0), Error);
    CHECK_THROWS_AS((void)space.labels_of(4), Error);
    CHECK(space.has_proposition("b"));
    CHECK_FALSE(space.has_proposition("c"));
    CHECK(space.states_with_label("a") == std::vector<State>{1, 2});
}

TEST_CASE("dummy init state is labelled init") {
    StateSpace space(2, {{1, {"a"}}, {2, {"b"}}}, true);
    CHECK(space.first_state() == 0);
    CHECK(space.labels_of(0) == std::set<std::string>{"init"});
    CHECK(space.has_proposition("init"));
}

TEST_CASE("validate_dtmc accepts the identity chain") {
    CHECK(validate_dtmc(two_state_identity()).empty());
}

TEST_CASE("validate_dtmc flags a substochastic row") {
    StateSpace space(2, {{1, {"a"}}, {2, {"b"}}}, false);
    Dtmc d(space, {0.0, 1.0, 0.0}, {{0, 0, 0}, {0, 0.4, 0.5}, {0, 0.0, 1.0}});
    auto report = validate_dtmc(d);
    REQUIRE(report.size() == 1);
    CHECK(report[0].kind == DtmcViolation::Kind::RowSum);
    CHECK(report[0].row == 1);
    CHECK(report[0].deviation == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("restricted models may be substochastic") {
    StateSpace space(1, {{1, {"a"}}}, false);
    Dtmc d(space, {0.0, 1.0}, {{0, 0}, {0, 0.4}}, /*restricted=*/true);
    CHECK(validate_dtmc(d).empty());
}

TEST_CASE("validate_dtmc flags entries outside [0,1]") {
    StateSpace space(2, {{1, {"a"}}, {2, {"b"}}}, false);
    Dtmc d(space, {0.0, 1.0, 0.0}, {{0, 0, 0}, {0, 1.2, -0.2}, {0, 0.0, 1.0}});
    auto report = validate_dtmc(d);
    bool found_range = false;
    for (const auto& v : report)
        found_range = found_range || v.kind == DtmcViolation::Kind::EntryRange;
    CHECK(found_range);
}

TEST_CASE("ingest maps events to states") {
    std::istringstream in("u1\ta\nu1\tb\n");
    auto traces = ingest_traces(in, kAbMapping);
    REQUIRE(traces.size() == 1);
    CHECK(traces[0].user_id == "u1");
    CHECK(traces[0].events == std::vector<State>{1, 2});
}

TEST_CASE("ingest of an empty stream yields no traces") {
    std::istringstream in("");
    CHECK(ingest_traces(in, kAbMapping).empty());
}

TEST_CASE("ingest partitions interleaved users preserving order") {
    // Hand-partitioned fixture: u1 = a,b,a and u2 = b,a.
    std::istringstream in(
        "u1\ta\n"
        "u2\tb\n"
        "u1\tb\n"
        "u2\ta\n"
        "u1\ta\n");
    auto traces = ingest_traces(in, kAbMapping);
    REQUIRE(traces.size() == 2);
    CHECK(traces[0].user_id == "u1");
    CHECK(traces[0].events == std::vector<State>{1, 2, 1});
    CHECK(traces[1].user_id == "u2");
    CHECK(traces[1].events == std::vector<State>{2, 1});
}

TEST_CASE("ingest accepts timestamps and skips comments") {
    std::istringstream in(
        "# user_id\tevent_name\ttimestamp\n"
        "u1\ta\t2013-05-01T10:00:00Z\n"
        "\n"
        "u1\tb\t2013-05-01T10:00:05Z\n");
    auto traces = ingest_traces(in, kAbMapping);
    REQUIRE(traces.size() == 1);
    CHECK(traces[0].events == std::vector<State>{1, 2});
}

TEST_CASE("ingest reports malformed lines with their number") {
    std::istringstream in("u1\ta\nnot-a-valid-line\n");
    try {
        ingest_traces(in, kAbMapping);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position() == 2);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("unmapped events: strict errors, skip drops") {
    SUBCASE("strict") {
        std::istringstream in("u1\tzap\n");
        try {
            ingest_traces(in, kAbMapping);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("zap") != std::string::npos);
        }
    }
    SUBCASE("skip") {
        std::istringstream in("u1\ta\nu1\tzap\nu1\tb\n");
        IngestOptions options;
        options.unmapped = UnmappedPolicy::Skip;
        auto traces = ingest_traces(in, kAbMapping, options);
        REQUIRE(traces.size() == 1);
        CHECK(traces[0].events == std::vector<State>{1, 2});
    }
}

TEST_CASE("ingest is order-preserving per user") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> user_pick(0, 2);
    std::uniform_int_distribution<int> event_pick(1, 2);
    for (int round = 0; round < 50; ++round) {
        std::ostringstream log;
        std::vector<std::vector<State>> expected(3);
        int lines = 5 + round % 20;
        for (int i = 0; i < lines; ++i) {
            int u = user_pick(rng);
            State e = event_pick(rng);
            log << "user" << u << "\t" << (e == 1 ? "a" : "b") << "\n";
            expected[static_cast<std::size_t>(u)].push_back(e);
        }
        std::istringstream in(log.str());
        auto traces = ingest_traces(in, kAbMapping);
        for (const auto& trace : traces) {
            int u = trace.user_id.back() - '0';
            CHECK(trace.events == expected[static_cast<std::size_t>(u)]);
        }
    }
}

TEST_CASE("validate_trace rejects empty and out-of-range traces") {
    StateSpace space(2, {{1, {"a"}}, {2, {"b"}}}, false);
    CHECK_THROWS_AS(validate_trace(space, Trace{"u", {}}), Error);
    CHECK_THROWS_AS(validate_trace(space, Trace{"u", {1, 3}}), Error);
    CHECK_NOTHROW(validate_trace(space, Trace{"u", {1, 2, 1}}));
}

TEST_CASE("validate_strategy enforces the simplex") {
    CHECK_NOTHROW(validate_strategy({0.7, 0.3}));
    CHECK_THROWS_AS(validate_strategy({0.7, 0.2}), Error);
    CHECK_THROWS_AS(validate_strategy({1.2, -0.2}), Error);
    CHECK_THROWS_AS(validate_strategy({}), Error);
}

TEST_CASE("mixture construction validates stochasticity") {
    StateSpace space(2, {{1, {"a"}}, {2, {"b"}}}, false);
    std::vector<std::vector<double>> good = {{0, 0, 0}, {0, 0.5, 0.5}, {0, 1.0, 0.0}};
    std::vector<std::vector<double>> bad = {{0, 0, 0}, {0, 0.5, 0.4}, {0, 1.0, 0.0}};
    CHECK_NOTHROW(PatternMixture(space, {good}, {0.0, 1.0, 0.0}));
    CHECK_THROWS_AS(PatternMixture(space, {bad}, {0.0, 1.0, 0.0}), Error);
}
