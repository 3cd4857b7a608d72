#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include <agctl/errors.hpp>
#include <agctl/parsing.hpp>

using namespace agctl;

TEST_CASE("parse_float_array pulls the last bracketed list of the right length") {
    const std::string text =
        "Intermediate guess [1, 2] was wrong.\n"
        "Final answer: [0.25, 0.15, 305.2, 304.9]";
    const auto v = parse_float_array(text, 4);
    REQUIRE(v.size() == 4);
    CHECK(v[0] == doctest::Approx(0.25));
    CHECK(v[3] == doctest::Approx(304.9));
}

TEST_CASE("parse_float_array handles scientific notation and code fences") {
    const auto v = parse_float_array("```\n[1.5e-2, -3E+1, 7]\n```", 3);
    CHECK(v[0] == doctest::Approx(0.015));
    CHECK(v[1] == doctest::Approx(-30.0));
    CHECK(v[2] == doctest::Approx(7.0));
}

TEST_CASE("parse_float_array rejects text without a matching list") {
    CHECK_THROWS_AS(parse_float_array("no numbers here", 2), ParseFailure);
    CHECK_THROWS_AS(parse_float_array("[1, 2, 3]", 2), ParseFailure);
    try {
        parse_float_array("pure prose", 1);
        FAIL("expected throw");
    } catch (const ParseFailure& e) {
        CHECK(e.raw_text == "pure prose");
    }
}

TEST_CASE("find_int_arrays returns every integer list in order") {
    const auto lists = find_int_arrays("try [0, 1, 3] or maybe [2,4]; not [1.5, 2]");
    REQUIRE(lists.size() == 2);
    CHECK(lists[0] == std::vector<int>{0, 1, 3});
    CHECK(lists[1] == std::vector<int>{2, 4});
}

TEST_CASE("parse_state_path takes the last integer list") {
    CHECK(parse_state_path("True, the path is [0, 2, 5]. Backup was [0, 1].\n[0, 3, 5]") ==
          std::vector<int>{0, 3, 5});
    CHECK_THROWS_AS(parse_state_path("True but no list"), ParseFailure);
}

TEST_CASE("bool parsing is case-insensitive, token-bounded, last-wins") {
    CHECK(parse_bool("True"));
    CHECK(!parse_bool("the answer is FALSE."));
    CHECK(!parse_bool("True at first, but actually false"));
    CHECK(parse_bool("[true]"));
    // substrings of longer words must not count
    CHECK_THROWS_AS(parse_bool("untrue falsely"), ParseFailure);
    CHECK_THROWS_AS(parse_bool(""), ParseFailure);

    CHECK(try_parse_bool("verdict: False") == std::optional<bool>{false});
    CHECK(try_parse_bool("no verdict") == std::nullopt);
}

TEST_CASE("format_number renders 6 significant digits") {
    CHECK(format_number(306.15) == "306.15");
    CHECK(format_number(0.3) == "0.3");
    CHECK(format_number(293.153456789) == "293.153");
    CHECK(format_number(1234567.0) == "1.23457e+06");
    CHECK(format_number(0.0) == "0");
}

TEST_CASE("round-trip fuzz: rendered arrays always parse back") {
    std::mt19937_64 rng(2024);
    const char* padding[] = {"",
                             "Sure, here is the result: ",
                             "Reasoning first. [9] distractor.\nAnswer:\n",
                             "```json\n",
                             "the array ["};
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t len = 1 + rng() % 6;
        std::vector<double> values;
        std::string body = "[";
        for (std::size_t i = 0; i < len; ++i) {
            const double v =
                (static_cast<double>(rng() % 2000000) - 1000000.0) / 1000.0;
            values.push_back(v);
            body += fmt::format("{}{:.6g}", i ? ", " : "", v);
        }
        body += "]";
        const std::string text =
            std::string(padding[rng() % 5]) + body + (rng() % 2 ? " done" : "");
        CAPTURE(trial);
        CAPTURE(text);
        const auto parsed = parse_float_array(text, len);
        REQUIRE(parsed.size() == len);
        for (std::size_t i = 0; i < len; ++i)
            CHECK(parsed[i] == doctest::Approx(values[i]).epsilon(1e-9));
    }
}
