#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gridfreq/errors.hpp"
#include "gridfreq/textdoc.hpp"

#include <cmath>
#include <random>

using namespace gridfreq;

TEST_CASE("sections, arrays of tables and typed values parse") {
    const char* text = R"(# comment line
[system]
t_g = 10
base_frequency = 50.0   # trailing comment

[[region]]
id = "EN"
h = 1.2e5
enabled = true

[[region]]
id = "SC"
h = -7.5e3
weights = [1, 2.5, -3]
names = ["a", "b"]
)";
    TextDoc doc = parse_textdoc(text, "mem");
    CHECK(doc.sections.size() == 3);

    const DocSection* sys = doc.find_one("system");
    REQUIRE(sys != nullptr);
    CHECK(sys->get_number("t_g", "system") == 10.0);
    CHECK(sys->get_number("base_frequency", "system") == 50.0);

    auto regions = doc.find_all("region");
    REQUIRE(regions.size() == 2);
    CHECK(regions[0]->get_string("id", "region[0]") == "EN");
    CHECK(regions[0]->find("enabled")->flag == true);
    CHECK(regions[1]->get_number("h", "region[1]") == -7.5e3);
    auto ws = regions[1]->get_number_list("weights", "region[1]");
    REQUIRE(ws.size() == 3);
    CHECK(ws[1] == 2.5);
    auto ns = regions[1]->get_string_list("names", "region[1]");
    CHECK(ns == std::vector<std::string>{"a", "b"});
}

TEST_CASE("string escapes round-trip") {
    const char* text = "[s]\nmsg = \"a \\\"quoted\\\" \\\\ thing\"\n";
    TextDoc doc = parse_textdoc(text, "mem");
    CHECK(doc.find_one("s")->get_string("msg", "s") == "a \"quoted\" \\ thing");

    std::string rendered = render_textdoc(doc);
    TextDoc again = parse_textdoc(rendered, "mem2");
    CHECK(again.find_one("s")->get_string("msg", "s") == "a \"quoted\" \\ thing");
}

TEST_CASE("errors carry origin, line and context") {
    CHECK_THROWS_WITH_AS(parse_textdoc("[s]\nkey value\n", "f.toml"),
                         "f.toml:2: expected '=' after key 'key'", ConfigError);
    CHECK_THROWS_WITH_AS(parse_textdoc("[s]\nk = abc\n", "f.toml"),
                         "f.toml:2: 'abc' is not a number (strings must be quoted)", ConfigError);
    CHECK_THROWS_WITH_AS(parse_textdoc("[s]\nk = 1\nk = 2\n", "f.toml"),
                         "f.toml:3: duplicate key 'k' in section [s]", ConfigError);
    CHECK_THROWS_AS(parse_textdoc("[s]\nk = \"open\n", "f.toml"), ConfigError);
    CHECK_THROWS_AS(parse_textdoc("[s]\nk = [1, 2\n", "f.toml"), ConfigError);

    TextDoc doc = parse_textdoc("[a]\nx = 1\n[a]\ny = 2\n", "f.toml");
    CHECK_THROWS_AS(doc.find_one("a"), ConfigError);

    TextDoc one = parse_textdoc("[s]\nk = 1\n", "f");
    const DocSection* s = one.find_one("s");
    CHECK_THROWS_WITH_AS(s->get_number("absent", "s"), "s.absent: missing required key", ConfigError);
    CHECK_THROWS_WITH_AS(s->get_string("k", "s"), "s.k: expected a quoted string", ConfigError);
}

TEST_CASE("format_double renders shortest round-trip decimals") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-3.0) == "-3");
    CHECK(format_double(10053.096491487338) == "10053.096491487338");

    std::mt19937_64 rng(42);
    for (int i = 0; i < 1000; ++i) {
        double mag = std::ldexp(1.0, int(rng() % 64) - 32);
        double x = (double(rng() >> 11) * 0x1p-53 * 2 - 1) * mag;
        std::string s = format_double(x);
        double back = std::strtod(s.c_str(), nullptr);
        CHECK(back == x); // bit-identical
    }
}

TEST_CASE("render and re-parse preserves every field") {
    TextDoc doc;
    DocSection s;
    s.name = "model";
    s.is_array = true;
    s.set("target", DocValue::of(std::string("nadir")));
    s.set("coef", DocValue::list(std::vector<double>{1.0 / 3, -2.75e-8, 0.0}));
    s.set("active", DocValue::of(false));
    doc.sections.push_back(s);

    TextDoc back = parse_textdoc(render_textdoc(doc), "mem");
    auto all = back.find_all("model");
    REQUIRE(all.size() == 1);
    CHECK(all[0]->is_array);
    CHECK(all[0]->get_string("target", "model") == "nadir");
    auto cs = all[0]->get_number_list("coef", "model");
    CHECK(cs[0] == 1.0 / 3);
    CHECK(cs[1] == -2.75e-8);
    CHECK(all[0]->find("active")->flag == false);
}
