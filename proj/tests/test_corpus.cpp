#include <catch2/catch_amalgamated.hpp>

#include <geokern/corpus.hpp>

#include "support/oracles.hpp"

using namespace geokern;

TEST_CASE("labeled parsing keeps order and coordinates") {
  const Corpus c = parse_corpus("47.5\t8.5\thoi zäme\n", true);
  REQUIRE(c.size() == 1);
  REQUIRE(c.labeled);
  CHECK(c.samples[0].text == "hoi zäme");
  CHECK(c.samples[0].location->lat == 47.5);
  CHECK(c.samples[0].location->lon == 8.5);
}

TEST_CASE("out-of-range coordinates are rejected with the line number") {
  CHECK_THROWS_WITH(parse_corpus("91.0\t8.0\tx\n", true),
                    Catch::Matchers::ContainsSubstring("line 1") &&
                        Catch::Matchers::ContainsSubstring("latitude out of range"));
  CHECK_THROWS_WITH(parse_corpus("47.0\t8.0\tok\n45.0\t-180.5\tx\n", true),
                    Catch::Matchers::ContainsSubstring("line 2") &&
                        Catch::Matchers::ContainsSubstring("longitude out of range"));
}

TEST_CASE("unlabeled parsing") {
  const Corpus c = parse_corpus("grüezi\nsali\n", false);
  REQUIRE(c.size() == 2);
  CHECK_FALSE(c.labeled);
  CHECK(c.samples[0].text == "grüezi");
  CHECK(c.samples[1].text == "sali");
  CHECK_FALSE(c.samples[0].location.has_value());
}

TEST_CASE("malformed lines") {
  CHECK_THROWS_WITH(parse_corpus("47.0\t8.0\n", true),
                    Catch::Matchers::ContainsSubstring("3 tab-separated fields"));
  CHECK_THROWS_WITH(parse_corpus("47.0\t8.0\ta\tb\n", true),
                    Catch::Matchers::ContainsSubstring("3 tab-separated fields"));
  CHECK_THROWS_WITH(parse_corpus("abc\t8.0\tx\n", true),
                    Catch::Matchers::ContainsSubstring("non-numeric latitude"));
  CHECK_THROWS_WITH(parse_corpus("47.0\txyz\tx\n", true),
                    Catch::Matchers::ContainsSubstring("non-numeric longitude"));
  CHECK_THROWS_WITH(parse_corpus("tabbed\ttext\n", false),
                    Catch::Matchers::ContainsSubstring("unexpected tab"));
  CHECK_THROWS_WITH(parse_corpus("47.0\t8.0\t \n", true),
                    Catch::Matchers::ContainsSubstring("empty text"));
  CHECK_THROWS_AS(parse_corpus("47.0\t8.0\t\xff\xfe\n", true), DataError);
}

TEST_CASE("blank lines are skipped, empty input is an error") {
  const Corpus c = parse_corpus("a\n\n  \nb\n", false);
  REQUIRE(c.size() == 2);
  CHECK_THROWS_AS(parse_corpus("", false), DataError);
  CHECK_THROWS_AS(parse_corpus("\n \n", true), DataError);
}

TEST_CASE("error line numbers address the offending source line") {
  // line 2 is blank and line 3 is broken; the report must say line 3
  CHECK_THROWS_WITH(parse_corpus("47.0\t8.0\tok\n\n91.5\t8.0\tbad\n", true),
                    Catch::Matchers::ContainsSubstring("line 3"));
}

TEST_CASE("centroid is the degree-space mean") {
  Corpus c = make_corpus({{"a", GeoPoint{47.0, 8.0}}, {"b", GeoPoint{48.0, 9.0}}});
  const GeoPoint g = centroid(c);
  CHECK(g.lat == Catch::Approx(47.5).margin(1e-12));
  CHECK(g.lon == Catch::Approx(8.5).margin(1e-12));

  const Corpus single = make_corpus({{"x", GeoPoint{46.9, 7.4}}});
  CHECK(centroid(single).lat == 46.9);
  CHECK(centroid(single).lon == 7.4);

  CHECK_THROWS_AS(centroid(Corpus{}), DataError);
  CHECK_THROWS_AS(centroid(parse_corpus("abc\n", false)), DataError);
}

namespace {

Corpus random_corpus(geokern::Rng& rng, std::size_t n) {
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    do {
      s.text = oracles::random_text(rng, 30, 1 + rng.below(20));
    } while (s.text.find_first_not_of(" \t") == std::string::npos);
    s.location = GeoPoint{rng.uniform01() * 180.0 - 90.0,
                          rng.uniform01() * 360.0 - 180.0};
    samples.push_back(std::move(s));
  }
  return make_corpus(std::move(samples));
}

}  // namespace

TEST_CASE("serialize/parse round-trip") {
  geokern::Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const Corpus c = random_corpus(rng, 1 + rng.below(12));
    CHECK(parse_corpus(serialize_corpus(c), true) == c);
  }
  // unlabeled round-trip too
  const Corpus u = parse_corpus("one two\nthree\n", false);
  CHECK(parse_corpus(serialize_corpus(u), false) == u);
}

TEST_CASE("split sizes, determinism and multiset preservation") {
  geokern::Rng rng(5);
  const Corpus c = random_corpus(rng, 10);

  const auto parts = split(c, {0.8, 0.2}, 7);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].size() == 8);
  CHECK(parts[1].size() == 2);

  const auto again = split(c, {0.8, 0.2}, 7);
  CHECK(parts[0] == again[0]);
  CHECK(parts[1] == again[1]);

  CHECK_THROWS_AS(split(c, {0.5, 0.4}, 7), DataError);
  CHECK_THROWS_AS(split(c, {0.5, -0.5, 1.0}, 7), DataError);
  CHECK_THROWS_AS(split(Corpus{}, {1.0}, 7), DataError);

  SECTION("multiset union equals the input") {
    std::vector<std::string> all, original;
    for (const auto& p : parts)
      for (const auto& s : p.samples) all.push_back(serialize_corpus(make_corpus({s})));
    for (const auto& s : c.samples) original.push_back(serialize_corpus(make_corpus({s})));
    std::sort(all.begin(), all.end());
    std::sort(original.begin(), original.end());
    CHECK(all == original);
  }

  SECTION("centroid of the concatenated parts matches the corpus centroid") {
    Corpus merged;
    merged.labeled = true;
    for (const auto& p : parts)
      merged.samples.insert(merged.samples.end(), p.samples.begin(), p.samples.end());
    const GeoPoint a = centroid(c);
    const GeoPoint b = centroid(merged);
    CHECK(a.lat == Catch::Approx(b.lat).margin(1e-12));
    CHECK(a.lon == Catch::Approx(b.lon).margin(1e-12));
  }
}

TEST_CASE("three-way split covers everything") {
  geokern::Rng rng(9);
  const Corpus c = random_corpus(rng, 100);
  const auto parts = split(c, {0.8, 0.1, 0.1}, 42);
  REQUIRE(parts.size() == 3);
  CHECK(parts[0].size() == 80);
  CHECK(parts[1].size() == 10);
  CHECK(parts[2].size() == 10);
}

TEST_CASE("prediction point files") {
  const auto pts = parse_points("47.2600\t8.3300\n46.0000\t7.0000\n");
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].lat == 47.26);
  CHECK(pts[1].lon == 7.0);

  CHECK_THROWS_WITH(parse_points("47.0\n"),
                    Catch::Matchers::ContainsSubstring("2 tab-separated fields"));
  CHECK_THROWS_AS(parse_points(""), DataError);

  const std::string out = serialize_points(pts);
  CHECK(out == "47.2600\t8.3300\n46.0000\t7.0000\n");
}
