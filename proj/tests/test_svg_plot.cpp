#include <catch2/catch_amalgamated.hpp>

#include <geokern/svg_plot.hpp>

using namespace geokern;

namespace {

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0, pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

std::vector<GeoPoint> jittered(std::size_t n, double offset) {
  geokern::Rng rng(12);
  std::vector<GeoPoint> pts;
  for (std::size_t i = 0; i < n; ++i)
    pts.push_back({46.0 + rng.uniform01() * 2.0 + offset,
                   7.0 + rng.uniform01() * 2.5 + offset});
  return pts;
}

}  // namespace

TEST_CASE("plot draws the requested number of pairs") {
  const auto gold = jittered(300, 0.0);
  const auto pred = jittered(300, 0.05);
  const std::string svg = render_scatter_svg(pred, gold, 100, 9);
  CHECK(count_occurrences(svg, "fill=\"blue\"") == 100);
  CHECK(count_occurrences(svg, "fill=\"red\"") == 100);
  CHECK(count_occurrences(svg, "<line ") == 100);
  CHECK(svg.find("<svg ") != std::string::npos);
}

TEST_CASE("identical seeds give byte-identical plots") {
  const auto gold = jittered(150, 0.0);
  const auto pred = jittered(150, 0.1);
  CHECK(render_scatter_svg(pred, gold, 50, 7) == render_scatter_svg(pred, gold, 50, 7));
  CHECK(render_scatter_svg(pred, gold, 50, 7) != render_scatter_svg(pred, gold, 50, 8));
}

TEST_CASE("coincident predictions draw zero-length segments") {
  const auto gold = jittered(40, 0.0);
  const std::string svg = render_scatter_svg(gold, gold, 40, 1);
  // every segment starts and ends at the same place
  std::size_t pos = 0;
  while ((pos = svg.find("<line ", pos)) != std::string::npos) {
    const std::size_t end = svg.find("/>", pos);
    const std::string line = svg.substr(pos, end - pos);
    const auto grab = [&](const std::string& key) {
      const std::size_t k = line.find(key + "=\"") + key.size() + 2;
      return line.substr(k, line.find('"', k) - k);
    };
    CHECK(grab("x1") == grab("x2"));
    CHECK(grab("y1") == grab("y2"));
    pos = end;
  }
}

TEST_CASE("requests beyond the available pairs clamp") {
  const auto gold = jittered(30, 0.0);
  const auto pred = jittered(30, 0.02);
  const std::string svg = render_scatter_svg(pred, gold, 500, 3);
  CHECK(count_occurrences(svg, "fill=\"blue\"") == 30);
}

TEST_CASE("degenerate extents still render") {
  const std::vector<GeoPoint> one{{47.0, 8.0}};
  const std::string svg = render_scatter_svg(one, one, 1, 0);
  CHECK(count_occurrences(svg, "fill=\"blue\"") == 1);
}

TEST_CASE("misaligned inputs are rejected") {
  const auto gold = jittered(5, 0.0);
  const auto pred = jittered(6, 0.0);
  CHECK_THROWS_AS(render_scatter_svg(pred, gold, 5, 1), DataError);
}
