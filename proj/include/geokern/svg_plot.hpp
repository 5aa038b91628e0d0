#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "geokern/common.hpp"
#include "geokern/corpus.hpp"

namespace geokern {

// Scatter of gold locations (blue) and predictions (red) with one segment
// per pair, over a plain lat/lon bounding box. n_points pairs are sampled
// without replacement under the seed; asking for more than available clamps.
// Output contains nothing time- or locale-dependent, so a fixed seed gives a
// byte-identical file.
inline std::string render_scatter_svg(std::span<const GeoPoint> pred,
                                      std::span<const GeoPoint> gold,
                                      std::size_t n_points, std::uint64_t seed) {
  if (pred.empty() || pred.size() != gold.size())
    throw DataError("plot: prediction and gold lists must align and be non-empty");
  const std::size_t n = std::min(n_points, pred.size());
  if (n == 0) throw DataError("plot: n_points must be positive");

  std::vector<std::size_t> idx(pred.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.below(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);

  double lat_lo = gold[idx[0]].lat, lat_hi = lat_lo;
  double lon_lo = gold[idx[0]].lon, lon_hi = lon_lo;
  for (std::size_t i : idx) {
    for (const GeoPoint& p : {gold[i], pred[i]}) {
      lat_lo = std::min(lat_lo, p.lat);
      lat_hi = std::max(lat_hi, p.lat);
      lon_lo = std::min(lon_lo, p.lon);
      lon_hi = std::max(lon_hi, p.lon);
    }
  }
  if (lat_hi - lat_lo < 1e-9) {
    lat_lo -= 0.5;
    lat_hi += 0.5;
  }
  if (lon_hi - lon_lo < 1e-9) {
    lon_lo -= 0.5;
    lon_hi += 0.5;
  }

  constexpr double kWidth = 800.0, kHeight = 600.0, kMargin = 40.0;
  const auto x_of = [&](double lon) {
    return kMargin + (lon - lon_lo) / (lon_hi - lon_lo) * (kWidth - 2 * kMargin);
  };
  const auto y_of = [&](double lat) {  // north up
    return kMargin + (lat_hi - lat) / (lat_hi - lat_lo) * (kHeight - 2 * kMargin);
  };
  const auto fmt = [](double v) { return format_fixed(v, 2); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  svg += "<g stroke=\"#999999\" stroke-width=\"1\">\n";
  for (std::size_t i : idx) {
    svg += "<line x1=\"" + fmt(x_of(gold[i].lon)) + "\" y1=\"" +
           fmt(y_of(gold[i].lat)) + "\" x2=\"" + fmt(x_of(pred[i].lon)) +
           "\" y2=\"" + fmt(y_of(pred[i].lat)) + "\"/>\n";
  }
  svg += "</g>\n<g>\n";
  for (std::size_t i : idx) {
    svg += "<circle cx=\"" + fmt(x_of(gold[i].lon)) + "\" cy=\"" +
           fmt(y_of(gold[i].lat)) + "\" r=\"3\" fill=\"blue\"/>\n";
  }
  for (std::size_t i : idx) {
    svg += "<circle cx=\"" + fmt(x_of(pred[i].lon)) + "\" cy=\"" +
           fmt(y_of(pred[i].lat)) + "\" r=\"3\" fill=\"red\"/>\n";
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace geokern
