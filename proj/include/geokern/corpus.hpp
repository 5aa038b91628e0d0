#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "geokern/common.hpp"

namespace geokern {

struct GeoPoint {
  double lat = 0.0;  // decimal degrees, [-90, 90]
  double lon = 0.0;  // decimal degrees, [-180, 180]

  bool operator==(const GeoPoint&) const = default;
};

inline bool valid_latitude(double lat) { return lat >= -90.0 && lat <= 90.0; }
inline bool valid_longitude(double lon) { return lon >= -180.0 && lon <= 180.0; }

// One text with optional gold coordinates. Texts never contain tabs or
// newlines; those are the field/record separators of the file format.
struct Sample {
  std::string text;
  std::optional<GeoPoint> location;

  bool operator==(const Sample&) const = default;
};

struct Corpus {
  std::vector<Sample> samples;
  bool labeled = false;  // true iff every sample has a location

  std::size_t size() const { return samples.size(); }
  bool operator==(const Corpus&) const = default;
};

inline Corpus make_corpus(std::vector<Sample> samples) {
  Corpus c;
  c.labeled = !samples.empty();
  for (const auto& s : samples) {
    if (!s.location) c.labeled = false;
  }
  c.samples = std::move(samples);
  return c;
}

inline std::vector<std::string> texts_of(const Corpus& c) {
  std::vector<std::string> out;
  out.reserve(c.size());
  for (const auto& s : c.samples) out.push_back(s.text);
  return out;
}

inline std::vector<GeoPoint> locations_of(const Corpus& c) {
  if (!c.labeled) throw DataError("corpus is unlabeled");
  std::vector<GeoPoint> out;
  out.reserve(c.size());
  for (const auto& s : c.samples) out.push_back(*s.location);
  return out;
}

namespace detail {

[[noreturn]] inline void line_error(std::size_t line_no, const std::string& what) {
  throw DataError("line " + std::to_string(line_no) + ": " + what);
}

inline bool blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

inline void check_text_field(std::string_view text, std::size_t line_no) {
  if (blank(text)) line_error(line_no, "empty text");
  try {
    utf8_offsets(text);
  } catch (const DataError& e) {
    line_error(line_no, e.what());
  }
}

inline GeoPoint parse_coordinates(std::string_view lat_field,
                                  std::string_view lon_field,
                                  std::size_t line_no) {
  GeoPoint p;
  if (!parse_double(lat_field, p.lat)) line_error(line_no, "non-numeric latitude");
  if (!parse_double(lon_field, p.lon)) line_error(line_no, "non-numeric longitude");
  if (!valid_latitude(p.lat)) line_error(line_no, "latitude out of range");
  if (!valid_longitude(p.lon)) line_error(line_no, "longitude out of range");
  return p;
}

template <typename Fn>
void for_each_line(std::string_view source, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    if (pos == source.size()) {
      break;  // no trailing empty record after a final newline
    }
    std::size_t nl = source.find('\n', pos);
    if (nl == std::string_view::npos) nl = source.size();
    ++line_no;
    fn(source.substr(pos, nl - pos), line_no);
    pos = nl + 1;
  }
}

}  // namespace detail

// Parses the shared-task line format. Labeled records are
// `lat TAB lon TAB text`; unlabeled records are the bare text. Blank lines
// are skipped; every reported error names the offending 1-based line.
inline Corpus parse_corpus(std::string_view source, bool expect_labels) {
  Corpus corpus;
  corpus.labeled = expect_labels;
  detail::for_each_line(source, [&](std::string_view line, std::size_t line_no) {
    if (detail::blank(line)) return;
    Sample sample;
    if (expect_labels) {
      const std::size_t t1 = line.find('\t');
      const std::size_t t2 = t1 == std::string_view::npos
                                 ? std::string_view::npos
                                 : line.find('\t', t1 + 1);
      if (t1 == std::string_view::npos || t2 == std::string_view::npos)
        detail::line_error(line_no, "expected 3 tab-separated fields");
      const std::string_view text = line.substr(t2 + 1);
      if (text.find('\t') != std::string_view::npos)
        detail::line_error(line_no, "expected 3 tab-separated fields");
      sample.location = detail::parse_coordinates(
          line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), line_no);
      detail::check_text_field(text, line_no);
      sample.text = std::string(text);
    } else {
      if (line.find('\t') != std::string_view::npos)
        detail::line_error(line_no, "unexpected tab in unlabeled text");
      detail::check_text_field(line, line_no);
      sample.text = std::string(line);
    }
    corpus.samples.push_back(std::move(sample));
  });
  if (corpus.samples.empty()) throw DataError("empty corpus: no samples found");
  return corpus;
}

// Inverse of parse_corpus. Coordinates use the shortest round-trip form so
// parse(serialize(c)) == c exactly.
inline std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& s : corpus.samples) {
    if (corpus.labeled) {
      out += format_shortest(s.location->lat);
      out += '\t';
      out += format_shortest(s.location->lon);
      out += '\t';
    }
    out += s.text;
    out += '\n';
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw DataError("cannot read " + path);
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw DataError("cannot write " + path);
}

inline Corpus load_corpus(const std::string& path, bool expect_labels) {
  try {
    return parse_corpus(read_file(path), expect_labels);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

// Degree-space arithmetic mean of the coordinates. This is the statistic the
// task reports; it is not a spherical centroid.
inline GeoPoint centroid(const Corpus& corpus) {
  if (corpus.samples.empty()) throw DataError("centroid of empty corpus");
  if (!corpus.labeled) throw DataError("centroid of unlabeled corpus");
  double lat = 0.0, lon = 0.0;
  for (const auto& s : corpus.samples) {
    lat += s.location->lat;
    lon += s.location->lon;
  }
  const double n = static_cast<double>(corpus.samples.size());
  return {lat / n, lon / n};
}

// Deterministic shuffle-and-partition. Part sizes come from rounded
// cumulative fractions, so they are stable and sum to the corpus size.
inline std::vector<Corpus> split(const Corpus& corpus,
                                 const std::vector<double>& fractions,
                                 std::uint64_t seed) {
  if (corpus.samples.empty()) throw DataError("split of empty corpus");
  if (fractions.empty()) throw DataError("split needs at least one fraction");
  double sum = 0.0;
  for (double f : fractions) {
    if (f <= 0.0) throw DataError("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw DataError("split fractions must sum to 1");

  std::vector<std::size_t> order(corpus.samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const double n = static_cast<double>(corpus.samples.size());
  std::vector<Corpus> parts;
  parts.reserve(fractions.size());
  double cum = 0.0;
  std::size_t begin = 0;
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    cum += fractions[k];
    std::size_t end = k + 1 == fractions.size()
                          ? corpus.samples.size()
                          : static_cast<std::size_t>(std::llround(cum * n));
    end = std::min(end, corpus.samples.size());
    Corpus part;
    part.labeled = corpus.labeled;
    for (std::size_t i = begin; i < end; ++i)
      part.samples.push_back(corpus.samples[order[i]]);
    parts.push_back(std::move(part));
    begin = end;
  }
  return parts;
}

// Prediction files: `lat TAB lon` per line.
inline std::vector<GeoPoint> parse_points(std::string_view source) {
  std::vector<GeoPoint> points;
  detail::for_each_line(source, [&](std::string_view line, std::size_t line_no) {
    if (detail::blank(line)) return;
    const std::size_t t1 = line.find('\t');
    if (t1 == std::string_view::npos ||
        line.find('\t', t1 + 1) != std::string_view::npos)
      detail::line_error(line_no, "expected 2 tab-separated fields");
    points.push_back(detail::parse_coordinates(line.substr(0, t1),
                                               line.substr(t1 + 1), line_no));
  });
  if (points.empty()) throw DataError("empty file: no coordinate pairs found");
  return points;
}

inline std::string serialize_points(std::span<const GeoPoint> points,
                                    int precision = 4) {
  std::string out;
  for (const auto& p : points) {
    out += format_fixed(p.lat, precision);
    out += '\t';
    out += format_fixed(p.lon, precision);
    out += '\n';
  }
  return out;
}

// Gold coordinates for evaluation: either a prediction-style 2-column file
// or a full labeled corpus; detected from the first non-blank line.
inline std::vector<GeoPoint> load_gold_points(const std::string& path) {
  const std::string contents = read_file(path);
  std::size_t tabs = 0;
  bool found = false;
  detail::for_each_line(contents, [&](std::string_view line, std::size_t) {
    if (found || detail::blank(line)) return;
    tabs = static_cast<std::size_t>(std::count(line.begin(), line.end(), '\t'));
    found = true;
  });
  if (!found) throw DataError(path + ": empty file: no coordinate pairs found");
  try {
    if (tabs == 2) return locations_of(parse_corpus(contents, true));
    return parse_points(contents);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace geokern
