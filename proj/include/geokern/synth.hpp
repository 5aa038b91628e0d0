#pragma once

#include <set>
#include <string>
#include <vector>

#include "geokern/common.hpp"
#include "geokern/corpus.hpp"
#include "geokern/geoeval.hpp"

namespace geokern {

// Recipe for a desk-scale labeled corpus: samples cluster around city
// centers with Gaussian coordinate noise, and each city's texts are
// dominated by its own marker token vocabulary so the signal is learnable.
struct SyntheticSpec {
  CityList cities = default_swiss_cities();
  // Per-city marker tokens; must be pairwise disjoint across cities.
  // Leave empty to have tokens_per_city markers generated per city.
  std::vector<std::vector<std::string>> marker_vocabs;
  std::size_t tokens_per_city = 20;
  std::size_t samples_per_city = 250;
  double noise_std_deg = 0.05;
  std::size_t min_tokens = 6;
  std::size_t max_tokens = 12;
  double marker_fraction = 0.8;  // chance a token comes from the city vocab
  std::uint64_t seed = 42;
};

namespace detail {

inline void check_disjoint_vocabs(const std::vector<std::vector<std::string>>& vocabs) {
  std::set<std::string> seen;
  for (const auto& vocab : vocabs) {
    if (vocab.empty()) throw DataError("synthetic spec: empty marker vocabulary");
    std::set<std::string> mine;
    for (const auto& tok : vocab) {
      if (tok.empty() || tok.find_first_of(" \t\n") != std::string::npos)
        throw DataError("synthetic spec: marker token '" + tok +
                        "' is empty or contains separators");
      if (!mine.insert(tok).second)
        throw DataError("synthetic spec: duplicate marker token '" + tok + "'");
      if (!seen.insert(tok).second)
        throw DataError("synthetic spec: overlapping marker vocabularies ('" +
                        tok + "' appears in two cities)");
    }
  }
}

inline std::string random_token(Rng& rng, char prefix, std::size_t body_len) {
  static constexpr char kAlphabet[] = "aeioubcdfgklmnprstvz";
  std::string tok(1, prefix);
  for (std::size_t i = 0; i < body_len; ++i)
    tok += kAlphabet[rng.below(sizeof(kAlphabet) - 1)];
  return tok;
}

}  // namespace detail

// Deterministic under spec.seed. Samples come out city-major, each located
// at its center plus noise and clamped to valid coordinates.
inline Corpus generate_synthetic(const SyntheticSpec& spec) {
  validate_cities(spec.cities);
  if (spec.cities.size() > 24)
    throw DataError("synthetic spec: at most 24 cities supported");
  if (spec.samples_per_city == 0)
    throw DataError("synthetic spec: samples_per_city must be positive");
  if (spec.min_tokens == 0 || spec.max_tokens < spec.min_tokens)
    throw DataError("synthetic spec: invalid text length range");
  if (!(spec.marker_fraction >= 0.0) || spec.marker_fraction > 1.0)
    throw DataError("synthetic spec: marker_fraction must be in [0, 1]");
  if (!(spec.noise_std_deg >= 0.0))
    throw DataError("synthetic spec: noise std must be non-negative");

  Rng rng(spec.seed);

  // Marker vocabularies: disjoint by construction via a per-city first
  // letter; fillers use the reserved 'y' prefix.
  std::vector<std::vector<std::string>> vocabs = spec.marker_vocabs;
  if (vocabs.empty()) {
    if (spec.tokens_per_city == 0)
      throw DataError("synthetic spec: tokens_per_city must be positive");
    for (std::size_t c = 0; c < spec.cities.size(); ++c) {
      std::set<std::string> tokens;
      while (tokens.size() < spec.tokens_per_city)
        tokens.insert(detail::random_token(rng, static_cast<char>('a' + c), 4));
      vocabs.emplace_back(tokens.begin(), tokens.end());
    }
  } else if (vocabs.size() != spec.cities.size()) {
    throw DataError("synthetic spec: need one marker vocabulary per city");
  }
  detail::check_disjoint_vocabs(vocabs);

  std::vector<std::string> fillers;
  {
    std::set<std::string> tokens;
    while (tokens.size() < 30) tokens.insert(detail::random_token(rng, 'y', 4));
    fillers.assign(tokens.begin(), tokens.end());
  }

  Corpus corpus;
  corpus.labeled = true;
  corpus.samples.reserve(spec.cities.size() * spec.samples_per_city);
  for (std::size_t c = 0; c < spec.cities.size(); ++c) {
    const GeoPoint center = spec.cities[c].location;
    const auto& vocab = vocabs[c];
    for (std::size_t s = 0; s < spec.samples_per_city; ++s) {
      Sample sample;
      GeoPoint loc;
      loc.lat = std::clamp(center.lat + spec.noise_std_deg * rng.normal(), -90.0, 90.0);
      loc.lon = std::clamp(center.lon + spec.noise_std_deg * rng.normal(), -180.0, 180.0);
      sample.location = loc;

      const std::size_t n_tokens =
          spec.min_tokens + rng.below(spec.max_tokens - spec.min_tokens + 1);
      std::string text;
      for (std::size_t t = 0; t < n_tokens; ++t) {
        if (t > 0) text += ' ';
        if (rng.uniform01() < spec.marker_fraction)
          text += vocab[rng.below(vocab.size())];
        else
          text += fillers[rng.below(fillers.size())];
      }
      sample.text = std::move(text);
      corpus.samples.push_back(std::move(sample));
    }
  }
  return corpus;
}

}  // namespace geokern
