#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geokern/common.hpp"

namespace geokern {

// Blended-spectrum range of character n-gram lengths, in Unicode scalar
// values. The defaults are the tuned range for this task.
struct KernelConfig {
  int n_min = 3;
  int n_max = 5;
  bool normalize = true;

  void validate() const {
    if (n_min < 1) throw DataError("kernel config: n_min must be >= 1");
    if (n_max < n_min) throw DataError("kernel config: n_max must be >= n_min");
  }

  bool operator==(const KernelConfig&) const = default;
};

// The distinct character n-grams of one text, one sorted set per n in
// [n_min, n_max]. Presence is all that matters: occurrence counts are
// deliberately not kept.
class NGramProfile {
 public:
  NGramProfile() = default;

  NGramProfile(const KernelConfig& config,
               std::vector<std::vector<std::string>> gram_sets)
      : config_(config), grams_(std::move(gram_sets)) {
    self_unnorm_ = 0.0;
    for (const auto& set : grams_) self_unnorm_ += static_cast<double>(set.size());
  }

  const KernelConfig& config() const { return config_; }

  // Distinct n-grams for one n, sorted by byte order.
  std::span<const std::string> grams(int n) const {
    if (n < config_.n_min || n > config_.n_max)
      throw Error("n outside the profile's blended range");
    return grams_[static_cast<std::size_t>(n - config_.n_min)];
  }

  // Unnormalized self-similarity: the total number of distinct n-grams
  // across the blended range. Zero for texts shorter than n_min.
  double self_similarity() const { return self_unnorm_; }

  std::size_t total_grams() const {
    return static_cast<std::size_t>(self_unnorm_);
  }

 private:
  KernelConfig config_;
  std::vector<std::vector<std::string>> grams_;
  double self_unnorm_ = 0.0;
};

// Enumerates the distinct contiguous substrings of n scalar values for each
// n in the blended range. Texts shorter than n yield an empty set for that n.
inline NGramProfile profile(std::string_view text, const KernelConfig& config) {
  config.validate();
  const std::vector<std::size_t> offsets = utf8_offsets(text);
  const std::size_t n_scalars = offsets.size() - 1;

  std::vector<std::vector<std::string>> sets;
  sets.reserve(static_cast<std::size_t>(config.n_max - config.n_min + 1));
  for (int n = config.n_min; n <= config.n_max; ++n) {
    std::vector<std::string> grams;
    const std::size_t un = static_cast<std::size_t>(n);
    if (n_scalars >= un) {
      grams.reserve(n_scalars - un + 1);
      for (std::size_t i = 0; i + un <= n_scalars; ++i) {
        grams.emplace_back(text.substr(offsets[i], offsets[i + un] - offsets[i]));
      }
      std::sort(grams.begin(), grams.end());
      grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    }
    sets.push_back(std::move(grams));
  }
  return NGramProfile(config, std::move(sets));
}

namespace detail {

template <typename T>
std::size_t sorted_intersection_size(std::span<const T> a, std::span<const T> b) {
  std::size_t count = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

inline double normalize_value(double unnorm, double self_x, double self_y) {
  if (self_x <= 0.0 || self_y <= 0.0) return 0.0;
  return unnorm / std::sqrt(self_x * self_y);
}

}  // namespace detail

// Presence-bits kernel over the blended range: the number of distinct
// n-grams the two texts share, summed over n. With normalization the value
// is scaled to unit self-similarity.
inline double kernel_value(const NGramProfile& x, const NGramProfile& y) {
  if (!(x.config() == y.config()))
    throw Error("kernel_value: profiles built with different configs");
  double unnorm = 0.0;
  for (int n = x.config().n_min; n <= x.config().n_max; ++n) {
    unnorm += static_cast<double>(
        detail::sorted_intersection_size(x.grams(n), y.grams(n)));
  }
  if (!x.config().normalize) return unnorm;
  return detail::normalize_value(unnorm, x.self_similarity(), y.self_similarity());
}

struct KernelMatrix {
  Matrix values;
  KernelConfig config;

  std::size_t rows() const { return values.rows; }
  std::size_t cols() const { return values.cols; }
  double at(std::size_t i, std::size_t j) const { return values.at(i, j); }
};

namespace detail {

// Interned view of a profile set: every distinct n-gram across both sides
// gets a dense integer id (exact, no collisions), and each profile becomes a
// sorted id vector. Set intersections then run on integers. Because n-grams
// of different lengths are distinct strings, one combined set per profile
// carries the whole blended range.
struct InternedProfiles {
  std::vector<std::vector<std::uint32_t>> ids;
  std::vector<double> self;
};

inline void intern_side(std::span<const NGramProfile> side,
                        std::unordered_map<std::string_view, std::uint32_t>& table,
                        InternedProfiles& out, const KernelConfig& config) {
  out.ids.reserve(side.size());
  out.self.reserve(side.size());
  for (const auto& p : side) {
    if (!(p.config() == config))
      throw Error("gram_matrix: profiles built with different configs");
    std::vector<std::uint32_t> ids;
    ids.reserve(p.total_grams());
    for (int n = config.n_min; n <= config.n_max; ++n) {
      for (const auto& g : p.grams(n)) {
        auto [it, _] = table.try_emplace(
            std::string_view(g), static_cast<std::uint32_t>(table.size()));
        ids.push_back(it->second);
      }
    }
    std::sort(ids.begin(), ids.end());
    out.ids.push_back(std::move(ids));
    out.self.push_back(p.self_similarity());
  }
}

}  // namespace detail

// Gram matrix of kernel values, rows indexed by `left`, columns by `right`.
// Cells match kernel_value exactly; interning only changes the speed.
// When both sides are the same profile list the result is exactly symmetric.
inline KernelMatrix gram_matrix(std::span<const NGramProfile> left,
                                std::span<const NGramProfile> right,
                                unsigned threads = 1) {
  if (left.empty() || right.empty())
    throw DataError("gram_matrix: empty profile list");
  const KernelConfig config = left[0].config();
  const bool symmetric =
      left.data() == right.data() && left.size() == right.size();

  std::unordered_map<std::string_view, std::uint32_t> table;
  detail::InternedProfiles li;
  detail::intern_side(left, table, li, config);
  detail::InternedProfiles ri;
  if (!symmetric) detail::intern_side(right, table, ri, config);
  const detail::InternedProfiles& rref = symmetric ? li : ri;

  KernelMatrix K;
  K.config = config;
  K.values = Matrix(left.size(), right.size());

  parallel_for(left.size(), threads, [&](std::size_t row_begin, std::size_t row_end) {
    for (std::size_t i = row_begin; i < row_end; ++i) {
      const std::size_t j_begin = symmetric ? i : 0;
      for (std::size_t j = j_begin; j < right.size(); ++j) {
        double v;
        if (symmetric && j == i) {
          v = config.normalize ? (li.self[i] > 0.0 ? 1.0 : 0.0) : li.self[i];
        } else {
          const double unnorm =
              static_cast<double>(detail::sorted_intersection_size(
                  std::span<const std::uint32_t>(li.ids[i]),
                  std::span<const std::uint32_t>(rref.ids[j])));
          v = config.normalize
                  ? detail::normalize_value(unnorm, li.self[i], rref.self[j])
                  : unnorm;
        }
        K.values.at(i, j) = v;
      }
    }
  });

  if (symmetric) {
    for (std::size_t i = 0; i < left.size(); ++i)
      for (std::size_t j = 0; j < i; ++j) K.values.at(i, j) = K.values.at(j, i);
  }
  return K;
}

inline KernelMatrix gram_matrix(std::span<const NGramProfile> profiles,
                                unsigned threads = 1) {
  return gram_matrix(profiles, profiles, threads);
}

inline std::vector<NGramProfile> profile_all(std::span<const std::string> texts,
                                             const KernelConfig& config,
                                             unsigned threads = 1) {
  std::vector<NGramProfile> profiles(texts.size());
  parallel_for(texts.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) profiles[i] = profile(texts[i], config);
  });
  return profiles;
}

}  // namespace geokern
