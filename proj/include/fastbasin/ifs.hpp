#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fastbasin/geometry.hpp"
#include "fastbasin/maps.hpp"

namespace fastbasin {

inline constexpr std::size_t kMaxMaps = 64;

/// Finite index sequence over {1..N}. The empty word is the identity.
struct Word {
  std::vector<int> indices;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }

  friend Word operator+(const Word& u, const Word& v);
  friend bool operator==(const Word&, const Word&) = default;
};

/// Parses "1,2,3" or "1 2 3"; empty string gives the empty word.
Word parse_word(std::string_view text);
std::string to_string(const Word& word);

struct IfsSystem {
  std::string name;
  ModelSpace space = ModelSpace::Plane2;
  std::vector<MapSpec> maps;
  /// View window from the config ("window" directive).
  std::optional<Box> window;
  /// Window used for attractor computation ("attractor_window" directive).
  std::optional<Box> attractor_window;

  std::size_t size() const { return maps.size(); }
  const MapSpec& map(int index) const;  // 1-based
  bool all_total() const;
  bool all_affine() const;
};

/// Validates space consistency, map count and determinant conditions.
IfsSystem make_ifs(std::string name, ModelSpace space, std::vector<MapSpec> maps);

/// Line-based config format:
///   space <plane2|line1ext|cplane2|strip2>
///   map affine2 a b c d tx ty
///   map moebius1 p q r s
///   map caffine2 re11 im11 re21 im21 re22 im22 ret1 imt1 ret2 imt2
///   map halfsqrt tx
///   window xmin ymin xmax ymax
///   attractor_window xmin ymin xmax ymax
///   name <string>
/// '#' starts a comment; errors carry the offending line number.
IfsSystem parse_ifs(std::string_view config_text);
IfsSystem load_ifs(const std::filesystem::path& path);
std::string to_config(const IfsSystem& ifs);

/// w_{t1} o ... o w_{tk}(x): the last index is applied first.
Point apply_word(const IfsSystem& ifs, const Word& word, const Point& x);

/// w_{t1}^-1 o ... o w_{tk}^-1 (y): the inverse of apply_word on the reversed word.
Point apply_inverse_word(const IfsSystem& ifs, const Word& word, const Point& y);

/// Fixed point of map `index` (1-based). Affine2 / Moebius1 / ComplexAffine2
/// only; Moebius returns the attracting fixed point when two exist.
Point fixed_point(const IfsSystem& ifs, int index);

}  // namespace fastbasin
