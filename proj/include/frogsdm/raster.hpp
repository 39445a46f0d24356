#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "frogsdm/rng.hpp"

namespace frogsdm {

enum class Modality { RGB, LC, NDVI };

inline std::string modality_name(Modality m) {
  switch (m) {
    case Modality::RGB: return "rgb";
    case Modality::LC: return "lc";
    default: return "ndvi";
  }
}

inline Modality parse_modality(const std::string& s) {
  if (s == "rgb") return Modality::RGB;
  if (s == "lc") return Modality::LC;
  if (s == "ndvi") return Modality::NDVI;
  throw std::invalid_argument("unknown modality '" + s + "' (expected rgb|lc|ndvi)");
}

// Land-cover bands carry integer class IDs 0-9 and must never be
// interpolated; everything else is a continuous reflectance/index band.
inline bool is_landcover_band(const std::string& name) {
  return name.rfind("landcover", 0) == 0 || name == "lc";
}

inline constexpr int kLandcoverClasses = 10;

struct Band {
  std::string name;
  std::vector<float> pixels;  // row-major, height*width
};

struct RasterPatch {
  int height = 0;
  int width = 0;
  std::vector<Band> bands;

  float at(std::size_t band, int r, int c) const {
    return bands[band].pixels[static_cast<std::size_t>(r) * width + c];
  }
  float& at(std::size_t band, int r, int c) {
    return bands[band].pixels[static_cast<std::size_t>(r) * width + c];
  }

  const Band* find_band(const std::string& name) const {
    for (const Band& b : bands)
      if (b.name == name) return &b;
    return nullptr;
  }

  const Band& band_or_throw(const std::string& name) const {
    const Band* b = find_band(name);
    if (!b) {
      std::string have;
      for (const Band& x : bands) have += (have.empty() ? "" : ",") + x.name;
      throw std::invalid_argument("patch has no band '" + name + "' (bands: " + have + ")");
    }
    return *b;
  }
};

inline RasterPatch make_patch(int height, int width, const std::vector<std::string>& band_names) {
  if (height <= 0 || width <= 0) throw std::invalid_argument("patch dims must be positive");
  RasterPatch p;
  p.height = height;
  p.width = width;
  for (const auto& n : band_names)
    p.bands.push_back({n, std::vector<float>(static_cast<std::size_t>(height) * width, 0.0f)});
  return p;
}

namespace detail {

inline RasterPatch normalized_difference(const RasterPatch& patch, const std::string& plus,
                                         const std::string& minus, const std::string& out_name) {
  const Band& a = patch.band_or_throw(plus);
  const Band& b = patch.band_or_throw(minus);
  RasterPatch out = make_patch(patch.height, patch.width, {out_name});
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double num = static_cast<double>(a.pixels[i]) - b.pixels[i];
    const double den = static_cast<double>(a.pixels[i]) + b.pixels[i];
    out.bands[0].pixels[i] = den == 0.0 ? 0.0f : static_cast<float>(num / den);
  }
  return out;
}

}  // namespace detail

// (NIR - Red) / (NIR + Red), zero-denominator pixels map to 0.
inline RasterPatch ndvi(const RasterPatch& patch) {
  return detail::normalized_difference(patch, "nir", "red", "ndvi");
}

// (Green - NIR) / (Green + NIR).
inline RasterPatch ndwi(const RasterPatch& patch) {
  return detail::normalized_difference(patch, "green", "nir", "ndwi");
}

namespace detail {

inline float sample_bilinear(const Band& band, int h, int w, double sr, double sc) {
  sr = std::clamp(sr, 0.0, static_cast<double>(h - 1));
  sc = std::clamp(sc, 0.0, static_cast<double>(w - 1));
  const int r0 = static_cast<int>(std::floor(sr));
  const int c0 = static_cast<int>(std::floor(sc));
  const int r1 = std::min(r0 + 1, h - 1);
  const int c1 = std::min(c0 + 1, w - 1);
  const double fr = sr - r0;
  const double fc = sc - c0;
  auto px = [&](int r, int c) {
    return static_cast<double>(band.pixels[static_cast<std::size_t>(r) * w + c]);
  };
  const double top = px(r0, c0) * (1.0 - fc) + px(r0, c1) * fc;
  const double bot = px(r1, c0) * (1.0 - fc) + px(r1, c1) * fc;
  return static_cast<float>(top * (1.0 - fr) + bot * fr);
}

inline float sample_nearest(const Band& band, int h, int w, double sr, double sc) {
  const int r = std::clamp(static_cast<int>(std::lround(sr)), 0, h - 1);
  const int c = std::clamp(static_cast<int>(std::lround(sc)), 0, w - 1);
  return band.pixels[static_cast<std::size_t>(r) * w + c];
}

// Align-corners source coordinate for an output index.
inline double resize_coord(int out_i, int out_n, int in_n) {
  if (out_n == 1) return 0.5 * (in_n - 1);
  return static_cast<double>(out_i) * (in_n - 1) / (out_n - 1);
}

}  // namespace detail

// Bilinear for continuous bands, nearest-neighbor for land-cover bands.
inline RasterPatch resize_patch(const RasterPatch& patch, int target_h, int target_w) {
  if (target_h <= 0 || target_w <= 0) throw std::invalid_argument("resize: target dims must be positive");
  RasterPatch out;
  out.height = target_h;
  out.width = target_w;
  for (const Band& band : patch.bands) {
    Band nb{band.name, std::vector<float>(static_cast<std::size_t>(target_h) * target_w)};
    const bool categorical = is_landcover_band(band.name);
    for (int r = 0; r < target_h; ++r) {
      const double sr = detail::resize_coord(r, target_h, patch.height);
      for (int c = 0; c < target_w; ++c) {
        const double sc = detail::resize_coord(c, target_w, patch.width);
        nb.pixels[static_cast<std::size_t>(r) * target_w + c] =
            categorical ? detail::sample_nearest(band, patch.height, patch.width, sr, sc)
                        : detail::sample_bilinear(band, patch.height, patch.width, sr, sc);
      }
    }
    out.bands.push_back(std::move(nb));
  }
  return out;
}

// All windows fully inside the patch, row-major order.
inline std::vector<RasterPatch> sliding_window(const RasterPatch& patch, int win_h, int win_w,
                                               int stride) {
  if (win_h <= 0 || win_w <= 0 || stride < 1)
    throw std::invalid_argument("sliding_window: window dims and stride must be positive");
  if (win_h > patch.height || win_w > patch.width)
    throw std::invalid_argument("sliding_window: window larger than patch");
  std::vector<RasterPatch> out;
  for (int r0 = 0; r0 + win_h <= patch.height; r0 += stride) {
    for (int c0 = 0; c0 + win_w <= patch.width; c0 += stride) {
      RasterPatch win;
      win.height = win_h;
      win.width = win_w;
      for (const Band& band : patch.bands) {
        Band nb{band.name, std::vector<float>(static_cast<std::size_t>(win_h) * win_w)};
        for (int r = 0; r < win_h; ++r)
          for (int c = 0; c < win_w; ++c)
            nb.pixels[static_cast<std::size_t>(r) * win_w + c] =
                band.pixels[static_cast<std::size_t>(r0 + r) * patch.width + (c0 + c)];
        win.bands.push_back(std::move(nb));
      }
      out.push_back(std::move(win));
    }
  }
  return out;
}

struct AugmentationConfig {
  double hflip_prob = 0.5;
  double rotation_min_deg = -10.0;
  double rotation_max_deg = 10.0;
  double scale_min = 0.6;
  double scale_max = 1.4;
  std::vector<std::pair<int, int>> resize_targets;  // empty keeps input dims
};

inline RasterPatch hflip(const RasterPatch& patch) {
  RasterPatch out = patch;
  for (std::size_t b = 0; b < patch.bands.size(); ++b)
    for (int r = 0; r < patch.height; ++r)
      for (int c = 0; c < patch.width; ++c) out.at(b, r, c) = patch.at(b, r, patch.width - 1 - c);
  return out;
}

namespace detail {

// Inverse-mapped geometric warp about the patch center; edge pixels clamped.
template <typename CoordFn>
RasterPatch warp(const RasterPatch& patch, CoordFn&& source_coords) {
  RasterPatch out = patch;
  for (std::size_t b = 0; b < patch.bands.size(); ++b) {
    const bool categorical = is_landcover_band(patch.bands[b].name);
    for (int r = 0; r < patch.height; ++r) {
      for (int c = 0; c < patch.width; ++c) {
        const auto [sr, sc] = source_coords(r, c);
        out.at(b, r, c) = categorical
                              ? sample_nearest(patch.bands[b], patch.height, patch.width, sr, sc)
                              : sample_bilinear(patch.bands[b], patch.height, patch.width, sr, sc);
      }
    }
  }
  return out;
}

}  // namespace detail

inline RasterPatch rotate(const RasterPatch& patch, double angle_deg) {
  const double th = angle_deg * M_PI / 180.0;
  const double ct = std::cos(th), st = std::sin(th);
  const double cr = 0.5 * (patch.height - 1), cc = 0.5 * (patch.width - 1);
  return detail::warp(patch, [&](int r, int c) {
    const double dr = r - cr, dc = c - cc;
    return std::pair<double, double>{cr + dr * ct - dc * st, cc + dr * st + dc * ct};
  });
}

inline RasterPatch scale(const RasterPatch& patch, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("scale: factor must be positive");
  const double cr = 0.5 * (patch.height - 1), cc = 0.5 * (patch.width - 1);
  return detail::warp(patch, [&](int r, int c) {
    return std::pair<double, double>{cr + (r - cr) / factor, cc + (c - cc) / factor};
  });
}

// Flip -> rotate -> scale -> resize, with a fixed draw order so the output
// is a pure function of (patch, cfg, rng state).
inline RasterPatch augment(const RasterPatch& patch, const AugmentationConfig& cfg, Rng& rng) {
  const bool do_flip = rng.uniform() < cfg.hflip_prob;
  const double angle = rng.uniform(cfg.rotation_min_deg, cfg.rotation_max_deg);
  const double factor = rng.uniform(cfg.scale_min, cfg.scale_max);

  RasterPatch out = do_flip ? hflip(patch) : patch;
  if (angle != 0.0) out = rotate(out, angle);
  if (factor != 1.0) out = scale(out, factor);
  if (!cfg.resize_targets.empty()) {
    const auto [h, w] = cfg.resize_targets[rng.uniform_index(cfg.resize_targets.size())];
    if (h != out.height || w != out.width) out = resize_patch(out, h, w);
  }
  return out;
}

// Mode of the land-cover band's class IDs; ties break to the lowest ID.
inline int dominant_landcover(const RasterPatch& patch) {
  const Band* lc = nullptr;
  for (const Band& b : patch.bands)
    if (is_landcover_band(b.name)) {
      lc = &b;
      break;
    }
  if (!lc) throw std::invalid_argument("patch has no landcover band");
  std::array<int, kLandcoverClasses> counts{};
  for (float v : lc->pixels) {
    const int id = static_cast<int>(std::lround(v));
    if (id < 0 || id >= kLandcoverClasses)
      throw std::invalid_argument("landcover class " + std::to_string(id) + " out of range [0,9]");
    ++counts[id];
  }
  int best = 0;
  for (int k = 1; k < kLandcoverClasses; ++k)
    if (counts[k] > counts[best]) best = k;
  return best;
}

// --- Patch file format -------------------------------------------------
// magic "ASDM" | u16 band count | u16 height | u16 width |
// per band: 16-byte null-padded name, then h*w little-endian float32.

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_f32(std::string& out, float v) {
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline float get_f32(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

}  // namespace detail

inline constexpr char kPatchMagic[4] = {'A', 'S', 'D', 'M'};
inline constexpr std::size_t kBandNameBytes = 16;

inline void write_patch(const RasterPatch& patch, const std::filesystem::path& path) {
  if (patch.bands.empty()) throw std::invalid_argument("write_patch: patch has no bands");
  std::string buf;
  buf.append(kPatchMagic, 4);
  detail::put_u16(buf, static_cast<std::uint16_t>(patch.bands.size()));
  detail::put_u16(buf, static_cast<std::uint16_t>(patch.height));
  detail::put_u16(buf, static_cast<std::uint16_t>(patch.width));
  for (const Band& band : patch.bands) {
    if (band.name.size() > kBandNameBytes)
      throw std::invalid_argument("write_patch: band name '" + band.name + "' exceeds 16 bytes");
    if (band.pixels.size() != static_cast<std::size_t>(patch.height) * patch.width)
      throw std::invalid_argument("write_patch: band '" + band.name + "' has wrong pixel count");
    std::string name(kBandNameBytes, '\0');
    std::copy(band.name.begin(), band.name.end(), name.begin());
    buf += name;
    for (float v : band.pixels) detail::put_f32(buf, v);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_patch: cannot open " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

inline RasterPatch read_patch(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_patch: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  const unsigned char* p = reinterpret_cast<const unsigned char*>(buf.data());
  if (buf.size() < 10 || std::memcmp(p, kPatchMagic, 4) != 0)
    throw std::runtime_error("read_patch: bad magic in " + path.string());
  const std::uint16_t n_bands = detail::get_u16(p + 4);
  const std::uint16_t h = detail::get_u16(p + 6);
  const std::uint16_t w = detail::get_u16(p + 8);
  const std::size_t band_bytes = kBandNameBytes + static_cast<std::size_t>(h) * w * 4;
  if (buf.size() != 10 + n_bands * band_bytes)
    throw std::runtime_error("read_patch: truncated file " + path.string());
  RasterPatch patch;
  patch.height = h;
  patch.width = w;
  std::size_t off = 10;
  for (std::uint16_t b = 0; b < n_bands; ++b) {
    const char* name_ptr = buf.data() + off;
    std::size_t len = 0;
    while (len < kBandNameBytes && name_ptr[len] != '\0') ++len;
    Band band{std::string(name_ptr, len), {}};
    band.pixels.resize(static_cast<std::size_t>(h) * w);
    off += kBandNameBytes;
    for (std::size_t i = 0; i < band.pixels.size(); ++i, off += 4)
      band.pixels[i] = detail::get_f32(p + off);
    patch.bands.push_back(std::move(band));
  }
  return patch;
}

inline std::string band_to_text(const RasterPatch& patch, const std::string& band_name) {
  const Band& band = patch.band_or_throw(band_name);
  std::ostringstream out;
  for (int r = 0; r < patch.height; ++r) {
    for (int c = 0; c < patch.width; ++c) {
      if (c) out << ' ';
      out << band.pixels[static_cast<std::size_t>(r) * patch.width + c];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace frogsdm
