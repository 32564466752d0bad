#pragma once

// Block-wise sparse image recovery in an 8x8 2D Haar basis, PSNR and binary
// PGM (P5) input/output.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbp/experiments.hpp"
#include "fbp/linalg.hpp"
#include "fbp/pursuit.hpp"
#include "fbp/signals.hpp"

namespace fbp {

class BadDimensions : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class PgmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kBlock = 8;
inline constexpr std::size_t kBlockPixels = kBlock * kBlock;

/// Row-major grayscale image. Pixel values are kept as doubles and are not
/// clamped until export.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, double fill = 0.0)
      : width(w), height(h), pixels(w * h, fill) {}

  double& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  double at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }

  std::size_t blocks_x() const { return width / kBlock; }
  std::size_t blocks_y() const { return height / kBlock; }
  std::size_t block_count() const { return blocks_x() * blocks_y(); }

  /// Block b (row-major over blocks) as a 64-vector, pixels row-major.
  DenseVector block(std::size_t b) const {
    const std::size_t bx = b % blocks_x();
    const std::size_t by = b / blocks_x();
    DenseVector v(kBlockPixels);
    for (std::size_t r = 0; r < kBlock; ++r)
      for (std::size_t c = 0; c < kBlock; ++c)
        v[r * kBlock + c] = at(bx * kBlock + c, by * kBlock + r);
    return v;
  }

  void set_block(std::size_t b, const DenseVector& v) {
    const std::size_t bx = b % blocks_x();
    const std::size_t by = b / blocks_x();
    for (std::size_t r = 0; r < kBlock; ++r)
      for (std::size_t c = 0; c < kBlock; ++c)
        at(bx * kBlock + c, by * kBlock + r) = v[r * kBlock + c];
  }

  /// Rounded to the nearest integer and clamped to [0, 255].
  GrayImage quantized() const {
    GrayImage out = *this;
    for (double& p : out.pixels) p = std::clamp(std::round(p), 0.0, 255.0);
    return out;
  }
};

inline void require_block_dims(const GrayImage& img) {
  if (img.width == 0 || img.height == 0 || img.width % kBlock != 0 || img.height % kBlock != 0)
    throw BadDimensions("image dimensions must be positive multiples of 8");
}

// ---------------------------------------------------------------------------
// Haar basis

namespace detail {

// One level of the orthonormal Haar step on the leading `size` entries:
// averages go to [0, size/2), differences to [size/2, size).
inline void haar_step(double* v, std::size_t size, std::size_t stride) {
  const double s = 1.0 / std::sqrt(2.0);
  double tmp[kBlock];
  const std::size_t half = size / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double a = v[(2 * i) * stride];
    const double b = v[(2 * i + 1) * stride];
    tmp[i] = s * (a + b);
    tmp[half + i] = s * (a - b);
  }
  for (std::size_t i = 0; i < size; ++i) v[i * stride] = tmp[i];
}

// 3-level 2D (pyramid) Haar analysis in place on a row-major 8x8 block.
inline void haar2d_forward(double* block) {
  for (std::size_t size = kBlock; size >= 2; size /= 2) {
    for (std::size_t r = 0; r < size; ++r) haar_step(block + r * kBlock, size, 1);
    for (std::size_t c = 0; c < size; ++c) haar_step(block + c, size, kBlock);
  }
}

// Position (row, col) in the pyramid layout of each coefficient index.
inline std::vector<std::pair<std::size_t, std::size_t>> subband_order() {
  std::vector<std::pair<std::size_t, std::size_t>> order{{0, 0}};
  for (std::size_t s = 1; s < kBlock; s *= 2) {
    // horizontal detail, vertical detail, diagonal detail
    const std::pair<std::size_t, std::size_t> origins[3] = {{0, s}, {s, 0}, {s, s}};
    for (auto [r0, c0] : origins)
      for (std::size_t r = 0; r < s; ++r)
        for (std::size_t c = 0; c < s; ++c) order.emplace_back(r0 + r, c0 + c);
  }
  return order;
}

}  // namespace detail

/// Orthonormal 2D Haar synthesis matrix for 8x8 blocks: pixels = psi * coeffs,
/// coeffs = psi^T * pixels, with pixels in row-major block order.
///
/// The analysis is the 3-level pyramid transform (rows then columns at each
/// level on the remaining low-pass square). Coefficient order is coarse to
/// fine: index 0 is the DC term (8 x block mean); then for band sizes
/// 1x1, 2x2, 4x4 in turn, the horizontal-detail (top-right), vertical-detail
/// (bottom-left) and diagonal-detail (bottom-right) bands, each row-major.
struct HaarBasis {
  DenseMatrix psi;

  DenseVector analyze(const DenseVector& pixels) const {
    DenseVector c(kBlockPixels);
    for (std::size_t p = 0; p < kBlockPixels; ++p) {
      auto row = psi.row(p);
      const double v = pixels[p];
      for (std::size_t j = 0; j < kBlockPixels; ++j) c[j] += row[j] * v;
    }
    return c;
  }

  DenseVector synthesize(const DenseVector& coeffs) const { return multiply(psi, coeffs.span()); }
};

inline HaarBasis haar_basis_8x8() {
  const auto order = detail::subband_order();
  HaarBasis basis{DenseMatrix(kBlockPixels, kBlockPixels)};
  for (std::size_t p = 0; p < kBlockPixels; ++p) {
    double block[kBlockPixels] = {};
    block[p] = 1.0;
    detail::haar2d_forward(block);
    // Row p of the analysis matrix is column p of psi^T, i.e. psi(p, j) = A(j, p).
    for (std::size_t j = 0; j < kBlockPixels; ++j) {
      const auto [r, c] = order[j];
      basis.psi(p, j) = block[r * kBlock + c];
    }
  }
  return basis;
}

// ---------------------------------------------------------------------------
// Sparsification and recovery

/// Keeps the k largest-magnitude Haar coefficients of every 8x8 block (ties
/// to the lower coefficient index).
inline GrayImage sparsify_blocks(const GrayImage& img, std::size_t k) {
  require_block_dims(img);
  if (k < 1 || k > kBlockPixels) throw std::invalid_argument("sparsify_blocks: need 1 <= k <= 64");
  const HaarBasis basis = haar_basis_8x8();
  GrayImage out = img;
  for (std::size_t b = 0; b < img.block_count(); ++b) {
    const DenseVector c = basis.analyze(img.block(b));
    const IndexSet keep = top_k_by_magnitude(c, k);
    DenseVector kept(kBlockPixels);
    for (std::size_t j : keep) kept[j] = c[j];
    out.set_block(b, basis.synthesize(kept));
  }
  return out;
}

/// Seed group for per-block observation matrices.
inline constexpr std::uint64_t kImageSeedGroup = 0x696d616765ULL;

struct ImageRecovery {
  GrayImage image;
  std::vector<RecoveryStatus> statuses;  // per block
  std::size_t direct_blocks = 0;
};

struct ImageRecoveryOptions {
  unsigned threads = 1;
  /// With m >= 64 the block system is determined; solve it by least squares
  /// instead of running the sparse algorithm.
  bool solve_determined_directly = false;
};

/// Recovers every block from m Gaussian measurements (std 1/64) of its pixels
/// using the holographic dictionary V = Phi * psi. Block b draws its Phi from
/// derive_seed(master_seed, kImageSeedGroup, b).
inline ImageRecovery recover_image(const GrayImage& img, std::size_t m, const AlgorithmConfig& alg,
                                   std::uint64_t master_seed,
                                   const ImageRecoveryOptions& opts = {}) {
  require_block_dims(img);
  if (m < 1 || m > kBlockPixels) throw std::invalid_argument("recover_image: need 1 <= m <= 64");
  const HaarBasis basis = haar_basis_8x8();

  ImageRecovery out;
  out.image = GrayImage(img.width, img.height);
  out.statuses.assign(img.block_count(), RecoveryStatus::Converged);
  std::vector<char> direct(img.block_count(), 0);

  parallel_for(img.block_count(), opts.threads, [&](std::size_t b) {
    Rng rng(derive_seed(master_seed, kImageSeedGroup, b));
    const DenseMatrix phi = sample_observation_matrix(m, kBlockPixels, rng);
    const DenseMatrix dict = multiply(phi, basis.psi);
    const DenseVector y = multiply(phi, img.block(b).span());

    DenseVector coeffs(kBlockPixels);
    if (opts.solve_determined_directly && m >= kBlockPixels) {
      direct[b] = 1;
      try {
        coeffs = least_squares(dict, y);
      } catch (const RankDeficient&) {
        out.statuses[b] = RecoveryStatus::IllPosedProjection;
      }
    } else {
      const RecoveryResult res = recover(dict, y, alg);
      out.statuses[b] = res.status;
      coeffs = res.estimate.dense();
    }
    out.image.set_block(b, basis.synthesize(coeffs));
  });
  out.direct_blocks = static_cast<std::size_t>(std::count(direct.begin(), direct.end(), 1));
  return out;
}

/// 10 log10(255^2 / MSE); +infinity for identical images.
inline double psnr(const GrayImage& a, const GrayImage& b) {
  if (a.width != b.width || a.height != b.height) throw DimensionMismatch("psnr: image sizes differ");
  if (a.pixels.empty()) throw DimensionMismatch("psnr: empty image");
  double sse = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = a.pixels[i] - b.pixels[i];
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(a.pixels.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

/// Piecewise-constant test image: a background level plus randomly placed
/// overlapping rectangles of random gray levels.
inline GrayImage synthetic_image(std::size_t width, std::size_t height, std::uint64_t seed,
                                 std::size_t rectangles = 12) {
  Rng rng(seed);
  GrayImage img(width, height, std::round(rng.uniform(40.0, 200.0)));
  for (std::size_t i = 0; i < rectangles; ++i) {
    const std::size_t x0 = rng.below(width);
    const std::size_t y0 = rng.below(height);
    const std::size_t w = 1 + rng.below(std::max<std::size_t>(1, width / 2));
    const std::size_t h = 1 + rng.below(std::max<std::size_t>(1, height / 2));
    const double level = std::round(rng.uniform(0.0, 255.0));
    for (std::size_t y = y0; y < std::min(height, y0 + h); ++y)
      for (std::size_t x = x0; x < std::min(width, x0 + w); ++x) img.at(x, y) = level;
  }
  return img;
}

// ---------------------------------------------------------------------------
// PGM

namespace detail {

inline void skip_pgm_space(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
      in.get();
    } else {
      return;
    }
  }
}

inline std::size_t read_pgm_uint(std::istream& in) {
  skip_pgm_space(in);
  std::size_t v = 0;
  bool any = false;
  while (std::isdigit(in.peek())) {
    v = v * 10 + static_cast<std::size_t>(in.get() - '0');
    any = true;
    if (v > (1u << 24)) throw PgmError("pgm: header value too large");
  }
  if (!any) throw PgmError("pgm: malformed header");
  return v;
}

}  // namespace detail

/// Reads a binary (P5) PGM with maxval <= 255; sample values are kept as-is.
inline GrayImage read_pgm(std::istream& in) {
  char magic[2] = {};
  if (!in.read(magic, 2) || magic[0] != 'P' || magic[1] != '5')
    throw PgmError("pgm: not a binary PGM (P5) file");
  const std::size_t w = detail::read_pgm_uint(in);
  const std::size_t h = detail::read_pgm_uint(in);
  const std::size_t maxval = detail::read_pgm_uint(in);
  if (w == 0 || h == 0) throw PgmError("pgm: empty image");
  if (maxval == 0 || maxval > 255) throw PgmError("pgm: only 8-bit maxval is supported");
  const int sep = in.get();
  if (sep != ' ' && sep != '\n' && sep != '\r' && sep != '\t') throw PgmError("pgm: malformed header");

  std::vector<unsigned char> raw(w * h);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
    throw PgmError("pgm: truncated pixel data");
  GrayImage img(w, h);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] > maxval) throw PgmError("pgm: sample exceeds maxval");
    img.pixels[i] = raw[i];
  }
  return img;
}

inline GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PgmError("pgm: cannot open " + path);
  return read_pgm(in);
}

/// Writes P5 with maxval 255, rounding and clamping each pixel.
inline void write_pgm(std::ostream& out, const GrayImage& img) {
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.pixels.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    raw[i] = static_cast<unsigned char>(std::clamp(std::round(img.pixels[i]), 0.0, 255.0));
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

inline void write_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PgmError("pgm: cannot write " + path);
  write_pgm(out, img);
  if (!out) throw PgmError("pgm: write failed for " + path);
}

}  // namespace fbp
