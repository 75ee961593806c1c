#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "dtsynth/error.hpp"
#include "dtsynth/image.hpp"

namespace dtsynth {

/// Fixed-length hand-crafted image descriptor (128 dims):
/// 8x8 downsampled grayscale (64) + 3x8-bin color histograms (24) +
/// 8-bin gradient-orientation histogram per quadrant (32) + 8 reserved zeros.
struct FeatureVector {
  std::vector<double> values;
};

inline constexpr int kFeatureDim = 128;

namespace detail {

inline void require_same_size(const RasterImage& a, const RasterImage& b) {
  if (a.width != b.width || a.height != b.height)
    throw DataError("image dimension mismatch");
}

/// Luma on the 0..255 scale (Rec. 601 weights).
inline std::vector<double> grayscale(const RasterImage& img) {
  std::vector<double> g(static_cast<std::size_t>(img.width) * img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      g[static_cast<std::size_t>(y) * img.width + x] =
          0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
  return g;
}

// A single-channel float plane.
struct Plane {
  int width = 0, height = 0;
  std::vector<double> data;

  Plane() = default;
  Plane(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0.0) {}
  double at(int x, int y) const {
    x = std::clamp(x, 0, width - 1);  // clamp-to-edge
    y = std::clamp(y, 0, height - 1);
    return data[static_cast<std::size_t>(y) * width + x];
  }
  double& ref(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
};

inline Plane channel_plane(const RasterImage& img, int c) {
  Plane p(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) p.ref(x, y) = img.at(x, y, c) / 255.0;
  return p;
}

inline Plane convolve3(const Plane& src, const std::array<double, 9>& k) {
  Plane out(src.width, src.height);
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      double s = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) s += k[(dy + 1) * 3 + (dx + 1)] * src.at(x + dx, y + dy);
      out.ref(x, y) = s;
    }
  return out;
}

inline Plane downsample2(const Plane& src) {
  Plane out(src.width / 2, src.height / 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      out.ref(x, y) = 0.25 * (src.at(2 * x, 2 * y) + src.at(2 * x + 1, 2 * y) +
                              src.at(2 * x, 2 * y + 1) + src.at(2 * x + 1, 2 * y + 1));
  return out;
}

}  // namespace detail

/// Fixed bank of 3x3 kernels applied per RGB channel at 3 dyadic scales.
/// Every kernel sums to 0 except the low-pass box; a constant bias channel is
/// prepended so per-position normalization never divides by zero.
struct FilterBank {
  static constexpr int kKernels = 6;
  static constexpr int kScales = 3;
  static constexpr int kChannels = 1 + 3 * kKernels;  // bias + RGB x kernels
  static constexpr double kBias = 0.5;

  static const std::array<std::array<double, 9>, kKernels>& kernels() {
    static const std::array<std::array<double, 9>, kKernels> k = {{
        // low-pass box
        {1 / 9.0, 1 / 9.0, 1 / 9.0, 1 / 9.0, 1 / 9.0, 1 / 9.0, 1 / 9.0, 1 / 9.0, 1 / 9.0},
        // horizontal / vertical derivative
        {0, 0, 0, -0.5, 0, 0.5, 0, 0, 0},
        {0, -0.5, 0, 0, 0, 0, 0, 0.5, 0},
        // diagonal derivatives
        {-0.5, 0, 0, 0, 0, 0, 0, 0, 0.5},
        {0, 0, -0.5, 0, 0, 0, 0.5, 0, 0},
        // center-surround
        {-1 / 9.0, -1 / 9.0, -1 / 9.0, -1 / 9.0, 8 / 9.0, -1 / 9.0, -1 / 9.0, -1 / 9.0, -1 / 9.0},
    }};
    return k;
  }

  /// Response stack for one scale: kChannels planes of the given size.
  static std::vector<detail::Plane> respond(const std::array<detail::Plane, 3>& rgb) {
    std::vector<detail::Plane> out;
    out.reserve(kChannels);
    detail::Plane bias(rgb[0].width, rgb[0].height);
    std::fill(bias.data.begin(), bias.data.end(), kBias);
    out.push_back(std::move(bias));
    for (int c = 0; c < 3; ++c)
      for (const auto& k : kernels()) out.push_back(detail::convolve3(rgb[c], k));
    return out;
  }

  /// Per-scale response stacks over 3 dyadic scales.
  static std::vector<std::vector<detail::Plane>> pyramid(const RasterImage& img) {
    std::array<detail::Plane, 3> rgb = {detail::channel_plane(img, 0),
                                        detail::channel_plane(img, 1),
                                        detail::channel_plane(img, 2)};
    std::vector<std::vector<detail::Plane>> scales;
    for (int s = 0; s < kScales; ++s) {
      scales.push_back(respond(rgb));
      if (rgb[0].width < 4 || rgb[0].height < 4) break;
      for (auto& p : rgb) p = detail::downsample2(p);
    }
    return scales;
  }
};

/// Mean structural similarity over an 11x11 Gaussian window (sigma 1.5),
/// computed on grayscale. Range [-1, 1]; 1 iff the grayscales are equal.
inline double ssim(const RasterImage& a, const RasterImage& b) {
  detail::require_same_size(a, b);
  constexpr int kWin = 11;
  if (a.width < kWin || a.height < kWin) throw DataError("ssim: image smaller than 11x11");
  constexpr double kC1 = (0.01 * 255) * (0.01 * 255);
  constexpr double kC2 = (0.03 * 255) * (0.03 * 255);

  static const std::array<double, kWin * kWin> weights = [] {
    std::array<double, kWin * kWin> w{};
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i)
      for (int j = 0; j < kWin; ++j) {
        const double d2 = (i - 5.0) * (i - 5.0) + (j - 5.0) * (j - 5.0);
        w[i * kWin + j] = std::exp(-d2 / (2.0 * 1.5 * 1.5));
        sum += w[i * kWin + j];
      }
    for (double& v : w) v /= sum;
    return w;
  }();

  const std::vector<double> ga = detail::grayscale(a);
  const std::vector<double> gb = detail::grayscale(b);
  const int W = a.width, H = a.height;

  double total = 0.0;
  long count = 0;
  for (int y = 0; y + kWin <= H; ++y) {
    for (int x = 0; x + kWin <= W; ++x) {
      double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
      for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) {
          const double w = weights[i * kWin + j];
          const double va = ga[static_cast<std::size_t>(y + i) * W + x + j];
          const double vb = gb[static_cast<std::size_t>(y + i) * W + x + j];
          mu_a += w * va;
          mu_b += w * vb;
          aa += w * va * va;
          bb += w * vb * vb;
          ab += w * (va * vb);  // symmetric association: ssim(a,b) == ssim(b,a) bit-exactly
        }
      const double var_a = aa - mu_a * mu_a;
      const double var_b = bb - mu_b * mu_b;
      const double cov = ab - mu_a * mu_b;
      total += ((2 * (mu_a * mu_b) + kC1) * (2 * cov + kC2)) /
               ((mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2));
      ++count;
    }
  }
  return total / count;
}

/// Frobenius distance between Gram matrices of filter-bank responses,
/// averaged over scales. Near-invariant to small translations.
inline double style_distance(const RasterImage& a, const RasterImage& b) {
  detail::require_same_size(a, b);
  const auto pa = FilterBank::pyramid(a);
  const auto pb = FilterBank::pyramid(b);

  auto gram = [](const std::vector<detail::Plane>& stack) {
    const int C = static_cast<int>(stack.size());
    const std::size_t P = stack[0].data.size();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(C, C);
    for (int i = 0; i < C; ++i)
      for (int j = i; j < C; ++j) {
        double s = 0.0;
        for (std::size_t p = 0; p < P; ++p) s += stack[i].data[p] * stack[j].data[p];
        g(i, j) = g(j, i) = s / static_cast<double>(P);
      }
    return g;
  };

  double total = 0.0;
  for (std::size_t s = 0; s < pa.size(); ++s) total += (gram(pa[s]) - gram(pb[s])).norm();
  return total / static_cast<double>(pa.size());
}

/// Feature-space L2 image distance: filter-bank responses, channel-wise
/// unit-normalized per spatial position, squared differences averaged over
/// positions, channels, and scales, then square root. A pseudometric; 0 iff
/// the images are identical.
inline double perceptual_distance(const RasterImage& a, const RasterImage& b) {
  detail::require_same_size(a, b);
  const auto pa = FilterBank::pyramid(a);
  const auto pb = FilterBank::pyramid(b);

  double scale_sum = 0.0;
  for (std::size_t s = 0; s < pa.size(); ++s) {
    const int C = static_cast<int>(pa[s].size());
    const std::size_t P = pa[s][0].data.size();
    double acc = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      double na = 0.0, nb = 0.0;
      for (int c = 0; c < C; ++c) {
        na += pa[s][c].data[p] * pa[s][c].data[p];
        nb += pb[s][c].data[p] * pb[s][c].data[p];
      }
      na = std::sqrt(na);  // >= bias channel magnitude, never zero
      nb = std::sqrt(nb);
      for (int c = 0; c < C; ++c) {
        const double d = pa[s][c].data[p] / na - pb[s][c].data[p] / nb;
        acc += d * d;
      }
    }
    scale_sum += acc / (static_cast<double>(P) * C);
  }
  return std::sqrt(scale_sum / static_cast<double>(pa.size()));
}

/// The 128-dim descriptor used for coreset selection and the Fréchet score.
inline FeatureVector extract_features(const RasterImage& img) {
  if (img.width < 8 || img.height < 8) throw DataError("extract_features: image smaller than 8x8");
  FeatureVector f;
  f.values.assign(kFeatureDim, 0.0);
  const int W = img.width, H = img.height;
  const std::vector<double> gray = detail::grayscale(img);

  // (a) 8x8 downsampled grayscale in [0,1]
  for (int by = 0; by < 8; ++by) {
    for (int bx = 0; bx < 8; ++bx) {
      const int x0 = bx * W / 8, x1 = (bx + 1) * W / 8;
      const int y0 = by * H / 8, y1 = (by + 1) * H / 8;
      double s = 0.0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) s += gray[static_cast<std::size_t>(y) * W + x];
      f.values[by * 8 + bx] = s / (255.0 * (x1 - x0) * (y1 - y0));
    }
  }

  // (b) per-channel 8-bin histograms, L1-normalized
  for (int c = 0; c < 3; ++c) {
    double* h = f.values.data() + 64 + 8 * c;
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) h[img.at(x, y, c) >> 5] += 1.0;
    for (int i = 0; i < 8; ++i) h[i] /= static_cast<double>(W) * H;
  }

  // (c) magnitude-weighted gradient-orientation histogram per quadrant
  for (int y = 1; y < H - 1; ++y) {
    for (int x = 1; x < W - 1; ++x) {
      const double gx = (gray[static_cast<std::size_t>(y) * W + x + 1] -
                         gray[static_cast<std::size_t>(y) * W + x - 1]) /
                        (2.0 * 255.0);
      const double gy = (gray[static_cast<std::size_t>(y + 1) * W + x] -
                         gray[static_cast<std::size_t>(y - 1) * W + x]) /
                        (2.0 * 255.0);
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx);
      if (angle < 0) angle += 2.0 * std::numbers::pi;
      const int bin = std::min(7, static_cast<int>(angle / (2.0 * std::numbers::pi) * 8.0));
      const int quadrant = (y < H / 2 ? 0 : 2) + (x < W / 2 ? 0 : 1);
      f.values[96 + quadrant * 8 + bin] += mag;
    }
  }
  for (int q = 0; q < 4; ++q) {
    double sum = 0.0;
    for (int i = 0; i < 8; ++i) sum += f.values[96 + q * 8 + i];
    if (sum > 0.0)
      for (int i = 0; i < 8; ++i) f.values[96 + q * 8 + i] /= sum;
  }
  // (d) dims 120..127 stay zero (reserved)
  return f;
}

inline double feature_l2(const FeatureVector& a, const FeatureVector& b) {
  if (a.values.size() != b.values.size()) throw DataError("feature dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// Fréchet distance between two Gaussians:
/// |mu_a - mu_b|^2 + Tr(Sa + Sb - 2 (Sa Sb)^{1/2}).
/// Matrix square roots via symmetric eigendecomposition, negative eigenvalues
/// clipped at 0. Arguments are canonically ordered first so swapping the two
/// Gaussians returns the identical value bit for bit.
inline double frechet_gaussian(Eigen::VectorXd mu_a, Eigen::MatrixXd sig_a, Eigen::VectorXd mu_b,
                               Eigen::MatrixXd sig_b) {
  if (mu_a.size() != mu_b.size()) throw DataError("frechet: dimension mismatch");
  auto lex_less = [](const Eigen::VectorXd& u, const Eigen::MatrixXd& su, const Eigen::VectorXd& v,
                     const Eigen::MatrixXd& sv) {
    for (Eigen::Index i = 0; i < u.size(); ++i)
      if (u[i] != v[i]) return u[i] < v[i];
    for (Eigen::Index i = 0; i < su.size(); ++i)
      if (su.data()[i] != sv.data()[i]) return su.data()[i] < sv.data()[i];
    return false;
  };
  if (lex_less(mu_b, sig_b, mu_a, sig_a)) {
    mu_a.swap(mu_b);
    sig_a.swap(sig_b);
  }

  auto psd_sqrt = [](const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return Eigen::MatrixXd(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
  };

  const Eigen::MatrixXd root_a = psd_sqrt(sig_a);
  const Eigen::MatrixXd cross = root_a * sig_b * root_a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cross + cross.transpose()));
  const double tr_cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

  const double d = (mu_a - mu_b).squaredNorm() + sig_a.trace() + sig_b.trace() - 2.0 * tr_cross;
  return std::max(0.0, d);
}

/// Fréchet feature distance (FFD) between two sets of descriptors, using
/// sample means and covariances (diagonal regularized by 1e-6).
inline double frechet_distance(const std::vector<FeatureVector>& a,
                               const std::vector<FeatureVector>& b) {
  if (a.size() < 2 || b.size() < 2) throw DataError("frechet_distance: need at least 2 vectors per set");
  const std::size_t dim = a[0].values.size();
  for (const auto& f : a)
    if (f.values.size() != dim) throw DataError("feature dimension mismatch");
  for (const auto& f : b)
    if (f.values.size() != dim) throw DataError("feature dimension mismatch");

  auto stats = [dim](const std::vector<FeatureVector>& set) {
    const Eigen::Index d = static_cast<Eigen::Index>(dim);
    const Eigen::Index n = static_cast<Eigen::Index>(set.size());
    Eigen::MatrixXd m(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
      m.row(i) = Eigen::Map<const Eigen::VectorXd>(set[i].values.data(), d);
    Eigen::VectorXd mu = m.colwise().mean();
    Eigen::MatrixXd centered = m.rowwise() - mu.transpose();
    Eigen::MatrixXd sigma = centered.transpose() * centered / static_cast<double>(n - 1);
    sigma.diagonal().array() += 1e-6;
    return std::pair{mu, sigma};
  };
  const auto [mu_a, sig_a] = stats(a);
  const auto [mu_b, sig_b] = stats(b);
  return frechet_gaussian(mu_a, sig_a, mu_b, sig_b);
}

}  // namespace dtsynth
