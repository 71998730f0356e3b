#include "dehaze/interpolation.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "dehaze/error.hpp"
#include "dehaze/kernels.hpp"

namespace dehaze {
namespace {

// Dot product reduced over fixed-size blocks in block order, so the result
// is the same for any thread count.
double dot(std::span<const double> a, std::span<const double> b) {
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (a.size() + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
  const auto nb = static_cast<std::int64_t>(blocks);
#pragma omp parallel for schedule(static)
  for (std::int64_t bi = 0; bi < nb; ++bi) {
    const std::size_t begin = static_cast<std::size_t>(bi) * kBlock;
    const std::size_t end = std::min(a.size(), begin + kBlock);
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += a[i] * b[i];
    partial[static_cast<std::size_t>(bi)] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

void require_shape(const GrayMap& m, std::size_t h, std::size_t w, const char* what) {
  if (m.height() != h || m.width() != w) {
    throw ShapeError(std::string(what) + " is " + std::to_string(m.height()) + "x" +
                     std::to_string(m.width()) + ", expected " + std::to_string(h) + "x" +
                     std::to_string(w));
  }
}

double squared_distance(const RgbImage& img, std::size_t i, std::size_t j) {
  const auto s = img.samples();
  double d = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    const double e = s[3 * i + c] - s[3 * j + c];
    d += e * e;
  }
  return d;
}

}  // namespace

void InterpolationConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw_domain("lambda must be positive");
  if (!(eps_w > 0.0) || !std::isfinite(eps_w)) throw_domain("eps_w must be positive");
  if (!(cg_tol > 0.0 && cg_tol < 1.0)) throw_domain("cg_tol must lie in (0, 1)");
  if (cg_max_iters == 0) throw_domain("cg_max_iters must be positive");
}

SmoothnessWeights build_weights(const RgbImage& image, double eps_w) {
  if (!(eps_w > 0.0)) throw_domain("eps_w must be positive");
  const std::size_t h = image.height(), w = image.width();
  SmoothnessWeights out{h, w, std::vector<double>(h * (w - 1)), std::vector<double>((h - 1) * w)};
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c + 1 < w; ++c) {
      const std::size_t i = r * w + c;
      out.right[r * (w - 1) + c] = 1.0 / (squared_distance(image, i, i + 1) + eps_w);
    }
  }
  for (std::size_t r = 0; r + 1 < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t i = r * w + c;
      out.down[r * w + c] = 1.0 / (squared_distance(image, i, i + w) + eps_w);
    }
  }
  return out;
}

GrayMap apply_system(const GrayMap& t, const GrayMap& mask, const SmoothnessWeights& weights,
                     double lambda) {
  require_shape(t, weights.height, weights.width, "t");
  require_shape(mask, weights.height, weights.width, "mask");
  GrayMap out(t.height(), t.width());
  kernels::apply_system(t.height(), t.width(), t.values(), mask.values(), weights.right,
                        weights.down, lambda, out.values());
  return out;
}

double interpolation_energy(const GrayMap& t, const GrayMap& t_tilde, const GrayMap& mask,
                            const SmoothnessWeights& weights, double lambda) {
  const std::size_t h = weights.height, w = weights.width;
  require_shape(t, h, w, "t");
  require_shape(t_tilde, h, w, "t_tilde");
  require_shape(mask, h, w, "mask");
  double data = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double d = t[i] - t_tilde[i];
    data += mask[i] * d * d;
  }
  double smooth = 0.0;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c + 1 < w; ++c) {
      const double d = t.at(r, c) - t.at(r, c + 1);
      smooth += weights.right[r * (w - 1) + c] * d * d;
    }
  }
  for (std::size_t r = 0; r + 1 < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double d = t.at(r, c) - t.at(r + 1, c);
      smooth += weights.down[r * w + c] * d * d;
    }
  }
  return data + lambda * smooth;
}

GrayMap solve_system(const SparseEstimate& sparse, const RgbImage& image,
                     const InterpolationConfig& config, SolveReport* report) {
  config.validate();
  const std::size_t h = image.height(), w = image.width(), n = h * w;
  require_shape(sparse.t_tilde, h, w, "t_tilde");
  require_shape(sparse.mask, h, w, "mask");

  // Masked mean, shifted by the first anchor so a constant t~ starts exactly on it.
  double anchored = 0.0, anchor_sum = 0.0, shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sparse.mask[i] != 0.0) {
      if (anchored == 0.0) shift = sparse.t_tilde[i];
      anchored += 1.0;
      anchor_sum += sparse.t_tilde[i] - shift;
    }
  }
  if (anchored == 0.0) throw DomainError("solve_interpolation: mask has no anchored pixels");

  const SmoothnessWeights weights = build_weights(image, config.eps_w);
  const double lambda = config.lambda;
  const auto mask = sparse.mask.values();

  // Jacobi preconditioner: diagonal of S + lambda L_w.
  std::vector<double> inv_diag(n);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double deg = 0.0;
      if (c > 0) deg += weights.right[r * (w - 1) + c - 1];
      if (c + 1 < w) deg += weights.right[r * (w - 1) + c];
      if (r > 0) deg += weights.down[(r - 1) * w + c];
      if (r + 1 < h) deg += weights.down[r * w + c];
      inv_diag[r * w + c] = 1.0 / (mask[r * w + c] + lambda * deg);
    }
  }

  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = mask[i] * sparse.t_tilde[i];

  GrayMap x(h, w, shift + anchor_sum / anchored);
  std::vector<double> r(n), z(n), p(n), q(n);
  auto apply = [&](std::span<const double> in, std::span<double> out) {
    kernels::apply_system(h, w, in, mask, weights.right, weights.down, lambda, out);
  };

  apply(x.values(), q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  const double b_norm = std::sqrt(dot(b, b));
  SolveReport rep;
  if (b_norm == 0.0) {
    // t~ vanishes on the mask; the minimizer is identically zero.
    std::fill(x.values().begin(), x.values().end(), 0.0);
    if (report) *report = rep;
    return x;
  }
  double res = std::sqrt(dot(r, r)) / b_norm;
  rep.relative_residual = res;
  if (res <= config.cg_tol) {
    if (report) *report = rep;
    return x;
  }
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  auto xv = x.values();
  for (std::size_t it = 1; it <= config.cg_max_iters; ++it) {
    apply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0) || !std::isfinite(pq)) {
      throw NumericError("conjugate gradient breakdown at iteration " + std::to_string(it) +
                         " (relative residual " + std::to_string(res) + ")");
    }
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      xv[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    res = std::sqrt(dot(r, r)) / b_norm;
    rep.iterations = it;
    rep.relative_residual = res;
    if (res <= config.cg_tol) {
      if (report) *report = rep;
      return x;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw NumericError("conjugate gradient did not reach tolerance " + std::to_string(config.cg_tol) +
                     " within " + std::to_string(config.cg_max_iters) +
                     " iterations (relative residual " + std::to_string(res) + ")");
}

TransmittanceMap solve_interpolation(const SparseEstimate& sparse, const RgbImage& image,
                                     const InterpolationConfig& config, SolveReport* report) {
  return TransmittanceMap::clamped(solve_system(sparse, image, config, report));
}

}  // namespace dehaze
