#include "dehaze/kernels.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>

namespace dehaze::kernels {
namespace {

// The matrix helpers below fix the summation order of every output element, so
// results do not depend on buffer alignment or on how the compiler vectorizes.

// Four interleaved partial sums, combined as (s0 + s1) + (s2 + s3) + tail.
inline double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return (s0 + s1) + (s2 + s3) + tail;
}

inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// Four-double vectors (GCC/Clang extension); the tiles below keep their
// accumulators in these so the compiler holds them in registers.
using V4 = double __attribute__((vector_size(32)));

inline V4 load4(const double* p) {
  V4 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store4(double* p, V4 v) { std::memcpy(p, &v, sizeof v); }

inline V4 splat(double x) { return V4{x, x, x, x}; }

// y[m][n] = bias[m] + sum_k a[m][k] b[k][n], k ascending.
void gemm_nn_bias(const double* a, const double* b, const double* bias, double* y, std::size_t m,
                  std::size_t k, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* a0 = a + i * k;
    std::size_t c0 = 0;
    for (; c0 + 8 <= n; c0 += 8) {
      V4 acc[4][2];
      for (int r = 0; r < 4; ++r) acc[r][0] = acc[r][1] = splat(bias[i + r]);
      for (std::size_t j = 0; j < k; ++j) {
        const V4 x0 = load4(b + j * n + c0), x1 = load4(b + j * n + c0 + 4);
        for (int r = 0; r < 4; ++r) {
          const V4 w = splat(a0[r * k + j]);
          acc[r][0] += w * x0;
          acc[r][1] += w * x1;
        }
      }
      for (int r = 0; r < 4; ++r) {
        store4(y + (i + r) * n + c0, acc[r][0]);
        store4(y + (i + r) * n + c0 + 4, acc[r][1]);
      }
    }
    for (std::size_t r = i; r < i + 4; ++r) {
      double* row = y + r * n;
      std::fill(row + c0, row + n, bias[r]);
      for (std::size_t j = 0; j < k; ++j) axpy(a[r * k + j], b + j * n + c0, row + c0, n - c0);
    }
  }
  for (; i < m; ++i) {
    double* row = y + i * n;
    std::fill(row, row + n, bias[i]);
    for (std::size_t j = 0; j < k; ++j) axpy(a[i * k + j], b + j * n, row, n);
  }
}

// y[k][n] = sum_m a[m][k] b[m][n], m ascending.
void gemm_tn(const double* a, const double* b, double* y, std::size_t m, std::size_t k,
             std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= k; j += 4) {
    std::size_t c0 = 0;
    for (; c0 + 8 <= n; c0 += 8) {
      V4 acc[4][2] = {};
      for (std::size_t i = 0; i < m; ++i) {
        const V4 x0 = load4(b + i * n + c0), x1 = load4(b + i * n + c0 + 4);
        for (int r = 0; r < 4; ++r) {
          const V4 w = splat(a[i * k + j + r]);
          acc[r][0] += w * x0;
          acc[r][1] += w * x1;
        }
      }
      for (int r = 0; r < 4; ++r) {
        store4(y + (j + r) * n + c0, acc[r][0]);
        store4(y + (j + r) * n + c0 + 4, acc[r][1]);
      }
    }
    for (std::size_t r = j; r < j + 4; ++r) {
      std::fill(y + r * n + c0, y + (r + 1) * n, 0.0);
      for (std::size_t i = 0; i < m; ++i) axpy(a[i * k + r], b + i * n + c0, y + r * n + c0, n - c0);
    }
  }
  for (; j < k; ++j) {
    std::fill(y + j * n, y + (j + 1) * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) axpy(a[i * k + j], b + i * n, y + j * n, n);
  }
}

// y[m][k] += dot(a[m], b[k]) over n, with the lane layout of dot().
void gemm_nt_acc(const double* a, const double* b, double* y, std::size_t m, std::size_t k,
                 std::size_t n) {
  const std::size_t body = n - n % 4;
  std::size_t i = 0;
  for (; i + 2 <= m; i += 2) {
    std::size_t j = 0;
    for (; j + 4 <= k; j += 4) {
      V4 acc[2][4] = {};
      for (std::size_t p = 0; p < body; p += 4) {
        const V4 x0 = load4(a + i * n + p), x1 = load4(a + (i + 1) * n + p);
        for (int q = 0; q < 4; ++q) {
          const V4 z = load4(b + (j + q) * n + p);
          acc[0][q] += x0 * z;
          acc[1][q] += x1 * z;
        }
      }
      for (int r = 0; r < 2; ++r) {
        for (int q = 0; q < 4; ++q) {
          const double* ar = a + (i + r) * n;
          const double* bq = b + (j + q) * n;
          double tail = 0.0;
          for (std::size_t p = body; p < n; ++p) tail += ar[p] * bq[p];
          const V4 s = acc[r][q];
          y[(i + r) * k + j + q] += (s[0] + s[1]) + (s[2] + s[3]) + tail;
        }
      }
    }
    for (; j < k; ++j) {
      for (std::size_t r = i; r < i + 2; ++r) y[r * k + j] += dot(a + r * n, b + j * n, n);
    }
  }
  for (; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) y[i * k + j] += dot(a + i * n, b + j * n, n);
  }
}

// Columns [lo, hi) of an output row whose source x + dx lies inside [0, w).
inline void valid_span(std::ptrdiff_t dx, std::size_t w, std::size_t& lo, std::size_t& hi) {
  const auto sw = static_cast<std::ptrdiff_t>(w);
  lo = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(-dx, 0, sw));
  hi = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(sw - dx, 0, sw));
  if (hi < lo) hi = lo;
}

// Row (c, ky, kx) of the column matrix holds input[c][y + ky - p][x + kx - p] for every (y, x).
void im2col(const ConvShape& s, std::span<const double> input, std::vector<double>& columns) {
  const std::size_t k = s.kernel, h = s.height, w = s.width;
  const std::ptrdiff_t p = static_cast<std::ptrdiff_t>(s.pad());
  columns.resize(s.in_channels * k * k * h * w);
  double* dst = columns.data();
  for (std::size_t c = 0; c < s.in_channels; ++c) {
    const double* plane = input.data() + c * h * w;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - p;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - p;
        std::size_t lo, hi;
        valid_span(dx, w, lo, hi);
        for (std::size_t y = 0; y < h; ++y, dst += w) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y) + dy;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) {
            std::fill(dst, dst + w, 0.0);
            continue;
          }
          const double* row = plane + static_cast<std::size_t>(sy) * w;
          std::fill(dst, dst + lo, 0.0);
          std::copy(row + static_cast<std::ptrdiff_t>(lo) + dx, row + static_cast<std::ptrdiff_t>(hi) + dx,
                    dst + lo);
          std::fill(dst + hi, dst + w, 0.0);
        }
      }
    }
  }
}

void col2im(const ConvShape& s, const std::vector<double>& columns, std::span<double> grad_input) {
  const std::size_t k = s.kernel, h = s.height, w = s.width;
  const std::ptrdiff_t p = static_cast<std::ptrdiff_t>(s.pad());
  std::fill(grad_input.begin(), grad_input.end(), 0.0);
  const double* src = columns.data();
  for (std::size_t c = 0; c < s.in_channels; ++c) {
    double* plane = grad_input.data() + c * h * w;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - p;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - p;
        std::size_t lo, hi;
        valid_span(dx, w, lo, hi);
        for (std::size_t y = 0; y < h; ++y, src += w) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y) + dy;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
          double* row = plane + static_cast<std::size_t>(sy) * w;
          for (std::size_t x = lo; x < hi; ++x) row[static_cast<std::ptrdiff_t>(x) + dx] += src[x];
        }
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- footprints

void accumulate_footprints(std::span<const PatchOrigin> origins, std::span<const double> values,
                           std::size_t size, std::size_t height, std::size_t width,
                           std::span<double> sum, std::span<double> count) {
  // Per-row lists of the estimates covering that row, in list order (CSR).
  std::vector<std::size_t> start(height + 1, 0);
  for (const auto& o : origins) {
    for (std::size_t y = o.row; y < std::min(height, o.row + size); ++y) ++start[y + 1];
  }
  for (std::size_t y = 0; y < height; ++y) start[y + 1] += start[y];
  std::vector<std::size_t> members(start[height]);
  std::vector<std::size_t> fill(start.begin(), start.end() - 1);
  for (std::size_t e = 0; e < origins.size(); ++e) {
    for (std::size_t y = origins[e].row; y < std::min(height, origins[e].row + size); ++y) {
      members[fill[y]++] = e;
    }
  }

  // Each row is owned by one thread and visits estimates in list order, so the
  // per-pixel summation order matches the serial kernel exactly.
  const auto rows = static_cast<std::int64_t>(height);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    const auto row = static_cast<std::size_t>(r);
    for (std::size_t m = start[row]; m < start[row + 1]; ++m) {
      const std::size_t e = members[m];
      double* s = sum.data() + row * width + origins[e].col;
      double* n = count.data() + row * width + origins[e].col;
      for (std::size_t x = 0; x < size; ++x) {
        s[x] += values[e];
        n[x] += 1.0;
      }
    }
  }
}

// ---------------------------------------------------------------- convolution

void conv2d_forward(const ConvShape& s, std::span<const double> input,
                    std::span<const double> weights, std::span<const double> bias,
                    std::span<double> output, ConvScratch& scratch) {
  const std::size_t kdim = s.in_channels * s.kernel * s.kernel;
  const double* cols = input.data();
  if (s.kernel != 1) {
    im2col(s, input, scratch.columns);
    cols = scratch.columns.data();
  }
  gemm_nn_bias(weights.data(), cols, bias.data(), output.data(), s.out_channels, kdim, s.pixels());
}

void conv2d_backward(const ConvShape& s, std::span<const double> input,
                     std::span<const double> weights, std::span<const double> grad_output,
                     std::span<double> grad_input, std::span<double> grad_weights,
                     std::span<double> grad_bias, ConvScratch& scratch) {
  const std::size_t kdim = s.in_channels * s.kernel * s.kernel;
  const std::size_t pix = s.pixels();
  const double* cols = input.data();
  if (s.kernel != 1) {
    im2col(s, input, scratch.columns);
    cols = scratch.columns.data();
  }
  gemm_nt_acc(grad_output.data(), cols, grad_weights.data(), s.out_channels, kdim, pix);
  for (std::size_t o = 0; o < s.out_channels; ++o) {
    const double* g = grad_output.data() + o * pix;
    double acc = 0.0;
    for (std::size_t i = 0; i < pix; ++i) acc += g[i];
    grad_bias[o] += acc;
  }
  if (grad_input.empty()) return;
  if (s.kernel == 1) {
    gemm_tn(weights.data(), grad_output.data(), grad_input.data(), s.out_channels, kdim, pix);
    return;
  }
  scratch.grad_columns.resize(kdim * pix);
  gemm_tn(weights.data(), grad_output.data(), scratch.grad_columns.data(), s.out_channels, kdim, pix);
  col2im(s, scratch.grad_columns, grad_input);
}

// ---------------------------------------------------------------- dense

void dense_forward(std::size_t in_len, std::size_t out_len, std::span<const double> input,
                   std::span<const double> weights, std::span<const double> bias,
                   std::span<double> output) {
  for (std::size_t o = 0; o < out_len; ++o) {
    output[o] = dot(weights.data() + o * in_len, input.data(), in_len) + bias[o];
  }
}

void dense_backward(std::size_t in_len, std::size_t out_len, std::span<const double> input,
                    std::span<const double> weights, std::span<const double> grad_output,
                    std::span<double> grad_input, std::span<double> grad_weights,
                    std::span<double> grad_bias) {
  for (std::size_t o = 0; o < out_len; ++o) {
    axpy(grad_output[o], input.data(), grad_weights.data() + o * in_len, in_len);
    grad_bias[o] += grad_output[o];
  }
  if (!grad_input.empty()) gemm_tn(weights.data(), grad_output.data(), grad_input.data(), out_len, in_len, 1);
}

// ---------------------------------------------------------------- screened Laplacian

namespace {

inline double system_row(std::size_t height, std::size_t width, std::span<const double> t,
                         std::span<const double> mask, std::span<const double> w_right,
                         std::span<const double> w_down, double lambda, std::size_t r,
                         std::size_t c) {
  const std::size_t i = r * width + c;
  const double ti = t[i];
  double lap = 0.0;
  if (c > 0) lap += w_right[r * (width - 1) + c - 1] * (ti - t[i - 1]);
  if (c + 1 < width) lap += w_right[r * (width - 1) + c] * (ti - t[i + 1]);
  if (r > 0) lap += w_down[(r - 1) * width + c] * (ti - t[i - width]);
  if (r + 1 < height) lap += w_down[r * width + c] * (ti - t[i + width]);
  return mask[i] * ti + lambda * lap;
}

}  // namespace

void apply_system(std::size_t height, std::size_t width, std::span<const double> t,
                  std::span<const double> mask, std::span<const double> w_right,
                  std::span<const double> w_down, double lambda, std::span<double> out) {
  const auto rows = static_cast<std::int64_t>(height);
#pragma omp parallel for schedule(static)
  for (std::int64_t rr = 0; rr < rows; ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    for (std::size_t c = 0; c < width; ++c) {
      out[r * width + c] = system_row(height, width, t, mask, w_right, w_down, lambda, r, c);
    }
  }
}

// ---------------------------------------------------------------- serial references

namespace reference {

void accumulate_footprints(std::span<const PatchOrigin> origins, std::span<const double> values,
                           std::size_t size, std::size_t /*height*/, std::size_t width,
                           std::span<double> sum, std::span<double> count) {
  for (std::size_t e = 0; e < origins.size(); ++e) {
    for (std::size_t y = 0; y < size; ++y) {
      for (std::size_t x = 0; x < size; ++x) {
        const std::size_t i = (origins[e].row + y) * width + origins[e].col + x;
        sum[i] += values[e];
        count[i] += 1.0;
      }
    }
  }
}

void conv2d_forward(const ConvShape& s, std::span<const double> input,
                    std::span<const double> weights, std::span<const double> bias,
                    std::span<double> output) {
  const auto h = static_cast<std::ptrdiff_t>(s.height), w = static_cast<std::ptrdiff_t>(s.width);
  const auto k = static_cast<std::ptrdiff_t>(s.kernel), p = static_cast<std::ptrdiff_t>(s.pad());
  for (std::size_t o = 0; o < s.out_channels; ++o) {
    for (std::ptrdiff_t y = 0; y < h; ++y) {
      for (std::ptrdiff_t x = 0; x < w; ++x) {
        double acc = bias[o];
        for (std::size_t c = 0; c < s.in_channels; ++c) {
          for (std::ptrdiff_t ky = 0; ky < k; ++ky) {
            for (std::ptrdiff_t kx = 0; kx < k; ++kx) {
              const std::ptrdiff_t sy = y + ky - p, sx = x + kx - p;
              if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
              acc += weights[((o * s.in_channels + c) * s.kernel + static_cast<std::size_t>(ky)) *
                                 s.kernel +
                             static_cast<std::size_t>(kx)] *
                     input[(c * s.height + static_cast<std::size_t>(sy)) * s.width +
                           static_cast<std::size_t>(sx)];
            }
          }
        }
        output[(o * s.height + static_cast<std::size_t>(y)) * s.width + static_cast<std::size_t>(x)] = acc;
      }
    }
  }
}

void conv2d_backward(const ConvShape& s, std::span<const double> input,
                     std::span<const double> weights, std::span<const double> grad_output,
                     std::span<double> grad_input, std::span<double> grad_weights,
                     std::span<double> grad_bias) {
  const auto h = static_cast<std::ptrdiff_t>(s.height), w = static_cast<std::ptrdiff_t>(s.width);
  const auto k = static_cast<std::ptrdiff_t>(s.kernel), p = static_cast<std::ptrdiff_t>(s.pad());
  if (!grad_input.empty()) std::fill(grad_input.begin(), grad_input.end(), 0.0);
  for (std::size_t o = 0; o < s.out_channels; ++o) {
    for (std::ptrdiff_t y = 0; y < h; ++y) {
      for (std::ptrdiff_t x = 0; x < w; ++x) {
        const double g = grad_output[(o * s.height + static_cast<std::size_t>(y)) * s.width +
                                     static_cast<std::size_t>(x)];
        grad_bias[o] += g;
        for (std::size_t c = 0; c < s.in_channels; ++c) {
          for (std::ptrdiff_t ky = 0; ky < k; ++ky) {
            for (std::ptrdiff_t kx = 0; kx < k; ++kx) {
              const std::ptrdiff_t sy = y + ky - p, sx = x + kx - p;
              if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
              const std::size_t wi =
                  ((o * s.in_channels + c) * s.kernel + static_cast<std::size_t>(ky)) * s.kernel +
                  static_cast<std::size_t>(kx);
              const std::size_t ii = (c * s.height + static_cast<std::size_t>(sy)) * s.width +
                                     static_cast<std::size_t>(sx);
              grad_weights[wi] += g * input[ii];
              if (!grad_input.empty()) grad_input[ii] += g * weights[wi];
            }
          }
        }
      }
    }
  }
}

void dense_forward(std::size_t in_len, std::size_t out_len, std::span<const double> input,
                   std::span<const double> weights, std::span<const double> bias,
                   std::span<double> output) {
  for (std::size_t o = 0; o < out_len; ++o) {
    double acc = bias[o];
    for (std::size_t i = 0; i < in_len; ++i) acc += weights[o * in_len + i] * input[i];
    output[o] = acc;
  }
}

void apply_system(std::size_t height, std::size_t width, std::span<const double> t,
                  std::span<const double> mask, std::span<const double> w_right,
                  std::span<const double> w_down, double lambda, std::span<double> out) {
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      out[r * width + c] = system_row(height, width, t, mask, w_right, w_down, lambda, r, c);
    }
  }
}

}  // namespace reference

}  // namespace dehaze::kernels
