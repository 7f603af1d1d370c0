// Copyright 2026 The roadaug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "roadaug/kernels.hpp"

#include <atomic>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace roadaug::kernels {

namespace {

std::atomic<int> g_max_threads{0};

constexpr std::size_t kBlock = 1024;

// Row-major accessor for op(A) where op may transpose. rows/cols refer to
// the *logical* (post-op) shape.
inline double elem(const double* a, std::size_t i, std::size_t j,
                   std::size_t logical_cols, std::size_t logical_rows,
                   bool trans) {
    return trans ? a[j * logical_rows + i] : a[i * logical_cols + j];
}

inline void matmul_rows(const double* a, const double* b, double* c,
                        std::size_t n, std::size_t k, std::size_t m,
                        bool trans_a, bool trans_b, std::size_t row_begin,
                        std::size_t row_end) {
    for (std::size_t i = row_begin; i < row_end; ++i) {
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = elem(a, i, p, k, m, trans_a);
            if (!trans_b) {
                const double* brow = b + p * n;
                for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
            } else {
                for (std::size_t j = 0; j < n; ++j)
                    crow[j] += aip * b[j * k + p];
            }
        }
    }
}

inline void corr_one_output(const double* in, std::size_t in_ch,
                            std::size_t in_h, std::size_t in_w,
                            const double* kern, std::size_t ksz,
                            std::size_t stride, std::size_t out_h,
                            std::size_t out_w, std::size_t oc, double* out) {
    const double* koc = kern + oc * in_ch * ksz * ksz;
    double* plane = out + oc * out_h * out_w;
    for (std::size_t oy = 0; oy < out_h; ++oy) {
        for (std::size_t ox = 0; ox < out_w; ++ox) {
            double acc = 0.0;
            for (std::size_t ic = 0; ic < in_ch; ++ic) {
                const double* iplane = in + ic * in_h * in_w;
                const double* kk = koc + ic * ksz * ksz;
                for (std::size_t ky = 0; ky < ksz; ++ky) {
                    const double* irow =
                        iplane + (oy * stride + ky) * in_w + ox * stride;
                    const double* krow = kk + ky * ksz;
                    for (std::size_t kx = 0; kx < ksz; ++kx)
                        acc += irow[kx] * krow[kx];
                }
            }
            plane[oy * out_w + ox] = acc;
        }
    }
}

inline double corr_input_grad_at(const double* d_out, std::size_t out_ch,
                                 std::size_t out_h, std::size_t out_w,
                                 const double* kern, std::size_t in_ch,
                                 std::size_t ksz, std::size_t stride,
                                 std::size_t ic, std::size_t y,
                                 std::size_t x) {
    double acc = 0.0;
    for (std::size_t oc = 0; oc < out_ch; ++oc) {
        const double* dplane = d_out + oc * out_h * out_w;
        const double* kk = kern + (oc * in_ch + ic) * ksz * ksz;
        for (std::size_t ky = 0; ky < ksz; ++ky) {
            if (y < ky) continue;
            const std::size_t ry = y - ky;
            if (ry % stride != 0) continue;
            const std::size_t oy = ry / stride;
            if (oy >= out_h) continue;
            for (std::size_t kx = 0; kx < ksz; ++kx) {
                if (x < kx) continue;
                const std::size_t rx = x - kx;
                if (rx % stride != 0) continue;
                const std::size_t ox = rx / stride;
                if (ox >= out_w) continue;
                acc += dplane[oy * out_w + ox] * kk[ky * ksz + kx];
            }
        }
    }
    return acc;
}

inline double block_sum(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
}

inline double block_dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

void set_max_threads(int n) { g_max_threads.store(n < 0 ? 0 : n); }

int max_threads() { return g_max_threads.load(); }

bool parallel_enabled() {
#ifdef _OPENMP
    const int cap = g_max_threads.load();
    if (cap == 1) return false;
    const int avail = omp_get_max_threads();
    return (cap == 0 ? avail : (cap < avail ? cap : avail)) > 1;
#else
    return false;
#endif
}

#ifdef _OPENMP
namespace {
int effective_threads() {
    const int cap = g_max_threads.load();
    const int avail = omp_get_max_threads();
    return cap == 0 ? avail : (cap < avail ? cap : avail);
}
}  // namespace
#endif

void matmul_serial(const double* a, const double* b, double* c, std::size_t m,
                   std::size_t n, std::size_t k, bool trans_a, bool trans_b) {
    matmul_rows(a, b, c, n, k, m, trans_a, trans_b, 0, m);
}

void matmul_omp(const double* a, const double* b, double* c, std::size_t m,
                std::size_t n, std::size_t k, bool trans_a, bool trans_b) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
        matmul_rows(a, b, c, n, k, m, trans_a, trans_b,
                    static_cast<std::size_t>(i),
                    static_cast<std::size_t>(i) + 1);
    }
#else
    matmul_serial(a, b, c, m, n, k, trans_a, trans_b);
#endif
}

void matmul(const double* a, const double* b, double* c, std::size_t m,
            std::size_t n, std::size_t k, bool trans_a, bool trans_b) {
    if (parallel_enabled() && m * n * k >= 32768)
        matmul_omp(a, b, c, m, n, k, trans_a, trans_b);
    else
        matmul_serial(a, b, c, m, n, k, trans_a, trans_b);
}

void correlate2d_serial(const double* in, std::size_t in_ch, std::size_t in_h,
                        std::size_t in_w, const double* kern,
                        std::size_t out_ch, std::size_t ksz,
                        std::size_t stride, double* out) {
    const std::size_t out_h = (in_h - ksz) / stride + 1;
    const std::size_t out_w = (in_w - ksz) / stride + 1;
    for (std::size_t oc = 0; oc < out_ch; ++oc)
        corr_one_output(in, in_ch, in_h, in_w, kern, ksz, stride, out_h, out_w,
                        oc, out);
}

void correlate2d_omp(const double* in, std::size_t in_ch, std::size_t in_h,
                     std::size_t in_w, const double* kern, std::size_t out_ch,
                     std::size_t ksz, std::size_t stride, double* out) {
#ifdef _OPENMP
    const std::size_t out_h = (in_h - ksz) / stride + 1;
    const std::size_t out_w = (in_w - ksz) / stride + 1;
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (std::int64_t oc = 0; oc < static_cast<std::int64_t>(out_ch); ++oc)
        corr_one_output(in, in_ch, in_h, in_w, kern, ksz, stride, out_h, out_w,
                        static_cast<std::size_t>(oc), out);
#else
    correlate2d_serial(in, in_ch, in_h, in_w, kern, out_ch, ksz, stride, out);
#endif
}

void correlate2d(const double* in, std::size_t in_ch, std::size_t in_h,
                 std::size_t in_w, const double* kern, std::size_t out_ch,
                 std::size_t ksz, std::size_t stride, double* out) {
    if (parallel_enabled() && out_ch > 1)
        correlate2d_omp(in, in_ch, in_h, in_w, kern, out_ch, ksz, stride, out);
    else
        correlate2d_serial(in, in_ch, in_h, in_w, kern, out_ch, ksz, stride,
                           out);
}

void correlate2d_input_grad_serial(const double* d_out, std::size_t out_ch,
                                   std::size_t out_h, std::size_t out_w,
                                   const double* kern, std::size_t in_ch,
                                   std::size_t ksz, std::size_t stride,
                                   double* d_in, std::size_t in_h,
                                   std::size_t in_w) {
    for (std::size_t ic = 0; ic < in_ch; ++ic)
        for (std::size_t y = 0; y < in_h; ++y)
            for (std::size_t x = 0; x < in_w; ++x)
                d_in[(ic * in_h + y) * in_w + x] =
                    corr_input_grad_at(d_out, out_ch, out_h, out_w, kern,
                                       in_ch, ksz, stride, ic, y, x);
}

void correlate2d_input_grad_omp(const double* d_out, std::size_t out_ch,
                                std::size_t out_h, std::size_t out_w,
                                const double* kern, std::size_t in_ch,
                                std::size_t ksz, std::size_t stride,
                                double* d_in, std::size_t in_h,
                                std::size_t in_w) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) collapse(2) \
    num_threads(effective_threads())
    for (std::int64_t ic = 0; ic < static_cast<std::int64_t>(in_ch); ++ic)
        for (std::int64_t y = 0; y < static_cast<std::int64_t>(in_h); ++y)
            for (std::size_t x = 0; x < in_w; ++x)
                d_in[(static_cast<std::size_t>(ic) * in_h +
                      static_cast<std::size_t>(y)) *
                         in_w +
                     x] =
                    corr_input_grad_at(d_out, out_ch, out_h, out_w, kern,
                                       in_ch, ksz, stride,
                                       static_cast<std::size_t>(ic),
                                       static_cast<std::size_t>(y), x);
#else
    correlate2d_input_grad_serial(d_out, out_ch, out_h, out_w, kern, in_ch,
                                  ksz, stride, d_in, in_h, in_w);
#endif
}

void correlate2d_input_grad(const double* d_out, std::size_t out_ch,
                            std::size_t out_h, std::size_t out_w,
                            const double* kern, std::size_t in_ch,
                            std::size_t ksz, std::size_t stride, double* d_in,
                            std::size_t in_h, std::size_t in_w) {
    if (parallel_enabled() && in_ch * in_h >= 16)
        correlate2d_input_grad_omp(d_out, out_ch, out_h, out_w, kern, in_ch,
                                   ksz, stride, d_in, in_h, in_w);
    else
        correlate2d_input_grad_serial(d_out, out_ch, out_h, out_w, kern, in_ch,
                                      ksz, stride, d_in, in_h, in_w);
}

namespace {
inline double laplacian_at(const double* x, const int* index,
                           std::size_t grid_w, std::size_t y, std::size_t xx,
                           std::size_t grid_h) {
    const int self = index[y * grid_w + xx];
    double v = 4.0 * x[self];
    if (y > 0) {
        const int n = index[(y - 1) * grid_w + xx];
        if (n >= 0) v -= x[n];
    }
    if (y + 1 < grid_h) {
        const int n = index[(y + 1) * grid_w + xx];
        if (n >= 0) v -= x[n];
    }
    if (xx > 0) {
        const int n = index[y * grid_w + xx - 1];
        if (n >= 0) v -= x[n];
    }
    if (xx + 1 < grid_w) {
        const int n = index[y * grid_w + xx + 1];
        if (n >= 0) v -= x[n];
    }
    return v;
}
}  // namespace

void laplacian_apply_serial(const double* x, const int* index,
                            std::size_t grid_h, std::size_t grid_w,
                            double* out) {
    for (std::size_t y = 0; y < grid_h; ++y)
        for (std::size_t xx = 0; xx < grid_w; ++xx) {
            const int id = index[y * grid_w + xx];
            if (id >= 0) out[id] = laplacian_at(x, index, grid_w, y, xx, grid_h);
        }
}

void laplacian_apply_omp(const double* x, const int* index, std::size_t grid_h,
                         std::size_t grid_w, double* out) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (std::int64_t y = 0; y < static_cast<std::int64_t>(grid_h); ++y)
        for (std::size_t xx = 0; xx < grid_w; ++xx) {
            const int id = index[static_cast<std::size_t>(y) * grid_w + xx];
            if (id >= 0)
                out[id] = laplacian_at(x, index, grid_w,
                                       static_cast<std::size_t>(y), xx,
                                       grid_h);
        }
#else
    laplacian_apply_serial(x, index, grid_h, grid_w, out);
#endif
}

void laplacian_apply(const double* x, const int* index, std::size_t grid_h,
                     std::size_t grid_w, double* out) {
    if (parallel_enabled() && grid_h * grid_w >= 4096)
        laplacian_apply_omp(x, index, grid_h, grid_w, out);
    else
        laplacian_apply_serial(x, index, grid_h, grid_w, out);
}

double sum_serial(std::span<const double> a) {
    const std::size_t nblocks = (a.size() + kBlock - 1) / kBlock;
    double total = 0.0;
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
        const std::size_t lo = blk * kBlock;
        const std::size_t len = std::min(kBlock, a.size() - lo);
        total += block_sum(a.data() + lo, len);
    }
    return total;
}

double sum_omp(std::span<const double> a) {
#ifdef _OPENMP
    const std::size_t nblocks = (a.size() + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks);
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (std::int64_t blk = 0; blk < static_cast<std::int64_t>(nblocks);
         ++blk) {
        const std::size_t lo = static_cast<std::size_t>(blk) * kBlock;
        const std::size_t len = std::min(kBlock, a.size() - lo);
        partial[static_cast<std::size_t>(blk)] = block_sum(a.data() + lo, len);
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
#else
    return sum_serial(a);
#endif
}

double sum(std::span<const double> a) {
    return (parallel_enabled() && a.size() >= 4 * kBlock) ? sum_omp(a)
                                                          : sum_serial(a);
}

double dot_serial(std::span<const double> a, std::span<const double> b) {
    const std::size_t nblocks = (a.size() + kBlock - 1) / kBlock;
    double total = 0.0;
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
        const std::size_t lo = blk * kBlock;
        const std::size_t len = std::min(kBlock, a.size() - lo);
        total += block_dot(a.data() + lo, b.data() + lo, len);
    }
    return total;
}

double dot_omp(std::span<const double> a, std::span<const double> b) {
#ifdef _OPENMP
    const std::size_t nblocks = (a.size() + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks);
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (std::int64_t blk = 0; blk < static_cast<std::int64_t>(nblocks);
         ++blk) {
        const std::size_t lo = static_cast<std::size_t>(blk) * kBlock;
        const std::size_t len = std::min(kBlock, a.size() - lo);
        partial[static_cast<std::size_t>(blk)] =
            block_dot(a.data() + lo, b.data() + lo, len);
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
#else
    return dot_serial(a, b);
#endif
}

double dot(std::span<const double> a, std::span<const double> b) {
    return (parallel_enabled() && a.size() >= 4 * kBlock) ? dot_omp(a, b)
                                                          : dot_serial(a, b);
}

}  // namespace roadaug::kernels
