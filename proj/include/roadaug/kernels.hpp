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

#ifndef ROADAUG_KERNELS_HPP
#define ROADAUG_KERNELS_HPP

#include <cstddef>
#include <span>

// Dense inner loops shared by the autodiff tape, the texture feature bank
// and the Poisson solver. Every kernel exists in a serial reference form
// (`*_serial`) and an OpenMP form (`*_omp`); the unsuffixed entry point
// dispatches on the configured thread count.
//
// Determinism contract: the OpenMP variants parallelize only over
// independent output elements (or over fixed-size reduction blocks that are
// combined in block order), so for identical inputs every variant produces
// bit-identical results at any thread count.

namespace roadaug::kernels {

/// Caps the number of OpenMP threads the dispatching kernels may use.
/// 0 means "library default" (the OpenMP runtime decides).
void set_max_threads(int n);
int max_threads();

/// True when the dispatcher would take the OpenMP path.
bool parallel_enabled();

// ---- matrix multiply --------------------------------------------------
// C[m x n] = op(A) * op(B), where op transposes when the flag is set.
// A is (m x k) untransposed or (k x m) transposed; B likewise (k x n) /
// (n x k). C must not alias A or B.

void matmul_serial(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t n, std::size_t k,
                   bool trans_a, bool trans_b);
void matmul_omp(const double* a, const double* b, double* c,
                std::size_t m, std::size_t n, std::size_t k,
                bool trans_a, bool trans_b);
void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t n, std::size_t k,
            bool trans_a, bool trans_b);

// ---- 2-D valid correlation (multi-channel, strided) --------------------
// in:  [in_ch][in_h][in_w]
// kern:[out_ch][in_ch][ksz][ksz]
// out: [out_ch][out_h][out_w] with out_h = (in_h - ksz)/stride + 1.

void correlate2d_serial(const double* in, std::size_t in_ch, std::size_t in_h,
                        std::size_t in_w, const double* kern,
                        std::size_t out_ch, std::size_t ksz,
                        std::size_t stride, double* out);
void correlate2d_omp(const double* in, std::size_t in_ch, std::size_t in_h,
                     std::size_t in_w, const double* kern, std::size_t out_ch,
                     std::size_t ksz, std::size_t stride, double* out);
void correlate2d(const double* in, std::size_t in_ch, std::size_t in_h,
                 std::size_t in_w, const double* kern, std::size_t out_ch,
                 std::size_t ksz, std::size_t stride, double* out);

// Gradient of the correlation w.r.t. its input (gather form):
// d_in[ic][y][x] = sum over (oc, ky, kx) hitting (y, x) of
//                  d_out[oc][oy][ox] * kern[oc][ic][ky][kx].

void correlate2d_input_grad_serial(const double* d_out, std::size_t out_ch,
                                   std::size_t out_h, std::size_t out_w,
                                   const double* kern, std::size_t in_ch,
                                   std::size_t ksz, std::size_t stride,
                                   double* d_in, std::size_t in_h,
                                   std::size_t in_w);
void correlate2d_input_grad_omp(const double* d_out, std::size_t out_ch,
                                std::size_t out_h, std::size_t out_w,
                                const double* kern, std::size_t in_ch,
                                std::size_t ksz, std::size_t stride,
                                double* d_in, std::size_t in_h,
                                std::size_t in_w);
void correlate2d_input_grad(const double* d_out, std::size_t out_ch,
                            std::size_t out_h, std::size_t out_w,
                            const double* kern, std::size_t in_ch,
                            std::size_t ksz, std::size_t stride, double* d_in,
                            std::size_t in_h, std::size_t in_w);

// ---- 5-point Laplacian on an index-mapped interior ----------------------
// `index[y * grid_w + x]` is the unknown id at that grid cell or -1 for
// Dirichlet cells. out[i] = 4 x[i] - sum of the (interior) neighbours.

void laplacian_apply_serial(const double* x, const int* index,
                            std::size_t grid_h, std::size_t grid_w,
                            double* out);
void laplacian_apply_omp(const double* x, const int* index, std::size_t grid_h,
                         std::size_t grid_w, double* out);
void laplacian_apply(const double* x, const int* index, std::size_t grid_h,
                     std::size_t grid_w, double* out);

// ---- blocked reductions -------------------------------------------------
// Both variants sum fixed 1024-element blocks and combine the partial sums
// in block order, so the result is independent of the thread count.

double dot_serial(std::span<const double> a, std::span<const double> b);
double dot_omp(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);

double sum_serial(std::span<const double> a);
double sum_omp(std::span<const double> a);
double sum(std::span<const double> a);

}  // namespace roadaug::kernels

#endif  // ROADAUG_KERNELS_HPP
