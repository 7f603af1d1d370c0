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

// Timing comparison of the serial reference kernels against the OpenMP
// variants. The two must agree bit for bit; this binary reports the
// speedups on the current machine.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <vector>

#include "roadaug/kernels.hpp"
#include "roadaug/rng.hpp"

namespace {

using roadaug::Rng;
namespace kernels = roadaug::kernels;

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() /
           reps;
}

void report(const char* name, double serial_ms, double omp_ms,
            bool bit_equal) {
    std::printf("%-28s %10.3f ms %10.3f ms %8.2fx   %s\n", name, serial_ms,
                omp_ms, serial_ms / omp_ms, bit_equal ? "bit-equal" : "DIFFER");
}

std::vector<double> random_vec(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

}  // namespace

int main() {
    Rng rng(7);
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp",
                "speedup");

    {
        const std::size_t m = 384, n = 384, k = 384;
        const std::vector<double> a = random_vec(m * k, rng);
        const std::vector<double> b = random_vec(k * n, rng);
        std::vector<double> c1(m * n), c2(m * n);
        const double ts = time_ms(
            [&] {
                kernels::matmul_serial(a.data(), b.data(), c1.data(), m, n, k,
                                       false, false);
            },
            5);
        const double tp = time_ms(
            [&] {
                kernels::matmul_omp(a.data(), b.data(), c2.data(), m, n, k,
                                    false, false);
            },
            5);
        report("matmul 384^3", ts, tp,
               std::memcmp(c1.data(), c2.data(), m * n * sizeof(double)) == 0);
    }

    {
        const std::size_t in_ch = 16, h = 64, w = 64, out_ch = 32, ksz = 5,
                          stride = 2;
        const std::vector<double> in = random_vec(in_ch * h * w, rng);
        const std::vector<double> kern =
            random_vec(out_ch * in_ch * ksz * ksz, rng);
        const std::size_t oh = (h - ksz) / stride + 1;
        const std::size_t ow = (w - ksz) / stride + 1;
        std::vector<double> o1(out_ch * oh * ow), o2(out_ch * oh * ow);
        const double ts = time_ms(
            [&] {
                kernels::correlate2d_serial(in.data(), in_ch, h, w,
                                            kern.data(), out_ch, ksz, stride,
                                            o1.data());
            },
            5);
        const double tp = time_ms(
            [&] {
                kernels::correlate2d_omp(in.data(), in_ch, h, w, kern.data(),
                                         out_ch, ksz, stride, o2.data());
            },
            5);
        report("correlate2d 16x64x64 -> 32", ts, tp,
               std::memcmp(o1.data(), o2.data(), o1.size() * sizeof(double)) ==
                   0);
    }

    {
        const std::size_t in_ch = 16, h = 64, w = 64, out_ch = 32, ksz = 5,
                          stride = 2;
        const std::size_t oh = (h - ksz) / stride + 1;
        const std::size_t ow = (w - ksz) / stride + 1;
        const std::vector<double> d_out = random_vec(out_ch * oh * ow, rng);
        const std::vector<double> kern =
            random_vec(out_ch * in_ch * ksz * ksz, rng);
        std::vector<double> g1(in_ch * h * w), g2(in_ch * h * w);
        const double ts = time_ms(
            [&] {
                kernels::correlate2d_input_grad_serial(
                    d_out.data(), out_ch, oh, ow, kern.data(), in_ch, ksz,
                    stride, g1.data(), h, w);
            },
            5);
        const double tp = time_ms(
            [&] {
                kernels::correlate2d_input_grad_omp(
                    d_out.data(), out_ch, oh, ow, kern.data(), in_ch, ksz,
                    stride, g2.data(), h, w);
            },
            5);
        report("correlate2d input grad", ts, tp,
               std::memcmp(g1.data(), g2.data(), g1.size() * sizeof(double)) ==
                   0);
    }

    {
        const std::size_t side = 256;
        std::vector<int> index(side * side, -1);
        int id = 0;
        for (std::size_t y = 1; y + 1 < side; ++y)
            for (std::size_t x = 1; x + 1 < side; ++x)
                index[y * side + x] = id++;
        const std::vector<double> x = random_vec(static_cast<std::size_t>(id),
                                                 rng);
        std::vector<double> o1(static_cast<std::size_t>(id)),
            o2(static_cast<std::size_t>(id));
        const double ts = time_ms(
            [&] {
                kernels::laplacian_apply_serial(x.data(), index.data(), side,
                                                side, o1.data());
            },
            20);
        const double tp = time_ms(
            [&] {
                kernels::laplacian_apply_omp(x.data(), index.data(), side,
                                             side, o2.data());
            },
            20);
        report("laplacian 256x256", ts, tp,
               std::memcmp(o1.data(), o2.data(), o1.size() * sizeof(double)) ==
                   0);
    }

    {
        const std::size_t n = 1 << 22;
        const std::vector<double> a = random_vec(n, rng);
        const std::vector<double> b = random_vec(n, rng);
        double r1 = 0.0, r2 = 0.0;
        const double ts = time_ms([&] { r1 = kernels::dot_serial(a, b); }, 10);
        const double tp = time_ms([&] { r2 = kernels::dot_omp(a, b); }, 10);
        report("dot 4M (blocked)", ts, tp, r1 == r2);
    }

    return 0;
}
