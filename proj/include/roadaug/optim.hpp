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

#ifndef ROADAUG_OPTIM_HPP
#define ROADAUG_OPTIM_HPP

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "roadaug/tensor.hpp"

namespace roadaug::optim {

// ---- Adam ----------------------------------------------------------------

struct AdamConfig {
    double learning_rate = 2e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected Adam state over a parameter list. Accumulator shapes are
/// pinned to the parameter shapes at construction.
class AdamState {
public:
    AdamState(std::span<const Tensor> params, AdamConfig config);

    /// One update, in place. Deterministic given inputs.
    void step(std::span<Tensor> params, std::span<const Tensor> grads);

    std::size_t step_count() const { return step_count_; }
    const AdamConfig& config() const { return config_; }

private:
    AdamConfig config_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    std::size_t step_count_ = 0;
};

// ---- L-BFGS ----------------------------------------------------------------

/// Scalar objective of a flat vector; writes the gradient into `grad`
/// (same length as `x`) and returns the value.
using VectorObjective =
    std::function<double(std::span<const double> x, std::span<double> grad)>;

struct LbfgsConfig {
    std::size_t memory = 10;
    double sufficient_decrease = 1e-4;  // Armijo constant
    double backtrack_factor = 0.5;
    std::size_t max_step_trials = 20;
};

struct LbfgsResult {
    std::vector<double> x;
    std::vector<double> history;  // objective value at x0 plus one entry per
                                  // accepted step; non-increasing
    bool converged = false;       // gradient tolerance reached
    bool line_search_failed = false;
    std::size_t iterations = 0;   // accepted steps
};

/// Limited-memory BFGS with backtracking line search. Curvature pairs with
/// s'y <= 0 are dropped. Never throws on line-search failure; the best
/// iterate comes back flagged.
LbfgsResult lbfgs_minimize(const VectorObjective& objective,
                           std::vector<double> x0, std::size_t max_iters,
                           double grad_tol, const LbfgsConfig& config = {});

// ---- Conjugate gradient -----------------------------------------------------

using LinearOperator =
    std::function<void(std::span<const double> x, std::span<double> out)>;

struct CgResult {
    std::vector<double> x;
    double relative_residual = 0.0;  // ||A x - b|| / ||b||, recomputed
    bool converged = false;
    std::size_t iterations = 0;
};

/// Conjugate gradient for symmetric positive-definite operators. The
/// convergence contract ||A x - b|| <= tol * ||b|| is verified against a
/// freshly computed residual before `converged` is set. Zero or negative
/// curvature raises NumericalError (the operator is not SPD).
CgResult cg_solve(const LinearOperator& apply_a, std::span<const double> b,
                  double tol, std::size_t max_iter);

}  // namespace roadaug::optim

#endif  // ROADAUG_OPTIM_HPP
