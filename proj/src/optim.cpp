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

#include "roadaug/optim.hpp"

#include <cmath>
#include <string>

#include "roadaug/kernels.hpp"

namespace roadaug::optim {

AdamState::AdamState(std::span<const Tensor> params, AdamConfig config)
    : config_(config) {
    if (config_.learning_rate <= 0.0)
        throw ContractError("adam: learning rate must be positive");
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Tensor& p : params) {
        m_.push_back(Tensor::zeros(p.shape));
        v_.push_back(Tensor::zeros(p.shape));
    }
}

void AdamState::step(std::span<Tensor> params, std::span<const Tensor> grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        throw ContractError("adam: parameter/gradient count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i)
        if (!params[i].same_shape(m_[i]) || !grads[i].same_shape(m_[i]))
            throw ContractError("adam: shape mismatch at parameter " +
                                std::to_string(i));

    ++step_count_;
    const double t = static_cast<double>(step_count_);
    const double bc1 = 1.0 - std::pow(config_.beta1, t);
    const double bc2 = 1.0 - std::pow(config_.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        double* m = m_[i].data.data();
        double* v = v_[i].data.data();
        double* p = params[i].data.data();
        const double* g = grads[i].data.data();
        const std::size_t n = params[i].size();
        for (std::size_t j = 0; j < n; ++j) {
            m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g[j];
            v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            p[j] -= config_.learning_rate * mhat /
                    (std::sqrt(vhat) + config_.epsilon);
        }
    }
}

namespace {

double norm2(std::span<const double> v) {
    return std::sqrt(kernels::dot(v, v));
}

}  // namespace

LbfgsResult lbfgs_minimize(const VectorObjective& objective,
                           std::vector<double> x0, std::size_t max_iters,
                           double grad_tol, const LbfgsConfig& config) {
    const std::size_t n = x0.size();
    LbfgsResult result;
    result.x = std::move(x0);

    std::vector<double> grad(n);
    double fx = objective(result.x, grad);
    if (!std::isfinite(fx))
        throw NumericalError("lbfgs: objective not finite at x0");
    result.history.push_back(fx);

    struct Pair {
        std::vector<double> s, y;
        double rho;
    };
    std::deque<Pair> pairs;

    std::vector<double> direction(n), x_new(n), grad_new(n), alpha;

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        if (norm2(grad) <= grad_tol) {
            result.converged = true;
            break;
        }

        // Two-loop recursion: direction = -H grad.
        direction = grad;
        alpha.assign(pairs.size(), 0.0);
        for (std::size_t i = pairs.size(); i-- > 0;) {
            const Pair& pr = pairs[i];
            alpha[i] = pr.rho * kernels::dot(pr.s, direction);
            for (std::size_t j = 0; j < n; ++j)
                direction[j] -= alpha[i] * pr.y[j];
        }
        if (!pairs.empty()) {
            const Pair& last = pairs.back();
            const double gamma = kernels::dot(last.s, last.y) /
                                 kernels::dot(last.y, last.y);
            for (double& d : direction) d *= gamma;
        }
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const Pair& pr = pairs[i];
            const double beta = pr.rho * kernels::dot(pr.y, direction);
            for (std::size_t j = 0; j < n; ++j)
                direction[j] += (alpha[i] - beta) * pr.s[j];
        }
        for (double& d : direction) d = -d;

        double dir_deriv = kernels::dot(grad, direction);
        if (dir_deriv >= 0.0) {
            // Not a descent direction (can happen after skipped pairs);
            // fall back to steepest descent.
            for (std::size_t j = 0; j < n; ++j) direction[j] = -grad[j];
            dir_deriv = -kernels::dot(grad, grad);
        }

        // Backtracking line search with the Armijo condition. The first
        // iteration has no curvature information, so start from a
        // gradient-scaled step instead of 1.
        double step = pairs.empty()
                          ? std::min(1.0, 1.0 / std::max(1.0, norm2(grad)))
                          : 1.0;
        bool accepted = false;
        double f_new = fx;
        for (std::size_t trial = 0; trial < config.max_step_trials; ++trial) {
            for (std::size_t j = 0; j < n; ++j)
                x_new[j] = result.x[j] + step * direction[j];
            f_new = objective(x_new, grad_new);
            if (std::isfinite(f_new) &&
                f_new <= fx + config.sufficient_decrease * step * dir_deriv) {
                accepted = true;
                break;
            }
            step *= config.backtrack_factor;
        }
        if (!accepted) {
            result.line_search_failed = true;
            break;
        }

        // One quadratic-interpolation refinement of the accepted step. The
        // model through phi(0), phi'(0) and phi(step) is exact when the
        // objective is quadratic along the ray, which is what gives this
        // method its finite termination there.
        {
            const double denom = f_new - fx - dir_deriv * step;
            if (denom > 0.0) {
                const double t_star =
                    -0.5 * dir_deriv * step * step / denom;
                if (std::isfinite(t_star) && t_star > 0.0 &&
                    t_star <= 10.0 * step && std::abs(t_star - step) >
                                                 1e-12 * step) {
                    std::vector<double> x_ref(n), grad_ref(n);
                    for (std::size_t j = 0; j < n; ++j)
                        x_ref[j] = result.x[j] + t_star * direction[j];
                    const double f_ref = objective(x_ref, grad_ref);
                    if (std::isfinite(f_ref) && f_ref < f_new &&
                        f_ref <= fx + config.sufficient_decrease * t_star *
                                          dir_deriv) {
                        x_new.swap(x_ref);
                        grad_new.swap(grad_ref);
                        f_new = f_ref;
                    }
                }
            }
        }

        Pair pr;
        pr.s.resize(n);
        pr.y.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            pr.s[j] = x_new[j] - result.x[j];
            pr.y[j] = grad_new[j] - grad[j];
        }
        const double sy = kernels::dot(pr.s, pr.y);
        if (sy > 0.0) {
            pr.rho = 1.0 / sy;
            pairs.push_back(std::move(pr));
            if (pairs.size() > config.memory) pairs.pop_front();
        } else {
            // The pair is skipped, and the stored curvature no longer
            // describes this region; restart from steepest descent rather
            // than keep applying a stale model.
            pairs.clear();
        }

        result.x.swap(x_new);
        grad.swap(grad_new);
        fx = f_new;
        result.history.push_back(fx);
        ++result.iterations;
    }

    if (!result.converged && !result.line_search_failed)
        result.converged = norm2(grad) <= grad_tol;
    return result;
}

CgResult cg_solve(const LinearOperator& apply_a, std::span<const double> b,
                  double tol, std::size_t max_iter) {
    const std::size_t n = b.size();
    CgResult result;
    result.x.assign(n, 0.0);

    const double b_norm = norm2(b);
    if (b_norm == 0.0) {
        result.converged = true;
        return result;
    }
    const double threshold = tol * b_norm;

    std::vector<double> r(b.begin(), b.end());  // r = b - A*0
    std::vector<double> p = r;
    std::vector<double> ap(n);
    double rr = kernels::dot(r, r);

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        apply_a(p, ap);
        const double pap = kernels::dot(p, ap);
        if (pap <= 0.0)
            throw NumericalError(
                "cg: non-positive curvature, operator is not SPD (p'Ap = " +
                std::to_string(pap) + ")");
        const double alpha = rr / pap;
        for (std::size_t j = 0; j < n; ++j) {
            result.x[j] += alpha * p[j];
            r[j] -= alpha * ap[j];
        }
        const double rr_new = kernels::dot(r, r);
        result.iterations = iter + 1;
        if (std::sqrt(rr_new) <= threshold) {
            // Recompute the true residual; the recurrence can drift.
            apply_a(result.x, ap);
            double true_rr = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double d = ap[j] - b[j];
                true_rr += d * d;
            }
            result.relative_residual = std::sqrt(true_rr) / b_norm;
            if (result.relative_residual <= tol) {
                result.converged = true;
                return result;
            }
            // Keep iterating on the recomputed residual.
            for (std::size_t j = 0; j < n; ++j) r[j] = b[j] - ap[j];
            rr = kernels::dot(r, r);
            p.assign(r.begin(), r.end());
            continue;
        }
        const double beta = rr_new / rr;
        for (std::size_t j = 0; j < n; ++j) p[j] = r[j] + beta * p[j];
        rr = rr_new;
    }

    apply_a(result.x, ap);
    double true_rr = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = ap[j] - b[j];
        true_rr += d * d;
    }
    result.relative_residual = std::sqrt(true_rr) / b_norm;
    result.converged = result.relative_residual <= tol;
    return result;
}

}  // namespace roadaug::optim
