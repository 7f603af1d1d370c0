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

#include "roadaug/tape.hpp"

#include <cmath>
#include <string>

#include "roadaug/kernels.hpp"

namespace roadaug::ad {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw ContractError(msg);
}

}  // namespace

std::size_t Tape::check(ValueId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
        throw ContractError("Tape: value id out of range");
    return static_cast<std::size_t>(id);
}

ValueId Tape::push(Node n) {
    if (n.op != Op::kLeaf) eval(n);
    nodes_.push_back(std::move(n));
    return static_cast<ValueId>(nodes_.size() - 1);
}

ValueId Tape::leaf(Tensor t) {
    Node n;
    n.op = Op::kLeaf;
    n.value = std::move(t);
    return push(std::move(n));
}

ValueId Tape::add(ValueId a, ValueId b) {
    require(val(a).same_shape(val(b)), "add: shape mismatch");
    Node n;
    n.op = Op::kAdd;
    n.in = {a, b};
    return push(std::move(n));
}

ValueId Tape::sub(ValueId a, ValueId b) {
    require(val(a).same_shape(val(b)), "sub: shape mismatch");
    Node n;
    n.op = Op::kSub;
    n.in = {a, b};
    return push(std::move(n));
}

ValueId Tape::mul(ValueId a, ValueId b) {
    require(val(a).same_shape(val(b)), "mul: shape mismatch");
    Node n;
    n.op = Op::kMul;
    n.in = {a, b};
    return push(std::move(n));
}

ValueId Tape::div(ValueId a, ValueId b) {
    require(val(a).same_shape(val(b)), "div: shape mismatch");
    Node n;
    n.op = Op::kDiv;
    n.in = {a, b};
    return push(std::move(n));
}

ValueId Tape::scale(ValueId a, double c) {
    Node n;
    n.op = Op::kScale;
    n.in = {a, kNoValue};
    n.c = c;
    return push(std::move(n));
}

ValueId Tape::add_const(ValueId a, double c) {
    Node n;
    n.op = Op::kAddConst;
    n.in = {a, kNoValue};
    n.c = c;
    return push(std::move(n));
}

ValueId Tape::matmul(ValueId a, ValueId b, bool trans_a, bool trans_b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    const std::size_t ak = trans_a ? ta.rows() : ta.cols();
    const std::size_t bk = trans_b ? tb.cols() : tb.rows();
    require(ak == bk, "matmul: inner dimensions do not agree");
    Node n;
    n.op = Op::kMatMul;
    n.in = {a, b};
    n.trans_a = trans_a;
    n.trans_b = trans_b;
    return push(std::move(n));
}

ValueId Tape::relu(ValueId a) {
    Node n;
    n.op = Op::kRelu;
    n.in = {a, kNoValue};
    return push(std::move(n));
}

ValueId Tape::leaky_relu(ValueId a, double slope) {
    Node n;
    n.op = Op::kLeakyRelu;
    n.in = {a, kNoValue};
    n.c = slope;
    return push(std::move(n));
}

ValueId Tape::leaky_gate(ValueId a, double slope) {
    Node n;
    n.op = Op::kLeakyGate;
    n.in = {a, kNoValue};
    n.c = slope;
    return push(std::move(n));
}

ValueId Tape::tanh(ValueId a) {
    Node n;
    n.op = Op::kTanh;
    n.in = {a, kNoValue};
    return push(std::move(n));
}

ValueId Tape::sigmoid(ValueId a) {
    return scale(add_const(tanh(scale(a, 0.5)), 1.0), 0.5);
}

ValueId Tape::square(ValueId a) {
    Node n;
    n.op = Op::kSquare;
    n.in = {a, kNoValue};
    return push(std::move(n));
}

ValueId Tape::sqrt(ValueId a) {
    Node n;
    n.op = Op::kSqrt;
    n.in = {a, kNoValue};
    return push(std::move(n));
}

ValueId Tape::sum(ValueId a) {
    Node n;
    n.op = Op::kSum;
    n.in = {a, kNoValue};
    return push(std::move(n));
}

ValueId Tape::mean(ValueId a) {
    require(val(a).size() > 0, "mean: empty tensor");
    Node n;
    n.op = Op::kMean;
    n.in = {a, kNoValue};
    return push(std::move(n));
}

ValueId Tape::row_sum(ValueId a) {
    Node n;
    n.op = Op::kRowSum;
    n.in = {a, kNoValue};
    return push(std::move(n));
}

ValueId Tape::col_sum(ValueId a) {
    Node n;
    n.op = Op::kColSum;
    n.in = {a, kNoValue};
    return push(std::move(n));
}

ValueId Tape::broadcast_scalar(ValueId a, std::size_t rows,
                               std::size_t cols) {
    require(val(a).size() == 1, "broadcast_scalar: input must be scalar");
    Node n;
    n.op = Op::kBcastScalar;
    n.in = {a, kNoValue};
    n.bcast_rows = rows;
    n.bcast_cols = cols;
    return push(std::move(n));
}

ValueId Tape::broadcast_col(ValueId a, std::size_t cols) {
    require(val(a).cols() == 1, "broadcast_col: input must be r x 1");
    Node n;
    n.op = Op::kBcastCol;
    n.in = {a, kNoValue};
    n.bcast_rows = val(a).rows();
    n.bcast_cols = cols;
    return push(std::move(n));
}

ValueId Tape::broadcast_row(ValueId a, std::size_t rows) {
    require(val(a).rows() == 1, "broadcast_row: input must be 1 x c");
    Node n;
    n.op = Op::kBcastRow;
    n.in = {a, kNoValue};
    n.bcast_rows = rows;
    n.bcast_cols = val(a).cols();
    return push(std::move(n));
}

void Tape::eval(Node& n) const {
    // Every non-leaf op has a validated first input; binary ops a second.
    const auto arg = [&](int slot) -> const Tensor& { return val(n.in[slot]); };
    switch (n.op) {
        case Op::kLeaf:
            break;
        case Op::kAdd: {
            n.value = arg(0);
            const Tensor& b = arg(1);
            for (std::size_t i = 0; i < n.value.size(); ++i)
                n.value.data[i] += b.data[i];
            break;
        }
        case Op::kSub: {
            n.value = arg(0);
            const Tensor& b = arg(1);
            for (std::size_t i = 0; i < n.value.size(); ++i)
                n.value.data[i] -= b.data[i];
            break;
        }
        case Op::kMul: {
            n.value = arg(0);
            const Tensor& b = arg(1);
            for (std::size_t i = 0; i < n.value.size(); ++i)
                n.value.data[i] *= b.data[i];
            break;
        }
        case Op::kDiv: {
            n.value = arg(0);
            const Tensor& b = arg(1);
            for (std::size_t i = 0; i < n.value.size(); ++i)
                n.value.data[i] /= b.data[i];
            break;
        }
        case Op::kScale: {
            n.value = arg(0);
            for (double& v : n.value.data) v *= n.c;
            break;
        }
        case Op::kAddConst: {
            n.value = arg(0);
            for (double& v : n.value.data) v += n.c;
            break;
        }
        case Op::kMatMul: {
            const Tensor& a = arg(0);
            const Tensor& b = arg(1);
            const std::size_t m = n.trans_a ? a.cols() : a.rows();
            const std::size_t k = n.trans_a ? a.rows() : a.cols();
            const std::size_t c = n.trans_b ? b.rows() : b.cols();
            n.value = Tensor::zeros({m, c});
            kernels::matmul(a.data.data(), b.data.data(),
                            n.value.data.data(), m, c, k, n.trans_a,
                            n.trans_b);
            break;
        }
        case Op::kRelu: {
            n.value = arg(0);
            for (double& v : n.value.data) v = v > 0.0 ? v : 0.0;
            break;
        }
        case Op::kLeakyRelu: {
            n.value = arg(0);
            for (double& v : n.value.data) v = v > 0.0 ? v : n.c * v;
            break;
        }
        case Op::kLeakyGate: {
            n.value = arg(0);
            for (double& v : n.value.data) v = v > 0.0 ? 1.0 : n.c;
            break;
        }
        case Op::kTanh: {
            n.value = arg(0);
            for (double& v : n.value.data) v = std::tanh(v);
            break;
        }
        case Op::kSquare: {
            n.value = arg(0);
            for (double& v : n.value.data) v *= v;
            break;
        }
        case Op::kSqrt: {
            n.value = arg(0);
            for (double& v : n.value.data) v = std::sqrt(v);
            break;
        }
        case Op::kSum:
            n.value = Tensor::scalar(kernels::sum_serial(arg(0).data));
            break;
        case Op::kMean:
            n.value = Tensor::scalar(kernels::sum_serial(arg(0).data) /
                                     static_cast<double>(arg(0).size()));
            break;
        case Op::kRowSum: {
            const Tensor& a = arg(0);
            const std::size_t r = a.rows(), c = a.cols();
            n.value = Tensor::zeros({r, 1});
            for (std::size_t i = 0; i < r; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < c; ++j) s += a.at(i, j);
                n.value.data[i] = s;
            }
            break;
        }
        case Op::kColSum: {
            const Tensor& a = arg(0);
            const std::size_t r = a.rows(), c = a.cols();
            n.value = Tensor::zeros({1, c});
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j)
                    n.value.data[j] += a.at(i, j);
            break;
        }
        case Op::kBcastScalar:
            n.value = Tensor::full({n.bcast_rows, n.bcast_cols},
                                   arg(0).data[0]);
            break;
        case Op::kBcastCol: {
            const Tensor& a = arg(0);
            n.value = Tensor::zeros({n.bcast_rows, n.bcast_cols});
            for (std::size_t i = 0; i < n.bcast_rows; ++i)
                for (std::size_t j = 0; j < n.bcast_cols; ++j)
                    n.value.at(i, j) = a.data[i];
            break;
        }
        case Op::kBcastRow: {
            const Tensor& a = arg(0);
            n.value = Tensor::zeros({n.bcast_rows, n.bcast_cols});
            for (std::size_t i = 0; i < n.bcast_rows; ++i)
                for (std::size_t j = 0; j < n.bcast_cols; ++j)
                    n.value.at(i, j) = a.data[j];
            break;
        }
    }
}

ValueId Tape::zeros_like(ValueId a) {
    return leaf(Tensor::zeros(val(a).shape));
}

void Tape::accumulate(std::vector<ValueId>& adj, ValueId target,
                      ValueId contribution) {
    adj[static_cast<std::size_t>(target)] =
        adj[static_cast<std::size_t>(target)] == kNoValue
            ? contribution
            : add(adj[static_cast<std::size_t>(target)], contribution);
}

void Tape::backprop_node(ValueId id, std::vector<ValueId>& adj) {
    // Copy, not reference: pushing adjoint nodes may reallocate nodes_.
    const Node n = nodes_[static_cast<std::size_t>(id)];
    const ValueId g = adj[static_cast<std::size_t>(id)];
    const ValueId a = n.in[0];
    const ValueId b = n.in[1];
    switch (n.op) {
        case Op::kLeaf:
            break;
        case Op::kAdd:
            accumulate(adj, a, g);
            accumulate(adj, b, g);
            break;
        case Op::kSub:
            accumulate(adj, a, g);
            accumulate(adj, b, scale(g, -1.0));
            break;
        case Op::kMul:
            accumulate(adj, a, mul(g, b));
            accumulate(adj, b, mul(g, a));
            break;
        case Op::kDiv:
            // d/da (a/b) = 1/b ; d/db (a/b) = -(a/b)/b
            accumulate(adj, a, div(g, b));
            accumulate(adj, b, scale(div(mul(g, id), b), -1.0));
            break;
        case Op::kScale:
            accumulate(adj, a, scale(g, n.c));
            break;
        case Op::kAddConst:
            accumulate(adj, a, g);
            break;
        case Op::kMatMul: {
            // C = op(A) op(B); the four flag combinations each reduce to two
            // more matmuls.
            if (!n.trans_a && !n.trans_b) {
                accumulate(adj, a, matmul(g, b, false, true));
                accumulate(adj, b, matmul(a, g, true, false));
            } else if (n.trans_a && !n.trans_b) {
                accumulate(adj, a, matmul(b, g, false, true));
                accumulate(adj, b, matmul(a, g, false, false));
            } else if (!n.trans_a && n.trans_b) {
                accumulate(adj, a, matmul(g, b, false, false));
                accumulate(adj, b, matmul(g, a, true, false));
            } else {
                accumulate(adj, a, matmul(b, g, true, true));
                accumulate(adj, b, matmul(g, a, true, true));
            }
            break;
        }
        case Op::kRelu:
            accumulate(adj, a, mul(g, leaky_gate(a, 0.0)));
            break;
        case Op::kLeakyRelu:
            accumulate(adj, a, mul(g, leaky_gate(a, n.c)));
            break;
        case Op::kLeakyGate:
            // Piecewise constant: derivative is zero almost everywhere.
            break;
        case Op::kTanh:
            accumulate(adj, a, mul(g, add_const(scale(square(id), -1.0), 1.0)));
            break;
        case Op::kSquare:
            accumulate(adj, a, scale(mul(g, a), 2.0));
            break;
        case Op::kSqrt:
            accumulate(adj, a, scale(div(g, id), 0.5));
            break;
        case Op::kSum:
            accumulate(adj, a,
                       broadcast_scalar(g, val(a).rows(), val(a).cols()));
            break;
        case Op::kMean:
            accumulate(
                adj, a,
                scale(broadcast_scalar(g, val(a).rows(), val(a).cols()),
                      1.0 / static_cast<double>(val(a).size())));
            break;
        case Op::kRowSum:
            accumulate(adj, a, broadcast_col(g, val(a).cols()));
            break;
        case Op::kColSum:
            accumulate(adj, a, broadcast_row(g, val(a).rows()));
            break;
        case Op::kBcastScalar:
            accumulate(adj, a, sum(g));
            break;
        case Op::kBcastCol:
            accumulate(adj, a, row_sum(g));
            break;
        case Op::kBcastRow:
            accumulate(adj, a, col_sum(g));
            break;
    }
}

void Tape::report_nonfinite(ValueId upto) const {
    for (ValueId i = 0; i <= upto; ++i) {
        if (!nodes_[static_cast<std::size_t>(i)].value.all_finite())
            throw NumericalError("non-finite value at tape node " +
                                 std::to_string(i) + " (op " +
                                 std::to_string(static_cast<int>(
                                     nodes_[static_cast<std::size_t>(i)].op)) +
                                 ")");
    }
    throw NumericalError("non-finite gradient with no non-finite node value");
}

std::vector<ValueId> Tape::grad(ValueId objective,
                                std::span<const ValueId> wrt) {
    check(objective);
    if (val(objective).size() != 1)
        throw ContractError("grad: objective must be a scalar node");
    if (!std::isfinite(val(objective).data[0])) report_nonfinite(objective);

    std::vector<ValueId> adj(static_cast<std::size_t>(objective) + 1,
                             kNoValue);
    adj[static_cast<std::size_t>(objective)] = leaf(Tensor::scalar(1.0));
    for (ValueId i = objective; i >= 0; --i)
        if (adj[static_cast<std::size_t>(i)] != kNoValue)
            backprop_node(i, adj);

    std::vector<ValueId> out;
    out.reserve(wrt.size());
    for (ValueId w : wrt) {
        check(w);
        ValueId g = kNoValue;
        if (w <= objective) g = adj[static_cast<std::size_t>(w)];
        if (g == kNoValue) g = zeros_like(w);
        if (!val(g).all_finite()) report_nonfinite(objective);
        out.push_back(g);
    }
    return out;
}

void Tape::replay() {
    for (Node& n : nodes_)
        if (n.op != Op::kLeaf) eval(n);
}

}  // namespace roadaug::ad
