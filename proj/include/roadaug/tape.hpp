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

#ifndef ROADAUG_TAPE_HPP
#define ROADAUG_TAPE_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "roadaug/tensor.hpp"

namespace roadaug::ad {

/// Primitive operations the tape records. The backward pass of every
/// primitive is expressed in terms of these same primitives, which is what
/// makes grad-of-grad work: differentiating a gradient just walks nodes
/// that an earlier grad() call appended.
enum class Op : std::uint8_t {
    kLeaf,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kScale,     // x * c
    kAddConst,  // x + c
    kMatMul,    // op(A) * op(B) with transpose flags
    kRelu,
    kLeakyRelu,   // slope in c
    kLeakyGate,   // d(leaky_relu)/dx as a value: 1 or slope; derivative 0
    kTanh,
    kSquare,
    kSqrt,
    kSum,          // all elements -> 1x1
    kMean,         // all elements -> 1x1
    kRowSum,       // r x c -> r x 1
    kColSum,       // r x c -> 1 x c
    kBcastScalar,  // 1x1 -> r x c
    kBcastCol,     // r x 1 -> r x c
    kBcastRow,     // 1 x c -> r x c
};

using ValueId = std::int32_t;
inline constexpr ValueId kNoValue = -1;

struct Node {
    Op op = Op::kLeaf;
    std::array<ValueId, 2> in{kNoValue, kNoValue};
    double c = 0.0;  // scale factor / added constant / leaky slope
    bool trans_a = false;
    bool trans_b = false;
    std::size_t bcast_rows = 0;  // broadcast target dims
    std::size_t bcast_cols = 0;
    Tensor value;
};

/// Eagerly-evaluated recording tape. Values are handles (indices) into the
/// node list; the list order is a topological order by construction.
class Tape {
public:
    ValueId leaf(Tensor t);

    ValueId add(ValueId a, ValueId b);
    ValueId sub(ValueId a, ValueId b);
    ValueId mul(ValueId a, ValueId b);
    ValueId div(ValueId a, ValueId b);
    ValueId scale(ValueId a, double c);
    ValueId add_const(ValueId a, double c);
    ValueId matmul(ValueId a, ValueId b, bool trans_a = false,
                   bool trans_b = false);
    ValueId relu(ValueId a);
    ValueId leaky_relu(ValueId a, double slope);
    ValueId leaky_gate(ValueId a, double slope);
    ValueId tanh(ValueId a);
    ValueId sigmoid(ValueId a);  // composite: 0.5 * (tanh(x / 2) + 1)
    ValueId square(ValueId a);
    ValueId sqrt(ValueId a);
    ValueId sum(ValueId a);
    ValueId mean(ValueId a);
    ValueId row_sum(ValueId a);
    ValueId col_sum(ValueId a);
    ValueId broadcast_scalar(ValueId a, std::size_t rows, std::size_t cols);
    ValueId broadcast_col(ValueId a, std::size_t cols);
    ValueId broadcast_row(ValueId a, std::size_t rows);

    // Composites used all over the GAN losses.
    ValueId norm(ValueId a) { return sqrt(sum(square(a))); }
    ValueId row_norm(ValueId a) { return sqrt(row_sum(square(a))); }

    const Tensor& value(ValueId id) const { return nodes_[check(id)].value; }
    std::size_t node_count() const { return nodes_.size(); }
    const Node& node(ValueId id) const { return nodes_[check(id)]; }

    /// Reverse-mode gradients of a scalar objective with respect to `wrt`.
    /// The returned ids are ordinary recorded nodes, so an objective built
    /// from them can be differentiated again. Parameters the objective does
    /// not reach get a zero gradient of matching shape.
    std::vector<ValueId> grad(ValueId objective, std::span<const ValueId> wrt);

    /// Re-executes every non-leaf node in order, overwriting stored values.
    /// For identical leaf contents this reproduces all values bit-exactly.
    void replay();

private:
    std::size_t check(ValueId id) const;
    ValueId push(Node n);
    void eval(Node& n) const;
    const Tensor& val(ValueId id) const { return nodes_[check(id)].value; }
    ValueId zeros_like(ValueId a);
    void accumulate(std::vector<ValueId>& adj, ValueId target,
                    ValueId contribution);
    void backprop_node(ValueId id, std::vector<ValueId>& adj);
    [[noreturn]] void report_nonfinite(ValueId upto) const;

    std::vector<Node> nodes_;
};

}  // namespace roadaug::ad

#endif  // ROADAUG_TAPE_HPP
