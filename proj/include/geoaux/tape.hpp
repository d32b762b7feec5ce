#pragma once

#include <string>
#include <vector>

#include "geoaux/array.hpp"

namespace geoaux {

// Reverse-mode autodiff over a linear tape of dense 2-D arrays.
// Ids are indices into the tape; a node's parents always precede it.

using Id = int;

enum class OpKind {
    input,
    param,
    matmul,
    add_bias,
    edge_features,
    relu,
    concat_cols,
    gather_rows,
    group_max_rows,
    max_over_axis,
    mean_over_axis,
    softmax_cross_entropy,
    mse_rows,
    add,
    sub,
    scale,
    slice_cols,
};

#ifdef NDEBUG
inline constexpr bool kCheckFiniteDefault = false;
#else
inline constexpr bool kCheckFiniteDefault = true;
#endif

class Tape {
public:
    // When set, every op verifies its output is finite and throws otherwise.
    bool check_finite = kCheckFiniteDefault;

    Id input(Array v, std::string name = "");
    Id param(Array v, std::string name = "");

    Id matmul(Id a, Id b);
    // b has shape (1, cols) and is added to every row of x.
    Id add_bias(Id x, Id b);
    // Row r of the result is [x[centers[r]] ‖ x[neighbors[r]] − x[centers[r]]],
    // the edge feature of one directed graph edge. Fused equivalent of two
    // gathers, a subtraction and a concat.
    Id edge_features(Id x, std::vector<int> centers, std::vector<int> neighbors);
    Id relu(Id x);
    Id concat_cols(Id a, Id b);
    Id gather_rows(Id x, std::vector<int> idx);
    // Rows come in consecutive groups of `group`; each group collapses to its
    // column-wise max. Ties pick the earliest row.
    Id group_max_rows(Id x, int group);
    // axis 0: (m, n) -> (1, n); axis 1: (m, n) -> (m, 1). Ties pick the
    // smallest index.
    Id max_over_axis(Id x, int axis);
    Id mean_over_axis(Id x, int axis);
    // Mean negative log-likelihood over rows; labels[i] in [0, cols).
    // Stable via per-row max subtraction.
    Id softmax_cross_entropy(Id logits, std::vector<int> labels);
    // Mean over active rows of the squared L2 norm of (pred - target) rows.
    // row_mask entries are 0/1 weights; empty means all rows active. If no
    // row is active the result is exactly 0.
    Id mse_rows(Id pred, Id target, std::vector<double> row_mask = {});
    Id add(Id a, Id b);
    Id sub(Id a, Id b);
    Id scale(Id x, double c);
    Id slice_cols(Id x, int c0, int c1);

    const Array& value(Id id) const;
    // Gradient of the last backward() loss w.r.t. node `id`. Zero-shaped
    // arrays are never returned: has_grad() reports whether the node was
    // touched.
    const Array& grad(Id id) const;
    bool has_grad(Id id) const;

    // Accumulates gradients for exactly the ancestors of `loss` that lead to
    // a param. `loss` must be scalar. Clears previous gradients.
    void backward(Id loss);

    std::size_t size() const { return nodes_.size(); }
    const std::string& name(Id id) const;

private:
    struct Node {
        OpKind op;
        Id a = -1;
        Id b = -1;
        int i0 = 0;
        int i1 = 0;
        double c = 0.0;
        std::vector<int> idx;
        std::vector<int> idx2;
        std::vector<double> mask;
        Array value;
        Array aux;
        bool requires_grad = false;
        std::string name;
    };

    std::vector<Node> nodes_;
    std::vector<Array> grads_;
    std::vector<char> touched_;

    Id push(Node n);
    const Node& node(Id id) const;
    void check(Id id) const;
    Array& grad_slot(Id id);
};

}  // namespace geoaux
