#include "geoaux/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace geoaux {

namespace {

void matmul_nn(const Array& a, const Array& b, Array& out) {
    const int m = a.rows, k = a.cols, n = b.cols;
    for (int i = 0; i < m; ++i) {
        const double* ar = a.row(i);
        double* orow = out.row(i);
        for (int l = 0; l < k; ++l) {
            const double av = ar[l];
            if (av == 0.0) continue;
            const double* br = b.row(l);
            for (int j = 0; j < n; ++j) orow[j] += av * br[j];
        }
    }
}

// out += g * b^T, g: (m, n), b: (k, n), out: (m, k)
void accum_matmul_nt(const Array& g, const Array& b, Array& out) {
    const int m = g.rows, n = g.cols, k = b.rows;
    for (int i = 0; i < m; ++i) {
        const double* gr = g.row(i);
        double* orow = out.row(i);
        for (int l = 0; l < k; ++l) {
            const double* br = b.row(l);
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += gr[j] * br[j];
            orow[l] += acc;
        }
    }
}

// out += a^T * g, a: (m, k), g: (m, n), out: (k, n)
void accum_matmul_tn(const Array& a, const Array& g, Array& out) {
    const int m = a.rows, k = a.cols, n = g.cols;
    for (int i = 0; i < m; ++i) {
        const double* ar = a.row(i);
        const double* gr = g.row(i);
        for (int l = 0; l < k; ++l) {
            const double av = ar[l];
            if (av == 0.0) continue;
            double* orow = out.row(l);
            for (int j = 0; j < n; ++j) orow[j] += av * gr[j];
        }
    }
}

}  // namespace

const Tape::Node& Tape::node(Id id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
        throw std::out_of_range("Tape: bad node id " + std::to_string(id));
    return nodes_[static_cast<std::size_t>(id)];
}

void Tape::check(Id id) const {
    if (!check_finite) return;
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.value.all_finite())
        throw std::runtime_error("Tape: non-finite value produced by node " +
                                 std::to_string(id) + (n.name.empty() ? "" : " (" + n.name + ")"));
}

Id Tape::push(Node n) {
    if (n.a >= 0) n.requires_grad = n.requires_grad || node(n.a).requires_grad;
    if (n.b >= 0) n.requires_grad = n.requires_grad || node(n.b).requires_grad;
    nodes_.push_back(std::move(n));
    const Id id = static_cast<Id>(nodes_.size()) - 1;
    check(id);
    return id;
}

Id Tape::input(Array v, std::string name) {
    Node n;
    n.op = OpKind::input;
    n.value = std::move(v);
    n.name = std::move(name);
    return push(std::move(n));
}

Id Tape::param(Array v, std::string name) {
    Node n;
    n.op = OpKind::param;
    n.value = std::move(v);
    n.requires_grad = true;
    n.name = std::move(name);
    return push(std::move(n));
}

Id Tape::matmul(Id a, Id b) {
    const Array& av = node(a).value;
    const Array& bv = node(b).value;
    if (av.cols != bv.rows)
        throw std::invalid_argument("matmul: inner dimensions differ, " + av.shape_str() +
                                    " vs " + bv.shape_str());
    Node n;
    n.op = OpKind::matmul;
    n.a = a;
    n.b = b;
    n.value = Array(av.rows, bv.cols);
    matmul_nn(av, bv, n.value);
    return push(std::move(n));
}

Id Tape::add_bias(Id x, Id b) {
    const Array& xv = node(x).value;
    const Array& bv = node(b).value;
    if (bv.rows != 1 || bv.cols != xv.cols)
        throw std::invalid_argument("add_bias: bias " + bv.shape_str() +
                                    " does not broadcast over " + xv.shape_str());
    Node n;
    n.op = OpKind::add_bias;
    n.a = x;
    n.b = b;
    n.value = xv;
    for (int i = 0; i < xv.rows; ++i) {
        double* r = n.value.row(i);
        const double* br = bv.row(0);
        for (int j = 0; j < xv.cols; ++j) r[j] += br[j];
    }
    return push(std::move(n));
}

Id Tape::edge_features(Id x, std::vector<int> centers, std::vector<int> neighbors) {
    const Array& xv = node(x).value;
    if (centers.size() != neighbors.size())
        throw std::invalid_argument("edge_features: " + std::to_string(centers.size()) +
                                    " centers vs " + std::to_string(neighbors.size()) +
                                    " neighbors");
    for (const auto& v : {centers, neighbors})
        for (int i : v)
            if (i < 0 || i >= xv.rows)
                throw std::out_of_range("edge_features: index " + std::to_string(i) +
                                        " outside " + xv.shape_str());
    const int d = xv.cols;
    Node n;
    n.op = OpKind::edge_features;
    n.a = x;
    n.value = Array(static_cast<int>(centers.size()), 2 * d);
    for (std::size_t r = 0; r < centers.size(); ++r) {
        const double* ctr = xv.row(centers[r]);
        const double* ngb = xv.row(neighbors[r]);
        double* out = n.value.row(static_cast<int>(r));
        for (int j = 0; j < d; ++j) {
            out[j] = ctr[j];
            out[d + j] = ngb[j] - ctr[j];
        }
    }
    n.idx = std::move(centers);
    n.idx2 = std::move(neighbors);
    return push(std::move(n));
}

Id Tape::relu(Id x) {
    Node n;
    n.op = OpKind::relu;
    n.a = x;
    n.value = node(x).value;
    for (double& v : n.value.data) v = v > 0.0 ? v : 0.0;
    return push(std::move(n));
}

Id Tape::concat_cols(Id a, Id b) {
    const Array& av = node(a).value;
    const Array& bv = node(b).value;
    if (av.rows != bv.rows)
        throw std::invalid_argument("concat_cols: row counts differ, " + av.shape_str() +
                                    " vs " + bv.shape_str());
    Node n;
    n.op = OpKind::concat_cols;
    n.a = a;
    n.b = b;
    n.value = Array(av.rows, av.cols + bv.cols);
    for (int i = 0; i < av.rows; ++i) {
        double* r = n.value.row(i);
        std::copy(av.row(i), av.row(i) + av.cols, r);
        std::copy(bv.row(i), bv.row(i) + bv.cols, r + av.cols);
    }
    return push(std::move(n));
}

Id Tape::gather_rows(Id x, std::vector<int> idx) {
    const Array& xv = node(x).value;
    for (int i : idx)
        if (i < 0 || i >= xv.rows)
            throw std::out_of_range("gather_rows: index " + std::to_string(i) +
                                    " outside " + xv.shape_str());
    Node n;
    n.op = OpKind::gather_rows;
    n.a = x;
    n.value = Array(static_cast<int>(idx.size()), xv.cols);
    for (std::size_t i = 0; i < idx.size(); ++i)
        std::copy(xv.row(idx[i]), xv.row(idx[i]) + xv.cols, n.value.row(static_cast<int>(i)));
    n.idx = std::move(idx);
    return push(std::move(n));
}

Id Tape::group_max_rows(Id x, int group) {
    const Array& xv = node(x).value;
    if (group <= 0 || xv.rows % group != 0)
        throw std::invalid_argument("group_max_rows: group " + std::to_string(group) +
                                    " does not divide rows of " + xv.shape_str());
    const int out_rows = xv.rows / group;
    Node n;
    n.op = OpKind::group_max_rows;
    n.a = x;
    n.i0 = group;
    n.value = Array(out_rows, xv.cols);
    n.idx.assign(static_cast<std::size_t>(out_rows) * xv.cols, 0);
    for (int g = 0; g < out_rows; ++g) {
        double* orow = n.value.row(g);
        int* arg = n.idx.data() + static_cast<std::size_t>(g) * xv.cols;
        const int r0 = g * group;
        std::copy(xv.row(r0), xv.row(r0) + xv.cols, orow);
        for (int j = 0; j < xv.cols; ++j) arg[j] = r0;
        for (int r = r0 + 1; r < r0 + group; ++r) {
            const double* xr = xv.row(r);
            for (int j = 0; j < xv.cols; ++j) {
                if (xr[j] > orow[j]) {
                    orow[j] = xr[j];
                    arg[j] = r;
                }
            }
        }
    }
    return push(std::move(n));
}

Id Tape::max_over_axis(Id x, int axis) {
    const Array& xv = node(x).value;
    if (axis != 0 && axis != 1) throw std::invalid_argument("max_over_axis: axis must be 0 or 1");
    if (xv.rows == 0 || xv.cols == 0)
        throw std::invalid_argument("max_over_axis: empty input " + xv.shape_str());
    Node n;
    n.op = OpKind::max_over_axis;
    n.a = x;
    n.i0 = axis;
    if (axis == 0) {
        n.value = Array(1, xv.cols);
        n.idx.assign(static_cast<std::size_t>(xv.cols), 0);
        std::copy(xv.row(0), xv.row(0) + xv.cols, n.value.row(0));
        for (int i = 1; i < xv.rows; ++i) {
            const double* xr = xv.row(i);
            for (int j = 0; j < xv.cols; ++j) {
                if (xr[j] > n.value.data[static_cast<std::size_t>(j)]) {
                    n.value.data[static_cast<std::size_t>(j)] = xr[j];
                    n.idx[static_cast<std::size_t>(j)] = i;
                }
            }
        }
    } else {
        n.value = Array(xv.rows, 1);
        n.idx.assign(static_cast<std::size_t>(xv.rows), 0);
        for (int i = 0; i < xv.rows; ++i) {
            const double* xr = xv.row(i);
            double best = xr[0];
            int arg = 0;
            for (int j = 1; j < xv.cols; ++j) {
                if (xr[j] > best) {
                    best = xr[j];
                    arg = j;
                }
            }
            n.value.data[static_cast<std::size_t>(i)] = best;
            n.idx[static_cast<std::size_t>(i)] = arg;
        }
    }
    return push(std::move(n));
}

Id Tape::mean_over_axis(Id x, int axis) {
    const Array& xv = node(x).value;
    if (axis != 0 && axis != 1) throw std::invalid_argument("mean_over_axis: axis must be 0 or 1");
    if (xv.rows == 0 || xv.cols == 0)
        throw std::invalid_argument("mean_over_axis: empty input " + xv.shape_str());
    Node n;
    n.op = OpKind::mean_over_axis;
    n.a = x;
    n.i0 = axis;
    if (axis == 0) {
        n.value = Array(1, xv.cols);
        for (int i = 0; i < xv.rows; ++i) {
            const double* xr = xv.row(i);
            for (int j = 0; j < xv.cols; ++j) n.value.data[static_cast<std::size_t>(j)] += xr[j];
        }
        for (double& v : n.value.data) v /= xv.rows;
    } else {
        n.value = Array(xv.rows, 1);
        for (int i = 0; i < xv.rows; ++i) {
            const double* xr = xv.row(i);
            double s = 0.0;
            for (int j = 0; j < xv.cols; ++j) s += xr[j];
            n.value.data[static_cast<std::size_t>(i)] = s / xv.cols;
        }
    }
    return push(std::move(n));
}

Id Tape::softmax_cross_entropy(Id logits, std::vector<int> labels) {
    const Array& z = node(logits).value;
    if (static_cast<int>(labels.size()) != z.rows)
        throw std::invalid_argument("softmax_cross_entropy: " + std::to_string(labels.size()) +
                                    " labels for logits " + z.shape_str());
    for (int y : labels)
        if (y < 0 || y >= z.cols)
            throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(y) +
                                    " outside [0, " + std::to_string(z.cols) + ")");
    Node n;
    n.op = OpKind::softmax_cross_entropy;
    n.a = logits;
    n.aux = Array(z.rows, z.cols);
    double loss = 0.0;
    for (int i = 0; i < z.rows; ++i) {
        const double* zr = z.row(i);
        double* pr = n.aux.row(i);
        double zmax = zr[0];
        for (int j = 1; j < z.cols; ++j) zmax = std::max(zmax, zr[j]);
        double denom = 0.0;
        for (int j = 0; j < z.cols; ++j) {
            pr[j] = std::exp(zr[j] - zmax);
            denom += pr[j];
        }
        for (int j = 0; j < z.cols; ++j) pr[j] /= denom;
        loss -= (zr[labels[static_cast<std::size_t>(i)]] - zmax) - std::log(denom);
    }
    n.value = Array::scalar(loss / z.rows);
    n.idx = std::move(labels);
    return push(std::move(n));
}

Id Tape::mse_rows(Id pred, Id target, std::vector<double> row_mask) {
    const Array& p = node(pred).value;
    const Array& t = node(target).value;
    if (!p.same_shape(t))
        throw std::invalid_argument("mse_rows: shapes differ, " + p.shape_str() + " vs " +
                                    t.shape_str());
    if (!row_mask.empty() && static_cast<int>(row_mask.size()) != p.rows)
        throw std::invalid_argument("mse_rows: mask length " + std::to_string(row_mask.size()) +
                                    " for " + p.shape_str());
    Node n;
    n.op = OpKind::mse_rows;
    n.a = pred;
    n.b = target;
    double active = 0.0;
    double loss = 0.0;
    for (int i = 0; i < p.rows; ++i) {
        const double w = row_mask.empty() ? 1.0 : row_mask[static_cast<std::size_t>(i)];
        if (w == 0.0) continue;
        active += w;
        const double* pr = p.row(i);
        const double* tr = t.row(i);
        double s = 0.0;
        for (int j = 0; j < p.cols; ++j) {
            const double d = pr[j] - tr[j];
            s += d * d;
        }
        loss += w * s;
    }
    n.value = Array::scalar(active > 0.0 ? loss / active : 0.0);
    n.c = active;
    n.mask = std::move(row_mask);
    return push(std::move(n));
}

Id Tape::add(Id a, Id b) {
    const Array& av = node(a).value;
    const Array& bv = node(b).value;
    if (!av.same_shape(bv))
        throw std::invalid_argument("add: shapes differ, " + av.shape_str() + " vs " +
                                    bv.shape_str());
    Node n;
    n.op = OpKind::add;
    n.a = a;
    n.b = b;
    n.value = av;
    for (std::size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] += bv.data[i];
    return push(std::move(n));
}

Id Tape::sub(Id a, Id b) {
    const Array& av = node(a).value;
    const Array& bv = node(b).value;
    if (!av.same_shape(bv))
        throw std::invalid_argument("sub: shapes differ, " + av.shape_str() + " vs " +
                                    bv.shape_str());
    Node n;
    n.op = OpKind::sub;
    n.a = a;
    n.b = b;
    n.value = av;
    for (std::size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] -= bv.data[i];
    return push(std::move(n));
}

Id Tape::scale(Id x, double c) {
    Node n;
    n.op = OpKind::scale;
    n.a = x;
    n.c = c;
    n.value = node(x).value;
    for (double& v : n.value.data) v *= c;
    return push(std::move(n));
}

Id Tape::slice_cols(Id x, int c0, int c1) {
    const Array& xv = node(x).value;
    if (c0 < 0 || c1 > xv.cols || c0 >= c1)
        throw std::invalid_argument("slice_cols: [" + std::to_string(c0) + ", " +
                                    std::to_string(c1) + ") invalid for " + xv.shape_str());
    Node n;
    n.op = OpKind::slice_cols;
    n.a = x;
    n.i0 = c0;
    n.i1 = c1;
    n.value = Array(xv.rows, c1 - c0);
    for (int i = 0; i < xv.rows; ++i)
        std::copy(xv.row(i) + c0, xv.row(i) + c1, n.value.row(i));
    return push(std::move(n));
}

const Array& Tape::value(Id id) const { return node(id).value; }

const std::string& Tape::name(Id id) const { return node(id).name; }

bool Tape::has_grad(Id id) const {
    node(id);
    return static_cast<std::size_t>(id) < touched_.size() && touched_[static_cast<std::size_t>(id)];
}

const Array& Tape::grad(Id id) const {
    if (!has_grad(id))
        throw std::logic_error("Tape::grad: node " + std::to_string(id) +
                               " has no gradient; call backward first");
    return grads_[static_cast<std::size_t>(id)];
}

Array& Tape::grad_slot(Id id) {
    auto& g = grads_[static_cast<std::size_t>(id)];
    if (!touched_[static_cast<std::size_t>(id)]) {
        const Array& v = nodes_[static_cast<std::size_t>(id)].value;
        g = Array(v.rows, v.cols);
        touched_[static_cast<std::size_t>(id)] = 1;
    }
    return g;
}

void Tape::backward(Id loss) {
    const Node& top = node(loss);
    if (top.value.size() != 1)
        throw std::invalid_argument("backward: loss must be scalar, got " + top.value.shape_str());
    grads_.assign(nodes_.size(), Array());
    touched_.assign(nodes_.size(), 0);

    // Mark ancestors of the loss; gradients flow only through nodes that both
    // descend into a param and feed the loss.
    std::vector<char> alive(nodes_.size(), 0);
    alive[static_cast<std::size_t>(loss)] = 1;
    for (Id id = loss; id >= 0; --id) {
        if (!alive[static_cast<std::size_t>(id)]) continue;
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.requires_grad) {
            alive[static_cast<std::size_t>(id)] = 0;
            continue;
        }
        if (n.a >= 0) alive[static_cast<std::size_t>(n.a)] = 1;
        if (n.b >= 0) alive[static_cast<std::size_t>(n.b)] = 1;
    }
    if (!alive[static_cast<std::size_t>(loss)]) return;

    grad_slot(loss).data[0] = 1.0;

    for (Id id = loss; id >= 0; --id) {
        if (!alive[static_cast<std::size_t>(id)] || !touched_[static_cast<std::size_t>(id)])
            continue;
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        const Array& g = grads_[static_cast<std::size_t>(id)];
        const bool need_a = n.a >= 0 && alive[static_cast<std::size_t>(n.a)];
        const bool need_b = n.b >= 0 && alive[static_cast<std::size_t>(n.b)];
        switch (n.op) {
            case OpKind::input:
            case OpKind::param:
                break;
            case OpKind::matmul: {
                if (need_a) accum_matmul_nt(g, nodes_[static_cast<std::size_t>(n.b)].value,
                                            grad_slot(n.a));
                if (need_b) accum_matmul_tn(nodes_[static_cast<std::size_t>(n.a)].value, g,
                                            grad_slot(n.b));
                break;
            }
            case OpKind::add_bias: {
                if (need_a) {
                    Array& ga = grad_slot(n.a);
                    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
                }
                if (need_b) {
                    Array& gb = grad_slot(n.b);
                    for (int i = 0; i < g.rows; ++i) {
                        const double* gr = g.row(i);
                        for (int j = 0; j < g.cols; ++j) gb.data[static_cast<std::size_t>(j)] += gr[j];
                    }
                }
                break;
            }
            case OpKind::edge_features: {
                if (need_a) {
                    Array& ga = grad_slot(n.a);
                    const int d = ga.cols;
                    for (int r = 0; r < g.rows; ++r) {
                        const double* gr = g.row(r);
                        double* gc = ga.row(n.idx[static_cast<std::size_t>(r)]);
                        double* gn = ga.row(n.idx2[static_cast<std::size_t>(r)]);
                        for (int j = 0; j < d; ++j) {
                            gc[j] += gr[j] - gr[d + j];
                            gn[j] += gr[d + j];
                        }
                    }
                }
                break;
            }
            case OpKind::relu: {
                if (need_a) {
                    Array& ga = grad_slot(n.a);
                    const Array& x = nodes_[static_cast<std::size_t>(n.a)].value;
                    for (std::size_t i = 0; i < g.data.size(); ++i)
                        if (x.data[i] > 0.0) ga.data[i] += g.data[i];
                }
                break;
            }
            case OpKind::concat_cols: {
                const Array& av = nodes_[static_cast<std::size_t>(n.a)].value;
                if (need_a) {
                    Array& ga = grad_slot(n.a);
                    for (int i = 0; i < g.rows; ++i) {
                        const double* gr = g.row(i);
                        double* gar = ga.row(i);
                        for (int j = 0; j < av.cols; ++j) gar[j] += gr[j];
                    }
                }
                if (need_b) {
                    Array& gb = grad_slot(n.b);
                    for (int i = 0; i < g.rows; ++i) {
                        const double* gr = g.row(i) + av.cols;
                        double* gbr = gb.row(i);
                        for (int j = 0; j < gb.cols; ++j) gbr[j] += gr[j];
                    }
                }
                break;
            }
            case OpKind::gather_rows: {
                if (need_a) {
                    Array& ga = grad_slot(n.a);
                    for (int i = 0; i < g.rows; ++i) {
                        double* gar = ga.row(n.idx[static_cast<std::size_t>(i)]);
                        const double* gr = g.row(i);
                        for (int j = 0; j < g.cols; ++j) gar[j] += gr[j];
                    }
                }
                break;
            }
            case OpKind::group_max_rows: {
                if (need_a) {
                    Array& ga = grad_slot(n.a);
                    for (int r = 0; r < g.rows; ++r) {
                        const double* gr = g.row(r);
                        const int* arg = n.idx.data() + static_cast<std::size_t>(r) * g.cols;
                        for (int j = 0; j < g.cols; ++j) ga.at(arg[j], j) += gr[j];
                    }
                }
                break;
            }
            case OpKind::max_over_axis: {
                if (need_a) {
                    Array& ga = grad_slot(n.a);
                    if (n.i0 == 0) {
                        for (int j = 0; j < g.cols; ++j)
                            ga.at(n.idx[static_cast<std::size_t>(j)], j) +=
                                g.data[static_cast<std::size_t>(j)];
                    } else {
                        for (int i = 0; i < g.rows; ++i)
                            ga.at(i, n.idx[static_cast<std::size_t>(i)]) +=
                                g.data[static_cast<std::size_t>(i)];
                    }
                }
                break;
            }
            case OpKind::mean_over_axis: {
                if (need_a) {
                    Array& ga = grad_slot(n.a);
                    if (n.i0 == 0) {
                        const double inv = 1.0 / ga.rows;
                        for (int i = 0; i < ga.rows; ++i) {
                            double* gar = ga.row(i);
                            for (int j = 0; j < ga.cols; ++j)
                                gar[j] += g.data[static_cast<std::size_t>(j)] * inv;
                        }
                    } else {
                        const double inv = 1.0 / ga.cols;
                        for (int i = 0; i < ga.rows; ++i) {
                            double* gar = ga.row(i);
                            const double gi = g.data[static_cast<std::size_t>(i)] * inv;
                            for (int j = 0; j < ga.cols; ++j) gar[j] += gi;
                        }
                    }
                }
                break;
            }
            case OpKind::softmax_cross_entropy: {
                if (need_a) {
                    Array& ga = grad_slot(n.a);
                    const double s = g.data[0] / n.aux.rows;
                    for (int i = 0; i < n.aux.rows; ++i) {
                        const double* pr = n.aux.row(i);
                        double* gar = ga.row(i);
                        for (int j = 0; j < n.aux.cols; ++j) gar[j] += s * pr[j];
                        gar[n.idx[static_cast<std::size_t>(i)]] -= s;
                    }
                }
                break;
            }
            case OpKind::mse_rows: {
                if (n.c == 0.0 || (!need_a && !need_b)) break;
                const Array& p = nodes_[static_cast<std::size_t>(n.a)].value;
                const Array& t = nodes_[static_cast<std::size_t>(n.b)].value;
                Array* ga = need_a ? &grad_slot(n.a) : nullptr;
                Array* gb = need_b ? &grad_slot(n.b) : nullptr;
                const double s = 2.0 * g.data[0] / n.c;
                for (int i = 0; i < p.rows; ++i) {
                    const double w = n.mask.empty() ? 1.0 : n.mask[static_cast<std::size_t>(i)];
                    if (w == 0.0) continue;
                    const double* pr = p.row(i);
                    const double* tr = t.row(i);
                    for (int j = 0; j < p.cols; ++j) {
                        const double d = s * w * (pr[j] - tr[j]);
                        if (ga) ga->at(i, j) += d;
                        if (gb) gb->at(i, j) -= d;
                    }
                }
                break;
            }
            case OpKind::add: {
                if (need_a) {
                    Array& ga = grad_slot(n.a);
                    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
                }
                if (need_b) {
                    Array& gb = grad_slot(n.b);
                    for (std::size_t i = 0; i < g.data.size(); ++i) gb.data[i] += g.data[i];
                }
                break;
            }
            case OpKind::sub: {
                if (need_a) {
                    Array& ga = grad_slot(n.a);
                    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
                }
                if (need_b) {
                    Array& gb = grad_slot(n.b);
                    for (std::size_t i = 0; i < g.data.size(); ++i) gb.data[i] -= g.data[i];
                }
                break;
            }
            case OpKind::scale: {
                if (need_a) {
                    Array& ga = grad_slot(n.a);
                    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += n.c * g.data[i];
                }
                break;
            }
            case OpKind::slice_cols: {
                if (need_a) {
                    Array& ga = grad_slot(n.a);
                    for (int i = 0; i < g.rows; ++i) {
                        const double* gr = g.row(i);
                        double* gar = ga.row(i) + n.i0;
                        for (int j = 0; j < g.cols; ++j) gar[j] += gr[j];
                    }
                }
                break;
            }
        }
    }
}

}  // namespace geoaux
