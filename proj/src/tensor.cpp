#include "lgf/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <sstream>

namespace lgf {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

void require_valid_shape(const std::vector<std::size_t>& shape) {
    if (shape.empty() || shape.size() > 2) {
        throw DimensionError("tensor shape must be 1-D or 2-D");
    }
    for (std::size_t d : shape) {
        if (d == 0) throw DimensionError("tensor dimensions must be positive");
    }
}

std::string shape_to_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

[[noreturn]] void dim_error(OpKind kind, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    throw DimensionError(std::string(op_name(kind)) + ": incompatible shapes " + shape_to_str(a) + " and " +
                         shape_to_str(b));
}

#ifndef NDEBUG
void check_finite(OpKind kind, const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NumericError(std::string(op_name(kind)) + ": non-finite value produced");
        }
    }
}
#endif

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shp, std::vector<double> vals) : shape(std::move(shp)), values(std::move(vals)) {
    require_valid_shape(shape);
    if (shape_product(shape) != values.size()) {
        throw DimensionError("tensor value count " + std::to_string(values.size()) + " does not match shape " +
                             shape_to_str(shape));
    }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    require_valid_shape(shape);
    std::size_t n = shape_product(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::row(std::vector<double> vals) {
    std::size_t n = vals.size();
    return Tensor({1, n}, std::move(vals));
}

Tensor Tensor::column(std::vector<double> vals) {
    std::size_t n = vals.size();
    return Tensor({n, 1}, std::move(vals));
}

Tensor Tensor::matrix(std::size_t r, std::size_t c, std::vector<double> vals) {
    return Tensor({r, c}, std::move(vals));
}

std::string Tensor::shape_str() const { return shape_to_str(shape); }

const char* op_name(OpKind kind) {
    switch (kind) {
        case OpKind::leaf: return "leaf";
        case OpKind::matmul: return "matmul";
        case OpKind::add: return "add";
        case OpKind::hadamard: return "hadamard";
        case OpKind::sigmoid: return "sigmoid";
        case OpKind::tanh: return "tanh";
        case OpKind::relu: return "relu";
        case OpKind::softmax_rows: return "softmax_rows";
        case OpKind::concat_cols: return "concat_cols";
        case OpKind::transpose: return "transpose";
        case OpKind::sum_all: return "sum_all";
        case OpKind::frobenius_sq: return "frobenius_sq";
        case OpKind::scale: return "scale";
        case OpKind::cross_entropy: return "cross_entropy";
        case OpKind::sqrt_scalar: return "sqrt_scalar";
        case OpKind::row_entropy_mean: return "row_entropy_mean";
    }
    return "unknown";
}

std::uint64_t Tape::next_uid() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
}

int Tape::record(Node n) {
#ifndef NDEBUG
    check_finite(n.kind, n.value);
#endif
    nodes_.push_back(std::move(n));
    grads_.clear();
    return static_cast<int>(nodes_.size()) - 1;
}

const Tape::Node& Tape::node_of(const Tensor& t, const char* who) const {
    if (!t.attached()) {
        throw ContractError(std::string(who) + ": operand tensor is detached from the tape");
    }
    if (t.tape_uid != uid_ || static_cast<std::size_t>(t.tape_id) >= nodes_.size()) {
        throw ContractError(std::string(who) + ": tensor belongs to a different tape");
    }
    return nodes_[static_cast<std::size_t>(t.tape_id)];
}

Tensor Tape::result_of(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    Tensor t(n.shape, n.value);
    t.tape_id = id;
    t.tape_uid = uid_;
    return t;
}

Tensor Tape::constant(const Tensor& t) {
    Node n;
    n.kind = OpKind::leaf;
    n.shape = t.shape;
    n.value = t.values;
    int id = record(std::move(n));
    return result_of(id);
}

Tensor Tape::constant(std::vector<std::size_t> shape, std::vector<double> values) {
    return constant(Tensor(std::move(shape), std::move(values)));
}

void Tape::watch(Tensor& t) {
    Node n;
    n.kind = OpKind::leaf;
    n.shape = t.shape;
    n.value = t.values;
    t.tape_id = record(std::move(n));
    t.tape_uid = uid_;
}

Tensor Tape::apply(OpKind kind, std::span<const Tensor> operands) {
    auto unary = [&](const char* who) -> const Tensor& {
        if (operands.size() != 1) {
            throw ContractError(std::string(who) + ": expected 1 operand, got " + std::to_string(operands.size()));
        }
        return operands[0];
    };
    auto binary = [&](const char* who) -> std::pair<const Tensor&, const Tensor&> {
        if (operands.size() != 2) {
            throw ContractError(std::string(who) + ": expected 2 operands, got " + std::to_string(operands.size()));
        }
        return {operands[0], operands[1]};
    };

    switch (kind) {
        case OpKind::matmul: {
            auto [a, b] = binary("matmul");
            return matmul(a, b);
        }
        case OpKind::add: {
            auto [a, b] = binary("add");
            return add(a, b);
        }
        case OpKind::hadamard: {
            auto [a, b] = binary("hadamard");
            return hadamard(a, b);
        }
        case OpKind::sigmoid: return sigmoid(unary("sigmoid"));
        case OpKind::tanh: return tanh(unary("tanh"));
        case OpKind::relu: return relu(unary("relu"));
        case OpKind::softmax_rows: return softmax_rows(unary("softmax_rows"));
        case OpKind::concat_cols: return concat_cols(operands);
        case OpKind::transpose: return transpose(unary("transpose"));
        case OpKind::sum_all: return sum_all(unary("sum_all"));
        case OpKind::frobenius_sq: return frobenius_sq(unary("frobenius_sq"));
        case OpKind::scale: {
            auto [a, b] = binary("scale");
            return scale(a, b);
        }
        default: throw UnsupportedOpError(std::string("apply: unsupported op kind '") + op_name(kind) + "'");
    }
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
    const Node& na = node_of(a, "matmul");
    const Node& nb = node_of(b, "matmul");
    if (na.shape.size() != 2 || nb.shape.size() != 2 || na.shape[1] != nb.shape[0]) {
        dim_error(OpKind::matmul, na.shape, nb.shape);
    }
    const std::size_t m = na.shape[0], k = na.shape[1], p = nb.shape[1];
    Node out;
    out.kind = OpKind::matmul;
    out.args = {a.tape_id, b.tape_id};
    out.shape = {m, p};
    out.value.assign(m * p, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = na.value[i * k + kk];
            if (aik == 0.0) continue;
            const double* brow = &nb.value[kk * p];
            double* orow = &out.value[i * p];
            for (std::size_t j = 0; j < p; ++j) orow[j] += aik * brow[j];
        }
    }
    return result_of(record(std::move(out)));
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
    const Node& na = node_of(a, "add");
    const Node& nb = node_of(b, "add");
    if (na.shape != nb.shape) dim_error(OpKind::add, na.shape, nb.shape);
    Node out;
    out.kind = OpKind::add;
    out.args = {a.tape_id, b.tape_id};
    out.shape = na.shape;
    out.value.resize(na.value.size());
    for (std::size_t i = 0; i < out.value.size(); ++i) out.value[i] = na.value[i] + nb.value[i];
    return result_of(record(std::move(out)));
}

Tensor Tape::hadamard(const Tensor& a, const Tensor& b) {
    const Node& na = node_of(a, "hadamard");
    const Node& nb = node_of(b, "hadamard");
    if (na.shape != nb.shape) dim_error(OpKind::hadamard, na.shape, nb.shape);
    Node out;
    out.kind = OpKind::hadamard;
    out.args = {a.tape_id, b.tape_id};
    out.shape = na.shape;
    out.value.resize(na.value.size());
    for (std::size_t i = 0; i < out.value.size(); ++i) out.value[i] = na.value[i] * nb.value[i];
    return result_of(record(std::move(out)));
}

Tensor Tape::sigmoid(const Tensor& x) {
    const Node& nx = node_of(x, "sigmoid");
    Node out;
    out.kind = OpKind::sigmoid;
    out.args = {x.tape_id};
    out.shape = nx.shape;
    out.value.resize(nx.value.size());
    for (std::size_t i = 0; i < out.value.size(); ++i) {
        const double v = nx.value[i];
        // Branch on sign so exp never overflows.
        out.value[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    return result_of(record(std::move(out)));
}

Tensor Tape::tanh(const Tensor& x) {
    const Node& nx = node_of(x, "tanh");
    Node out;
    out.kind = OpKind::tanh;
    out.args = {x.tape_id};
    out.shape = nx.shape;
    out.value.resize(nx.value.size());
    for (std::size_t i = 0; i < out.value.size(); ++i) out.value[i] = std::tanh(nx.value[i]);
    return result_of(record(std::move(out)));
}

Tensor Tape::relu(const Tensor& x) {
    const Node& nx = node_of(x, "relu");
    Node out;
    out.kind = OpKind::relu;
    out.args = {x.tape_id};
    out.shape = nx.shape;
    out.value.resize(nx.value.size());
    for (std::size_t i = 0; i < out.value.size(); ++i) out.value[i] = nx.value[i] > 0.0 ? nx.value[i] : 0.0;
    return result_of(record(std::move(out)));
}

Tensor Tape::softmax_rows(const Tensor& x) {
    const Node& nx = node_of(x, "softmax_rows");
    if (nx.shape.size() != 2) {
        throw DimensionError("softmax_rows: expected 2-D input, got " + shape_to_str(nx.shape));
    }
    const std::size_t r = nx.shape[0], c = nx.shape[1];
    Node out;
    out.kind = OpKind::softmax_rows;
    out.args = {x.tape_id};
    out.shape = nx.shape;
    out.value.resize(r * c);
    for (std::size_t i = 0; i < r; ++i) {
        const double* in = &nx.value[i * c];
        double* o = &out.value[i * c];
        double mx = in[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, in[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            o[j] = std::exp(in[j] - mx);
            sum += o[j];
        }
        for (std::size_t j = 0; j < c; ++j) o[j] /= sum;
    }
    return result_of(record(std::move(out)));
}

Tensor Tape::concat_cols(std::span<const Tensor> xs) {
    if (xs.size() < 2) {
        throw ContractError("concat_cols: expected at least 2 operands, got " + std::to_string(xs.size()));
    }
    const Node& first = node_of(xs[0], "concat_cols");
    if (first.shape.size() != 2) {
        throw DimensionError("concat_cols: expected 2-D operands, got " + shape_to_str(first.shape));
    }
    const std::size_t r = first.shape[0];
    std::size_t total_cols = 0;
    for (const Tensor& t : xs) {
        const Node& n = node_of(t, "concat_cols");
        if (n.shape.size() != 2 || n.shape[0] != r) dim_error(OpKind::concat_cols, first.shape, n.shape);
        total_cols += n.shape[1];
    }
    Node out;
    out.kind = OpKind::concat_cols;
    out.shape = {r, total_cols};
    out.value.resize(r * total_cols);
    out.args.reserve(xs.size());
    for (const Tensor& t : xs) out.args.push_back(t.tape_id);
    std::size_t col_off = 0;
    for (const Tensor& t : xs) {
        const Node& n = nodes_[static_cast<std::size_t>(t.tape_id)];
        const std::size_t c = n.shape[1];
        for (std::size_t i = 0; i < r; ++i) {
            std::copy_n(&n.value[i * c], c, &out.value[i * total_cols + col_off]);
        }
        col_off += c;
    }
    return result_of(record(std::move(out)));
}

Tensor Tape::concat_cols(const Tensor& a, const Tensor& b) {
    const Tensor xs[2] = {a, b};
    return concat_cols(std::span<const Tensor>(xs, 2));
}

Tensor Tape::transpose(const Tensor& x) {
    const Node& nx = node_of(x, "transpose");
    if (nx.shape.size() != 2) {
        throw DimensionError("transpose: expected 2-D input, got " + shape_to_str(nx.shape));
    }
    const std::size_t r = nx.shape[0], c = nx.shape[1];
    Node out;
    out.kind = OpKind::transpose;
    out.args = {x.tape_id};
    out.shape = {c, r};
    out.value.resize(r * c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.value[j * r + i] = nx.value[i * c + j];
    return result_of(record(std::move(out)));
}

Tensor Tape::sum_all(const Tensor& x) {
    const Node& nx = node_of(x, "sum_all");
    double s = 0.0;
    for (double v : nx.value) s += v;
    Node out;
    out.kind = OpKind::sum_all;
    out.args = {x.tape_id};
    out.shape = {1};
    out.value = {s};
    return result_of(record(std::move(out)));
}

Tensor Tape::frobenius_sq(const Tensor& x) {
    const Node& nx = node_of(x, "frobenius_sq");
    double s = 0.0;
    for (double v : nx.value) s += v * v;
    Node out;
    out.kind = OpKind::frobenius_sq;
    out.args = {x.tape_id};
    out.shape = {1};
    out.value = {s};
    return result_of(record(std::move(out)));
}

Tensor Tape::scale(const Tensor& x, const Tensor& s) {
    const Node& nx = node_of(x, "scale");
    const Node& ns = node_of(s, "scale");
    if (ns.value.size() != 1) dim_error(OpKind::scale, nx.shape, ns.shape);
    const double f = ns.value[0];
    Node out;
    out.kind = OpKind::scale;
    out.args = {x.tape_id, s.tape_id};
    out.shape = nx.shape;
    out.value.resize(nx.value.size());
    for (std::size_t i = 0; i < out.value.size(); ++i) out.value[i] = nx.value[i] * f;
    return result_of(record(std::move(out)));
}

Tensor Tape::cross_entropy(const Tensor& logits, int label) {
    const Node& nl = node_of(logits, "cross_entropy");
    const std::size_t k = nl.value.size();
    if (k < 2) throw ContractError("cross_entropy: need at least 2 classes");
    if (label < 1 || static_cast<std::size_t>(label) > k) {
        throw ContractError("cross_entropy: label " + std::to_string(label) + " out of range 1.." + std::to_string(k));
    }
    double mx = nl.value[0];
    for (double v : nl.value) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : nl.value) sum += std::exp(v - mx);
    const double lse = mx + std::log(sum);
    Node out;
    out.kind = OpKind::cross_entropy;
    out.args = {logits.tape_id};
    out.shape = {1};
    out.value = {lse - nl.value[static_cast<std::size_t>(label - 1)]};
    out.attr = label;
    out.saved.resize(k);  // softmax probabilities for the backward pass
    for (std::size_t j = 0; j < k; ++j) out.saved[j] = std::exp(nl.value[j] - mx) / sum;
    return result_of(record(std::move(out)));
}

Tensor Tape::sqrt_scalar(const Tensor& x) {
    const Node& nx = node_of(x, "sqrt_scalar");
    if (nx.value.size() != 1) {
        throw ContractError("sqrt_scalar: expected scalar input, got " + shape_to_str(nx.shape));
    }
    if (nx.value[0] < 0.0) throw NumericError("sqrt_scalar: negative input");
    Node out;
    out.kind = OpKind::sqrt_scalar;
    out.args = {x.tape_id};
    out.shape = {1};
    out.value = {std::sqrt(nx.value[0])};
    return result_of(record(std::move(out)));
}

Tensor Tape::row_entropy_mean(const Tensor& s) {
    const Node& ns = node_of(s, "row_entropy_mean");
    if (ns.shape.size() != 2) {
        throw DimensionError("row_entropy_mean: expected 2-D input, got " + shape_to_str(ns.shape));
    }
    const std::size_t r = ns.shape[0], c = ns.shape[1];
    double total = 0.0;
    for (std::size_t i = 0; i < r * c; ++i) {
        const double p = ns.value[i];
        if (p > 0.0) total -= p * std::log(p);
    }
    Node out;
    out.kind = OpKind::row_entropy_mean;
    out.args = {s.tape_id};
    out.shape = {1};
    out.value = {total / static_cast<double>(r)};
    return result_of(record(std::move(out)));
}

const std::vector<std::vector<double>>& Tape::backward(const Tensor& loss) {
    const Node& nl = node_of(loss, "backward");
    if (nl.value.size() != 1) {
        throw ContractError("backward: loss must be scalar, got shape " + shape_to_str(nl.shape));
    }
    grads_.assign(nodes_.size(), {});
    for (std::size_t i = 0; i < nodes_.size(); ++i) grads_[i].assign(nodes_[i].value.size(), 0.0);
    grads_[static_cast<std::size_t>(loss.tape_id)][0] = 1.0;
    for (int id = loss.tape_id; id >= 0; --id) backprop_node(id);
    return grads_;
}

void Tape::backprop_node(int id) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    const std::vector<double>& g = grads_[static_cast<std::size_t>(id)];
    switch (n.kind) {
        case OpKind::leaf: return;
        case OpKind::matmul: {
            const Node& a = nodes_[static_cast<std::size_t>(n.args[0])];
            const Node& b = nodes_[static_cast<std::size_t>(n.args[1])];
            std::vector<double>& ga = grads_[static_cast<std::size_t>(n.args[0])];
            std::vector<double>& gb = grads_[static_cast<std::size_t>(n.args[1])];
            const std::size_t m = a.shape[0], k = a.shape[1], p = b.shape[1];
            // dA += G B^T
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t kk = 0; kk < k; ++kk) {
                    double acc = 0.0;
                    const double* grow = &g[i * p];
                    const double* brow = &b.value[kk * p];
                    for (std::size_t j = 0; j < p; ++j) acc += grow[j] * brow[j];
                    ga[i * k + kk] += acc;
                }
            // dB += A^T G
            for (std::size_t kk = 0; kk < k; ++kk)
                for (std::size_t i = 0; i < m; ++i) {
                    const double aik = a.value[i * k + kk];
                    if (aik == 0.0) continue;
                    const double* grow = &g[i * p];
                    double* gbrow = &gb[kk * p];
                    for (std::size_t j = 0; j < p; ++j) gbrow[j] += aik * grow[j];
                }
            return;
        }
        case OpKind::add: {
            std::vector<double>& ga = grads_[static_cast<std::size_t>(n.args[0])];
            std::vector<double>& gb = grads_[static_cast<std::size_t>(n.args[1])];
            for (std::size_t i = 0; i < g.size(); ++i) {
                ga[i] += g[i];
                gb[i] += g[i];
            }
            return;
        }
        case OpKind::hadamard: {
            const Node& a = nodes_[static_cast<std::size_t>(n.args[0])];
            const Node& b = nodes_[static_cast<std::size_t>(n.args[1])];
            std::vector<double>& ga = grads_[static_cast<std::size_t>(n.args[0])];
            std::vector<double>& gb = grads_[static_cast<std::size_t>(n.args[1])];
            for (std::size_t i = 0; i < g.size(); ++i) {
                ga[i] += g[i] * b.value[i];
                gb[i] += g[i] * a.value[i];
            }
            return;
        }
        case OpKind::sigmoid: {
            std::vector<double>& gx = grads_[static_cast<std::size_t>(n.args[0])];
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double y = n.value[i];
                gx[i] += g[i] * y * (1.0 - y);
            }
            return;
        }
        case OpKind::tanh: {
            std::vector<double>& gx = grads_[static_cast<std::size_t>(n.args[0])];
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double y = n.value[i];
                gx[i] += g[i] * (1.0 - y * y);
            }
            return;
        }
        case OpKind::relu: {
            const Node& x = nodes_[static_cast<std::size_t>(n.args[0])];
            std::vector<double>& gx = grads_[static_cast<std::size_t>(n.args[0])];
            // Subgradient at exactly 0 is taken as 0.
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += x.value[i] > 0.0 ? g[i] : 0.0;
            return;
        }
        case OpKind::softmax_rows: {
            std::vector<double>& gx = grads_[static_cast<std::size_t>(n.args[0])];
            const std::size_t r = n.shape[0], c = n.shape[1];
            for (std::size_t i = 0; i < r; ++i) {
                const double* y = &n.value[i * c];
                const double* gr = &g[i * c];
                double dot = 0.0;
                for (std::size_t j = 0; j < c; ++j) dot += gr[j] * y[j];
                for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += y[j] * (gr[j] - dot);
            }
            return;
        }
        case OpKind::concat_cols: {
            const std::size_t r = n.shape[0], total = n.shape[1];
            std::size_t col_off = 0;
            for (int arg : n.args) {
                const Node& part = nodes_[static_cast<std::size_t>(arg)];
                std::vector<double>& gp = grads_[static_cast<std::size_t>(arg)];
                const std::size_t c = part.shape[1];
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < c; ++j) gp[i * c + j] += g[i * total + col_off + j];
                col_off += c;
            }
            return;
        }
        case OpKind::transpose: {
            std::vector<double>& gx = grads_[static_cast<std::size_t>(n.args[0])];
            const std::size_t r = n.shape[0], c = n.shape[1];  // output shape; input is c x r
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) gx[j * r + i] += g[i * c + j];
            return;
        }
        case OpKind::sum_all: {
            std::vector<double>& gx = grads_[static_cast<std::size_t>(n.args[0])];
            for (double& v : gx) v += g[0];
            return;
        }
        case OpKind::frobenius_sq: {
            const Node& x = nodes_[static_cast<std::size_t>(n.args[0])];
            std::vector<double>& gx = grads_[static_cast<std::size_t>(n.args[0])];
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += 2.0 * g[0] * x.value[i];
            return;
        }
        case OpKind::scale: {
            const Node& x = nodes_[static_cast<std::size_t>(n.args[0])];
            const Node& s = nodes_[static_cast<std::size_t>(n.args[1])];
            std::vector<double>& gx = grads_[static_cast<std::size_t>(n.args[0])];
            std::vector<double>& gs = grads_[static_cast<std::size_t>(n.args[1])];
            const double f = s.value[0];
            double acc = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                gx[i] += g[i] * f;
                acc += g[i] * x.value[i];
            }
            gs[0] += acc;
            return;
        }
        case OpKind::cross_entropy: {
            std::vector<double>& gx = grads_[static_cast<std::size_t>(n.args[0])];
            const std::size_t k = n.saved.size();
            const std::size_t y = static_cast<std::size_t>(n.attr - 1);
            for (std::size_t j = 0; j < k; ++j) gx[j] += g[0] * (n.saved[j] - (j == y ? 1.0 : 0.0));
            return;
        }
        case OpKind::sqrt_scalar: {
            std::vector<double>& gx = grads_[static_cast<std::size_t>(n.args[0])];
            // Subgradient 0 at the origin, like relu.
            if (n.value[0] > 1e-30) gx[0] += g[0] / (2.0 * n.value[0]);
            return;
        }
        case OpKind::row_entropy_mean: {
            const Node& s = nodes_[static_cast<std::size_t>(n.args[0])];
            std::vector<double>& gs = grads_[static_cast<std::size_t>(n.args[0])];
            const double inv_r = 1.0 / static_cast<double>(s.shape[0]);
            for (std::size_t i = 0; i < gs.size(); ++i) {
                const double p = s.value[i];
                if (p > 0.0) gs[i] += g[0] * (-(std::log(p) + 1.0)) * inv_r;
            }
            return;
        }
    }
}

std::span<const double> Tape::grad(const Tensor& t) const {
    if (!owns(t)) throw ContractError("grad: tensor is not attached to this tape");
    if (grads_.empty()) throw ContractError("grad: backward() has not been run on this tape");
    return grads_[static_cast<std::size_t>(t.tape_id)];
}

AdamState AdamState::init(const ParamRegistry& params) {
    AdamState s;
    s.first_moment.reserve(params.size());
    s.second_moment.reserve(params.size());
    for (const auto& [name, t] : params) {
        (void)name;
        s.first_moment.emplace_back(t->size(), 0.0);
        s.second_moment.emplace_back(t->size(), 0.0);
    }
    return s;
}

void adam_step(const ParamRegistry& params, const GradMap& grads, AdamState& state, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    if (state.first_moment.size() != params.size()) {
        throw ContractError("adam_step: state does not match parameter registry");
    }
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    for (std::size_t p = 0; p < params.size(); ++p) {
        const auto& [name, tensor] = params[p];
        auto it = grads.find(name);
        if (it == grads.end()) {
            throw ContractError("adam_step: missing gradient for parameter '" + name + "'");
        }
        const std::vector<double>& g = it->second;
        if (g.size() != tensor->size()) {
            throw DimensionError("adam_step: gradient size mismatch for parameter '" + name + "'");
        }
        std::vector<double>& m = state.first_moment[p];
        std::vector<double>& v = state.second_moment[p];
        for (std::size_t i = 0; i < g.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            tensor->values[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

FdCheckResult finite_diff_check(const ScalarFn& scalar_fn, const ParamRegistry& params, double step) {
    if (step <= 0.0) throw ContractError("finite_diff_check: step must be positive");

    auto eval = [&](const std::string& pname) {
        Tape tape;
        Tensor loss = scalar_fn(tape);
        if (!std::isfinite(loss.values.at(0))) {
            throw NumericError("finite_diff_check: non-finite loss while perturbing parameter '" + pname + "'");
        }
        return loss.values[0];
    };

    // Analytic gradients from one recorded pass.
    Tape tape;
    Tensor loss = scalar_fn(tape);
    if (!std::isfinite(loss.values.at(0))) {
        throw NumericError("finite_diff_check: non-finite loss at the evaluation point");
    }
    tape.backward(loss);
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& [name, t] : params) {
        (void)name;
        if (tape.owns(*t)) {
            auto g = tape.grad(*t);
            analytic.emplace_back(g.begin(), g.end());
        } else {
            analytic.emplace_back(t->size(), 0.0);  // parameter unused by scalar_fn
        }
    }

    FdCheckResult result;
    for (std::size_t p = 0; p < params.size(); ++p) {
        const auto& [name, t] = params[p];
        double worst = 0.0;
        for (std::size_t i = 0; i < t->size(); ++i) {
            const double saved = t->values[i];
            t->values[i] = saved + step;
            const double f_plus = eval(name);
            t->values[i] = saved - step;
            const double f_minus = eval(name);
            t->values[i] = saved;
            const double numeric = (f_plus - f_minus) / (2.0 * step);
            const double rel = std::abs(analytic[p][i] - numeric) / std::max(std::abs(numeric), 1e-8);
            worst = std::max(worst, rel);
        }
        result.per_param.emplace_back(name, worst);
        result.max_rel_error = std::max(result.max_rel_error, worst);
    }
    return result;
}

}  // namespace lgf
