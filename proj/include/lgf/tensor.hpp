#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lgf/error.hpp"

namespace lgf {

// Dense 1-D or 2-D tensor of doubles, row-major. tape_id links the tensor to
// a node on a Tape; -1 means detached. A detached tensor is plain data and
// never receives a gradient.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;
    int tape_id = -1;
    std::uint64_t tape_uid = 0;  // which tape the id refers to; 0 = none

    Tensor() = default;
    Tensor(std::vector<std::size_t> shp, std::vector<double> vals);

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor scalar(double v) { return Tensor({1}, {v}); }
    static Tensor row(std::vector<double> vals);
    static Tensor column(std::vector<double> vals);
    static Tensor matrix(std::size_t r, std::size_t c, std::vector<double> vals);

    std::size_t size() const { return values.size(); }
    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() == 2 ? shape[1] : 1; }
    bool is_matrix() const { return shape.size() == 2; }
    bool attached() const { return tape_id >= 0; }

    double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

    std::string shape_str() const;
};

enum class OpKind {
    leaf,
    matmul,
    add,
    hadamard,
    sigmoid,
    tanh,
    relu,
    softmax_rows,
    concat_cols,
    transpose,
    sum_all,
    frobenius_sq,
    scale,
    // Composite ops with dedicated entry points; they carry attributes or need
    // log/sqrt, so they are not reachable through the generic apply() surface.
    cross_entropy,
    sqrt_scalar,
    row_entropy_mean,
};

const char* op_name(OpKind kind);

// Append-only computation tape (define-by-run, rebuilt per forward pass).
// Node ids are topologically ordered: every operand id precedes its consumer.
class Tape {
public:
    // Record a leaf holding a copy of the given data; returns the attached tensor.
    Tensor constant(const Tensor& t);
    Tensor constant(std::vector<std::size_t> shape, std::vector<double> values);
    Tensor constant_scalar(double v) { return constant({1}, {v}); }

    // Attach a parameter in place so its gradient can be read back after backward().
    void watch(Tensor& t);

    // Generic primitive surface. kind must be one of the twelve public
    // primitives; anything else raises UnsupportedOpError.
    Tensor apply(OpKind kind, std::span<const Tensor> operands);

    Tensor matmul(const Tensor& a, const Tensor& b);
    Tensor add(const Tensor& a, const Tensor& b);
    Tensor hadamard(const Tensor& a, const Tensor& b);
    Tensor sigmoid(const Tensor& x);
    Tensor tanh(const Tensor& x);
    Tensor relu(const Tensor& x);
    Tensor softmax_rows(const Tensor& x);
    Tensor concat_cols(std::span<const Tensor> xs);
    Tensor concat_cols(const Tensor& a, const Tensor& b);
    Tensor transpose(const Tensor& x);
    Tensor sum_all(const Tensor& x);
    Tensor frobenius_sq(const Tensor& x);
    Tensor scale(const Tensor& x, const Tensor& s);  // s is scalar-shaped

    // -log softmax(logits)[label], log-sum-exp form; label is 1-based.
    Tensor cross_entropy(const Tensor& logits, int label);
    // sqrt of a nonnegative scalar; gradient defined as 0 at exactly 0.
    Tensor sqrt_scalar(const Tensor& x);
    // Mean over rows of the Shannon entropy (natural log) of each row.
    Tensor row_entropy_mean(const Tensor& s);

    // Reverse pass from a scalar loss. Every node reachable backward from the
    // loss gets a gradient of matching shape; unreachable nodes keep zeros.
    // Returns gradients indexed by tape id. Running it twice gives identical
    // results.
    const std::vector<std::vector<double>>& backward(const Tensor& loss);

    // Gradient of an attached tensor after backward().
    std::span<const double> grad(const Tensor& t) const;

    std::size_t node_count() const { return nodes_.size(); }
    const std::vector<std::size_t>& node_shape(int id) const { return nodes_.at(static_cast<std::size_t>(id)).shape; }

    // Whether the tensor's tape handle refers to this tape (stale handles from
    // an earlier pass do not count).
    bool owns(const Tensor& t) const { return t.attached() && t.tape_uid == uid_; }

private:
    struct Node {
        OpKind kind = OpKind::leaf;
        std::vector<int> args;
        std::vector<std::size_t> shape;
        std::vector<double> value;
        std::vector<double> saved;  // op-specific extras (softmax probabilities, ...)
        int attr = 0;               // cross_entropy label
    };

    int record(Node n);
    const Node& node_of(const Tensor& t, const char* who) const;
    Tensor result_of(int id) const;
    void backprop_node(int id);

    static std::uint64_t next_uid();

    std::uint64_t uid_ = next_uid();
    std::vector<Node> nodes_;
    std::vector<std::vector<double>> grads_;
};

// Named view over a parameter set; order is the registry order and is stable.
using ParamRegistry = std::vector<std::pair<std::string, Tensor*>>;
using GradMap = std::unordered_map<std::string, std::vector<double>>;

struct AdamState {
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
    long step_count = 0;

    static AdamState init(const ParamRegistry& params);
};

// Standard Adam update (beta1=0.9, beta2=0.999, eps=1e-8, bias correction).
// Mutates the parameters in place and advances the state by one step.
void adam_step(const ParamRegistry& params, const GradMap& grads, AdamState& state, double lr);

struct FdCheckResult {
    double max_rel_error = 0.0;
    std::vector<std::pair<std::string, double>> per_param;  // registry order
};

// scalar_fn runs a forward pass on the given tape (watching whichever
// parameters it uses) and returns the scalar loss on that tape.
using ScalarFn = std::function<Tensor(Tape&)>;

// Central-difference check of analytic gradients over every parameter entry.
// Relative error per entry is |analytic - numeric| / max(|numeric|, 1e-8).
// Parameters are perturbed and restored; net effect is no mutation.
FdCheckResult finite_diff_check(const ScalarFn& scalar_fn, const ParamRegistry& params, double step);

}  // namespace lgf
