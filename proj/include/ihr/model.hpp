#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ihr/linalg.hpp"

namespace ihr {

struct NamedVector {
    std::string name;
    std::vector<double> values;
};

// Full model parameters, partitioned into linear-layer weight matrices and
// everything else (here: biases). The partition is disjoint and exhaustive;
// the merge rules treat the two sides differently.
struct ParamSet {
    std::vector<Matrix> linear_weights; // W_l, shape d_o x d_i
    std::vector<NamedVector> remaining; // biases b_l, in layer order

    long linear_param_count() const;
    long remaining_param_count() const;
};

// FNV-1a over shapes, names and raw entry bytes.
std::uint64_t params_hash(const ParamSet& p);

enum class LossKind { CrossEntropy, Squared };

struct LossResult {
    std::vector<double> per_example;
    double mean = 0.0;
};

// Cross-entropy applies a softmax internally; labels are class indices.
// Throws NonFiniteLoss if any per-example value is not finite.
LossResult cross_entropy_loss(const Matrix& logits, const std::vector<int>& labels);

// Per-example sum of squared differences.
LossResult squared_loss(const Matrix& predictions, const Matrix& targets);

struct ForwardPass {
    std::vector<Matrix> layer_inputs; // a_l, one n x d_i block per linear layer
    Matrix logits;                    // n x k
};

// Per-example quantities feeding the Kronecker factor estimates:
// one (a_l, g_l) pair per linear layer, g_l the gradient of the per-example
// loss w.r.t. the pre-activation s_l = W_l a_l + b_l.
struct BackpropTape {
    std::vector<Matrix> inputs;       // a_l, n x d_i
    std::vector<Matrix> preact_grads; // g_l, n x d_o
    std::vector<double> losses;       // per-example
};

struct BackwardResult {
    ParamSet grads; // averaged over the batch
    BackpropTape tape;
    double mean_loss = 0.0;
};

// Multilayer perceptron with tanh between layers and linear output.
// dims = [d_in, hidden..., d_out]; layer l maps dims[l] -> dims[l+1].
class Mlp {
public:
    explicit Mlp(std::vector<int> dims);

    const std::vector<int>& dims() const { return dims_; }
    int num_layers() const { return static_cast<int>(dims_.size()) - 1; }
    int input_dim() const { return dims_.front(); }
    int output_dim() const { return dims_.back(); }

    // Uniform in +-1/sqrt(d_i) per layer, biases zero.
    ParamSet init_params(std::uint64_t seed) const;

    void check_params(const ParamSet& p) const;

    ForwardPass forward(const ParamSet& p, const Matrix& inputs) const;

    BackwardResult backward(const ParamSet& p, const ForwardPass& fwd,
                            const std::vector<int>& labels) const;
    BackwardResult backward(const ParamSet& p, const ForwardPass& fwd,
                            const Matrix& targets) const;

private:
    BackwardResult backprop(const ParamSet& p, const ForwardPass& fwd, Matrix dlogits,
                            LossResult loss) const;

    std::vector<int> dims_;
};

// Versioned binary checkpoint; round-trip is bit-exact.
void save_params(const ParamSet& p, const std::string& path);
ParamSet load_params(const std::string& path);

} // namespace ihr
