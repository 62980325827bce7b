#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ihr/model.hpp"
#include "ihr/tasks_fwd.hpp"

namespace ihr {

// Kronecker factors for one linear layer: A is the second moment of the
// layer inputs (d_i x d_i), G the second moment of the per-example
// pre-activation gradients (d_o x d_o). lambda is the damping resolved at
// estimation time (the scale-aware trace default, or the config override).
struct LayerFactors {
    SymMatrix a;
    SymMatrix g;
    double lambda = 0.0;
};

struct KronFactors {
    std::vector<LayerFactors> layers; // one per linear layer, in layer order
    std::int64_t sample_count = 0;
    std::uint64_t params_hash = 0; // ParamSet the factors were estimated at
};

struct EstimateOptions {
    int batch = 64;
    long max_examples = -1;                // -1: full pass over the split
    std::optional<double> lambda_override; // nonnegative; unset: per-layer trace default
};

// A_l = (1/n) sum a_l a_l^T and G_l = (1/n) sum g_l g_l^T over backward
// passes with true labels.
KronFactors estimate_factors(const Mlp& model, const ParamSet& params,
                             const std::vector<Example>& train, const EstimateOptions& opts = {});

// A = G = I with lambda = 0: curvature that leaves updates unchanged.
KronFactors identity_factors(const Mlp& model, const ParamSet& params);

// (G_l + lambda I)^-1 * delta * (A_l + lambda I)^-1. This matrix form is the
// normative definition of the inverse curvature applied to the update. Under
// row-major vectorization it equals the dense solve against
// kron(G + lambda I, A + lambda I); the oracle tests pin that equivalence.
Matrix ihvp(const KronFactors& factors, int layer, const Matrix& delta);

// Layerwise mean of the factor sets (the multi-task curvature ablation);
// sample counts add, per-layer lambdas average.
KronFactors merge_factor_sets(const std::vector<KronFactors>& history);

// Versioned binary persistence with a checksum trailer; round-trip exact.
void save_factors(const KronFactors& factors, const std::string& path);
KronFactors load_factors(const std::string& path);

} // namespace ihr
