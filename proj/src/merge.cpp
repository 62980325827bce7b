#include "ihr/merge.hpp"

#include <string>

namespace ihr {

void MergeConfig::validate() const {
    if (tau < 0.0) throw InvalidConfig("merge.tau must be nonnegative");
    if (alpha_p_policy == AlphaPPolicy::Constant && (alpha_p_value < 0.0 || alpha_p_value > 1.0))
        throw InvalidConfig("constant alpha_p must be in [0, 1]");
    if (lambda_override && *lambda_override < 0.0)
        throw InvalidConfig("merge.lambda must be nonnegative");
    if (task_index < 2) throw InvalidConfig("merge applies from task 2 onward");
}

double alpha_p(AlphaPPolicy policy, double value, int t) {
    if (t < 2) throw InvalidConfig("alpha_p requires t >= 2");
    return policy == AlphaPPolicy::ReciprocalT ? 1.0 / static_cast<double>(t) : value;
}

double compute_alpha(const Matrix& delta, const Matrix& adjusted, double tau) {
    const double nd = frobenius_norm(delta);
    if (nd == 0.0) return 0.0;
    const double na = frobenius_norm(adjusted);
    if (na == 0.0)
        throw ZeroAdjustedUpdate("adjusted update vanished while the raw update did not; "
                                 "degenerate curvature");
    return tau * nd / na;
}

namespace {

void check_same_structure(const ParamSet& prev, const ParamSet& tuned) {
    if (prev.linear_weights.size() != tuned.linear_weights.size() ||
        prev.remaining.size() != tuned.remaining.size())
        throw ShapeMismatch("merge: parameter sets differ in structure");
    for (std::size_t l = 0; l < prev.linear_weights.size(); ++l)
        if (!prev.linear_weights[l].same_shape(tuned.linear_weights[l]))
            throw ShapeMismatch("merge: weight shape mismatch at layer " + std::to_string(l));
    for (std::size_t i = 0; i < prev.remaining.size(); ++i)
        if (prev.remaining[i].values.size() != tuned.remaining[i].values.size())
            throw ShapeMismatch("merge: remaining parameter shape mismatch at " +
                                prev.remaining[i].name);
}

} // namespace

std::vector<Matrix> regularize_linear_updates(const ParamSet& prev, const ParamSet& tuned,
                                              const KronFactors& factors, double tau) {
    check_same_structure(prev, tuned);
    if (factors.layers.size() != prev.linear_weights.size())
        throw ShapeMismatch("merge: factor set covers " + std::to_string(factors.layers.size()) +
                            " layers, model has " + std::to_string(prev.linear_weights.size()));
    std::vector<Matrix> merged;
    merged.reserve(prev.linear_weights.size());
    for (std::size_t l = 0; l < prev.linear_weights.size(); ++l) {
        const Matrix& w_prev = prev.linear_weights[l];
        const Matrix& w_tuned = tuned.linear_weights[l];
        Matrix delta(w_prev.rows, w_prev.cols);
        for (std::size_t i = 0; i < delta.data.size(); ++i)
            delta.data[i] = w_tuned.data[i] - w_prev.data[i];
        Matrix out = w_prev;
        if (frobenius_norm(delta) > 0.0) {
            Matrix adjusted = ihvp(factors, static_cast<int>(l), delta);
            const double alpha = compute_alpha(delta, adjusted, tau);
            for (std::size_t i = 0; i < out.data.size(); ++i)
                out.data[i] += alpha * adjusted.data[i];
        }
        merged.push_back(std::move(out));
    }
    return merged;
}

ParamSet merge_ihr(const ParamSet& prev, const ParamSet& tuned, const KronFactors& factors,
                   const MergeConfig& cfg) {
    cfg.validate();
    if (factors.params_hash != params_hash(prev))
        throw FactorMismatch("factors were not estimated at the pre-adaptation parameters");
    ParamSet out;
    out.linear_weights = regularize_linear_updates(prev, tuned, factors, cfg.tau);
    const double ap = alpha_p(cfg.alpha_p_policy, cfg.alpha_p_value, cfg.task_index);
    out.remaining = prev.remaining;
    for (std::size_t i = 0; i < out.remaining.size(); ++i)
        for (std::size_t j = 0; j < out.remaining[i].values.size(); ++j)
            out.remaining[i].values[j] +=
                ap * (tuned.remaining[i].values[j] - prev.remaining[i].values[j]);
    return out;
}

ParamSet merge_fta(const ParamSet& prev, const ParamSet& tuned, int t) {
    if (t < 2) throw InvalidConfig("merge_fta requires t >= 2");
    return interpolate(prev, tuned, 1.0 / static_cast<double>(t));
}

ParamSet interpolate(const ParamSet& prev, const ParamSet& tuned, double eta) {
    check_same_structure(prev, tuned);
    ParamSet out = prev;
    for (std::size_t l = 0; l < out.linear_weights.size(); ++l)
        for (std::size_t i = 0; i < out.linear_weights[l].data.size(); ++i)
            out.linear_weights[l].data[i] +=
                eta * (tuned.linear_weights[l].data[i] - prev.linear_weights[l].data[i]);
    for (std::size_t r = 0; r < out.remaining.size(); ++r)
        for (std::size_t j = 0; j < out.remaining[r].values.size(); ++j)
            out.remaining[r].values[j] +=
                eta * (tuned.remaining[r].values[j] - prev.remaining[r].values[j]);
    return out;
}

} // namespace ihr
