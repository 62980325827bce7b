#pragma once

#include <optional>

#include "ihr/curvature.hpp"
#include "ihr/model.hpp"

namespace ihr {

enum class Strategy { IHR, FTA, FineTune, ER };

enum class AlphaPPolicy { ReciprocalT, Constant };

enum class CurvatureSource { LastTask, FactorSum };

struct MergeConfig {
    Strategy strategy = Strategy::IHR;
    double tau = 1.0; // stability-plasticity knob; tau = 0 freezes linear layers
    AlphaPPolicy alpha_p_policy = AlphaPPolicy::ReciprocalT;
    double alpha_p_value = 0.5; // used when policy == Constant, must be in [0, 1]
    CurvatureSource curvature_source = CurvatureSource::LastTask;
    std::optional<double> lambda_override;
    bool identity_curvature = false; // ablation flag: A = G = I, lambda = 0
    int task_index = 2;              // t at merge time, >= 2

    void validate() const;
};

// Interpolation weight for parameters outside the linear weight matrices.
double alpha_p(AlphaPPolicy policy, double value, int t);

// alpha = tau * ||delta|| / ||adjusted||, so ||alpha * adjusted|| = tau * ||delta||.
// Returns 0 when ||delta|| = 0 (the merged layer stays put). Throws
// ZeroAdjustedUpdate when ||adjusted|| = 0 while ||delta|| > 0.
double compute_alpha(const Matrix& delta, const Matrix& adjusted, double tau);

// W_t = W_{t-1} + alpha_l * H_l * (W~_t - W_{t-1}) per linear layer, applied
// to a copy of prev's linear weights only; remaining parameters untouched.
// Shared by merge_ihr and the tau sweep.
std::vector<Matrix> regularize_linear_updates(const ParamSet& prev, const ParamSet& tuned,
                                              const KronFactors& factors, double tau);

// The merging step: inverse-Hessian-regularized linear updates plus
// alpha_p-weighted remaining updates. Inputs are not mutated.
ParamSet merge_ihr(const ParamSet& prev, const ParamSet& tuned, const KronFactors& factors,
                   const MergeConfig& cfg);

// theta_t = theta_{t-1} + (1/t) (theta~_t - theta_{t-1}) on every parameter.
ParamSet merge_fta(const ParamSet& prev, const ParamSet& tuned, int t);

// theta_t = theta_{t-1} + eta (theta~_t - theta_{t-1}) on every parameter.
ParamSet interpolate(const ParamSet& prev, const ParamSet& tuned, double eta);

} // namespace ihr
