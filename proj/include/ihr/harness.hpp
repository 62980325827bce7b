#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ihr/merge.hpp"
#include "ihr/tasks.hpp"

namespace ihr {

struct TrainerConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int epochs_first = 40;
    int epochs_later = 10;
    double lr_divisor = 10.0; // later-task step size = lr / lr_divisor
    int batch = 32;
    std::uint64_t seed = 1;
    std::vector<int> hidden = {32, 32};

    void validate() const;
};

struct RunReport {
    std::string strategy_name;
    std::uint64_t root_seed = 0;
    // R[i-1][j-1] = error on task j after training through task i (j <= i)
    std::vector<std::vector<double>> R;
    double avg_error = 0.0; // mean over k of R[T][k]
    double bwt = 0.0;       // mean over k < T of R[k][k] - R[T][k]
    std::vector<double> final_errors;
    std::vector<std::vector<double>> final_losses; // per task, per test example
    double linear_fraction = 0.0; // share of parameters in linear weight matrices
    std::map<std::string, double> phase_seconds;   // not serialized; outputs stay byte-stable
};

struct RunOptions {
    std::string factor_path;    // when set, IHR persists the current factors here
    long estimate_budget = -1;  // max examples per factor estimation pass, -1 = all
    int estimate_batch = 64;
};

// Full continual loop: train task 1 from scratch, then fine-tune + merge per
// strategy; IHR re-estimates factors at the merged parameters after each task.
RunReport run_continual(const TaskStream& stream, const MergeConfig& strategy,
                        const TrainerConfig& trainer, const RunOptions& opts = {});

// Experience replay: reservoir of past training examples, mixed 1:1 into
// fine-tuning batches; the merge step is the identity.
RunReport run_er(const TaskStream& stream, int memory_size, const TrainerConfig& trainer,
                 const RunOptions& opts = {});

struct SweepRow {
    double tau = 0.0;
    std::string arm; // "ihr" or "no_ihr"
    double error_task1 = 0.0;
    double error_task2 = 0.0;
    double average = 0.0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    std::uint64_t tuned_hash = 0; // checkpoint both arms re-merge from
};

// One shared fine-tuning run over the 2-task prefix; each tau only re-merges.
// The no-IHR arm moves directly along the update with step size tau (all
// parameters); the IHR arm applies the regularized update to linear layers
// and the tau-scaled update to the rest. tau = 0 reproduces theta^1 exactly.
SweepTable tau_sweep(const TaskStream& stream, const std::vector<double>& taus,
                     const TrainerConfig& trainer, const RunOptions& opts = {});

struct AblationRow {
    std::string label;
    RunReport report;
};

// The four-row ladder: fine-tuning, + IHR with summed factors and
// alpha_p = 0.5, + last-task factors only, + alpha_p = 1/t. All rows share
// the stream and trainer seed.
std::vector<AblationRow> ablation_ladder(const TaskStream& stream, const TrainerConfig& trainer,
                                         double tau = 1.0, const RunOptions& opts = {});

// Metric identities, recomputed from R.
double average_error_from(const std::vector<std::vector<double>>& R);
double bwt_from(const std::vector<std::vector<double>>& R);

std::string strategy_name(Strategy s);

} // namespace ihr
