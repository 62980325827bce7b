#include "ihr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ihr/rng.hpp"

namespace ihr {

void TrainerConfig::validate() const {
    if (lr <= 0.0) throw InvalidConfig("trainer.lr must be positive");
    if (lr_divisor < 1.0) throw InvalidConfig("trainer.lr_divisor must be >= 1");
    if (batch < 1) throw InvalidConfig("trainer.batch must be >= 1");
    if (epochs_first < 1 || epochs_later < 1) throw InvalidConfig("trainer epochs must be >= 1");
    for (int h : hidden)
        if (h < 1) throw InvalidConfig("trainer.hidden dims must be >= 1");
}

namespace {

class Timer {
public:
    explicit Timer(RunReport& report, std::string phase)
        : report_(report), phase_(std::move(phase)), start_(std::chrono::steady_clock::now()) {}
    ~Timer() {
        const auto end = std::chrono::steady_clock::now();
        report_.phase_seconds[phase_] +=
            std::chrono::duration_cast<std::chrono::duration<double>>(end - start_).count();
    }

private:
    RunReport& report_;
    std::string phase_;
    std::chrono::steady_clock::time_point start_;
};

struct Adam {
    double lr, beta1, beta2, eps;
    long step_count = 0;
    std::vector<std::vector<double>> m_w, v_w; // per linear layer
    std::vector<std::vector<double>> m_r, v_r; // per remaining vector

    Adam(const TrainerConfig& cfg, double step_size, const ParamSet& params)
        : lr(step_size), beta1(cfg.beta1), beta2(cfg.beta2), eps(cfg.eps) {
        for (const auto& w : params.linear_weights) {
            m_w.emplace_back(w.data.size(), 0.0);
            v_w.emplace_back(w.data.size(), 0.0);
        }
        for (const auto& r : params.remaining) {
            m_r.emplace_back(r.values.size(), 0.0);
            v_r.emplace_back(r.values.size(), 0.0);
        }
    }

    void update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                std::vector<double>& v, double bc1, double bc2) const {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }

    void step(ParamSet& params, const ParamSet& grads) {
        ++step_count;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
        for (std::size_t l = 0; l < params.linear_weights.size(); ++l)
            update(params.linear_weights[l].data, grads.linear_weights[l].data, m_w[l], v_w[l], bc1, bc2);
        for (std::size_t r = 0; r < params.remaining.size(); ++r)
            update(params.remaining[r].values, grads.remaining[r].values, m_r[r], v_r[r], bc1, bc2);
    }
};

Matrix batch_inputs(const std::vector<const Example*>& batch, int dim) {
    Matrix x(static_cast<int>(batch.size()), dim);
    for (std::size_t i = 0; i < batch.size(); ++i)
        std::copy(batch[i]->x.begin(), batch[i]->x.end(), x.data.begin() + static_cast<long>(i) * dim);
    return x;
}

std::vector<int> batch_labels(const std::vector<const Example*>& batch) {
    std::vector<int> labels(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) labels[i] = batch[i]->label;
    return labels;
}

// Bounded uniform sample over everything ever offered.
class Reservoir {
public:
    Reservoir(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {}

    void offer(const Example& e) {
        ++seen_;
        if (store_.size() < capacity_) {
            store_.push_back(e);
        } else {
            const std::uint64_t j = rng_.below(seen_);
            if (j < capacity_) store_[static_cast<std::size_t>(j)] = e;
        }
    }

    bool empty() const { return store_.empty(); }
    std::size_t size() const { return store_.size(); }
    const Example& sample(rng::SplitMix64& s) const {
        return store_[static_cast<std::size_t>(s.below(store_.size()))];
    }
    const std::vector<Example>& contents() const { return store_; }

private:
    std::size_t capacity_;
    std::uint64_t seen_ = 0;
    rng::SplitMix64 rng_;
    std::vector<Example> store_;
};

// One fine-tuning phase. Shuffles per epoch from a task-and-epoch-derived
// seed; when a replay memory is given, each batch is half current task and
// half memory samples.
void train_task(const Mlp& model, ParamSet& params, const std::vector<Example>& train,
                const TrainerConfig& cfg, double step_size, int epochs, int task_id,
                const Reservoir* memory) {
    Adam adam(cfg, step_size, params);
    std::vector<int> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    const bool mixing = memory != nullptr && !memory->empty();
    const int current_per_batch = mixing ? std::max(1, cfg.batch / 2) : cfg.batch;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng::SplitMix64 shuffle_rng(rng::mix(cfg.seed, static_cast<std::uint64_t>(task_id) * 1000 +
                                                           static_cast<std::uint64_t>(epoch)));
        rng::shuffle(order, shuffle_rng);
        double loss_sum = 0.0;
        long batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(current_per_batch)) {
            std::vector<const Example*> batch;
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(current_per_batch));
            for (std::size_t i = start; i < end; ++i)
                batch.push_back(&train[static_cast<std::size_t>(order[i])]);
            if (mixing) {
                const std::size_t n_mem = end - start; // 1:1 with the current slice
                for (std::size_t i = 0; i < n_mem; ++i) batch.push_back(&memory->sample(shuffle_rng));
            }
            Matrix x = batch_inputs(batch, model.input_dim());
            ForwardPass fwd = model.forward(params, x);
            BackwardResult bwd = model.backward(params, fwd, batch_labels(batch));
            adam.step(params, bwd.grads);
            loss_sum += bwd.mean_loss;
            ++batches;
        }
        if (!std::isfinite(loss_sum / static_cast<double>(batches)))
            throw DivergedRun("non-finite mean loss at task " + std::to_string(task_id) + ", epoch " +
                              std::to_string(epoch));
    }
}

void finalize_metrics(RunReport& report) {
    report.avg_error = average_error_from(report.R);
    report.bwt = bwt_from(report.R);
    report.final_errors = report.R.back();
}

// The shared loop; `memory_size >= 0` selects the ER trainer.
RunReport run_loop(const TaskStream& stream, const MergeConfig& strategy, const TrainerConfig& trainer,
                   const RunOptions& opts, int memory_size) {
    trainer.validate();
    if (stream.tasks.size() < 2) throw InvalidConfig("run_continual: stream must have >= 2 tasks");
    if (strategy.strategy == Strategy::ER && memory_size < 1)
        throw InvalidConfig("run_er: memory_size must be >= 1");

    std::vector<int> dims;
    dims.push_back(stream.config.dim);
    for (int h : trainer.hidden) dims.push_back(h);
    dims.push_back(stream.config.classes);
    Mlp model(dims);

    RunReport report;
    report.strategy_name = strategy_name(strategy.strategy);
    report.root_seed = stream.config.root_seed;

    ParamSet params = model.init_params(rng::mix(trainer.seed, 0x494E4954ULL)); // "INIT"
    report.linear_fraction = static_cast<double>(params.linear_param_count()) /
                             static_cast<double>(params.linear_param_count() + params.remaining_param_count());

    const bool is_ihr = strategy.strategy == Strategy::IHR;
    EstimateOptions est;
    est.batch = opts.estimate_batch;
    est.max_examples = opts.estimate_budget;
    est.lambda_override = strategy.lambda_override;

    KronFactors factors;                        // most recent task's factors
    std::vector<KronFactors> factor_history;    // kept only for the factor-sum variant
    Reservoir memory(static_cast<std::size_t>(std::max(memory_size, 0)),
                     rng::mix(trainer.seed, 0x4D454D4FULL)); // "MEMO"

    const int T = static_cast<int>(stream.tasks.size());
    for (int t = 1; t <= T; ++t) {
        const TaskDataset& task = stream.tasks[static_cast<std::size_t>(t - 1)];
        const ParamSet prev = params;
        {
            Timer timer(report, "train");
            if (t == 1) {
                train_task(model, params, task.train, trainer, trainer.lr, trainer.epochs_first, t, nullptr);
            } else {
                const Reservoir* mem = strategy.strategy == Strategy::ER ? &memory : nullptr;
                train_task(model, params, task.train, trainer, trainer.lr / trainer.lr_divisor,
                           trainer.epochs_later, t, mem);
            }
        }
        if (t >= 2) {
            Timer timer(report, "merge");
            switch (strategy.strategy) {
                case Strategy::FineTune:
                case Strategy::ER:
                    break; // keep tuned parameters
                case Strategy::FTA:
                    params = merge_fta(prev, params, t);
                    break;
                case Strategy::IHR: {
                    MergeConfig cfg = strategy;
                    cfg.task_index = t;
                    const KronFactors& applied =
                        strategy.curvature_source == CurvatureSource::FactorSum
                            ? (factor_history.size() > 1 ? factors : factor_history.front())
                            : factors;
                    params = merge_ihr(prev, params, applied, cfg);
                    break;
                }
            }
        }
        if (is_ihr && t < T) {
            // Algorithm requires factors at the merged parameters, on this task's data.
            Timer timer(report, "estimate");
            if (strategy.identity_curvature) {
                factors = identity_factors(model, params);
            } else {
                factors = estimate_factors(model, params, task.train, est);
            }
            if (strategy.curvature_source == CurvatureSource::FactorSum) {
                factor_history.push_back(factors);
                factors = merge_factor_sets(factor_history);
            }
            if (!opts.factor_path.empty()) save_factors(factors, opts.factor_path);
        }
        if (strategy.strategy == Strategy::ER && t < T) {
            for (const Example& e : task.train) memory.offer(e);
        }
        {
            Timer timer(report, "evaluate");
            std::vector<double> row;
            for (int j = 1; j <= t; ++j)
                row.push_back(evaluate(model, params, stream.tasks[static_cast<std::size_t>(j - 1)].test).error);
            report.R.push_back(std::move(row));
        }
    }

    {
        Timer timer(report, "evaluate");
        for (int j = 1; j <= T; ++j)
            report.final_losses.push_back(
                evaluate(model, params, stream.tasks[static_cast<std::size_t>(j - 1)].test).example_losses);
    }
    finalize_metrics(report);
    return report;
}

} // namespace

RunReport run_continual(const TaskStream& stream, const MergeConfig& strategy,
                        const TrainerConfig& trainer, const RunOptions& opts) {
    if (strategy.strategy == Strategy::ER)
        throw InvalidConfig("use run_er for the experience-replay strategy");
    return run_loop(stream, strategy, trainer, opts, -1);
}

RunReport run_er(const TaskStream& stream, int memory_size, const TrainerConfig& trainer,
                 const RunOptions& opts) {
    MergeConfig cfg;
    cfg.strategy = Strategy::ER;
    return run_loop(stream, cfg, trainer, opts, memory_size);
}

SweepTable tau_sweep(const TaskStream& stream, const std::vector<double>& taus,
                     const TrainerConfig& trainer, const RunOptions& opts) {
    trainer.validate();
    if (stream.tasks.size() < 2) throw InvalidConfig("tau_sweep: stream must have >= 2 tasks");
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (taus[i] < 0.0) throw InvalidConfig("tau_sweep: tau values must be nonnegative");
        if (i > 0 && taus[i] < taus[i - 1]) throw InvalidConfig("tau_sweep: tau values must be sorted");
    }

    std::vector<int> dims;
    dims.push_back(stream.config.dim);
    for (int h : trainer.hidden) dims.push_back(h);
    dims.push_back(stream.config.classes);
    Mlp model(dims);

    const TaskDataset& task1 = stream.tasks[0];
    const TaskDataset& task2 = stream.tasks[1];

    ParamSet theta1 = model.init_params(rng::mix(trainer.seed, 0x494E4954ULL));
    train_task(model, theta1, task1.train, trainer, trainer.lr, trainer.epochs_first, 1, nullptr);

    EstimateOptions est;
    est.batch = opts.estimate_batch;
    est.max_examples = opts.estimate_budget;
    KronFactors factors = estimate_factors(model, theta1, task1.train, est);

    // single fine-tuning run shared by every tau and both arms
    ParamSet tuned = theta1;
    train_task(model, tuned, task2.train, trainer, trainer.lr / trainer.lr_divisor,
               trainer.epochs_later, 2, nullptr);

    SweepTable table;
    table.tuned_hash = params_hash(tuned);
    for (double tau : taus) {
        // IHR arm: regularized linear updates, tau-scaled remaining updates
        ParamSet ihr_params;
        ihr_params.linear_weights = regularize_linear_updates(theta1, tuned, factors, tau);
        ihr_params.remaining = theta1.remaining;
        for (std::size_t r = 0; r < ihr_params.remaining.size(); ++r)
            for (std::size_t j = 0; j < ihr_params.remaining[r].values.size(); ++j)
                ihr_params.remaining[r].values[j] +=
                    tau * (tuned.remaining[r].values[j] - theta1.remaining[r].values[j]);
        // no-IHR arm: move directly along the update with step size tau
        ParamSet plain = interpolate(theta1, tuned, tau);

        for (const auto& [arm, p] : {std::pair<const char*, const ParamSet&>{"ihr", ihr_params},
                                     std::pair<const char*, const ParamSet&>{"no_ihr", plain}}) {
            SweepRow row;
            row.tau = tau;
            row.arm = arm;
            row.error_task1 = evaluate(model, p, task1.test).error;
            row.error_task2 = evaluate(model, p, task2.test).error;
            row.average = (row.error_task1 + row.error_task2) / 2.0;
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

std::vector<AblationRow> ablation_ladder(const TaskStream& stream, const TrainerConfig& trainer,
                                         double tau, const RunOptions& opts) {
    if (stream.tasks.size() < 3)
        throw InvalidConfig("ablation_ladder: stream must have >= 3 tasks so the factor sum "
                            "differs from the last task");
    std::vector<AblationRow> rows;

    MergeConfig finetune;
    finetune.strategy = Strategy::FineTune;
    rows.push_back({"finetune", run_continual(stream, finetune, trainer, opts)});

    MergeConfig sum_half;
    sum_half.strategy = Strategy::IHR;
    sum_half.tau = tau;
    sum_half.curvature_source = CurvatureSource::FactorSum;
    sum_half.alpha_p_policy = AlphaPPolicy::Constant;
    sum_half.alpha_p_value = 0.5;
    rows.push_back({"ihr_factor_sum_alpha_0.50", run_continual(stream, sum_half, trainer, opts)});

    MergeConfig last_half = sum_half;
    last_half.curvature_source = CurvatureSource::LastTask;
    rows.push_back({"ihr_last_task_alpha_0.50", run_continual(stream, last_half, trainer, opts)});

    MergeConfig last_recip = last_half;
    last_recip.alpha_p_policy = AlphaPPolicy::ReciprocalT;
    rows.push_back({"ihr_last_task_alpha_1_over_t", run_continual(stream, last_recip, trainer, opts)});

    return rows;
}

double average_error_from(const std::vector<std::vector<double>>& R) {
    const auto& last = R.back();
    double s = 0.0;
    for (double v : last) s += v;
    return s / static_cast<double>(last.size());
}

double bwt_from(const std::vector<std::vector<double>>& R) {
    const std::size_t T = R.size();
    if (T < 2) return 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < T; ++k) s += R[k][k] - R[T - 1][k];
    return s / static_cast<double>(T - 1);
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::IHR: return "ihr";
        case Strategy::FTA: return "fta";
        case Strategy::FineTune: return "finetune";
        case Strategy::ER: return "er";
    }
    return "unknown";
}

} // namespace ihr
