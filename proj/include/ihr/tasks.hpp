#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ihr/model.hpp"
#include "ihr/tasks_fwd.hpp"

namespace ihr {

// Shift applied to a task's inputs relative to the shared cluster layout:
// rotation in the first two input dimensions plus additive Gaussian noise.
struct ShiftDescriptor {
    double angle_rad = 0.0;
    double noise_scale = 0.0;
};

struct TaskDataset {
    int task_id = 0; // 1-based
    std::vector<Example> train, val, test;
    std::uint64_t seed = 0;
    ShiftDescriptor shift;
};

struct StreamConfig {
    std::uint64_t root_seed = 1;
    int tasks = 5;
    int dim = 16;
    int classes = 4;
    int n_train = 2000;
    int n_val = 500;
    int n_test = 500;
    std::vector<double> angles_deg = {0.0, 25.0, 50.0, 75.0, 100.0};
    double noise = 0.1;
    // cluster geometry (means drawn once from the root seed, shared by all tasks)
    double mean_scale = 1.0;
    double within_scale = 0.5;
};

struct TaskStream {
    StreamConfig config;
    std::vector<std::vector<double>> class_means; // classes x dim
    std::vector<TaskDataset> tasks;
};

TaskStream make_stream(const StreamConfig& cfg);

struct Evaluation {
    double error = 0.0;                   // argmax misclassification rate
    std::vector<double> example_losses;   // per-example cross-entropy
};

Evaluation evaluate(const Mlp& model, const ParamSet& params, const std::vector<Example>& split);

// One example per line: features then the label, space-delimited.
void export_dataset(const std::vector<Example>& split, const std::string& path);
std::vector<Example> import_dataset(const std::string& path);

} // namespace ihr
