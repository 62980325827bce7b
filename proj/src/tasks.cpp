#include "ihr/tasks.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ihr/rng.hpp"

namespace ihr {

namespace {

// Example c of a task is a pure function of (task seed, counter c); train,
// val and test draw from disjoint counter ranges of the same stream.
Example make_example(const std::vector<std::vector<double>>& means, const StreamConfig& cfg,
                     const ShiftDescriptor& shift, std::uint64_t task_seed, std::uint64_t counter) {
    rng::GaussianStream gs(rng::mix(task_seed, counter));
    Example e;
    e.label = static_cast<int>(counter % static_cast<std::uint64_t>(cfg.classes));
    const auto& mu = means[static_cast<std::size_t>(e.label)];
    e.x.resize(static_cast<std::size_t>(cfg.dim));
    for (int d = 0; d < cfg.dim; ++d)
        e.x[static_cast<std::size_t>(d)] = mu[static_cast<std::size_t>(d)] + cfg.within_scale * gs.next();
    if (cfg.dim >= 2 && shift.angle_rad != 0.0) {
        const double c = std::cos(shift.angle_rad);
        const double s = std::sin(shift.angle_rad);
        const double x0 = e.x[0];
        const double x1 = e.x[1];
        e.x[0] = c * x0 - s * x1;
        e.x[1] = s * x0 + c * x1;
    }
    if (shift.noise_scale != 0.0)
        for (int d = 0; d < cfg.dim; ++d) e.x[static_cast<std::size_t>(d)] += shift.noise_scale * gs.next();
    return e;
}

} // namespace

TaskStream make_stream(const StreamConfig& cfg) {
    if (cfg.tasks < 2) throw InvalidConfig("stream.tasks must be >= 2");
    if (cfg.classes < 2) throw InvalidConfig("stream.classes must be >= 2");
    if (cfg.dim < 2) throw InvalidConfig("stream.dim must be >= 2");
    if (cfg.n_train < 1 || cfg.n_val < 1 || cfg.n_test < 1)
        throw InvalidConfig("stream split sizes must be >= 1");
    if (static_cast<int>(cfg.angles_deg.size()) < cfg.tasks)
        throw InvalidConfig("stream.angles_deg must provide one angle per task");

    TaskStream stream;
    stream.config = cfg;

    rng::GaussianStream mean_stream(rng::mix(cfg.root_seed, 0x4D45414EULL)); // "MEAN"
    stream.class_means.resize(static_cast<std::size_t>(cfg.classes));
    for (auto& mu : stream.class_means) {
        mu.resize(static_cast<std::size_t>(cfg.dim));
        for (auto& v : mu) v = cfg.mean_scale * mean_stream.next();
    }

    for (int t = 1; t <= cfg.tasks; ++t) {
        TaskDataset ds;
        ds.task_id = t;
        ds.seed = rng::mix(cfg.root_seed, static_cast<std::uint64_t>(t));
        ds.shift.angle_rad = cfg.angles_deg[static_cast<std::size_t>(t - 1)] * M_PI / 180.0;
        ds.shift.noise_scale = cfg.noise;
        std::uint64_t counter = 0;
        auto fill = [&](std::vector<Example>& split, int n) {
            split.reserve(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                split.push_back(make_example(stream.class_means, cfg, ds.shift, ds.seed, counter++));
        };
        fill(ds.train, cfg.n_train);
        fill(ds.val, cfg.n_val);
        fill(ds.test, cfg.n_test);
        stream.tasks.push_back(std::move(ds));
    }
    return stream;
}

Evaluation evaluate(const Mlp& model, const ParamSet& params, const std::vector<Example>& split) {
    if (split.empty()) throw InvalidConfig("evaluate: empty split");
    const int n = static_cast<int>(split.size());
    Matrix x(n, model.input_dim());
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(split[static_cast<std::size_t>(i)].x.size()) != model.input_dim())
            throw ShapeMismatch("evaluate: example dim mismatch");
        std::copy(split[static_cast<std::size_t>(i)].x.begin(), split[static_cast<std::size_t>(i)].x.end(),
                  x.data.begin() + static_cast<long>(i) * model.input_dim());
        labels[static_cast<std::size_t>(i)] = split[static_cast<std::size_t>(i)].label;
    }
    ForwardPass fwd = model.forward(params, x);
    Evaluation ev;
    int wrong = 0;
    for (int i = 0; i < n; ++i) {
        int best = 0;
        for (int c = 1; c < fwd.logits.cols; ++c)
            if (fwd.logits(i, c) > fwd.logits(i, best)) best = c;
        if (best != labels[static_cast<std::size_t>(i)]) ++wrong;
    }
    ev.error = static_cast<double>(wrong) / n;
    ev.example_losses = cross_entropy_loss(fwd.logits, labels).per_example;
    return ev;
}

void export_dataset(const std::vector<Example>& split, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot open " + path + " for writing");
    char buf[32];
    for (const auto& e : split) {
        for (double v : e.x) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << buf << ' ';
        }
        out << e.label << '\n';
    }
    if (!out) throw IoFailure("write failed for " + path);
}

std::vector<Example> import_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open " + path);
    std::vector<Example> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::vector<double> fields;
        std::string tok;
        while (ss >> tok) fields.push_back(std::strtod(tok.c_str(), nullptr));
        if (fields.size() < 2) throw CorruptFile("malformed line in " + path);
        Example e;
        e.label = static_cast<int>(fields.back());
        fields.pop_back();
        e.x = std::move(fields);
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace ihr
