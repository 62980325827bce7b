#include "ihr/curvature.hpp"

#include <algorithm>
#include <string>

#include "ihr/io_util.hpp"
#include "ihr/kernels.hpp"

namespace ihr {

namespace {

double default_lambda(const SymMatrix& a, const SymMatrix& g) {
    return 1e-3 * (a.trace() / a.dim + g.trace() / g.dim) / 2.0;
}

} // namespace

KronFactors estimate_factors(const Mlp& model, const ParamSet& params,
                             const std::vector<Example>& train, const EstimateOptions& opts) {
    if (train.empty()) throw EmptyDataset("estimate_factors: empty training split");
    if (opts.lambda_override && *opts.lambda_override < 0.0)
        throw InvalidConfig("lambda override must be nonnegative");

    long n_total = static_cast<long>(train.size());
    if (opts.max_examples > 0) n_total = std::min(n_total, opts.max_examples);

    const int layers = model.num_layers();
    KronFactors out;
    out.layers.resize(static_cast<std::size_t>(layers));
    for (int l = 0; l < layers; ++l) {
        out.layers[static_cast<std::size_t>(l)].a = SymMatrix(model.dims()[static_cast<std::size_t>(l)]);
        out.layers[static_cast<std::size_t>(l)].g = SymMatrix(model.dims()[static_cast<std::size_t>(l) + 1]);
    }

    // Fixed batch order; per-batch Gram matrices accumulate in index order so
    // the result is independent of thread count.
    for (long start = 0; start < n_total; start += opts.batch) {
        const long count = std::min<long>(opts.batch, n_total - start);
        Matrix x(static_cast<int>(count), model.input_dim());
        std::vector<int> labels(static_cast<std::size_t>(count));
        for (long i = 0; i < count; ++i) {
            const Example& e = train[static_cast<std::size_t>(start + i)];
            if (static_cast<int>(e.x.size()) != model.input_dim())
                throw ShapeMismatch("estimate_factors: example dim mismatch");
            std::copy(e.x.begin(), e.x.end(), x.data.begin() + i * model.input_dim());
            labels[static_cast<std::size_t>(i)] = e.label;
        }
        ForwardPass fwd = model.forward(params, x);
        BackwardResult bwd = model.backward(params, fwd, labels);
        for (int l = 0; l < layers; ++l) {
            auto& lf = out.layers[static_cast<std::size_t>(l)];
            const Matrix& a = bwd.tape.inputs[static_cast<std::size_t>(l)];
            const Matrix& g = bwd.tape.preact_grads[static_cast<std::size_t>(l)];
            SymMatrix ga(lf.a.dim), gg(lf.g.dim);
            kernels::gram(a.data.data(), ga.data.data(), static_cast<int>(count), lf.a.dim);
            kernels::gram(g.data.data(), gg.data.data(), static_cast<int>(count), lf.g.dim);
            for (std::size_t i = 0; i < lf.a.data.size(); ++i) lf.a.data[i] += ga.data[i];
            for (std::size_t i = 0; i < lf.g.data.size(); ++i) lf.g.data[i] += gg.data[i];
        }
    }

    const double inv_n = 1.0 / static_cast<double>(n_total);
    for (auto& lf : out.layers) {
        for (auto& v : lf.a.data) v *= inv_n;
        for (auto& v : lf.g.data) v *= inv_n;
        lf.lambda = opts.lambda_override ? *opts.lambda_override : default_lambda(lf.a, lf.g);
    }
    out.sample_count = n_total;
    out.params_hash = ihr::params_hash(params);
    return out;
}

KronFactors identity_factors(const Mlp& model, const ParamSet& params) {
    KronFactors out;
    for (int l = 0; l < model.num_layers(); ++l) {
        LayerFactors lf;
        lf.a = SymMatrix::identity(model.dims()[static_cast<std::size_t>(l)]);
        lf.g = SymMatrix::identity(model.dims()[static_cast<std::size_t>(l) + 1]);
        lf.lambda = 0.0;
        out.layers.push_back(std::move(lf));
    }
    out.sample_count = 1;
    out.params_hash = ihr::params_hash(params);
    return out;
}

Matrix ihvp(const KronFactors& factors, int layer, const Matrix& delta) {
    if (layer < 0 || layer >= static_cast<int>(factors.layers.size()))
        throw ShapeMismatch("ihvp: layer index out of range");
    const LayerFactors& lf = factors.layers[static_cast<std::size_t>(layer)];
    if (delta.rows != lf.g.dim || delta.cols != lf.a.dim)
        throw ShapeMismatch("ihvp: delta is " + std::to_string(delta.rows) + "x" +
                            std::to_string(delta.cols) + ", factors expect " +
                            std::to_string(lf.g.dim) + "x" + std::to_string(lf.a.dim));
    const SymMatrix gd = damped(lf.g, lf.lambda);
    const SymMatrix ad = damped(lf.a, lf.lambda);
    // left solve: Y = (G + lambda I)^-1 delta
    Matrix y = sym_solve(gd, delta);
    // right solve: Z^T = (A + lambda I)^-1 Y^T
    Matrix yt(y.cols, y.rows);
    for (int i = 0; i < y.rows; ++i)
        for (int j = 0; j < y.cols; ++j) yt(j, i) = y(i, j);
    Matrix zt = sym_solve(ad, yt);
    Matrix z(delta.rows, delta.cols);
    for (int i = 0; i < z.rows; ++i)
        for (int j = 0; j < z.cols; ++j) z(i, j) = zt(j, i);
    return z;
}

KronFactors merge_factor_sets(const std::vector<KronFactors>& history) {
    if (history.empty()) throw EmptyDataset("merge_factor_sets: empty history");
    const std::size_t layers = history.front().layers.size();
    for (const auto& f : history) {
        if (f.layers.size() != layers) throw ShapeMismatch("merge_factor_sets: layer count mismatch");
        for (std::size_t l = 0; l < layers; ++l) {
            if (f.layers[l].a.dim != history.front().layers[l].a.dim ||
                f.layers[l].g.dim != history.front().layers[l].g.dim)
                throw ShapeMismatch("merge_factor_sets: factor shape mismatch at layer " +
                                    std::to_string(l));
        }
    }
    KronFactors out;
    out.layers.resize(layers);
    const double inv_m = 1.0 / static_cast<double>(history.size());
    for (std::size_t l = 0; l < layers; ++l) {
        auto& lf = out.layers[l];
        lf.a = SymMatrix(history.front().layers[l].a.dim);
        lf.g = SymMatrix(history.front().layers[l].g.dim);
        for (const auto& f : history) {
            for (std::size_t i = 0; i < lf.a.data.size(); ++i) lf.a.data[i] += f.layers[l].a.data[i];
            for (std::size_t i = 0; i < lf.g.data.size(); ++i) lf.g.data[i] += f.layers[l].g.data[i];
            lf.lambda += f.layers[l].lambda;
        }
        for (auto& v : lf.a.data) v *= inv_m;
        for (auto& v : lf.g.data) v *= inv_m;
        lf.lambda *= inv_m;
    }
    for (const auto& f : history) out.sample_count += f.sample_count;
    // merged factors describe the latest parameter point
    out.params_hash = history.back().params_hash;
    return out;
}

namespace {
constexpr std::uint32_t kFactorMagic = 0x49485246; // "IHRF"
constexpr std::uint32_t kFactorVersion = 1;
} // namespace

void save_factors(const KronFactors& factors, const std::string& path) {
    io::Writer w(path);
    w.u32(kFactorMagic);
    w.u32(kFactorVersion);
    w.u32(static_cast<std::uint32_t>(factors.layers.size()));
    w.u64(static_cast<std::uint64_t>(factors.sample_count));
    w.u64(factors.params_hash);
    for (const auto& lf : factors.layers) {
        w.u32(static_cast<std::uint32_t>(lf.a.dim));
        w.u32(static_cast<std::uint32_t>(lf.g.dim));
        w.f64(lf.lambda);
    }
    for (const auto& lf : factors.layers) {
        w.doubles(lf.a.data);
        w.doubles(lf.g.data);
    }
    w.finish_with_checksum();
}

KronFactors load_factors(const std::string& path) {
    io::Reader r(path);
    if (r.u32() != kFactorMagic) throw CorruptFile("bad magic in " + path);
    const std::uint32_t version = r.u32();
    if (version != kFactorVersion)
        throw VersionMismatch("factor file version " + std::to_string(version) + ", expected " +
                              std::to_string(kFactorVersion));
    KronFactors out;
    const std::uint32_t layers = r.u32();
    out.sample_count = static_cast<std::int64_t>(r.u64());
    out.params_hash = r.u64();
    out.layers.resize(layers);
    for (auto& lf : out.layers) {
        lf.a = SymMatrix(static_cast<int>(r.u32()));
        lf.g = SymMatrix(static_cast<int>(r.u32()));
        lf.lambda = r.f64();
    }
    for (auto& lf : out.layers) {
        r.doubles(lf.a.data);
        r.doubles(lf.g.data);
    }
    r.verify_checksum();
    return out;
}

} // namespace ihr
