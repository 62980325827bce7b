#include "ihr/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "ihr/io_util.hpp"
#include "ihr/kernels.hpp"
#include "ihr/rng.hpp"

namespace ihr {

long ParamSet::linear_param_count() const {
    long n = 0;
    for (const auto& w : linear_weights) n += static_cast<long>(w.rows) * w.cols;
    return n;
}

long ParamSet::remaining_param_count() const {
    long n = 0;
    for (const auto& r : remaining) n += static_cast<long>(r.values.size());
    return n;
}

std::uint64_t params_hash(const ParamSet& p) {
    io::Fnv1a h;
    h.add_u64(p.linear_weights.size());
    for (const auto& w : p.linear_weights) {
        h.add_u64(static_cast<std::uint64_t>(w.rows));
        h.add_u64(static_cast<std::uint64_t>(w.cols));
        h.add_doubles(w.data);
    }
    h.add_u64(p.remaining.size());
    for (const auto& r : p.remaining) {
        h.add_bytes(r.name.data(), r.name.size());
        h.add_u64(r.values.size());
        h.add_doubles(r.values);
    }
    return h.value;
}

LossResult cross_entropy_loss(const Matrix& logits, const std::vector<int>& labels) {
    if (static_cast<int>(labels.size()) != logits.rows)
        throw ShapeMismatch("cross_entropy_loss: batch size mismatch");
    LossResult out;
    out.per_example.resize(labels.size());
    double sum = 0.0;
    for (int i = 0; i < logits.rows; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < logits.cols; ++c) mx = std::max(mx, logits(i, c));
        double lse = 0.0;
        for (int c = 0; c < logits.cols; ++c) lse += std::exp(logits(i, c) - mx);
        double l = mx + std::log(lse) - logits(i, labels[static_cast<std::size_t>(i)]);
        if (!std::isfinite(l)) throw NonFiniteLoss("cross-entropy loss is not finite");
        out.per_example[static_cast<std::size_t>(i)] = l;
        sum += l;
    }
    out.mean = logits.rows > 0 ? sum / logits.rows : 0.0;
    return out;
}

LossResult squared_loss(const Matrix& predictions, const Matrix& targets) {
    if (!predictions.same_shape(targets))
        throw ShapeMismatch("squared_loss: shape mismatch");
    LossResult out;
    out.per_example.resize(static_cast<std::size_t>(predictions.rows));
    double sum = 0.0;
    for (int i = 0; i < predictions.rows; ++i) {
        double l = 0.0;
        for (int c = 0; c < predictions.cols; ++c) {
            double d = predictions(i, c) - targets(i, c);
            l += d * d;
        }
        if (!std::isfinite(l)) throw NonFiniteLoss("squared loss is not finite");
        out.per_example[static_cast<std::size_t>(i)] = l;
        sum += l;
    }
    out.mean = predictions.rows > 0 ? sum / predictions.rows : 0.0;
    return out;
}

Mlp::Mlp(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw InvalidConfig("Mlp needs at least one layer");
    for (int d : dims_)
        if (d < 1) throw InvalidConfig("Mlp layer dims must be >= 1");
}

ParamSet Mlp::init_params(std::uint64_t seed) const {
    ParamSet p;
    for (int l = 0; l < num_layers(); ++l) {
        const int d_in = dims_[static_cast<std::size_t>(l)];
        const int d_out = dims_[static_cast<std::size_t>(l) + 1];
        Matrix w(d_out, d_in);
        rng::SplitMix64 s(rng::mix(seed, static_cast<std::uint64_t>(l)));
        const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
        for (auto& v : w.data) v = s.uniform(-bound, bound);
        p.linear_weights.push_back(std::move(w));
        p.remaining.push_back({"b" + std::to_string(l), std::vector<double>(static_cast<std::size_t>(d_out), 0.0)});
    }
    return p;
}

void Mlp::check_params(const ParamSet& p) const {
    if (static_cast<int>(p.linear_weights.size()) != num_layers() ||
        static_cast<int>(p.remaining.size()) != num_layers())
        throw ShapeMismatch("ParamSet layer count does not match model");
    for (int l = 0; l < num_layers(); ++l) {
        const auto& w = p.linear_weights[static_cast<std::size_t>(l)];
        if (w.cols != dims_[static_cast<std::size_t>(l)] || w.rows != dims_[static_cast<std::size_t>(l) + 1])
            throw ShapeMismatch("weight shape mismatch at layer " + std::to_string(l));
        if (p.remaining[static_cast<std::size_t>(l)].values.size() !=
            static_cast<std::size_t>(dims_[static_cast<std::size_t>(l) + 1]))
            throw ShapeMismatch("bias shape mismatch at layer " + std::to_string(l));
    }
}

ForwardPass Mlp::forward(const ParamSet& p, const Matrix& inputs) const {
    check_params(p);
    if (inputs.cols != input_dim())
        throw ShapeMismatch("forward: input dim " + std::to_string(inputs.cols) + ", expected " +
                            std::to_string(input_dim()));
    ForwardPass fp;
    const int n = inputs.rows;
    Matrix a = inputs;
    for (int l = 0; l < num_layers(); ++l) {
        const auto& w = p.linear_weights[static_cast<std::size_t>(l)];
        const auto& b = p.remaining[static_cast<std::size_t>(l)].values;
        fp.layer_inputs.push_back(a);
        Matrix s(n, w.rows);
        kernels::gemm_nt(a.data.data(), w.data.data(), s.data.data(), n, w.rows, w.cols);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < w.rows; ++c) s(i, c) += b[static_cast<std::size_t>(c)];
        if (l + 1 < num_layers()) {
            Matrix act(n, w.rows);
            kernels::tanh_map(s.data.data(), act.data.data(), static_cast<long>(s.data.size()));
            a = std::move(act);
        } else {
            fp.logits = std::move(s);
        }
    }
    return fp;
}

BackwardResult Mlp::backward(const ParamSet& p, const ForwardPass& fwd,
                             const std::vector<int>& labels) const {
    LossResult loss = cross_entropy_loss(fwd.logits, labels);
    const int n = fwd.logits.rows;
    const int k = fwd.logits.cols;
    // g = softmax(z) - onehot(y), gradient of the per-example loss
    Matrix dlogits(n, k);
    for (int i = 0; i < n; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) mx = std::max(mx, fwd.logits(i, c));
        double denom = 0.0;
        for (int c = 0; c < k; ++c) denom += std::exp(fwd.logits(i, c) - mx);
        for (int c = 0; c < k; ++c) dlogits(i, c) = std::exp(fwd.logits(i, c) - mx) / denom;
        dlogits(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    }
    return backprop(p, fwd, std::move(dlogits), std::move(loss));
}

BackwardResult Mlp::backward(const ParamSet& p, const ForwardPass& fwd, const Matrix& targets) const {
    LossResult loss = squared_loss(fwd.logits, targets);
    const int n = fwd.logits.rows;
    const int k = fwd.logits.cols;
    Matrix dlogits(n, k);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < k; ++c) dlogits(i, c) = 2.0 * (fwd.logits(i, c) - targets(i, c));
    return backprop(p, fwd, std::move(dlogits), std::move(loss));
}

BackwardResult Mlp::backprop(const ParamSet& p, const ForwardPass& fwd, Matrix dlogits,
                             LossResult loss) const {
    const int layers = num_layers();
    if (static_cast<int>(fwd.layer_inputs.size()) != layers)
        throw ShapeMismatch("backward: forward pass does not match model");
    const int n = dlogits.rows;

    BackwardResult out;
    out.mean_loss = loss.mean;
    out.tape.losses = std::move(loss.per_example);
    out.tape.inputs = fwd.layer_inputs;
    out.tape.preact_grads.resize(static_cast<std::size_t>(layers));
    out.grads.linear_weights.resize(static_cast<std::size_t>(layers));
    out.grads.remaining.resize(static_cast<std::size_t>(layers));

    Matrix g = std::move(dlogits); // n x d_o of the current layer
    for (int l = layers - 1; l >= 0; --l) {
        const auto& w = p.linear_weights[static_cast<std::size_t>(l)];
        const auto& a = fwd.layer_inputs[static_cast<std::size_t>(l)];

        // dW = (1/n) g^T a, db = column mean of g
        Matrix dw(w.rows, w.cols);
        kernels::gemm_tn(g.data.data(), a.data.data(), dw.data.data(), n, w.rows, w.cols);
        const double inv_n = n > 0 ? 1.0 / n : 0.0;
        for (auto& v : dw.data) v *= inv_n;
        std::vector<double> db(static_cast<std::size_t>(w.rows), 0.0);
        for (int c = 0; c < w.rows; ++c) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += g(i, c);
            db[static_cast<std::size_t>(c)] = s * inv_n;
        }
        out.grads.linear_weights[static_cast<std::size_t>(l)] = std::move(dw);
        out.grads.remaining[static_cast<std::size_t>(l)] = {p.remaining[static_cast<std::size_t>(l)].name,
                                                            std::move(db)};
        out.tape.preact_grads[static_cast<std::size_t>(l)] = g;

        if (l > 0) {
            // da = g W, then through tanh: g_prev = da * (1 - a^2)
            Matrix da(n, w.cols);
            kernels::gemm_nn(g.data.data(), w.data.data(), da.data.data(), n, w.rows, w.cols);
            for (int i = 0; i < n; ++i)
                for (int c = 0; c < w.cols; ++c) {
                    const double t = a(i, c);
                    da(i, c) *= 1.0 - t * t;
                }
            g = std::move(da);
        }
    }
    return out;
}

namespace {
constexpr std::uint32_t kParamsMagic = 0x49485250; // "IHRP"
constexpr std::uint32_t kParamsVersion = 1;
} // namespace

void save_params(const ParamSet& p, const std::string& path) {
    io::Writer w(path);
    w.u32(kParamsMagic);
    w.u32(kParamsVersion);
    w.u32(static_cast<std::uint32_t>(p.linear_weights.size()));
    for (const auto& m : p.linear_weights) {
        w.u32(static_cast<std::uint32_t>(m.rows));
        w.u32(static_cast<std::uint32_t>(m.cols));
    }
    w.u32(static_cast<std::uint32_t>(p.remaining.size()));
    for (const auto& r : p.remaining) {
        w.str(r.name);
        w.u64(r.values.size());
    }
    for (const auto& m : p.linear_weights) w.doubles(m.data);
    for (const auto& r : p.remaining) w.doubles(r.values);
    w.finish_with_checksum();
}

ParamSet load_params(const std::string& path) {
    io::Reader r(path);
    if (r.u32() != kParamsMagic) throw CorruptFile("bad magic in " + path);
    const std::uint32_t version = r.u32();
    if (version != kParamsVersion)
        throw VersionMismatch("checkpoint version " + std::to_string(version) + ", expected " +
                              std::to_string(kParamsVersion));
    ParamSet p;
    const std::uint32_t layers = r.u32();
    std::vector<std::pair<int, int>> shapes;
    for (std::uint32_t l = 0; l < layers; ++l) {
        int rows = static_cast<int>(r.u32());
        int cols = static_cast<int>(r.u32());
        shapes.emplace_back(rows, cols);
    }
    const std::uint32_t nrem = r.u32();
    std::vector<std::pair<std::string, std::uint64_t>> rem_shapes;
    for (std::uint32_t i = 0; i < nrem; ++i) {
        std::string name = r.str();
        std::uint64_t count = r.u64();
        rem_shapes.emplace_back(std::move(name), count);
    }
    for (auto [rows, cols] : shapes) {
        Matrix m(rows, cols);
        r.doubles(m.data);
        p.linear_weights.push_back(std::move(m));
    }
    for (auto& [name, count] : rem_shapes) {
        NamedVector v{name, std::vector<double>(count)};
        r.doubles(v.values);
        p.remaining.push_back(std::move(v));
    }
    r.verify_checksum();
    return p;
}

} // namespace ihr
