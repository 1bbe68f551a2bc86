#include "fedat/nn.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fedat/errors.hpp"

namespace fedat {

double selu(double x, const SeluParams& p) {
    return x > 0.0 ? p.lambda * x : p.lambda * p.alpha * std::expm1(x);
}

double selu_grad(double x, const SeluParams& p) {
    return x > 0.0 ? p.lambda : p.lambda * p.alpha * std::exp(x);
}

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::ReLU: return "relu";
        case Activation::Selu: return "selu";
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Softmax: return "softmax";
    }
    return "?";
}

Activation activation_from_name(const std::string& name) {
    if (name == "identity") return Activation::Identity;
    if (name == "relu") return Activation::ReLU;
    if (name == "selu") return Activation::Selu;
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "softmax") return Activation::Softmax;
    throw std::invalid_argument("unknown activation: " + name);
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void softmax_rows(Matrix& m) {
    for (std::size_t i = 0; i < m.rows; ++i) {
        double* r = m.row(i);
        double mx = r[0];
        for (std::size_t j = 1; j < m.cols; ++j) mx = std::max(mx, r[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) {
            r[j] = std::exp(r[j] - mx);
            sum += r[j];
        }
        for (std::size_t j = 0; j < m.cols; ++j) r[j] /= sum;
    }
}

void apply_activation(Matrix& m, Activation a) {
    switch (a) {
        case Activation::Identity: return;
        case Activation::Softmax: softmax_rows(m); return;
        case Activation::ReLU:
            for (double& v : m.data) v = v > 0.0 ? v : 0.0;
            return;
        case Activation::Selu:
            for (double& v : m.data) v = selu(v);
            return;
        case Activation::Tanh:
            for (double& v : m.data) v = std::tanh(v);
            return;
        case Activation::Sigmoid:
            for (double& v : m.data) v = sigmoid(v);
            return;
    }
}

// d(act)/dz evaluated from the cached pre-activation.
double activation_grad(Activation a, double z) {
    switch (a) {
        case Activation::Identity: return 1.0;
        case Activation::ReLU: return z > 0.0 ? 1.0 : 0.0;  // subgradient 0 at the kink
        case Activation::Selu: return selu_grad(z);
        case Activation::Tanh: {
            double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Activation::Sigmoid: {
            double s = sigmoid(z);
            return s * (1.0 - s);
        }
        case Activation::Softmax:
            throw std::logic_error("softmax gradient must be fused with its loss");
    }
    return 0.0;
}

struct AlphaDropoutCoeffs {
    double keep;
    double saturation;  // -lambda*alpha
    double a;
    double b;
};

AlphaDropoutCoeffs alpha_dropout_coeffs(double rate) {
    AlphaDropoutCoeffs c{};
    c.keep = 1.0 - rate;
    c.saturation = -kSeluLambda * kSeluAlpha;
    // Affine correction restoring mean 0 / variance 1 for standardized input.
    c.a = 1.0 / std::sqrt(c.keep + c.saturation * c.saturation * c.keep * rate);
    c.b = -c.a * c.saturation * rate;
    return c;
}

// Applies dropout in place; fills scale with d(out)/d(in) per element.
void apply_dropout(Matrix& m, DropoutKind kind, double rate, Rng& rng, Matrix& scale) {
    scale = Matrix(m.rows, m.cols);
    if (kind == DropoutKind::Standard) {
        const double keep = 1.0 - rate;
        for (std::size_t i = 0; i < m.data.size(); ++i) {
            const double s = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
            scale.data[i] = s;
            m.data[i] *= s;
        }
    } else {
        const AlphaDropoutCoeffs c = alpha_dropout_coeffs(rate);
        for (std::size_t i = 0; i < m.data.size(); ++i) {
            if (rng.bernoulli(c.keep)) {
                scale.data[i] = c.a;
                m.data[i] = c.a * m.data[i] + c.b;
            } else {
                scale.data[i] = 0.0;
                m.data[i] = c.a * c.saturation + c.b;
            }
        }
    }
}

}  // namespace

Matrix alpha_dropout(const Matrix& x, double rate, bool training, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) throw ConfigError("alpha_dropout: rate must be in [0, 1)");
    if (!training || rate == 0.0) return x;
    Matrix out = x;
    Matrix scale;
    apply_dropout(out, DropoutKind::Alpha, rate, rng, scale);
    return out;
}

Matrix lecun_uniform_init(std::size_t fan_in, std::size_t rows, std::size_t cols, Rng& rng) {
    if (fan_in == 0) throw DimensionError("lecun_uniform_init: fan_in must be >= 1");
    const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.uniform(-bound, bound);
    return m;
}

Matrix glorot_uniform_init(std::size_t fan_in, std::size_t fan_out, std::size_t rows,
                           std::size_t cols, Rng& rng) {
    if (fan_in == 0 || fan_out == 0) throw DimensionError("glorot_uniform_init: zero fan");
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.uniform(-bound, bound);
    return m;
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.data.size() + l.bias.size();
    return n;
}

ForwardCache forward(const Model& m, const Matrix& x, bool training, Rng* rng) {
    if (m.layers.empty()) throw DimensionError("forward: model has no layers");
    if (x.cols != m.input_dim()) {
        throw DimensionError("forward: input has " + std::to_string(x.cols) +
                             " columns, model expects " + std::to_string(m.input_dim()));
    }
    ForwardCache cache;
    cache.model = &m;
    cache.input = x;
    cache.training = training;
    cache.layers.resize(m.layers.size());
    const Matrix* cur = &cache.input;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        const DenseLayer& layer = m.layers[l];
        LayerCache& lc = cache.layers[l];
        lc.pre = matmul(*cur, layer.weights);
        add_row_vector(lc.pre, layer.bias);
        lc.post = lc.pre;
        apply_activation(lc.post, layer.activation);
        if (training && layer.dropout != DropoutKind::None && layer.dropout_rate > 0.0) {
            if (rng == nullptr) throw std::invalid_argument("forward: dropout needs an rng");
            apply_dropout(lc.post, layer.dropout, layer.dropout_rate, *rng, lc.drop_scale);
        }
        cur = &lc.post;
    }
    return cache;
}

double cross_entropy_loss(const Matrix& probs, const std::vector<int>& labels) {
    if (probs.rows != labels.size()) throw DimensionError("cross_entropy_loss: batch mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < probs.rows; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= probs.cols) {
            throw std::invalid_argument("cross_entropy_loss: label " + std::to_string(y) +
                                        " out of range at row " + std::to_string(i));
        }
        total -= std::log(std::max(probs.at(i, static_cast<std::size_t>(y)), 1e-12));
    }
    return total / static_cast<double>(probs.rows);
}

double binary_cross_entropy_loss(const Matrix& probs, const std::vector<double>& targets) {
    if (probs.rows != targets.size() || probs.cols != 1) {
        throw DimensionError("binary_cross_entropy_loss: shape mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < probs.rows; ++i) {
        const double p = probs.at(i, 0);
        total -= targets[i] * std::log(std::max(p, 1e-12)) +
                 (1.0 - targets[i]) * std::log(std::max(1.0 - p, 1e-12));
    }
    return total / static_cast<double>(probs.rows);
}

Matrix softmax_ce_delta(const Matrix& probs, const std::vector<int>& labels) {
    if (probs.rows != labels.size()) throw DimensionError("softmax_ce_delta: batch mismatch");
    Matrix d = probs;
    const double inv_n = 1.0 / static_cast<double>(probs.rows);
    for (std::size_t i = 0; i < d.rows; ++i) {
        d.at(i, static_cast<std::size_t>(labels[i])) -= 1.0;
        for (std::size_t j = 0; j < d.cols; ++j) d.at(i, j) *= inv_n;
    }
    return d;
}

Matrix sigmoid_bce_delta(const Matrix& probs, const std::vector<double>& targets) {
    if (probs.rows != targets.size()) throw DimensionError("sigmoid_bce_delta: batch mismatch");
    Matrix d = probs;
    const double inv_n = 1.0 / static_cast<double>(probs.rows);
    for (std::size_t i = 0; i < d.rows; ++i) d.at(i, 0) = (d.at(i, 0) - targets[i]) * inv_n;
    return d;
}

Matrix delta_through_activation(const Model& m, const ForwardCache& cache, std::size_t l,
                                Matrix dpost) {
    if (l >= m.layers.size()) throw DimensionError("delta_through_activation: bad layer index");
    const LayerCache& lc = cache.layers[l];
    if (!dpost.same_shape(lc.pre)) {
        throw DimensionError("delta_through_activation: gradient shape mismatch");
    }
    if (!lc.drop_scale.empty()) hadamard_inplace(dpost, lc.drop_scale);
    const Activation act = m.layers[l].activation;
    for (std::size_t i = 0; i < dpost.data.size(); ++i) {
        dpost.data[i] *= activation_grad(act, lc.pre.data[i]);
    }
    return dpost;
}

Gradients backward_from_delta(const Model& m, const ForwardCache& cache, std::size_t last,
                              Matrix delta_pre) {
    if (cache.model != &m) {
        throw std::logic_error("backward: cache does not belong to this model");
    }
    if (last >= m.layers.size()) throw DimensionError("backward: layer index out of range");
    if (!delta_pre.same_shape(cache.layers[last].pre)) {
        throw DimensionError("backward: delta shape does not match layer output");
    }
    Gradients g;
    g.layers.resize(last + 1);
    for (std::size_t l = last + 1; l-- > 0;) {
        const DenseLayer& layer = m.layers[l];
        g.layers[l].dweights = matmul_tn(cache.layer_input(l), delta_pre);
        g.layers[l].dbias = col_sums(delta_pre);
        Matrix delta_post = matmul_nt(delta_pre, layer.weights);
        if (l == 0) {
            g.input = std::move(delta_post);
            break;
        }
        // Through the previous layer's dropout and activation.
        const DenseLayer& prev = m.layers[l - 1];
        const LayerCache& pc = cache.layers[l - 1];
        if (!pc.drop_scale.empty()) hadamard_inplace(delta_post, pc.drop_scale);
        for (std::size_t i = 0; i < delta_post.data.size(); ++i) {
            delta_post.data[i] *= activation_grad(prev.activation, pc.pre.data[i]);
        }
        delta_pre = std::move(delta_post);
    }
    return g;
}

Gradients backward(const Model& m, const ForwardCache& cache, const std::vector<int>& labels) {
    if (cache.model != &m) {
        throw std::logic_error("backward: cache does not belong to this model");
    }
    if (m.layers.back().activation != Activation::Softmax) {
        throw std::logic_error("backward: top layer must be softmax for label-driven backprop");
    }
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= m.output_dim()) {
            throw std::invalid_argument("backward: label out of range");
        }
    }
    Matrix delta = softmax_ce_delta(cache.output(), labels);
    return backward_from_delta(m, cache, m.layers.size() - 1, std::move(delta));
}

void Gradients::add(const Gradients& other, std::size_t layer_offset) {
    for (std::size_t l = 0; l < other.layers.size(); ++l) {
        LayerGrad& dst = layers[l + layer_offset];
        const LayerGrad& src = other.layers[l];
        if (!dst.dweights.same_shape(src.dweights)) {
            throw DimensionError("Gradients::add: shape mismatch");
        }
        for (std::size_t i = 0; i < dst.dweights.data.size(); ++i) {
            dst.dweights.data[i] += src.dweights.data[i];
        }
        for (std::size_t i = 0; i < dst.dbias.size(); ++i) dst.dbias[i] += src.dbias[i];
    }
}

bool Gradients::all_finite() const {
    for (const auto& l : layers) {
        if (!l.dweights.all_finite()) return false;
        for (double v : l.dbias) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------

ModelWeights extract_weights(const Model& m) {
    ModelWeights w;
    w.layers.reserve(m.layers.size());
    for (const auto& l : m.layers) w.layers.push_back({l.weights, l.bias});
    return w;
}

void load_weights(Model& m, const ModelWeights& w) {
    if (w.layers.size() != m.layers.size()) {
        throw DimensionError("load_weights: layer count mismatch");
    }
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        if (!m.layers[l].weights.same_shape(w.layers[l].weights) ||
            m.layers[l].bias.size() != w.layers[l].bias.size()) {
            throw DimensionError("load_weights: shape mismatch at layer " + std::to_string(l));
        }
        m.layers[l].weights = w.layers[l].weights;
        m.layers[l].bias = w.layers[l].bias;
    }
}

bool ModelWeights::same_shapes(const ModelWeights& o) const {
    if (layers.size() != o.layers.size()) return false;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (!layers[l].weights.same_shape(o.layers[l].weights) ||
            layers[l].bias.size() != o.layers[l].bias.size()) {
            return false;
        }
    }
    return true;
}

bool ModelWeights::all_finite() const {
    for (const auto& l : layers) {
        if (!l.weights.all_finite()) return false;
        for (double v : l.bias) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

std::size_t ModelWeights::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.data.size() + l.bias.size();
    return n;
}

double squared_distance(const ModelWeights& a, const ModelWeights& b) {
    if (!a.same_shapes(b)) throw DimensionError("squared_distance: shape mismatch");
    double total = 0.0;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        const auto& wa = a.layers[l].weights.data;
        const auto& wb = b.layers[l].weights.data;
        for (std::size_t i = 0; i < wa.size(); ++i) {
            const double d = wa[i] - wb[i];
            total += d * d;
        }
        for (std::size_t i = 0; i < a.layers[l].bias.size(); ++i) {
            const double d = a.layers[l].bias[i] - b.layers[l].bias[i];
            total += d * d;
        }
    }
    return total;
}

// ---------------------------------------------------------------------------

OptimizerState OptimizerState::sgd(double eta) {
    if (eta <= 0.0) throw ConfigError("optimizer: eta must be > 0");
    OptimizerState s;
    s.kind = Kind::SGD;
    s.eta = eta;
    return s;
}

OptimizerState OptimizerState::adam(double eta, const Model& shape) {
    if (eta <= 0.0) throw ConfigError("optimizer: eta must be > 0");
    OptimizerState s;
    s.kind = Kind::Adam;
    s.eta = eta;
    s.m = extract_weights(shape);
    s.v = extract_weights(shape);
    for (auto& l : s.m.layers) {
        std::fill(l.weights.data.begin(), l.weights.data.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
    s.v = s.m;
    return s;
}

namespace {

void check_grad_shapes(const Model& model, const Gradients& grads) {
    if (grads.layers.size() != model.layers.size()) {
        throw DimensionError("optimizer_step: gradient layer count mismatch");
    }
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        if (!grads.layers[l].dweights.same_shape(model.layers[l].weights) ||
            grads.layers[l].dbias.size() != model.layers[l].bias.size()) {
            throw DimensionError("optimizer_step: gradient shape mismatch at layer " +
                                 std::to_string(l));
        }
    }
}

}  // namespace

void optimizer_step(OptimizerState& state, Model& model, const Gradients& grads) {
    check_grad_shapes(model, grads);
    if (state.kind == OptimizerState::Kind::SGD) {
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            auto& w = model.layers[l].weights.data;
            const auto& gw = grads.layers[l].dweights.data;
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= state.eta * gw[i];
            auto& b = model.layers[l].bias;
            const auto& gb = grads.layers[l].dbias;
            for (std::size_t i = 0; i < b.size(); ++i) b[i] -= state.eta * gb[i];
        }
        return;
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    auto update = [&](double& w, double& m, double& v, double g) {
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        w -= state.eta * (m / bc1) / (std::sqrt(v / bc2) + state.epsilon);
    };
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& w = model.layers[l].weights.data;
        auto& m = state.m.layers[l].weights.data;
        auto& v = state.v.layers[l].weights.data;
        const auto& gw = grads.layers[l].dweights.data;
        for (std::size_t i = 0; i < w.size(); ++i) update(w[i], m[i], v[i], gw[i]);
        auto& b = model.layers[l].bias;
        auto& mb = state.m.layers[l].bias;
        auto& vb = state.v.layers[l].bias;
        const auto& gb = grads.layers[l].dbias;
        for (std::size_t i = 0; i < b.size(); ++i) update(b[i], mb[i], vb[i], gb[i]);
    }
}

// ---------------------------------------------------------------------------

namespace {

const char* dropout_name(DropoutKind k) {
    switch (k) {
        case DropoutKind::None: return "none";
        case DropoutKind::Standard: return "standard";
        case DropoutKind::Alpha: return "alpha";
    }
    return "?";
}

DropoutKind dropout_from_name(const std::string& s) {
    if (s == "none") return DropoutKind::None;
    if (s == "standard") return DropoutKind::Standard;
    if (s == "alpha") return DropoutKind::Alpha;
    throw std::invalid_argument("unknown dropout kind: " + s);
}

void put_value(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

std::string model_to_text(const Model& m) {
    std::string out = "fedat-model 1\nlayers " + std::to_string(m.layers.size()) + "\n";
    for (const auto& l : m.layers) {
        out += "layer ";
        out += activation_name(l.activation);
        out += ' ';
        out += std::to_string(l.fan_in()) + " " + std::to_string(l.fan_out());
        out += ' ';
        out += dropout_name(l.dropout);
        out += ' ';
        put_value(out, l.dropout_rate);
        out += "\nw";
        for (double v : l.weights.data) {
            out += ' ';
            put_value(out, v);
        }
        out += "\nb";
        for (double v : l.bias) {
            out += ' ';
            put_value(out, v);
        }
        out += '\n';
    }
    return out;
}

Model model_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "fedat-model" || version != 1) {
        throw std::runtime_error("checkpoint: bad header");
    }
    std::size_t count = 0;
    if (!(in >> word >> count) || word != "layers") {
        throw std::runtime_error("checkpoint: missing layer count");
    }
    Model m;
    m.layers.resize(count);
    for (std::size_t l = 0; l < count; ++l) {
        DenseLayer& layer = m.layers[l];
        std::string act, drop;
        std::size_t fan_in = 0, fan_out = 0;
        if (!(in >> word >> act >> fan_in >> fan_out >> drop >> layer.dropout_rate) ||
            word != "layer") {
            throw std::runtime_error("checkpoint: malformed layer " + std::to_string(l));
        }
        layer.activation = activation_from_name(act);
        layer.dropout = dropout_from_name(drop);
        layer.weights = Matrix(fan_in, fan_out);
        layer.bias.assign(fan_out, 0.0);
        if (!(in >> word) || word != "w") throw std::runtime_error("checkpoint: missing weights");
        for (double& v : layer.weights.data) {
            if (!(in >> v)) throw std::runtime_error("checkpoint: truncated weights");
        }
        if (!(in >> word) || word != "b") throw std::runtime_error("checkpoint: missing bias");
        for (double& v : layer.bias) {
            if (!(in >> v)) throw std::runtime_error("checkpoint: truncated bias");
        }
    }
    return m;
}

void save_model(const Model& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << model_to_text(m);
    if (!out) throw std::runtime_error("failed writing " + path);
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_text(buf.str());
}

}  // namespace fedat
