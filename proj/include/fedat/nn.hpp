#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fedat/matrix.hpp"
#include "fedat/rng.hpp"

namespace fedat {

// Standard self-normalizing constants. These are the fixed-point values; the
// scale applies to both branches.
inline constexpr double kSeluLambda = 1.0507009873554805;
inline constexpr double kSeluAlpha = 1.6732632423543772;

struct SeluParams {
    double lambda = kSeluLambda;
    double alpha = kSeluAlpha;
};

/// lambda*x for x > 0, lambda*alpha*(e^x - 1) otherwise.
double selu(double x, const SeluParams& p = {});
/// d selu / dx (right branch taken at x == 0).
double selu_grad(double x, const SeluParams& p = {});

enum class Activation { Identity, ReLU, Selu, Tanh, Sigmoid, Softmax };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

enum class DropoutKind { None, Standard, Alpha };

/// Dropout that sets dropped units to the SELU saturation value -lambda*alpha
/// and rescales so zero mean / unit variance inputs keep those statistics.
/// Inference mode returns x unchanged. rate must be in [0, 1).
Matrix alpha_dropout(const Matrix& x, double rate, bool training, Rng& rng);

/// Entries i.i.d. uniform on [-sqrt(3/fan_in), +sqrt(3/fan_in)].
Matrix lecun_uniform_init(std::size_t fan_in, std::size_t rows, std::size_t cols, Rng& rng);
/// Entries i.i.d. uniform on [-sqrt(6/(fan_in+fan_out)), +...].
Matrix glorot_uniform_init(std::size_t fan_in, std::size_t fan_out, std::size_t rows,
                           std::size_t cols, Rng& rng);

struct DenseLayer {
    Matrix weights;  // fan_in x fan_out
    std::vector<double> bias;
    Activation activation = Activation::Identity;
    DropoutKind dropout = DropoutKind::None;
    double dropout_rate = 0.0;

    std::size_t fan_in() const { return weights.rows; }
    std::size_t fan_out() const { return weights.cols; }
};

struct Model {
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const { return layers.front().fan_in(); }
    std::size_t output_dim() const { return layers.back().fan_out(); }
    std::size_t parameter_count() const;
};

struct LayerCache {
    Matrix pre;         // z = input * W + b
    Matrix post;        // output after activation and dropout
    Matrix drop_scale;  // elementwise d(post)/d(act); empty when no dropout ran
};

struct ForwardCache {
    const Model* model = nullptr;
    Matrix input;
    bool training = false;
    std::vector<LayerCache> layers;

    const Matrix& output() const { return layers.back().post; }
    /// Input the given layer consumed.
    const Matrix& layer_input(std::size_t l) const { return l == 0 ? input : layers[l - 1].post; }
};

/// Full forward pass. rng is only consumed when training and a layer has
/// dropout. Softmax rows sum to 1 up to roundoff.
ForwardCache forward(const Model& m, const Matrix& x, bool training, Rng* rng = nullptr);

struct LayerGrad {
    Matrix dweights;
    std::vector<double> dbias;
};

struct Gradients {
    std::vector<LayerGrad> layers;
    Matrix input;  // dL/dx, for chaining into an upstream model

    void add(const Gradients& other, std::size_t layer_offset = 0);
    bool all_finite() const;
};

/// Mean cross-entropy of softmax rows against integer labels. Probabilities
/// are clamped at 1e-12 before the log so degenerate predictions stay finite.
double cross_entropy_loss(const Matrix& probs, const std::vector<int>& labels);
/// Mean binary cross-entropy of a sigmoid column against 0/1 targets.
double binary_cross_entropy_loss(const Matrix& probs, const std::vector<double>& targets);

/// dL/dz of the top layer for mean CE over a softmax top: (p - onehot)/n.
Matrix softmax_ce_delta(const Matrix& probs, const std::vector<int>& labels);
/// dL/dz for mean BCE over a sigmoid top: (p - target)/n.
Matrix sigmoid_bce_delta(const Matrix& probs, const std::vector<double>& targets);

/// Exact gradients of mean cross-entropy w.r.t. every parameter plus the
/// model input. cache must come from a forward() call on the same model with
/// a batch of the same shape.
Gradients backward(const Model& m, const ForwardCache& cache, const std::vector<int>& labels);

/// Backpropagates an externally supplied dL/dz of the top layer (layer
/// `last` and everything below it). Used to drive auxiliary heads and to
/// chain discriminator gradients into a generator.
Gradients backward_from_delta(const Model& m, const ForwardCache& cache, std::size_t last,
                              Matrix delta_pre);

/// Converts dL/d(post) of layer `l` into dL/d(pre) by applying the cached
/// dropout scale and the activation derivative. Lets a gradient that arrives
/// at a layer's *output* (e.g. from an auxiliary head) enter
/// backward_from_delta.
Matrix delta_through_activation(const Model& m, const ForwardCache& cache, std::size_t l,
                                Matrix dpost);

// ---------------------------------------------------------------------------
// Exchanged parameters

struct ModelWeights {
    struct Entry {
        Matrix weights;
        std::vector<double> bias;
    };
    std::vector<Entry> layers;

    bool same_shapes(const ModelWeights& o) const;
    bool all_finite() const;
    std::size_t parameter_count() const;
};

ModelWeights extract_weights(const Model& m);
void load_weights(Model& m, const ModelWeights& w);
/// Sum of squared differences over all parameters.
double squared_distance(const ModelWeights& a, const ModelWeights& b);

// ---------------------------------------------------------------------------
// Optimizers

struct OptimizerState {
    enum class Kind { SGD, Adam } kind = Kind::SGD;
    double eta = 0.001;
    // Adam moments, shape-matched to the model parameters.
    ModelWeights m;
    ModelWeights v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static OptimizerState sgd(double eta);
    static OptimizerState adam(double eta, const Model& shape);
};

/// In-place parameter update. SGD: w -= eta*g. Adam: bias-corrected moments.
void optimizer_step(OptimizerState& state, Model& model, const Gradients& grads);

// ---------------------------------------------------------------------------
// Checkpoints: text format with 17 significant digits, round-trip exact.

std::string model_to_text(const Model& m);
Model model_from_text(const std::string& text);
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

}  // namespace fedat
