#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fedat/nn.hpp"
#include "fedat/rng.hpp"

namespace fedat {

enum class ModelKind { Mlp, SnnMlp };

const char* model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& name);

struct ClassifierSpec {
    std::size_t input_dim = 0;
    std::size_t num_classes = 0;
    std::vector<std::size_t> hidden = {64, 32};
    double dropout_rate = 0.2;
};

struct GeneratorSpec {
    std::size_t latent_dim = 0;   // noise vector size
    std::size_t num_classes = 0;  // one-hot condition appended to the noise
    std::size_t output_dim = 0;   // feature count; outputs land in (-1, 1)
    std::vector<std::size_t> hidden = {32, 64, 128};
};

/// ReLU hidden layers with standard dropout, softmax output, Glorot init.
Model build_mlp(const ClassifierSpec& spec, Rng& rng);

/// Self-normalizing variant: SELU hidden layers with alpha dropout, softmax
/// output, Lecun uniform init so activations keep mean 0 / variance 1.
Model build_snn_mlp(const ClassifierSpec& spec, Rng& rng);

Model build_classifier(ModelKind kind, const ClassifierSpec& spec, Rng& rng);

/// Conditional generator: [noise, one-hot label] -> tanh feature vector.
Model build_generator(const GeneratorSpec& spec, Rng& rng);

/// One sigmoid unit reading the classifier's last hidden representation;
/// scores a sample as real (1) or generated (0).
Model build_source_head(std::size_t trunk_width, Rng& rng);

}  // namespace fedat
