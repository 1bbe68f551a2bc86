#include "fedat/models.hpp"

#include <stdexcept>

#include "fedat/errors.hpp"

namespace fedat {

const char* model_kind_name(ModelKind k) {
    return k == ModelKind::Mlp ? "mlp" : "snn_mlp";
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "mlp") return ModelKind::Mlp;
    if (name == "snn_mlp") return ModelKind::SnnMlp;
    throw ConfigError("unknown model kind: " + name + " (expected mlp or snn_mlp)");
}

namespace {

void check_classifier(const ClassifierSpec& s) {
    if (s.input_dim == 0) throw ConfigError("classifier: input_dim must be >= 1");
    if (s.num_classes < 2) throw ConfigError("classifier: need at least 2 classes");
    if (s.hidden.empty()) throw ConfigError("classifier: need at least one hidden layer");
    for (std::size_t w : s.hidden) {
        if (w == 0) throw ConfigError("classifier: hidden layer width must be >= 1");
    }
    if (s.dropout_rate < 0.0 || s.dropout_rate >= 1.0) {
        throw ConfigError("classifier: dropout_rate must be in [0, 1)");
    }
}

DenseLayer glorot_layer(std::size_t in, std::size_t out, Activation act, Rng& rng) {
    DenseLayer l;
    l.weights = glorot_uniform_init(in, out, in, out, rng);
    l.bias.assign(out, 0.0);
    l.activation = act;
    return l;
}

DenseLayer lecun_layer(std::size_t in, std::size_t out, Activation act, Rng& rng) {
    DenseLayer l;
    l.weights = lecun_uniform_init(in, in, out, rng);
    l.bias.assign(out, 0.0);
    l.activation = act;
    return l;
}

}  // namespace

Model build_mlp(const ClassifierSpec& spec, Rng& rng) {
    check_classifier(spec);
    Model m;
    std::size_t in = spec.input_dim;
    for (std::size_t width : spec.hidden) {
        DenseLayer l = glorot_layer(in, width, Activation::ReLU, rng);
        if (spec.dropout_rate > 0.0) {
            l.dropout = DropoutKind::Standard;
            l.dropout_rate = spec.dropout_rate;
        }
        m.layers.push_back(std::move(l));
        in = width;
    }
    m.layers.push_back(glorot_layer(in, spec.num_classes, Activation::Softmax, rng));
    return m;
}

Model build_snn_mlp(const ClassifierSpec& spec, Rng& rng) {
    check_classifier(spec);
    Model m;
    std::size_t in = spec.input_dim;
    for (std::size_t width : spec.hidden) {
        DenseLayer l = lecun_layer(in, width, Activation::Selu, rng);
        if (spec.dropout_rate > 0.0) {
            l.dropout = DropoutKind::Alpha;
            l.dropout_rate = spec.dropout_rate;
        }
        m.layers.push_back(std::move(l));
        in = width;
    }
    m.layers.push_back(lecun_layer(in, spec.num_classes, Activation::Softmax, rng));
    return m;
}

Model build_classifier(ModelKind kind, const ClassifierSpec& spec, Rng& rng) {
    return kind == ModelKind::Mlp ? build_mlp(spec, rng) : build_snn_mlp(spec, rng);
}

Model build_generator(const GeneratorSpec& spec, Rng& rng) {
    if (spec.latent_dim == 0) throw ConfigError("generator: latent_dim must be >= 1");
    if (spec.num_classes < 2) throw ConfigError("generator: need at least 2 classes");
    if (spec.output_dim == 0) throw ConfigError("generator: output_dim must be >= 1");
    if (spec.hidden.empty()) throw ConfigError("generator: need at least one hidden layer");
    for (std::size_t w : spec.hidden) {
        if (w == 0) throw ConfigError("generator: hidden layer width must be >= 1");
    }
    Model m;
    std::size_t in = spec.latent_dim + spec.num_classes;
    for (std::size_t width : spec.hidden) {
        m.layers.push_back(glorot_layer(in, width, Activation::Tanh, rng));
        in = width;
    }
    m.layers.push_back(glorot_layer(in, spec.output_dim, Activation::Tanh, rng));
    return m;
}

Model build_source_head(std::size_t trunk_width, Rng& rng) {
    if (trunk_width == 0) throw ConfigError("source head: trunk width must be >= 1");
    Model m;
    m.layers.push_back(glorot_layer(trunk_width, 1, Activation::Sigmoid, rng));
    return m;
}

}  // namespace fedat
