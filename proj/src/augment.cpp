#include "fedat/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fedat/errors.hpp"

namespace fedat {

const char* balance_mode_name(BalanceMode m) {
    return m == BalanceMode::LocalMax ? "local_max" : "global_union";
}

BalanceMode balance_mode_from_name(const std::string& name) {
    if (name == "local_max") return BalanceMode::LocalMax;
    if (name == "global_union") return BalanceMode::GlobalUnion;
    throw ConfigError("unknown augment target: " + name +
                      " (expected local_max or global_union)");
}

std::size_t AugmentationPlan::total_to_generate() const {
    std::size_t total = 0;
    for (const auto& [cls, target] : targets) {
        const std::size_t cur = current.count(cls) ? current.at(cls) : 0;
        if (target > cur) total += target - cur;
    }
    return total;
}

AugmentationPlan plan_balancing(const ClientDataset& client, BalanceMode mode,
                                const std::set<int>& aux_labels, std::size_t global_count) {
    if (client.n_samples() == 0) throw std::invalid_argument("plan_balancing: empty client");
    std::map<int, std::size_t> local;
    for (int y : client.labels) {
        if (y != 0) ++local[y];
    }
    std::size_t local_max = 0;
    for (const auto& [cls, count] : local) local_max = std::max(local_max, count);

    AugmentationPlan plan;
    for (const auto& [cls, count] : local) {
        plan.targets[cls] = local_max;
        plan.current[cls] = count;
    }
    if (mode == BalanceMode::GlobalUnion && global_count > 0) {
        for (int cls : aux_labels) {
            if (cls == 0 || local.count(cls)) continue;
            plan.targets[cls] = global_count;
            plan.current[cls] = 0;
        }
    }
    return plan;
}

namespace {

// [noise | one-hot(label)] rows for the generator.
Matrix generator_input(const Matrix& noise, const std::vector<int>& labels,
                       std::size_t num_classes) {
    Matrix in(noise.rows, noise.cols + num_classes);
    for (std::size_t i = 0; i < noise.rows; ++i) {
        double* r = in.row(i);
        const double* z = noise.row(i);
        std::copy(z, z + noise.cols, r);
        std::fill(r + noise.cols, r + in.cols, 0.0);
        r[noise.cols + static_cast<std::size_t>(labels[i])] = 1.0;
    }
    return in;
}

Matrix draw_noise(std::size_t rows, std::size_t dim, double sigma, Rng& rng) {
    Matrix z(rows, dim);
    for (double& v : z.data) v = rng.normal(0.0, sigma);
    return z;
}

std::vector<int> draw_condition_labels(const std::vector<int>& pool, std::size_t count,
                                       Rng& rng) {
    std::vector<int> y(count);
    for (std::size_t i = 0; i < count; ++i) y[i] = pool[rng.index(pool.size())];
    return y;
}

Matrix rows_subset(const Matrix& src, const std::vector<std::size_t>& order, std::size_t begin,
                   std::size_t end) {
    Matrix out(end - begin, src.cols);
    for (std::size_t i = begin; i < end; ++i) {
        const double* r = src.row(order[i]);
        std::copy(r, r + src.cols, out.row(i - begin));
    }
    return out;
}

}  // namespace

GanTrainState make_gan_state(Model classifier, Model generator, const GanConfig& cfg,
                             std::size_t num_classes, const std::set<int>& condition_classes,
                             Rng& init_rng) {
    if (classifier.layers.size() < 2) {
        throw ConfigError("adversarial stage: classifier needs a hidden layer for the source head");
    }
    if (generator.input_dim() <= num_classes) {
        throw DimensionError("adversarial stage: generator input smaller than the label one-hot");
    }
    GanTrainState s;
    s.latent_dim = generator.input_dim() - num_classes;
    s.num_classes = num_classes;
    s.noise_sigma = cfg.sigma;
    const std::size_t trunk_width = classifier.layers[classifier.layers.size() - 2].fan_out();
    s.source_head = build_source_head(trunk_width, init_rng);
    s.classifier = std::move(classifier);
    s.generator = std::move(generator);
    s.gen_opt = OptimizerState::adam(cfg.eta, s.generator);
    s.cls_opt = OptimizerState::adam(cfg.eta, s.classifier);
    s.src_opt = OptimizerState::adam(cfg.eta, s.source_head);
    for (int cls : condition_classes) {
        if (cls < 0 || static_cast<std::size_t>(cls) >= num_classes) {
            throw ConfigError("adversarial stage: conditioning class " + std::to_string(cls) +
                              " out of range");
        }
        s.condition_classes.push_back(cls);
    }
    if (s.condition_classes.empty()) {
        throw ConfigError("adversarial stage: no conditioning classes");
    }
    return s;
}

void train_acgan(const ClientDataset& client, GanTrainState& state, std::size_t epochs,
                 std::size_t batch, Rng& rng) {
    if (epochs == 0) return;
    const std::size_t n = client.n_samples();
    if (n < 2) {
        throw std::runtime_error("adversarial training needs at least 2 samples, client " +
                                 std::to_string(client.client_id) + " has " + std::to_string(n));
    }
    if (batch == 0) throw ConfigError("adversarial training: batch size must be >= 1");
    if (client.features.cols != state.generator.output_dim()) {
        throw DimensionError("adversarial training: feature dim does not match the generator");
    }
    const std::size_t last = state.classifier.layers.size() - 1;   // softmax class head
    const std::size_t hidden = last - 1;                           // source head input layer
    const std::size_t gen_top = state.generator.layers.size() - 1;

    for (std::size_t e = 0; e < epochs; ++e) {
        const std::vector<std::size_t> order = rng.permutation(n);
        double d_sum = 0.0, g_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(start + batch, n);
            const std::size_t b = end - start;
            Matrix x_real = rows_subset(client.features, order, start, end);
            std::vector<int> y_real(b);
            for (std::size_t i = start; i < end; ++i) y_real[i - start] = client.labels[order[i]];
            const std::vector<double> ones(b, 1.0);
            const std::vector<double> zeros(b, 0.0);

            // --- discriminator step: real batch plus a generated batch ---
            const std::vector<int> y_fake = draw_condition_labels(state.condition_classes, b, rng);
            const Matrix noise = draw_noise(b, state.latent_dim, state.noise_sigma, rng);
            const ForwardCache gen_cache =
                forward(state.generator, generator_input(noise, y_fake, state.num_classes), false);

            auto head_pass = [&](const Matrix& x, const std::vector<int>& y,
                                 const std::vector<double>& src_target, Gradients& cls_acc,
                                 Gradients& src_acc, bool first) {
                const ForwardCache cls_cache = forward(state.classifier, x, true, &rng);
                const ForwardCache src_cache =
                    forward(state.source_head, cls_cache.layer_input(last), false);
                const double loss = cross_entropy_loss(cls_cache.output(), y) +
                                    binary_cross_entropy_loss(src_cache.output(), src_target);
                Gradients cls_g = backward(state.classifier, cls_cache, y);
                Gradients src_g = backward_from_delta(
                    state.source_head, src_cache, 0,
                    sigmoid_bce_delta(src_cache.output(), src_target));
                Matrix dh = delta_through_activation(state.classifier, cls_cache, hidden,
                                                     std::move(src_g.input));
                cls_g.add(backward_from_delta(state.classifier, cls_cache, hidden, std::move(dh)));
                if (first) {
                    cls_acc = std::move(cls_g);
                    src_acc = std::move(src_g);
                } else {
                    cls_acc.add(cls_g);
                    src_acc.add(src_g);
                }
                return loss;
            };

            Gradients cls_grad, src_grad;
            d_sum += head_pass(x_real, y_real, ones, cls_grad, src_grad, true);
            d_sum += head_pass(gen_cache.output(), y_fake, zeros, cls_grad, src_grad, false);
            optimizer_step(state.cls_opt, state.classifier, cls_grad);
            optimizer_step(state.src_opt, state.source_head, src_grad);

            // --- generator step: fresh fakes against the frozen heads ---
            const std::vector<int> y_gen = draw_condition_labels(state.condition_classes, b, rng);
            const Matrix noise2 = draw_noise(b, state.latent_dim, state.noise_sigma, rng);
            const ForwardCache gc =
                forward(state.generator, generator_input(noise2, y_gen, state.num_classes), false);
            const ForwardCache dc = forward(state.classifier, gc.output(), false);
            const ForwardCache sc = forward(state.source_head, dc.layer_input(last), false);
            g_sum += cross_entropy_loss(dc.output(), y_gen) +
                     binary_cross_entropy_loss(sc.output(), ones);
            Gradients via_class = backward(state.classifier, dc, y_gen);
            Gradients src_g = backward_from_delta(state.source_head, sc, 0,
                                                  sigmoid_bce_delta(sc.output(), ones));
            Matrix dh = delta_through_activation(state.classifier, dc, hidden,
                                                 std::move(src_g.input));
            const Gradients via_source =
                backward_from_delta(state.classifier, dc, hidden, std::move(dh));
            Matrix dx = std::move(via_class.input);
            for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += via_source.input.data[i];
            Matrix dgen = delta_through_activation(state.generator, gc, gen_top, std::move(dx));
            const Gradients gen_grad =
                backward_from_delta(state.generator, gc, gen_top, std::move(dgen));
            optimizer_step(state.gen_opt, state.generator, gen_grad);
            ++batches;
        }
        const double d_mean = d_sum / static_cast<double>(batches);
        const double g_mean = g_sum / static_cast<double>(batches);
        if (!std::isfinite(d_mean) || !std::isfinite(g_mean)) {
            throw DivergenceError("adversarial training diverged at epoch " +
                                  std::to_string(state.epoch + 1));
        }
        state.d_loss_history.push_back(d_mean);
        state.g_loss_history.push_back(g_mean);
        ++state.epoch;
    }
}

Matrix generate_class(const GanTrainState& state, int cls, std::size_t count, Rng& rng) {
    if (cls < 0 || static_cast<std::size_t>(cls) >= state.num_classes) {
        throw std::invalid_argument("generate: class " + std::to_string(cls) + " outside 0.." +
                                    std::to_string(state.num_classes - 1));
    }
    const std::vector<int> labels(count, cls);
    const Matrix noise = draw_noise(count, state.latent_dim, state.noise_sigma, rng);
    ForwardCache gc =
        forward(state.generator, generator_input(noise, labels, state.num_classes), false);
    return std::move(gc.layers.back().post);
}

SynthBatch generate_adversarial(const GanTrainState& state, const AugmentationPlan& plan,
                                Rng& rng) {
    for (const auto& [cls, target] : plan.targets) {
        if (cls <= 0 || static_cast<std::size_t>(cls) >= state.num_classes) {
            throw std::invalid_argument("augmentation plan references class " +
                                        std::to_string(cls) + " outside 1.." +
                                        std::to_string(state.num_classes - 1));
        }
        const std::size_t cur = plan.current.count(cls) ? plan.current.at(cls) : 0;
        if (target < cur) {
            throw std::invalid_argument("augmentation plan would shrink class " +
                                        std::to_string(cls));
        }
    }
    SynthBatch out;
    out.features = Matrix(plan.total_to_generate(), state.generator.output_dim());
    out.labels.reserve(out.features.rows);
    std::size_t row = 0;
    for (const auto& [cls, target] : plan.targets) {
        const std::size_t cur = plan.current.count(cls) ? plan.current.at(cls) : 0;
        const std::size_t missing = target - cur;
        if (missing == 0) continue;
        const Matrix x = generate_class(state, cls, missing, rng);
        std::copy(x.data.begin(), x.data.end(), out.features.row(row));
        row += missing;
        out.labels.insert(out.labels.end(), missing, cls);
    }
    return out;
}

ClientDataset merge_and_shuffle(const ClientDataset& real, const SynthBatch& synth, Rng& rng) {
    if (synth.features.rows != synth.labels.size()) {
        throw DimensionError("merge: synthetic features and labels disagree");
    }
    if (synth.features.rows > 0 && synth.features.cols != real.features.cols) {
        throw DimensionError("merge: feature dimension mismatch");
    }
    const std::size_t n_real = real.n_samples();
    const std::size_t n = n_real + synth.features.rows;
    const std::vector<std::size_t> perm = rng.permutation(n);

    ClientDataset out;
    out.client_id = real.client_id;
    out.features = Matrix(n, real.features.cols);
    out.labels.resize(n);
    out.synthetic.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = perm[i];
        const bool is_synth = src >= n_real;
        const double* from = is_synth ? synth.features.row(src - n_real) : real.features.row(src);
        std::copy(from, from + out.features.cols, out.features.row(i));
        out.labels[i] = is_synth ? synth.labels[src - n_real] : real.labels[src];
        out.synthetic[i] = is_synth ? 1 : 0;
        out.local_classes.insert(out.labels[i]);
    }
    return out;
}

}  // namespace fedat
