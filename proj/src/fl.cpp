#include "fedat/fl.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "fedat/errors.hpp"
#include "fedat/metrics.hpp"
#include "fedat/rng.hpp"

namespace fedat {

const char* aggregator_name(Aggregator a) {
    return a == Aggregator::FedAvg ? "fedavg" : "fedprox";
}

Aggregator aggregator_from_name(const std::string& name) {
    if (name == "fedavg") return Aggregator::FedAvg;
    if (name == "fedprox") return Aggregator::FedProx;
    throw ConfigError("unknown aggregator: " + name + " (expected fedavg or fedprox)");
}

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::Centralized: return "centralized";
        case Mode::ClassicalFL: return "classical_fl";
        case Mode::FedAT: return "fedat";
    }
    return "?";
}

Mode mode_from_name(const std::string& name) {
    if (name == "centralized") return Mode::Centralized;
    if (name == "classical_fl") return Mode::ClassicalFL;
    if (name == "fedat") return Mode::FedAT;
    throw ConfigError("unknown mode: " + name +
                      " (expected centralized, classical_fl or fedat)");
}

void FedConfig::validate() const {
    if (clients == 0) throw ConfigError("fed: clients must be >= 1");
    if (rounds == 0) throw ConfigError("fed: rounds must be >= 1");
    if (batch == 0) throw ConfigError("fed: batch must be >= 1");
    if (epochs == 0) throw ConfigError("fed: epochs must be >= 1");
    if (!(eta > 0.0)) throw ConfigError("fed: eta must be > 0");
    if (mu < 0.0) throw ConfigError("fed: mu must be >= 0");
}

ModelWeights fedavg_aggregate(std::vector<WeightedUpdate> updates) {
    if (updates.empty()) throw std::invalid_argument("aggregate: no client updates");
    std::sort(updates.begin(), updates.end(),
              [](const WeightedUpdate& a, const WeightedUpdate& b) {
                  return a.client_id < b.client_id;
              });
    std::size_t total = 0;
    for (const WeightedUpdate& u : updates) {
        if (u.n_samples == 0) {
            throw std::invalid_argument("aggregate: client " + std::to_string(u.client_id) +
                                        " reports zero samples");
        }
        if (!u.weights.same_shapes(updates.front().weights)) {
            throw DimensionError("aggregate: client " + std::to_string(u.client_id) +
                                 " sent mismatched weight shapes");
        }
        total += u.n_samples;
    }
    // Anchor on the first client and accumulate weighted deltas so that
    // identical updates (and K=1) aggregate to themselves bit-exactly.
    ModelWeights agg = updates.front().weights;
    const double inv_total = 1.0 / static_cast<double>(total);
    for (std::size_t k = 1; k < updates.size(); ++k) {  // anchor term is identically zero
        const WeightedUpdate& u = updates[k];
        const double c = static_cast<double>(u.n_samples) * inv_total;
        for (std::size_t l = 0; l < agg.layers.size(); ++l) {
            auto& w = agg.layers[l].weights.data;
            const auto& uw = u.weights.layers[l].weights.data;
            const auto& rw = updates.front().weights.layers[l].weights.data;
            for (std::size_t i = 0; i < w.size(); ++i) {
                // Skipping zero deltas keeps the anchor's values bit-exact;
                // adding c*0.0 would turn a negative zero positive.
                const double d = uw[i] - rw[i];
                if (d != 0.0) w[i] += c * d;
            }
            auto& b = agg.layers[l].bias;
            const auto& ub = u.weights.layers[l].bias;
            const auto& rb = updates.front().weights.layers[l].bias;
            for (std::size_t i = 0; i < b.size(); ++i) {
                const double d = ub[i] - rb[i];
                if (d != 0.0) b[i] += c * d;
            }
        }
    }
    return agg;
}

double fedprox_local_loss(double base, const ModelWeights& local, const ModelWeights& global,
                          double mu) {
    if (mu < 0.0) throw ConfigError("fedprox: mu must be >= 0");
    if (mu == 0.0) return base;
    return base + 0.5 * mu * squared_distance(local, global);
}

namespace {

// Adds mu * (w - w_global) to the gradients: the exact gradient of the
// proximal term (mu/2) * ||w - w_global||^2.
void add_proximal_term(Gradients& grads, const Model& model, const ModelWeights& w_global,
                       double mu) {
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& gw = grads.layers[l].dweights.data;
        const auto& w = model.layers[l].weights.data;
        const auto& g0 = w_global.layers[l].weights.data;
        for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += mu * (w[i] - g0[i]);
        auto& gb = grads.layers[l].dbias;
        const auto& b = model.layers[l].bias;
        const auto& b0 = w_global.layers[l].bias;
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += mu * (b[i] - b0[i]);
    }
}

Matrix batch_rows(const Matrix& src, const std::vector<std::size_t>& order, std::size_t begin,
                  std::size_t end) {
    Matrix out(end - begin, src.cols);
    for (std::size_t i = begin; i < end; ++i) {
        const double* r = src.row(order[i]);
        std::copy(r, r + src.cols, out.row(i - begin));
    }
    return out;
}

std::set<int> insider_classes(const std::set<int>& classes) {
    std::set<int> out;
    for (int c : classes) {
        if (c != 0) out.insert(c);
    }
    return out;
}

}  // namespace

ClientRoundResult client_update(ClientState& state, const ModelWeights& w_global,
                                const std::set<int>& aux_labels, const FedConfig& cfg,
                                const AugmentSettings& augment, std::size_t num_classes,
                                std::size_t round) {
    ClientRoundResult res;
    res.client_id = state.client_id;
    if (state.data.n_samples() == 0) {
        res.failure = "no local data";
        return res;
    }
    const std::uint64_t id = state.client_id;
    Rng order_rng(derive_seed(cfg.seed, {tag("client"), id, round, tag("order")}));
    Rng train_rng(derive_seed(cfg.seed, {tag("client"), id, round, tag("train")}));

    load_weights(state.classifier, w_global);

    SynthBatch synth;
    try {
        if (cfg.mode == Mode::FedAT) {
            Rng gan_init_rng(derive_seed(cfg.seed, {tag("client"), id, round, tag("gan-init")}));
            Rng gan_rng(derive_seed(cfg.seed, {tag("client"), id, round, tag("gan")}));
            Rng synth_rng(derive_seed(cfg.seed, {tag("client"), id, round, tag("synth")}));

            // Conditioning set: local insider classes plus whatever the
            // server has unioned so far.
            std::set<int> condition = insider_classes(state.data.local_classes);
            const std::set<int> aux_insiders = insider_classes(aux_labels);
            condition.insert(aux_insiders.begin(), aux_insiders.end());

            if (!state.has_generator) {
                GeneratorSpec gs;
                gs.latent_dim = state.data.features.cols;
                gs.num_classes = num_classes;
                gs.output_dim = state.data.features.cols;
                gs.hidden = augment.gan.hidden;
                Rng gen_rng(derive_seed(cfg.seed, {tag("client"), id, tag("gen")}));
                state.generator = build_generator(gs, gen_rng);
                state.has_generator = true;
            }
            // Copies go in so a divergence mid-phase leaves the client's
            // models intact for the next round.
            GanTrainState gstate = make_gan_state(state.classifier, state.generator, augment.gan,
                                                  num_classes, condition, gan_init_rng);
            train_acgan(state.data, gstate, augment.gan.epochs, augment.gan.batch, gan_rng);
            ++state.gan_invocations;

            const AugmentationPlan plan = plan_balancing(state.data, augment.target, aux_labels,
                                                         augment.global_count);
            synth = generate_adversarial(gstate, plan, synth_rng);
            state.classifier = std::move(gstate.classifier);
            state.generator = std::move(gstate.generator);

            const std::vector<std::size_t> local = state.data.class_counts(num_classes);
            for (std::size_t c = 0; c < num_classes; ++c) {
                const int cls = static_cast<int>(c);
                const bool planned = plan.targets.count(cls) > 0;
                if (local[c] == 0 && !planned) continue;
                AugmentationRecord rec;
                rec.client_id = state.client_id;
                rec.round = round;
                rec.cls = cls;
                rec.real_count = local[c];
                rec.synth_count = planned ? plan.targets.at(cls) - plan.current.at(cls) : 0;
                res.augmentation.push_back(rec);
            }
        }

        const ClientDataset merged = merge_and_shuffle(state.data, synth, order_rng);
        const std::size_t n = merged.n_samples();
        double loss_sum = 0.0;
        std::size_t seen = 0;
        const bool prox = cfg.aggregator == Aggregator::FedProx && cfg.mu > 0.0;
        for (std::size_t e = 0; e < cfg.epochs; ++e) {
            const std::vector<std::size_t> order = order_rng.permutation(n);
            for (std::size_t start = 0; start < n; start += cfg.batch) {
                const std::size_t end = std::min(start + cfg.batch, n);
                const Matrix x = batch_rows(merged.features, order, start, end);
                std::vector<int> y(end - start);
                for (std::size_t i = start; i < end; ++i) y[i - start] = merged.labels[order[i]];
                const ForwardCache cache = forward(state.classifier, x, true, &train_rng);
                const double loss = cross_entropy_loss(cache.output(), y);
                Gradients grads = backward(state.classifier, cache, y);
                if (prox) add_proximal_term(grads, state.classifier, w_global, cfg.mu);
                if (!std::isfinite(loss) || !grads.all_finite()) {
                    throw DivergenceError("loss diverged in local epoch " + std::to_string(e + 1));
                }
                OptimizerState sgd = OptimizerState::sgd(cfg.eta);
                optimizer_step(sgd, state.classifier, grads);
                loss_sum += loss * static_cast<double>(end - start);
                seen += end - start;
            }
        }
        res.mean_train_loss = loss_sum / static_cast<double>(seen);
    } catch (const DivergenceError& e) {
        res.failure = e.what();
        return res;
    }

    res.ok = true;
    res.n_samples = state.data.n_samples();
    res.weights = extract_weights(state.classifier);
    res.local_classes = state.data.local_classes;
    return res;
}

RoundReport server_round(ServerState& server, std::vector<ClientState>& clients,
                         const FedConfig& cfg, const AugmentSettings& augment,
                         std::vector<AugmentationRecord>& augmentation_log,
                         std::vector<std::string>& warnings, bool weighted_metrics) {
    if (server.test == nullptr) throw std::logic_error("server_round: no test set attached");
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t round = server.round + 1;
    const ModelWeights w_global = extract_weights(server.global);
    const std::size_t num_classes = server.global.output_dim();

    std::vector<ClientRoundResult> results(clients.size());
    for (std::size_t k = 0; k < clients.size(); ++k) {
        results[k] = client_update(clients[k], w_global, server.aux_labels, cfg, augment,
                                   num_classes, round);
    }

    std::vector<WeightedUpdate> updates;
    double loss_sum = 0.0;
    std::size_t responders = 0;
    for (ClientRoundResult& r : results) {
        augmentation_log.insert(augmentation_log.end(), r.augmentation.begin(),
                                r.augmentation.end());
        if (!r.ok) {
            warnings.push_back("round " + std::to_string(round) + ": client " +
                               std::to_string(r.client_id) + " excluded: " + r.failure);
            continue;
        }
        updates.push_back({r.client_id, r.n_samples, std::move(r.weights)});
        server.aux_labels.insert(r.local_classes.begin(), r.local_classes.end());
        loss_sum += r.mean_train_loss;
        ++responders;
    }
    if (updates.empty()) {
        throw std::runtime_error("round " + std::to_string(round) + ": all clients failed");
    }

    const ModelWeights aggregated = fedavg_aggregate(std::move(updates));
    load_weights(server.global, aggregated);
    server.round = round;

    // Score the new global model on the held-out test set.
    const Dataset& test = *server.test;
    const ForwardCache cache = forward(server.global, test.features, false);
    std::vector<int> pred(test.n());
    for (std::size_t i = 0; i < test.n(); ++i) {
        const double* row = cache.output().row(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < num_classes; ++j) {
            if (row[j] > row[best]) best = j;
        }
        pred[i] = static_cast<int>(best);
    }
    const ConfusionMatrix cm = confusion(test.labels, pred, num_classes);
    const PrfResult prf = weighted_metrics ? weighted_prf(cm) : macro_prf(cm);

    RoundReport rep;
    rep.round = round;
    rep.precision = prf.precision;
    rep.recall = prf.recall;
    rep.f1 = prf.f1;
    rep.mean_train_loss = loss_sum / static_cast<double>(responders);
    const auto t1 = std::chrono::steady_clock::now();
    rep.duration_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return rep;
}

FederationRun run_federation(const Dataset& train, const Dataset& test, const RunSettings& s) {
    s.fed.validate();
    if (train.num_classes() != test.num_classes()) {
        throw ConfigError("federation: train and test class sets differ");
    }
    const std::size_t num_classes = train.num_classes();

    ClassifierSpec cs;
    cs.input_dim = train.dim();
    cs.num_classes = num_classes;
    cs.hidden = s.hidden;
    cs.dropout_rate = s.dropout_rate;
    Rng init_rng(derive_seed(s.fed.seed, {tag("global-init")}));
    Model global = build_classifier(s.model_kind, cs, init_rng);

    // Centralized mode pools everything into one client of a K=1 federation;
    // every other mode partitions scenarios across K clients.
    std::vector<ClientDataset> parts;
    if (s.fed.mode == Mode::Centralized) {
        ClientDataset all;
        all.client_id = 0;
        all.features = train.features;
        all.labels = train.labels;
        for (int y : train.labels) all.local_classes.insert(y);
        parts.push_back(std::move(all));
    } else {
        Rng part_rng(derive_seed(s.fed.seed, {tag("partition")}));
        parts = partition_non_iid(train, s.fed.clients, part_rng,
                                  s.assignment.empty() ? nullptr : &s.assignment);
    }

    std::vector<ClientState> clients(parts.size());
    for (std::size_t k = 0; k < parts.size(); ++k) {
        clients[k].client_id = parts[k].client_id;
        clients[k].data = std::move(parts[k]);
        clients[k].classifier = global;  // shape template; weights loaded each round
    }

    FedConfig cfg = s.fed;
    if (cfg.mode == Mode::Centralized) {
        cfg.mode = Mode::ClassicalFL;  // plain local training, K=1 identity aggregation
        cfg.clients = 1;
    }

    ServerState server;
    server.global = std::move(global);
    server.test = &test;

    FederationRun run;
    for (std::size_t t = 0; t < s.fed.rounds; ++t) {
        RoundReport rep = server_round(server, clients, cfg, s.augment, run.augmentation,
                                       run.warnings, s.weighted_metrics);
        if (s.on_round) s.on_round(rep);
        run.reports.push_back(rep);
    }
    for (const ClientState& c : clients) run.gan_invocations += c.gan_invocations;
    run.final_model = std::move(server.global);
    return run;
}

}  // namespace fedat
