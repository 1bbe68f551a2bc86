#include "fedat/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "fedat/errors.hpp"
#include "fedat/rng.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace fedat {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

void check_keys(const ordered_json& sec, const std::string& name,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : sec.items()) {
        bool known = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) fail(name + "." + item.key(), "unknown key");
    }
}

double get_number(const ordered_json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

std::uint64_t get_count(const ordered_json& v, const std::string& path) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<long long>() < 0)) {
        fail(path, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::string get_string(const ordered_json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

bool get_bool(const ordered_json& v, const std::string& path) {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
}

// Accepts a scalar string or an array of strings (a one-axis run matrix).
std::vector<std::string> get_string_list(const ordered_json& v, const std::string& path) {
    if (v.is_string()) return {v.get<std::string>()};
    if (!v.is_array() || v.empty()) fail(path, "expected a string or non-empty array of strings");
    std::vector<std::string> out;
    for (const auto& el : v) {
        if (!el.is_string()) fail(path, "expected only strings");
        out.push_back(el.get<std::string>());
    }
    return out;
}

std::vector<std::uint64_t> get_count_list(const ordered_json& v, const std::string& path) {
    if (v.is_number()) return {get_count(v, path)};
    if (!v.is_array() || v.empty()) fail(path, "expected an integer or non-empty array");
    std::vector<std::uint64_t> out;
    for (const auto& el : v) out.push_back(get_count(el, path));
    return out;
}

std::vector<std::size_t> get_size_list(const ordered_json& v, const std::string& path) {
    std::vector<std::size_t> out;
    for (std::uint64_t x : get_count_list(v, path)) out.push_back(static_cast<std::size_t>(x));
    return out;
}

template <typename T, typename FromName>
std::vector<T> parse_enum_list(const ordered_json& v, const std::string& path, FromName from) {
    std::vector<T> out;
    for (const std::string& s : get_string_list(v, path)) {
        T value;
        try {
            value = from(s);
        } catch (const ConfigError& e) {
            fail(path, e.what());
        }
        if (std::find(out.begin(), out.end(), value) != out.end()) {
            fail(path, "duplicate entry '" + s + "'");
        }
        out.push_back(value);
    }
    return out;
}

}  // namespace

ExperimentSpec parse_config_text(const std::string& text, const std::string& origin) {
    ordered_json root;
    try {
        root = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");
    for (const auto& item : root.items()) {
        const std::string& k = item.key();
        if (k != "dataset" && k != "synth" && k != "fed" && k != "model" && k != "gan" &&
            k != "augment" && k != "eval") {
            fail(k, "unknown config section");
        }
        if (!item.value().is_object()) fail(k, "section must be an object");
    }

    ExperimentSpec spec;

    if (root.contains("dataset")) {
        const ordered_json& sec = root["dataset"];
        check_keys(sec, "dataset", {"csv", "test_fraction"});
        if (sec.contains("csv")) spec.dataset_csv = get_string(sec["csv"], "dataset.csv");
        if (sec.contains("test_fraction")) {
            spec.test_fraction = get_number(sec["test_fraction"], "dataset.test_fraction");
            if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
                fail("dataset.test_fraction", "must be in (0, 1)");
            }
        }
    }

    if (root.contains("synth")) {
        const ordered_json& sec = root["synth"];
        check_keys(sec, "synth", {"classes", "counts", "dim", "separation", "seed"});
        if (sec.contains("counts")) {
            spec.synth.counts.clear();
            if (!sec["counts"].is_array() || sec["counts"].empty()) {
                fail("synth.counts", "expected a non-empty array");
            }
            for (const auto& el : sec["counts"]) {
                const std::uint64_t c = get_count(el, "synth.counts");
                if (c == 0) fail("synth.counts", "every class needs at least one sample");
                spec.synth.counts.push_back(static_cast<std::size_t>(c));
            }
            spec.synth.num_classes = spec.synth.counts.size();
        }
        if (sec.contains("classes")) {
            spec.synth.num_classes =
                static_cast<std::size_t>(get_count(sec["classes"], "synth.classes"));
            if (spec.synth.num_classes < 2) fail("synth.classes", "must be >= 2");
        }
        if (sec.contains("dim")) {
            spec.synth.dim = static_cast<std::size_t>(get_count(sec["dim"], "synth.dim"));
            if (spec.synth.dim < 2) fail("synth.dim", "must be >= 2");
        }
        if (sec.contains("separation")) {
            spec.synth.separation = get_number(sec["separation"], "synth.separation");
            if (!(spec.synth.separation > 0.0)) fail("synth.separation", "must be > 0");
        }
        if (sec.contains("seed")) {
            spec.synth.seed = get_count(sec["seed"], "synth.seed");
            spec.synth_seed_set = true;
        }
    }
    if (spec.synth.counts.empty()) {
        // CERT-shaped default profile: one dominant class, three small ones.
        spec.synth.counts = {5000, 60, 50, 40};
        spec.synth.num_classes = root.contains("synth") && root["synth"].contains("classes")
                                     ? spec.synth.num_classes
                                     : 4;
    }
    if (spec.synth.counts.size() != spec.synth.num_classes) {
        fail("synth.counts", "expected one entry per class (synth.classes = " +
                                 std::to_string(spec.synth.num_classes) + ")");
    }

    if (root.contains("fed")) {
        const ordered_json& sec = root["fed"];
        check_keys(sec, "fed", {"K", "T", "B", "E", "eta", "mu", "aggregator", "mode",
                                "assignment"});
        if (sec.contains("K")) {
            spec.fed.clients = static_cast<std::size_t>(get_count(sec["K"], "fed.K"));
            if (spec.fed.clients == 0) fail("fed.K", "must be >= 1");
        }
        if (sec.contains("T")) {
            spec.fed.rounds = static_cast<std::size_t>(get_count(sec["T"], "fed.T"));
            if (spec.fed.rounds == 0) fail("fed.T", "must be >= 1");
        }
        if (sec.contains("B")) {
            spec.fed.batch = static_cast<std::size_t>(get_count(sec["B"], "fed.B"));
            if (spec.fed.batch == 0) fail("fed.B", "must be >= 1");
        }
        if (sec.contains("E")) {
            spec.fed.epochs = static_cast<std::size_t>(get_count(sec["E"], "fed.E"));
            if (spec.fed.epochs == 0) fail("fed.E", "must be >= 1");
        }
        if (sec.contains("eta")) {
            spec.fed.eta = get_number(sec["eta"], "fed.eta");
            if (!(spec.fed.eta > 0.0)) fail("fed.eta", "must be > 0");
        }
        if (sec.contains("mu")) {
            spec.fed.mu = get_number(sec["mu"], "fed.mu");
            if (spec.fed.mu < 0.0) fail("fed.mu", "must be >= 0");
        }
        if (sec.contains("aggregator")) {
            spec.aggregators =
                parse_enum_list<Aggregator>(sec["aggregator"], "fed.aggregator",
                                            aggregator_from_name);
        }
        if (sec.contains("mode")) {
            spec.modes = parse_enum_list<Mode>(sec["mode"], "fed.mode", mode_from_name);
        }
        if (sec.contains("assignment")) {
            const ordered_json& a = sec["assignment"];
            if (!a.is_object()) fail("fed.assignment", "expected an object {class: client}");
            for (const auto& item : a.items()) {
                char* end = nullptr;
                const long cls = std::strtol(item.key().c_str(), &end, 10);
                if (end == item.key().c_str() || *end != '\0' || cls < 1) {
                    fail("fed.assignment", "class key '" + item.key() +
                                               "' is not a scenario class index");
                }
                spec.assignment[static_cast<int>(cls)] = static_cast<std::size_t>(
                    get_count(item.value(), "fed.assignment." + item.key()));
            }
        }
    }

    if (root.contains("model")) {
        const ordered_json& sec = root["model"];
        check_keys(sec, "model", {"kind", "hidden", "dropout"});
        if (sec.contains("kind")) {
            spec.model_kinds =
                parse_enum_list<ModelKind>(sec["kind"], "model.kind", model_kind_from_name);
        }
        if (sec.contains("hidden")) {
            spec.hidden = get_size_list(sec["hidden"], "model.hidden");
            if (spec.hidden.empty()) fail("model.hidden", "must not be empty");
            for (std::size_t w : spec.hidden) {
                if (w == 0) fail("model.hidden", "layer widths must be >= 1");
            }
        }
        if (sec.contains("dropout")) {
            spec.dropout = get_number(sec["dropout"], "model.dropout");
            if (spec.dropout < 0.0 || spec.dropout >= 1.0) fail("model.dropout", "must be in [0, 1)");
        }
    }

    if (root.contains("gan")) {
        const ordered_json& sec = root["gan"];
        check_keys(sec, "gan", {"epochs", "batch", "sigma", "eta", "hidden"});
        if (sec.contains("epochs")) {
            spec.gan.epochs = static_cast<std::size_t>(get_count(sec["epochs"], "gan.epochs"));
        }
        if (sec.contains("batch")) {
            spec.gan.batch = static_cast<std::size_t>(get_count(sec["batch"], "gan.batch"));
            if (spec.gan.batch == 0) fail("gan.batch", "must be >= 1");
        }
        if (sec.contains("sigma")) {
            spec.gan.sigma = get_number(sec["sigma"], "gan.sigma");
            if (!(spec.gan.sigma > 0.0)) fail("gan.sigma", "must be > 0");
        }
        if (sec.contains("eta")) {
            spec.gan.eta = get_number(sec["eta"], "gan.eta");
            if (!(spec.gan.eta > 0.0)) fail("gan.eta", "must be > 0");
        }
        if (sec.contains("hidden")) {
            spec.gan.hidden = get_size_list(sec["hidden"], "gan.hidden");
            if (spec.gan.hidden.empty()) fail("gan.hidden", "must not be empty");
            for (std::size_t w : spec.gan.hidden) {
                if (w == 0) fail("gan.hidden", "layer widths must be >= 1");
            }
        }
    }

    if (root.contains("augment")) {
        const ordered_json& sec = root["augment"];
        check_keys(sec, "augment", {"target", "global_count"});
        if (sec.contains("target")) {
            try {
                spec.target = balance_mode_from_name(get_string(sec["target"], "augment.target"));
            } catch (const ConfigError& e) {
                fail("augment.target", e.what());
            }
        }
        if (sec.contains("global_count")) {
            spec.global_count =
                static_cast<std::size_t>(get_count(sec["global_count"], "augment.global_count"));
        }
    }

    if (root.contains("eval")) {
        const ordered_json& sec = root["eval"];
        check_keys(sec, "eval", {"seeds", "weighted"});
        if (sec.contains("seeds")) {
            spec.seeds = get_count_list(sec["seeds"], "eval.seeds");
            if (spec.seeds.empty()) fail("eval.seeds", "need at least one seed");
        }
        if (sec.contains("weighted")) {
            spec.weighted_metrics = get_bool(sec["weighted"], "eval.weighted");
        }
    }

    return spec;
}

ExperimentSpec parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::string effective_config_text(const ExperimentSpec& spec) {
    ordered_json root;
    root["dataset"] = {{"csv", spec.dataset_csv}, {"test_fraction", spec.test_fraction}};
    ordered_json synth = {{"classes", spec.synth.num_classes},
                          {"counts", spec.synth.counts},
                          {"dim", spec.synth.dim},
                          {"separation", spec.synth.separation}};
    if (spec.synth_seed_set) synth["seed"] = spec.synth.seed;
    root["synth"] = synth;
    ordered_json fed = {{"K", spec.fed.clients}, {"T", spec.fed.rounds},
                        {"B", spec.fed.batch},   {"E", spec.fed.epochs},
                        {"eta", spec.fed.eta},   {"mu", spec.fed.mu}};
    ordered_json aggs = ordered_json::array();
    for (Aggregator a : spec.aggregators) aggs.push_back(aggregator_name(a));
    fed["aggregator"] = aggs;
    ordered_json modes = ordered_json::array();
    for (Mode m : spec.modes) modes.push_back(mode_name(m));
    fed["mode"] = modes;
    if (!spec.assignment.empty()) {
        ordered_json a;
        for (const auto& [cls, client] : spec.assignment) a[std::to_string(cls)] = client;
        fed["assignment"] = a;
    }
    root["fed"] = fed;
    ordered_json kinds = ordered_json::array();
    for (ModelKind k : spec.model_kinds) kinds.push_back(model_kind_name(k));
    root["model"] = {{"kind", kinds}, {"hidden", spec.hidden}, {"dropout", spec.dropout}};
    root["gan"] = {{"epochs", spec.gan.epochs},
                   {"batch", spec.gan.batch},
                   {"sigma", spec.gan.sigma},
                   {"eta", spec.gan.eta},
                   {"hidden", spec.gan.hidden}};
    root["augment"] = {{"target", balance_mode_name(spec.target)},
                       {"global_count", spec.global_count}};
    root["eval"] = {{"seeds", spec.seeds}, {"weighted", spec.weighted_metrics}};
    return root.dump(2) + "\n";
}

Dataset materialize_dataset(const ExperimentSpec& spec, std::uint64_t run_seed) {
    if (!spec.dataset_csv.empty()) return load_csv(spec.dataset_csv);
    SynthSpec s = spec.synth;
    if (!spec.synth_seed_set) s.seed = derive_seed(run_seed, {tag("synth-data")});
    Rng rng(s.seed);
    return synthesize_cert_like(s, rng);
}

namespace {

struct RunJob {
    Mode mode;
    ModelKind kind;
    Aggregator agg;
    std::uint64_t seed;
    std::string name;
    std::string combo;  // name without the seed suffix
};

std::string format_round(const RoundReport& r) {
    char line[256];
    std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g,%.17g,%.3f\n", r.round, r.precision,
                  r.recall, r.f1, r.mean_train_loss, r.duration_ms);
    return line;
}

RunOutcome run_one(const ExperimentSpec& spec, const RunJob& job, const fs::path& out_dir) {
    RunOutcome o;
    o.name = job.name;
    o.mode = job.mode;
    o.model = job.kind;
    o.aggregator = job.agg;
    o.seed = job.seed;
    const fs::path dir = out_dir / job.name;
    try {
        fs::create_directories(dir);

        // Pin this run's coordinates so the written config reruns exactly
        // this run.
        ExperimentSpec pinned = spec;
        pinned.modes = {job.mode};
        pinned.model_kinds = {job.kind};
        pinned.aggregators = {job.agg};
        pinned.seeds = {job.seed};
        if (spec.dataset_csv.empty() && !spec.synth_seed_set) {
            pinned.synth.seed = derive_seed(job.seed, {tag("synth-data")});
            pinned.synth_seed_set = true;
        }
        {
            std::ofstream f(dir / "effective-config", std::ios::binary);
            f << effective_config_text(pinned);
            if (!f) throw std::runtime_error("cannot write " + (dir / "effective-config").string());
        }

        Dataset full = materialize_dataset(spec, job.seed);
        Rng split_rng(derive_seed(job.seed, {tag("split")}));
        SplitResult split = train_test_split(full, spec.test_fraction, split_rng);
        standardize(split.train, {&split.test});

        RunSettings rs;
        rs.fed = spec.fed;
        rs.fed.seed = job.seed;
        rs.fed.mode = job.mode;
        rs.fed.aggregator = job.agg;
        rs.model_kind = job.kind;
        rs.hidden = spec.hidden;
        rs.dropout_rate = spec.dropout;
        rs.augment.gan = spec.gan;
        rs.augment.target = spec.target;
        rs.augment.global_count = spec.global_count;
        rs.weighted_metrics = spec.weighted_metrics;
        rs.assignment = spec.assignment;

        std::ofstream rounds(dir / "rounds.csv", std::ios::binary);
        if (!rounds) throw std::runtime_error("cannot write " + (dir / "rounds.csv").string());
        rounds << "round,precision,recall,f1,mean_train_loss,duration_ms\n";
        rounds.flush();
        rs.on_round = [&rounds](const RoundReport& r) {
            rounds << format_round(r);
            rounds.flush();  // crash-safe: every finished round is on disk
        };

        FederationRun run = run_federation(split.train, split.test, rs);
        rounds.close();

        {
            std::ofstream aug(dir / "augmentation.csv", std::ios::binary);
            aug << "client,round,class,real_count,synth_count\n";
            for (const AugmentationRecord& r : run.augmentation) {
                aug << r.client_id << ',' << r.round << ',' << r.cls << ',' << r.real_count << ','
                    << r.synth_count << '\n';
            }
        }
        save_model(run.final_model, (dir / "model.ckpt").string());
        if (!split.warnings.empty() || !run.warnings.empty()) {
            std::ofstream w(dir / "warnings.log", std::ios::binary);
            for (const std::string& s : split.warnings) w << s << '\n';
            for (const std::string& s : run.warnings) w << s << '\n';
        }
        o.ok = true;
        o.final_round = run.reports.back();
    } catch (const std::exception& e) {
        o.ok = false;
        o.error = e.what();
    }
    return o;
}

void write_summary(const std::vector<RunJob>& jobs, const std::vector<RunOutcome>& outcomes,
                   const fs::path& out_dir) {
    std::ofstream f(out_dir / "summary.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (out_dir / "summary.csv").string());
    f << "mode,model,aggregator,seeds,status,precision_mean,precision_sd,recall_mean,recall_sd,"
         "f1_mean,f1_sd\n";
    std::vector<std::string> seen;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const std::string& combo = jobs[i].combo;
        if (std::find(seen.begin(), seen.end(), combo) != seen.end()) continue;
        seen.push_back(combo);

        std::vector<double> p, r, f1;
        std::size_t total = 0, failed = 0;
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            if (jobs[j].combo != combo) continue;
            ++total;
            if (!outcomes[j].ok) {
                ++failed;
                continue;
            }
            p.push_back(outcomes[j].final_round.precision);
            r.push_back(outcomes[j].final_round.recall);
            f1.push_back(outcomes[j].final_round.f1);
        }
        auto mean_sd = [](const std::vector<double>& v) {
            if (v.empty()) {
                return std::pair<double, double>(std::nan(""), std::nan(""));
            }
            double m = 0.0;
            for (double x : v) m += x;
            m /= static_cast<double>(v.size());
            double s = 0.0;
            for (double x : v) s += (x - m) * (x - m);
            s = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
            return std::pair<double, double>(m, s);
        };
        const auto [pm, ps] = mean_sd(p);
        const auto [rm, rsd] = mean_sd(r);
        const auto [fm, fsd] = mean_sd(f1);
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", pm, ps, rm, rsd,
                      fm, fsd);
        f << mode_name(jobs[i].mode) << ',' << model_kind_name(jobs[i].kind) << ','
          << aggregator_name(jobs[i].agg) << ',' << total << ','
          << (failed == 0 ? std::string("ok")
                          : "failed(" + std::to_string(failed) + "/" + std::to_string(total) + ")")
          << ',' << buf;
    }
}

}  // namespace

MatrixResult run_matrix(const ExperimentSpec& spec, const std::string& out_dir,
                        std::size_t workers) {
    const fs::path out(out_dir);
    fs::create_directories(out);
    {
        std::ofstream f(out / "effective-config", std::ios::binary);
        f << effective_config_text(spec);
        if (!f) throw std::runtime_error("cannot write " + (out / "effective-config").string());
    }

    std::vector<RunJob> jobs;
    for (Mode mode : spec.modes) {
        for (ModelKind kind : spec.model_kinds) {
            for (Aggregator agg : spec.aggregators) {
                for (std::uint64_t seed : spec.seeds) {
                    RunJob j{mode, kind, agg, seed, "", ""};
                    j.combo = std::string(mode_name(mode)) + "_" + model_kind_name(kind) + "_" +
                              aggregator_name(agg);
                    j.name = j.combo + "_seed" + std::to_string(seed);
                    jobs.push_back(std::move(j));
                }
            }
        }
    }

    MatrixResult res;
    res.runs.resize(jobs.size());
    const int n = static_cast<int>(jobs.size());
#pragma omp parallel for schedule(dynamic) num_threads(static_cast<int>(workers)) if (workers > 1)
    for (int i = 0; i < n; ++i) {
        res.runs[static_cast<std::size_t>(i)] = run_one(spec, jobs[static_cast<std::size_t>(i)], out);
    }
    for (const RunOutcome& o : res.runs) {
        if (!o.ok) ++res.failures;
    }
    write_summary(jobs, res.runs, out);
    return res;
}

namespace {

struct RoundSeries {
    std::vector<double> precision, recall, f1, loss;
};

RoundSeries read_rounds(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("plots: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("plots: " + path.string() + " is empty");
    RoundSeries s;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> cols;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cols.push_back(std::strtod(cell.c_str(), nullptr));
        if (cols.size() < 5) {
            throw std::runtime_error("plots: malformed row in " + path.string());
        }
        s.precision.push_back(cols[1]);
        s.recall.push_back(cols[2]);
        s.f1.push_back(cols[3]);
        s.loss.push_back(cols[4]);
    }
    return s;
}

void write_long_format(const fs::path& path, const RoundSeries& s) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("plots: cannot write " + path.string());
    f << "series,round,value\n";
    char buf[64];
    auto emit = [&](const char* name, const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
            f << name << ',' << (i + 1) << ',' << buf << '\n';
        }
    };
    emit("precision", s.precision);
    emit("recall", s.recall);
    emit("f1", s.f1);
    emit("loss", s.loss);
}

void write_mean_sd(const fs::path& path, const std::vector<RoundSeries>& group) {
    std::size_t rounds = group.front().f1.size();
    for (const RoundSeries& s : group) rounds = std::min(rounds, s.f1.size());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("plots: cannot write " + path.string());
    f << "series,round,mean,sd\n";
    char buf[128];
    auto emit = [&](const char* name, auto member) {
        for (std::size_t i = 0; i < rounds; ++i) {
            double m = 0.0;
            for (const RoundSeries& s : group) m += (s.*member)[i];
            m /= static_cast<double>(group.size());
            double sd = 0.0;
            for (const RoundSeries& s : group) {
                sd += ((s.*member)[i] - m) * ((s.*member)[i] - m);
            }
            sd = group.size() > 1 ? std::sqrt(sd / static_cast<double>(group.size() - 1)) : 0.0;
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g", m, sd);
            f << name << ',' << (i + 1) << ',' << buf << '\n';
        }
    };
    emit("precision", &RoundSeries::precision);
    emit("recall", &RoundSeries::recall);
    emit("f1", &RoundSeries::f1);
    emit("loss", &RoundSeries::loss);
}

// "<combo>_seed<k>" -> "<combo>"; anything else maps to itself.
std::string combo_of(const std::string& name) {
    const std::size_t pos = name.rfind("_seed");
    if (pos == std::string::npos) return name;
    for (std::size_t i = pos + 5; i < name.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) return name;
    }
    return name.size() > pos + 5 ? name.substr(0, pos) : name;
}

}  // namespace

void emit_plots_data(const std::string& dir) {
    const fs::path root(dir);
    std::vector<std::pair<std::string, fs::path>> entries;  // (run name, rounds.csv)
    if (fs::exists(root / "rounds.csv")) {
        entries.emplace_back(root.filename().string(), root / "rounds.csv");
    } else if (fs::is_directory(root)) {
        for (const auto& e : fs::directory_iterator(root)) {
            if (e.is_directory() && fs::exists(e.path() / "rounds.csv")) {
                entries.emplace_back(e.path().filename().string(), e.path() / "rounds.csv");
            }
        }
        std::sort(entries.begin(), entries.end());
    }
    if (entries.empty()) {
        throw std::runtime_error("plots: no rounds.csv found under " + dir);
    }
    const fs::path plots = root / "plots";
    fs::create_directories(plots);

    std::vector<std::string> combos;
    std::map<std::string, std::vector<RoundSeries>> grouped;
    for (const auto& [name, path] : entries) {
        const RoundSeries s = read_rounds(path);
        write_long_format(plots / (name + ".csv"), s);
        const std::string combo = combo_of(name);
        if (!grouped.count(combo)) combos.push_back(combo);
        grouped[combo].push_back(s);
    }
    for (const std::string& combo : combos) {
        write_mean_sd(plots / (combo + "_mean.csv"), grouped[combo]);
    }
}

}  // namespace fedat
