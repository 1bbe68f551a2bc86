#include "fedat/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fedat/errors.hpp"

namespace fedat {

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(num_classes(), 0);
    for (int y : labels) ++counts[static_cast<std::size_t>(y)];
    return counts;
}

std::vector<std::size_t> ClientDataset::class_counts(std::size_t num_classes) const {
    std::vector<std::size_t> counts(num_classes, 0);
    for (int y : labels) ++counts[static_cast<std::size_t>(y)];
    return counts;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// row and col are 1-based in the error message.
double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw std::runtime_error("csv: non-numeric value '" + cell + "' at data row " +
                                 std::to_string(row) + ", column " + std::to_string(col));
    }
    return v;
}

}  // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: " + path + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);
    if (header.size() < 2 || header.back() != "label") {
        throw std::runtime_error("csv: header must end with a 'label' column");
    }
    const std::size_t dim = header.size() - 1;

    std::vector<double> values;
    std::vector<std::string> tokens;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error("csv: data row " + std::to_string(row) + " has " +
                                     std::to_string(cells.size()) + " fields, expected " +
                                     std::to_string(header.size()));
        }
        for (std::size_t j = 0; j < dim; ++j) values.push_back(parse_cell(cells[j], row, j + 1));
        tokens.push_back(cells.back());
    }
    if (row == 0) throw std::runtime_error("csv: " + path + " has no data rows");

    // Token "normal" or "0" is the non-malicious class and gets index 0;
    // everything else keeps first-appearance order.
    Dataset ds;
    const bool has_normal =
        std::find(tokens.begin(), tokens.end(), "normal") != tokens.end() ||
        std::find(tokens.begin(), tokens.end(), "0") != tokens.end();
    std::map<std::string, int> index;
    if (has_normal) {
        ds.class_names.push_back("normal");
        for (const std::string& t : tokens) {
            if (t == "normal" || t == "0") index[t] = 0;
        }
    }
    ds.labels.reserve(tokens.size());
    for (const std::string& t : tokens) {
        auto it = index.find(t);
        if (it == index.end()) {
            it = index.emplace(t, static_cast<int>(ds.class_names.size())).first;
            ds.class_names.push_back(t);
        }
        ds.labels.push_back(it->second);
    }
    ds.features = Matrix(row, dim);
    ds.features.data = std::move(values);
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("csv: cannot open " + path + " for writing");
    for (std::size_t j = 0; j < ds.dim(); ++j) out << 'f' << j << ',';
    out << "label\n";
    char buf[32];
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const double* r = ds.features.row(i);
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", r[j]);
            out << buf << ',';
        }
        out << ds.class_names[static_cast<std::size_t>(ds.labels[i])] << '\n';
    }
    if (!out) throw std::runtime_error("csv: failed writing " + path);
}

namespace {

void apply_scaling(const FeatureScaling& s, Dataset& ds, bool clip) {
    for (std::size_t i = 0; i < ds.n(); ++i) {
        double* r = ds.features.row(i);
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            double v = s.scale[j] == 0.0 ? 0.0 : (r[j] - s.center[j]) / s.scale[j];
            if (clip) v = std::clamp(v, -1.0, 1.0);
            r[j] = v;
        }
    }
    ds.scaling = s;
    ds.standardized = true;
}

}  // namespace

void standardize(Dataset& train, const std::vector<Dataset*>& others) {
    if (train.n() == 0) throw std::invalid_argument("standardize: training set is empty");
    if (train.standardized) {
        throw std::logic_error("standardize: training set is already standardized");
    }
    for (const Dataset* d : others) {
        if (d->standardized) throw std::logic_error("standardize: dataset already standardized");
        if (d->dim() != train.dim()) throw DimensionError("standardize: feature dim mismatch");
    }
    FeatureScaling s;
    s.center.resize(train.dim());
    s.scale.resize(train.dim());
    for (std::size_t j = 0; j < train.dim(); ++j) {
        double lo = train.features.at(0, j), hi = lo;
        for (std::size_t i = 1; i < train.n(); ++i) {
            lo = std::min(lo, train.features.at(i, j));
            hi = std::max(hi, train.features.at(i, j));
        }
        s.center[j] = 0.5 * (lo + hi);
        s.scale[j] = 0.5 * (hi - lo);
    }
    apply_scaling(s, train, /*clip=*/false);
    for (Dataset* d : others) apply_scaling(s, *d, /*clip=*/true);
}

Matrix inverse_scaling(const FeatureScaling& s, Matrix x) {
    if (!s.fitted()) throw std::logic_error("inverse_scaling: scaling was never fitted");
    if (x.cols != s.center.size()) throw DimensionError("inverse_scaling: column mismatch");
    for (std::size_t i = 0; i < x.rows; ++i) {
        double* r = x.row(i);
        for (std::size_t j = 0; j < x.cols; ++j) r[j] = s.center[j] + s.scale[j] * r[j];
    }
    return x;
}

Dataset synthesize_cert_like(const SynthSpec& spec, Rng& rng) {
    if (spec.num_classes < 2) throw ConfigError("synth: need at least 2 classes");
    if (spec.counts.size() != spec.num_classes) {
        throw ConfigError("synth: counts must list one entry per class");
    }
    if (spec.dim < 2) throw ConfigError("synth: feature_dim must be >= 2");
    for (std::size_t c : spec.counts) {
        if (c == 0) throw ConfigError("synth: every class needs at least one sample");
    }
    if (!spec.means.empty() && spec.means.size() != spec.num_classes) {
        throw ConfigError("synth: means must list one vector per class");
    }
    if (!spec.sigmas.empty() && spec.sigmas.size() != spec.num_classes) {
        throw ConfigError("synth: sigmas must list one value per class");
    }

    // Default geometry: class 0 at the origin, insider class c displaced by
    // `separation` along axis (c-1) mod dim.
    std::vector<std::vector<double>> means = spec.means;
    if (means.empty()) {
        means.assign(spec.num_classes, std::vector<double>(spec.dim, 0.0));
        for (std::size_t c = 1; c < spec.num_classes; ++c) {
            means[c][(c - 1) % spec.dim] = spec.separation;
        }
    }
    for (const auto& m : means) {
        if (m.size() != spec.dim) throw ConfigError("synth: mean vector has wrong dimension");
    }

    std::size_t total = 0;
    for (std::size_t c : spec.counts) total += c;
    Dataset ds;
    ds.features = Matrix(total, spec.dim);
    ds.labels.reserve(total);
    ds.class_names.push_back("normal");
    for (std::size_t c = 1; c < spec.num_classes; ++c) ds.class_names.push_back("s" + std::to_string(c));

    std::size_t row = 0;
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
        const double sigma = spec.sigmas.empty() ? 1.0 : spec.sigmas[c];
        for (std::size_t i = 0; i < spec.counts[c]; ++i, ++row) {
            double* r = ds.features.row(row);
            for (std::size_t j = 0; j < spec.dim; ++j) r[j] = rng.normal(means[c][j], sigma);
            ds.labels.push_back(static_cast<int>(c));
        }
    }
    return ds;
}

std::vector<ClientDataset> partition_non_iid(const Dataset& ds, std::size_t k, Rng& rng,
                                             const std::map<int, std::size_t>* assignment) {
    if (k == 0) throw ConfigError("partition: need at least one client");
    if (ds.num_classes() < 2) throw ConfigError("partition: dataset has no scenario classes");
    const std::size_t scenarios = ds.num_classes() - 1;
    if (k > scenarios && assignment == nullptr) {
        throw ConfigError("partition: " + std::to_string(k) + " clients but only " +
                          std::to_string(scenarios) +
                          " scenario classes; provide an explicit assignment");
    }

    // Scenario class -> owning client.
    std::vector<std::size_t> owner(ds.num_classes(), 0);
    for (std::size_t c = 1; c < ds.num_classes(); ++c) owner[c] = (c - 1) % k;
    if (assignment != nullptr) {
        for (const auto& [cls, client] : *assignment) {
            if (cls < 1 || static_cast<std::size_t>(cls) >= ds.num_classes()) {
                throw ConfigError("partition: assignment refers to unknown class " +
                                  std::to_string(cls));
            }
            if (client >= k) {
                throw ConfigError("partition: assignment refers to client " +
                                  std::to_string(client) + " but K=" + std::to_string(k));
            }
            owner[static_cast<std::size_t>(cls)] = client;
        }
    }

    // Row -> client. Class-0 rows are dealt out shuffled, near-equally.
    std::vector<std::size_t> dest(ds.n());
    std::vector<std::size_t> normal_rows;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        if (ds.labels[i] == 0) {
            normal_rows.push_back(i);
        } else {
            dest[i] = owner[static_cast<std::size_t>(ds.labels[i])];
        }
    }
    const std::vector<std::size_t> perm = rng.permutation(normal_rows.size());
    for (std::size_t p = 0; p < perm.size(); ++p) dest[normal_rows[perm[p]]] = p % k;

    std::vector<ClientDataset> clients(k);
    std::vector<std::size_t> rows_per(k, 0);
    for (std::size_t i = 0; i < ds.n(); ++i) ++rows_per[dest[i]];
    for (std::size_t c = 0; c < k; ++c) {
        clients[c].client_id = c;
        clients[c].features = Matrix(rows_per[c], ds.dim());
        clients[c].labels.reserve(rows_per[c]);
    }
    std::vector<std::size_t> cursor(k, 0);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        ClientDataset& cl = clients[dest[i]];
        double* r = cl.features.row(cursor[dest[i]]++);
        const double* src = ds.features.row(i);
        std::copy(src, src + ds.dim(), r);
        cl.labels.push_back(ds.labels[i]);
        cl.local_classes.insert(ds.labels[i]);
    }
    return clients;
}

SplitResult train_test_split(const Dataset& ds, double test_fraction, Rng& rng) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("split: test_fraction must be in (0, 1)");
    }
    if (ds.n() == 0) throw std::invalid_argument("split: dataset is empty");

    std::vector<std::vector<std::size_t>> by_class(ds.num_classes());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
    }

    SplitResult out;
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& rows = by_class[c];
        if (rows.empty()) continue;
        if (rows.size() == 1) {
            out.warnings.push_back("class '" + ds.class_names[c] +
                                   "' has a single sample; kept in train");
            train_rows.push_back(rows[0]);
            continue;
        }
        const std::vector<std::size_t> perm = rng.permutation(rows.size());
        std::size_t n_test = static_cast<std::size_t>(
            std::floor(static_cast<double>(rows.size()) * test_fraction + 0.5));
        n_test = std::clamp<std::size_t>(n_test, 1, rows.size() - 1);
        for (std::size_t p = 0; p < rows.size(); ++p) {
            (p < n_test ? test_rows : train_rows).push_back(rows[perm[p]]);
        }
    }

    auto take = [&](const std::vector<std::size_t>& rows) {
        Dataset d;
        d.class_names = ds.class_names;
        d.features = Matrix(rows.size(), ds.dim());
        d.labels.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double* src = ds.features.row(rows[i]);
            std::copy(src, src + ds.dim(), d.features.row(i));
            d.labels.push_back(ds.labels[rows[i]]);
        }
        return d;
    };
    out.train = take(train_rows);
    out.test = take(test_rows);
    return out;
}

}  // namespace fedat
