#include "ssn/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ssn/noise.hpp"
#include "ssn/prng.hpp"

namespace ssn {

int BaseClassifier::predict_levels(std::span<const int> noisy_levels, int q) const {
    std::vector<double> x = noisy_values(noisy_levels, q);
    return predict_hard(x);
}

// ---------------------------------------------------------------------------
// Table classifiers.
// ---------------------------------------------------------------------------

namespace {

std::vector<int> round_to_lattice(std::span<const double> x, int q) {
    std::vector<int> key(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        key[i] = static_cast<int>(std::llround(x[i] * 4.0 * q));
    return key;
}

std::string format_levels(std::span<const int> ks) {
    std::string s = "[";
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(ks[i]);
    }
    return s + "]";
}

} // namespace

void TableClassifier::set(std::vector<int> noisy_levels, int label) {
    if (label < 0 || label >= static_cast<int>(labels_.size()))
        throw std::invalid_argument("TableClassifier: label index out of range");
    table_[std::move(noisy_levels)] = label;
}

int TableClassifier::predict_hard(std::span<const double> x) const {
    return predict_levels(round_to_lattice(x, q_), q_);
}

int TableClassifier::predict_levels(std::span<const int> noisy_levels, int) const {
    auto it = table_.find(std::vector<int>(noisy_levels.begin(), noisy_levels.end()));
    if (it == table_.end())
        throw std::runtime_error("TableClassifier: no entry for noisy point " +
                                 format_levels(noisy_levels) + "/(4q)");
    return it->second;
}

RandomTableClassifier::RandomTableClassifier(std::uint64_t seed, int n_classes, int q)
    : seed_(seed), q_(q) {
    if (n_classes < 1 || n_classes > 100)
        throw std::invalid_argument("RandomTableClassifier: 1 <= n_classes <= 100");
    labels_ = default_class_labels(n_classes);
}

int RandomTableClassifier::predict_hard(std::span<const double> x) const {
    return predict_levels(round_to_lattice(x, q_), q_);
}

int RandomTableClassifier::predict_levels(std::span<const int> noisy_levels, int) const {
    std::uint64_t h = seed_ ^ 0xA0761D6478BD642Full;
    for (int k : noisy_levels) {
        SplitMix64 mix(h ^ (static_cast<std::uint64_t>(k) + 0x9E3779B97F4A7C15ull));
        h = mix.next();
    }
    return static_cast<int>(h % labels_.size());
}

// ---------------------------------------------------------------------------
// Linear softmax.
// ---------------------------------------------------------------------------

void LinearSoftmaxClassifier::logits(std::span<const double> x, std::span<double> out) const {
    const int C = static_cast<int>(labels_.size());
    for (int c = 0; c < C; ++c) {
        double z = b_[c];
        const double* w = &W_[static_cast<std::size_t>(c) * d_];
        for (int j = 0; j < d_; ++j) z += w[j] * x[j];
        out[c] = z;
    }
}

int LinearSoftmaxClassifier::predict_hard(std::span<const double> x) const {
    std::vector<double> z(labels_.size());
    logits(x, z);
    return argmax_first<double>(z);
}

// ---------------------------------------------------------------------------
// Persistence.
// ---------------------------------------------------------------------------

namespace {

std::string hexdouble(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

void check_label_token(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty class label");
    for (char c : s)
        if (c == ' ' || c == '\t' || c == '\n' || c == ',')
            throw std::invalid_argument("class label '" + s +
                                        "' contains whitespace or comma");
}

} // namespace

SplitSpec ModelFile::split_spec() const {
    SplitSpec s;
    s.L = L;
    s.q = q;
    s.v = v;
    s.generator_id = generator_id;
    s.seed = v_seed;
    return s;
}

NoiseModel ModelFile::noise_model() const {
    NoiseModel m;
    m.kind = parse_noise_kind(trained_noise);
    m.spec = split_spec();
    return m;
}

std::string serialize_model(const ModelFile& m) {
    std::ostringstream out;
    out << "ssnmodel " << m.format_version << "\n";
    out << "d " << m.d << "\n";
    out << "q " << m.q << "\n";
    out << "L " << m.L << "\n";
    out << "generator " << m.generator_id << "\n";
    out << "vseed " << m.v_seed << "\n";
    out << "v " << m.v.size();
    for (int o : m.v) out << " " << o;
    out << "\n";
    out << "classes " << m.labels.size();
    for (const auto& l : m.labels) out << " " << l;
    out << "\n";
    out << "kind " << m.kind << "\n";
    if (m.kind == "linear") {
        out << "W " << m.W.size();
        for (double w : m.W) out << " " << hexdouble(w);
        out << "\n";
        out << "b " << m.b.size();
        for (double w : m.b) out << " " << hexdouble(w);
        out << "\n";
    } else if (m.kind == "table") {
        out << "entries " << m.table.size() << "\n";
        for (const auto& [key, label] : m.table) {
            out << "e";
            for (int k : key) out << " " << k;
            out << " " << label << "\n";
        }
    } else {
        throw std::invalid_argument("serialize_model: unknown kind '" + m.kind + "'");
    }
    out << "noise " << m.trained_noise << "\n";
    out << "epochs " << m.epochs << "\n";
    out << "batch " << m.batch_size << "\n";
    out << "lr0 " << hexdouble(m.lr0) << "\n";
    out << "trainseed " << m.train_seed << "\n";
    out << "data " << m.data_provenance << "\n";
    out << "end\n";
    return out.str();
}

namespace {

class TokenReader {
public:
    explicit TokenReader(const std::string& bytes) : in_(bytes) {}

    std::string word(const char* what) {
        std::string t;
        if (!(in_ >> t))
            throw std::runtime_error(std::string("model file truncated, expected ") + what);
        return t;
    }
    void expect(const char* key) {
        const std::string t = word(key);
        if (t != key)
            throw std::runtime_error("model file: expected '" + std::string(key) +
                                     "', found '" + t + "'");
    }
    long long integer(const char* what) {
        const std::string t = word(what);
        std::size_t pos = 0;
        long long v = std::stoll(t, &pos);
        if (pos != t.size())
            throw std::runtime_error("model file: bad integer for " + std::string(what));
        return v;
    }
    double real(const char* what) {
        const std::string t = word(what);
        char* end = nullptr;
        double v = std::strtod(t.c_str(), &end);
        if (end != t.c_str() + t.size())
            throw std::runtime_error("model file: bad real for " + std::string(what));
        return v;
    }
    std::string rest_of_line() {
        std::string t;
        std::getline(in_, t);
        if (!t.empty() && t.front() == ' ') t.erase(t.begin());
        return t;
    }

private:
    std::istringstream in_;
};

} // namespace

ModelFile parse_model(const std::string& bytes) {
    TokenReader r(bytes);
    ModelFile m;
    r.expect("ssnmodel");
    m.format_version = static_cast<int>(r.integer("format version"));
    if (m.format_version != 1)
        throw std::runtime_error("model file: unsupported format version " +
                                 std::to_string(m.format_version) + " (this build reads 1)");
    r.expect("d");
    m.d = static_cast<int>(r.integer("d"));
    r.expect("q");
    m.q = static_cast<int>(r.integer("q"));
    r.expect("L");
    m.L = static_cast<int>(r.integer("L"));
    r.expect("generator");
    m.generator_id = r.word("generator id");
    r.expect("vseed");
    m.v_seed = static_cast<std::uint64_t>(r.integer("v seed"));
    r.expect("v");
    const long long nv = r.integer("v length");
    if (nv != m.d) throw std::runtime_error("model file: v length does not match d");
    m.v.resize(nv);
    for (auto& o : m.v) o = static_cast<int>(r.integer("v entry"));
    r.expect("classes");
    const long long nc = r.integer("class count");
    m.labels.resize(nc);
    for (auto& l : m.labels) {
        l = r.word("class label");
        check_label_token(l);
    }
    if (!std::is_sorted(m.labels.begin(), m.labels.end()))
        throw std::runtime_error("model file: class labels not in lexicographic order");
    r.expect("kind");
    m.kind = r.word("classifier kind");
    if (m.kind == "linear") {
        r.expect("W");
        const long long nw = r.integer("W length");
        if (nw != static_cast<long long>(m.labels.size()) * m.d)
            throw std::runtime_error("model file: W length does not match classes*d");
        m.W.resize(nw);
        for (auto& w : m.W) w = r.real("weight");
        r.expect("b");
        const long long nb = r.integer("b length");
        if (nb != static_cast<long long>(m.labels.size()))
            throw std::runtime_error("model file: b length does not match classes");
        m.b.resize(nb);
        for (auto& w : m.b) w = r.real("bias");
    } else if (m.kind == "table") {
        r.expect("entries");
        const long long ne = r.integer("entry count");
        m.table.resize(ne);
        for (auto& [key, label] : m.table) {
            r.expect("e");
            key.resize(m.d);
            for (auto& k : key) k = static_cast<int>(r.integer("entry key"));
            label = static_cast<int>(r.integer("entry label"));
            if (label < 0 || label >= static_cast<int>(m.labels.size()))
                throw std::runtime_error("model file: table label index out of range");
        }
    } else {
        throw std::runtime_error("model file: unknown classifier kind '" + m.kind + "'");
    }
    r.expect("noise");
    m.trained_noise = r.word("training noise");
    r.expect("epochs");
    m.epochs = static_cast<int>(r.integer("epochs"));
    r.expect("batch");
    m.batch_size = static_cast<int>(r.integer("batch size"));
    r.expect("lr0");
    m.lr0 = r.real("lr0");
    r.expect("trainseed");
    m.train_seed = static_cast<std::uint64_t>(r.integer("train seed"));
    r.expect("data");
    m.data_provenance = r.rest_of_line();
    r.expect("end");

    // The certificate depends on v being the trained vector: regenerate and
    // compare rather than trusting the stored copy.
    std::vector<int> regen;
    try {
        regen = make_offset_vector(m.generator_id, m.v_seed, m.d, m.L);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("model file: cannot regenerate offsets: ") +
                                 e.what());
    }
    if (regen != m.v)
        throw std::runtime_error("model file: stored offset vector does not match "
                                 "regeneration from (generator, seed); file is corrupt "
                                 "or was produced by a different build");
    return m;
}

void save_model(const ModelFile& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file '" + path + "'");
    out << serialize_model(m);
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

std::unique_ptr<BaseClassifier> make_classifier(const ModelFile& m) {
    if (m.kind == "linear") {
        auto cls = std::make_unique<LinearSoftmaxClassifier>(m.labels, m.d);
        cls->weights() = m.W;
        cls->bias() = m.b;
        return cls;
    }
    if (m.kind == "table") {
        auto cls = std::make_unique<TableClassifier>(m.labels, m.q);
        for (const auto& [key, label] : m.table) cls->set(key, label);
        return cls;
    }
    throw std::runtime_error("make_classifier: unknown kind '" + m.kind + "'");
}

// ---------------------------------------------------------------------------
// Training.
// ---------------------------------------------------------------------------

ModelFile train_linear(const Dataset& ds, const NoiseModel& noise,
                       const TrainConfig& cfg) {
    const SplitSpec& spec = noise.spec;
    if (ds.d != spec.dim())
        throw std::invalid_argument("train_linear: dataset d does not match noise spec");
    if (ds.q != spec.q)
        throw std::invalid_argument("train_linear: dataset q does not match noise spec");
    if (cfg.epochs < 0 || cfg.batch_size < 1)
        throw std::invalid_argument("train_linear: bad epochs/batch size");

    const int d = ds.d;
    const int C = static_cast<int>(ds.class_labels.size());
    const int n = static_cast<int>(ds.size());
    LinearSoftmaxClassifier cls(ds.class_labels, d);
    SplitMix64 rng(cfg.seed);

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::vector<double> z(C), gW(static_cast<std::size_t>(C) * d), gb(C);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cfg.lr0 * 0.5 *
                          (1.0 + std::cos(std::numbers::pi * epoch / cfg.epochs));
        for (int i = n - 1; i > 0; --i) {
            const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
            std::swap(order[i], order[j]);
        }
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int stop = std::min(n, start + cfg.batch_size);
            std::fill(gW.begin(), gW.end(), 0.0);
            std::fill(gb.begin(), gb.end(), 0.0);
            for (int bi = start; bi < stop; ++bi) {
                const int si = order[bi];
                const QuantizedPoint& x = ds.points[si];
                std::vector<double> xt;
                switch (noise.kind) {
                    case NoiseKind::DSSN: {
                        const int base = static_cast<int>(
                            rng.below(static_cast<std::uint64_t>(spec.L)));
                        xt = noisy_values(noisy_point(x, splits_from_base(base, spec)),
                                          ds.q);
                        break;
                    }
                    case NoiseKind::IndependentSSN: {
                        SplitVector s = sample_split_independent(rng, d, spec.L, ds.q);
                        xt = noisy_values(noisy_point(x, s), ds.q);
                        break;
                    }
                    case NoiseKind::UniformAdditive: {
                        const std::vector<double> xv = x.values();
                        xt = uniform_additive_sample(rng, xv, noise.lambda());
                        break;
                    }
                }
                cls.logits(xt, z);
                double zmax = z[0];
                for (int c = 1; c < C; ++c) zmax = std::max(zmax, z[c]);
                double denom = 0.0;
                for (int c = 0; c < C; ++c) {
                    z[c] = std::exp(z[c] - zmax);
                    denom += z[c];
                }
                for (int c = 0; c < C; ++c) {
                    const double delta = z[c] / denom - (c == ds.labels[si] ? 1.0 : 0.0);
                    gb[c] += delta;
                    double* gw = &gW[static_cast<std::size_t>(c) * d];
                    for (int j = 0; j < d; ++j) gw[j] += delta * xt[j];
                }
            }
            const double scale = lr / (stop - start);
            for (std::size_t k = 0; k < gW.size(); ++k) cls.weights()[k] -= scale * gW[k];
            for (int c = 0; c < C; ++c) cls.bias()[c] -= scale * gb[c];
        }
    }

    ModelFile m;
    m.d = d;
    m.q = ds.q;
    m.L = spec.L;
    m.generator_id = spec.generator_id;
    m.v_seed = spec.seed;
    m.v = spec.v;
    m.kind = "linear";
    m.labels = ds.class_labels;
    m.W = cls.weights();
    m.b = cls.bias();
    m.trained_noise = noise_kind_name(noise.kind);
    m.epochs = cfg.epochs;
    m.batch_size = cfg.batch_size;
    m.lr0 = cfg.lr0;
    m.train_seed = cfg.seed;
    m.data_provenance = ds.provenance;
    return m;
}

} // namespace ssn
