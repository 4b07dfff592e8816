#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ssn/dataset.hpp"
#include "ssn/types.hpp"

namespace ssn {

/// Shared argmax rule: highest value, ties broken by the first (lowest)
/// index. Class vectors are ordered lexicographically by label, so this is
/// the lexicographic tie-break used by prediction and certification alike.
template <typename T>
int argmax_first(std::span<const T> values) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

/// Hard base classifier: deterministic, defined for every noisy input in
/// [0,1]^d (including the no-information point 0.5*1). Returns an index
/// into classes().
class BaseClassifier {
public:
    virtual ~BaseClassifier() = default;
    virtual const std::vector<std::string>& classes() const = 0;
    virtual int predict_hard(std::span<const double> x) const = 0;

    /// Exact entry point for quantized noisy points (numerators over 4q).
    /// Default converts to doubles; table classifiers override with an
    /// exact lookup.
    virtual int predict_levels(std::span<const int> noisy_levels, int q) const;
};

/// Explicit mapping from reachable noisy points (numerators over 4q) to
/// labels. Missing keys are an error, not a default.
class TableClassifier : public BaseClassifier {
public:
    TableClassifier(std::vector<std::string> labels, int q)
        : labels_(std::move(labels)), q_(q) {}

    void set(std::vector<int> noisy_levels, int label);
    const std::vector<std::string>& classes() const override { return labels_; }
    int predict_hard(std::span<const double> x) const override;
    int predict_levels(std::span<const int> noisy_levels, int q) const override;

    int q() const { return q_; }
    const std::map<std::vector<int>, int>& entries() const { return table_; }

private:
    std::vector<std::string> labels_;
    int q_;
    std::map<std::vector<int>, int> table_;
};

/// Seeded pseudorandom labeling of the noisy-point lattice; total on every
/// reachable point and replayable from (seed, n_classes). Oracle fixture
/// for the grid sweeps.
class RandomTableClassifier : public BaseClassifier {
public:
    RandomTableClassifier(std::uint64_t seed, int n_classes, int q);
    const std::vector<std::string>& classes() const override { return labels_; }
    int predict_hard(std::span<const double> x) const override;
    int predict_levels(std::span<const int> noisy_levels, int q) const override;

private:
    std::uint64_t seed_;
    int q_;
    std::vector<std::string> labels_;
};

/// Single-coordinate threshold fixture: predicts labels[1] iff x[coord] > t.
class ThresholdClassifier : public BaseClassifier {
public:
    ThresholdClassifier(int coord, double threshold, std::vector<std::string> labels)
        : coord_(coord), threshold_(threshold), labels_(std::move(labels)) {}
    const std::vector<std::string>& classes() const override { return labels_; }
    int predict_hard(std::span<const double> x) const override {
        return x[coord_] > threshold_ ? 1 : 0;
    }

private:
    int coord_;
    double threshold_;
    std::vector<std::string> labels_;
};

class LinearSoftmaxClassifier : public BaseClassifier {
public:
    LinearSoftmaxClassifier(std::vector<std::string> labels, int d)
        : labels_(std::move(labels)), d_(d),
          W_(labels_.size() * d, 0.0), b_(labels_.size(), 0.0) {}

    const std::vector<std::string>& classes() const override { return labels_; }
    int predict_hard(std::span<const double> x) const override;

    int dim() const { return d_; }
    std::vector<double>& weights() { return W_; }
    std::vector<double>& bias() { return b_; }
    const std::vector<double>& weights() const { return W_; }
    const std::vector<double>& bias() const { return b_; }
    void logits(std::span<const double> x, std::span<double> out) const;

private:
    std::vector<std::string> labels_;
    int d_;
    std::vector<double> W_; // class-major, C x d
    std::vector<double> b_;
};

// ---------------------------------------------------------------------------
// Persistence. Canonical field-ordered text with length-prefixed vectors and
// hexfloat reals, so save(load(bytes)) == bytes and reruns hash identically.
// The offset vector is revalidated against (generator_id, seed) on load.
// ---------------------------------------------------------------------------

struct ModelFile {
    int format_version = 1;
    int d = 0;
    int q = 1;
    int L = 1;
    std::string generator_id = "mt19937";
    std::uint64_t v_seed = 0;
    std::vector<int> v;
    std::string kind; // "linear" | "table"
    std::vector<std::string> labels;
    std::vector<double> W, b;                            // linear
    std::vector<std::pair<std::vector<int>, int>> table; // table
    // Training metadata.
    std::string trained_noise = "dssn";
    int epochs = 0;
    int batch_size = 0;
    double lr0 = 0.0;
    std::uint64_t train_seed = 0;
    std::string data_provenance;

    SplitSpec split_spec() const;
    NoiseModel noise_model() const;
};

std::string serialize_model(const ModelFile& m);
ModelFile parse_model(const std::string& bytes);
void save_model(const ModelFile& m, const std::string& path);
ModelFile load_model(const std::string& path);

std::unique_ptr<BaseClassifier> make_classifier(const ModelFile& m);

// ---------------------------------------------------------------------------
// Training.
// ---------------------------------------------------------------------------

struct TrainConfig {
    int epochs = 30;
    double lr0 = 0.5;
    int batch_size = 16;
    std::uint64_t seed = 0;
};

/// Cross-entropy SGD on noisy samples with cosine-annealed learning rate.
/// DSSN mode draws one random s_base per sample per epoch; the independent
/// and additive modes draw fresh noise per sample per epoch. Single-threaded
/// and bit-deterministic given (seed, dataset, config).
ModelFile train_linear(const Dataset& ds, const NoiseModel& noise,
                       const TrainConfig& cfg);

} // namespace ssn
