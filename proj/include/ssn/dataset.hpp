#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssn/types.hpp"

namespace ssn {

/// Labeled quantized points sharing (d, q). Labels are indices into
/// class_labels, which is kept sorted lexicographically (the tie-break
/// order used everywhere downstream).
struct Dataset {
    std::vector<QuantizedPoint> points;
    std::vector<int> labels;
    std::vector<std::string> class_labels;
    int q = 1;
    int d = 0;
    std::string provenance;

    std::size_t size() const { return points.size(); }
};

/// CSV with a header row; feature columns hold integers in {0,..,q}, final
/// column is the label. Parse errors carry the offending line number.
Dataset load_dataset(const std::string& path, int q);

void save_dataset(const Dataset& ds, const std::string& path);

/// Seeded Gaussian clusters snapped to the grid. separation 0 collapses all
/// class means onto the same point.
Dataset synth_dataset(std::uint64_t seed, int d, int q, int classes,
                      int n_per_class, double separation);

/// "c00", "c01", ... — zero-padded so index order is lexicographic order.
std::vector<std::string> default_class_labels(int n);

} // namespace ssn
