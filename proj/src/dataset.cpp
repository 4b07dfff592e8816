#include "ssn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ssn/prng.hpp"

namespace ssn {

std::vector<std::string> default_class_labels(int n) {
    if (n < 1 || n > 100)
        throw std::invalid_argument("default_class_labels: 1 <= n <= 100");
    std::vector<std::string> labels(n);
    for (int c = 0; c < n; ++c) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "c%02d", c);
        labels[c] = buf;
    }
    return labels;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

[[noreturn]] void parse_fail(const std::string& path, int line_no,
                             const std::string& why) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + why);
}

} // namespace

Dataset load_dataset(const std::string& path, int q) {
    if (q < 1) throw std::invalid_argument("load_dataset: q must be >= 1");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");

    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) parse_fail(path, 1, "empty file (header expected)");
    ++line_no;
    const std::size_t n_cols = split_csv_line(line).size();
    if (n_cols < 2) parse_fail(path, line_no, "need at least one feature column and a label");
    const int d = static_cast<int>(n_cols) - 1;

    struct RawRow { std::vector<int> levels; std::string label; };
    std::vector<RawRow> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != n_cols)
            parse_fail(path, line_no, "expected " + std::to_string(n_cols) +
                                          " columns, found " + std::to_string(fields.size()));
        RawRow row;
        row.levels.resize(d);
        for (int i = 0; i < d; ++i) {
            std::size_t pos = 0;
            long v = 0;
            try {
                v = std::stol(fields[i], &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != fields[i].size())
                parse_fail(path, line_no, "feature column " + std::to_string(i) +
                                              " is not an integer: '" + fields[i] + "'");
            if (v < 0 || v > q)
                parse_fail(path, line_no, "level " + std::to_string(v) +
                                              " outside {0,..," + std::to_string(q) + "}");
            row.levels[i] = static_cast<int>(v);
        }
        row.label = fields[d];
        if (row.label.empty()) parse_fail(path, line_no, "empty label");
        for (char c : row.label)
            if (c == ' ' || c == '\t')
                parse_fail(path, line_no, "label contains whitespace: '" + row.label + "'");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) parse_fail(path, line_no, "no data rows");

    Dataset ds;
    ds.q = q;
    ds.d = d;
    ds.provenance = path;
    std::map<std::string, int> label_ids;
    for (const RawRow& row : rows) label_ids.emplace(row.label, 0);
    for (auto& [label, id] : label_ids) {
        id = static_cast<int>(ds.class_labels.size());
        ds.class_labels.push_back(label);
    }
    for (RawRow& row : rows) {
        ds.points.push_back(QuantizedPoint{std::move(row.levels), q});
        ds.labels.push_back(label_ids.at(row.label));
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset '" + path + "'");
    for (int i = 0; i < ds.d; ++i) out << "f" << i << ",";
    out << "label\n";
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (int lv : ds.points[r].levels) out << lv << ",";
        out << ds.class_labels[ds.labels[r]] << "\n";
    }
}

Dataset synth_dataset(std::uint64_t seed, int d, int q, int classes,
                      int n_per_class, double separation) {
    if (d < 1 || q < 1 || classes < 1 || n_per_class < 1)
        throw std::invalid_argument("synth_dataset: parameters must be positive");
    if (separation < 0.0)
        throw std::invalid_argument("synth_dataset: separation must be >= 0");

    SplitMix64 rng(seed);
    // Class centers sit on distinct sign patterns around 0.5, so
    // `separation` is the per-coordinate gap between differing classes
    // (needs d >= log2(classes) coordinates to tell every pair apart).
    int pattern_bits = 1;
    while ((1 << pattern_bits) < classes) ++pattern_bits;
    std::vector<std::vector<double>> means(classes, std::vector<double>(d));
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < d; ++i) {
            const int sign = ((c >> (i % pattern_bits)) & 1) ? 1 : -1;
            means[c][i] = 0.5 + 0.5 * separation * sign;
        }

    constexpr double kClusterStd = 0.08;
    Dataset ds;
    ds.q = q;
    ds.d = d;
    ds.class_labels = default_class_labels(classes);
    {
        std::ostringstream prov;
        prov << "synth:seed=" << seed << ":d=" << d << ":q=" << q
             << ":classes=" << classes << ":n=" << n_per_class
             << ":sep=" << separation;
        ds.provenance = prov.str();
    }
    for (int c = 0; c < classes; ++c) {
        for (int s = 0; s < n_per_class; ++s) {
            QuantizedPoint p;
            p.q = q;
            p.levels.resize(d);
            for (int i = 0; i < d; ++i) {
                const double value = means[c][i] + kClusterStd * rng.normal();
                const long lv = std::lround(std::clamp(value, 0.0, 1.0) * q);
                p.levels[i] = static_cast<int>(lv);
            }
            ds.points.push_back(std::move(p));
            ds.labels.push_back(c);
        }
    }
    return ds;
}

} // namespace ssn
