#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ssn/certify.hpp"
#include "ssn/dataset.hpp"
#include "ssn/models.hpp"
#include "ssn/rational.hpp"

namespace ssn {

enum class Method { Dssn, SsnMc, UniformMc };

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct CertifyOptions {
    Method method = Method::Dssn;
    std::int64_t n0 = 64;
    std::int64_t n = 100000;
    double alpha = 0.001;
    int threads = 0;        // 0 = SSN_THREADS env or OpenMP default
    bool timings = false;   // real per-row wall times break byte-stability
    bool one_vs_all = false;
    std::uint64_t mc_seed = 1;
};

struct CertRow {
    long long index = 0;
    std::string true_label;
    std::string predicted;
    Certificate cert;
    double wall_ms = 0.0;
};

struct CertifyRun {
    Method method = Method::Dssn;
    int q = 1;
    int L = 1;
    std::int64_t n0 = 0, n = 0;
    double alpha = 0.0;
    bool one_vs_all = false;
    bool timings = false;
    std::vector<CertRow> rows;

    std::string to_csv() const;
};

/// Certify every dataset point against the model. Samples are distributed
/// across OpenMP threads; rows come back in input order, so the exact path
/// is byte-stable across reruns and thread counts.
CertifyRun run_certify(const Dataset& ds, const ModelFile& model,
                       const CertifyOptions& opt);

void write_certificates(const CertifyRun& run, const std::string& path);

struct ParsedCertRow {
    long long index = 0;
    std::string true_label;
    std::string predicted;
    bool exact = false;
    Rational radius;           // exact rows
    double radius_value = 0.0; // all rows
    bool abstained = false;
    long long eval_count = 0;
};

std::vector<ParsedCertRow> read_certificates(const std::string& path);

// ---------------------------------------------------------------------------
// Certified-accuracy curves.
// ---------------------------------------------------------------------------

struct CurvePoint {
    Rational rho;
    double accuracy = 0.0;
};

/// Fraction of rows that are correct, not abstained, and certified at rho
/// (inclusive: radius >= rho; exact radii compared in rational arithmetic).
std::vector<CurvePoint> certified_accuracy_curve(const std::vector<ParsedCertRow>& rows,
                                                 const std::vector<Rational>& radii);

/// Pointwise max over curves sharing one radii grid.
std::vector<CurvePoint> max_envelope(const std::vector<std::vector<CurvePoint>>& curves);

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path);
std::vector<CurvePoint> read_curve_csv(const std::string& path);

/// Radii grid: either "start:stop:step" (inclusive) or a comma list; every
/// token is an exact decimal.
std::vector<Rational> parse_radii(const std::string& text);
Rational rational_from_decimal(const std::string& text);

/// Dependency-free line plot.
void write_curves_svg(const std::string& path,
                      const std::vector<std::pair<std::string, std::vector<CurvePoint>>>& curves,
                      const std::string& title);

// ---------------------------------------------------------------------------
// DSSN vs Monte-Carlo benchmark.
// ---------------------------------------------------------------------------

struct BenchMethodStats {
    Method method = Method::Dssn;
    double median_ms_per_image = 0.0;
    std::int64_t evals_per_image = 0;
    long long images = 0;
    int repetitions = 0;
};

struct BenchReport {
    std::vector<BenchMethodStats> methods;
    std::int64_t n0 = 0, n = 0;
    int L = 1;
    Rational eval_ratio;     // (n0 + n) / L when both paths ran
    double wall_ratio = 0.0; // mc median / dssn median

    std::string to_json() const;
};

BenchReport bench(const Dataset& ds, const ModelFile& model,
                  const std::vector<Method>& methods, std::int64_t n0,
                  std::int64_t n, double alpha, int repetitions, int threads);

} // namespace ssn
