#include "ssn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <omp.h>

#include <json.hpp>

#include "ssn/noise.hpp"
#include "ssn/parallel.hpp"

namespace ssn {

std::string method_name(Method m) {
    switch (m) {
        case Method::Dssn: return "dssn";
        case Method::SsnMc: return "ssn-mc";
        case Method::UniformMc: return "uniform-mc";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    if (name == "dssn") return Method::Dssn;
    if (name == "ssn-mc") return Method::SsnMc;
    if (name == "uniform-mc") return Method::UniformMc;
    throw std::invalid_argument("unknown method '" + name +
                                "' (expected dssn, ssn-mc, uniform-mc)");
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// Dataset label ids -> model label ids; every dataset label must be known
// to the model.
std::vector<int> label_mapping(const Dataset& ds, const ModelFile& model) {
    std::vector<int> mapping(ds.class_labels.size(), -1);
    for (std::size_t i = 0; i < ds.class_labels.size(); ++i) {
        const auto it = std::find(model.labels.begin(), model.labels.end(),
                                  ds.class_labels[i]);
        if (it == model.labels.end())
            throw std::invalid_argument("dataset label '" + ds.class_labels[i] +
                                        "' is unknown to the model");
        mapping[i] = static_cast<int>(it - model.labels.begin());
    }
    return mapping;
}

} // namespace

CertifyRun run_certify(const Dataset& ds, const ModelFile& model,
                       const CertifyOptions& opt) {
    if (ds.q != model.q)
        throw std::invalid_argument("certify: dataset q=" + std::to_string(ds.q) +
                                    " does not match model q=" + std::to_string(model.q));
    if (ds.d != model.d)
        throw std::invalid_argument("certify: dataset d=" + std::to_string(ds.d) +
                                    " does not match model d=" + std::to_string(model.d));
    label_mapping(ds, model); // validates that every dataset label is known
    const std::unique_ptr<BaseClassifier> cls = make_classifier(model);
    const SplitSpec spec = model.split_spec();
    const int threads = resolve_threads(opt.threads);
    const long long n_points = static_cast<long long>(ds.size());

    NoiseModel mc_model;
    mc_model.kind = opt.method == Method::SsnMc ? NoiseKind::IndependentSSN
                                                : NoiseKind::UniformAdditive;
    mc_model.spec = spec;

    CertifyRun run;
    run.method = opt.method;
    run.q = model.q;
    run.L = model.L;
    run.n0 = opt.n0;
    run.n = opt.n;
    run.alpha = opt.alpha;
    run.one_vs_all = opt.one_vs_all;
    run.timings = opt.timings;
    run.rows.resize(n_points);

    std::string failure;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long i = 0; i < n_points; ++i) {
        try {
            const double t0 = omp_get_wtime();
            Certificate cert;
            if (opt.method == Method::Dssn) {
                const SmoothedScores scores =
                    smooth_exact_dssn(*cls, ds.points[i], spec);
                cert = opt.one_vs_all ? certify_exact_one_vs_all(scores, model.q)
                                      : certify_exact(scores, model.q);
            } else {
                SplitMix64 rng = SplitMix64::stream(opt.mc_seed, i);
                cert = certify_randomized(*cls, ds.points[i], mc_model, opt.n0,
                                          opt.n, opt.alpha, rng);
            }
            CertRow& row = run.rows[i];
            row.index = i;
            row.true_label = ds.class_labels[ds.labels[i]];
            row.predicted = model.labels[cert.predicted];
            row.cert = cert;
            row.wall_ms = (omp_get_wtime() - t0) * 1e3;
        } catch (const std::exception& e) {
#pragma omp critical(ssn_certify_fail)
            if (failure.empty())
                failure = "sample " + std::to_string(i) + ": " + e.what();
        }
    }
    if (!failure.empty()) throw std::runtime_error(failure);
    return run;
}

std::string CertifyRun::to_csv() const {
    std::ostringstream out;
    const double lambda = static_cast<double>(L) / (2.0 * q);
    out << "# ssn certify v1\n";
    out << "# method=" << method_name(method) << " q=" << q << " L=" << L
        << " lambda=" << format_double(lambda)
        << " sigma=" << format_double(lambda / std::sqrt(3.0));
    if (method == Method::Dssn)
        out << " gap=" << (one_vs_all ? "one-vs-all" : "multiclass");
    else
        out << " n0=" << n0 << " n=" << n << " alpha=" << format_double(alpha);
    out << "\n";
    out << "index,true_label,predicted,radius,radius_num,radius_den,abstained,eval_count";
    if (timings) out << ",wall_ms";
    out << "\n";
    for (const CertRow& row : rows) {
        out << row.index << "," << row.true_label << "," << row.predicted << ",";
        if (row.cert.exact) {
            out << row.cert.radius.decimal(6) << "," << row.cert.radius.num << ","
                << row.cert.radius.den;
        } else if (row.cert.abstained) {
            out << ",,"; // abstention carries no radius
        } else {
            out << format_double(row.cert.radius_value) << ",,";
        }
        out << "," << (row.cert.abstained ? 1 : 0) << "," << row.cert.eval_count;
        if (timings) out << "," << format_double(row.wall_ms);
        out << "\n";
    }
    return out.str();
}

void write_certificates(const CertifyRun& run, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write certificates to '" + path + "'");
    out << run.to_csv();
}

std::vector<ParsedCertRow> read_certificates(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open certificate file '" + path + "'");
    std::vector<ParsedCertRow> rows;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) { // column header
            header_seen = true;
            continue;
        }
        std::vector<std::string> f;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') { f.push_back(cur); cur.clear(); }
            else if (ch != '\r') cur += ch;
        }
        f.push_back(cur);
        if (f.size() < 8)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": malformed certificate row");
        ParsedCertRow row;
        row.index = std::stoll(f[0]);
        row.true_label = f[1];
        row.predicted = f[2];
        row.exact = !f[4].empty();
        if (row.exact) {
            row.radius = Rational(std::stoll(f[4]), std::stoll(f[5]));
            row.radius_value = row.radius.to_double();
        } else {
            row.radius_value = std::strtod(f[3].c_str(), nullptr);
        }
        row.abstained = f[6] == "1";
        row.eval_count = std::stoll(f[7]);
        rows.push_back(std::move(row));
    }
    if (!header_seen)
        throw std::runtime_error(path + ": no header row");
    return rows;
}

// ---------------------------------------------------------------------------
// Curves.
// ---------------------------------------------------------------------------

std::vector<CurvePoint> certified_accuracy_curve(const std::vector<ParsedCertRow>& rows,
                                                 const std::vector<Rational>& radii) {
    if (radii.empty())
        throw std::invalid_argument("certified_accuracy_curve: empty radii grid");
    if (rows.empty())
        throw std::invalid_argument("certified_accuracy_curve: no certificate rows");
    std::vector<CurvePoint> curve;
    curve.reserve(radii.size());
    for (const Rational& rho : radii) {
        long long certified = 0;
        for (const ParsedCertRow& row : rows) {
            if (row.abstained || row.predicted != row.true_label) continue;
            const bool covers = row.exact ? (row.radius >= rho)
                                          : (row.radius_value >= rho.to_double());
            if (covers) ++certified;
        }
        curve.push_back(CurvePoint{rho, static_cast<double>(certified) / rows.size()});
    }
    return curve;
}

std::vector<CurvePoint> max_envelope(const std::vector<std::vector<CurvePoint>>& curves) {
    if (curves.empty()) throw std::invalid_argument("max_envelope: no curves");
    std::vector<CurvePoint> env = curves.front();
    for (const auto& curve : curves) {
        if (curve.size() != env.size())
            throw std::invalid_argument("max_envelope: curves use different radii grids");
        for (std::size_t i = 0; i < env.size(); ++i) {
            if (curve[i].rho != env[i].rho)
                throw std::invalid_argument("max_envelope: curves use different radii grids");
            env[i].accuracy = std::max(env[i].accuracy, curve[i].accuracy);
        }
    }
    return env;
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write curve to '" + path + "'");
    out << "radius,radius_num,radius_den,certified_accuracy\n";
    for (const CurvePoint& p : curve)
        out << p.rho.decimal(6) << "," << p.rho.num << "," << p.rho.den << ","
            << format_double(p.accuracy) << "\n";
}

std::vector<CurvePoint> read_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open curve file '" + path + "'");
    std::vector<CurvePoint> curve;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) { header = false; continue; }
        std::vector<std::string> f;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') { f.push_back(cur); cur.clear(); }
            else if (ch != '\r') cur += ch;
        }
        f.push_back(cur);
        if (f.size() != 4) throw std::runtime_error(path + ": malformed curve row");
        curve.push_back(CurvePoint{Rational(std::stoll(f[1]), std::stoll(f[2])),
                                   std::strtod(f[3].c_str(), nullptr)});
    }
    return curve;
}

Rational rational_from_decimal(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty decimal");
    std::size_t pos = 0;
    bool negative = false;
    if (text[pos] == '-' || text[pos] == '+') {
        negative = text[pos] == '-';
        ++pos;
    }
    std::int64_t num = 0, den = 1;
    bool any_digit = false, in_fraction = false;
    for (; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (c == '.') {
            if (in_fraction) throw std::invalid_argument("bad decimal '" + text + "'");
            in_fraction = true;
        } else if (c >= '0' && c <= '9') {
            num = num * 10 + (c - '0');
            if (in_fraction) den *= 10;
            any_digit = true;
        } else {
            throw std::invalid_argument("bad decimal '" + text + "'");
        }
    }
    if (!any_digit) throw std::invalid_argument("bad decimal '" + text + "'");
    return Rational(negative ? -num : num, den);
}

std::vector<Rational> parse_radii(const std::string& text) {
    std::vector<Rational> radii;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::string cur;
        for (char c : text) {
            if (c == ':') { parts.push_back(cur); cur.clear(); }
            else cur += c;
        }
        parts.push_back(cur);
        if (parts.size() != 3)
            throw std::invalid_argument("radii range must be start:stop:step");
        const Rational start = rational_from_decimal(parts[0]);
        const Rational stop = rational_from_decimal(parts[1]);
        const Rational step = rational_from_decimal(parts[2]);
        if (!(step > Rational(0)))
            throw std::invalid_argument("radii step must be positive");
        for (Rational r = start; r <= stop; r = r + step) radii.push_back(r);
    } else {
        std::string cur;
        for (char c : text + ",") {
            if (c == ',') {
                if (!cur.empty()) radii.push_back(rational_from_decimal(cur));
                cur.clear();
            } else if (c != ' ') {
                cur += c;
            }
        }
    }
    if (radii.empty()) throw std::invalid_argument("empty radii grid");
    return radii;
}

// ---------------------------------------------------------------------------
// SVG emission. Hand-written primitives; plots are a convenience output.
// ---------------------------------------------------------------------------

void write_curves_svg(const std::string& path,
                      const std::vector<std::pair<std::string, std::vector<CurvePoint>>>& curves,
                      const std::string& title) {
    if (curves.empty() || curves.front().second.empty())
        throw std::invalid_argument("write_curves_svg: nothing to plot");
    constexpr int W = 640, H = 420;
    constexpr int ML = 56, MR = 16, MT = 36, MB = 44;
    const double plot_w = W - ML - MR, plot_h = H - MT - MB;

    double xmin = curves.front().second.front().rho.to_double();
    double xmax = xmin;
    for (const auto& [name, curve] : curves)
        for (const CurvePoint& p : curve) {
            xmin = std::min(xmin, p.rho.to_double());
            xmax = std::max(xmax, p.rho.to_double());
        }
    if (xmax <= xmin) xmax = xmin + 1.0;

    const auto X = [&](double v) { return ML + (v - xmin) / (xmax - xmin) * plot_w; };
    const auto Y = [&](double v) { return MT + (1.0 - v) * plot_h; };
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write SVG to '" + path + "'");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
        << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    // Axes.
    out << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\""
        << MT + plot_h << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ML << "\" y1=\"" << MT + plot_h << "\" x2=\"" << ML + plot_w
        << "\" y2=\"" << MT + plot_h << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fy = t / 4.0;
        out << "<line x1=\"" << ML - 4 << "\" y1=\"" << Y(fy) << "\" x2=\"" << ML
            << "\" y2=\"" << Y(fy) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << ML - 8 << "\" y=\"" << Y(fy) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << format_double(fy) << "</text>\n";
        const double fx = xmin + (xmax - xmin) * t / 4.0;
        out << "<line x1=\"" << X(fx) << "\" y1=\"" << MT + plot_h << "\" x2=\"" << X(fx)
            << "\" y2=\"" << MT + plot_h + 4 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << X(fx) << "\" y=\"" << MT + plot_h + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << format_double(fx) << "</text>\n";
    }
    out << "<text x=\"" << ML + plot_w / 2 << "\" y=\"" << H - 8
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << "certified radius (l1)</text>\n";
    out << "<text x=\"14\" y=\"" << MT + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 14 " << MT + plot_h / 2 << ")\">"
        << "certified accuracy</text>\n";
    // Curves + legend.
    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        const char* color = kColors[ci % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        for (const CurvePoint& p : curves[ci].second)
            out << X(p.rho.to_double()) << "," << Y(p.accuracy) << " ";
        out << "\"/>\n";
        const double ly = MT + 14.0 * (ci + 1);
        out << "<line x1=\"" << W - 150 << "\" y1=\"" << ly << "\" x2=\"" << W - 126
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << W - 120 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << curves[ci].first
            << "</text>\n";
    }
    out << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Benchmark.
// ---------------------------------------------------------------------------

BenchReport bench(const Dataset& ds, const ModelFile& model,
                  const std::vector<Method>& methods, std::int64_t n0,
                  std::int64_t n, double alpha, int repetitions, int threads) {
    if (repetitions < 1) throw std::invalid_argument("bench: repetitions must be >= 1");
    BenchReport report;
    report.n0 = n0;
    report.n = n;
    report.L = model.L;

    CertifyOptions opt;
    opt.n0 = n0;
    opt.n = n;
    opt.alpha = alpha;
    opt.threads = threads;
    opt.timings = true;

    double dssn_median = 0.0, mc_median = 0.0;
    std::int64_t dssn_evals = 0, mc_evals = 0;
    for (Method m : methods) {
        opt.method = m;
        const std::int64_t expected_evals = m == Method::Dssn ? model.L : n0 + n;
        std::vector<double> per_image;
        for (int rep = 0; rep < repetitions; ++rep) {
            opt.mc_seed = 1 + rep;
            const CertifyRun run = run_certify(ds, model, opt);
            for (const CertRow& row : run.rows) {
                per_image.push_back(row.wall_ms);
                if (row.cert.eval_count != expected_evals)
                    throw std::runtime_error(
                        "bench: " + method_name(m) + " reported " +
                        std::to_string(row.cert.eval_count) + " evaluations, expected " +
                        std::to_string(expected_evals));
            }
        }
        std::sort(per_image.begin(), per_image.end());
        BenchMethodStats stats;
        stats.method = m;
        stats.median_ms_per_image = per_image[per_image.size() / 2];
        stats.evals_per_image = expected_evals;
        stats.images = static_cast<long long>(ds.size());
        stats.repetitions = repetitions;
        report.methods.push_back(stats);
        if (m == Method::Dssn) { dssn_median = stats.median_ms_per_image; dssn_evals = expected_evals; }
        else { mc_median = stats.median_ms_per_image; mc_evals = expected_evals; }
    }
    if (dssn_evals > 0 && mc_evals > 0) {
        report.eval_ratio = Rational(mc_evals, dssn_evals); // measured, = (n0+n)/L
        report.wall_ratio = mc_median / dssn_median;
    }
    return report;
}

std::string BenchReport::to_json() const {
    nlohmann::ordered_json j;
    j["config"] = {{"n0", n0}, {"n", n}, {"L", L}};
    j["methods"] = nlohmann::ordered_json::array();
    for (const BenchMethodStats& s : methods) {
        j["methods"].push_back({{"method", method_name(s.method)},
                                {"median_ms_per_image", s.median_ms_per_image},
                                {"evals_per_image", s.evals_per_image},
                                {"images", s.images},
                                {"repetitions", s.repetitions}});
    }
    if (eval_ratio.num != 0) {
        j["eval_ratio"] = {{"num", eval_ratio.num},
                           {"den", eval_ratio.den},
                           {"value", eval_ratio.to_double()}};
        j["wall_ratio_mc_over_dssn"] = wall_ratio;
    }
    return j.dump(2) + "\n";
}

} // namespace ssn
