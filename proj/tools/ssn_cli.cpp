#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ssn/certify.hpp"
#include "ssn/dataset.hpp"
#include "ssn/harness.hpp"
#include "ssn/models.hpp"
#include "ssn/noise.hpp"
#include "ssn/oracle.hpp"
#include "ssn/parallel.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 2;
constexpr int kExitInputError = 3;

struct NoiseScale {
    double lambda = 0.0;
    double sigma = 0.0;
    bool from_sigma = false;
};

void add_scale_options(CLI::App* cmd, NoiseScale& scale) {
    auto* lam = cmd->add_option("--lambda", scale.lambda, "smoothing scale lambda");
    auto* sig = cmd->add_option("--sigma", scale.sigma,
                                "noise level sigma = lambda/sqrt(3)");
    lam->excludes(sig);
    sig->excludes(lam);
}

// Resolves --sigma/--lambda to the quantized L and echoes the conversions.
int resolve_scale(NoiseScale& scale, int q) {
    if (scale.sigma > 0.0 && scale.lambda == 0.0) {
        scale.lambda = ssn::sigma_to_lambda(scale.sigma);
        scale.from_sigma = true;
    }
    if (scale.lambda <= 0.0)
        throw std::invalid_argument("one of --lambda or --sigma is required (> 0)");
    const int L = ssn::quantize_lambda(scale.lambda, q);
    const double quantized = static_cast<double>(L) / (2.0 * q);
    std::cerr << "# scale: ";
    if (scale.from_sigma)
        std::cerr << "sigma=" << scale.sigma << " -> lambda=" << scale.lambda << ", ";
    else
        std::cerr << "lambda=" << scale.lambda << ", ";
    std::cerr << "quantized lambda'=" << quantized << " (L=" << L << ", q=" << q
              << "), sigma'=" << ssn::lambda_to_sigma(quantized) << "\n";
    return L;
}

int run_verify(int q, int L, int d, int n_classifiers, std::uint64_t seed,
               long long budget, int threads, int classes) {
    using namespace ssn;
    int violations = 0;
    const auto check = [&](bool ok, const std::string& what) {
        std::cout << (ok ? "ok   " : "FAIL ") << what << "\n";
        if (!ok) ++violations;
    };

    std::cout << "verify: q=" << q << " L=" << L << " d=" << d
              << " classifiers=" << n_classifiers << " seed=" << seed << "\n";

    // Lipschitz bound over seeded random table classifiers, both joints.
    Rational worst_corr(0), worst_indep(0);
    const SplitSpec spec = make_split_spec("mt19937", seed, d, L, q);
    for (int t = 0; t < n_classifiers; ++t) {
        const RandomTableClassifier cls(seed + 1000 + t, classes, q);
        const GridReport corr =
            verify_lipschitz_grid(cls, spec, Joint::Correlated, budget, threads);
        worst_corr = std::max(worst_corr, corr.max_ratio);
        const GridReport indep =
            verify_lipschitz_grid(cls, spec, Joint::Independent, budget, threads);
        worst_indep = std::max(worst_indep, indep.max_ratio);
    }
    check(worst_corr <= Rational(1),
          "correlated splitting: max |dp|*2*lambda/|delta|_1 = " + worst_corr.str());
    check(worst_indep <= Rational(1),
          "independent splitting: max |dp|*2*lambda/|delta|_1 = " + worst_indep.str());

    // Engine/oracle agreement on the same classifiers.
    {
        bool agree = true;
        for (int t = 0; t < std::min(n_classifiers, 16); ++t) {
            const RandomTableClassifier cls(seed + 1000 + t, classes, q);
            for (const QuantizedPoint& x : enumerate_grid(d, q, budget)) {
                const SmoothedScores scores = smooth_exact_dssn(cls, x, spec);
                const std::vector<Rational> probs =
                    exact_smoothed_value(cls, x, spec, Joint::Correlated, budget);
                for (std::size_t c = 0; c < probs.size(); ++c)
                    if (probs[c] != Rational(scores.counts[c], scores.total))
                        agree = false;
            }
        }
        check(agree, "derandomized engine matches enumeration oracle exactly");
    }

    // Per-coordinate flip fractions match |delta_i| * q / L.
    {
        bool flips_ok = true;
        const auto grid = enumerate_grid(d, q, budget);
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (std::size_t j = 0; j < grid.size(); ++j) {
                const FlipReport rep = check_flip_probability(grid[i], grid[j], spec);
                for (int kcoord = 0; kcoord < d; ++kcoord) {
                    const long long m =
                        std::llabs(grid[i].levels[kcoord] - grid[j].levels[kcoord]);
                    const Rational expected(std::min<long long>(m, L), L);
                    if (rep.per_coordinate[kcoord] != expected) flips_ok = false;
                }
                if (rep.whole_vector > rep.union_bound) flips_ok = false;
            }
        check(flips_ok, "flip fractions equal |delta_i|/(2*lambda), union bound holds");
    }

    // lambda = 0.5 marginal pushforward.
    check(check_marginal_pushforward(q, q),
          "lambda=0.5 splitting marginal equals mapped additive marginal");

    // Degenerate equal-splits analysis (only defined for lambda >= 0.5).
    if (L >= q) {
        SplitSpec zero = spec;
        std::fill(zero.v.begin(), zero.v.end(), 0);
        const RandomTableClassifier cls(seed + 7, classes, q);
        const DegenerateReport rep = check_degenerate_equal_splits(zero, cls, budget);
        check(rep.degenerate_bases == L - q &&
                  rep.fraction == Rational(L - q, L) && rep.expressivity_ok,
              "equal-splits degeneracy: " + std::to_string(rep.degenerate_bases) + "/" +
                  std::to_string(L) + " bases uninformative, |p - const| <= " +
                  rep.excess_bound.str());
    }

    // The additive-noise counterexample must violate its 1-Lipschitz claim.
    const CounterexampleReport prop = correlated_additive_counterexample();
    check(prop.lipschitz_bound_violated && prop.p_x == Rational(1) &&
              prop.p_x_prime == Rational(0) && prop.ratio == Rational(5, 2),
          "correlated additive noise: |dp|/|delta|_1 = " + prop.ratio.str() +
              " (no 1-Lipschitz guarantee, as constructed)");

    if (violations > 0) {
        std::cout << violations << " invariant(s) violated\n";
        return kExitViolation;
    }
    std::cout << "all invariants hold\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SSN/DSSN l1-robustness certification engine"};
    app.require_subcommand(1);

    // synth ------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate a synthetic quantized dataset");
    std::string synth_out;
    std::uint64_t synth_seed = 0;
    int synth_d = 2, synth_q = 8, synth_classes = 2, synth_n = 50;
    double synth_sep = 0.5;
    synth->add_option("--out", synth_out, "output CSV path")->required();
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--d", synth_d, "dimension");
    synth->add_option("--q", synth_q, "quantization denominator");
    synth->add_option("--classes", synth_classes, "number of classes");
    synth->add_option("--per-class", synth_n, "samples per class");
    synth->add_option("--separation", synth_sep, "cluster mean spread in [0,1]");

    // train ------------------------------------------------------------
    auto* train = app.add_subcommand("train", "train a linear softmax model under noise");
    std::string train_data, train_out, train_noise = "dssn", train_gen = "mt19937";
    int train_q = 8, train_epochs = 30, train_batch = 16;
    double train_lr = 0.5;
    std::uint64_t train_seed = 0, train_vseed = 0;
    NoiseScale train_scale;
    train->add_option("--data", train_data, "training CSV")->required();
    train->add_option("--q", train_q, "quantization denominator")->required();
    train->add_option("--out", train_out, "output model path")->required();
    train->add_option("--noise", train_noise, "training noise: dssn|ssn|uniform");
    add_scale_options(train, train_scale);
    train->add_option("--epochs", train_epochs, "training epochs");
    train->add_option("--lr", train_lr, "initial learning rate (cosine annealed)");
    train->add_option("--batch", train_batch, "batch size");
    train->add_option("--seed", train_seed, "training seed");
    train->add_option("--v-seed", train_vseed, "offset vector seed");
    train->add_option("--generator", train_gen, "offset generator id");

    // certify ----------------------------------------------------------
    auto* certify = app.add_subcommand("certify", "certify a dataset against a model");
    std::string cert_model, cert_data, cert_method = "dssn", cert_out, cert_gap = "multiclass";
    std::int64_t cert_n0 = 64, cert_n = 100000;
    double cert_alpha = 0.001;
    int cert_threads = 0;
    std::uint64_t cert_seed = 1;
    bool cert_timings = false;
    certify->add_option("--model", cert_model, "model path")->required();
    certify->add_option("--data", cert_data, "dataset CSV")->required();
    certify->add_option("--out", cert_out, "output certificate CSV")->required();
    certify->add_option("--method", cert_method, "dssn|ssn-mc|uniform-mc");
    certify->add_option("--n0", cert_n0, "selection samples (Monte-Carlo)");
    certify->add_option("--n", cert_n, "estimation samples (Monte-Carlo)");
    certify->add_option("--alpha", cert_alpha, "certificate failure rate");
    certify->add_option("--threads", cert_threads, "worker threads (default SSN_THREADS)");
    certify->add_option("--seed", cert_seed, "Monte-Carlo seed");
    certify->add_option("--gap", cert_gap, "dssn gap: multiclass|one-vs-all");
    certify->add_flag("--timings", cert_timings,
                      "append per-row wall times (breaks byte-stability)");

    // curve --------------------------------------------------------------
    auto* curve = app.add_subcommand("curve", "certified-accuracy curve from certificates");
    std::vector<std::string> curve_certs;
    std::string curve_radii = "0:1:0.125", curve_out, curve_svg, curve_envelope;
    curve->add_option("--certs", curve_certs, "certificate CSV(s)")->required();
    curve->add_option("--radii", curve_radii, "grid: start:stop:step or comma list");
    curve->add_option("--out", curve_out, "output curve CSV (per input, suffixed)")->required();
    curve->add_option("--svg", curve_svg, "optional SVG plot path");
    curve->add_option("--envelope", curve_envelope, "optional max-envelope CSV path");

    // verify -------------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "brute-force verification of the bounds");
    int ver_q = 4, ver_L = 0, ver_d = 2, ver_classifiers = 50, ver_threads = 0, ver_classes = 3;
    std::uint64_t ver_seed = 0;
    long long ver_budget = ssn::kDefaultOracleBudget;
    verify->add_option("--q", ver_q, "quantization denominator");
    verify->add_option("--L", ver_L, "split count (default 2q, lambda=1)");
    verify->add_option("--d", ver_d, "dimension");
    verify->add_option("--classifiers", ver_classifiers, "random table classifiers");
    verify->add_option("--classes", ver_classes, "classes per random classifier");
    verify->add_option("--seed", ver_seed, "base seed");
    verify->add_option("--budget", ver_budget, "enumeration budget");
    verify->add_option("--threads", ver_threads, "worker threads");

    // bench --------------------------------------------------------------
    auto* bench_cmd = app.add_subcommand("bench", "compare dssn and Monte-Carlo runtime");
    std::string bench_model, bench_data, bench_out;
    std::vector<std::string> bench_methods = {"dssn", "uniform-mc"};
    std::int64_t bench_n0 = 64, bench_n = 100000;
    int bench_reps = 3, bench_threads = 0;
    bench_cmd->add_option("--model", bench_model, "model path")->required();
    bench_cmd->add_option("--data", bench_data, "dataset CSV")->required();
    bench_cmd->add_option("--methods", bench_methods, "methods to time");
    bench_cmd->add_option("--n0", bench_n0, "selection samples");
    bench_cmd->add_option("--n", bench_n, "estimation samples");
    bench_cmd->add_option("--reps", bench_reps, "repetitions");
    bench_cmd->add_option("--threads", bench_threads, "worker threads");
    bench_cmd->add_option("--out", bench_out, "write JSON report here (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (synth->parsed()) {
            const ssn::Dataset ds = ssn::synth_dataset(synth_seed, synth_d, synth_q,
                                                       synth_classes, synth_n, synth_sep);
            ssn::save_dataset(ds, synth_out);
            std::cerr << "# wrote " << ds.size() << " points (d=" << ds.d
                      << ", q=" << ds.q << ") to " << synth_out << "\n";
        } else if (train->parsed()) {
            const ssn::Dataset ds = ssn::load_dataset(train_data, train_q);
            const int L = resolve_scale(train_scale, train_q);
            ssn::NoiseModel noise;
            noise.kind = ssn::parse_noise_kind(train_noise);
            noise.spec = ssn::make_split_spec(train_gen, train_vseed, ds.d, L, train_q);
            ssn::TrainConfig cfg;
            cfg.epochs = train_epochs;
            cfg.lr0 = train_lr;
            cfg.batch_size = train_batch;
            cfg.seed = train_seed;
            const ssn::ModelFile model = ssn::train_linear(ds, noise, cfg);
            ssn::save_model(model, train_out);
            std::cerr << "# trained " << model.kind << " model (" << model.labels.size()
                      << " classes) -> " << train_out << "\n";
        } else if (certify->parsed()) {
            const ssn::ModelFile model = ssn::load_model(cert_model);
            const ssn::Dataset ds = ssn::load_dataset(cert_data, model.q);
            ssn::CertifyOptions opt;
            opt.method = ssn::parse_method(cert_method);
            opt.n0 = cert_n0;
            opt.n = cert_n;
            opt.alpha = cert_alpha;
            opt.threads = cert_threads;
            opt.timings = cert_timings;
            opt.mc_seed = cert_seed;
            if (cert_gap == "one-vs-all") opt.one_vs_all = true;
            else if (cert_gap != "multiclass")
                throw std::invalid_argument("--gap must be multiclass or one-vs-all");
            const ssn::CertifyRun run = ssn::run_certify(ds, model, opt);
            ssn::write_certificates(run, cert_out);
            std::cerr << "# certified " << run.rows.size() << " points -> " << cert_out
                      << "\n";
        } else if (curve->parsed()) {
            const std::vector<ssn::Rational> radii = ssn::parse_radii(curve_radii);
            std::vector<std::pair<std::string, std::vector<ssn::CurvePoint>>> named;
            std::vector<std::vector<ssn::CurvePoint>> all;
            for (std::size_t i = 0; i < curve_certs.size(); ++i) {
                const auto rows = ssn::read_certificates(curve_certs[i]);
                auto pts = ssn::certified_accuracy_curve(rows, radii);
                std::string out_path = curve_out;
                if (curve_certs.size() > 1) {
                    const std::size_t dot = out_path.rfind('.');
                    const std::string suffix = "." + std::to_string(i);
                    if (dot == std::string::npos) out_path += suffix;
                    else out_path.insert(dot, suffix);
                }
                ssn::write_curve_csv(pts, out_path);
                std::cerr << "# wrote curve " << out_path << "\n";
                named.emplace_back(curve_certs[i], pts);
                all.push_back(std::move(pts));
            }
            if (!curve_envelope.empty()) {
                ssn::write_curve_csv(ssn::max_envelope(all), curve_envelope);
                std::cerr << "# wrote envelope " << curve_envelope << "\n";
            }
            if (!curve_svg.empty())
                ssn::write_curves_svg(curve_svg, named, "certified accuracy");
        } else if (verify->parsed()) {
            if (ver_L == 0) ver_L = 2 * ver_q;
            return run_verify(ver_q, ver_L, ver_d, ver_classifiers, ver_seed, ver_budget,
                              ver_threads, ver_classes);
        } else if (bench_cmd->parsed()) {
            const ssn::ModelFile model = ssn::load_model(bench_model);
            const ssn::Dataset ds = ssn::load_dataset(bench_data, model.q);
            std::vector<ssn::Method> methods;
            for (const std::string& m : bench_methods)
                methods.push_back(ssn::parse_method(m));
            const ssn::BenchReport report = ssn::bench(ds, model, methods, bench_n0,
                                                       bench_n, 0.001, bench_reps,
                                                       bench_threads);
            if (bench_out.empty()) {
                std::cout << report.to_json();
            } else {
                std::ofstream out(bench_out, std::ios::binary);
                if (!out) throw std::runtime_error("cannot write '" + bench_out + "'");
                out << report.to_json();
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitOk;
}
