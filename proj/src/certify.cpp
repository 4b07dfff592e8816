#include "ssn/certify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <omp.h>

#include "ssn/noise.hpp"

namespace ssn {

namespace {

void check_shapes(const BaseClassifier& cls, const QuantizedPoint& x,
                  const SplitSpec& spec) {
    if (x.q != spec.q)
        throw std::invalid_argument("smoothing: point q does not match spec q");
    if (x.dim() != spec.dim())
        throw std::invalid_argument("smoothing: point dimension does not match spec");
    if (cls.classes().empty())
        throw std::invalid_argument("smoothing: classifier has no classes");
}

} // namespace

SmoothedScores smooth_exact_dssn(const BaseClassifier& cls, const QuantizedPoint& x,
                                 const SplitSpec& spec) {
    check_shapes(cls, x, spec);
    SmoothedScores out;
    out.kind = SmoothedScores::Kind::Exact;
    out.counts.assign(cls.classes().size(), 0);
    out.total = spec.L;
    std::vector<int> ks(x.dim());
    for (int b = 0; b < spec.L; ++b) {
        for (int i = 0; i < x.dim(); ++i) {
            const int j = (b + spec.v[i]) % spec.L;
            ks[i] = noisy_level_general(x.levels[i], j, x.q, spec.L);
        }
        int c;
        try {
            c = cls.predict_levels(ks, x.q);
        } catch (const std::exception& e) {
            throw std::runtime_error("base classifier failed at base index " +
                                     std::to_string(b) + ": " + e.what());
        }
        ++out.counts[c];
    }
    return out;
}

SmoothedScores smooth_exact_dssn_parallel(const BaseClassifier& cls,
                                          const QuantizedPoint& x,
                                          const SplitSpec& spec, int threads) {
    check_shapes(cls, x, spec);
    SmoothedScores out;
    out.kind = SmoothedScores::Kind::Exact;
    out.counts.assign(cls.classes().size(), 0);
    out.total = spec.L;

    std::string failure;
#pragma omp parallel num_threads(threads)
    {
        std::vector<std::int64_t> local(out.counts.size(), 0);
        std::vector<int> ks(x.dim());
#pragma omp for schedule(static) nowait
        for (int b = 0; b < spec.L; ++b) {
            for (int i = 0; i < x.dim(); ++i) {
                const int j = (b + spec.v[i]) % spec.L;
                ks[i] = noisy_level_general(x.levels[i], j, x.q, spec.L);
            }
            try {
                ++local[cls.predict_levels(ks, x.q)];
            } catch (const std::exception& e) {
#pragma omp critical(ssn_dssn_fail)
                if (failure.empty())
                    failure = "base classifier failed at base index " +
                              std::to_string(b) + ": " + e.what();
            }
        }
#pragma omp critical(ssn_dssn_merge)
        for (std::size_t c = 0; c < local.size(); ++c) out.counts[c] += local[c];
    }
    if (!failure.empty()) throw std::runtime_error(failure);
    return out;
}

SmoothedScores smooth_monte_carlo(const BaseClassifier& cls, const QuantizedPoint& x,
                                  const NoiseModel& model, std::int64_t n,
                                  SplitMix64& rng) {
    if (n < 1) throw std::invalid_argument("smooth_monte_carlo: n must be >= 1");
    SmoothedScores out;
    out.kind = SmoothedScores::Kind::MonteCarlo;
    out.counts.assign(cls.classes().size(), 0);
    out.total = n;

    const SplitSpec& spec = model.spec;
    const std::vector<double> xv = x.values();
    std::vector<int> ks(x.dim());
    for (std::int64_t t = 0; t < n; ++t) {
        int c = 0;
        switch (model.kind) {
            case NoiseKind::IndependentSSN: {
                for (int i = 0; i < x.dim(); ++i) {
                    const int j = static_cast<int>(rng.below(spec.L));
                    ks[i] = noisy_level_general(x.levels[i], j, x.q, spec.L);
                }
                c = cls.predict_levels(ks, x.q);
                break;
            }
            case NoiseKind::DSSN: {
                const int b = static_cast<int>(rng.below(spec.L));
                for (int i = 0; i < x.dim(); ++i) {
                    const int j = (b + spec.v[i]) % spec.L;
                    ks[i] = noisy_level_general(x.levels[i], j, x.q, spec.L);
                }
                c = cls.predict_levels(ks, x.q);
                break;
            }
            case NoiseKind::UniformAdditive: {
                const std::vector<double> noisy =
                    uniform_additive_sample(rng, xv, model.lambda());
                c = cls.predict_hard(noisy);
                break;
            }
        }
        ++out.counts[c];
    }
    return out;
}

int predict_index(const SmoothedScores& scores) {
    if (scores.counts.empty())
        throw std::invalid_argument("predict: no classes");
    return argmax_first<std::int64_t>(scores.counts);
}

namespace {

// Radius numerator in units of 1/(2q) for the pair (winner, challenger).
// One adversarial flip can move a vote from the winner directly to the
// challenger (gap shrinks by 2 per flip), and a resulting tie goes to the
// lexicographically-first class. The plain gap/(2q) is kept except when the
// challenger wins ties (it precedes the winner) and the gap is even; one
// half-step is shaved off so the inclusive guarantee survives that tie.
std::int64_t pair_radius_num(std::int64_t gap, bool challenger_wins_ties) {
    if (gap <= 0) return 0;
    if (challenger_wins_ties && gap % 2 == 0) return gap - 1;
    return gap;
}

Certificate exact_certificate(int winner, std::int64_t radius_num,
                              std::int64_t total, int q) {
    Certificate cert;
    cert.predicted = winner;
    cert.exact = true;
    cert.abstained = false;
    cert.eval_count = total;
    cert.radius = Rational(std::max<std::int64_t>(radius_num, 0), 2LL * q);
    cert.radius_value = cert.radius.to_double();
    return cert;
}

} // namespace

Certificate certify_exact(const SmoothedScores& scores, int q) {
    if (scores.kind != SmoothedScores::Kind::Exact)
        throw std::invalid_argument("certify_exact: scores are not exact");
    const int a = predict_index(scores);
    std::int64_t num = scores.total; // unopposed winner: radius lambda
    for (int c = 0; c < static_cast<int>(scores.counts.size()); ++c) {
        if (c == a) continue;
        num = std::min(num, pair_radius_num(scores.counts[a] - scores.counts[c],
                                            /*challenger_wins_ties=*/c < a));
    }
    return exact_certificate(a, num, scores.total, q);
}

Certificate certify_exact_one_vs_all(const SmoothedScores& scores, int q) {
    if (scores.kind != SmoothedScores::Kind::Exact)
        throw std::invalid_argument("certify_exact_one_vs_all: scores are not exact");
    const int a = predict_index(scores);
    // The pseudo-challenger holds total - counts[a] votes and could be any
    // class, so it wins ties unless the winner is lexicographically first.
    const std::int64_t gap = 2 * scores.counts[a] - scores.total;
    return exact_certificate(a, pair_radius_num(gap, a > 0), scores.total, q);
}

// ---------------------------------------------------------------------------
// Exact binomial tail and its inversion.
// ---------------------------------------------------------------------------

namespace {

// Regularized incomplete beta I_x(a,b) by continued fraction (Lentz).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double reg_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

} // namespace

double binomial_upper_tail(std::int64_t k, std::int64_t n, double p) {
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    return reg_inc_beta(static_cast<double>(k), static_cast<double>(n - k + 1), p);
}

double lower_confidence_bound(std::int64_t k, std::int64_t n, double alpha) {
    if (n < 1 || k < 0 || k > n)
        throw std::invalid_argument("lower_confidence_bound: need 0 <= k <= n, n >= 1");
    if (alpha <= 0.0 || alpha >= 1.0)
        throw std::invalid_argument("lower_confidence_bound: need 0 < alpha < 1");
    if (k == 0) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (binomial_upper_tail(k, n, mid) <= alpha)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

Certificate certify_randomized(const BaseClassifier& cls, const QuantizedPoint& x,
                               const NoiseModel& model, std::int64_t n0,
                               std::int64_t n, double alpha, SplitMix64& rng) {
    if (n0 < 1 || n < 1)
        throw std::invalid_argument("certify_randomized: n0 and n must be >= 1");
    if (alpha <= 0.0 || alpha >= 1.0)
        throw std::invalid_argument("certify_randomized: need 0 < alpha < 1");
    const SmoothedScores guess = smooth_monte_carlo(cls, x, model, n0, rng);
    const int a = predict_index(guess);
    const SmoothedScores votes = smooth_monte_carlo(cls, x, model, n, rng);
    const double p_lower = lower_confidence_bound(votes.counts[a], n, alpha);

    Certificate cert;
    cert.predicted = a;
    cert.exact = false;
    cert.alpha = alpha;
    cert.eval_count = n0 + n;
    if (p_lower > 0.5) {
        cert.abstained = false;
        cert.radius_value = model.lambda() * (2.0 * p_lower - 1.0);
    } else {
        cert.abstained = true;
        cert.radius_value = 0.0;
    }
    return cert;
}

double sigma_to_lambda(double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("sigma_to_lambda: sigma must be > 0");
    return sigma * std::sqrt(3.0);
}

double lambda_to_sigma(double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("lambda_to_sigma: lambda must be > 0");
    return lambda / std::sqrt(3.0);
}

} // namespace ssn
