#include "ssn/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

#include "ssn/noise.hpp"
#include "ssn/parallel.hpp"

namespace ssn {

namespace {

long long checked_pow(long long base, int exp, std::int64_t budget,
                      const char* what) {
    __int128 v = 1;
    bool saturated = false;
    for (int i = 0; i < exp && !saturated; ++i) {
        v *= base;
        if (v > (__int128)INT64_MAX) saturated = true;
    }
    if (saturated || v > budget) {
        const long long required = saturated ? INT64_MAX : (long long)v;
        throw BudgetExceeded(std::string(what) + " needs " +
                                 (saturated ? std::string("more than 9.2e18")
                                            : std::to_string(required)) +
                                 " evaluations, budget is " + std::to_string(budget),
                             required);
    }
    return (long long)v;
}

int classify_continuous(const BaseClassifier& cls, const QuantizedPoint& x,
                        const SplitVector& s) {
    const double lambda = static_cast<double>(s.L) / (2.0 * s.q);
    std::vector<double> xt(x.dim());
    for (int i = 0; i < x.dim(); ++i)
        xt[i] = split_transform_general(x.value(i), s.value(i), lambda);
    return cls.predict_hard(xt);
}

std::vector<std::int64_t> class_counts(const BaseClassifier& cls,
                                       const QuantizedPoint& x,
                                       const SplitSpec& spec, Joint joint,
                                       std::int64_t budget) {
    std::vector<std::int64_t> counts(cls.classes().size(), 0);
    if (joint == Joint::Correlated) {
        for (int b = 0; b < spec.L; ++b)
            ++counts[classify_continuous(cls, x, splits_from_base(b, spec))];
        return counts;
    }
    const long long total =
        checked_pow(spec.L, x.dim(), budget, "independent enumeration");
    SplitVector s;
    s.L = spec.L;
    s.q = spec.q;
    s.idx.assign(x.dim(), 0);
    for (long long it = 0; it < total; ++it) {
        ++counts[classify_continuous(cls, x, s)];
        for (int i = 0; i < x.dim(); ++i) {
            if (++s.idx[i] < spec.L) break;
            s.idx[i] = 0;
        }
    }
    return counts;
}

} // namespace

std::vector<QuantizedPoint> enumerate_grid(int d, int q, std::int64_t budget) {
    const long long total = checked_pow(q + 1, d, budget, "grid enumeration");
    std::vector<QuantizedPoint> grid;
    grid.reserve(total);
    QuantizedPoint p;
    p.q = q;
    p.levels.assign(d, 0);
    for (long long it = 0; it < total; ++it) {
        grid.push_back(p);
        for (int i = d - 1; i >= 0; --i) {
            if (++p.levels[i] <= q) break;
            p.levels[i] = 0;
        }
    }
    return grid;
}

std::vector<Rational> exact_smoothed_value(const BaseClassifier& cls,
                                           const QuantizedPoint& x,
                                           const SplitSpec& spec, Joint joint,
                                           std::int64_t budget) {
    const std::vector<std::int64_t> counts = class_counts(cls, x, spec, joint, budget);
    std::int64_t total = 0;
    for (std::int64_t c : counts) total += c;
    std::vector<Rational> probs(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c)
        probs[c] = Rational(counts[c], total);
    return probs;
}

namespace {

struct Best {
    Rational ratio;
    long long pair_index = -1;
    int cls = -1;

    // Deterministic across schedules: higher ratio wins, ties go to the
    // lower flattened pair index.
    bool beats(const Best& other) const {
        if (other.pair_index < 0) return pair_index >= 0;
        if (ratio != other.ratio) return other.ratio < ratio;
        return pair_index < other.pair_index;
    }
};

GridReport lipschitz_report(const BaseClassifier& cls, const SplitSpec& spec,
                            Joint joint, std::int64_t budget, int threads) {
    const int d = spec.dim();
    const std::vector<QuantizedPoint> grid = enumerate_grid(d, spec.q, budget);
    const long long P = static_cast<long long>(grid.size());
    const int C = static_cast<int>(cls.classes().size());

    std::vector<std::vector<std::int64_t>> counts(P);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long i = 0; i < P; ++i)
        counts[i] = class_counts(cls, grid[i], spec, joint, budget);

    std::int64_t total = 0;
    for (std::int64_t c : counts[0]) total += c;

    Best best;
#pragma omp parallel num_threads(threads)
    {
        Best local;
#pragma omp for schedule(dynamic, 4) nowait
        for (long long i = 0; i < P; ++i) {
            for (long long j = i + 1; j < P; ++j) {
                long long m = 0;
                for (int k = 0; k < d; ++k)
                    m += std::llabs(grid[i].levels[k] - grid[j].levels[k]);
                for (int c = 0; c < C; ++c) {
                    const std::int64_t dc = std::llabs(counts[i][c] - counts[j][c]);
                    // |p - p'| * 2*lambda / |delta|_1 = dc * L / (total * m)
                    Rational ratio = Rational::from128((__int128)dc * spec.L,
                                                       (__int128)total * m);
                    Best cand{ratio, i * P + j, c};
                    if (cand.beats(local)) local = cand;
                }
            }
        }
#pragma omp critical(ssn_lip_merge)
        if (local.beats(best)) best = local;
    }

    GridReport report;
    report.pairs_checked = P * (P - 1) / 2;
    report.max_ratio = best.pair_index >= 0 ? best.ratio : Rational(0);
    if (best.pair_index >= 0) {
        report.witness_a = grid[best.pair_index / P];
        report.witness_b = grid[best.pair_index % P];
        report.witness_class = best.cls;
    }
    return report;
}

} // namespace

GridReport verify_lipschitz_grid(const BaseClassifier& cls, const SplitSpec& spec,
                                 Joint joint, std::int64_t budget, int threads) {
    return lipschitz_report(cls, spec, joint, budget, resolve_threads(threads));
}

GridReport verify_lipschitz_grid_serial(const BaseClassifier& cls,
                                        const SplitSpec& spec, Joint joint,
                                        std::int64_t budget) {
    return lipschitz_report(cls, spec, joint, budget, 1);
}

CounterexampleReport correlated_additive_counterexample() {
    // f(z) = 1[z1 > 2/5 + z2] with eps2 = eps1 is constant along the
    // correlated line: f(x + eps*1) = 1[x1 - x2 > 2/5] for every eps, so the
    // expectation needs no integration.
    const Rational threshold(2, 5);
    const auto smoothed = [&](const Rational& x1, const Rational& x2) {
        return (x1 - x2 > threshold) ? Rational(1) : Rational(0);
    };
    const Rational x1(4, 5), x2(1, 5);
    const Rational y1(3, 5), y2(2, 5);

    CounterexampleReport r;
    r.p_x = smoothed(x1, x2);
    r.p_x_prime = smoothed(y1, y2);
    r.delta_l1 = (y1 - x1).abs() + (y2 - x2).abs();
    r.ratio = (r.p_x - r.p_x_prime).abs() / r.delta_l1;
    r.lipschitz_bound_violated = r.ratio > Rational(1);
    return r;
}

FlipReport check_flip_probability(const QuantizedPoint& x, const QuantizedPoint& x2,
                                  const SplitSpec& spec) {
    if (x.dim() != x2.dim() || x.q != x2.q)
        throw std::invalid_argument("check_flip_probability: points must share (d, q)");
    if (x.dim() != spec.dim() || x.q != spec.q)
        throw std::invalid_argument("check_flip_probability: points do not match spec");
    const int d = x.dim();
    std::vector<std::int64_t> coord_flips(d, 0);
    std::int64_t any_flips = 0;
    for (int b = 0; b < spec.L; ++b) {
        const SplitVector s = splits_from_base(b, spec);
        bool any = false;
        for (int i = 0; i < d; ++i) {
            const int ka = noisy_level_general(x.levels[i], s.idx[i], x.q, spec.L);
            const int kb = noisy_level_general(x2.levels[i], s.idx[i], x.q, spec.L);
            if (ka != kb) {
                ++coord_flips[i];
                any = true;
            }
        }
        if (any) ++any_flips;
    }
    FlipReport report;
    report.per_coordinate.resize(d);
    Rational sum(0);
    for (int i = 0; i < d; ++i) {
        report.per_coordinate[i] = Rational(coord_flips[i], spec.L);
        sum = sum + report.per_coordinate[i];
    }
    report.whole_vector = Rational(any_flips, spec.L);
    report.union_bound = std::min(Rational(1), sum);
    return report;
}

bool check_marginal_pushforward(int L, int q) {
    if (L != q)
        throw std::invalid_argument(
            "check_marginal_pushforward: requires lambda = 0.5 (L == q); the "
            "correspondence is non-affine otherwise");
    const Rational lambda(1, 2);
    for (int a = 0; a <= q; ++a) {
        std::vector<int> additive, splitting;
        additive.reserve(q);
        splitting.reserve(q);
        for (int j = 0; j < q; ++j) {
            // eps on half-step offsets in (-lambda, lambda): (2j+1)/(2q) - 1/2.
            const Rational eps = Rational(2 * j + 1, 2 * q) - lambda;
            const Rational mapped = marginal_map_g(Rational(a, q) + eps, lambda);
            additive.push_back(static_cast<int>((mapped * Rational(4 * q)).num));
            splitting.push_back(noisy_level_simple(a, j, q, L));
        }
        std::sort(additive.begin(), additive.end());
        std::sort(splitting.begin(), splitting.end());
        if (additive != splitting) return false;
    }
    return true;
}

DegenerateReport check_degenerate_equal_splits(const SplitSpec& spec,
                                               const BaseClassifier& cls,
                                               std::int64_t budget) {
    if (spec.L < spec.q)
        throw std::invalid_argument(
            "check_degenerate_equal_splits: requires lambda >= 0.5 (L >= q)");
    DegenerateReport report;
    report.L = spec.L;
    for (int b = 0; b < spec.L; ++b) {
        const SplitVector s = splits_from_base(b, spec);
        bool all_above_one = true;
        for (int i = 0; i < spec.dim(); ++i)
            if (2 * s.idx[i] + 1 < 2 * spec.q) { all_above_one = false; break; }
        if (all_above_one) ++report.degenerate_bases;
    }
    report.fraction = Rational(report.degenerate_bases, spec.L);
    report.excess_bound = Rational(spec.L - report.degenerate_bases, spec.L);

    // Constant term: the degenerate bases all evaluate f at 0.5*1.
    const std::vector<double> center(spec.dim(), 0.5);
    const int center_class = cls.predict_hard(center);
    const int C = static_cast<int>(cls.classes().size());

    Rational max_excess(0);
    for (const QuantizedPoint& x : enumerate_grid(spec.dim(), spec.q, budget)) {
        const std::vector<Rational> probs =
            exact_smoothed_value(cls, x, spec, Joint::Correlated, budget);
        for (int c = 0; c < C; ++c) {
            const Rational constant =
                c == center_class ? report.fraction : Rational(0);
            max_excess = std::max(max_excess, (probs[c] - constant).abs());
        }
    }
    report.max_excess = max_excess;
    report.expressivity_ok = max_excess <= report.excess_bound;
    return report;
}

} // namespace ssn
