#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ssn/models.hpp"
#include "ssn/prng.hpp"
#include "ssn/rational.hpp"
#include "ssn/types.hpp"

namespace ssn {

/// Per-class vote counts: out of L base evaluations (exact) or n Monte-Carlo
/// draws. Index order follows the classifier's lexicographic class order.
struct SmoothedScores {
    enum class Kind { Exact, MonteCarlo };
    Kind kind = Kind::Exact;
    std::vector<std::int64_t> counts;
    std::int64_t total = 0;
};

struct Certificate {
    int predicted = 0;
    bool exact = true;
    bool abstained = false;
    Rational radius;              // exact path
    double radius_value = 0.0;    // same value as double; MC path fills only this
    double alpha = 0.0;           // failure rate of a probabilistic certificate
    std::int64_t eval_count = 0;  // base-classifier invocations
};

// ---------------------------------------------------------------------------
// Smoothed evaluation.
// ---------------------------------------------------------------------------

/// Exact derandomized evaluation: one base-classifier call per base index,
/// L = 2*lambda*q calls total. Deterministic function of (classifier, x, spec).
SmoothedScores smooth_exact_dssn(const BaseClassifier& cls, const QuantizedPoint& x,
                                 const SplitSpec& spec);

/// Same result, base indices partitioned across OpenMP threads and counts
/// merged by summation (order-independent, so bit-identical to the serial
/// kernel at any thread count).
SmoothedScores smooth_exact_dssn_parallel(const BaseClassifier& cls,
                                          const QuantizedPoint& x,
                                          const SplitSpec& spec, int threads);

/// Monte-Carlo voting under the model's sampling path. DSSN here means
/// "sample s_base at random" (the randomized view of the same scheme).
SmoothedScores smooth_monte_carlo(const BaseClassifier& cls, const QuantizedPoint& x,
                                  const NoiseModel& model, std::int64_t n,
                                  SplitMix64& rng);

/// Plurality class; ties go to the first class in lexicographic order.
int predict_index(const SmoothedScores& scores);

// ---------------------------------------------------------------------------
// Certification.
// ---------------------------------------------------------------------------

/// Exact certificate from full vote counts (multi-class gap). The certified
/// set is inclusive: prediction provably unchanged for every grid point with
/// l1 distance <= radius, accounting for the lexicographic tie rule.
Certificate certify_exact(const SmoothedScores& scores, int q);

/// One-vs-all variant: bounds every other class by total - counts[A].
/// Matches the information available to the randomized pipeline.
Certificate certify_exact_one_vs_all(const SmoothedScores& scores, int q);

/// Randomized pipeline: n0 samples pick the plurality class, n fresh samples
/// feed a one-sided lower confidence bound; abstains unless the bound
/// exceeds 1/2. radius = lambda * (2*p_lower - 1).
Certificate certify_randomized(const BaseClassifier& cls, const QuantizedPoint& x,
                               const NoiseModel& model, std::int64_t n0,
                               std::int64_t n, double alpha, SplitMix64& rng);

/// One-sided exact binomial (Clopper-Pearson) lower bound:
/// sup{ p : Pr[Bin(n,p) >= k] <= alpha }. Exact tail via the regularized
/// incomplete beta function, inverted by bisection to 1e-12. Never a normal
/// approximation.
double lower_confidence_bound(std::int64_t k, std::int64_t n, double alpha);

/// Pr[Bin(n,p) >= k], exact tail.
double binomial_upper_tail(std::int64_t k, std::int64_t n, double p);

double sigma_to_lambda(double sigma);
double lambda_to_sigma(double lambda);

} // namespace ssn
