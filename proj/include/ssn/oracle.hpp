#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssn/models.hpp"
#include "ssn/rational.hpp"
#include "ssn/types.hpp"

namespace ssn {

/// Enumeration refuses rather than truncates when it would exceed its
/// budget; the message and field carry the required count.
struct BudgetExceeded : std::runtime_error {
    BudgetExceeded(const std::string& what, long long required_count)
        : std::runtime_error(what), required(required_count) {}
    long long required;
};

enum class Joint { Correlated, Independent };

constexpr std::int64_t kDefaultOracleBudget = 1'000'000;

/// Exact per-class smoothed probabilities by full enumeration, evaluated
/// through the continuous transform (a second arithmetic route, independent
/// of the integer engine path). Correlated: L base values, denominator L.
/// Independent: all L^d split vectors, denominator L^d, subject to budget.
std::vector<Rational> exact_smoothed_value(const BaseClassifier& cls,
                                           const QuantizedPoint& x,
                                           const SplitSpec& spec, Joint joint,
                                           std::int64_t budget = kDefaultOracleBudget);

struct GridReport {
    Rational max_ratio;       // max over pairs, classes of |dp| * 2*lambda / |delta|_1
    QuantizedPoint witness_a; // argmax pair
    QuantizedPoint witness_b;
    int witness_class = -1;
    long long pairs_checked = 0;
};

/// Exhaustive Lipschitz check over the whole (q+1)^d grid: the bound
/// predicts max_ratio <= 1 for both joint modes. Exact rational arithmetic,
/// no tolerances.
GridReport verify_lipschitz_grid(const BaseClassifier& cls, const SplitSpec& spec,
                                 Joint joint,
                                 std::int64_t budget = kDefaultOracleBudget,
                                 int threads = 0);
GridReport verify_lipschitz_grid_serial(const BaseClassifier& cls,
                                        const SplitSpec& spec, Joint joint,
                                        std::int64_t budget = kDefaultOracleBudget);

/// The closed-form counterexample showing correlated *additive* uniform
/// noise admits no 1-Lipschitz guarantee: f(z) = 1[z1 > 0.4 + z2],
/// eps1 = eps2 ~ U(-1/2, 1/2), x = (4/5, 1/5), x' = (3/5, 2/5).
struct CounterexampleReport {
    Rational p_x;
    Rational p_x_prime;
    Rational delta_l1;
    Rational ratio;
    bool lipschitz_bound_violated = false;
};
CounterexampleReport correlated_additive_counterexample();

/// Exact per-coordinate flip fractions between two points under the
/// derandomized enumeration: fraction of base indices with x~_i != x~'_i.
struct FlipReport {
    std::vector<Rational> per_coordinate;
    Rational whole_vector; // fraction of bases with x~ != x~' anywhere
    Rational union_bound;  // min(1, sum of per-coordinate fractions)
};
FlipReport check_flip_probability(const QuantizedPoint& x, const QuantizedPoint& x2,
                                  const SplitSpec& spec);

/// lambda = 0.5 marginal equivalence: for every level, the multiset of
/// g(x + eps) over the half-step additive offsets equals the multiset of
/// noisy values over the L split positions. Exact; refuses when L != q.
bool check_marginal_pushforward(int L, int q);

/// Degenerate-splits analysis for the equal-splits scheme: counts base
/// indices whose split vector has every s_i > 1 (noisy point 0.5*1) and
/// confirms the expressivity bound |p_c(x) - const_c| <= (L - degenerate)/L
/// over the whole grid.
struct DegenerateReport {
    long long degenerate_bases = 0;
    int L = 1;
    Rational fraction;
    Rational max_excess;
    Rational excess_bound;
    bool expressivity_ok = false;
};
DegenerateReport check_degenerate_equal_splits(const SplitSpec& spec,
                                               const BaseClassifier& cls,
                                               std::int64_t budget = kDefaultOracleBudget);

/// All (q+1)^d grid points in row-major order, subject to budget.
std::vector<QuantizedPoint> enumerate_grid(int d, int q,
                                           std::int64_t budget = kDefaultOracleBudget);

} // namespace ssn
