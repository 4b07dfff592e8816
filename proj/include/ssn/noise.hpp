#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ssn/prng.hpp"
#include "ssn/types.hpp"

namespace ssn {

// ---------------------------------------------------------------------------
// Derandomized offset scheme.
// ---------------------------------------------------------------------------

/// Deterministic offset vector v with entries in {0,..,L-1}. Regenerating
/// with the same (generator_id, seed, d, L) yields an identical vector;
/// unknown generator ids are a configuration error. Supported generators:
/// "mt19937" (default) and "splitmix64".
std::vector<int> make_offset_vector(const std::string& generator_id,
                                    std::uint64_t seed, int d, int L);

SplitSpec make_split_spec(const std::string& generator_id, std::uint64_t seed,
                          int d, int L, int q);

/// Base indices 0..L-1; index j encodes s_base = (2j+1)/(2q).
std::vector<int> enumerate_split_bases(int L);

/// s_i := (s_base + v_i) mod 2*lambda, in index form: (base + v[i]) mod L.
SplitVector splits_from_base(int base_index, const SplitSpec& spec);

// ---------------------------------------------------------------------------
// Splitting transforms. Quantized variants work on exact integers: a point
// level a (x = a/q) and a split index j (s = (2j+1)/(2q)) map to a noisy
// level k with x~ = k/(4q). All reachable noisy values are midpoints of
// half-step-delimited intervals, so denominator 4q is exact.
// ---------------------------------------------------------------------------

/// lambda >= 0.5 form: x~ = (min(s,1) + 1[x > s]) / 2. Requires L >= q.
int noisy_level_simple(int level, int split_idx, int q, int L);

/// General form: x~ is the midpoint of the sub-interval of [0,1] delimited
/// by {s + 2*lambda*n} and {0,1} that contains x. Valid for every L >= 1;
/// equals noisy_level_simple whenever L >= q.
int noisy_level_general(int level, int split_idx, int q, int L);

/// Noisy point in exact form: numerators over 4q.
std::vector<int> noisy_point(const QuantizedPoint& x, const SplitVector& s);

std::vector<double> noisy_values(std::span<const int> noisy_levels, int q);

/// Continuous transforms (used by the continuous-domain checks).
double split_transform_simple(double x, double s);
double split_transform_general(double x, double s, double lambda);

/// Sorted distinct noisy levels reachable for one coordinate under (q, L).
std::vector<int> reachable_noisy_levels(int q, int L);

// ---------------------------------------------------------------------------
// Randomized sampling paths.
// ---------------------------------------------------------------------------

/// Each coordinate independently uniform over the L half-step values.
SplitVector sample_split_independent(SplitMix64& rng, int d, int L, int q);

/// Baseline additive noise: x + eps, eps_i ~ U(-lambda, lambda).
std::vector<double> uniform_additive_sample(SplitMix64& rng,
                                            std::span<const double> x,
                                            double lambda);

// ---------------------------------------------------------------------------
// Marginal correspondence with the additive baseline.
// ---------------------------------------------------------------------------

/// g(z): maps the additive marginal x + eps onto the splitting marginal x~
/// (piecewise; affine z/2 + 1/4 when lambda = 0.5). Requires lambda >= 0.5.
double marginal_map_g(double z, double lambda);
Rational marginal_map_g(const Rational& z, const Rational& lambda);

/// L = floor(2*lambda*q); throws if the result is 0 (lambda too small for q).
int quantize_lambda(double lambda, int q);

} // namespace ssn
