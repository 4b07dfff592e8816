#include "ssn/noise.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace ssn {

void validate_point(const QuantizedPoint& x) {
    if (x.q < 1) throw std::invalid_argument("QuantizedPoint: q must be >= 1");
    for (int lv : x.levels)
        if (lv < 0 || lv > x.q)
            throw std::invalid_argument("QuantizedPoint: level " + std::to_string(lv) +
                                        " outside {0,..," + std::to_string(x.q) + "}");
}

void validate_spec(const SplitSpec& spec) {
    if (spec.L < 1 || spec.q < 1)
        throw std::invalid_argument("SplitSpec: L and q must be >= 1");
    for (int o : spec.v)
        if (o < 0 || o >= spec.L)
            throw std::invalid_argument("SplitSpec: offset outside {0,..,L-1}");
}

std::string noise_kind_name(NoiseKind k) {
    switch (k) {
        case NoiseKind::DSSN: return "dssn";
        case NoiseKind::IndependentSSN: return "ssn";
        case NoiseKind::UniformAdditive: return "uniform";
    }
    return "?";
}

NoiseKind parse_noise_kind(const std::string& name) {
    if (name == "dssn") return NoiseKind::DSSN;
    if (name == "ssn") return NoiseKind::IndependentSSN;
    if (name == "uniform") return NoiseKind::UniformAdditive;
    throw std::invalid_argument("unknown noise kind '" + name + "'");
}

std::vector<int> make_offset_vector(const std::string& generator_id,
                                    std::uint64_t seed, int d, int L) {
    if (d < 1) throw std::invalid_argument("make_offset_vector: d must be >= 1");
    if (L < 1) throw std::invalid_argument("make_offset_vector: L must be >= 1");
    std::vector<int> v(d);
    if (generator_id == "mt19937") {
        // The 32-bit engine sequence is pinned by the standard, so the
        // persisted (generator_id, seed) pair regenerates v on any platform.
        std::mt19937 eng(static_cast<std::uint32_t>(seed));
        const std::uint32_t bound = static_cast<std::uint32_t>(L);
        const std::uint32_t limit = UINT32_MAX - UINT32_MAX % bound;
        for (int i = 0; i < d; ++i) {
            std::uint32_t x;
            do { x = eng(); } while (x >= limit);
            v[i] = static_cast<int>(x % bound);
        }
    } else if (generator_id == "splitmix64") {
        SplitMix64 eng(seed);
        for (int i = 0; i < d; ++i)
            v[i] = static_cast<int>(eng.below(static_cast<std::uint64_t>(L)));
    } else {
        throw std::invalid_argument("unknown offset generator '" + generator_id +
                                    "' (supported: mt19937, splitmix64)");
    }
    return v;
}

SplitSpec make_split_spec(const std::string& generator_id, std::uint64_t seed,
                          int d, int L, int q) {
    SplitSpec spec;
    spec.L = L;
    spec.q = q;
    spec.generator_id = generator_id;
    spec.seed = seed;
    spec.v = make_offset_vector(generator_id, seed, d, L);
    validate_spec(spec);
    return spec;
}

std::vector<int> enumerate_split_bases(int L) {
    if (L < 1) throw std::invalid_argument("enumerate_split_bases: L must be >= 1");
    std::vector<int> bases(L);
    for (int j = 0; j < L; ++j) bases[j] = j;
    return bases;
}

SplitVector splits_from_base(int base_index, const SplitSpec& spec) {
    if (base_index < 0 || base_index >= spec.L)
        throw std::invalid_argument("splits_from_base: base index " +
                                    std::to_string(base_index) + " outside {0,..," +
                                    std::to_string(spec.L - 1) + "}");
    SplitVector s;
    s.L = spec.L;
    s.q = spec.q;
    s.idx.resize(spec.v.size());
    for (std::size_t i = 0; i < spec.v.size(); ++i)
        s.idx[i] = (base_index + spec.v[i]) % spec.L;
    return s;
}

namespace {

// ceil(a / b) for b > 0.
inline long long ceil_div(long long a, long long b) {
    long long r = a / b;
    if (a % b != 0 && a > 0) ++r;
    return r;
}

} // namespace

int noisy_level_simple(int level, int split_idx, int q, [[maybe_unused]] int L) {
    assert(L >= q && "simple transform requires lambda >= 0.5");
    const int S = 2 * split_idx + 1; // s * 2q
    const int X = 2 * level;         // x * 2q
    // x = s is unreachable: s sits on half-steps, x on steps.
    assert(X != S);
    return std::min(S, 2 * q) + (X > S ? 2 * q : 0);
}

int noisy_level_general(int level, int split_idx, int q, int L) {
    const long long S = 2 * split_idx + 1; // s * 2q
    const long long X = 2LL * level;       // x * 2q
    const long long P = 2LL * L;           // 2*lambda * 2q
    const long long n = ceil_div(X - S, P);
    const long long upper = std::min(P * n + S, 2LL * q);
    const long long lower = std::max(P * (n - 1) + S, 0LL);
    return static_cast<int>(upper + lower);
}

std::vector<int> noisy_point(const QuantizedPoint& x, const SplitVector& s) {
    if (x.dim() != static_cast<int>(s.idx.size()) || x.q != s.q)
        throw std::invalid_argument("noisy_point: point/split shape mismatch");
    std::vector<int> out(s.idx.size());
    for (std::size_t i = 0; i < s.idx.size(); ++i)
        out[i] = noisy_level_general(x.levels[i], s.idx[i], x.q, s.L);
    return out;
}

std::vector<double> noisy_values(std::span<const int> noisy_levels, int q) {
    std::vector<double> out(noisy_levels.size());
    const double denom = 4.0 * q;
    for (std::size_t i = 0; i < noisy_levels.size(); ++i)
        out[i] = noisy_levels[i] / denom;
    return out;
}

double split_transform_simple(double x, double s) {
    return (std::min(s, 1.0) + (x > s ? 1.0 : 0.0)) / 2.0;
}

double split_transform_general(double x, double s, double lambda) {
    const double w = 2.0 * lambda;
    const double n = std::ceil((x - s) / w);
    const double upper = std::min(w * n + s, 1.0);
    const double lower = std::max(w * (n - 1.0) + s, 0.0);
    return (upper + lower) / 2.0;
}

std::vector<int> reachable_noisy_levels(int q, int L) {
    std::set<int> ks;
    for (int a = 0; a <= q; ++a)
        for (int j = 0; j < L; ++j)
            ks.insert(noisy_level_general(a, j, q, L));
    return std::vector<int>(ks.begin(), ks.end());
}

SplitVector sample_split_independent(SplitMix64& rng, int d, int L, int q) {
    if (d < 1 || L < 1) throw std::invalid_argument("sample_split_independent: d, L >= 1");
    SplitVector s;
    s.L = L;
    s.q = q;
    s.idx.resize(d);
    for (int i = 0; i < d; ++i)
        s.idx[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(L)));
    return s;
}

std::vector<double> uniform_additive_sample(SplitMix64& rng,
                                            std::span<const double> x,
                                            double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("uniform_additive_sample: lambda > 0");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] + rng.uniform(-lambda, lambda);
    return out;
}

double marginal_map_g(double z, double lambda) {
    if (z < 1.0 - lambda) return (z + lambda) / 2.0;
    if (z > lambda) return (z - lambda + 1.0) / 2.0;
    return 0.5;
}

Rational marginal_map_g(const Rational& z, const Rational& lambda) {
    const Rational one(1);
    const Rational half(1, 2);
    if (z < one - lambda) return (z + lambda) * half;
    if (z > lambda) return (z - lambda + one) * half;
    return half;
}

int quantize_lambda(double lambda, int q) {
    if (lambda <= 0.0) throw std::invalid_argument("quantize_lambda: lambda must be > 0");
    if (q < 1) throw std::invalid_argument("quantize_lambda: q must be >= 1");
    const int L = static_cast<int>(std::floor(2.0 * lambda * q));
    if (L < 1)
        throw std::invalid_argument("quantize_lambda: lambda " + std::to_string(lambda) +
                                    " too small for q=" + std::to_string(q) +
                                    " (floor(2*lambda*q) = 0)");
    return L;
}

} // namespace ssn
