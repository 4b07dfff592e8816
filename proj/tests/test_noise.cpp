#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "ssn/noise.hpp"
#include "ssn/prng.hpp"

using namespace ssn;

TEST_CASE("offset vector is deterministic and in range") {
    CHECK(make_offset_vector("mt19937", 0, 3, 1) == std::vector<int>{0, 0, 0});
    const auto a = make_offset_vector("mt19937", 0, 4, 6);
    const auto b = make_offset_vector("mt19937", 0, 4, 6);
    CHECK(a == b);
    CHECK(make_offset_vector("splitmix64", 7, 4, 6) ==
          make_offset_vector("splitmix64", 7, 4, 6));
    CHECK(make_offset_vector("mt19937", 1, 4, 6) != a);
    for (int o : a) CHECK((o >= 0 && o < 6));
    CHECK_THROWS_AS(make_offset_vector("lcg", 0, 4, 6), std::invalid_argument);
}

TEST_CASE("offset vector empirically uniform (5 sigma per residue)") {
    const int d = 1000, L = 6;
    for (const char* gen : {"mt19937", "splitmix64"}) {
        const auto v = make_offset_vector(gen, 0, d, L);
        std::vector<int> counts(L, 0);
        for (int o : v) ++counts[o];
        const double expected = double(d) / L;
        const double sigma = std::sqrt(d * (1.0 / L) * (1.0 - 1.0 / L));
        for (int r = 0; r < L; ++r)
            CHECK(std::abs(counts[r] - expected) <= 5.0 * sigma);
    }
}

TEST_CASE("split bases enumerate half-steps") {
    CHECK(enumerate_split_bases(1) == std::vector<int>{0});
    CHECK_THROWS_AS(enumerate_split_bases(0), std::invalid_argument);

    SplitVector s;
    s.q = 2;
    s.L = 2;
    s.idx = enumerate_split_bases(2);
    CHECK(s.value(0) == doctest::Approx(0.25));
    CHECK(s.value(1) == doctest::Approx(0.75));

    // q=4, 2*lambda=5/4: base values {1/8, 3/8, 5/8, 7/8, 9/8}.
    s.q = 4;
    s.L = 5;
    s.idx = enumerate_split_bases(5);
    for (int j = 0; j < 5; ++j)
        CHECK(s.value(j) == doctest::Approx((2.0 * j + 1.0) / 8.0));
}

TEST_CASE("splits_from_base shifts modulo L") {
    SplitSpec spec;
    spec.L = 3;
    spec.q = 2;
    spec.generator_id = "mt19937";
    spec.v = {0, 0};
    CHECK(splits_from_base(0, spec).idx == std::vector<int>{0, 0});
    spec.v = {1, 2};
    CHECK(splits_from_base(2, spec).idx == std::vector<int>{0, 1});
    CHECK_THROWS_AS(splits_from_base(3, spec), std::invalid_argument);
    CHECK_THROWS_AS(splits_from_base(-1, spec), std::invalid_argument);
}

TEST_CASE("per-coordinate residues form a permutation") {
    for (int L : {1, 2, 3, 5, 8}) {
        const SplitSpec spec = make_split_spec("mt19937", 42, 5, L, 4);
        for (int i = 0; i < spec.dim(); ++i) {
            std::set<int> residues;
            for (int b = 0; b < L; ++b)
                residues.insert(splits_from_base(b, spec).idx[i]);
            CHECK(static_cast<int>(residues.size()) == L);
        }
    }
}

TEST_CASE("simple transform on the quantized grid") {
    // q=4, 2*lambda=5/4, x=1/4, s=7/8 -> x~ = 7/16.
    CHECK(noisy_level_simple(1, 3, 4, 5) == 7);
    CHECK(split_transform_simple(0.25, 0.875) == doctest::Approx(7.0 / 16.0));
    // s above 1 keeps no information: x~ = 1/2 whatever x is.
    CHECK(split_transform_simple(0.0, 1.2) == doctest::Approx(0.5));
    CHECK(split_transform_simple(1.0, 1.2) == doctest::Approx(0.5));
    for (int a = 0; a <= 4; ++a) CHECK(noisy_level_simple(a, 4, 4, 5) == 8);
    CHECK(split_transform_simple(0.6, 0.5) == doctest::Approx(0.75));
}

TEST_CASE("general transform handles lambda below one half") {
    CHECK(split_transform_general(0.45, 0.1, 0.2) == doctest::Approx(0.3));
    CHECK(split_transform_general(0.05, 0.1, 0.2) == doctest::Approx(0.05));
    CHECK(split_transform_general(0.3, 0.8, 0.6) == doctest::Approx(0.4));
    CHECK(split_transform_general(0.3, 0.8, 0.6) ==
          doctest::Approx(split_transform_simple(0.3, 0.8)));
}

TEST_CASE("general equals simple whenever lambda >= 0.5") {
    const int q = 8;
    for (int L : {8, 10, 16}) { // lambda in {0.5, 0.625, 1.0}
        for (int a = 0; a <= q; ++a)
            for (int j = 0; j < L; ++j) {
                CHECK(noisy_level_general(a, j, q, L) == noisy_level_simple(a, j, q, L));
                const double x = double(a) / q;
                const double s = (2.0 * j + 1.0) / (2.0 * q);
                CHECK(split_transform_general(x, s, L / (2.0 * q)) ==
                      doctest::Approx(split_transform_simple(x, s)));
            }
    }
}

TEST_CASE("reachable noisy levels for q=4, L=5") {
    CHECK(reachable_noisy_levels(4, 5) ==
          std::vector<int>{1, 3, 5, 7, 8, 9, 11, 13, 15});
}

TEST_CASE("independent splits: degenerate L and uniform marginals") {
    SplitMix64 rng(3);
    const SplitVector s1 = sample_split_independent(rng, 4, 1, 2);
    CHECK(s1.idx == std::vector<int>{0, 0, 0, 0});

    const int L = 6, n = 100000;
    std::vector<std::vector<int>> joint(L, std::vector<int>(L, 0));
    std::vector<int> m0(L, 0), m1(L, 0);
    for (int t = 0; t < n; ++t) {
        const SplitVector s = sample_split_independent(rng, 2, L, 4);
        ++m0[s.idx[0]];
        ++m1[s.idx[1]];
        ++joint[s.idx[0]][s.idx[1]];
    }
    const double expected = double(n) / L;
    const double sigma = std::sqrt(n * (1.0 / L) * (1.0 - 1.0 / L));
    for (int r = 0; r < L; ++r) {
        CHECK(std::abs(m0[r] - expected) <= 5.0 * sigma);
        CHECK(std::abs(m1[r] - expected) <= 5.0 * sigma);
    }
    // Joint independence: chi-square statistic against product of marginals.
    double chi2 = 0.0;
    for (int r = 0; r < L; ++r)
        for (int c = 0; c < L; ++c) {
            const double e = double(m0[r]) * m1[c] / n;
            chi2 += (joint[r][c] - e) * (joint[r][c] - e) / e;
        }
    const double df = (L - 1.0) * (L - 1.0);
    CHECK(chi2 <= df + 5.0 * std::sqrt(2.0 * df));
}

TEST_CASE("uniform additive noise: support and mean") {
    SplitMix64 rng(9);
    const std::vector<double> x = {0.2, 0.7};
    const double lambda = 0.4;
    const int n = 100000;
    std::vector<double> sum(2, 0.0);
    for (int t = 0; t < n; ++t) {
        const auto y = uniform_additive_sample(rng, x, lambda);
        for (int i = 0; i < 2; ++i) {
            CHECK(y[i] >= x[i] - lambda);
            CHECK(y[i] <= x[i] + lambda);
            sum[i] += y[i];
        }
    }
    const double sigma_mean = lambda / std::sqrt(3.0 * n);
    for (int i = 0; i < 2; ++i)
        CHECK(std::abs(sum[i] / n - x[i]) <= 5.0 * sigma_mean);
}

TEST_CASE("marginal map g") {
    CHECK(marginal_map_g(0.0, 0.5) == doctest::Approx(0.25));
    CHECK(marginal_map_g(0.0, 1.5) == doctest::Approx(0.5));
    CHECK(marginal_map_g(1.6, 1.5) == doctest::Approx(0.55));
    // lambda = 0.5 reduces to z/2 + 1/4 everywhere.
    for (double z = -0.45; z < 1.5; z += 0.1)
        CHECK(marginal_map_g(z, 0.5) == doctest::Approx(z / 2.0 + 0.25));
    CHECK(marginal_map_g(Rational(8, 5), Rational(3, 2)) == Rational(11, 20));
}

TEST_CASE("lambda quantization") {
    CHECK(quantize_lambda(0.5, 255) == 255);
    CHECK(quantize_lambda(0.15 * std::sqrt(3.0), 255) == 132);
    CHECK_THROWS_AS(quantize_lambda(0.001, 255), std::invalid_argument);
    CHECK_THROWS_AS(quantize_lambda(-1.0, 255), std::invalid_argument);
}
