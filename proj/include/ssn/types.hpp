#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ssn/rational.hpp"

namespace ssn {

/// Point on the quantized grid [0,1]_(q)^d, stored as integer levels 0..q.
struct QuantizedPoint {
    std::vector<int> levels;
    int q = 1;

    int dim() const { return static_cast<int>(levels.size()); }
    double value(int i) const { return static_cast<double>(levels[i]) / q; }
    std::vector<double> values() const {
        std::vector<double> out(levels.size());
        for (std::size_t i = 0; i < levels.size(); ++i)
            out[i] = static_cast<double>(levels[i]) / q;
        return out;
    }
};

void validate_point(const QuantizedPoint& x);

/// Noise parameterization for the splitting scheme. L = 2*lambda*q split
/// positions; v holds the per-coordinate integer offsets of the
/// derandomized scheme, regenerable bit-for-bit from (generator_id, seed).
struct SplitSpec {
    int L = 1;
    int q = 1;
    std::vector<int> v;
    std::string generator_id;
    std::uint64_t seed = 0;

    int dim() const { return static_cast<int>(v.size()); }
    double lambda() const { return static_cast<double>(L) / (2.0 * q); }
    Rational lambda_rational() const { return Rational(L, 2 * static_cast<std::int64_t>(q)); }
};

void validate_spec(const SplitSpec& spec);

/// One realized splitting vector; coordinate i encodes the half-step value
/// s_i = (2*idx[i] + 1) / (2q).
struct SplitVector {
    std::vector<int> idx;
    int L = 1;
    int q = 1;

    double value(int i) const { return (2.0 * idx[i] + 1.0) / (2.0 * q); }
};

enum class NoiseKind { DSSN, IndependentSSN, UniformAdditive };

/// Which sampling/enumeration path is legal is determined by `kind`;
/// UniformAdditive uses only (L, q) of the spec (lambda = L/2q) and keeps
/// the noise continuous.
struct NoiseModel {
    NoiseKind kind = NoiseKind::DSSN;
    SplitSpec spec;

    double lambda() const { return spec.lambda(); }
};

std::string noise_kind_name(NoiseKind k);
NoiseKind parse_noise_kind(const std::string& name);

} // namespace ssn
