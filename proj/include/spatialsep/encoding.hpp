#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "spatialsep/panning.hpp"
#include "spatialsep/random.hpp"

namespace spatialsep {

enum class EncodingMode { Raw, Sinusoidal };

/// Unit in which the sinusoids read their argument alpha / 45^(e).
enum class ArgumentUnit { Degrees, Radians };

struct EmbeddingConfig {
    int dim = 1;
    EncodingMode mode = EncodingMode::Raw;
    ArgumentUnit unit = ArgumentUnit::Degrees;

    /// D = 1: the angle itself.
    static EmbeddingConfig raw() { return {1, EncodingMode::Raw, ArgumentUnit::Degrees}; }
    static EmbeddingConfig sinusoidal(int dim, ArgumentUnit unit = ArgumentUnit::Degrees);

    friend bool operator==(const EmbeddingConfig&, const EmbeddingConfig&) = default;
};

struct SpatialEmbedding {
    Vector values;
    AngleSpec source_angle;
};

struct NoiseSpec {
    double delta = 0.0;  // degrees
    std::uint64_t seed = 0;
};

namespace detail {

// Fills alternating sin/cos of alpha / 45^(exponent(i)) for i in [0, D/2).
template <typename Scalar, typename ExponentFn>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sinusoid_pairs(Scalar alpha, int dim, ArgumentUnit unit,
                                                        ExponentFn exponent)
{
    using std::pow;
    using std::sin;
    using std::cos;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(dim);
    const Scalar scale = unit == ArgumentUnit::Degrees ? Scalar(std::numbers::pi / 180.0) : Scalar(1);
    for (int i = 0; i < dim / 2; ++i) {
        const Scalar arg = scale * alpha / pow(Scalar(45), exponent(i));
        out[2 * i] = sin(arg);
        out[2 * i + 1] = cos(arg);
    }
    return out;
}

} // namespace detail

/// Positive-side encoding: exponent 2i/D, the ripple sits at low indices.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> positive_encoding(Scalar alpha, int dim,
                                                           ArgumentUnit unit = ArgumentUnit::Degrees)
{
    return detail::sinusoid_pairs(alpha, dim, unit,
                                  [dim](int i) { return Scalar(2 * i) / Scalar(dim); });
}

/// Negative-side encoding: exponent (D - 2i)/D, the ripple moves to high
/// indices. Evaluated on the signed angle.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> negative_encoding(Scalar alpha, int dim,
                                                           ArgumentUnit unit = ArgumentUnit::Degrees)
{
    return detail::sinusoid_pairs(alpha, dim, unit,
                                  [dim](int i) { return Scalar(dim - 2 * i) / Scalar(dim); });
}

SpatialEmbedding encode_positive(double alpha, int dim, ArgumentUnit unit = ArgumentUnit::Degrees);
SpatialEmbedding encode_negative(double alpha, int dim, ArgumentUnit unit = ArgumentUnit::Degrees);

/// Raw mode yields [degrees]; sinusoidal mode picks the side by sign.
SpatialEmbedding encode(const AngleSpec& angle, const EmbeddingConfig& cfg);

/// degrees + U(-delta, delta), clamped to the panorama.
AngleSpec perturb_angle(const AngleSpec& angle, double delta, Rng& rng);
AngleSpec perturb_angle(const AngleSpec& angle, const NoiseSpec& noise);

} // namespace spatialsep
