#pragma once

#include <cmath>
#include <string_view>

#include "spatialsep/encoding.hpp"

namespace spatialsep {

enum class ConditionMode { None, Cat, Add, AdaIn };

std::string_view to_string(ConditionMode mode);
ConditionMode parse_condition_mode(std::string_view text);

/// Floor applied to a frame's standard deviation before AdaIN divides by it.
inline constexpr double kAdaInEpsilon = 1e-8;

struct ConditionedFrame {
    Vector values;
    Eigen::Index frame_index = 0;
};

/// Population mean and standard deviation of a vector's entries.
template <typename Derived>
std::pair<typename Derived::Scalar, typename Derived::Scalar>
mean_std(const Eigen::MatrixBase<Derived>& v)
{
    using std::sqrt;
    using Scalar = typename Derived::Scalar;
    const Scalar mean = v.mean();
    const Scalar var = (v.array() - mean).square().mean();
    return {mean, sqrt(var)};
}

/// sigma(style) * (content - mu(content)) / sigma(content) + mu(style), with
/// sigma(content) floored at kAdaInEpsilon so a constant frame maps to mu(style).
template <typename FrameDerived, typename EmbDerived>
Eigen::Matrix<typename FrameDerived::Scalar, Eigen::Dynamic, 1>
adain(const Eigen::MatrixBase<FrameDerived>& frame, const Eigen::MatrixBase<EmbDerived>& emb)
{
    using std::max;
    using Scalar = typename FrameDerived::Scalar;
    const auto [frame_mean, frame_std] = mean_std(frame);
    const auto [emb_mean, emb_std] = mean_std(emb);
    const Scalar denom = max(frame_std, Scalar(kAdaInEpsilon));
    return ((frame.array() - frame_mean) * (emb_std / denom) + emb_mean).matrix();
}

ConditionedFrame condition_cat(const Vector& frame, const SpatialEmbedding& emb, Eigen::Index t = 0);
ConditionedFrame condition_add(const Vector& frame, const SpatialEmbedding& emb, Eigen::Index t = 0);
ConditionedFrame condition_adain(const Vector& frame, const SpatialEmbedding& emb, Eigen::Index t = 0);

/// Input width seen by the network for a 2F-row frame and a D-dim embedding.
Eigen::Index conditioned_size(ConditionMode mode, Eigen::Index stacked_bins, Eigen::Index emb_dim);

/// Applies a mode to every column of a 2F x T block; the embedding is static
/// across frames. Mode None returns the frames untouched.
Matrix condition_frames(const Matrix& frames, const Vector& emb, ConditionMode mode);

} // namespace spatialsep
