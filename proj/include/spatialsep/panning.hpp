#pragma once

#include <cmath>
#include <numbers>

#include "spatialsep/signal.hpp"

namespace spatialsep {

inline constexpr double kMaxAngle = 45.0;

/// A panning angle in degrees on [-45, +45]. Under the constant-power law a
/// positive angle raises the left gain (cpp_gains(+45) = (1, 0)).
class AngleSpec {
public:
    AngleSpec() = default;
    explicit AngleSpec(double degrees);

    /// Clamps into the panorama instead of rejecting.
    static AngleSpec clamped(double degrees);

    double degrees() const { return degrees_; }

    friend bool operator==(const AngleSpec&, const AngleSpec&) = default;

private:
    double degrees_ = 0.0;
};

/// Constant-power gains (left, right) for an angle in degrees.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> constant_power_gains(Scalar degrees)
{
    using std::cos;
    using std::sin;
    const Scalar alpha = degrees * Scalar(std::numbers::pi / 180.0);
    const Scalar half_sqrt2 = Scalar(std::numbers::sqrt2 / 2.0);
    return {half_sqrt2 * (cos(alpha) + sin(alpha)), half_sqrt2 * (cos(alpha) - sin(alpha))};
}

Eigen::Vector2d cpp_gains(const AngleSpec& angle);

StereoSignal pan(const MonoSignal& stem, const AngleSpec& angle);

/// Inverts the panning law from the full-signal RMS ratio of the channels.
/// Assumes a single static constant-power-panned source.
AngleSpec estimate_angle(const StereoSignal& stereo);

} // namespace spatialsep
