#include "spatialsep/panning.hpp"

#include <algorithm>

namespace spatialsep {

AngleSpec::AngleSpec(double degrees)
    : degrees_(degrees)
{
    if (!std::isfinite(degrees) || std::abs(degrees) > kMaxAngle) {
        throw ConfigError("angle out of panorama");
    }
}

AngleSpec AngleSpec::clamped(double degrees)
{
    if (std::isnan(degrees)) {
        throw ConfigError("angle out of panorama");
    }
    return AngleSpec(std::clamp(degrees, -kMaxAngle, kMaxAngle));
}

Eigen::Vector2d cpp_gains(const AngleSpec& angle)
{
    return constant_power_gains(angle.degrees());
}

StereoSignal pan(const MonoSignal& stem, const AngleSpec& angle)
{
    const Eigen::Vector2d g = cpp_gains(angle);
    return {g[0] * stem.samples, g[1] * stem.samples, stem.sample_rate};
}

AngleSpec estimate_angle(const StereoSignal& stereo)
{
    const double left = stereo.left.norm();
    const double right = stereo.right.norm();
    if (left == 0.0 && right == 0.0) {
        throw ConfigError("cannot estimate angle of silence");
    }
    // rms(L)/rms(R) equals the norm ratio; atan2 maps a silent right channel to 90 deg.
    const double degrees = std::atan2(left, right) * 180.0 / std::numbers::pi - kMaxAngle;
    return AngleSpec::clamped(degrees);
}

} // namespace spatialsep
