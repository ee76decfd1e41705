#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "spatialsep/signal.hpp"

namespace spatialsep {

/// Scores are clamped to +/- this many dB. A perfect estimate reads as the cap.
inline constexpr double kMetricCapDb = 100.0;

namespace detail {

inline double ratio_db(double signal_energy, double error_energy)
{
    if (signal_energy <= 0.0) {
        return -kMetricCapDb;
    }
    if (error_energy < 1e-20 * signal_energy) {
        return kMetricCapDb;
    }
    const double db = 10.0 * std::log10(signal_energy / error_energy);
    return std::clamp(db, -kMetricCapDb, kMetricCapDb);
}

template <typename A, typename B>
void check_pair(const Eigen::MatrixBase<A>& est, const Eigen::MatrixBase<B>& target)
{
    if (est.size() != target.size()) {
        throw ConfigError("estimate and target differ in length");
    }
    if (target.squaredNorm() == 0.0) {
        throw ConfigError("silent target");
    }
}

} // namespace detail

/// Scale-invariant SDR: the estimate is projected onto the target first.
template <typename A, typename B>
double si_sdr(const Eigen::MatrixBase<A>& est, const Eigen::MatrixBase<B>& target)
{
    detail::check_pair(est, target);
    const double scale = est.dot(target) / target.squaredNorm();
    const Vector projected = scale * target;
    const double err = (est - projected).squaredNorm();
    return detail::ratio_db(projected.squaredNorm(), err);
}

/// Plain time-domain SDR, scale sensitive.
template <typename A, typename B>
double sdr(const Eigen::MatrixBase<A>& est, const Eigen::MatrixBase<B>& target)
{
    detail::check_pair(est, target);
    return detail::ratio_db(target.squaredNorm(), (target - est).squaredNorm());
}

struct SourceScores {
    std::string label;
    double si_sdr = 0.0;
    double sdr = 0.0;
    double mixture_si_sdr = 0.0;
    double mixture_sdr = 0.0;
    double delta_si_sdr = 0.0;
    double delta_sdr = 0.0;
};

struct EvalReport {
    std::vector<SourceScores> sources;
    SourceScores average;
    std::vector<std::string> warnings;
};

/// Per-source scores averaged over the two channels; deltas are relative to
/// the mixture used as every source's estimate. Sources are bound by index.
EvalReport evaluate_scene(const std::vector<StereoSignal>& estimates,
                          const std::vector<StereoSignal>& targets,
                          const StereoSignal& mixture,
                          const std::vector<std::string>& labels = {});

/// Rows are metrics, columns are sources followed by "Avg.".
std::string to_csv(const EvalReport& report);

} // namespace spatialsep
