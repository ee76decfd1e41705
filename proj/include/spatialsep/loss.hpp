#pragma once

#include <array>
#include <vector>

#include "spatialsep/signal.hpp"

namespace spatialsep {

struct LossConfig {
    double freq_weight = 1.0;
    double time_weight = 1.0;
    bool wsdr_enabled = true;

    void validate() const;
};

struct LossBreakdown {
    double freq = 0.0;
    double wsdr = 0.0;
    double total = 0.0;
};

/// Mean squared magnitude error over sources, rows and frames.
double freq_loss(const std::vector<Matrix>& pred_mags, const std::vector<Matrix>& target_mags);

/// d freq_loss / d pred_mags.
std::vector<Matrix> freq_loss_grad(const std::vector<Matrix>& pred_mags,
                                   const std::vector<Matrix>& target_mags);

/// Energy-weighted negative cosine between each target and its estimate and
/// between the residual noise terms (mixture minus target, mixture minus
/// estimate), averaged over sources and channels. Lies in [-1, 1].
double wsdr_loss(const std::vector<StereoSignal>& est, const std::vector<StereoSignal>& target,
                 const StereoSignal& mixture);

/// d wsdr_loss / d est, laid out as [source][channel].
std::vector<std::array<Vector, 2>> wsdr_loss_grad(const std::vector<StereoSignal>& est,
                                                  const std::vector<StereoSignal>& target,
                                                  const StereoSignal& mixture);

LossBreakdown multi_domain_loss(const LossConfig& cfg, const std::vector<Matrix>& pred_mags,
                                const std::vector<Matrix>& target_mags,
                                const std::vector<StereoSignal>& est,
                                const std::vector<StereoSignal>& target,
                                const StereoSignal& mixture);

} // namespace spatialsep
