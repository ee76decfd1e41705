#include "spatialsep/loss.hpp"

#include <array>
#include <cmath>

namespace spatialsep {

namespace {

// Below this squared norm a vector counts as silent and its cosine is 0.
constexpr double kSilentEnergy = 1e-30;

void check_shapes(const std::vector<Matrix>& a, const std::vector<Matrix>& b)
{
    if (a.size() != b.size() || a.empty()) {
        throw ConfigError("source counts differ");
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].rows() != b[k].rows() || a[k].cols() != b[k].cols()) {
            throw ConfigError("magnitude shapes differ");
        }
    }
}

void check_signals(const std::vector<StereoSignal>& est, const std::vector<StereoSignal>& target,
                   const StereoSignal& mixture)
{
    if (est.size() != target.size() || est.empty()) {
        throw ConfigError("source counts differ");
    }
    for (std::size_t k = 0; k < est.size(); ++k) {
        if (est[k].size() != mixture.size() || target[k].size() != mixture.size()) {
            throw ConfigError("signal lengths differ");
        }
    }
}

double cosine(const Vector& a, const Vector& b)
{
    const double aa = a.squaredNorm();
    const double bb = b.squaredNorm();
    if (aa < kSilentEnergy || bb < kSilentEnergy) {
        return 0.0;
    }
    return a.dot(b) / std::sqrt(aa * bb);
}

// Gradient of cosine(a, b) with respect to b.
Vector cosine_grad(const Vector& a, const Vector& b)
{
    const double aa = a.squaredNorm();
    const double bb = b.squaredNorm();
    if (aa < kSilentEnergy || bb < kSilentEnergy) {
        return Vector::Zero(b.size());
    }
    const double inv = 1.0 / std::sqrt(aa * bb);
    return a * inv - b * (a.dot(b) * inv / bb);
}

struct WsdrTerm {
    Vector noise;       // mixture - target
    Vector est_noise;   // mixture - estimate
    double rho = 0.0;
};

WsdrTerm wsdr_term(const Vector& est, const Vector& target, const Vector& mixture)
{
    WsdrTerm t;
    t.noise = mixture - target;
    t.est_noise = mixture - est;
    const double ts = target.squaredNorm();
    const double denom = ts + t.noise.squaredNorm();
    t.rho = denom > 0.0 ? ts / denom : 0.5;
    return t;
}

} // namespace

void LossConfig::validate() const
{
    if (freq_weight < 0.0 || time_weight < 0.0) {
        throw ConfigError("loss weights must be nonnegative");
    }
    const double effective_time = wsdr_enabled ? time_weight : 0.0;
    if (freq_weight == 0.0 && effective_time == 0.0) {
        throw ConfigError("loss weights cannot both be zero");
    }
}

double freq_loss(const std::vector<Matrix>& pred_mags, const std::vector<Matrix>& target_mags)
{
    check_shapes(pred_mags, target_mags);
    double sum = 0.0;
    double count = 0.0;
    for (std::size_t k = 0; k < pred_mags.size(); ++k) {
        sum += (pred_mags[k] - target_mags[k]).squaredNorm();
        count += static_cast<double>(pred_mags[k].size());
    }
    return sum / count;
}

std::vector<Matrix> freq_loss_grad(const std::vector<Matrix>& pred_mags,
                                   const std::vector<Matrix>& target_mags)
{
    check_shapes(pred_mags, target_mags);
    double count = 0.0;
    for (const auto& p : pred_mags) {
        count += static_cast<double>(p.size());
    }
    std::vector<Matrix> out;
    out.reserve(pred_mags.size());
    for (std::size_t k = 0; k < pred_mags.size(); ++k) {
        out.push_back((2.0 / count) * (pred_mags[k] - target_mags[k]));
    }
    return out;
}

double wsdr_loss(const std::vector<StereoSignal>& est, const std::vector<StereoSignal>& target,
                 const StereoSignal& mixture)
{
    check_signals(est, target, mixture);
    double sum = 0.0;
    for (std::size_t k = 0; k < est.size(); ++k) {
        for (int c = 0; c < 2; ++c) {
            const WsdrTerm t = wsdr_term(est[k].channel(c), target[k].channel(c), mixture.channel(c));
            sum += -t.rho * cosine(target[k].channel(c), est[k].channel(c))
                - (1.0 - t.rho) * cosine(t.noise, t.est_noise);
        }
    }
    return sum / (2.0 * static_cast<double>(est.size()));
}

std::vector<std::array<Vector, 2>> wsdr_loss_grad(const std::vector<StereoSignal>& est,
                                                  const std::vector<StereoSignal>& target,
                                                  const StereoSignal& mixture)
{
    check_signals(est, target, mixture);
    const double scale = 1.0 / (2.0 * static_cast<double>(est.size()));
    std::vector<std::array<Vector, 2>> out(est.size());
    for (std::size_t k = 0; k < est.size(); ++k) {
        for (int c = 0; c < 2; ++c) {
            const WsdrTerm t = wsdr_term(est[k].channel(c), target[k].channel(c), mixture.channel(c));
            // est_noise = mixture - est, so its gradient enters with a flipped sign.
            out[k][static_cast<std::size_t>(c)] =
                scale * (-t.rho * cosine_grad(target[k].channel(c), est[k].channel(c))
                         + (1.0 - t.rho) * cosine_grad(t.noise, t.est_noise));
        }
    }
    return out;
}

LossBreakdown multi_domain_loss(const LossConfig& cfg, const std::vector<Matrix>& pred_mags,
                                const std::vector<Matrix>& target_mags,
                                const std::vector<StereoSignal>& est,
                                const std::vector<StereoSignal>& target,
                                const StereoSignal& mixture)
{
    cfg.validate();
    LossBreakdown out;
    out.freq = freq_loss(pred_mags, target_mags);
    out.wsdr = cfg.wsdr_enabled ? wsdr_loss(est, target, mixture) : 0.0;
    out.total = cfg.freq_weight * out.freq + (cfg.wsdr_enabled ? cfg.time_weight * out.wsdr : 0.0);
    return out;
}

} // namespace spatialsep
