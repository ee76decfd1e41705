#include "spatialsep/training.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

namespace spatialsep {

namespace {

std::vector<Matrix> masked_magnitudes(const std::vector<Matrix>& masks, const Matrix& mix_mag)
{
    std::vector<Matrix> out;
    out.reserve(masks.size());
    for (const auto& m : masks) {
        out.push_back(m.cwiseProduct(mix_mag));
    }
    return out;
}

void check_finite(const std::vector<Matrix>& masks)
{
    for (const auto& m : masks) {
        if (!m.allFinite()) {
            throw DivergenceError("diverged");
        }
    }
}

StereoSignal excerpt(const StereoSignal& s, Eigen::Index start, Eigen::Index len)
{
    return {s.left.segment(start, len), s.right.segment(start, len), s.sample_rate};
}

} // namespace

TrainingExample make_example(const MixedScene& mixed, const ModelShape& shape, std::size_t scene_index)
{
    // Losses see the padded signals; the pad is silent in every target.
    const Eigen::Index pad = analysis_padding(shape.frame_size, shape.hop);
    TrainingExample ex;
    ex.mixture = pad_signal(mixed.mixture, pad);
    for (const auto& t : mixed.targets) {
        ex.targets.push_back(pad_signal(t, pad));
    }
    ex.scene_index = scene_index;
    ex.left = stft(ex.mixture.mono_channel(0), shape.frame_size, shape.hop);
    ex.right = stft(ex.mixture.mono_channel(1), shape.frame_size, shape.hop);
    ex.mix_mag = stack_stereo_magnitude(ex.left, ex.right);
    for (const auto& t : ex.targets) {
        ex.target_mags.push_back(stack_stereo_magnitude(stft(t.mono_channel(0), shape.frame_size, shape.hop),
                                                        stft(t.mono_channel(1), shape.frame_size, shape.hop))
                                     .mag);
    }
    return ex;
}

std::vector<TrainingExample> make_examples(const std::vector<TrainingScene>& scenes,
                                           const ModelShape& shape, Eigen::Index chunk_frames)
{
    std::vector<TrainingExample> out;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        const MixedScene& m = scenes[i].mixed;
        if (static_cast<Eigen::Index>(m.targets.size()) != shape.num_sources) {
            throw ConfigError("scene source count does not match the model");
        }
        const Eigen::Index total = m.mixture.size();
        const Eigen::Index len = chunk_frames > 0 ? (chunk_frames - 1) * shape.hop + shape.frame_size : total;
        if (len >= total) {
            out.push_back(make_example(m, shape, i));
            continue;
        }
        for (Eigen::Index start = 0; start + len <= total; start += len) {
            MixedScene part;
            part.mixture = excerpt(m.mixture, start, len);
            for (const auto& t : m.targets) {
                part.targets.push_back(excerpt(t, start, len));
            }
            out.push_back(make_example(part, shape, i));
        }
    }
    return out;
}

LossBreakdown example_loss(const SeparatorModel& model, const TrainingExample& example,
                           const std::vector<SpatialEmbedding>& embeddings, const LossConfig& cfg)
{
    const MaskSet masks = forward(model, example.mix_mag, embeddings);
    check_finite(masks.masks);
    const auto pred = masked_magnitudes(masks.masks, example.mix_mag.mag);
    const auto est = apply_masks(masks, example.left, example.right, example.mixture.size());
    return multi_domain_loss(cfg, pred, example.target_mags, est, example.targets, example.mixture);
}

LossAndGradient example_gradient(const SeparatorModel& model, const TrainingExample& example,
                                 const std::vector<SpatialEmbedding>& embeddings, const LossConfig& cfg)
{
    ForwardCache cache;
    forward(model, example.mix_mag, embeddings, cache);
    check_finite(cache.masks);
    const Matrix& mix_mag = example.mix_mag.mag;
    const auto pred = masked_magnitudes(cache.masks, mix_mag);
    const auto est = apply_masks(MaskSet{cache.masks}, example.left, example.right, example.mixture.size());

    LossAndGradient out;
    out.loss = multi_domain_loss(cfg, pred, example.target_mags, est, example.targets, example.mixture);
    if (!std::isfinite(out.loss.total)) {
        throw DivergenceError("diverged");
    }

    const ModelShape& s = model.shape();
    const Eigen::Index bins = s.num_bins();
    std::vector<Matrix> mask_grads = freq_loss_grad(pred, example.target_mags);
    for (auto& g : mask_grads) {
        g = (cfg.freq_weight * g).cwiseProduct(mix_mag);
    }
    if (cfg.wsdr_enabled && cfg.time_weight != 0.0) {
        const auto est_grads = wsdr_loss_grad(est, example.targets, example.mixture);
        const Spectrogram* channels[2] = {&example.left, &example.right};
        for (std::size_t k = 0; k < est.size(); ++k) {
            for (int c = 0; c < 2; ++c) {
                const ComplexMatrix adj = istft_adjoint(est_grads[k][static_cast<std::size_t>(c)],
                                                        s.frame_size, s.hop, channels[c]->num_frames());
                const ComplexMatrix& x = channels[c]->bins;
                // Z = mask .* X with a real mask: dL/dmask = Re(conj(A) .* X).
                const Matrix d_mask = adj.real().cwiseProduct(x.real()) + adj.imag().cwiseProduct(x.imag());
                mask_grads[k].middleRows(c * bins, bins) += cfg.time_weight * d_mask;
            }
        }
    }
    out.grad = backward_from_masks(model, cache, mask_grads);
    return out;
}

LossAndGradient backward(const SeparatorModel& model, const std::vector<BatchItem>& batch,
                         const LossConfig& cfg, int workers)
{
    if (batch.empty()) {
        throw ConfigError("empty batch");
    }
    std::vector<LossAndGradient> results(batch.size());
    std::vector<std::exception_ptr> errors(batch.size());
    auto run = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < batch.size(); i += stride) {
            try {
                results[i] = example_gradient(model, *batch[i].example, *batch[i].embeddings, cfg);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const auto stride = static_cast<std::size_t>(std::max(1, std::min<int>(workers, static_cast<int>(batch.size()))));
    if (stride == 1) {
        run(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < stride; ++w) {
            pool.emplace_back(run, w, stride);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    LossAndGradient mean;
    mean.grad = Vector::Zero(model.parameters().size());
    const double n = static_cast<double>(batch.size());
    for (const auto& r : results) {
        mean.grad += r.grad;
        mean.loss.freq += r.loss.freq;
        mean.loss.wsdr += r.loss.wsdr;
        mean.loss.total += r.loss.total;
    }
    mean.grad /= n;
    mean.loss.freq /= n;
    mean.loss.wsdr /= n;
    mean.loss.total /= n;
    return mean;
}

void adam_step(Vector& params, const Vector& grads, AdamState& state, const AdamConfig& cfg)
{
    if (grads.size() != params.size()) {
        throw ConfigError("gradient and parameter sizes differ");
    }
    if (state.m.size() != params.size()) {
        state.m = Vector::Zero(params.size());
        state.v = Vector::Zero(params.size());
        state.step = 0;
    }
    ++state.step;
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads;
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grads.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    params.array() -= cfg.learning_rate * (state.m.array() / c1)
        / ((state.v.array() / c2).sqrt() + cfg.epsilon);
}

void TrainConfig::validate() const
{
    if (epochs < 0) {
        throw ConfigError("epochs must be nonnegative");
    }
    if (!(adam.learning_rate > 0.0)) {
        throw ConfigError("learning rate must be positive");
    }
    if (batch_size == 0) {
        throw ConfigError("batch size must be positive");
    }
    if (batch_frames < 0) {
        throw ConfigError("batch frames must be nonnegative");
    }
    if (angle_noise && !(angle_noise->delta >= 0.0)) {
        throw ConfigError("noise delta must be nonnegative");
    }
}

TrainResult train(SeparatorModel model, const std::vector<TrainingScene>& scenes,
                  const TrainConfig& train_cfg, const LossConfig& loss_cfg)
{
    train_cfg.validate();
    loss_cfg.validate();
    if (scenes.empty()) {
        throw ConfigError("training needs at least one scene");
    }

    TrainResult result;
    if (train_cfg.epochs == 0) {
        result.model = std::move(model);
        return result;
    }

    const ModelShape& shape = model.shape();
    const std::vector<TrainingExample> examples = make_examples(scenes, shape, train_cfg.batch_frames);
    AdamState adam;

    for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
        std::vector<std::vector<SpatialEmbedding>> embeddings(scenes.size());
        Rng noise_rng(derive_seed(train_cfg.angle_noise ? train_cfg.angle_noise->seed : 0,
                                  static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = 0; i < scenes.size(); ++i) {
            std::vector<AngleSpec> angles = scenes[i].angles;
            if (train_cfg.angle_noise) {
                for (auto& a : angles) {
                    a = perturb_angle(a, train_cfg.angle_noise->delta, noise_rng);
                }
            }
            embeddings[i] = embed_angles(shape, angles);
        }

        std::vector<std::size_t> order(examples.size());
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng(derive_seed(train_cfg.seed, static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[uniform_index(shuffle_rng, i)]);
        }

        EpochLog log;
        log.epoch = epoch + 1;
        double seen = 0.0;
        for (std::size_t start = 0; start < order.size(); start += train_cfg.batch_size) {
            std::vector<BatchItem> batch;
            for (std::size_t i = start; i < std::min(order.size(), start + train_cfg.batch_size); ++i) {
                const TrainingExample& ex = examples[order[i]];
                batch.push_back({&ex, &embeddings[ex.scene_index]});
            }
            LossAndGradient step;
            try {
                step = backward(model, batch, loss_cfg, train_cfg.workers);
            } catch (const DivergenceError&) {
                result.diverged = true;
            }
            if (result.diverged || !step.grad.allFinite()) {
                result.diverged = true;
                result.model = std::move(model);
                return result;
            }
            const double n = static_cast<double>(batch.size());
            log.freq += step.loss.freq * n;
            log.wsdr += step.loss.wsdr * n;
            log.total += step.loss.total * n;
            seen += n;
            adam_step(model.parameters(), step.grad, adam, train_cfg.adam);
        }
        log.freq /= seen;
        log.wsdr /= seen;
        log.total /= seen;
        result.history.push_back(log);
    }
    result.model = std::move(model);
    return result;
}

std::string history_to_csv(const std::vector<EpochLog>& history)
{
    std::string out = "epoch,freq_loss,wsdr_loss,total\n";
    char buf[128];
    for (const auto& h : history) {
        std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g\n", h.epoch, h.freq, h.wsdr, h.total);
        out += buf;
    }
    return out;
}

} // namespace spatialsep
