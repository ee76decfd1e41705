#include "spatialsep/model.hpp"

#include <array>
#include <cmath>

#include "spatialsep/random.hpp"

namespace spatialsep {

namespace {

struct LayerOffsets {
    Eigen::Index encoder_w, encoder_b, trunk_w, trunk_b, head_w, head_b, end;
};

LayerOffsets offsets(const ModelShape& s)
{
    const Eigen::Index h = s.hidden;
    LayerOffsets o{};
    o.encoder_w = 0;
    o.encoder_b = o.encoder_w + h * s.input_size();
    o.trunk_w = o.encoder_b + h;
    o.trunk_b = o.trunk_w + h * h;
    o.head_w = o.trunk_b + h;
    o.head_b = o.head_w + s.stacked_bins() * h;
    o.end = o.head_b + s.stacked_bins();
    return o;
}

template <typename Ptr, typename View>
View make_view(Ptr base, const ModelShape& s)
{
    const LayerOffsets o = offsets(s);
    const Eigen::Index h = s.hidden;
    return View{
        {base + o.encoder_w, h, s.input_size()},
        {base + o.encoder_b, h},
        {base + o.trunk_w, h, h},
        {base + o.trunk_b, h},
        {base + o.head_w, s.stacked_bins(), h},
        {base + o.head_b, s.stacked_bins()},
    };
}

Matrix sigmoid(const Matrix& x)
{
    return (1.0 + (-x.array()).exp()).inverse().matrix();
}

} // namespace

Matrix input_features(const Matrix& mag)
{
    return (mag.array() + kFeatureFloor).log().matrix();
}

Eigen::Index ModelShape::input_size() const
{
    if (mode == ConditionMode::None) {
        return stacked_bins();
    }
    return conditioned_size(mode, stacked_bins(), embedding.dim);
}

Eigen::Index ModelShape::stream_size() const
{
    return offsets(*this).end;
}

void ModelShape::validate() const
{
    if (num_sources < 2) {
        throw ConfigError("K ≥ 2 required");
    }
    if (hidden < 1) {
        throw ConfigError("hidden size must be positive");
    }
    if (frame_size < 2 || frame_size % 2 != 0 || hop <= 0 || hop > frame_size) {
        throw ConfigError("invalid STFT framing");
    }
    if (embedding.mode == EncodingMode::Raw && embedding.dim != 1) {
        throw ConfigError("raw angle embedding has dimension 1");
    }
    (void)input_size();
}

SeparatorModel::SeparatorModel(ModelShape shape)
    : shape_(shape)
{
    shape_.validate();
    params_ = Vector::Zero(shape_.parameter_count());
    norm_.mean = Vector::Zero(shape_.stacked_bins());
    norm_.std = Vector::Ones(shape_.stacked_bins());
}

StreamParams<double> SeparatorModel::stream_view(Vector& flat, Eigen::Index k) const
{
    return make_view<double*, StreamParams<double>>(flat.data() + k * shape_.stream_size(), shape_);
}

StreamParams<const double> SeparatorModel::stream_view(const Vector& flat, Eigen::Index k) const
{
    return make_view<const double*, StreamParams<const double>>(flat.data() + k * shape_.stream_size(),
                                                                shape_);
}

Vector init_parameters(const ModelShape& shape, std::uint64_t seed)
{
    shape.validate();
    Rng rng(seed);
    Vector params(shape.parameter_count());
    const LayerOffsets o = offsets(shape);
    const Eigen::Index h = shape.hidden;
    // (start, end, fan_in) for each contiguous block inside one stream.
    const std::array<std::array<Eigen::Index, 3>, 3> layers{{
        {o.encoder_w, o.trunk_w, shape.input_size()},
        {o.trunk_w, o.head_w, h},
        {o.head_w, o.end, h},
    }};
    for (Eigen::Index k = 0; k < shape.num_sources; ++k) {
        double* base = params.data() + k * shape.stream_size();
        for (const auto& [begin, end, fan_in] : layers) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
            for (Eigen::Index i = begin; i < end; ++i) {
                base[i] = uniform(rng, -bound, bound);
            }
        }
    }
    return params;
}

void forward(const SeparatorModel& model, const StackedMagnitude& mix_mag,
             const std::vector<SpatialEmbedding>& embeddings, ForwardCache& cache)
{
    const ModelShape& s = model.shape();
    const auto k_count = static_cast<std::size_t>(s.num_sources);
    if (mix_mag.mag.rows() != s.stacked_bins()) {
        throw ConfigError("magnitude rows do not match the model's 2F");
    }
    if (s.mode != ConditionMode::None && embeddings.size() != k_count) {
        throw ConfigError("expected " + std::to_string(k_count) + " embeddings, got "
                          + std::to_string(embeddings.size()));
    }

    const auto& norm = model.input_norm();
    const Matrix normalized = ((input_features(mix_mag.mag).colwise() - norm.mean).array().colwise()
                               / norm.std.array()).matrix();
    const Eigen::Index frames = normalized.cols();

    cache.inputs.resize(k_count);
    cache.hidden.resize(k_count);
    cache.trunk.resize(k_count);
    cache.masks.resize(k_count);
    cache.average = Matrix::Zero(s.hidden, frames);

    for (std::size_t k = 0; k < k_count; ++k) {
        if (s.mode == ConditionMode::None) {
            cache.inputs[k] = normalized;
        } else {
            if (embeddings[k].values.size() != s.embedding.dim) {
                throw ConfigError("embedding width does not match the model");
            }
            cache.inputs[k] = condition_frames(normalized, embeddings[k].values, s.mode);
        }
        const auto p = model.stream(static_cast<Eigen::Index>(k));
        cache.hidden[k] = ((p.encoder_w * cache.inputs[k]).colwise() + p.encoder_b).array().tanh().matrix();
        cache.average += cache.hidden[k];
    }
    cache.average /= static_cast<double>(k_count);

    for (std::size_t k = 0; k < k_count; ++k) {
        const auto p = model.stream(static_cast<Eigen::Index>(k));
        cache.trunk[k] = ((p.trunk_w * cache.average).colwise() + p.trunk_b).array().tanh().matrix();
        cache.masks[k] = sigmoid((p.head_w * cache.trunk[k]).colwise() + p.head_b);
    }
}

MaskSet forward(const SeparatorModel& model, const StackedMagnitude& mix_mag,
                const std::vector<SpatialEmbedding>& embeddings)
{
    ForwardCache cache;
    forward(model, mix_mag, embeddings, cache);
    return {std::move(cache.masks)};
}

Vector backward_from_masks(const SeparatorModel& model, const ForwardCache& cache,
                           const std::vector<Matrix>& mask_grads)
{
    const ModelShape& s = model.shape();
    const auto k_count = static_cast<std::size_t>(s.num_sources);
    if (mask_grads.size() != k_count) {
        throw ConfigError("one mask gradient per stream required");
    }

    Vector grad = Vector::Zero(s.parameter_count());
    Matrix d_average = Matrix::Zero(cache.average.rows(), cache.average.cols());

    for (std::size_t k = 0; k < k_count; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        const auto p = model.stream(kk);
        auto g = model.stream_view(grad, kk);
        const Matrix& mask = cache.masks[k];
        const Matrix d_head = (mask_grads[k].array() * mask.array() * (1.0 - mask.array())).matrix();
        g.head_w.noalias() = d_head * cache.trunk[k].transpose();
        g.head_b = d_head.rowwise().sum();
        const Matrix d_trunk_out = p.head_w.transpose() * d_head;
        const Matrix d_trunk = (d_trunk_out.array() * (1.0 - cache.trunk[k].array().square())).matrix();
        g.trunk_w.noalias() = d_trunk * cache.average.transpose();
        g.trunk_b = d_trunk.rowwise().sum();
        d_average.noalias() += p.trunk_w.transpose() * d_trunk;
    }

    const Matrix d_hidden = d_average / static_cast<double>(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        auto g = model.stream_view(grad, kk);
        const Matrix d_enc = (d_hidden.array() * (1.0 - cache.hidden[k].array().square())).matrix();
        g.encoder_w.noalias() = d_enc * cache.inputs[k].transpose();
        g.encoder_b = d_enc.rowwise().sum();
    }
    return grad;
}

std::vector<StereoSignal> apply_masks(const MaskSet& masks, const Spectrogram& mix_left,
                                      const Spectrogram& mix_right, Eigen::Index out_len)
{
    const Eigen::Index bins = mix_left.num_bins();
    if (mix_right.num_bins() != bins || mix_right.num_frames() != mix_left.num_frames()) {
        throw ConfigError("left and right spectrograms differ in shape");
    }
    std::vector<StereoSignal> out;
    out.reserve(masks.masks.size());
    for (const Matrix& m : masks.masks) {
        if (m.rows() != 2 * bins || m.cols() != mix_left.num_frames()) {
            throw ConfigError("mask shape does not match the mixture spectrogram");
        }
        Spectrogram left = mix_left;
        Spectrogram right = mix_right;
        left.bins = mix_left.bins.cwiseProduct(m.topRows(bins).cast<Complex>());
        right.bins = mix_right.bins.cwiseProduct(m.bottomRows(bins).cast<Complex>());
        out.emplace_back(istft(left, out_len).samples, istft(right, out_len).samples,
                         mix_left.sample_rate);
    }
    return out;
}

InputNorm fit_input_norm(const std::vector<const StackedMagnitude*>& mags)
{
    if (mags.empty()) {
        throw ConfigError("no magnitudes to fit normalisation on");
    }
    const Eigen::Index rows = mags.front()->mag.rows();
    Vector sum = Vector::Zero(rows);
    Vector sum_sq = Vector::Zero(rows);
    double count = 0.0;
    for (const auto* m : mags) {
        if (m->mag.rows() != rows) {
            throw ConfigError("magnitudes differ in row count");
        }
        const Matrix f = input_features(m->mag);
        sum += f.rowwise().sum();
        sum_sq += f.array().square().matrix().rowwise().sum();
        count += static_cast<double>(m->mag.cols());
    }
    InputNorm norm;
    norm.mean = sum / count;
    const Vector var = (sum_sq / count - norm.mean.cwiseAbs2()).cwiseMax(0.0);
    // Rows that never carry energy would otherwise divide by ~0.
    const double floor = std::max(1e-8, 1e-3 * var.cwiseSqrt().maxCoeff());
    norm.std = var.cwiseSqrt().cwiseMax(floor);
    return norm;
}

std::vector<SpatialEmbedding> embed_angles(const ModelShape& shape, const std::vector<AngleSpec>& angles)
{
    std::vector<SpatialEmbedding> out;
    if (shape.mode == ConditionMode::None) {
        return out;
    }
    if (static_cast<Eigen::Index>(angles.size()) != shape.num_sources) {
        throw ConfigError("expected " + std::to_string(shape.num_sources) + " angles, got "
                          + std::to_string(angles.size()));
    }
    out.reserve(angles.size());
    for (const auto& a : angles) {
        out.push_back(encode(a, shape.embedding));
    }
    return out;
}

std::vector<StereoSignal> separate(const SeparatorModel& model, const StereoSignal& mixture,
                                   const std::vector<AngleSpec>& angles)
{
    const ModelShape& s = model.shape();
    const Eigen::Index pad = analysis_padding(s.frame_size, s.hop);
    const StereoSignal padded = pad_signal(mixture, pad);
    const Spectrogram left = stft(padded.mono_channel(0), s.frame_size, s.hop);
    const Spectrogram right = stft(padded.mono_channel(1), s.frame_size, s.hop);
    const MaskSet masks = forward(model, stack_stereo_magnitude(left, right), embed_angles(s, angles));
    std::vector<StereoSignal> out;
    for (const auto& est : apply_masks(masks, left, right, padded.size())) {
        out.push_back(trim_signal(est, pad, mixture.size()));
    }
    return out;
}

} // namespace spatialsep
