#include "spatialsep/conditioning.hpp"

namespace spatialsep {

std::string_view to_string(ConditionMode mode)
{
    switch (mode) {
    case ConditionMode::None: return "NONE";
    case ConditionMode::Cat: return "CAT";
    case ConditionMode::Add: return "ADD";
    case ConditionMode::AdaIn: return "ADAIN";
    }
    return "NONE";
}

ConditionMode parse_condition_mode(std::string_view text)
{
    if (text == "NONE") return ConditionMode::None;
    if (text == "CAT") return ConditionMode::Cat;
    if (text == "ADD") return ConditionMode::Add;
    if (text == "ADAIN") return ConditionMode::AdaIn;
    throw ConfigError("unknown condition mode: " + std::string(text));
}

ConditionedFrame condition_cat(const Vector& frame, const SpatialEmbedding& emb, Eigen::Index t)
{
    Vector out(frame.size() + emb.values.size());
    out << frame, emb.values;
    return {std::move(out), t};
}

ConditionedFrame condition_add(const Vector& frame, const SpatialEmbedding& emb, Eigen::Index t)
{
    if (emb.values.size() != frame.size()) {
        throw ConfigError("ADD requires D = 2F");
    }
    return {frame + emb.values, t};
}

ConditionedFrame condition_adain(const Vector& frame, const SpatialEmbedding& emb, Eigen::Index t)
{
    if (emb.values.size() != frame.size()) {
        throw ConfigError("ADAIN requires D = 2F");
    }
    return {adain(frame, emb.values), t};
}

Eigen::Index conditioned_size(ConditionMode mode, Eigen::Index stacked_bins, Eigen::Index emb_dim)
{
    switch (mode) {
    case ConditionMode::Cat:
        return stacked_bins + emb_dim;
    case ConditionMode::Add:
    case ConditionMode::AdaIn:
        if (emb_dim != stacked_bins) {
            throw ConfigError(std::string(to_string(mode)) + " requires D = 2F");
        }
        return stacked_bins;
    case ConditionMode::None:
        return stacked_bins;
    }
    return stacked_bins;
}

Matrix condition_frames(const Matrix& frames, const Vector& emb, ConditionMode mode)
{
    const Eigen::Index rows = frames.rows();
    const Eigen::Index cols = frames.cols();
    switch (mode) {
    case ConditionMode::None:
        return frames;
    case ConditionMode::Cat: {
        Matrix out(rows + emb.size(), cols);
        out.topRows(rows) = frames;
        out.bottomRows(emb.size()) = emb.replicate(1, cols);
        return out;
    }
    case ConditionMode::Add:
        if (emb.size() != rows) {
            throw ConfigError("ADD requires D = 2F");
        }
        return frames.colwise() + emb;
    case ConditionMode::AdaIn: {
        if (emb.size() != rows) {
            throw ConfigError("ADAIN requires D = 2F");
        }
        Matrix out(rows, cols);
        for (Eigen::Index t = 0; t < cols; ++t) {
            out.col(t) = adain(frames.col(t), emb);
        }
        return out;
    }
    }
    return frames;
}

} // namespace spatialsep
