#include "spatialsep/encoding.hpp"

namespace spatialsep {

namespace {

void check_even_dim(int dim)
{
    if (dim < 2 || dim % 2 != 0) {
        throw ConfigError("sinusoidal embedding dimension must be a positive even integer");
    }
}

} // namespace

EmbeddingConfig EmbeddingConfig::sinusoidal(int dim, ArgumentUnit unit)
{
    check_even_dim(dim);
    return {dim, EncodingMode::Sinusoidal, unit};
}

SpatialEmbedding encode_positive(double alpha, int dim, ArgumentUnit unit)
{
    if (alpha < 0.0) {
        throw ConfigError("use encode_negative");
    }
    check_even_dim(dim);
    const AngleSpec angle(alpha);
    return {positive_encoding(alpha, dim, unit), angle};
}

SpatialEmbedding encode_negative(double alpha, int dim, ArgumentUnit unit)
{
    if (alpha > 0.0) {
        throw ConfigError("use encode_positive");
    }
    check_even_dim(dim);
    const AngleSpec angle(alpha);
    return {negative_encoding(alpha, dim, unit), angle};
}

SpatialEmbedding encode(const AngleSpec& angle, const EmbeddingConfig& cfg)
{
    if (cfg.mode == EncodingMode::Raw) {
        if (cfg.dim != 1) {
            throw ConfigError("raw angle embedding has dimension 1");
        }
        return {Vector::Constant(1, angle.degrees()), angle};
    }
    return angle.degrees() >= 0.0 ? encode_positive(angle.degrees(), cfg.dim, cfg.unit)
                                  : encode_negative(angle.degrees(), cfg.dim, cfg.unit);
}

AngleSpec perturb_angle(const AngleSpec& angle, double delta, Rng& rng)
{
    if (!(delta >= 0.0)) {
        throw ConfigError("noise delta must be nonnegative");
    }
    if (delta == 0.0) {
        return angle;
    }
    return AngleSpec::clamped(angle.degrees() + uniform(rng, -delta, delta));
}

AngleSpec perturb_angle(const AngleSpec& angle, const NoiseSpec& noise)
{
    Rng rng(noise.seed);
    return perturb_angle(angle, noise.delta, rng);
}

} // namespace spatialsep
