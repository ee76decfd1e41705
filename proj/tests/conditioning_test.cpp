#include <doctest.h>

#include "spatialsep/conditioning.hpp"

using namespace spatialsep;

namespace {

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) {
        out[i++] = x;
    }
    return out;
}

SpatialEmbedding emb(const Vector& v)
{
    return {v, AngleSpec(0.0)};
}

Vector random_vector(Rng& rng, Eigen::Index n, double lo, double hi)
{
    Vector v(n);
    for (auto& x : v) {
        x = uniform(rng, lo, hi);
    }
    return v;
}

} // namespace

TEST_CASE("mode names")
{
    for (auto m : {ConditionMode::None, ConditionMode::Cat, ConditionMode::Add, ConditionMode::AdaIn}) {
        CHECK(parse_condition_mode(to_string(m)) == m);
    }
    CHECK_THROWS_AS(parse_condition_mode("film"), ConfigError);
}

TEST_CASE("cat appends the embedding")
{
    const auto out = condition_cat(vec({1, 2, 3, 4}), emb(vec({-30})), 7);
    CHECK(out.values == vec({1, 2, 3, 4, -30}));
    CHECK(out.frame_index == 7);
}

TEST_CASE("add")
{
    CHECK(condition_add(vec({1, 1, 1, 1}), emb(vec({0, 1, 0, 1}))).values == vec({1, 2, 1, 2}));
    const Vector f = vec({0.5, -2, 3, 9});
    CHECK(condition_add(f, emb(Vector::Zero(4))).values == f);
    const auto e45 = encode(AngleSpec(45.0), EmbeddingConfig::sinusoidal(4));
    CHECK(condition_add(Vector::Zero(4), e45).values == e45.values);
    CHECK_THROWS_WITH_AS(condition_add(f, emb(vec({1}))), "ADD requires D = 2F", ConfigError);
    // invertible
    const Vector e = vec({0.1, 0.2, 0.3, 0.4});
    CHECK((condition_add(f, emb(e)).values - e - f).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("adain matches embedding statistics")
{
    Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        const Vector f = random_vector(rng, 16, -3.0, 5.0);
        const Vector e = random_vector(rng, 16, -1.0, 1.0);
        const Vector out = condition_adain(f, emb(e)).values;
        const auto [om, os] = mean_std(out);
        const auto [em, es] = mean_std(e);
        CHECK(std::abs(om - em) <= 1e-6 * std::max(1.0, std::abs(em)));
        CHECK(std::abs(os - es) <= 1e-6 * es);
    }
}

TEST_CASE("adain degenerate and identity cases")
{
    const Vector out = condition_adain(Vector::Constant(6, 2.5), emb(vec({1, 2, 3, 4, 5, 6}))).values;
    CHECK((out.array() - 3.5).abs().maxCoeff() < 1e-12);

    const Vector f = vec({1, 4, 2, 8});
    const Vector standard = vec({-1, 1, -1, 1});  // mean 0, std 1
    const auto [fm, fs] = mean_std(f);
    const Vector expected = ((f.array() - fm) / fs).matrix();
    CHECK((condition_adain(f, emb(standard)).values - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_WITH_AS(condition_adain(f, emb(vec({1, 2}))), "ADAIN requires D = 2F", ConfigError);
}

TEST_CASE("conditioning a block of frames")
{
    Matrix frames(4, 3);
    frames << 1, 2, 3,
              4, 5, 6,
              7, 8, 9,
              1, 0, 1;
    CHECK(condition_frames(frames, Vector(), ConditionMode::None) == frames);

    const Matrix cat = condition_frames(frames, vec({-30, 7}), ConditionMode::Cat);
    REQUIRE(cat.rows() == 6);
    CHECK(cat.topRows(4) == frames);
    for (Eigen::Index t = 0; t < 3; ++t) {
        CHECK(cat(4, t) == -30.0);
        CHECK(cat(5, t) == 7.0);
    }

    const Vector e = vec({0, 1, 0, 1});
    const Matrix add = condition_frames(frames, e, ConditionMode::Add);
    const Matrix ada = condition_frames(frames, e, ConditionMode::AdaIn);
    for (Eigen::Index t = 0; t < 3; ++t) {
        CHECK(add.col(t) == condition_add(frames.col(t), emb(e)).values);
        CHECK(ada.col(t) == condition_adain(frames.col(t), emb(e)).values);
    }
    CHECK(conditioned_size(ConditionMode::Cat, 4, 2) == 6);
    CHECK(conditioned_size(ConditionMode::Add, 4, 4) == 4);
    CHECK_THROWS_AS(conditioned_size(ConditionMode::AdaIn, 4, 2), ConfigError);
}
