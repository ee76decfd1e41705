#include <doctest.h>

#include "tiny_setup.hpp"

using namespace spatialsep;
using namespace spatialsep::testing;

namespace {

StackedMagnitude tiny_mag(const TrainingScene& scene, const ModelShape& shape)
{
    return make_example(scene.mixed, shape).mix_mag;
}

} // namespace

TEST_CASE("zero parameters give half masks")
{
    const TrainingScene scene = tiny_scene(1);
    for (auto mode : {ConditionMode::None, ConditionMode::Cat, ConditionMode::Add, ConditionMode::AdaIn}) {
        SeparatorModel model(tiny_shape(mode));
        const auto masks = forward(model, tiny_mag(scene, model.shape()), embed_angles(model.shape(), scene.angles));
        REQUIRE(masks.masks.size() == 2);
        for (const auto& m : masks.masks) {
            CHECK(m.rows() == 18);
            CHECK((m.array() - 0.5).abs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("cat with zero embedding columns equals the baseline")
{
    const TrainingScene scene = tiny_scene(2);
    const SeparatorModel base = tiny_model(ConditionMode::None, 5, scene);
    SeparatorModel cat(tiny_shape(ConditionMode::Cat));
    cat.input_norm() = base.input_norm();
    for (Eigen::Index k = 0; k < 2; ++k) {
        auto dst = cat.stream(k);
        const auto src = base.stream(k);
        dst.encoder_w.leftCols(18) = src.encoder_w;
        dst.encoder_w.rightCols(1).setZero();
        dst.encoder_b = src.encoder_b;
        dst.trunk_w = src.trunk_w;
        dst.trunk_b = src.trunk_b;
        dst.head_w = src.head_w;
        dst.head_b = src.head_b;
    }
    const auto mag = tiny_mag(scene, base.shape());
    const auto a = forward(base, mag, {});
    const auto b = forward(cat, mag, embed_angles(cat.shape(), scene.angles));
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(a.masks[k] == b.masks[k]);
    }
}

TEST_CASE("permuting streams permutes masks")
{
    const TrainingScene scene = tiny_scene(3, 160, {-20.0, 35.0});
    const SeparatorModel model = tiny_model(ConditionMode::AdaIn, 6, scene);
    SeparatorModel swapped = model;
    const Eigen::Index n = model.shape().stream_size();
    swapped.parameters().head(n) = model.parameters().tail(n);
    swapped.parameters().tail(n) = model.parameters().head(n);

    const auto mag = tiny_mag(scene, model.shape());
    const auto a = forward(model, mag, embed_angles(model.shape(), scene.angles));
    const auto b = forward(swapped, mag, embed_angles(model.shape(), {scene.angles[1], scene.angles[0]}));
    CHECK((a.masks[0] - b.masks[1]).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((a.masks[1] - b.masks[0]).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("masks lie strictly inside (0, 1)")
{
    const TrainingScene scene = tiny_scene(4);
    SeparatorModel model = tiny_model(ConditionMode::Cat, 7, scene);
    model.parameters() *= 20.0;
    const auto masks = forward(model, tiny_mag(scene, model.shape()), embed_angles(model.shape(), scene.angles));
    for (const auto& m : masks.masks) {
        CHECK(m.minCoeff() >= 0.0);
        CHECK(m.maxCoeff() <= 1.0);
    }
    model.parameters() /= 20.0;
    for (const auto& m : forward(model, tiny_mag(scene, model.shape()), embed_angles(model.shape(), scene.angles)).masks) {
        CHECK(m.minCoeff() > 0.0);
        CHECK(m.maxCoeff() < 1.0);
    }
}

TEST_CASE("angle sensitivity per mode")
{
    const TrainingScene scene = tiny_scene(5);
    for (auto mode : {ConditionMode::None, ConditionMode::Cat, ConditionMode::Add, ConditionMode::AdaIn}) {
        const SeparatorModel model = tiny_model(mode, 8, scene);
        const auto mag = tiny_mag(scene, model.shape());
        const auto a = forward(model, mag, embed_angles(model.shape(), {AngleSpec(-30.0), AngleSpec(30.0)}));
        const auto b = forward(model, mag, embed_angles(model.shape(), {AngleSpec(-10.0), AngleSpec(30.0)}));
        const double diff = (a.masks[0] - b.masks[0]).norm();
        if (mode == ConditionMode::None) {
            CHECK(diff == 0.0);
        } else {
            CHECK(diff > 0.0);
        }
    }
}

TEST_CASE("averaging junction couples the streams")
{
    const TrainingScene scene = tiny_scene(6);
    const SeparatorModel model = tiny_model(ConditionMode::None, 9, scene);
    SeparatorModel cut = model;
    // tanh(0) = 0: zero weights and bias silence stream 1's encoder output.
    cut.stream(1).encoder_w.setZero();
    cut.stream(1).encoder_b.setZero();
    const auto mag = tiny_mag(scene, model.shape());
    CHECK((forward(model, mag, {}).masks[0] - forward(cut, mag, {}).masks[0]).norm() > 0.0);
}

TEST_CASE("embedding count is checked")
{
    const TrainingScene scene = tiny_scene(7);
    const SeparatorModel model = tiny_model(ConditionMode::Cat, 1, scene);
    const auto mag = tiny_mag(scene, model.shape());
    CHECK_THROWS_AS(forward(model, mag, {}), ConfigError);
    CHECK_THROWS_AS(embed_angles(model.shape(), {AngleSpec(0.0)}), ConfigError);
    CHECK(embed_angles(tiny_shape(ConditionMode::None), {}).empty());
}

TEST_CASE("apply_masks with trivial masks")
{
    const TrainingScene scene = tiny_scene(8, 400);
    const ModelShape shape = tiny_shape(ConditionMode::None);
    const TrainingExample ex = make_example(scene.mixed, shape);
    const Eigen::Index t = ex.left.num_frames();
    const auto ones = apply_masks(MaskSet{{Matrix::Ones(18, t), Matrix::Ones(18, t)}}, ex.left, ex.right,
                                  ex.mixture.size());
    for (const auto& s : ones) {
        CHECK((s.left - ex.mixture.left).norm() / ex.mixture.left.norm() < 1e-6);
        CHECK((s.right - ex.mixture.right).norm() / ex.mixture.right.norm() < 1e-6);
    }
    const auto zeros = apply_masks(MaskSet{{Matrix::Zero(18, t), Matrix::Zero(18, t)}}, ex.left, ex.right,
                                   ex.mixture.size());
    CHECK(zeros[0].left.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(apply_masks(MaskSet{{Matrix::Ones(17, t)}}, ex.left, ex.right, ex.mixture.size()), ConfigError);
}

TEST_CASE("hard-pan scene is recovered by channel masks")
{
    // source 0 at -45 lives only in the right channel, source 1 only in the left
    const TrainingScene scene = tiny_scene(9, 640);
    const ModelShape shape = tiny_shape(ConditionMode::None);
    const TrainingExample ex = make_example(scene.mixed, shape);
    const Eigen::Index t = ex.left.num_frames();
    Matrix right_only = Matrix::Zero(18, t);
    right_only.bottomRows(9).setOnes();
    Matrix left_only = Matrix::Zero(18, t);
    left_only.topRows(9).setOnes();
    const auto est = apply_masks(MaskSet{{right_only, left_only}}, ex.left, ex.right, ex.mixture.size());
    for (std::size_t k = 0; k < 2; ++k) {
        Vector got(2 * est[k].size());
        got << est[k].left, est[k].right;
        Vector want(2 * est[k].size());
        want << ex.targets[k].left, ex.targets[k].right;
        CHECK((got - want).norm() / want.norm() < 1e-6);
    }
}

TEST_CASE("parameter initialisation")
{
    const ModelShape shape = tiny_shape(ConditionMode::Cat);
    const Vector a = init_parameters(shape, 3);
    CHECK(a == init_parameters(shape, 3));
    CHECK(a != init_parameters(shape, 4));
    SeparatorModel m(shape);
    m.parameters() = a;
    for (Eigen::Index k = 0; k < 2; ++k) {
        CHECK(m.stream(k).encoder_w.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(19.0));
        CHECK(m.stream(k).trunk_w.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(8.0));
        CHECK(m.stream(k).head_b.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(8.0));
    }
    ModelShape four = shape;
    four.hidden = 4;
    four.mode = ConditionMode::None;
    SeparatorModel m4(four);
    m4.parameters() = init_parameters(four, 1);
    CHECK(m4.stream(0).trunk_w.cwiseAbs().maxCoeff() <= 0.5);
}

TEST_CASE("shape validation")
{
    ModelShape s = tiny_shape(ConditionMode::Add);
    s.embedding = EmbeddingConfig::sinusoidal(8);
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = tiny_shape(ConditionMode::None);
    s.num_sources = 1;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = tiny_shape(ConditionMode::None);
    s.hop = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    CHECK(tiny_shape(ConditionMode::Cat).input_size() == 19);
    CHECK(tiny_shape(ConditionMode::AdaIn).input_size() == 18);
}

TEST_CASE("input normalisation statistics")
{
    Matrix a(2, 3);
    a << 1, 1, 1,
         0, 2, 4;
    StackedMagnitude m{a};
    const InputNorm n = fit_input_norm({&m});
    const Matrix f = input_features(a);
    CHECK(n.mean[1] == doctest::Approx(f.row(1).mean()));
    CHECK(n.std[0] > 0.0);  // constant row floored
    CHECK(n.std[0] < 1e-2);
}

TEST_CASE("separate returns K estimates of the mixture length")
{
    const TrainingScene scene = tiny_scene(10, 300);
    const SeparatorModel model = tiny_model(ConditionMode::Cat, 2, scene);
    const auto est = separate(model, scene.mixed.mixture, scene.angles);
    REQUIRE(est.size() == 2);
    CHECK(est[0].size() == 300);
    CHECK_THROWS_AS(separate(model, scene.mixed.mixture, {AngleSpec(0.0)}), ConfigError);
}
