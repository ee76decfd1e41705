#include <doctest.h>

#include <limits>

#include "tiny_setup.hpp"

using namespace spatialsep;
using namespace spatialsep::testing;

TEST_CASE("analytic gradients match central differences in every mode")
{
    for (auto mode : {ConditionMode::None, ConditionMode::Cat, ConditionMode::Add, ConditionMode::AdaIn}) {
        CAPTURE(to_string(mode));
        const GradCheck r = gradient_check(mode, 21);
        CHECK(r.max_rel_error < 1e-4);
        CHECK(r.max_abs_grad > 0.0);
    }
}

TEST_CASE("gradient checks with each loss term alone")
{
    const TrainingScene scene = tiny_scene(4);
    SeparatorModel model = tiny_model(ConditionMode::Cat, 4, scene);
    const TrainingExample ex = make_example(scene.mixed, model.shape());
    const auto emb = embed_angles(model.shape(), scene.angles);
    for (const LossConfig cfg : {LossConfig{1.0, 0.0, true}, LossConfig{0.0, 1.0, true}}) {
        const Vector g = example_gradient(model, ex, emb, cfg).grad;
        Rng rng(2);
        for (int i = 0; i < 20; ++i) {
            const auto idx = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(g.size())));
            const double saved = model.parameters()[idx];
            model.parameters()[idx] = saved + 1e-5;
            const double up = example_loss(model, ex, emb, cfg).total;
            model.parameters()[idx] = saved - 1e-5;
            const double down = example_loss(model, ex, emb, cfg).total;
            model.parameters()[idx] = saved;
            const double num = (up - down) / 2e-5;
            CHECK(std::abs(num - g[idx]) <= 1e-4 * std::max({std::abs(num), std::abs(g[idx]), 1e-6}));
        }
    }
}

TEST_CASE("a parameter the loss cannot see has zero gradient")
{
    const TrainingScene scene = tiny_scene(5);
    SeparatorModel model = tiny_model(ConditionMode::None, 5, scene);
    // Zeroing stream 0's head weights cuts its trunk off from the loss.
    model.stream(0).head_w.setZero();
    const TrainingExample ex = make_example(scene.mixed, model.shape());
    const Vector g = example_gradient(model, ex, {}, LossConfig{}).grad;
    const auto view = model.stream_view(g, 0);
    CHECK(view.trunk_w.cwiseAbs().maxCoeff() == 0.0);
    CHECK(view.trunk_b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("freq loss gradient vanishes for the head bias at a perfect prediction")
{
    // With a single source the mixture itself is the target: push masks to one.
    const TrainingScene scene = tiny_scene(6, 160, {-45.0, 45.0});
    SeparatorModel model = tiny_model(ConditionMode::None, 6, scene);
    TrainingExample ex = make_example(scene.mixed, model.shape());
    ex.target_mags = {ex.mix_mag.mag, ex.mix_mag.mag};
    model.parameters().setZero();
    model.stream(0).head_b.setConstant(800.0);
    model.stream(1).head_b.setConstant(800.0);
    const Vector g = example_gradient(model, ex, {}, LossConfig{1.0, 0.0, true}).grad;
    CHECK(model.stream_view(g, 0).head_b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam")
{
    Vector p(3);
    p << 1.0, -2.0, 0.5;
    const Vector start = p;
    AdamState st;
    AdamConfig cfg;
    adam_step(p, Vector::Zero(3), st, cfg);
    CHECK(p == start);

    AdamState fresh;
    Vector q = start;
    Vector g(3);
    g << 0.3, -4.0, 1e-3;
    adam_step(q, g, fresh, cfg);
    for (int i = 0; i < 3; ++i) {
        CHECK((q[i] - start[i]) == doctest::Approx(-cfg.learning_rate * (g[i] > 0 ? 1.0 : -1.0)).epsilon(1e-4));
    }

    AdamState s1 = fresh, s2 = fresh;
    Vector a = q, b = q;
    adam_step(a, g, s1, cfg);
    adam_step(b, g, s2, cfg);
    CHECK(a == b);
    CHECK(s1.step == 2);
    CHECK_THROWS_AS(adam_step(a, Vector::Zero(2), s1, cfg), ConfigError);
}

TEST_CASE("batch gradient is independent of the worker count")
{
    std::vector<TrainingScene> scenes{tiny_scene(1), tiny_scene(2), tiny_scene(3)};
    const SeparatorModel model = tiny_model(ConditionMode::Cat, 7, scenes[0]);
    const auto examples = make_examples(scenes, model.shape(), 0);
    std::vector<std::vector<SpatialEmbedding>> emb;
    for (const auto& s : scenes) {
        emb.push_back(embed_angles(model.shape(), s.angles));
    }
    std::vector<BatchItem> batch;
    for (const auto& ex : examples) {
        batch.push_back({&ex, &emb[ex.scene_index]});
    }
    const auto one = backward(model, batch, LossConfig{}, 1);
    const auto three = backward(model, batch, LossConfig{}, 3);
    CHECK(one.grad == three.grad);
    CHECK(one.loss.total == three.loss.total);
    CHECK_THROWS_AS(backward(model, {}, LossConfig{}), ConfigError);
}

TEST_CASE("excerpts")
{
    const TrainingScene scene = tiny_scene(8, 400);
    const ModelShape shape = tiny_shape(ConditionMode::None);
    // 10 frames span 9 * 4 + 16 = 52 samples
    const auto ex = make_examples({scene}, shape, 10);
    CHECK(ex.size() == 400 / 52);
    CHECK(make_examples({scene}, shape, 0).size() == 1);
    CHECK(make_examples({scene}, shape, 1000).size() == 1);
    ModelShape three = shape;
    three.num_sources = 3;
    CHECK_THROWS_AS(make_examples({scene}, three, 0), ConfigError);
}

TEST_CASE("zero epochs return the model unchanged")
{
    const TrainingScene scene = tiny_scene(9);
    const SeparatorModel model = tiny_model(ConditionMode::Cat, 9, scene);
    TrainConfig cfg;
    cfg.epochs = 0;
    const TrainResult r = train(model, {scene}, cfg, LossConfig{});
    CHECK(r.model.parameters() == model.parameters());
    CHECK(r.history.empty());
    CHECK_FALSE(r.diverged);
}

TEST_CASE("training loss decreases on a hard-pan scene")
{
    const TrainingScene scene = tiny_scene(10, 2000);
    const SeparatorModel model = tiny_model(ConditionMode::Cat, 10, scene);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_frames = 16;
    cfg.batch_size = 2;
    cfg.adam.learning_rate = 1e-3;
    const TrainResult r = train(model, {scene}, cfg, LossConfig{});
    REQUIRE(r.history.size() == 5);
    for (std::size_t e = 1; e < r.history.size(); ++e) {
        CHECK(r.history[e].total < r.history[e - 1].total);
    }
    const TrainingExample ex = make_example(scene.mixed, model.shape());
    const auto emb = embed_angles(model.shape(), scene.angles);
    CHECK(example_loss(r.model, ex, emb, {}).total < example_loss(model, ex, emb, {}).total);
}

TEST_CASE("training is deterministic across runs and worker counts")
{
    std::vector<TrainingScene> scenes{tiny_scene(11, 600), tiny_scene(12, 600, {-20.0, 10.0})};
    const SeparatorModel model = tiny_model(ConditionMode::AdaIn, 11, scenes[0]);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_frames = 12;
    cfg.batch_size = 3;
    cfg.seed = 5;
    cfg.angle_noise = NoiseSpec{8.0, 17};
    const TrainResult a = train(model, scenes, cfg, {});
    const TrainResult b = train(model, scenes, cfg, {});
    cfg.workers = 3;
    const TrainResult c = train(model, scenes, cfg, {});
    CHECK(a.model.parameters() == b.model.parameters());
    CHECK(a.model.parameters() == c.model.parameters());
    CHECK(history_to_csv(a.history) == history_to_csv(c.history));

    cfg.seed = 6;
    const TrainResult d = train(model, scenes, cfg, {});
    CHECK(a.model.parameters() != d.model.parameters());
}

TEST_CASE("divergence stops training with the history so far")
{
    const TrainingScene scene = tiny_scene(13);
    SeparatorModel model = tiny_model(ConditionMode::None, 13, scene);
    model.parameters()[0] = std::numeric_limits<double>::quiet_NaN();
    TrainConfig cfg;
    cfg.epochs = 3;
    const TrainResult r = train(model, {scene}, cfg, {});
    CHECK(r.diverged);
    CHECK(r.history.empty());

    const TrainingExample ex = make_example(scene.mixed, model.shape());
    CHECK_THROWS_WITH_AS(example_gradient(model, ex, {}, {}), "diverged", DivergenceError);
}

TEST_CASE("history csv")
{
    const std::string csv = history_to_csv({{1, 0.5, -0.25, 0.25}, {2, 0.125, -0.5, -0.375}});
    CHECK(csv == "epoch,freq_loss,wsdr_loss,total\n1,0.5,-0.25,0.25\n2,0.125,-0.5,-0.375\n");
}

TEST_CASE("train config validation")
{
    TrainConfig cfg;
    cfg.adam.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    CHECK_THROWS_AS(train(SeparatorModel(tiny_shape(ConditionMode::None)), {}, cfg, {}), ConfigError);
}
