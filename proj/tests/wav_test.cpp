#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "spatialsep/random.hpp"
#include "spatialsep/wav.hpp"

using namespace spatialsep;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name)
{
    return fs::temp_directory_path() / ("spatialsep_wav_" + name);
}

Vector noise(Eigen::Index n, std::uint64_t seed)
{
    Rng rng(seed);
    Vector v(n);
    for (auto& x : v) {
        x = uniform(rng, -0.9, 0.9);
    }
    return v;
}

} // namespace

TEST_CASE("float32 stereo round trip")
{
    const StereoSignal s(noise(1000, 1), noise(1000, 2), 22050);
    const auto path = temp_path("f32.wav");
    wav::write_stereo(path, s);
    const StereoSignal back = wav::read_stereo(path);
    CHECK(back.sample_rate == 22050);
    REQUIRE(back.size() == 1000);
    // float32 quantisation
    CHECK((back.left - s.left).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((back.right - s.right).cwiseAbs().maxCoeff() < 1e-7);
    fs::remove(path);
}

TEST_CASE("pcm16 mono round trip within one step")
{
    const MonoSignal m(noise(777, 3), 16000);
    const auto path = temp_path("pcm.wav");
    wav::write_mono(path, m, wav::SampleFormat::Pcm16);
    const wav::WavData data = wav::read(path);
    CHECK(data.format == wav::SampleFormat::Pcm16);
    REQUIRE(data.channels.size() == 1);
    CHECK((data.channels[0] - m.samples).cwiseAbs().maxCoeff() <= 0.5 / 32768.0 + 1e-12);
    fs::remove(path);
}

TEST_CASE("pcm16 clips out-of-range samples")
{
    Vector v(3);
    v << 2.0, -3.0, 0.0;
    const auto path = temp_path("clip.wav");
    wav::write(path, {v}, 8000, wav::SampleFormat::Pcm16);
    const auto data = wav::read(path);
    CHECK(data.channels[0][0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(data.channels[0][1] == doctest::Approx(-1.0).epsilon(1e-4));
    fs::remove(path);
}

TEST_CASE("identical input gives identical bytes")
{
    const StereoSignal s(noise(300, 4), noise(300, 5), 16000);
    const auto a = temp_path("a.wav");
    const auto b = temp_path("b.wav");
    wav::write_stereo(a, s);
    wav::write_stereo(b, s);
    std::ifstream fa(a, std::ios::binary);
    std::ifstream fb(b, std::ios::binary);
    const std::string sa((std::istreambuf_iterator<char>(fa)), {});
    const std::string sb((std::istreambuf_iterator<char>(fb)), {});
    CHECK(sa == sb);
    CHECK(sa.size() == 44 + 300 * 2 * 4);
    fs::remove(a);
    fs::remove(b);
}

TEST_CASE("malformed files are rejected")
{
    const auto path = temp_path("bad.wav");
    {
        std::ofstream f(path, std::ios::binary);
        f << "not a wave file at all";
    }
    CHECK_THROWS_AS(wav::read(path), Error);
    CHECK_THROWS_AS(wav::read(temp_path("missing.wav")), Error);
    fs::remove(path);
}

TEST_CASE("channel count is checked by the typed readers")
{
    const MonoSignal m(noise(100, 6), 16000);
    const auto path = temp_path("mono.wav");
    wav::write_mono(path, m);
    CHECK_THROWS_AS(wav::read_stereo(path), Error);
    CHECK_NOTHROW(wav::read_mono(path));
    fs::remove(path);
}
