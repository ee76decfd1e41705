#include "spatialsep/checkpoint.hpp"

#include <bit>
#include <fstream>

namespace spatialsep {

namespace {

constexpr const char* kFormatTag = "spatialsep-checkpoint";
constexpr int kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void write_block(std::ostream& out, const Vector& v)
{
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Vector read_block(std::istream& in, Eigen::Index count)
{
    Vector v(count);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(count * sizeof(double))) {
        throw ConfigError("truncated checkpoint payload");
    }
    return v;
}

std::string unit_name(ArgumentUnit u)
{
    return u == ArgumentUnit::Degrees ? "degrees" : "radians";
}

} // namespace

nlohmann::json shape_to_json(const ModelShape& s)
{
    return {
        {"num_sources", s.num_sources},
        {"frame_size", s.frame_size},
        {"hop", s.hop},
        {"sample_rate", s.sample_rate},
        {"hidden", s.hidden},
        {"condition_mode", std::string(to_string(s.mode))},
        {"embedding",
         {{"mode", s.embedding.mode == EncodingMode::Raw ? "raw" : "sinusoidal"},
          {"dim", s.embedding.dim},
          {"unit", unit_name(s.embedding.unit)}}},
    };
}

ModelShape shape_from_json(const nlohmann::json& j)
{
    try {
        ModelShape s;
        s.num_sources = j.at("num_sources").get<Eigen::Index>();
        s.frame_size = j.at("frame_size").get<int>();
        s.hop = j.at("hop").get<int>();
        s.sample_rate = j.at("sample_rate").get<int>();
        s.hidden = j.at("hidden").get<Eigen::Index>();
        s.mode = parse_condition_mode(j.at("condition_mode").get<std::string>());
        const auto& e = j.at("embedding");
        s.embedding.mode = e.at("mode").get<std::string>() == "raw" ? EncodingMode::Raw : EncodingMode::Sinusoidal;
        s.embedding.dim = e.at("dim").get<int>();
        s.embedding.unit = e.at("unit").get<std::string>() == "radians" ? ArgumentUnit::Radians : ArgumentUnit::Degrees;
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("malformed model shape: ") + ex.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint)
{
    const SeparatorModel& model = checkpoint.model;
    nlohmann::json header = {
        {"format", kFormatTag},
        {"version", kFormatVersion},
        {"shape", shape_to_json(model.shape())},
        {"parameter_count", model.parameters().size()},
        {"norm_count", model.input_norm().mean.size()},
        {"labels", checkpoint.labels},
        {"metadata", checkpoint.metadata},
    };

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ConfigError("cannot write checkpoint: " + path.string());
    }
    out << header.dump() << '\n';
    write_block(out, model.parameters());
    write_block(out, model.input_norm().mean);
    write_block(out, model.input_norm().std);
    if (!out) {
        throw ConfigError("failed writing checkpoint: " + path.string());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open checkpoint: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("empty checkpoint: " + path.string());
    }
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("checkpoint header is not JSON: " + path.string());
    }
    if (header.value("format", "") != kFormatTag || header.value("version", 0) != kFormatVersion) {
        throw ConfigError("unsupported checkpoint format: " + path.string());
    }

    Checkpoint cp;
    cp.model = SeparatorModel(shape_from_json(header.at("shape")));
    const auto count = header.at("parameter_count").get<Eigen::Index>();
    const auto norm_count = header.at("norm_count").get<Eigen::Index>();
    if (count != cp.model.shape().parameter_count() || norm_count != cp.model.shape().stacked_bins()) {
        throw ConfigError("checkpoint sizes do not match its shape");
    }
    cp.model.parameters() = read_block(in, count);
    cp.model.input_norm().mean = read_block(in, norm_count);
    cp.model.input_norm().std = read_block(in, norm_count);
    cp.labels = header.value("labels", std::vector<std::string>{});
    cp.metadata = header.value("metadata", nlohmann::json::object());
    return cp;
}

} // namespace spatialsep
