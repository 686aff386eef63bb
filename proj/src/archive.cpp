#include "csp/archive.hpp"

#include <bit>
#include <fstream>

#include "json.hpp"

namespace csp {

static_assert(std::endian::native == std::endian::little,
              "f32le blob I/O assumes a little-endian host");

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<float> read_f32_blob(const fs::path& path, std::size_t expected_count) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw Error(ErrorClass::Io, "cannot open blob '" + path.string() + "'");
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes != expected_count * sizeof(float))
        throw ShapeMismatchError("blob '" + path.string() + "' has " + std::to_string(bytes / sizeof(float)) +
                                 " values, expected " + std::to_string(expected_count));
    std::vector<float> out(expected_count);
    in.seekg(0);
    in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw Error(ErrorClass::Io, "short read on '" + path.string() + "'");
    return out;
}

void write_f32_blob(const fs::path& path, const float* data, std::size_t count) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorClass::Io, "cannot write blob '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(float)));
    if (!out) throw Error(ErrorClass::Io, "short write on '" + path.string() + "'");
}

namespace {

std::size_t shape_count(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return shape.empty() ? 0 : n;
}

}  // namespace

Dataset load_archive(const fs::path& dir) {
    const fs::path manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path))
        throw ManifestMissingError("no manifest.json under '" + dir.string() + "'");

    json manifest;
    {
        std::ifstream in(manifest_path);
        try {
            in >> manifest;
        } catch (const json::exception& e) {
            throw Error(ErrorClass::Io, "manifest.json parse error: " + std::string(e.what()));
        }
    }

    Dataset ds;
    try {
        ds.name = manifest.value("name", "");
        if (manifest.value("dtype", "f32le") != "f32le")
            throw Error(ErrorClass::Io, "unsupported dtype in manifest");
        const auto& gs = manifest.at("grid_shape");
        ds.shape = GridShape{gs.at("t_in").get<int>(), gs.at("t_out").get<int>(),
                             gs.at("h").get<int>(), gs.at("w").get<int>()};
        ds.shape.validate();

        std::vector<std::pair<std::string, std::vector<int>>> channels;
        for (const auto& ch : manifest.at("channels"))
            channels.emplace_back(ch.at("name").get<std::string>(), ch.at("shape").get<std::vector<int>>());

        for (const auto& id : manifest.at("sample_ids")) {
            const std::string sid = id.get<std::string>();
            WeatherBlock block;
            std::array<bool, kChannelCount> seen{};
            for (const auto& [name, shape] : channels) {
                const fs::path blob = dir / sid / (name + ".f32");
                bool is_weather = false;
                for (Channel c : kAllChannels) is_weather |= (name == channel_name(c));
                if (is_weather) {
                    if (shape != std::vector<int>{ds.shape.t_in, ds.shape.h, ds.shape.w})
                        throw ShapeMismatchError("manifest weather channel '" + name +
                                                 "' shape disagrees with grid_shape");
                    Channel c = channel_from_name(name);
                    Tensor3 t(ds.shape.t_in, ds.shape.h, ds.shape.w);
                    t.raw() = read_f32_blob(blob, t.size());
                    block.weather[static_cast<int>(c)] = std::move(t);
                    seen[static_cast<int>(c)] = true;
                } else {
                    if (shape.size() < 2 || shape[shape.size() - 2] != ds.shape.h || shape.back() != ds.shape.w)
                        throw ShapeMismatchError("static channel '" + name + "' must end in (h, w)");
                    TensorN t{shape, read_f32_blob(blob, shape_count(shape))};
                    block.statics.emplace(name, std::move(t));
                }
            }
            for (Channel c : kAllChannels)
                if (!seen[static_cast<int>(c)])
                    throw ShapeMismatchError("sample '" + sid + "' missing weather channel " +
                                             channel_name(c));
            Sample s = Sample::from_block(sid, std::move(block));
            try {
                s.validate_finite();
            } catch (const NonFiniteError&) {
                throw NonFiniteError("sample '" + sid + "' contains NaN/Inf");
            }
            ds.samples.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorClass::Io, "manifest.json: " + std::string(e.what()));
    }
    return ds;
}

void write_archive(const Dataset& dataset, const fs::path& dir) {
    fs::create_directories(dir);

    json channels = json::array();
    for (Channel c : kAllChannels)
        channels.push_back({{"name", channel_name(c)},
                            {"shape", {dataset.shape.t_in, dataset.shape.h, dataset.shape.w}}});
    if (!dataset.samples.empty())
        for (const auto& [name, t] : dataset.samples.front().statics())
            channels.push_back({{"name", name}, {"shape", t.shape}});

    json ids = json::array();
    for (const Sample& s : dataset.samples) ids.push_back(s.id());

    json manifest = {{"name", dataset.name},
                     {"dtype", "f32le"},
                     {"grid_shape",
                      {{"t_in", dataset.shape.t_in},
                       {"t_out", dataset.shape.t_out},
                       {"h", dataset.shape.h},
                       {"w", dataset.shape.w}}},
                     {"channels", channels},
                     {"sample_ids", ids}};
    {
        std::ofstream out(dir / "manifest.json");
        out << manifest.dump(2) << '\n';
    }

    for (const Sample& s : dataset.samples) {
        const fs::path sdir = dir / s.id();
        fs::create_directories(sdir);
        for (Channel c : kAllChannels) {
            Tensor3 t = s.channel(c);  // bakes any pending offset
            write_f32_blob(sdir / (std::string(channel_name(c)) + ".f32"), t.data(), t.size());
        }
        for (const auto& [name, t] : s.statics())
            write_f32_blob(sdir / (name + ".f32"), t.data.data(), t.data.size());
    }
}

}  // namespace csp
