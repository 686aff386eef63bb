#include "csp/segmentation.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "csp/csv.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace csp::segmentation {

using nlohmann::json;

std::string SegmentKey::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i) out += '-';
        out += std::to_string(indices[i]);
    }
    return out;
}

SegmentKey SegmentKey::parse(const std::string& s) {
    SegmentKey key;
    std::stringstream ss(s);
    std::string part;
    std::size_t i = 0;
    while (std::getline(ss, part, '-')) {
        if (i >= key.indices.size()) throw ConfigInvalidError("segment key '" + s + "' has too many parts");
        key.indices[i++] = std::stoi(part);
    }
    if (i != key.indices.size()) throw ConfigInvalidError("segment key '" + s + "' has too few parts");
    return key;
}

namespace {

// the key packs indices in the order (r, p, t_avg, t_min, t_max)
constexpr std::array<Channel, kChannelCount> kKeyOrder = {
    Channel::Precip, Channel::Pressure, Channel::TAvg, Channel::TMin, Channel::TMax};

}  // namespace

SegmentKey assign_segment(const Sample& sample, const ModelSet& models) {
    SegmentKey key;
    for (std::size_t slot = 0; slot < kKeyOrder.size(); ++slot) {
        const Channel c = kKeyOrder[slot];
        const Series q = downsample_channel(sample.channel(c));
        key.indices[slot] = clustering::predict_cluster(models[static_cast<int>(c)], q);
    }
    return key;
}

std::vector<WeatherSegment> segregate(const Dataset& dataset, const ModelSet& models) {
    if (dataset.samples.empty()) return {};
    const std::int64_t n = static_cast<std::int64_t>(dataset.samples.size());
    std::vector<SegmentKey> keys(dataset.samples.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) keys[i] = assign_segment(dataset.samples[i], models);

    std::map<SegmentKey, WeatherSegment> by_key;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        WeatherSegment& seg = by_key[keys[i]];
        seg.key = keys[i];
        seg.member_ids.push_back(dataset.samples[i].id());
    }
    std::vector<WeatherSegment> out;
    out.reserve(by_key.size());
    for (auto& [key, seg] : by_key) out.push_back(std::move(seg));
    return out;
}

void save_segments(const std::vector<WeatherSegment>& segments, const std::filesystem::path& path) {
    json doc = json::array();
    for (const WeatherSegment& seg : segments)
        doc.push_back({{"key", seg.key.to_string()},
                       {"member_ids", seg.member_ids},
                       {"cardinality", seg.cardinality()}});
    std::ofstream out(path);
    if (!out) throw Error(ErrorClass::Io, "cannot write segments '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

std::vector<WeatherSegment> load_segments(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("cannot open segments '" + path.string() + "'");
    json doc;
    try {
        in >> doc;
        std::vector<WeatherSegment> out;
        for (const auto& item : doc) {
            WeatherSegment seg;
            seg.key = SegmentKey::parse(item.at("key").get<std::string>());
            seg.member_ids = item.at("member_ids").get<std::vector<std::string>>();
            out.push_back(std::move(seg));
        }
        return out;
    } catch (const json::exception& e) {
        throw Error(ErrorClass::Io, "segments '" + path.string() + "': " + e.what());
    }
}

void write_segments_csv(const std::filesystem::path& path,
                        const std::vector<WeatherSegment>& segments) {
    CsvWriter w(path);
    w.header("key,cardinality");
    for (const WeatherSegment& seg : segments) {
        w.field(seg.key.to_string()).field(seg.cardinality());
        w.end_row();
    }
}

}  // namespace csp::segmentation
