#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "csp/clustering.hpp"
#include "csp/sample.hpp"

namespace csp::segmentation {

// Cluster-index tuple in the fixed order (r, p, t_avg, t_min, t_max).
struct SegmentKey {
    std::array<int, kChannelCount> indices{};

    auto operator<=>(const SegmentKey&) const = default;

    // "3-1-4-4-2"
    std::string to_string() const;
    static SegmentKey parse(const std::string& s);
};

struct WeatherSegment {
    SegmentKey key;
    std::vector<std::string> member_ids;  // in dataset order

    std::size_t cardinality() const { return member_ids.size(); }
};

// One fitted model per weather channel, indexed by Channel.
using ModelSet = std::array<clustering::KMeansModel, kChannelCount>;

// Downsample each weather channel and predict its cluster index; the key
// depends only on weather channels, never on statics.
SegmentKey assign_segment(const Sample& sample, const ModelSet& models);

// Partition the dataset into weather segments, ordered lexicographically by
// key. Segments are disjoint, cover the dataset, and are never empty.
std::vector<WeatherSegment> segregate(const Dataset& dataset, const ModelSet& models);

// JSON list of {key, member_ids, cardinality}.
void save_segments(const std::vector<WeatherSegment>& segments, const std::filesystem::path& path);
std::vector<WeatherSegment> load_segments(const std::filesystem::path& path);

// key,cardinality
void write_segments_csv(const std::filesystem::path& path,
                        const std::vector<WeatherSegment>& segments);

}  // namespace csp::segmentation
