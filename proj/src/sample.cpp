#include "csp/sample.hpp"

#include <filesystem>

#include "csp/csv.hpp"

namespace csp {

Series downsample_channel(const Tensor3& channel) {
    if (channel.size() == 0) throw EmptySeriesError("downsample of empty channel");
    if (!channel.all_finite()) throw NonFiniteError("downsample input has NaN/Inf");
    Series out(static_cast<std::size_t>(channel.t()));
    const std::size_t plane = channel.plane_size();
    const float* p = channel.data();
    for (int k = 0; k < channel.t(); ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < plane; ++i) acc += static_cast<double>(p[k * plane + i]);
        out[static_cast<std::size_t>(k)] = acc / static_cast<double>(plane);
    }
    return out;
}

void write_series_csv(const std::filesystem::path& path, const Series& s) {
    CsvWriter w(path);
    w.header("timestep,value");
    for (std::size_t k = 0; k < s.size(); ++k) {
        w.field(k).field(s[k]);
        w.end_row();
    }
}

}  // namespace csp
