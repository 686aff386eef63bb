#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "csp/tensor.hpp"
#include "csp/units.hpp"

namespace csp {

// The five meteorological channels of a sample, in storage order.
enum class Channel { TAvg = 0, TMin = 1, TMax = 2, Pressure = 3, Precip = 4 };

inline constexpr int kChannelCount = 5;

inline constexpr std::array<Channel, kChannelCount> kAllChannels = {
    Channel::TAvg, Channel::TMin, Channel::TMax, Channel::Pressure, Channel::Precip};

inline const char* channel_name(Channel c) {
    switch (c) {
    case Channel::TAvg: return "t_avg";
    case Channel::TMin: return "t_min";
    case Channel::TMax: return "t_max";
    case Channel::Pressure: return "p";
    case Channel::Precip: return "r";
    }
    return "?";
}

inline Channel channel_from_name(const std::string& s) {
    for (Channel c : kAllChannels)
        if (s == channel_name(c)) return c;
    throw ConfigInvalidError("unknown weather channel '" + s + "'");
}

inline PhysVar phys_var_of(Channel c) {
    switch (c) {
    case Channel::TAvg:
    case Channel::TMin:
    case Channel::TMax: return PhysVar::Temperature;
    case Channel::Pressure: return PhysVar::Pressure;
    case Channel::Precip: return PhysVar::Precipitation;
    }
    return PhysVar::Temperature;
}

// The channels a perturbation of the given physical variable touches;
// a temperature offset applies to t_avg, t_min and t_max simultaneously.
inline std::vector<Channel> channels_of(PhysVar v) {
    switch (v) {
    case PhysVar::Temperature: return {Channel::TAvg, Channel::TMin, Channel::TMax};
    case PhysVar::Pressure: return {Channel::Pressure};
    case PhysVar::Precipitation: return {Channel::Precip};
    }
    return {};
}

// The channel whose series represents the variable in clustering/analysis.
inline Channel primary_channel_of(PhysVar v) {
    switch (v) {
    case PhysVar::Temperature: return Channel::TAvg;
    case PhysVar::Pressure: return Channel::Pressure;
    case PhysVar::Precipitation: return Channel::Precip;
    }
    return Channel::TAvg;
}

// Immutable payload of one sample: the five weather tensors plus any static
// channels (DEM, context imagery, masks) passed through to the forecaster.
struct WeatherBlock {
    std::array<Tensor3, kChannelCount> weather;
    std::map<std::string, TensorN> statics;
};

// One spatiotemporal data instance. Perturbations are tracked as accumulated
// physical offsets against a shared immutable base; channels materialize the
// offset on access. Composing offsets in physical units first and converting
// once keeps perturbation composition exact.
class Sample {
public:
    Sample() = default;
    Sample(std::string id, std::shared_ptr<const WeatherBlock> base)
        : id_(std::move(id)), base_(std::move(base)) {}

    static Sample from_block(std::string id, WeatherBlock block) {
        return Sample(std::move(id), std::make_shared<const WeatherBlock>(std::move(block)));
    }

    const std::string& id() const { return id_; }
    const std::shared_ptr<const WeatherBlock>& block() const { return base_; }
    const Tensor3& base_channel(Channel c) const { return base_->weather[static_cast<int>(c)]; }
    const std::map<std::string, TensorN>& statics() const { return base_->statics; }

    double offset(PhysVar v) const { return offsets_[static_cast<int>(v)]; }
    bool is_perturbed() const {
        return offsets_[0] != 0.0 || offsets_[1] != 0.0 || offsets_[2] != 0.0;
    }

    // Materialized channel: base plus the normalized equivalent of the
    // accumulated physical offset, applied uniformly. Zero offset returns a
    // bitwise copy of the base.
    Tensor3 channel(Channel c) const {
        Tensor3 out = base_channel(c);
        double phys = offset(phys_var_of(c));
        if (phys != 0.0) {
            double delta = units::physical_delta_to_normalized(phys, phys_var_of(c));
            for (float& v : out.raw()) v = static_cast<float>(static_cast<double>(v) + delta);
        }
        return out;
    }

    Sample with_offset(PhysVar v, double physical_delta) const {
        Sample out = *this;
        out.offsets_[static_cast<int>(v)] += physical_delta;
        return out;
    }

    void validate_shape(const GridShape& shape) const {
        for (Channel c : kAllChannels) {
            const Tensor3& t = base_channel(c);
            if (t.t() != shape.t_in || t.h() != shape.h || t.w() != shape.w)
                throw ShapeMismatchError("sample '" + id_ + "' channel " + channel_name(c));
        }
    }

    void validate_finite() const {
        for (Channel c : kAllChannels)
            if (!base_channel(c).all_finite())
                throw NonFiniteError("sample '" + id_ + "' channel " + channel_name(c));
        for (const auto& [name, t] : base_->statics)
            for (float v : t.data)
                if (!std::isfinite(v)) throw NonFiniteError("sample '" + id_ + "' static " + name);
    }

private:
    std::string id_;
    std::shared_ptr<const WeatherBlock> base_;
    std::array<double, 3> offsets_{0.0, 0.0, 0.0};  // indexed by PhysVar
};

struct Dataset {
    std::string name;
    GridShape shape;
    std::vector<Sample> samples;

    const Sample& by_id(const std::string& id) const {
        build_index();
        auto it = index_.find(id);
        if (it == index_.end()) throw MissingSampleError("'" + id + "' not in dataset");
        return samples[it->second];
    }

    bool contains(const std::string& id) const {
        build_index();
        return index_.count(id) > 0;
    }

private:
    void build_index() const {
        if (index_.size() == samples.size()) return;
        index_.clear();
        for (std::size_t i = 0; i < samples.size(); ++i) index_.emplace(samples[i].id(), i);
    }
    mutable std::unordered_map<std::string, std::size_t> index_;
};

// Mean over all h*w pixels at each timestep; the (t,h,w) channel condenses to
// a length-t series. Accumulation in double.
Series downsample_channel(const Tensor3& channel);

// timestep,value export of one downsampled series.
void write_series_csv(const std::filesystem::path& path, const Series& s);

}  // namespace csp
