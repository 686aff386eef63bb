#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "csp/errors.hpp"

namespace csp {

// Per-dataset dimensions. t_in covers the context+weather horizon of a
// sample's meteorological channels, t_out the forecast horizon.
struct GridShape {
    int t_in = 30;
    int t_out = 20;
    int h = 128;
    int w = 128;

    bool operator==(const GridShape&) const = default;

    void validate() const {
        if (t_in < 1 || t_out < 1 || h < 1 || w < 1)
            throw ConfigInvalidError("GridShape sizes must all be >= 1");
    }
};

// Dense (t, h, w) tensor, row-major, float32 storage. All reductions are done
// in double; float32 is the storage and interchange format only.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(int t, int h, int w, float fill = 0.0f)
        : t_(t), h_(h), w_(w), data_(static_cast<std::size_t>(t) * h * w, fill) {}

    int t() const { return t_; }
    int h() const { return h_; }
    int w() const { return w_; }
    std::size_t size() const { return data_.size(); }
    std::size_t plane_size() const { return static_cast<std::size_t>(h_) * w_; }

    float& at(int k, int i, int j) { return data_[(static_cast<std::size_t>(k) * h_ + i) * w_ + j]; }
    float at(int k, int i, int j) const { return data_[(static_cast<std::size_t>(k) * h_ + i) * w_ + j]; }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    std::vector<float>& raw() { return data_; }
    const std::vector<float>& raw() const { return data_; }

    bool all_finite() const {
        for (float v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const Tensor3&) const = default;

private:
    int t_ = 0, h_ = 0, w_ = 0;
    std::vector<float> data_;
};

// Arbitrary-rank tensor for static channels (DEM, context imagery, masks)
// that are carried opaquely through to the forecaster.
struct TensorN {
    std::vector<int> shape;
    std::vector<float> data;

    std::size_t size() const {
        std::size_t n = 1;
        for (int d : shape) n *= static_cast<std::size_t>(d);
        return shape.empty() ? 0 : n;
    }

    bool operator==(const TensorN&) const = default;
};

// A 1-D real-valued time series; the downsampled form of a weather channel.
using Series = std::vector<double>;

}  // namespace csp
