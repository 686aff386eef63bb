#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "csp/perturbation.hpp"
#include "csp/sample.hpp"

namespace csp::forecast {

// Black-box forecaster output: future r/g/b/nir frames, each (t_out, h, w).
struct Forecast {
    Tensor3 r, g, b, nir;
};

// Elementwise (nir - r) / (nir + r); cells with |nir + r| < 1e-8 map to 0 so
// downstream aggregation stays total.
Tensor3 ndvi(const Forecast& fc);

// Mean NDVI over all pixels, per forecast timestep.
Series ndvi_spatial_mean_curve(const Forecast& fc);

// Pluggable forecasting model contract. Implementations must be deterministic
// for a fixed model state.
class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual GridShape shape() const = 0;
    virtual Forecast run(const Sample& sample) const = 0;
    // whether run() may be called concurrently from several threads
    virtual bool thread_safe() const = 0;
};

// Planted quadratic NDVI law for oracle tests: the model reads the sample's
// mean physical T/P/R, evaluates
//   NDVI = n0 + a_T*T^2 + b_T*T + a_P*P^2 + b_P*P + a_R*R^2 + b_R*R,
// optionally ramps the response in over `lag` timesteps and adds Gaussian
// noise, then emits nir = (1+NDVI)/2, r = (1-NDVI)/2, g = b = 0.25.
struct SyntheticModelParams {
    std::array<double, 2> temperature{0.0, 0.0};    // {a, b}
    std::array<double, 2> pressure{0.0, 0.0};
    std::array<double, 2> precipitation{0.0, 0.0};
    double n0 = 0.5;
    int lag = 0;              // timesteps until the response is fully expressed
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    const std::array<double, 2>& coeff(PhysVar v) const {
        switch (v) {
        case PhysVar::Temperature: return temperature;
        case PhysVar::Pressure: return pressure;
        case PhysVar::Precipitation: return precipitation;
        }
        return temperature;
    }

    // Planted NDVI value for given mean physical values (before lag/noise).
    double planted_ndvi(double t_deg, double p_hpa, double r_mm) const;

    // Checks the law stays inside (-1, 1) over the standard variable ranges
    // widened by the grids' extreme offsets. Throws SpecInvalidError.
    void validate(const perturb::PerturbationGrid& grid) const;
};

// Standard physical ranges per variable (also the correlation export ranges).
std::pair<double, double> standard_range(PhysVar v);

class SyntheticModel final : public Forecaster {
public:
    SyntheticModel(SyntheticModelParams params, GridShape shape);

    GridShape shape() const override { return shape_; }
    Forecast run(const Sample& sample) const override;
    bool thread_safe() const override { return true; }

    const SyntheticModelParams& params() const { return params_; }

private:
    SyntheticModelParams params_;
    GridShape shape_;
};

// File-exchange adapter for out-of-process models. For each request the
// pipeline writes <exchange>/<request_id>/input/<channel>.f32 blobs and then
// request.json (written last, as the completion signal); the external process
// answers with <request_id>/output/{r,g,b,nir}.f32 plus done.marker. A missing
// answer within the timeout raises BackendFailure.
class ExternalModel final : public Forecaster {
public:
    ExternalModel(std::filesystem::path exchange_dir, GridShape shape, double timeout_s = 300.0,
                  double poll_interval_s = 0.02);

    GridShape shape() const override { return shape_; }
    Forecast run(const Sample& sample) const override;
    bool thread_safe() const override { return false; }  // one in-flight request per handle

private:
    std::filesystem::path exchange_dir_;
    GridShape shape_;
    double timeout_s_;
    double poll_interval_s_;
    std::string session_;
    mutable std::atomic<std::uint64_t> counter_{0};
};

}  // namespace csp::forecast
