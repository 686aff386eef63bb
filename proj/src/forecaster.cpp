#include "csp/forecaster.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <thread>

#include "json.hpp"

#include "csp/archive.hpp"
#include "csp/rng.hpp"

namespace csp::forecast {

namespace fs = std::filesystem;
using nlohmann::json;

Tensor3 ndvi(const Forecast& fc) {
    Tensor3 out(fc.nir.t(), fc.nir.h(), fc.nir.w());
    const float* nir = fc.nir.data();
    const float* r = fc.r.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double denom = static_cast<double>(nir[i]) + static_cast<double>(r[i]);
        out.raw()[i] = std::abs(denom) < 1e-8
                           ? 0.0f
                           : static_cast<float>((static_cast<double>(nir[i]) - r[i]) / denom);
    }
    return out;
}

Series ndvi_spatial_mean_curve(const Forecast& fc) { return downsample_channel(ndvi(fc)); }

std::pair<double, double> standard_range(PhysVar v) {
    switch (v) {
    case PhysVar::Temperature: return {0.0, 35.0};     // degC
    case PhysVar::Pressure: return {990.0, 1040.0};    // hPa
    case PhysVar::Precipitation: return {-2.0, 12.0};  // mm
    }
    return {0.0, 1.0};
}

double SyntheticModelParams::planted_ndvi(double t_deg, double p_hpa, double r_mm) const {
    double v = n0;
    v += temperature[0] * t_deg * t_deg + temperature[1] * t_deg;
    v += pressure[0] * p_hpa * p_hpa + pressure[1] * p_hpa;
    v += precipitation[0] * r_mm * r_mm + precipitation[1] * r_mm;
    return v;
}

namespace {

// exact min/max of a*x^2 + b*x over [lo, hi]
std::pair<double, double> quad_extrema(double a, double b, double lo, double hi) {
    double mn = std::min(a * lo * lo + b * lo, a * hi * hi + b * hi);
    double mx = std::max(a * lo * lo + b * lo, a * hi * hi + b * hi);
    if (a != 0.0) {
        const double vx = -b / (2.0 * a);
        if (vx > lo && vx < hi) {
            const double vy = a * vx * vx + b * vx;
            mn = std::min(mn, vy);
            mx = std::max(mx, vy);
        }
    }
    return {mn, mx};
}

}  // namespace

void SyntheticModelParams::validate(const perturb::PerturbationGrid& grid) const {
    double lo = n0, hi = n0;
    for (PhysVar v : {PhysVar::Temperature, PhysVar::Pressure, PhysVar::Precipitation}) {
        const auto [rlo, rhi] = standard_range(v);
        const std::vector<double>& g = grid.offsets(v);
        const auto [mn, mx] = quad_extrema(coeff(v)[0], coeff(v)[1], rlo + g.front(), rhi + g.back());
        lo += mn;
        hi += mx;
    }
    const double margin = 4.0 * noise_sigma;
    if (lo - margin <= -1.0 || hi + margin >= 1.0)
        throw SpecInvalidError("planted NDVI law leaves (-1, 1): range [" + std::to_string(lo - margin) +
                               ", " + std::to_string(hi + margin) + "] over the perturbation grids");
    if (lag < 0) throw SpecInvalidError("lag must be >= 0");
    if (noise_sigma < 0.0) throw SpecInvalidError("noise_sigma must be >= 0");
}

SyntheticModel::SyntheticModel(SyntheticModelParams params, GridShape shape)
    : params_(params), shape_(shape) {
    shape_.validate();
}

Forecast SyntheticModel::run(const Sample& sample) const {
    sample.validate_shape(shape_);

    auto mean_physical = [&](Channel c) {
        const Series s = downsample_channel(sample.channel(c));
        double acc = 0.0;
        for (double v : s) acc += v;
        return units::normalized_to_physical(acc / static_cast<double>(s.size()), phys_var_of(c));
    };
    const double t_deg = mean_physical(Channel::TAvg);
    const double p_hpa = mean_physical(Channel::Pressure);
    const double r_mm = mean_physical(Channel::Precip);
    const double full = params_.planted_ndvi(t_deg, p_hpa, r_mm);

    // deterministic per-sample noise stream
    Rng noise_rng(0);
    if (params_.noise_sigma > 0.0) {
        std::uint64_t h = fnv1a_str(sample.id());
        for (Channel c : kAllChannels) {
            const auto& raw = sample.base_channel(c).raw();
            h = fnv1a(raw.data(), raw.size() * sizeof(float), h);
        }
        for (double off : {sample.offset(PhysVar::Temperature), sample.offset(PhysVar::Pressure),
                           sample.offset(PhysVar::Precipitation)}) {
            h = fnv1a(&off, sizeof(off), h);
        }
        h = fnv1a(&params_.seed, sizeof(params_.seed), h);
        noise_rng = Rng(h);
    }

    Forecast fc{Tensor3(shape_.t_out, shape_.h, shape_.w), Tensor3(shape_.t_out, shape_.h, shape_.w, 0.25f),
                Tensor3(shape_.t_out, shape_.h, shape_.w, 0.25f), Tensor3(shape_.t_out, shape_.h, shape_.w)};
    for (int k = 0; k < shape_.t_out; ++k) {
        const double ramp =
            params_.lag == 0 ? 1.0
                             : std::min(1.0, static_cast<double>(k + 1) / (params_.lag + 1));
        double v = params_.n0 + (full - params_.n0) * ramp;
        if (params_.noise_sigma > 0.0) v += noise_rng.normal(0.0, params_.noise_sigma);
        const float nir = static_cast<float>((1.0 + v) / 2.0);
        const float r = static_cast<float>((1.0 - v) / 2.0);
        for (std::size_t i = 0; i < fc.nir.plane_size(); ++i) {
            fc.nir.raw()[k * fc.nir.plane_size() + i] = nir;
            fc.r.raw()[k * fc.r.plane_size() + i] = r;
        }
    }
    return fc;
}

ExternalModel::ExternalModel(fs::path exchange_dir, GridShape shape, double timeout_s,
                             double poll_interval_s)
    : exchange_dir_(std::move(exchange_dir)), shape_(shape), timeout_s_(timeout_s),
      poll_interval_s_(poll_interval_s) {
    shape_.validate();
    fs::create_directories(exchange_dir_);
    session_ = std::to_string(std::random_device{}());
}

Forecast ExternalModel::run(const Sample& sample) const {
    sample.validate_shape(shape_);

    const std::string rid =
        sample.id() + "_" + session_ + "_" + std::to_string(counter_.fetch_add(1));
    const fs::path req_dir = exchange_dir_ / rid;
    const fs::path input_dir = req_dir / "input";
    fs::create_directories(input_dir);

    json channels = json::array();
    for (Channel c : kAllChannels) {
        Tensor3 t = sample.channel(c);
        write_f32_blob(input_dir / (std::string(channel_name(c)) + ".f32"), t.data(), t.size());
        channels.push_back({{"name", channel_name(c)}, {"shape", {t.t(), t.h(), t.w()}}});
    }
    for (const auto& [name, t] : sample.statics()) {
        write_f32_blob(input_dir / (name + ".f32"), t.data.data(), t.data.size());
        channels.push_back({{"name", name}, {"shape", t.shape}});
    }
    // request.json last: its presence tells the model the input is complete
    {
        json req = {{"sample_id", sample.id()},
                    {"grid_shape",
                     {{"t_in", shape_.t_in}, {"t_out", shape_.t_out}, {"h", shape_.h}, {"w", shape_.w}}},
                    {"channels", channels}};
        std::ofstream out(req_dir / "request.json");
        out << req.dump(2) << '\n';
    }

    const fs::path out_dir = req_dir / "output";
    const fs::path marker = out_dir / "done.marker";
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(timeout_s_));
    while (!fs::exists(marker)) {
        if (std::chrono::steady_clock::now() >= deadline)
            throw BackendFailureError("no response for request '" + rid + "' within " +
                                      std::to_string(timeout_s_) + " s");
        std::this_thread::sleep_for(std::chrono::duration<double>(poll_interval_s_));
    }

    const std::size_t count =
        static_cast<std::size_t>(shape_.t_out) * shape_.h * shape_.w;
    auto read_channel = [&](const char* name) {
        Tensor3 t(shape_.t_out, shape_.h, shape_.w);
        t.raw() = read_f32_blob(out_dir / (std::string(name) + ".f32"), count);
        return t;
    };
    Forecast fc;
    try {
        fc.r = read_channel("r");
        fc.g = read_channel("g");
        fc.b = read_channel("b");
        fc.nir = read_channel("nir");
    } catch (const Error& e) {
        throw BackendFailureError("request '" + rid + "': " + e.what());
    }
    fs::remove_all(req_dir);
    return fc;
}

}  // namespace csp::forecast
