#pragma once

#include <optional>
#include <vector>

#include "csp/sample.hpp"
#include "csp/segmentation.hpp"
#include "csp/units.hpp"

namespace csp::perturb {

// Additive physical-unit offsets applied to one variable at a time. Each grid
// must contain 0 (the identity) and be strictly increasing.
struct PerturbationGrid {
    std::vector<double> temperature = {-10, -5, 0, 5, 10, 15, 20};    // degC
    std::vector<double> pressure = {-30, -20, -10, 0, 10, 20, 30};    // hPa
    std::vector<double> precipitation = {-2, 0, 2, 4, 6, 8, 10};      // mm per t_in timesteps

    const std::vector<double>& offsets(PhysVar v) const {
        switch (v) {
        case PhysVar::Temperature: return temperature;
        case PhysVar::Pressure: return pressure;
        case PhysVar::Precipitation: return precipitation;
        }
        return temperature;
    }

    void validate() const;
};

struct PerturbationSpec {
    PhysVar variable = PhysVar::Temperature;
    double offset = 0.0;  // physical units of that variable
};

// New sample with the offset added uniformly (in normalized units) to the
// targeted channel(s); temperature targets t_avg/t_min/t_max together. All
// other channels stay bit-identical; offsets outside the grid's bounds are
// rejected. Values are not clamped to [0, 1].
Sample perturb(const Sample& sample, const PerturbationSpec& spec, const PerturbationGrid& grid);

// Lazy offset-major stream over |grid(variable)| x |segment| perturbed
// samples. Segment members are resolved against the dataset up front.
class PerturbationBatch {
public:
    struct Item {
        double offset = 0.0;
        Sample sample;
    };

    PerturbationBatch(const segmentation::WeatherSegment& segment, const Dataset& dataset,
                      const PerturbationGrid& grid, PhysVar variable);

    std::size_t size() const { return offsets_.size() * members_.size(); }
    std::optional<Item> next();
    void reset() { cursor_ = 0; }

private:
    std::vector<double> offsets_;
    std::vector<const Sample*> members_;
    PerturbationGrid grid_;
    PhysVar variable_;
    std::size_t cursor_ = 0;
};

}  // namespace csp::perturb
