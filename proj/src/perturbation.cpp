#include "csp/perturbation.hpp"

#include <algorithm>
#include <cmath>

namespace csp::perturb {

void PerturbationGrid::validate() const {
    for (PhysVar v : {PhysVar::Temperature, PhysVar::Pressure, PhysVar::Precipitation}) {
        const std::vector<double>& g = offsets(v);
        if (g.empty()) throw ConfigInvalidError(std::string(phys_var_name(v)) + " grid is empty");
        if (std::find(g.begin(), g.end(), 0.0) == g.end())
            throw ConfigInvalidError(std::string(phys_var_name(v)) + " grid must contain 0");
        for (std::size_t i = 1; i < g.size(); ++i)
            if (!(g[i] > g[i - 1]))
                throw ConfigInvalidError(std::string(phys_var_name(v)) + " grid must be strictly increasing");
        for (double x : g)
            if (!std::isfinite(x)) throw ConfigInvalidError("grid offsets must be finite");
    }
}

Sample perturb(const Sample& sample, const PerturbationSpec& spec, const PerturbationGrid& grid) {
    const std::vector<double>& g = grid.offsets(spec.variable);
    if (spec.offset < g.front() || spec.offset > g.back())
        throw OffsetOutOfRangeError(std::to_string(spec.offset) + " " + phys_unit_label(spec.variable) +
                                    " outside [" + std::to_string(g.front()) + ", " +
                                    std::to_string(g.back()) + "]");
    return sample.with_offset(spec.variable, spec.offset);
}

PerturbationBatch::PerturbationBatch(const segmentation::WeatherSegment& segment,
                                     const Dataset& dataset, const PerturbationGrid& grid,
                                     PhysVar variable)
    : offsets_(grid.offsets(variable)), grid_(grid), variable_(variable) {
    grid_.validate();
    members_.reserve(segment.member_ids.size());
    for (const std::string& id : segment.member_ids) members_.push_back(&dataset.by_id(id));
}

std::optional<PerturbationBatch::Item> PerturbationBatch::next() {
    if (cursor_ >= size()) return std::nullopt;
    const std::size_t offset_idx = cursor_ / members_.size();
    const std::size_t member_idx = cursor_ % members_.size();
    ++cursor_;
    return Item{offsets_[offset_idx],
                perturb(*members_[member_idx], {variable_, offsets_[offset_idx]}, grid_)};
}

}  // namespace csp::perturb
