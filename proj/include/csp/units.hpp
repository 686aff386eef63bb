#pragma once

#include <string>

#include "csp/errors.hpp"

namespace csp {

// The three physical quantities a perturbation can target. Temperature covers
// the t_avg/t_min/t_max channels jointly.
enum class PhysVar { Temperature, Pressure, Precipitation };

inline const char* phys_var_name(PhysVar v) {
    switch (v) {
    case PhysVar::Temperature: return "temperature";
    case PhysVar::Pressure: return "pressure";
    case PhysVar::Precipitation: return "precipitation";
    }
    return "?";
}

inline const char* phys_unit_label(PhysVar v) {
    switch (v) {
    case PhysVar::Temperature: return "degC";
    case PhysVar::Pressure: return "hPa";
    case PhysVar::Precipitation: return "mm";
    }
    return "?";
}

inline PhysVar phys_var_from_name(const std::string& s) {
    if (s == "temperature") return PhysVar::Temperature;
    if (s == "pressure") return PhysVar::Pressure;
    if (s == "precipitation") return PhysVar::Precipitation;
    throw ConfigInvalidError("unknown variable '" + s + "'");
}

namespace units {

// Dataset normalization: R_mm = 50*R, P_hPa = 200*P + 900, T_degC = 50*(2*T - 1).
inline double normalized_to_physical(double v, PhysVar var) {
    switch (var) {
    case PhysVar::Precipitation: return 50.0 * v;
    case PhysVar::Pressure: return 200.0 * v + 900.0;
    case PhysVar::Temperature: return 50.0 * (2.0 * v - 1.0);
    }
    return v;
}

inline double physical_to_normalized(double v, PhysVar var) {
    switch (var) {
    case PhysVar::Precipitation: return v / 50.0;
    case PhysVar::Pressure: return (v - 900.0) / 200.0;
    case PhysVar::Temperature: return v / 100.0 + 0.5;
    }
    return v;
}

// Additive offsets transform by the derivative of the affine maps above.
inline double physical_delta_to_normalized(double dv, PhysVar var) {
    switch (var) {
    case PhysVar::Precipitation: return dv / 50.0;
    case PhysVar::Pressure: return dv / 200.0;
    case PhysVar::Temperature: return dv / 100.0;
    }
    return dv;
}

inline double normalized_delta_to_physical(double dv, PhysVar var) {
    switch (var) {
    case PhysVar::Precipitation: return dv * 50.0;
    case PhysVar::Pressure: return dv * 200.0;
    case PhysVar::Temperature: return dv * 100.0;
    }
    return dv;
}

}  // namespace units
}  // namespace csp
