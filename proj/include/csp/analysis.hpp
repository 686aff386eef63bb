#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "csp/forecaster.hpp"
#include "csp/perturbation.hpp"
#include "csp/segmentation.hpp"

namespace csp::analysis {

// Mean NDVI signal of a segment under one marginal perturbation: per member
// perturb -> forecast -> NDVI -> spatial mean per timestep, then average the
// member curves. Length t_out.
Series segment_ndvi_curve(const segmentation::WeatherSegment& segment, const Dataset& dataset,
                          const forecast::Forecaster& model, PhysVar variable, double offset,
                          const perturb::PerturbationGrid& grid);

// One curve per grid offset (offset-major order). Member forecasts run in
// parallel when the forecaster allows it; reduction order is fixed.
std::vector<Series> segment_curves(const segmentation::WeatherSegment& segment,
                                   const Dataset& dataset, const forecast::Forecaster& model,
                                   PhysVar variable, const perturb::PerturbationGrid& grid);

// Mean over unordered offset pairs of
//   meanabs(curve_a - curve_b) / |a - b|,
// in NDVI per physical unit. Curves may be precomputed via segment_curves.
double local_sensitivity(const std::vector<Series>& curves, const std::vector<double>& offsets);
double local_sensitivity(const segmentation::WeatherSegment& segment, const Dataset& dataset,
                         const forecast::Forecaster& model, PhysVar variable,
                         const perturb::PerturbationGrid& grid);

// Cardinality-weighted mean and standard deviation of per-segment sensitivities.
std::pair<double, double> global_sensitivity(const std::vector<double>& sensitivities,
                                             const std::vector<std::size_t>& cardinalities);

struct CorrelationPoint {
    double x = 0.0;  // segment mean physical value plus the offset
    double y = 0.0;  // median of the segment NDVI curve at that offset
};

// Segment mean physical value of the variable (member-sample mean of the
// downsampled primary channel, converted to physical units).
double segment_mean_physical(const segmentation::WeatherSegment& segment, const Dataset& dataset,
                             PhysVar variable);

std::vector<CorrelationPoint> correlation_points(const segmentation::WeatherSegment& segment,
                                                 const Dataset& dataset,
                                                 const forecast::Forecaster& model,
                                                 PhysVar variable,
                                                 const perturb::PerturbationGrid& grid);

enum class CurveFamily { Poly2, Exponential, Logarithmic, Sinusoidal, Gaussian };

inline constexpr std::array<CurveFamily, 5> kAllFamilies = {
    CurveFamily::Poly2, CurveFamily::Exponential, CurveFamily::Logarithmic,
    CurveFamily::Sinusoidal, CurveFamily::Gaussian};

const char* family_name(CurveFamily f);

// Coefficient order per family:
//   poly2        {a, b, c}:      a x^2 + b x + c
//   exponential  {a, b, c}:      a exp(b x) + c
//   logarithmic  {a, d, c}:      a ln(x - d) + c, valid for x > d
//   sinusoidal   {a, b, phi, c}: a sin(b x + phi) + c
//   gaussian     {a, mu, sigma, c}: a exp(-(x-mu)^2 / (2 sigma^2)) + c
struct FitResult {
    CurveFamily family = CurveFamily::Poly2;
    std::vector<double> coeffs;
    double rss = 0.0;
    int n_points = 0;
    bool converged = false;
};

double evaluate_fit(const FitResult& fit, double x);

struct FitReport {
    FitResult best;
    std::vector<FitResult> all;  // one per family, in kAllFamilies order
};

// Poly2 by orthogonal-factorization least squares; the nonlinear families by
// damped Gauss-Newton (RSS non-increasing across accepted steps, at most 200
// iterations, parameter tolerance 1e-10). Families that fail to converge or
// whose domain excludes a point are excluded from best-fit selection.
FitReport fit_curves(const std::vector<CorrelationPoint>& points);

// 100 evenly spaced samples of the fitted curve over the variable's standard
// range; points outside the family's domain are skipped.
std::vector<CorrelationPoint> standardize_curve(const FitResult& fit, PhysVar variable);

// Report rows produced by the pipeline's analysis stages.
struct SensitivityRow {
    std::string segment_key;
    PhysVar variable;
    double sensitivity = 0.0;
    std::size_t cardinality = 0;
};

struct GlobalSensitivityRow {
    PhysVar variable;
    double sensitivity = 0.0;
    double sd = 0.0;
};

void write_sensitivity_csv(const std::filesystem::path& path,
                           const std::vector<SensitivityRow>& rows);
void write_global_sensitivity_csv(const std::filesystem::path& path,
                                  const std::vector<GlobalSensitivityRow>& rows);

struct FitRow {
    std::string segment_key;
    PhysVar variable;
    FitResult fit;
};

void write_fits_csv(const std::filesystem::path& path, const std::vector<FitRow>& rows);

struct CurveSampleRow {
    std::string segment_key;
    PhysVar variable;
    std::vector<CorrelationPoint> samples;
};

void write_curves_csv(const std::filesystem::path& path, const std::vector<CurveSampleRow>& rows);

struct NdviCurveRow {
    std::string segment_key;
    PhysVar variable;
    double offset = 0.0;
    Series curve;
};

void write_ndvi_curves_csv(const std::filesystem::path& path,
                           const std::vector<NdviCurveRow>& rows);

}  // namespace csp::analysis
