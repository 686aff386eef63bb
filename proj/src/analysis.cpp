#include "csp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "csp/csv.hpp"

namespace csp::analysis {

namespace {

std::vector<const Sample*> resolve_members(const segmentation::WeatherSegment& segment,
                                           const Dataset& dataset) {
    if (segment.member_ids.empty()) throw EmptySegmentError("segment " + segment.key.to_string());
    std::vector<const Sample*> members;
    members.reserve(segment.member_ids.size());
    for (const std::string& id : segment.member_ids) members.push_back(&dataset.by_id(id));
    return members;
}

Series average_member_curves(const std::vector<Series>& curves) {
    Series mean(curves.front().size(), 0.0);
    for (const Series& c : curves)
        for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += c[t];
    for (double& v : mean) v /= static_cast<double>(curves.size());
    return mean;
}

double median(Series values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

Series segment_ndvi_curve(const segmentation::WeatherSegment& segment, const Dataset& dataset,
                          const forecast::Forecaster& model, PhysVar variable, double offset,
                          const perturb::PerturbationGrid& grid) {
    const std::vector<const Sample*> members = resolve_members(segment, dataset);
    std::vector<Series> curves(members.size());
    const std::int64_t n = static_cast<std::int64_t>(members.size());
#pragma omp parallel for schedule(static) if (model.thread_safe())
    for (std::int64_t i = 0; i < n; ++i) {
        const Sample perturbed = perturb::perturb(*members[i], {variable, offset}, grid);
        curves[i] = forecast::ndvi_spatial_mean_curve(model.run(perturbed));
    }
    return average_member_curves(curves);
}

std::vector<Series> segment_curves(const segmentation::WeatherSegment& segment,
                                   const Dataset& dataset, const forecast::Forecaster& model,
                                   PhysVar variable, const perturb::PerturbationGrid& grid) {
    const std::vector<const Sample*> members = resolve_members(segment, dataset);
    const std::vector<double>& offsets = grid.offsets(variable);
    const std::size_t m = members.size();
    std::vector<Series> member_curves(offsets.size() * m);
    const std::int64_t total = static_cast<std::int64_t>(member_curves.size());
#pragma omp parallel for schedule(static) if (model.thread_safe())
    for (std::int64_t idx = 0; idx < total; ++idx) {
        const std::size_t oi = static_cast<std::size_t>(idx) / m;
        const std::size_t mi = static_cast<std::size_t>(idx) % m;
        const Sample perturbed = perturb::perturb(*members[mi], {variable, offsets[oi]}, grid);
        member_curves[idx] = forecast::ndvi_spatial_mean_curve(model.run(perturbed));
    }
    std::vector<Series> out(offsets.size());
    for (std::size_t oi = 0; oi < offsets.size(); ++oi) {
        std::vector<Series> slice(member_curves.begin() + static_cast<std::ptrdiff_t>(oi * m),
                                  member_curves.begin() + static_cast<std::ptrdiff_t>((oi + 1) * m));
        out[oi] = average_member_curves(slice);
    }
    return out;
}

double local_sensitivity(const std::vector<Series>& curves, const std::vector<double>& offsets) {
    if (offsets.size() < 2) throw ConfigInvalidError("sensitivity needs at least 2 offsets");
    if (curves.size() != offsets.size())
        throw LengthMismatchError("curve count != offset count");
    double acc = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        for (std::size_t j = i + 1; j < offsets.size(); ++j) {
            double diff = 0.0;
            for (std::size_t t = 0; t < curves[i].size(); ++t)
                diff += std::abs(curves[i][t] - curves[j][t]);
            diff /= static_cast<double>(curves[i].size());
            acc += diff / std::abs(offsets[i] - offsets[j]);
            ++pairs;
        }
    }
    return acc / static_cast<double>(pairs);
}

double local_sensitivity(const segmentation::WeatherSegment& segment, const Dataset& dataset,
                         const forecast::Forecaster& model, PhysVar variable,
                         const perturb::PerturbationGrid& grid) {
    return local_sensitivity(segment_curves(segment, dataset, model, variable, grid),
                             grid.offsets(variable));
}

std::pair<double, double> global_sensitivity(const std::vector<double>& sensitivities,
                                             const std::vector<std::size_t>& cardinalities) {
    if (sensitivities.empty()) throw EmptySegmentError("no segments for global sensitivity");
    if (sensitivities.size() != cardinalities.size())
        throw LengthMismatchError("sensitivities vs cardinalities");
    double wsum = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < sensitivities.size(); ++i) {
        wsum += static_cast<double>(cardinalities[i]);
        acc += sensitivities[i] * static_cast<double>(cardinalities[i]);
    }
    const double mean = acc / wsum;
    double var = 0.0;
    for (std::size_t i = 0; i < sensitivities.size(); ++i) {
        const double d = sensitivities[i] - mean;
        var += static_cast<double>(cardinalities[i]) * d * d;
    }
    return {mean, std::sqrt(var / wsum)};
}

double segment_mean_physical(const segmentation::WeatherSegment& segment, const Dataset& dataset,
                             PhysVar variable) {
    const std::vector<const Sample*> members = resolve_members(segment, dataset);
    const Channel c = primary_channel_of(variable);
    double acc = 0.0;
    for (const Sample* s : members) {
        const Series series = downsample_channel(s->channel(c));
        double t_mean = 0.0;
        for (double v : series) t_mean += v;
        acc += t_mean / static_cast<double>(series.size());
    }
    return units::normalized_to_physical(acc / static_cast<double>(members.size()), variable);
}

std::vector<CorrelationPoint> correlation_points(const segmentation::WeatherSegment& segment,
                                                 const Dataset& dataset,
                                                 const forecast::Forecaster& model,
                                                 PhysVar variable,
                                                 const perturb::PerturbationGrid& grid) {
    const std::vector<double>& offsets = grid.offsets(variable);
    const double base_x = segment_mean_physical(segment, dataset, variable);
    const std::vector<Series> curves = segment_curves(segment, dataset, model, variable, grid);
    std::vector<CorrelationPoint> points(offsets.size());
    for (std::size_t i = 0; i < offsets.size(); ++i)
        points[i] = {base_x + offsets[i], median(curves[i])};
    return points;
}

// ---------------------------------------------------------------------------
// curve fitting

const char* family_name(CurveFamily f) {
    switch (f) {
    case CurveFamily::Poly2: return "poly2";
    case CurveFamily::Exponential: return "exponential";
    case CurveFamily::Logarithmic: return "logarithmic";
    case CurveFamily::Sinusoidal: return "sinusoidal";
    case CurveFamily::Gaussian: return "gaussian";
    }
    return "?";
}

double evaluate_fit(const FitResult& fit, double x) {
    const std::vector<double>& c = fit.coeffs;
    switch (fit.family) {
    case CurveFamily::Poly2: return c[0] * x * x + c[1] * x + c[2];
    case CurveFamily::Exponential: return c[0] * std::exp(c[1] * x) + c[2];
    case CurveFamily::Logarithmic:
        return x > c[1] ? c[0] * std::log(x - c[1]) + c[2]
                        : std::numeric_limits<double>::quiet_NaN();
    case CurveFamily::Sinusoidal: return c[0] * std::sin(c[1] * x + c[2]) + c[3];
    case CurveFamily::Gaussian: {
        const double z = (x - c[1]) / c[2];
        return c[0] * std::exp(-0.5 * z * z) + c[3];
    }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double rss_of(const VectorXd& residuals) { return residuals.squaredNorm(); }

struct LmModel {
    // residuals r_i = f(x_i; theta) - y_i and Jacobian J_ij = d f(x_i)/d theta_j;
    // returns false when theta leaves the family's domain
    std::function<bool(const VectorXd&, VectorXd&, MatrixXd&)> eval;
};

struct LmOutcome {
    VectorXd theta;
    double rss = std::numeric_limits<double>::infinity();
    bool converged = false;
};

// Damped Gauss-Newton with multiplicative damping on diag(J^T J). Accepted
// steps never increase the RSS.
LmOutcome lm_fit(const LmModel& model, VectorXd theta, int n_residuals, int max_iter = 200,
                 double param_tol = 1e-10) {
    LmOutcome out;
    VectorXd r(n_residuals);
    MatrixXd J(n_residuals, theta.size());
    if (!model.eval(theta, r, J)) return out;  // invalid start
    double rss = rss_of(r);
    double mu = 1e-3;

    for (int iter = 0; iter < max_iter; ++iter) {
        const MatrixXd jtj = J.transpose() * J;
        const VectorXd jtr = J.transpose() * r;
        bool stepped = false;
        for (int attempt = 0; attempt < 60 && !stepped; ++attempt) {
            MatrixXd damped = jtj;
            for (int i = 0; i < damped.rows(); ++i)
                damped(i, i) += mu * std::max(jtj(i, i), 1e-12);
            const VectorXd delta = damped.ldlt().solve(-jtr);
            if (!delta.allFinite()) {
                mu *= 4.0;
                continue;
            }
            const VectorXd candidate = theta + delta;
            VectorXd r_new(n_residuals);
            MatrixXd J_new(n_residuals, theta.size());
            if (!model.eval(candidate, r_new, J_new)) {
                mu *= 4.0;
                continue;
            }
            const double rss_new = rss_of(r_new);
            if (rss_new <= rss) {
                const double scale = 1.0 + theta.cwiseAbs().maxCoeff();
                const bool small_step = delta.cwiseAbs().maxCoeff() <= param_tol * scale;
                theta = candidate;
                r = r_new;
                J = J_new;
                rss = rss_new;
                mu = std::max(mu / 3.0, 1e-12);
                stepped = true;
                if (small_step || rss < 1e-28) {
                    out.theta = theta;
                    out.rss = rss;
                    out.converged = true;
                    return out;
                }
            } else {
                mu *= 4.0;
            }
        }
        if (!stepped) break;  // damping exhausted; treat as stalled
    }
    out.theta = theta;
    out.rss = rss;
    // A stall at an interior point without meeting the step tolerance counts
    // as non-convergence.
    return out;
}

FitResult fit_poly2(const std::vector<CorrelationPoint>& pts) {
    const int n = static_cast<int>(pts.size());
    MatrixXd X(n, 3);
    VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        const double x = pts[static_cast<std::size_t>(i)].x;
        X(i, 0) = x * x;
        X(i, 1) = x;
        X(i, 2) = 1.0;
        y(i) = pts[static_cast<std::size_t>(i)].y;
    }
    const VectorXd beta = X.colPivHouseholderQr().solve(y);
    FitResult fit;
    fit.family = CurveFamily::Poly2;
    fit.coeffs = {beta(0), beta(1), beta(2)};
    fit.rss = (X * beta - y).squaredNorm();
    fit.n_points = n;
    fit.converged = beta.allFinite();
    return fit;
}

struct Moments {
    double x_min, x_max, x_span, y_min, y_max, y_span, y_mean;
};

Moments moments_of(const std::vector<CorrelationPoint>& pts) {
    Moments m{};
    m.x_min = m.x_max = pts.front().x;
    m.y_min = m.y_max = pts.front().y;
    double acc = 0.0;
    for (const CorrelationPoint& p : pts) {
        m.x_min = std::min(m.x_min, p.x);
        m.x_max = std::max(m.x_max, p.x);
        m.y_min = std::min(m.y_min, p.y);
        m.y_max = std::max(m.y_max, p.y);
        acc += p.y;
    }
    m.x_span = m.x_max - m.x_min;
    m.y_span = m.y_max - m.y_min;
    m.y_mean = acc / static_cast<double>(pts.size());
    return m;
}

FitResult finalize(CurveFamily family, const LmOutcome& lm, int n_points) {
    FitResult fit;
    fit.family = family;
    fit.n_points = n_points;
    fit.converged = lm.converged && lm.theta.allFinite();
    fit.rss = lm.rss;
    fit.coeffs.assign(lm.theta.data(), lm.theta.data() + lm.theta.size());
    return fit;
}

FitResult fit_exponential(const std::vector<CorrelationPoint>& pts) {
    const int n = static_cast<int>(pts.size());
    const Moments m = moments_of(pts);

    // init: shift below the data, then linearize ln(y - c) = ln a + b x
    const double c0 = m.y_min - std::max(0.1 * m.y_span, 1e-3);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const CorrelationPoint& p : pts) {
        const double ly = std::log(std::max(p.y - c0, 1e-12));
        sx += p.x;
        sy += ly;
        sxx += p.x * p.x;
        sxy += p.x * ly;
    }
    const double denom = n * sxx - sx * sx;
    const double b0 = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    const double a0 = std::exp((sy - b0 * sx) / n);

    LmModel model;
    model.eval = [&pts](const VectorXd& t, VectorXd& r, MatrixXd& J) {
        const double a = t(0), b = t(1), c = t(2);
        for (int i = 0; i < r.size(); ++i) {
            const double x = pts[static_cast<std::size_t>(i)].x;
            const double e = std::exp(b * x);
            if (!std::isfinite(e)) return false;
            r(i) = a * e + c - pts[static_cast<std::size_t>(i)].y;
            J(i, 0) = e;
            J(i, 1) = a * x * e;
            J(i, 2) = 1.0;
        }
        return r.allFinite() && J.allFinite();
    };
    VectorXd theta(3);
    theta << a0, b0, c0;
    return finalize(CurveFamily::Exponential, lm_fit(model, theta, n), n);
}

FitResult fit_logarithmic(const std::vector<CorrelationPoint>& pts) {
    const int n = static_cast<int>(pts.size());
    const Moments m = moments_of(pts);

    // d must stay strictly below min(x)
    const double d0 = m.x_min - std::max(0.5 * m.x_span, 1e-3);
    double sl = 0, sy = 0, sll = 0, sly = 0;
    for (const CorrelationPoint& p : pts) {
        const double l = std::log(p.x - d0);
        sl += l;
        sy += p.y;
        sll += l * l;
        sly += l * p.y;
    }
    const double denom = n * sll - sl * sl;
    const double a0 = denom != 0.0 ? (n * sly - sl * sy) / denom : 0.0;
    const double c0 = (sy - a0 * sl) / n;

    const double x_min = m.x_min;
    LmModel model;
    model.eval = [&pts, x_min](const VectorXd& t, VectorXd& r, MatrixXd& J) {
        const double a = t(0), d = t(1), c = t(2);
        if (d >= x_min - 1e-12 * (1.0 + std::abs(x_min))) return false;  // domain guard
        for (int i = 0; i < r.size(); ++i) {
            const double x = pts[static_cast<std::size_t>(i)].x;
            const double arg = x - d;
            r(i) = a * std::log(arg) + c - pts[static_cast<std::size_t>(i)].y;
            J(i, 0) = std::log(arg);
            J(i, 1) = -a / arg;
            J(i, 2) = 1.0;
        }
        return r.allFinite() && J.allFinite();
    };
    VectorXd theta(3);
    theta << a0, d0, c0;
    return finalize(CurveFamily::Logarithmic, lm_fit(model, theta, n), n);
}

FitResult fit_sinusoidal(const std::vector<CorrelationPoint>& pts) {
    const int n = static_cast<int>(pts.size());
    const Moments m = moments_of(pts);
    const double a0 = std::max(0.5 * m.y_span, 1e-6);
    const double c0 = m.y_mean;

    LmModel model;
    model.eval = [&pts](const VectorXd& t, VectorXd& r, MatrixXd& J) {
        const double a = t(0), b = t(1), phi = t(2), c = t(3);
        for (int i = 0; i < r.size(); ++i) {
            const double x = pts[static_cast<std::size_t>(i)].x;
            const double s = std::sin(b * x + phi);
            const double co = std::cos(b * x + phi);
            r(i) = a * s + c - pts[static_cast<std::size_t>(i)].y;
            J(i, 0) = s;
            J(i, 1) = a * x * co;
            J(i, 2) = a * co;
            J(i, 3) = 1.0;
        }
        return r.allFinite() && J.allFinite();
    };

    // frequency is the awkward parameter: try a few periods across the span
    // and keep the best refinement
    LmOutcome best;
    const double span = std::max(m.x_span, 1e-9);
    for (double periods : {0.5, 1.0, 2.0, 3.0}) {
        VectorXd theta(4);
        theta << a0, 2.0 * std::numbers::pi * periods / span, 0.0, c0;
        const LmOutcome res = lm_fit(model, theta, n);
        const bool better = (res.converged && !best.converged) ||
                            (res.converged == best.converged && res.rss < best.rss);
        if (better) best = res;
    }
    return finalize(CurveFamily::Sinusoidal, best, n);
}

FitResult fit_gaussian(const std::vector<CorrelationPoint>& pts) {
    const int n = static_cast<int>(pts.size());
    const Moments m = moments_of(pts);

    // bump direction from whichever extreme deviates more from the mean
    const bool positive = (m.y_max - m.y_mean) >= (m.y_mean - m.y_min);
    double mu0 = pts.front().x;
    for (const CorrelationPoint& p : pts)
        if ((positive && p.y == m.y_max) || (!positive && p.y == m.y_min)) mu0 = p.x;
    const double a0 = positive ? std::max(m.y_span, 1e-6) : -std::max(m.y_span, 1e-6);
    const double c0 = positive ? m.y_min : m.y_max;
    const double s0 = std::max(0.25 * m.x_span, 1e-6);

    LmModel model;
    model.eval = [&pts](const VectorXd& t, VectorXd& r, MatrixXd& J) {
        const double a = t(0), mu = t(1), sigma = t(2), c = t(3);
        if (std::abs(sigma) < 1e-12) return false;
        for (int i = 0; i < r.size(); ++i) {
            const double x = pts[static_cast<std::size_t>(i)].x;
            const double z = (x - mu) / sigma;
            const double e = std::exp(-0.5 * z * z);
            r(i) = a * e + c - pts[static_cast<std::size_t>(i)].y;
            J(i, 0) = e;
            J(i, 1) = a * e * z / sigma;
            J(i, 2) = a * e * z * z / sigma;
            J(i, 3) = 1.0;
        }
        return r.allFinite() && J.allFinite();
    };
    VectorXd theta(4);
    theta << a0, mu0, s0, c0;
    return finalize(CurveFamily::Gaussian, lm_fit(model, theta, n), n);
}

}  // namespace

FitReport fit_curves(const std::vector<CorrelationPoint>& points) {
    if (points.size() < 4)
        throw TooFewPointsError(std::to_string(points.size()) + " points, need at least 4");
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i].x == points[j].x)
                throw ConfigInvalidError("correlation points must have distinct x values");

    FitReport report;
    report.all = {fit_poly2(points), fit_exponential(points), fit_logarithmic(points),
                  fit_sinusoidal(points), fit_gaussian(points)};

    const FitResult* best = nullptr;
    for (const FitResult& fit : report.all)
        if (fit.converged && (!best || fit.rss < best->rss)) best = &fit;
    if (!best) throw AllFitsFailedError("no curve family converged");
    report.best = *best;
    return report;
}

std::vector<CorrelationPoint> standardize_curve(const FitResult& fit, PhysVar variable) {
    const auto [lo, hi] = forecast::standard_range(variable);
    std::vector<CorrelationPoint> out;
    out.reserve(100);
    for (int i = 0; i < 100; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / 99.0;
        const double y = evaluate_fit(fit, x);
        if (std::isfinite(y)) out.push_back({x, y});
    }
    return out;
}

// ---------------------------------------------------------------------------
// report writers

void write_sensitivity_csv(const std::filesystem::path& path,
                           const std::vector<SensitivityRow>& rows) {
    CsvWriter w(path);
    w.header("segment_key,variable,sensitivity,cardinality");
    for (const SensitivityRow& r : rows) {
        w.field(r.segment_key).field(phys_var_name(r.variable)).field(r.sensitivity).field(r.cardinality);
        w.end_row();
    }
}

void write_global_sensitivity_csv(const std::filesystem::path& path,
                                  const std::vector<GlobalSensitivityRow>& rows) {
    CsvWriter w(path);
    w.header("variable,sensitivity,sd,unit");
    for (const GlobalSensitivityRow& r : rows) {
        w.field(phys_var_name(r.variable)).field(r.sensitivity).field(r.sd);
        w.field(std::string("NDVI per ") + phys_unit_label(r.variable));
        w.end_row();
    }
}

void write_fits_csv(const std::filesystem::path& path, const std::vector<FitRow>& rows) {
    CsvWriter w(path);
    w.header("segment_key,variable,family,a,b,c,d,rss");
    for (const FitRow& r : rows) {
        w.field(r.segment_key).field(phys_var_name(r.variable)).field(family_name(r.fit.family));
        for (std::size_t i = 0; i < 4; ++i) {
            if (i < r.fit.coeffs.size())
                w.field(r.fit.coeffs[i]);
            else
                w.empty_field();
        }
        w.field(r.fit.rss);
        w.end_row();
    }
}

void write_curves_csv(const std::filesystem::path& path, const std::vector<CurveSampleRow>& rows) {
    CsvWriter w(path);
    w.header("segment_key,variable,x,y");
    for (const CurveSampleRow& r : rows)
        for (const CorrelationPoint& p : r.samples) {
            w.field(r.segment_key).field(phys_var_name(r.variable)).field(p.x).field(p.y);
            w.end_row();
        }
}

void write_ndvi_curves_csv(const std::filesystem::path& path,
                           const std::vector<NdviCurveRow>& rows) {
    CsvWriter w(path);
    w.header("segment_key,variable,offset,timestep,value");
    for (const NdviCurveRow& r : rows)
        for (std::size_t t = 0; t < r.curve.size(); ++t) {
            w.field(r.segment_key).field(phys_var_name(r.variable)).field(r.offset).field(t).field(r.curve[t]);
            w.end_row();
        }
}

}  // namespace csp::analysis
