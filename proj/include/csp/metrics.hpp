#pragma once

#include <span>
#include <vector>

#include "csp/errors.hpp"
#include "csp/tensor.hpp"

namespace csp::metrics {

struct SoftDtwParams {
    double gamma = 1.0;  // smoothing factor, > 0

    void validate() const {
        if (!(gamma > 0.0)) throw ConfigInvalidError("soft-DTW gamma must be > 0");
    }
};

// Reusable DP buffers; soft-DTW forward/backward passes over length-m/n series
// need (m+2)*(n+2) cells. One workspace per thread in batch kernels.
struct DpWorkspace {
    std::vector<double> r;  // accumulated-cost matrix
    std::vector<double> e;  // alignment-weight matrix (backward pass)
    std::vector<double> d;  // padded cell-cost matrix
};

// -gamma * log(sum_i exp(-q_i / gamma)), evaluated via log-sum-exp with the
// max subtracted. Lower-bounds min(values) and converges to it as gamma -> 0.
double soft_min(std::span<const double> values, double gamma);

// Classic DTW: min over monotone alignments of summed squared differences.
double dtw(std::span<const double> a, std::span<const double> b);
double dtw(std::span<const double> a, std::span<const double> b, DpWorkspace& ws);

// Soft-DTW per the soft-min relaxation of the same alignment problem. May be
// negative; converges to dtw(a, b) as gamma -> 0.
double soft_dtw(std::span<const double> a, std::span<const double> b, double gamma);
double soft_dtw(std::span<const double> a, std::span<const double> b, double gamma, DpWorkspace& ws);

// Exact gradient of soft_dtw(a, b) with respect to the elements of `a`,
// via the backward pass over alignment probabilities. Returns the soft-DTW
// value (the forward pass is computed anyway).
double soft_dtw_grad(std::span<const double> a, std::span<const double> b, double gamma,
                     std::span<double> grad_out);
double soft_dtw_grad(std::span<const double> a, std::span<const double> b, double gamma,
                     std::span<double> grad_out, DpWorkspace& ws);

}  // namespace csp::metrics
