#pragma once

#include <vector>

#include "csp/metrics.hpp"
#include "csp/sample.hpp"

namespace csp::kernels {

// Batch kernels behind the clustering and analysis inner loops. Each kernel
// parallelizes over independent output slots with OpenMP and accumulates
// within a slot serially, so results are bitwise identical to the serial
// reference twins in kernels::serial for any thread count.

// Row-major n_rows x n_cols soft-DTW distance matrix between xs and cs.
std::vector<double> soft_dtw_matrix(const std::vector<Series>& xs, const std::vector<Series>& cs,
                                    double gamma);

// Hard-DTW distance from each series to one assigned centroid.
std::vector<double> dtw_to_assigned(const std::vector<Series>& xs, const std::vector<Series>& cs,
                                    const std::vector<int>& assignment);

// Sum over members of grad_c soft_dtw(center, member); also returns the summed
// soft-DTW value through *cost_sum. Reduction order is member order.
std::vector<double> barycenter_gradient(const Series& center,
                                        const std::vector<const Series*>& members, double gamma,
                                        double* cost_sum);

// Downsampled series of one weather channel for every sample.
std::vector<Series> downsample_batch(const std::vector<const Tensor3*>& channels);

namespace serial {
std::vector<double> soft_dtw_matrix(const std::vector<Series>& xs, const std::vector<Series>& cs,
                                    double gamma);
std::vector<double> dtw_to_assigned(const std::vector<Series>& xs, const std::vector<Series>& cs,
                                    const std::vector<int>& assignment);
std::vector<double> barycenter_gradient(const Series& center,
                                        const std::vector<const Series*>& members, double gamma,
                                        double* cost_sum);
std::vector<Series> downsample_batch(const std::vector<const Tensor3*>& channels);
}  // namespace serial

}  // namespace csp::kernels
