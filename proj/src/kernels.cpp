#include "csp/kernels.hpp"

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace csp::kernels {

using metrics::DpWorkspace;

std::vector<double> soft_dtw_matrix(const std::vector<Series>& xs, const std::vector<Series>& cs,
                                    double gamma) {
    const std::int64_t n = static_cast<std::int64_t>(xs.size());
    const std::size_t k = cs.size();
    std::vector<double> out(xs.size() * k);
#pragma omp parallel
    {
        DpWorkspace ws;
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < k; ++j)
                out[static_cast<std::size_t>(i) * k + j] = metrics::soft_dtw(xs[i], cs[j], gamma, ws);
    }
    return out;
}

std::vector<double> dtw_to_assigned(const std::vector<Series>& xs, const std::vector<Series>& cs,
                                    const std::vector<int>& assignment) {
    const std::int64_t n = static_cast<std::int64_t>(xs.size());
    std::vector<double> out(xs.size());
#pragma omp parallel
    {
        DpWorkspace ws;
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) out[i] = metrics::dtw(cs[assignment[i]], xs[i], ws);
    }
    return out;
}

std::vector<double> barycenter_gradient(const Series& center,
                                        const std::vector<const Series*>& members, double gamma,
                                        double* cost_sum) {
    const std::int64_t n = static_cast<std::int64_t>(members.size());
    const std::size_t len = center.size();
    std::vector<double> per_member(members.size() * len);
    std::vector<double> per_cost(members.size());
#pragma omp parallel
    {
        DpWorkspace ws;
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            std::span<double> slot(per_member.data() + static_cast<std::size_t>(i) * len, len);
            per_cost[i] = metrics::soft_dtw_grad(center, *members[i], gamma, slot, ws);
        }
    }
    // deterministic reduce in member order
    std::vector<double> grad(len, 0.0);
    double cost = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        cost += per_cost[i];
        for (std::size_t j = 0; j < len; ++j) grad[j] += per_member[i * len + j];
    }
    if (cost_sum) *cost_sum = cost;
    return grad;
}

std::vector<Series> downsample_batch(const std::vector<const Tensor3*>& channels) {
    const std::int64_t n = static_cast<std::int64_t>(channels.size());
    std::vector<Series> out(channels.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out[i] = downsample_channel(*channels[i]);
    return out;
}

namespace serial {

std::vector<double> soft_dtw_matrix(const std::vector<Series>& xs, const std::vector<Series>& cs,
                                    double gamma) {
    DpWorkspace ws;
    std::vector<double> out(xs.size() * cs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < cs.size(); ++j)
            out[i * cs.size() + j] = metrics::soft_dtw(xs[i], cs[j], gamma, ws);
    return out;
}

std::vector<double> dtw_to_assigned(const std::vector<Series>& xs, const std::vector<Series>& cs,
                                    const std::vector<int>& assignment) {
    DpWorkspace ws;
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = metrics::dtw(cs[assignment[i]], xs[i], ws);
    return out;
}

std::vector<double> barycenter_gradient(const Series& center,
                                        const std::vector<const Series*>& members, double gamma,
                                        double* cost_sum) {
    DpWorkspace ws;
    const std::size_t len = center.size();
    std::vector<double> grad(len, 0.0);
    std::vector<double> g(len);
    double cost = 0.0;
    for (const Series* m : members) {
        cost += metrics::soft_dtw_grad(center, *m, gamma, g, ws);
        for (std::size_t j = 0; j < len; ++j) grad[j] += g[j];
    }
    if (cost_sum) *cost_sum = cost;
    return grad;
}

std::vector<Series> downsample_batch(const std::vector<const Tensor3*>& channels) {
    std::vector<Series> out(channels.size());
    for (std::size_t i = 0; i < channels.size(); ++i) out[i] = downsample_channel(*channels[i]);
    return out;
}

}  // namespace serial
}  // namespace csp::kernels
