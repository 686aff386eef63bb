#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "csp/sample.hpp"
#include "csp/tensor.hpp"

namespace csp::clustering {

// Fitted time-series k-means model for one meteorological variable.
struct KMeansModel {
    Channel variable = Channel::TAvg;
    int k = 0;
    double gamma = 1.0;
    std::uint64_t seed = 0;
    std::vector<Series> centroids;
    std::vector<int> counts;  // members per cluster at fit time

    std::size_t series_length() const { return centroids.empty() ? 0 : centroids.front().size(); }
};

struct KMeansFit {
    KMeansModel model;
    std::vector<int> assignment;        // per training series
    double inertia = 0.0;               // sum of soft-DTW to assigned centroid
    std::vector<double> inertia_trace;  // one entry per Lloyd iteration
};

struct ClusterScores {
    int k = 0;
    double intra = 0.0;
    double inter = 0.0;
    double goodness = 0.0;
};

struct KMeansOptions {
    int max_iter = 30;
    double tol = 1e-6;             // stop when inertia improves by less than this
    int barycenter_steps = 30;     // gradient steps per centroid update
    double barycenter_step = 0.05; // step size is barycenter_step / |members|
};

// Lloyd-style soft-DTW k-means: assign by minimal soft-DTW, update centroids
// as soft-DTW barycenters (gradient descent, warm-started; a candidate
// centroid is kept only if it lowers its cluster cost, so inertia is
// non-increasing). Deterministic for a fixed seed. Empty clusters are
// re-seeded from the worst-fit series.
KMeansFit kmeans_fit(const std::vector<Series>& series, int k, double gamma, std::uint64_t seed,
                     const KMeansOptions& opts = {});

// Dataset-wide mean of exp(DTW(assigned centroid, sample)); >= 1, lower is better.
double intra_cluster_score(const KMeansModel& model, const std::vector<Series>& series,
                           const std::vector<int>& assignment);

// (pairs - similar^2) / pairs over unordered centroid pairs, where a pair is
// "similar" when DTW < lambda. May be <= 0 once similar^2 >= pairs.
double inter_centroid_score(const KMeansModel& model, double lambda);

inline constexpr double kDefaultLambda = 0.4;

struct SweepResult {
    KMeansFit best;
    std::vector<ClusterScores> scores;  // one row per k, in sweep order
};

// Fits one model per k, scores each, returns the argmax-goodness model
// (ties toward smaller k).
SweepResult sweep_k(const std::vector<Series>& series, const std::vector<int>& k_values,
                    double gamma, std::uint64_t seed, double lambda,
                    const KMeansOptions& opts = {});

// Index of the centroid minimizing soft_dtw(centroid, q); ties toward the
// lowest index.
int predict_cluster(const KMeansModel& model, const Series& q);

// JSON persistence (variable, k, gamma, seed, lambda, counts, centroids).
void save_model(const KMeansModel& model, double lambda, const std::filesystem::path& path);
KMeansModel load_model(const std::filesystem::path& path, double* lambda_out = nullptr);

// k,intra,inter,goodness
void write_scores_csv(const std::filesystem::path& path, const std::vector<ClusterScores>& scores);
// cluster,timestep,value
void write_centroids_csv(const std::filesystem::path& path, const KMeansModel& model);

}  // namespace csp::clustering
