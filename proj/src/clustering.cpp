#include "csp/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "csp/csv.hpp"
#include "csp/errors.hpp"
#include "csp/kernels.hpp"
#include "csp/metrics.hpp"
#include "csp/rng.hpp"

namespace csp::clustering {

using nlohmann::json;

namespace {

void check_inputs(const std::vector<Series>& series, int k) {
    if (k < 2) throw KTooSmallError("k must be >= 2, got " + std::to_string(k));
    if (static_cast<int>(series.size()) < k)
        throw TooFewSeriesError(std::to_string(series.size()) + " series for k=" + std::to_string(k));
    const std::size_t len = series.front().size();
    if (len == 0) throw EmptySeriesError("clustering input contains an empty series");
    for (const Series& s : series)
        if (s.size() != len) throw LengthMismatchError("clustering inputs must share one length");
}

// k-means++-style seeding under soft-DTW. Weights are clamped at zero since
// soft-DTW can dip below it.
std::vector<Series> seed_centroids(const std::vector<Series>& series, int k, double gamma,
                                   Rng& rng) {
    const std::size_t n = series.size();
    std::vector<Series> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    centroids.push_back(series[rng.next_below(n)]);

    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    metrics::DpWorkspace ws;
    while (static_cast<int>(centroids.size()) < k) {
        const Series& latest = centroids.back();
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            best[i] = std::min(best[i], metrics::soft_dtw(latest, series[i], gamma, ws));
            total += std::max(best[i], 0.0);
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = rng.next_double() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += std::max(best[i], 0.0);
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.next_below(n);
        }
        centroids.push_back(series[pick]);
    }
    return centroids;
}

// Gradient descent on the cluster's barycenter objective, warm-started from
// the previous centroid. Returns the best candidate seen, so the cluster cost
// never increases.
Series update_barycenter(const Series& warm_start, const std::vector<const Series*>& members,
                         double gamma, const KMeansOptions& opts) {
    const double step = opts.barycenter_step / static_cast<double>(members.size());
    Series current = warm_start;
    Series best = warm_start;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.barycenter_steps; ++it) {
        double cost = 0.0;
        std::vector<double> grad = kernels::barycenter_gradient(current, members, gamma, &cost);
        if (cost < best_cost) {
            best_cost = cost;
            best = current;
        }
        double max_abs = 0.0;
        for (double g : grad) max_abs = std::max(max_abs, std::abs(g));
        if (max_abs * step < 1e-12) return best;  // stalled
        for (std::size_t j = 0; j < current.size(); ++j) current[j] -= step * grad[j];
    }
    double cost = 0.0;
    metrics::DpWorkspace ws;
    for (const Series* m : members) cost += metrics::soft_dtw(current, *m, gamma, ws);
    if (cost < best_cost) best = current;
    return best;
}

}  // namespace

KMeansFit kmeans_fit(const std::vector<Series>& series, int k, double gamma, std::uint64_t seed,
                     const KMeansOptions& opts) {
    check_inputs(series, k);
    metrics::SoftDtwParams{gamma}.validate();

    const std::size_t n = series.size();
    Rng rng(seed);
    std::vector<Series> centroids = seed_centroids(series, k, gamma, rng);

    KMeansFit fit;
    fit.assignment.assign(n, 0);
    double prev_inertia = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        // assignment: argmin over centroids, ties toward the lowest index.
        // Distances are evaluated centroid-first, like predict_cluster, so the
        // fitted assignment is reproducible through the public predictor.
        std::vector<double> dist = kernels::soft_dtw_matrix(centroids, series, gamma);
        std::vector<double> assigned_dist(n);
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            int arg = 0;
            double best = dist[i];
            for (int j = 1; j < k; ++j) {
                const double d = dist[static_cast<std::size_t>(j) * n + i];
                if (d < best) {
                    best = d;
                    arg = j;
                }
            }
            fit.assignment[i] = arg;
            assigned_dist[i] = best;
            counts[static_cast<std::size_t>(arg)]++;
        }

        // empty-cluster repair: re-seed from the globally worst-fit series
        for (int j = 0; j < k; ++j) {
            if (counts[static_cast<std::size_t>(j)] > 0) continue;
            std::size_t worst = n;
            double worst_dist = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(fit.assignment[i])] <= 1)
                    continue;  // keep other clusters non-empty
                if (assigned_dist[i] > worst_dist) {
                    worst_dist = assigned_dist[i];
                    worst = i;
                }
            }
            if (worst == n)
                throw DegenerateClusterError("cannot repair empty cluster " + std::to_string(j));
            counts[static_cast<std::size_t>(fit.assignment[worst])]--;
            counts[static_cast<std::size_t>(j)]++;
            centroids[static_cast<std::size_t>(j)] = series[worst];
            fit.assignment[worst] = j;
            assigned_dist[worst] =
                metrics::soft_dtw(centroids[static_cast<std::size_t>(j)], series[worst], gamma);
        }

        double inertia = 0.0;
        for (double d : assigned_dist) inertia += d;
        fit.inertia_trace.push_back(inertia);
        fit.inertia = inertia;

        if (prev_inertia - inertia < opts.tol) break;
        prev_inertia = inertia;

        // centroid update; skipped on the last pass so the returned assignment
        // always reflects the returned centroids
        if (iter + 1 == opts.max_iter) break;
        for (int j = 0; j < k; ++j) {
            std::vector<const Series*> members;
            for (std::size_t i = 0; i < n; ++i)
                if (fit.assignment[i] == j) members.push_back(&series[i]);
            centroids[static_cast<std::size_t>(j)] =
                update_barycenter(centroids[static_cast<std::size_t>(j)], members, gamma, opts);
        }
    }

    fit.model.k = k;
    fit.model.gamma = gamma;
    fit.model.seed = seed;
    fit.model.centroids = std::move(centroids);
    fit.model.counts.assign(static_cast<std::size_t>(k), 0);
    for (int a : fit.assignment) fit.model.counts[static_cast<std::size_t>(a)]++;
    return fit;
}

double intra_cluster_score(const KMeansModel& model, const std::vector<Series>& series,
                           const std::vector<int>& assignment) {
    if (series.size() != assignment.size())
        throw LengthMismatchError("assignment length != series count");
    const std::vector<double> d = kernels::dtw_to_assigned(series, model.centroids, assignment);
    double acc = 0.0;
    for (double v : d) acc += std::exp(v);
    return acc / static_cast<double>(series.size());
}

double inter_centroid_score(const KMeansModel& model, double lambda) {
    if (model.k < 2) throw KTooSmallError("inter_centroid_score needs k >= 2");
    metrics::DpWorkspace ws;
    long long similar = 0;
    for (int i = 0; i < model.k; ++i)
        for (int j = i + 1; j < model.k; ++j)
            if (metrics::dtw(model.centroids[static_cast<std::size_t>(i)],
                             model.centroids[static_cast<std::size_t>(j)], ws) < lambda)
                similar++;
    const double pairs = 0.5 * model.k * (model.k - 1);
    return (pairs - static_cast<double>(similar * similar)) / pairs;
}

SweepResult sweep_k(const std::vector<Series>& series, const std::vector<int>& k_values,
                    double gamma, std::uint64_t seed, double lambda, const KMeansOptions& opts) {
    if (k_values.empty()) throw ConfigInvalidError("empty k range");
    for (int k : k_values)
        if (k < 2 || k > static_cast<int>(series.size()))
            throw TooFewSeriesError("k=" + std::to_string(k) + " outside [2, " +
                                    std::to_string(series.size()) + "]");

    SweepResult result;
    double best_goodness = -std::numeric_limits<double>::infinity();
    for (int k : k_values) {
        KMeansFit fit = kmeans_fit(series, k, gamma, seed, opts);
        ClusterScores scores;
        scores.k = k;
        scores.intra = intra_cluster_score(fit.model, series, fit.assignment);
        scores.inter = inter_centroid_score(fit.model, lambda);
        scores.goodness = scores.inter / scores.intra;
        result.scores.push_back(scores);
        if (scores.goodness > best_goodness) {
            best_goodness = scores.goodness;
            result.best = std::move(fit);
        }
    }
    return result;
}

int predict_cluster(const KMeansModel& model, const Series& q) {
    if (q.size() != model.series_length())
        throw LengthMismatchError("query length " + std::to_string(q.size()) +
                                  " != centroid length " + std::to_string(model.series_length()));
    metrics::DpWorkspace ws;
    int arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < model.k; ++j) {
        const double d =
            metrics::soft_dtw(model.centroids[static_cast<std::size_t>(j)], q, model.gamma, ws);
        if (d < best) {
            best = d;
            arg = j;
        }
    }
    return arg;
}

void save_model(const KMeansModel& model, double lambda, const std::filesystem::path& path) {
    json doc = {{"variable", channel_name(model.variable)},
                {"k", model.k},
                {"gamma", model.gamma},
                {"seed", model.seed},
                {"lambda", lambda},
                {"counts", model.counts},
                {"centroids", model.centroids}};
    std::ofstream out(path);
    if (!out) throw Error(ErrorClass::Io, "cannot write model '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

KMeansModel load_model(const std::filesystem::path& path, double* lambda_out) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("cannot open model '" + path.string() + "'");
    json doc;
    try {
        in >> doc;
        KMeansModel model;
        model.variable = channel_from_name(doc.at("variable").get<std::string>());
        model.k = doc.at("k").get<int>();
        model.gamma = doc.at("gamma").get<double>();
        model.seed = doc.at("seed").get<std::uint64_t>();
        model.counts = doc.at("counts").get<std::vector<int>>();
        model.centroids = doc.at("centroids").get<std::vector<Series>>();
        if (lambda_out) *lambda_out = doc.at("lambda").get<double>();
        return model;
    } catch (const json::exception& e) {
        throw Error(ErrorClass::Io, "model '" + path.string() + "': " + e.what());
    }
}

void write_scores_csv(const std::filesystem::path& path, const std::vector<ClusterScores>& scores) {
    CsvWriter w(path);
    w.header("k,intra,inter,goodness");
    for (const ClusterScores& s : scores) {
        w.field(s.k).field(s.intra).field(s.inter).field(s.goodness);
        w.end_row();
    }
}

void write_centroids_csv(const std::filesystem::path& path, const KMeansModel& model) {
    CsvWriter w(path);
    w.header("cluster,timestep,value");
    for (int j = 0; j < model.k; ++j) {
        const Series& c = model.centroids[static_cast<std::size_t>(j)];
        for (std::size_t t = 0; t < c.size(); ++t) {
            w.field(j).field(t).field(c[t]);
            w.end_row();
        }
    }
}

}  // namespace csp::clustering
