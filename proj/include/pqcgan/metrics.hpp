#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "pqcgan/generator.hpp"

namespace pqcgan {

inline constexpr double kKlEps = 1e-8;
inline constexpr double kCollapseTv = 0.05;

/// One evaluation point of a training or inference run.
struct MetricsRecord {
    int epoch = 0;
    double d_kl = 0.0;
    double d_kl_ind = 0.0;
    double min_pairwise_tv = 0.0;
    bool collapsed = false;
};

inline const char* metrics_csv_header() { return "epoch,d_kl,d_kl_ind,min_pairwise_tv,collapsed"; }

inline std::string metrics_csv_row(const MetricsRecord& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%s", r.epoch, r.d_kl, r.d_kl_ind,
                  r.min_pairwise_tv, r.collapsed ? "true" : "false");
    return buf;
}

/// Relative entropy sum p~ ln(p~/q~) in nats over eps-smoothed, renormalized
/// distributions p~ = (p + eps) / (1 + N eps). Smoothing keeps the value
/// finite when shot noise leaves empty bins.
inline double kl_divergence(const ProbabilityVector& p, const ProbabilityVector& q,
                            double eps = kKlEps) {
    if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: length mismatch");
    if (!(eps > 0.0)) throw std::invalid_argument("kl_divergence: eps must be positive");
    const double norm = 1.0 + static_cast<double>(p.size()) * eps;
    double acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double ps = (p[k] + eps) / norm;
        const double qs = (q[k] + eps) / norm;
        acc += ps * std::log(ps / qs);
    }
    return acc < 0.0 ? 0.0 : acc; // clip away rounding residue; KL >= 0
}

/// d(kl_divergence)/dp with q held fixed.
inline std::vector<double> kl_divergence_gradient(const ProbabilityVector& p,
                                                  const ProbabilityVector& q, double eps = kKlEps) {
    if (p.size() != q.size()) throw std::invalid_argument("kl_divergence_gradient: length mismatch");
    const double norm = 1.0 + static_cast<double>(p.size()) * eps;
    std::vector<double> g(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double ps = (p[k] + eps) / norm;
        const double qs = (q[k] + eps) / norm;
        g[k] = (std::log(ps / qs) + 1.0) / norm;
    }
    return g;
}

/// Relative entropy of the generated mean image against the real mean image.
/// Direction is generated || real, so generated mass outside the real support
/// is penalized.
inline double d_kl_mean(const ProbabilityVector& gen_mean, const ProbabilityVector& real_mean) {
    return kl_divergence(gen_mean, real_mean, kKlEps);
}

/// Mixture-weighted best-match divergence: each generated variant is scored
/// against its closest real individual. All variants matching one real image
/// therefore scores near zero, which is exactly how a collapsed generator can
/// still report a low value.
inline double d_kl_individual(const GeneratedOutput& gen,
                              const std::vector<ProbabilityVector>& real_individuals) {
    if (real_individuals.empty()) throw std::invalid_argument("d_kl_individual: empty real set");
    double acc = 0.0;
    for (std::size_t i = 0; i < gen.individuals.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const ProbabilityVector& r : real_individuals)
            best = std::min(best, kl_divergence(gen.individuals[i], r, kKlEps));
        acc += gen.weights[i] * best;
    }
    return acc;
}

/// Total-variation distance (half L1).
inline double total_variation(const ProbabilityVector& a, const ProbabilityVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("total_variation: length mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
    return 0.5 * s;
}

/// Diversity diagnostic: the smallest pairwise TV distance between individual
/// images, flagged as collapsed below 0.05.
inline std::pair<double, bool> mode_collapse_score(const std::vector<ProbabilityVector>& individuals) {
    if (individuals.size() < 2)
        throw std::invalid_argument("mode_collapse_score: need at least 2 individuals");
    double min_tv = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < individuals.size(); ++i)
        for (std::size_t j = i + 1; j < individuals.size(); ++j)
            min_tv = std::min(min_tv, total_variation(individuals[i], individuals[j]));
    return {min_tv, min_tv < kCollapseTv};
}

/// Mean and sample standard deviation (n - 1 denominator). A constant sample
/// reports exactly zero spread; summing first would leave an ulp of rounding
/// residue, and exact-mode inference repeats rely on std being exactly 0.
inline std::pair<double, double> summarize_repetitions(const std::vector<double>& values) {
    if (values.size() < 2) throw std::invalid_argument("summarize_repetitions: need >= 2 values");
    bool constant = true;
    for (double v : values) constant = constant && v == values.front();
    if (constant) return {values.front(), 0.0};
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

/// Render mean +/- std in units of 1e-2, e.g. "0.07 ± 0.04".
inline std::string format_times_1e2(double mean, double std_dev) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", mean * 100.0, std_dev * 100.0);
    return buf;
}

} // namespace pqcgan
