#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pqcgan/errors.hpp"
#include "pqcgan/rng.hpp"
#include "pqcgan/state.hpp"

namespace pqcgan {

/// Labeled set of normalized pixel distributions.
struct ImageDataset {
    int pixels = 0;
    std::vector<ProbabilityVector> images;
    std::vector<int> class_ids;
    int n_classes = 0;

    void validate() const {
        if (pixels < 2) throw std::invalid_argument("ImageDataset: pixels must be >= 2");
        if (images.size() != class_ids.size())
            throw std::invalid_argument("ImageDataset: image/label count mismatch");
        for (const ProbabilityVector& img : images) {
            if (img.size() != static_cast<std::size_t>(pixels))
                throw std::invalid_argument("ImageDataset: pixel count mismatch");
            img.validate();
        }
        for (int c : class_ids)
            if (c < 0 || c >= n_classes) throw std::invalid_argument("ImageDataset: class id out of range");
    }
};

namespace detail {

/// Discretized Gaussian bump for class c: mean (c + 0.5) * pixels / n_classes - 0.5,
/// sigma pixels / 8, evaluated at integer pixel centers and normalized.
inline std::vector<double> class_profile(int c, int n_classes, int pixels) {
    const double mu = (c + 0.5) * static_cast<double>(pixels) / n_classes - 0.5;
    const double sigma = static_cast<double>(pixels) / 8.0;
    std::vector<double> v(static_cast<std::size_t>(pixels));
    double total = 0.0;
    for (int j = 0; j < pixels; ++j) {
        const double d = (j - mu) / sigma;
        v[static_cast<std::size_t>(j)] = std::exp(-0.5 * d * d);
        total += v[static_cast<std::size_t>(j)];
    }
    for (double& x : v) x /= total;
    return v;
}

} // namespace detail

/// Synthetic stand-in for a reduced calorimeter response: each class is a
/// smooth longitudinal energy profile, one Gaussian bump per class, with
/// optional per-sample multiplicative log-normal pixel jitter.
inline ImageDataset synth_calorimeter(int n_classes, int pixels, double jitter,
                                      int samples_per_class, std::uint64_t seed) {
    if (n_classes < 1 || pixels < 2 || n_classes > pixels)
        throw std::invalid_argument("synth_calorimeter: need 1 <= n_classes <= pixels");
    if (!(jitter >= 0.0 && jitter <= 0.5))
        throw std::invalid_argument("synth_calorimeter: jitter must lie in [0, 0.5]");
    if (samples_per_class < 1)
        throw std::invalid_argument("synth_calorimeter: samples_per_class must be >= 1");

    ImageDataset d;
    d.pixels = pixels;
    d.n_classes = n_classes;
    for (int c = 0; c < n_classes; ++c) {
        const std::vector<double> base = detail::class_profile(c, n_classes, pixels);
        for (int s = 0; s < samples_per_class; ++s) {
            ProbabilityVector img;
            img.probs = base;
            if (jitter > 0.0) {
                rng::SplitMix64 gen(rng::derive(seed, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(s)));
                double total = 0.0;
                for (double& p : img.probs) {
                    p *= std::exp(jitter * gen.normal());
                    total += p;
                }
                for (double& p : img.probs) p /= total;
            }
            d.images.push_back(std::move(img));
            d.class_ids.push_back(c);
        }
    }
    d.validate();
    return d;
}

/// Elementwise average over all images.
inline ProbabilityVector dataset_mean(const ImageDataset& d) {
    if (d.images.empty()) throw std::invalid_argument("dataset_mean: empty dataset");
    ProbabilityVector mean;
    mean.probs.assign(static_cast<std::size_t>(d.pixels), 0.0);
    for (const ProbabilityVector& img : d.images)
        for (std::size_t k = 0; k < mean.size(); ++k) mean.probs[k] += img[k];
    for (double& v : mean.probs) v /= static_cast<double>(d.images.size());
    return mean;
}

/// Per-class mean images, the real-side individuals that generated variants
/// are scored against.
inline std::vector<ProbabilityVector> class_means(const ImageDataset& d) {
    if (d.images.empty()) throw std::invalid_argument("class_means: empty dataset");
    std::vector<ProbabilityVector> means(static_cast<std::size_t>(d.n_classes));
    std::vector<std::size_t> counts(static_cast<std::size_t>(d.n_classes), 0);
    for (auto& m : means) m.probs.assign(static_cast<std::size_t>(d.pixels), 0.0);
    for (std::size_t i = 0; i < d.images.size(); ++i) {
        const auto c = static_cast<std::size_t>(d.class_ids[i]);
        for (std::size_t k = 0; k < d.images[i].size(); ++k) means[c].probs[k] += d.images[i][k];
        ++counts[c];
    }
    for (std::size_t c = 0; c < means.size(); ++c) {
        if (counts[c] == 0) throw std::invalid_argument("class_means: class without samples");
        for (double& v : means[c].probs) v /= static_cast<double>(counts[c]);
    }
    return means;
}

/// CSV layout: header "class,p0,...,p{P-1}", one image per row, pixel values
/// with full double precision.
inline void save_csv(const ImageDataset& d, const std::string& path) {
    d.validate();
    std::ofstream f(path);
    if (!f) throw ConfigError("save_csv: cannot open " + path);
    f << "class";
    for (int j = 0; j < d.pixels; ++j) f << ",p" << j;
    f << "\n";
    char buf[64];
    for (std::size_t i = 0; i < d.images.size(); ++i) {
        f << d.class_ids[i];
        for (std::size_t k = 0; k < d.images[i].size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", d.images[i][k]);
            f << "," << buf;
        }
        f << "\n";
    }
    if (!f) throw ConfigError("save_csv: write failed for " + path);
}

inline ImageDataset load_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw ParseError(path + ":1: missing header");

    // header fixes the pixel count
    std::vector<std::string> fields;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) fields.push_back(tok);
    }
    if (fields.empty() || fields[0] != "class")
        throw ParseError(path + ":1: header must start with 'class'");
    const int pixels = static_cast<int>(fields.size()) - 1;
    if (pixels < 2) throw ParseError(path + ":1: header names fewer than 2 pixel columns");
    for (int j = 0; j < pixels; ++j)
        if (fields[static_cast<std::size_t>(j) + 1] != "p" + std::to_string(j))
            throw ParseError(path + ":1: unexpected pixel column name");

    ImageDataset d;
    d.pixels = pixels;
    int max_class = -1;
    int line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> row;
        while (std::getline(ss, tok, ',')) row.push_back(tok);
        if (row.size() != static_cast<std::size_t>(pixels) + 1)
            throw ParseError(path + ":" + std::to_string(line_no) + ": wrong column count");
        ProbabilityVector img;
        img.probs.resize(static_cast<std::size_t>(pixels));
        int cls = 0;
        try {
            cls = std::stoi(row[0]);
            for (int j = 0; j < pixels; ++j)
                img.probs[static_cast<std::size_t>(j)] = std::stod(row[static_cast<std::size_t>(j) + 1]);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": unparseable number");
        }
        if (cls < 0) throw ParseError(path + ":" + std::to_string(line_no) + ": negative class id");
        for (double p : img.probs)
            if (p < 0.0) throw ParseError(path + ":" + std::to_string(line_no) + ": negative pixel value");
        if (std::abs(img.sum() - 1.0) > 1e-6)
            throw ParseError(path + ":" + std::to_string(line_no) + ": row does not sum to 1");
        d.images.push_back(std::move(img));
        d.class_ids.push_back(cls);
        max_class = std::max(max_class, cls);
    }
    if (d.images.empty()) throw ParseError(path + ": no data rows");
    d.n_classes = max_class + 1;
    d.validate();
    return d;
}

} // namespace pqcgan
