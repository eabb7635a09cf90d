#include "hta/appearance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hta/error.hpp"

namespace hta {

Feature::Feature(Eigen::VectorXd values) : values_(std::move(values)) {
    if (values_.size() == 0) throw DomainError("Feature: empty vector");
    if (!values_.allFinite()) throw DomainError("Feature: non-finite component");
    const double norm = values_.norm();
    if (!(norm > 0)) throw DomainError("Feature: zero vector cannot be normalized");
    values_ /= norm;
}

FeatureGallery::FeatureGallery(std::size_t budget) : budget_(budget), frames_(budget, 0) {
    if (budget_ == 0) throw DomainError("FeatureGallery: budget must be >= 1");
}

void FeatureGallery::push(FrameIndex frame, const Feature& feature) {
    if (size_ == 0 && storage_.cols() == 0) {
        storage_.resize(feature.dim(), static_cast<Eigen::Index>(budget_));
    } else if (feature.dim() != storage_.rows()) {
        throw DomainError("FeatureGallery: feature dimension mismatch");
    }
    if (size_ > 0) {
        const std::size_t last = (head_ + budget_ - 1) % budget_;
        if (frame <= frames_[last]) throw DomainError("FeatureGallery: frame indices must increase");
    }
    // While not full, head_ == size_, so filled columns stay contiguous at the left.
    storage_.col(static_cast<Eigen::Index>(head_)) = feature.values();
    frames_[head_] = frame;
    head_ = (head_ + 1) % budget_;
    size_ = std::min(size_ + 1, budget_);
}

FrameIndex FeatureGallery::frame_at(std::size_t i) const {
    if (i >= size_) throw StateError("FeatureGallery: index out of range");
    const std::size_t oldest = size_ < budget_ ? 0 : head_;
    return frames_[(oldest + i) % budget_];
}

Eigen::VectorXd FeatureGallery::feature_at(std::size_t i) const {
    if (i >= size_) throw StateError("FeatureGallery: index out of range");
    const std::size_t oldest = size_ < budget_ ? 0 : head_;
    return storage_.col(static_cast<Eigen::Index>((oldest + i) % budget_));
}

double cosine_distance(const Feature& a, const Feature& b) {
    if (a.dim() != b.dim()) throw DomainError("cosine_distance: dimension mismatch");
    return 1.0 - a.values().dot(b.values());
}

double min_distance(const Feature& query, const FeatureGallery& gallery) {
    if (gallery.empty()) throw StateError("min_distance: empty gallery");
    if (query.dim() != gallery.dim()) throw DomainError("min_distance: dimension mismatch");
    const auto cols = gallery.columns();
    double best = 1.0 - query.values().dot(cols.col(0));
    for (Eigen::Index j = 1; j < cols.cols(); ++j) best = std::min(best, 1.0 - query.values().dot(cols.col(j)));
    return best;
}

double mean_of_smallest_inplace(std::span<double> distances, std::size_t k) {
    if (distances.empty()) throw StateError("mean_of_smallest: no distances");
    if (k == 0) throw DomainError("mean_of_smallest: k must be >= 1");
    const std::size_t take = std::min(k, distances.size());
    std::nth_element(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(take - 1), distances.end());
    std::sort(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(take));
    return std::accumulate(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(take), 0.0) /
           static_cast<double>(take);
}

double mean_of_smallest(std::vector<double> distances, std::size_t k) {
    return mean_of_smallest_inplace(distances, k);
}

double knn_mean_distance(const Feature& query, const FeatureGallery& gallery, std::size_t k) {
    if (gallery.empty()) throw StateError("knn_mean_distance: empty gallery");
    if (query.dim() != gallery.dim()) throw DomainError("knn_mean_distance: dimension mismatch");
    const auto cols = gallery.columns();
    std::vector<double> d(static_cast<std::size_t>(cols.cols()));
    for (Eigen::Index j = 0; j < cols.cols(); ++j) d[static_cast<std::size_t>(j)] = 1.0 - query.values().dot(cols.col(j));
    return mean_of_smallest(std::move(d), k);
}

Feature ema_update(const std::optional<Feature>& smoothed, const Feature& incoming, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("ema_update: eta must lie in [0,1]");
    if (!smoothed) return incoming;
    if (smoothed->dim() != incoming.dim()) throw DomainError("ema_update: dimension mismatch");
    return Feature(eta * smoothed->values() + (1.0 - eta) * incoming.values());
}

double to_model_domain(double cosine) {
    if (!(cosine >= 0.0)) {
        // Rounding can push 1 - dot marginally below zero for (near-)identical features.
        if (cosine > -1e-12) return 0.0;
        throw DomainError("to_model_domain: negative distance");
    }
    return std::sqrt(std::sqrt(cosine));
}

Eigen::MatrixXd gallery_distances(const Eigen::MatrixXd& queries, const FeatureGallery& gallery) {
    if (gallery.empty()) throw StateError("gallery_distances: empty gallery");
    if (queries.rows() != gallery.dim()) throw DomainError("gallery_distances: dimension mismatch");
    Eigen::MatrixXd d = queries.transpose() * gallery.columns();
    d.array() = 1.0 - d.array();
    return d;
}

}  // namespace hta
