#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace hta {

using FrameIndex = std::int64_t;

// Unit-norm appearance embedding. Inputs are renormalized on construction.
class Feature {
public:
    Feature() = default;
    explicit Feature(Eigen::VectorXd values);

    [[nodiscard]] const Eigen::VectorXd& values() const noexcept { return values_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return values_.size(); }

    friend bool operator==(const Feature& a, const Feature& b) { return a.values_ == b.values_; }

private:
    Eigen::VectorXd values_;
};

// Fixed-capacity ring buffer of (frame, feature). Features are stored as the
// columns of a dim x capacity matrix so gallery distances reduce to one GEMV/GEMM.
class FeatureGallery {
public:
    explicit FeatureGallery(std::size_t budget = 100);

    void push(FrameIndex frame, const Feature& feature);

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] bool empty() const noexcept { return size_ == 0; }
    [[nodiscard]] std::size_t budget() const noexcept { return budget_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return storage_.rows(); }

    // i-th entry in chronological order (0 = oldest).
    [[nodiscard]] FrameIndex frame_at(std::size_t i) const;
    [[nodiscard]] Eigen::VectorXd feature_at(std::size_t i) const;

    // Filled columns; column order is storage order, not chronological.
    [[nodiscard]] auto columns() const { return storage_.leftCols(static_cast<Eigen::Index>(size_)); }

private:
    std::size_t budget_;
    Eigen::MatrixXd storage_;
    std::vector<FrameIndex> frames_;
    std::size_t head_ = 0;  // next slot to overwrite
    std::size_t size_ = 0;
};

double cosine_distance(const Feature& a, const Feature& b);

double min_distance(const Feature& query, const FeatureGallery& gallery);

double knn_mean_distance(const Feature& query, const FeatureGallery& gallery, std::size_t k);

// Mean of the min(k, n) smallest entries of `distances`.
double mean_of_smallest(std::vector<double> distances, std::size_t k);
// Same, reordering `distances` instead of copying it.
double mean_of_smallest_inplace(std::span<double> distances, std::size_t k);

Feature ema_update(const std::optional<Feature>& smoothed, const Feature& incoming, double eta);

// Cosine distance -> IGMM model domain (fourth root).
double to_model_domain(double cosine);

// Batched detection x gallery distances: returns 1 - Q^T G for column-stacked queries Q.
Eigen::MatrixXd gallery_distances(const Eigen::MatrixXd& queries, const FeatureGallery& gallery);

}  // namespace hta
