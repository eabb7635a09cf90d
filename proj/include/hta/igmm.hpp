#pragma once

// Incremental univariate Gaussian mixture over a track's appearance-distance
// stream. Samples live in the fourth-root ("model") domain.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hta/error.hpp"
#include "hta/stats.hpp"

namespace hta {

enum class InlierOrder { Ascending, Descending };

template <typename Scalar>
struct IgmmConfig {
    Scalar initial_variance = Scalar(0.005);
    std::size_t max_components = 5;
    std::uint64_t min_age = 5;        // v_min
    Scalar min_mass = Scalar(3);      // N_min
    Scalar tail_probability = Scalar(0.01);  // tau of the update gate
    Scalar variance_floor = Scalar(1e-8);
    InlierOrder inlier_order = InlierOrder::Ascending;

    void validate() const {
        if (!(initial_variance > 0)) throw DomainError("IgmmConfig: initial variance must be > 0");
        if (max_components < 1) throw DomainError("IgmmConfig: max components must be >= 1");
        if (min_age < 1) throw DomainError("IgmmConfig: min age must be >= 1");
        if (!(min_mass > 0)) throw DomainError("IgmmConfig: min mass must be > 0");
        if (!(tail_probability > 0 && tail_probability < 1))
            throw DomainError("IgmmConfig: tail probability must lie in (0,1)");
        if (!(variance_floor > 0)) throw DomainError("IgmmConfig: variance floor must be > 0");
    }

    // Squared-Mahalanobis threshold chi2_{1,1-tau}.
    [[nodiscard]] Scalar gate_threshold() const {
        return stats::chi2_quantile_dof1(Scalar(1) - tail_probability);
    }
};

template <typename Scalar>
struct IgmmComponent {
    Scalar weight = Scalar(1);
    Scalar mean = Scalar(0);
    Scalar variance = Scalar(1);
    Scalar mass = Scalar(0);  // accumulated posterior N_k
    std::uint64_t age = 0;    // observations since creation v_k

    [[nodiscard]] Scalar squared_mahalanobis(Scalar d) const {
        const Scalar diff = d - mean;
        return diff * diff / variance;
    }
};

enum class IgmmPath { Created, Updated };

// Inlier sub-mixture set up for repeated CDF evaluation.
template <typename Scalar>
struct TruncatedMixture {
    std::vector<Scalar> weight, mean, sd;
    Scalar total = 0;

    [[nodiscard]] Scalar cdf(Scalar d) const {
        Scalar num = 0;
        for (std::size_t k = 0; k < weight.size(); ++k) num += weight[k] * stats::normal_cdf((d - mean[k]) / sd[k]);
        return std::clamp(num / total, Scalar(0), Scalar(1));
    }
};

template <typename Scalar>
class Igmm {
public:
    using Component = IgmmComponent<Scalar>;
    using Config = IgmmConfig<Scalar>;
    using Responsibilities = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Igmm() : Igmm(Config{}) {}

    explicit Igmm(const Config& config) : config_(config) {
        config_.validate();
        gate_ = config_.gate_threshold();
    }

    // Restores a checkpointed model. Weights are taken as given.
    Igmm(const Config& config, std::vector<Component> components, std::uint64_t observations)
        : Igmm(config) {
        if (components.size() > config_.max_components)
            throw DomainError("Igmm: more components than the configured maximum");
        for (const auto& c : components)
            if (!(c.variance > 0) || !std::isfinite(c.mean) || !(c.weight >= 0) || !(c.mass >= 0))
                throw DomainError("Igmm: invalid component");
        components_ = std::move(components);
        observations_ = observations;
    }

    [[nodiscard]] const Config& config() const noexcept { return config_; }
    [[nodiscard]] const std::vector<Component>& components() const noexcept { return components_; }
    [[nodiscard]] std::size_t size() const noexcept { return components_.size(); }
    [[nodiscard]] bool empty() const noexcept { return components_.empty(); }
    [[nodiscard]] std::uint64_t observations() const noexcept { return observations_; }
    [[nodiscard]] Scalar gate_threshold() const noexcept { return gate_; }

    // Responsibility of every component for d. When all densities underflow the
    // nearest-mean component takes full responsibility.
    [[nodiscard]] Responsibilities posterior(Scalar d) const {
        require_finite(d, "posterior");
        if (components_.empty()) throw StateError("posterior: model has no components");
        const auto count = static_cast<Eigen::Index>(components_.size());
        Responsibilities resp(count);
        Scalar total = 0;
        for (Eigen::Index k = 0; k < count; ++k) {
            const auto& c = components_[static_cast<std::size_t>(k)];
            resp(k) = c.weight * stats::gaussian_pdf(d, c.mean, c.variance);
            total += resp(k);
        }
        if (total > Scalar(0) && std::isfinite(total)) {
            resp /= total;
            return resp;
        }
        resp.setZero();
        resp(static_cast<Eigen::Index>(nearest_mean(d))) = Scalar(1);
        return resp;
    }

    [[nodiscard]] Scalar min_squared_mahalanobis(Scalar d) const {
        Scalar best = std::numeric_limits<Scalar>::infinity();
        for (const auto& c : components_) best = std::min(best, c.squared_mahalanobis(d));
        return best;
    }

    [[nodiscard]] bool update_gate_holds(Scalar d) const {
        return !components_.empty() && min_squared_mahalanobis(d) < gate_;
    }

    // Existing components age by one observation; at capacity the
    // lightest component is discarded before the new one is appended.
    void create_component(Scalar d) {
        require_finite(d, "create_component");
        for (auto& c : components_) ++c.age;
        if (components_.size() >= config_.max_components) {
            auto lightest = std::min_element(
                components_.begin(), components_.end(),
                [](const Component& a, const Component& b) { return a.weight < b.weight; });
            components_.erase(lightest);
        }
        Component fresh;
        fresh.age = 1;
        fresh.mass = Scalar(1);
        fresh.mean = d;
        fresh.variance = config_.initial_variance;
        Scalar total_mass = fresh.mass;
        for (const auto& c : components_) total_mass += c.mass;
        fresh.weight = Scalar(1) / total_mass;
        components_.push_back(fresh);
        renormalize();
    }

    // The caller must have checked update_gate_holds(d).
    void update_components(Scalar d) {
        require_finite(d, "update_components");
        if (!update_gate_holds(d))
            throw StateError("update_components: update gate not satisfied; create a component");
        const Responsibilities resp = posterior(d);
        Scalar total_mass = 0;
        for (std::size_t k = 0; k < components_.size(); ++k) {
            auto& c = components_[k];
            const Scalar r = resp(static_cast<Eigen::Index>(k));
            c.age += 1;
            c.mass += r;
            const Scalar xi = c.mass > Scalar(0) ? r / c.mass : Scalar(0);
            const Scalar before = d - c.mean;
            c.mean += xi * before;
            const Scalar after = d - c.mean;
            c.variance = c.variance - xi * (c.variance - after * after) - xi * xi * before * before;
            c.variance = std::max(c.variance, config_.variance_floor);
            total_mass += c.mass;
        }
        for (auto& c : components_) c.weight = c.mass / total_mass;
        renormalize();
    }

    // Drops components older than min_age whose accumulated mass stayed below min_mass.
    // The heaviest component survives when every component qualifies.
    void remove_spurious() {
        const auto spurious = [this](const Component& c) {
            return c.age > config_.min_age && c.mass < config_.min_mass;
        };
        if (!components_.empty() && std::all_of(components_.begin(), components_.end(), spurious)) {
            const auto keep = *std::max_element(components_.begin(), components_.end(),
                                                [](const Component& a, const Component& b) { return a.mass < b.mass; });
            components_.assign(1, keep);
        } else {
            std::erase_if(components_, spurious);
        }
        renormalize();
    }

    IgmmPath observe(Scalar d) {
        require_finite(d, "observe");
        IgmmPath path;
        if (update_gate_holds(d)) {
            update_components(d);
            path = IgmmPath::Updated;
        } else {
            create_component(d);
            path = IgmmPath::Created;
        }
        remove_spurious();
        ++observations_;
        return path;
    }

    // Indices of the smallest prefix (in the configured mean order) whose
    // cumulative weight exceeds `portion`.
    [[nodiscard]] std::vector<std::size_t> select_inliers(Scalar portion) const {
        if (components_.empty()) throw StateError("select_inliers: model has no components");
        if (!(portion >= 0 && portion <= 1)) throw DomainError("select_inliers: portion must lie in [0,1]");
        std::vector<std::size_t> order(components_.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        const bool ascending = config_.inlier_order == InlierOrder::Ascending;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return ascending ? components_[a].mean < components_[b].mean
                             : components_[a].mean > components_[b].mean;
        });
        Scalar cumulative = 0;
        std::size_t m = 0;
        while (m < order.size()) {
            cumulative += components_[order[m]].weight;
            ++m;
            if (cumulative > portion) break;
        }
        order.resize(m);
        return order;
    }

    // Weighted CDF of the given component subset at d.
    [[nodiscard]] TruncatedMixture<Scalar> truncated(const std::vector<std::size_t>& inliers) const {
        if (inliers.empty()) throw StateError("truncated_cdf: empty inlier set");
        TruncatedMixture<Scalar> t;
        for (std::size_t k : inliers) {
            if (k >= components_.size()) throw StateError("truncated_cdf: inlier index out of range");
            const auto& c = components_[k];
            t.weight.push_back(c.weight);
            t.mean.push_back(c.mean);
            t.sd.push_back(std::sqrt(c.variance));
            t.total += c.weight;
        }
        if (!(t.total > 0)) throw StateError("truncated_cdf: inlier weights sum to zero");
        return t;
    }

    [[nodiscard]] Scalar truncated_cdf(const std::vector<std::size_t>& inliers, Scalar d) const {
        if (std::isnan(d)) throw DomainError("truncated_cdf: NaN argument");
        return truncated(inliers).cdf(d);
    }

    [[nodiscard]] Scalar density(Scalar d) const {
        Scalar p = 0;
        for (const auto& c : components_) p += c.weight * stats::gaussian_pdf(d, c.mean, c.variance);
        return p;
    }

    [[nodiscard]] Scalar total_weight() const {
        Scalar s = 0;
        for (const auto& c : components_) s += c.weight;
        return s;
    }

private:
    static void require_finite(Scalar d, const char* op) {
        if (!std::isfinite(d)) throw DomainError(std::string(op) + ": non-finite distance");
    }

    [[nodiscard]] std::size_t nearest_mean(Scalar d) const {
        std::size_t best = 0;
        for (std::size_t k = 1; k < components_.size(); ++k)
            if (std::abs(d - components_[k].mean) < std::abs(d - components_[best].mean)) best = k;
        return best;
    }

    void renormalize() {
        Scalar s = total_weight();
        if (components_.empty()) return;
        if (!(s > Scalar(0))) {
            for (auto& c : components_) c.weight = Scalar(1) / static_cast<Scalar>(components_.size());
            return;
        }
        for (auto& c : components_) c.weight /= s;
    }

    Config config_;
    Scalar gate_ = 0;
    std::vector<Component> components_;
    std::uint64_t observations_ = 0;
};

using IgmmModel = Igmm<double>;

}  // namespace hta
