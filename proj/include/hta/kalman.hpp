#pragma once

// Constant-velocity Kalman filter in (cx, cy, aspect, height) image space with
// height-scaled noise, plus squared-Mahalanobis gating of candidate boxes.

#include <cmath>
#include <algorithm>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "hta/error.hpp"

namespace hta {

struct BoundingBox {
    double left = 0;
    double top = 0;
    double width = 1;
    double height = 1;
    double confidence = 1;

    [[nodiscard]] double center_x() const { return left + width / 2; }
    [[nodiscard]] double center_y() const { return top + height / 2; }
    [[nodiscard]] double area() const { return width * height; }
    [[nodiscard]] bool valid() const {
        return std::isfinite(left) && std::isfinite(top) && width > 0 && height > 0 &&
               std::isfinite(width) && std::isfinite(height);
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline double iou(const BoundingBox& a, const BoundingBox& b) {
    const double ix = std::min(a.left + a.width, b.left + b.width) - std::max(a.left, b.left);
    const double iy = std::min(a.top + a.height, b.top + b.height) - std::max(a.top, b.top);
    if (ix <= 0 || iy <= 0) return 0.0;
    const double inter = ix * iy;
    return inter / (a.area() + b.area() - inter);
}

// 0.95 quantile of chi-square with 4 degrees of freedom.
inline constexpr double kChi2Gate4Dof = 9.4877;

template <typename Scalar>
struct KalmanState {
    using Vector = Eigen::Matrix<Scalar, 8, 1>;
    using Matrix = Eigen::Matrix<Scalar, 8, 8>;
    Vector mean = Vector::Zero();
    Matrix covariance = Matrix::Identity();
};

template <typename Scalar>
struct KalmanNoise {
    Scalar position_weight = Scalar(1) / Scalar(20);
    Scalar velocity_weight = Scalar(1) / Scalar(160);
};

template <typename Scalar>
class KalmanFilter {
public:
    using State = KalmanState<Scalar>;
    using Vector8 = Eigen::Matrix<Scalar, 8, 1>;
    using Matrix8 = Eigen::Matrix<Scalar, 8, 8>;
    using Vector4 = Eigen::Matrix<Scalar, 4, 1>;
    using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;
    using Matrix48 = Eigen::Matrix<Scalar, 4, 8>;

    explicit KalmanFilter(KalmanNoise<Scalar> noise = {}) : noise_(noise) {
        motion_.setIdentity();
        for (int i = 0; i < 4; ++i) motion_(i, 4 + i) = Scalar(1);
        observation_.setZero();
        for (int i = 0; i < 4; ++i) observation_(i, i) = Scalar(1);
    }

    [[nodiscard]] const KalmanNoise<Scalar>& noise() const noexcept { return noise_; }

    static Vector4 to_measurement(const BoundingBox& box) {
        return Vector4(static_cast<Scalar>(box.center_x()), static_cast<Scalar>(box.center_y()),
                       static_cast<Scalar>(box.width / box.height), static_cast<Scalar>(box.height));
    }

    static BoundingBox to_box(const State& state, double confidence = 1.0) {
        BoundingBox b;
        b.height = static_cast<double>(state.mean(3));
        b.width = static_cast<double>(state.mean(2) * state.mean(3));
        b.left = static_cast<double>(state.mean(0)) - b.width / 2;
        b.top = static_cast<double>(state.mean(1)) - b.height / 2;
        b.confidence = confidence;
        return b;
    }

    [[nodiscard]] State initiate(const BoundingBox& box) const {
        if (!box.valid()) throw DomainError("KalmanFilter::initiate: invalid box");
        State s;
        s.mean.setZero();
        s.mean.template head<4>() = to_measurement(box);
        const Scalar h = s.mean(3);
        const Scalar wp = noise_.position_weight;
        const Scalar wv = noise_.velocity_weight;
        Vector8 std_dev;
        std_dev << 2 * wp * h, 2 * wp * h, Scalar(1e-2), 2 * wp * h, 10 * wv * h, 10 * wv * h, Scalar(1e-5),
            10 * wv * h;
        s.covariance = std_dev.array().square().matrix().asDiagonal();
        return s;
    }

    [[nodiscard]] State predict(const State& state) const {
        const Scalar h = state.mean(3);
        const Scalar wp = noise_.position_weight;
        const Scalar wv = noise_.velocity_weight;
        Vector8 std_dev;
        std_dev << wp * h, wp * h, Scalar(1e-2), wp * h, wv * h, wv * h, Scalar(1e-5), wv * h;
        State out;
        out.mean = motion_ * state.mean;
        out.covariance = motion_ * state.covariance * motion_.transpose();
        out.covariance.diagonal() += std_dev.array().square().matrix();
        symmetrize(out.covariance);
        return out;
    }

    // Predicted measurement distribution (mean, innovation covariance).
    [[nodiscard]] std::pair<Vector4, Matrix4> project(const State& state) const {
        const Scalar h = state.mean(3);
        const Scalar wp = noise_.position_weight;
        Vector4 std_dev(wp * h, wp * h, Scalar(1e-1), wp * h);
        Matrix4 cov = observation_ * state.covariance * observation_.transpose();
        cov.diagonal() += std_dev.array().square().matrix();
        return {observation_ * state.mean, cov};
    }

    // Joseph-form correction keeps the covariance symmetric positive definite.
    [[nodiscard]] State update(const State& state, const BoundingBox& box) const {
        if (!box.valid()) throw DomainError("KalmanFilter::update: invalid box");
        const auto [predicted, innovation_cov] = project(state);
        Eigen::LLT<Matrix4> llt(innovation_cov);
        if (llt.info() != Eigen::Success) throw std::runtime_error("KalmanFilter::update: innovation covariance not PD");
        const Matrix48 ph_t = (state.covariance * observation_.transpose()).transpose();
        const Eigen::Matrix<Scalar, 8, 4> gain = llt.solve(ph_t).transpose();
        const Vector4 innovation = to_measurement(box) - predicted;
        State out;
        out.mean = state.mean + gain * innovation;
        const Matrix8 i_kh = Matrix8::Identity() - gain * observation_;
        const Matrix4 measurement_noise = innovation_cov - observation_ * state.covariance * observation_.transpose();
        out.covariance = i_kh * state.covariance * i_kh.transpose() + gain * measurement_noise * gain.transpose();
        symmetrize(out.covariance);
        return out;
    }

    [[nodiscard]] Scalar squared_mahalanobis(const State& state, const BoundingBox& box) const {
        const auto [predicted, cov] = project(state);
        const Vector4 diff = to_measurement(box) - predicted;
        Eigen::LLT<Matrix4> llt(cov);
        const Vector4 z = llt.matrixL().solve(diff);
        return z.squaredNorm();
    }

    [[nodiscard]] std::vector<bool> gate(const State& state, std::span<const BoundingBox> boxes,
                                         Scalar threshold = Scalar(kChi2Gate4Dof)) const {
        const auto [predicted, cov] = project(state);
        Eigen::LLT<Matrix4> llt(cov);
        std::vector<bool> mask(boxes.size());
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            const Vector4 z = llt.matrixL().solve(to_measurement(boxes[i]) - predicted);
            mask[i] = z.squaredNorm() < threshold;
        }
        return mask;
    }

private:
    static void symmetrize(Matrix8& m) { m = (m + m.transpose()) / Scalar(2); }

    KalmanNoise<Scalar> noise_;
    Matrix8 motion_;
    Matrix48 observation_;
};

}  // namespace hta
