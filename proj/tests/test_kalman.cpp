#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "hta/kalman.hpp"

using namespace hta;

namespace {

BoundingBox box(double l, double t, double w, double h) {
    BoundingBox b;
    b.left = l;
    b.top = t;
    b.width = w;
    b.height = h;
    return b;
}

void expect_box_near(const BoundingBox& a, const BoundingBox& b, double tol) {
    EXPECT_NEAR(a.left, b.left, tol);
    EXPECT_NEAR(a.top, b.top, tol);
    EXPECT_NEAR(a.width, b.width, tol);
    EXPECT_NEAR(a.height, b.height, tol);
}

// Position/velocity filter for one coordinate, written with explicit 2x2 algebra.
struct ScalarKalman {
    double x = 0, v = 0;
    double pxx = 0, pxv = 0, pvv = 0;

    void predict(double q_pos, double q_vel) {
        x += v;
        const double nxx = pxx + 2 * pxv + pvv + q_pos;
        const double nxv = pxv + pvv;
        pvv += q_vel;
        pxx = nxx;
        pxv = nxv;
    }
    void update(double z, double r) {
        const double s = pxx + r;
        const double kx = pxx / s, kv = pxv / s;
        const double innov = z - x;
        x += kx * innov;
        v += kv * innov;
        const double nxx = (1 - kx) * pxx;
        const double nxv = (1 - kx) * pxv;
        pvv -= kv * pxv;
        pxx = nxx;
        pxv = nxv;
    }
};

}  // namespace

TEST(Kalman, GateConstantIsChiSquareQuantile) {
    boost::math::chi_squared_distribution<double> chi(4);
    EXPECT_NEAR(boost::math::quantile(chi, 0.95), kChi2Gate4Dof, 1e-4);
}

TEST(Kalman, InitiateThenPredictKeepsTheBox) {
    KalmanFilter<double> kf;
    const BoundingBox b = box(100, 50, 40, 100);
    const auto s = kf.initiate(b);
    expect_box_near(KalmanFilter<double>::to_box(kf.predict(s)), b, 1e-12);
    EXPECT_EQ(kf.initiate(box(0, 0, 10, 10)).mean(2), 1.0);
    EXPECT_THROW(kf.initiate(box(0, 0, 0, 10)), DomainError);
}

TEST(Kalman, UpdateWithSameBox) {
    KalmanFilter<double> kf;
    const BoundingBox b = box(10, 20, 30, 60);
    const auto s = kf.initiate(b);
    const auto u = kf.update(s, b);
    EXPECT_LT((u.mean - s.mean).norm(), 1e-9);
    EXPECT_LT(u.covariance(0, 0), s.covariance(0, 0));
}

TEST(Kalman, PredictWithVelocity) {
    KalmanFilter<double> kf;
    auto s = kf.initiate(box(0, 0, 20, 50));
    s.mean(4) = 1;
    const auto p = kf.predict(s);
    EXPECT_DOUBLE_EQ(p.mean(0), s.mean(0) + 1);
    EXPECT_DOUBLE_EQ(p.mean(1), s.mean(1));
}

TEST(Kalman, PredictGrowsCovariance) {
    KalmanFilter<double> kf;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(10, 300);
    for (int i = 0; i < 200; ++i) {
        auto s = kf.initiate(box(u(rng), u(rng), u(rng) / 3, u(rng)));
        for (int k = 0; k < i % 5; ++k) s = kf.update(kf.predict(s), box(u(rng), u(rng), 30, 90));
        EXPECT_GE(kf.predict(s).covariance.trace(), s.covariance.trace());
    }
}

TEST(Kalman, PosteriorVarianceShrinks) {
    KalmanFilter<double> kf;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-5, 5);
    auto s = kf.initiate(box(100, 100, 40, 100));
    for (int i = 0; i < 50; ++i) {
        const auto prior = kf.predict(s);
        s = kf.update(prior, box(100 + u(rng), 100 + u(rng), 40, 100));
        for (int d = 0; d < 4; ++d) EXPECT_LT(s.covariance(d, d), prior.covariance(d, d));
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 8, 8>> es(s.covariance);
        EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
    }
}

TEST(Kalman, ConvergesLikeScalarOracle) {
    KalmanFilter<double> kf;
    const double h = 100, wp = 1.0 / 20, wv = 1.0 / 160;
    auto s = kf.initiate(box(0, 0, 40, h));
    ScalarKalman o;
    o.x = 20;
    o.pxx = std::pow(2 * wp * h, 2);
    o.pvv = std::pow(10 * wv * h, 2);
    const BoundingBox target = box(80, 0, 40, h);
    double prev = 0;
    for (int i = 0; i < 40; ++i) {
        s = kf.update(kf.predict(s), target);
        o.predict(std::pow(wp * h, 2), std::pow(wv * h, 2));
        o.update(target.center_x(), std::pow(wp * h, 2));
        EXPECT_NEAR(s.mean(0), o.x, 1e-9 * std::max(1.0, std::abs(o.x)));
        EXPECT_NEAR(s.mean(4), o.v, 1e-9);
        EXPECT_NEAR(s.covariance(0, 0), o.pxx, 1e-9 * o.pxx);
        prev = std::abs(s.mean(0) - target.center_x());
    }
    EXPECT_LT(prev, 1.0);
}

TEST(Kalman, GateAdmitsMeanRejectsFar) {
    KalmanFilter<double> kf;
    const auto s = kf.predict(kf.initiate(box(100, 100, 40, 100)));
    const BoundingBox at_mean = KalmanFilter<double>::to_box(s);
    EXPECT_NEAR(kf.squared_mahalanobis(s, at_mean), 0.0, 1e-12);
    const std::vector<BoundingBox> boxes{at_mean, box(1e6, 1e6, 40, 100)};
    const auto mask = kf.gate(s, boxes);
    EXPECT_TRUE(mask[0]);
    EXPECT_FALSE(mask[1]);
}

TEST(Kalman, GateMatchesExplicitInverse) {
    KalmanFilter<double> kf;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-30, 30);
    for (int i = 0; i < 300; ++i) {
        auto s = kf.initiate(box(200 + u(rng), 200 + u(rng), 40 + u(rng) / 3, 100 + u(rng)));
        for (int k = 0; k < i % 4; ++k) s = kf.update(kf.predict(s), box(200 + u(rng), 200 + u(rng), 40, 100));
        s = kf.predict(s);
        const Eigen::Matrix<double, 4, 8> hmat = Eigen::Matrix<double, 4, 8>::Identity();
        Eigen::Matrix4d cov = hmat * s.covariance * hmat.transpose();
        const double h = s.mean(3);
        cov.diagonal() += Eigen::Vector4d(h / 20, h / 20, 0.1, h / 20).array().square().matrix();
        std::vector<BoundingBox> boxes;
        for (int j = 0; j < 10; ++j) boxes.push_back(box(180 + u(rng), 180 + u(rng), 40 + u(rng) / 10, 100 + u(rng) / 3));
        const auto mask = kf.gate(s, boxes);
        for (std::size_t j = 0; j < boxes.size(); ++j) {
            const Eigen::Vector4d diff = KalmanFilter<double>::to_measurement(boxes[j]) - s.mean.head<4>();
            const double m2 = diff.dot(cov.inverse() * diff);
            EXPECT_NEAR(kf.squared_mahalanobis(s, boxes[j]), m2, 1e-8 * std::max(1.0, m2));
            if (std::abs(m2 - kChi2Gate4Dof) > 1e-6) EXPECT_EQ(mask[j], m2 < kChi2Gate4Dof);
        }
    }
}

TEST(Kalman, FloatInstantiation) {
    KalmanFilter<float> kf;
    const auto s = kf.initiate(box(10, 10, 20, 40));
    const auto u = kf.update(kf.predict(s), box(12, 10, 20, 40));
    EXPECT_GT(u.mean(0), s.mean(0));
}

TEST(Iou, Basics) {
    EXPECT_DOUBLE_EQ(iou(box(0, 0, 10, 10), box(0, 0, 10, 10)), 1.0);
    EXPECT_DOUBLE_EQ(iou(box(0, 0, 10, 10), box(20, 0, 10, 10)), 0.0);
    EXPECT_DOUBLE_EQ(iou(box(0, 0, 10, 10), box(5, 0, 10, 10)), 50.0 / 150.0);
}
