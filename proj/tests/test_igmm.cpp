#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "hta/igmm.hpp"

using namespace hta;
using Component = IgmmComponent<double>;

namespace {

Component comp(double weight, double mean, double variance, double mass, std::uint64_t age) {
    Component c;
    c.weight = weight;
    c.mean = mean;
    c.variance = variance;
    c.mass = mass;
    c.age = age;
    return c;
}

IgmmModel model_of(std::vector<Component> cs, IgmmConfig<double> cfg = {}) {
    return IgmmModel(cfg, std::move(cs), 0);
}

double weight_sum(const IgmmModel& m) {
    double s = 0;
    for (const auto& c : m.components()) s += c.weight;
    return s;
}

// Textbook normal density, written out independently of the library.
double normal(double x, double mu, double var) {
    return std::exp(-(x - mu) * (x - mu) / (2 * var)) / std::sqrt(2 * M_PI * var);
}

}  // namespace

TEST(IgmmPosterior, SingleComponentTakesAll) {
    auto m = model_of({comp(1, 0.7, 0.005, 1, 1)});
    for (double d : {0.0, 0.7, 1.3, 40.0}) {
        const auto r = m.posterior(d);
        ASSERT_EQ(r.size(), 1);
        EXPECT_DOUBLE_EQ(r(0), 1.0);
    }
}

TEST(IgmmPosterior, SymmetricPair) {
    auto m = model_of({comp(0.5, 0.4, 0.01, 2, 2), comp(0.5, 0.8, 0.01, 2, 2)});
    const auto r = m.posterior(0.6);
    EXPECT_NEAR(r(0), 0.5, 1e-15);
    EXPECT_NEAR(r(1), 0.5, 1e-15);
}

TEST(IgmmPosterior, AgreesWithDirectEvaluation) {
    auto m = model_of({comp(0.9, 0.5, 0.005, 9, 10), comp(0.1, 0.9, 0.005, 1, 10)});
    const double a = 0.9 * normal(0.52, 0.5, 0.005);
    const double b = 0.1 * normal(0.52, 0.9, 0.005);
    const auto r = m.posterior(0.52);
    EXPECT_NEAR(r(0), a / (a + b), 1e-14);
    EXPECT_NEAR(r(1), b / (a + b), 1e-14);
}

TEST(IgmmPosterior, UnderflowFallsBackToNearestMean) {
    auto m = model_of({comp(0.5, 0.2, 1e-6, 2, 2), comp(0.5, 0.4, 1e-6, 2, 2)});
    const auto r = m.posterior(50.0);
    EXPECT_EQ(r(0), 0.0);
    EXPECT_EQ(r(1), 1.0);
}

TEST(IgmmPosterior, EmptyModelIsAStateError) {
    IgmmModel m;
    EXPECT_THROW((void)m.posterior(0.5), StateError);
    EXPECT_THROW((void)m.posterior(std::nan("")), DomainError);
}

TEST(IgmmCreate, FirstComponent) {
    IgmmModel m;
    m.create_component(0.75);
    ASSERT_EQ(m.size(), 1u);
    const auto& c = m.components()[0];
    EXPECT_EQ(c.weight, 1.0);
    EXPECT_EQ(c.mean, 0.75);
    EXPECT_EQ(c.variance, 0.005);
    EXPECT_EQ(c.mass, 1.0);
    EXPECT_EQ(c.age, 1u);
}

TEST(IgmmCreate, NewWeightFromAccumulatedMass) {
    auto m = model_of({comp(1, 0.6, 0.005, 3, 3)});
    m.create_component(1.1);
    ASSERT_EQ(m.size(), 2u);
    // 1/(3+1) against the old weight 1, then renormalized
    EXPECT_NEAR(m.components()[1].weight / m.components()[0].weight, 0.25, 1e-15);
    EXPECT_NEAR(weight_sum(m), 1.0, 1e-15);
    EXPECT_EQ(m.components()[0].age, 4u);
}

TEST(IgmmCreate, AtCapacityDropsLightest) {
    std::vector<Component> cs;
    const double w[] = {0.4, 0.3, 0.15, 0.1, 0.05};
    for (int k = 0; k < 5; ++k) cs.push_back(comp(w[k], 0.3 + 0.1 * k, 0.005, 10 * w[k], 20));
    auto m = model_of(cs);
    m.create_component(2.0);
    ASSERT_EQ(m.size(), 5u);
    for (const auto& c : m.components()) EXPECT_NE(c.mean, 0.7);
    EXPECT_EQ(m.components().back().mean, 2.0);
    EXPECT_NEAR(weight_sum(m), 1.0, 1e-15);
}

TEST(IgmmUpdate, FixedPointAtMean) {
    auto m = model_of({comp(1, 0.7, 0.005, 1, 1)});
    m.update_components(0.7);
    const auto& c = m.components()[0];
    EXPECT_DOUBLE_EQ(c.mean, 0.7);
    EXPECT_NEAR(c.variance, 0.0025, 1e-17);
    EXPECT_EQ(c.age, 2u);
    EXPECT_EQ(c.mass, 2.0);
    EXPECT_EQ(c.weight, 1.0);
}

TEST(IgmmUpdate, HandEvaluatedStep) {
    auto m = model_of({comp(1, 0.6, 0.01, 4, 4)});
    m.update_components(0.65);
    const auto& c = m.components()[0];
    EXPECT_NEAR(c.mean, 0.61, 1e-15);
    EXPECT_NEAR(c.variance, 0.00822, 1e-15);
}

TEST(IgmmUpdate, FarComponentIsFrozen) {
    auto m = model_of({comp(0.5, 0.5, 0.001, 5, 6), comp(0.5, 3.0, 0.001, 5, 6)});
    m.update_components(0.5);
    const auto& far = m.components()[1];
    EXPECT_EQ(far.mean, 3.0);
    EXPECT_EQ(far.variance, 0.001);
    EXPECT_EQ(far.age, 7u);
}

TEST(IgmmUpdate, RequiresTheGate) {
    auto m = model_of({comp(1, 0.7, 0.005, 1, 1)});
    EXPECT_THROW(m.update_components(1.4), StateError);
}

TEST(IgmmUpdate, VarianceFloor) {
    IgmmConfig<double> cfg;
    cfg.initial_variance = 1e-9;
    IgmmModel m(cfg);
    for (int i = 0; i < 50; ++i) m.observe(0.5);
    for (const auto& c : m.components()) EXPECT_GE(c.variance, cfg.variance_floor);
}

TEST(IgmmRemove, AgeAndMassConjunction) {
    auto m = model_of({comp(0.2, 0.5, 0.005, 2.5, 6), comp(0.2, 0.6, 0.005, 0.5, 4),
                       comp(0.6, 0.7, 0.005, 3.5, 10)});
    m.remove_spurious();
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m.components()[0].mean, 0.6);
    EXPECT_EQ(m.components()[1].mean, 0.7);
    EXPECT_NEAR(weight_sum(m), 1.0, 1e-15);
}

TEST(IgmmRemove, AgeExactlyAtThresholdIsKept) {
    auto m = model_of({comp(1, 0.5, 0.005, 0.1, 5)});
    m.remove_spurious();
    EXPECT_EQ(m.size(), 1u);
}

TEST(IgmmRemove, NeverEmptiesTheModel) {
    auto m = model_of({comp(0.3, 0.5, 0.005, 2.0, 8), comp(0.7, 0.6, 0.005, 2.5, 9)});
    m.remove_spurious();
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m.components()[0].mean, 0.6);
    EXPECT_EQ(m.components()[0].weight, 1.0);
}

TEST(IgmmObserve, EmptyModelCreates) {
    IgmmModel m;
    EXPECT_EQ(m.observe(0.8), IgmmPath::Created);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m.components()[0].mean, 0.8);
    EXPECT_EQ(m.observations(), 1u);
}

TEST(IgmmObserve, GateDecidesThePath) {
    EXPECT_NEAR(IgmmModel().gate_threshold(), 6.6349, 1e-4);
    auto near = model_of({comp(1, 0.7, 0.005, 1, 1)});
    EXPECT_NEAR(near.min_squared_mahalanobis(0.71), 0.02, 1e-12);
    EXPECT_EQ(near.observe(0.71), IgmmPath::Updated);
    auto far = model_of({comp(1, 0.7, 0.005, 1, 1)});
    EXPECT_NEAR(far.min_squared_mahalanobis(1.4), 98.0, 1e-9);
    EXPECT_EQ(far.observe(1.4), IgmmPath::Created);
}

TEST(IgmmObserve, NonFiniteRejected) {
    IgmmModel m;
    EXPECT_THROW(m.observe(std::nan("")), DomainError);
    EXPECT_THROW(m.observe(HUGE_VAL), DomainError);
    EXPECT_TRUE(m.empty());
}

TEST(IgmmObserve, InvariantsOnRandomStreams) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0, 1.5);
    for (int s = 0; s < 200; ++s) {
        IgmmModel m;
        for (int i = 0; i < 60; ++i) {
            m.observe(u(rng));
            ASSERT_LE(m.size(), 5u);
            ASSERT_GE(m.size(), 1u);
            EXPECT_NEAR(weight_sum(m), 1.0, 1e-12);
            for (const auto& c : m.components()) ASSERT_GE(c.variance, 1e-8);
        }
    }
}

TEST(IgmmInliers, SingleComponent) {
    auto m = model_of({comp(1, 0.7, 0.005, 1, 1)});
    EXPECT_EQ(m.select_inliers(0.8), std::vector<std::size_t>{0});
    EXPECT_EQ(m.select_inliers(0.0), std::vector<std::size_t>{0});
}

TEST(IgmmInliers, SmallMeanPrefix) {
    auto both = model_of({comp(0.3, 0.9, 0.005, 3, 9), comp(0.7, 0.6, 0.005, 7, 9)});
    auto sel = both.select_inliers(0.8);
    EXPECT_EQ(sel, (std::vector<std::size_t>{1, 0}));
    auto one = model_of({comp(0.15, 0.9, 0.005, 1.5, 9), comp(0.85, 0.6, 0.005, 8.5, 9)});
    EXPECT_EQ(one.select_inliers(0.8), std::vector<std::size_t>{1});
}

TEST(IgmmInliers, DescendingOrderOption) {
    IgmmConfig<double> cfg;
    cfg.inlier_order = InlierOrder::Descending;
    auto m = model_of({comp(0.85, 0.6, 0.005, 8.5, 9), comp(0.15, 0.9, 0.005, 1.5, 9)}, cfg);
    EXPECT_EQ(m.select_inliers(0.8), (std::vector<std::size_t>{1, 0}));
}

TEST(IgmmInliers, MinimalPrefixProperty) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int s = 0; s < 500; ++s) {
        std::vector<Component> cs;
        const int k = 1 + static_cast<int>(u(rng) * 5);
        double total = 0;
        for (int i = 0; i < k; ++i) {
            cs.push_back(comp(u(rng) + 1e-3, u(rng), 0.005, 1, 1));
            total += cs.back().weight;
        }
        for (auto& c : cs) c.weight /= total;
        auto m = model_of(cs);
        const double portion = u(rng);
        const auto sel = m.select_inliers(portion);
        double cum = 0;
        for (std::size_t i = 0; i < sel.size(); ++i) {
            if (i > 0) EXPECT_LE(cs[sel[i - 1]].mean, cs[sel[i]].mean);
            if (i + 1 < sel.size()) {
                cum += cs[sel[i]].weight;
                EXPECT_LE(cum, portion + 1e-15);
            }
        }
        // every excluded component has a mean at least as large as the selected ones
        for (std::size_t j = 0; j < cs.size(); ++j)
            if (std::find(sel.begin(), sel.end(), j) == sel.end())
                EXPECT_GE(cs[j].mean, cs[sel.back()].mean);
    }
}

TEST(IgmmTruncatedCdf, MedianAndLimits) {
    auto m = model_of({comp(1, 0.7, 0.005, 1, 1)});
    EXPECT_NEAR(m.truncated_cdf({0}, 0.7), 0.5, 1e-15);
    EXPECT_EQ(m.truncated_cdf({0}, -HUGE_VAL), 0.0);
    EXPECT_EQ(m.truncated_cdf({0}, HUGE_VAL), 1.0);
    EXPECT_THROW((void)m.truncated_cdf({}, 0.5), StateError);
    EXPECT_THROW((void)m.truncated_cdf({0}, std::nan("")), DomainError);
}

TEST(IgmmTruncatedCdf, SymmetricPairAgainstQuadrature) {
    auto m = model_of({comp(0.4, 0.4, 0.01, 4, 9), comp(0.4, 0.8, 0.01, 4, 9), comp(0.2, 1.5, 0.01, 2, 9)});
    EXPECT_NEAR(m.truncated_cdf({0, 1}, 0.6), 0.5, 1e-15);
    const double area = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double x) { return 0.5 * normal(x, 0.4, 0.01) + 0.5 * normal(x, 0.8, 0.01); }, -1.0, 0.6, 10, 1e-14);
    EXPECT_NEAR(m.truncated_cdf({0, 1}, 0.6), area, 1e-12);
}

TEST(IgmmTruncatedCdf, Monotone) {
    auto m = model_of({comp(0.6, 0.5, 0.003, 6, 9), comp(0.4, 0.7, 0.01, 4, 9)});
    double prev = 0;
    for (double d = -0.5; d < 2; d += 0.01) {
        const double v = m.truncated_cdf({0, 1}, d);
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(IgmmRecovery, UnimodalSamples) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.7, 0.03);
    IgmmModel m;
    std::vector<double> xs;
    for (int i = 0; i < 500; ++i) {
        xs.push_back(g(rng));
        m.observe(xs.back());
    }
    const auto& c = *std::max_element(m.components().begin(), m.components().end(),
                                      [](auto& a, auto& b) { return a.weight < b.weight; });
    EXPECT_NEAR(c.mean, 0.7, 0.01);
    EXPECT_GT(c.weight, 0.9);
}

TEST(IgmmConfig, Validation) {
    IgmmConfig<double> cfg;
    cfg.tail_probability = 1.0;
    EXPECT_THROW(IgmmModel{cfg}, DomainError);
    cfg = {};
    cfg.max_components = 0;
    EXPECT_THROW(IgmmModel{cfg}, DomainError);
    cfg = {};
    cfg.initial_variance = 0;
    EXPECT_THROW(IgmmModel{cfg}, DomainError);
}

TEST(IgmmFloat, SinglePrecisionInstance) {
    Igmm<float> m;
    for (int i = 0; i < 100; ++i) m.observe(0.5f + 0.01f * static_cast<float>(i % 3));
    EXPECT_NEAR(m.total_weight(), 1.0f, 1e-5f);
    EXPECT_NEAR(m.truncated_cdf(m.select_inliers(0.8f), 0.51f), 0.5f, 0.2f);
}
