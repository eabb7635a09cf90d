#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hta/igmm.hpp"
#include "hta/kalman.hpp"
#include "hta/track.hpp"

namespace hta {

enum class StrategyKind { Cms, Knn, Ema, Hta };
enum class MatchingScheme { SingleShot, Cascade };

std::string to_string(StrategyKind kind);
StrategyKind parse_strategy_kind(const std::string& name);

struct Strategy {
    StrategyKind kind = StrategyKind::Ema;
    std::size_t k = 5;
    double eta = 0.9;
    double lambda = 0.9;
    std::size_t min_track_length = 15;
    double upsilon = 0.8;
    StrategyKind hta_base = StrategyKind::Ema;
    MatchingScheme hta_matching = MatchingScheme::SingleShot;

    static Strategy cms();
    static Strategy knn(std::size_t k = 5);
    static Strategy ema(double eta = 0.9);
    static Strategy hta(double lambda = 0.9, std::size_t min_track_length = 15, double upsilon = 0.8);

    void validate() const;
    // Which term supplies the raw distance (HTA resolves to its base).
    [[nodiscard]] StrategyKind distance_kind() const;
    [[nodiscard]] MatchingScheme matching() const;
    [[nodiscard]] std::string name() const;
};

struct GatingParams {
    double d_max = 0.2;
    bool motion_gating = true;
    double motion_threshold = kChi2Gate4Dof;
};

struct CostMatrix {
    Eigen::MatrixXd cost;      // detections x tracks; infeasible entries hold sentinel()
    Eigen::MatrixXd distance;  // raw distance term of every pair
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> feasible;
    double d_max = 0.2;

    [[nodiscard]] double sentinel() const noexcept { return d_max + 1e5; }
    [[nodiscard]] Eigen::Index rows() const noexcept { return cost.rows(); }
    [[nodiscard]] Eigen::Index cols() const noexcept { return cost.cols(); }
};

struct Match {
    std::size_t detection = 0;
    std::size_t track = 0;
    double distance = 0;  // raw distance term
    double cost = 0;

    friend bool operator==(const Match&, const Match&) = default;
};

struct Assignment {
    std::vector<Match> matches;  // sorted by detection index
    std::vector<std::size_t> unmatched_detections;
    std::vector<std::size_t> unmatched_tracks;
};

double distance_term(const Detection& detection, const Track& track, const Strategy& strategy);

// lambda * d + (1 - lambda) * CDF of the inlier mixture at d^(1/4), or d alone
// while the track has fewer than `min_track_length` records.
double hybrid_cost(double d_raw, const IgmmModel& model, std::size_t record_count, double lambda,
                   std::size_t min_track_length, double upsilon);

CostMatrix build_cost_matrix(std::span<const Detection> detections, std::span<const Track* const> tracks,
                             const Strategy& strategy, const GatingParams& gating,
                             const KalmanFilter<double>& filter);

Assignment solve_assignment(const CostMatrix& matrix);

// Solves only the given subsets of rows/cols; indices in the result refer to the full matrix.
Assignment solve_assignment(const CostMatrix& matrix, std::span<const std::size_t> rows,
                            std::span<const std::size_t> cols);

// Matching cascade: confirmed tracks in order of time since update, tentative tracks last.
Assignment cascade_match(const CostMatrix& matrix, std::span<const Track* const> tracks, std::size_t max_age);

Assignment associate(std::span<const Detection> detections, std::span<const Track* const> tracks,
                     const Strategy& strategy, const GatingParams& gating, const KalmanFilter<double>& filter,
                     std::size_t max_age);

// Appends d_raw^(1/4) to the track's records and feeds it to the track IGMM.
void record_assignment_distance(Track& track, double d_raw);

}  // namespace hta
