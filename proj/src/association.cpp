#include "hta/association.hpp"

#include <algorithm>
#include <optional>

#include "hta/error.hpp"
#include "hta/hungarian.hpp"

namespace hta {

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Cms: return "cms";
        case StrategyKind::Knn: return "knn";
        case StrategyKind::Ema: return "ema";
        case StrategyKind::Hta: return "hta";
    }
    return "?";
}

StrategyKind parse_strategy_kind(const std::string& name) {
    if (name == "cms") return StrategyKind::Cms;
    if (name == "knn") return StrategyKind::Knn;
    if (name == "ema") return StrategyKind::Ema;
    if (name == "hta") return StrategyKind::Hta;
    throw InputError("unknown strategy '" + name + "' (expected cms, knn, ema or hta)");
}

Strategy Strategy::cms() {
    Strategy s;
    s.kind = StrategyKind::Cms;
    return s;
}

Strategy Strategy::knn(std::size_t k) {
    Strategy s;
    s.kind = StrategyKind::Knn;
    s.k = k;
    return s;
}

Strategy Strategy::ema(double eta) {
    Strategy s;
    s.kind = StrategyKind::Ema;
    s.eta = eta;
    return s;
}

Strategy Strategy::hta(double lambda, std::size_t min_track_length, double upsilon) {
    Strategy s;
    s.kind = StrategyKind::Hta;
    s.lambda = lambda;
    s.min_track_length = min_track_length;
    s.upsilon = upsilon;
    return s;
}

void Strategy::validate() const {
    if (k < 1) throw DomainError("strategy: k must be >= 1");
    if (!(eta >= 0 && eta <= 1)) throw DomainError("strategy: eta must lie in [0,1]");
    if (!(lambda >= 0 && lambda <= 1)) throw DomainError("strategy: lambda must lie in [0,1]");
    if (min_track_length < 1) throw DomainError("strategy: minimum track length must be >= 1");
    if (!(upsilon >= 0 && upsilon <= 1)) throw DomainError("strategy: upsilon must lie in [0,1]");
    if (hta_base == StrategyKind::Hta) throw DomainError("strategy: HTA base must be cms, knn or ema");
}

StrategyKind Strategy::distance_kind() const { return kind == StrategyKind::Hta ? hta_base : kind; }

MatchingScheme Strategy::matching() const {
    switch (kind) {
        case StrategyKind::Cms: return MatchingScheme::Cascade;
        case StrategyKind::Hta: return hta_matching;
        default: return MatchingScheme::SingleShot;
    }
}

std::string Strategy::name() const {
    const auto fmt = [](double v) {
        std::string s = std::to_string(v);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    };
    switch (kind) {
        case StrategyKind::Cms: return "CMS";
        case StrategyKind::Knn: return "kNN(k=" + std::to_string(k) + ")";
        case StrategyKind::Ema: return "EMA(eta=" + fmt(eta) + ")";
        case StrategyKind::Hta:
            return "HTA(lambda=" + fmt(lambda) + ",L=" + std::to_string(min_track_length) +
                   ",upsilon=" + fmt(upsilon) + ")";
    }
    return "?";
}

double distance_term(const Detection& detection, const Track& track, const Strategy& strategy) {
    switch (strategy.distance_kind()) {
        case StrategyKind::Cms: return min_distance(detection.feature, track.gallery);
        case StrategyKind::Knn: return knn_mean_distance(detection.feature, track.gallery, strategy.k);
        default:
            if (!track.smoothed) throw StateError("distance_term: track has no smoothed feature");
            return cosine_distance(detection.feature, *track.smoothed);
    }
}

namespace {

double mix(double d_raw, const TruncatedMixture<double>& inliers, double lambda) {
    return lambda * d_raw + (1.0 - lambda) * inliers.cdf(to_model_domain(d_raw));
}

bool hybrid_active(const IgmmModel& model, std::size_t record_count, std::size_t min_track_length) {
    return record_count >= min_track_length && !model.empty();
}

}  // namespace

double hybrid_cost(double d_raw, const IgmmModel& model, std::size_t record_count, double lambda,
                   std::size_t min_track_length, double upsilon) {
    if (!(d_raw >= 0.0)) {
        if (!(d_raw > -1e-12)) throw DomainError("hybrid_cost: negative distance");
        d_raw = 0.0;
    }
    if (!hybrid_active(model, record_count, min_track_length)) return d_raw;
    return mix(d_raw, model.truncated(model.select_inliers(upsilon)), lambda);
}

CostMatrix build_cost_matrix(std::span<const Detection> detections, std::span<const Track* const> tracks,
                             const Strategy& strategy, const GatingParams& gating,
                             const KalmanFilter<double>& filter) {
    const auto n = static_cast<Eigen::Index>(detections.size());
    const auto m = static_cast<Eigen::Index>(tracks.size());
    CostMatrix out;
    out.d_max = gating.d_max;
    out.cost.setZero(n, m);
    out.distance.setZero(n, m);
    out.feasible.setConstant(n, m, true);
    if (n == 0 || m == 0) return out;

    const Eigen::Index dim = detections.front().feature.dim();
    Eigen::MatrixXd queries(dim, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& f = detections[static_cast<std::size_t>(i)].feature;
        if (f.dim() != dim) throw DomainError("build_cost_matrix: detection feature dimensions differ");
        queries.col(i) = f.values();
    }

    switch (strategy.distance_kind()) {
        case StrategyKind::Ema: {
            Eigen::MatrixXd smoothed(dim, m);
            for (Eigen::Index j = 0; j < m; ++j) {
                const Track& t = *tracks[static_cast<std::size_t>(j)];
                if (!t.smoothed) throw StateError("build_cost_matrix: track has no smoothed feature");
                if (t.smoothed->dim() != dim) throw DomainError("build_cost_matrix: feature dimension mismatch");
                smoothed.col(j) = t.smoothed->values();
            }
            out.distance.noalias() = queries.transpose() * smoothed;
            out.distance.array() = 1.0 - out.distance.array();
            break;
        }
        case StrategyKind::Cms:
        case StrategyKind::Knn: {
            const bool knn = strategy.distance_kind() == StrategyKind::Knn;
            std::vector<double> row;
            for (Eigen::Index j = 0; j < m; ++j) {
                const Track& t = *tracks[static_cast<std::size_t>(j)];
                const Eigen::MatrixXd d = gallery_distances(queries, t.gallery);
                if (!knn) {
                    out.distance.col(j) = d.rowwise().minCoeff();
                    continue;
                }
                row.resize(static_cast<std::size_t>(d.cols()));
                for (Eigen::Index i = 0; i < n; ++i) {
                    for (Eigen::Index c = 0; c < d.cols(); ++c) row[static_cast<std::size_t>(c)] = d(i, c);
                    out.distance(i, j) = mean_of_smallest_inplace(row, strategy.k);
                }
            }
            break;
        }
        case StrategyKind::Hta: throw DomainError("build_cost_matrix: invalid distance kind");
    }

    std::vector<BoundingBox> boxes;
    if (gating.motion_gating) {
        boxes.reserve(detections.size());
        for (const auto& det : detections) boxes.push_back(det.box);
    }

    const bool hybrid = strategy.kind == StrategyKind::Hta;
    const double sentinel = out.sentinel();
    TruncatedMixture<double> inliers;
    for (Eigen::Index j = 0; j < m; ++j) {
        const Track& t = *tracks[static_cast<std::size_t>(j)];
        std::vector<bool> admitted;
        if (gating.motion_gating) admitted = filter.gate(t.kalman, boxes, gating.motion_threshold);
        const bool use_model = hybrid && hybrid_active(t.igmm, t.record_count(), strategy.min_track_length);
        if (use_model) inliers = t.igmm.truncated(t.igmm.select_inliers(strategy.upsilon));
        for (Eigen::Index i = 0; i < n; ++i) {
            double d = out.distance(i, j);
            if (d < 0.0) d = out.distance(i, j) = 0.0;
            const bool ok = d <= gating.d_max && (!gating.motion_gating || admitted[static_cast<std::size_t>(i)]);
            out.feasible(i, j) = ok;
            if (!ok) {
                out.cost(i, j) = sentinel;
                continue;
            }
            out.cost(i, j) = use_model ? mix(d, inliers, strategy.lambda) : d;
        }
    }
    return out;
}

Assignment solve_assignment(const CostMatrix& matrix, std::span<const std::size_t> rows,
                            std::span<const std::size_t> cols) {
    Assignment out;
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto m = static_cast<Eigen::Index>(cols.size());
    std::vector<char> row_used(rows.size(), 0), col_used(cols.size(), 0);
    if (n > 0 && m > 0) {
        Eigen::MatrixXd sub(n, m);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                sub(i, j) = matrix.cost(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]),
                                        static_cast<Eigen::Index>(cols[static_cast<std::size_t>(j)]));
        const auto row_to_col = min_cost_assignment(sub);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index j = row_to_col[static_cast<std::size_t>(i)];
            if (j == kUnassigned) continue;
            const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]);
            const auto c = static_cast<Eigen::Index>(cols[static_cast<std::size_t>(j)]);
            if (!matrix.feasible(r, c)) continue;
            out.matches.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c), matrix.distance(r, c),
                                   matrix.cost(r, c)});
            row_used[static_cast<std::size_t>(i)] = 1;
            col_used[static_cast<std::size_t>(j)] = 1;
        }
    }
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (!row_used[i]) out.unmatched_detections.push_back(rows[i]);
    for (std::size_t j = 0; j < cols.size(); ++j)
        if (!col_used[j]) out.unmatched_tracks.push_back(cols[j]);
    std::sort(out.matches.begin(), out.matches.end(),
              [](const Match& a, const Match& b) { return a.detection < b.detection; });
    std::sort(out.unmatched_detections.begin(), out.unmatched_detections.end());
    std::sort(out.unmatched_tracks.begin(), out.unmatched_tracks.end());
    return out;
}

Assignment solve_assignment(const CostMatrix& matrix) {
    std::vector<std::size_t> rows(static_cast<std::size_t>(matrix.rows()));
    std::vector<std::size_t> cols(static_cast<std::size_t>(matrix.cols()));
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = j;
    return solve_assignment(matrix, rows, cols);
}

Assignment cascade_match(const CostMatrix& matrix, std::span<const Track* const> tracks, std::size_t max_age) {
    if (static_cast<Eigen::Index>(tracks.size()) != matrix.cols())
        throw DomainError("cascade_match: track list does not match the cost matrix");
    Assignment out;
    std::vector<std::size_t> remaining(static_cast<std::size_t>(matrix.rows()));
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
    std::vector<char> track_matched(tracks.size(), 0);

    auto run_level = [&](const std::vector<std::size_t>& cols) {
        if (remaining.empty() || cols.empty()) return;
        Assignment level = solve_assignment(matrix, remaining, cols);
        for (const auto& match : level.matches) {
            out.matches.push_back(match);
            track_matched[match.track] = 1;
        }
        remaining = std::move(level.unmatched_detections);
    };

    std::vector<std::size_t> cols;
    for (std::size_t level = 1; level <= max_age + 1; ++level) {
        cols.clear();
        for (std::size_t j = 0; j < tracks.size(); ++j)
            if (!tracks[j]->tentative() && tracks[j]->time_since_update + 1 == level) cols.push_back(j);
        run_level(cols);
    }
    cols.clear();
    for (std::size_t j = 0; j < tracks.size(); ++j)
        if (tracks[j]->tentative() || (!tracks[j]->tentative() && tracks[j]->time_since_update > max_age))
            cols.push_back(j);
    run_level(cols);

    out.unmatched_detections = remaining;
    for (std::size_t j = 0; j < tracks.size(); ++j)
        if (!track_matched[j]) out.unmatched_tracks.push_back(j);
    std::sort(out.matches.begin(), out.matches.end(),
              [](const Match& a, const Match& b) { return a.detection < b.detection; });
    std::sort(out.unmatched_detections.begin(), out.unmatched_detections.end());
    return out;
}

Assignment associate(std::span<const Detection> detections, std::span<const Track* const> tracks,
                     const Strategy& strategy, const GatingParams& gating, const KalmanFilter<double>& filter,
                     std::size_t max_age) {
    const CostMatrix matrix = build_cost_matrix(detections, tracks, strategy, gating, filter);
    if (strategy.matching() == MatchingScheme::Cascade) return cascade_match(matrix, tracks, max_age);
    return solve_assignment(matrix);
}

void record_assignment_distance(Track& track, double d_raw) {
    const double d = to_model_domain(d_raw);
    track.records.push_back(d);
    track.igmm.observe(d);
}

}  // namespace hta
