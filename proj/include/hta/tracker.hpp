#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "hta/association.hpp"
#include "hta/igmm.hpp"
#include "hta/kalman.hpp"
#include "hta/track.hpp"

namespace hta {

struct TrackerConfig {
    Strategy strategy;
    GatingParams gating;
    std::size_t n_init = 3;
    std::size_t max_age = 30;
    double score_threshold = 0.3;
    std::size_t gallery_budget = 100;
    IgmmConfig<double> igmm;
    KalmanNoise<double> noise;

    void validate() const;
};

struct ResultRow {
    FrameIndex frame = 0;
    TrackId id = 0;
    BoundingBox box;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

// Distance stream of one track, kept after the track is dropped so that runs can be inspected.
struct TrackHistory {
    TrackId id = 0;
    FrameIndex created_at = 0;
    std::vector<FrameIndex> frames;  // frame of every record
    std::vector<double> records;     // model-domain distances
    IgmmModel model;
};

class Tracker {
public:
    explicit Tracker(TrackerConfig config);

    // Advances one frame; returns confirmed tracks updated in this frame, ordered by id.
    std::vector<ResultRow> step(FrameIndex frame, std::span<const Detection> detections);

    [[nodiscard]] const TrackerConfig& config() const noexcept { return config_; }
    [[nodiscard]] const std::vector<Track>& tracks() const noexcept { return tracks_; }
    [[nodiscard]] std::size_t igmm_observations(TrackId id) const;
    // Archived and live tracks, keyed by id.
    [[nodiscard]] std::map<TrackId, TrackHistory> history() const;

private:
    void spawn(FrameIndex frame, const Detection& detection);
    void archive(const Track& track);

    TrackerConfig config_;
    KalmanFilter<double> filter_;
    std::vector<Track> tracks_;
    std::map<TrackId, TrackHistory> archive_;
    std::map<TrackId, std::size_t> observe_calls_;
    TrackId next_id_ = 1;
    FrameIndex last_frame_ = 0;
    bool started_ = false;
};

// frames[t] holds the detections of frame t + 1.
using DetectionStream = std::vector<std::vector<Detection>>;

// Runs a fresh tracker over frames 1..frames.size(). When `history` is given it receives
// every track's distance stream.
std::vector<ResultRow> run_sequence(const DetectionStream& frames, const TrackerConfig& config,
                                    std::map<TrackId, TrackHistory>* history = nullptr);

}  // namespace hta
