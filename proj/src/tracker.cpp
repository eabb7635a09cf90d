#include "hta/tracker.hpp"

#include <algorithm>

#include "hta/error.hpp"

namespace hta {

void TrackerConfig::validate() const {
    strategy.validate();
    igmm.validate();
    if (n_init < 1) throw DomainError("tracker: n_init must be >= 1");
    if (max_age < 1) throw DomainError("tracker: max_age must be >= 1");
    if (gallery_budget < 1) throw DomainError("tracker: gallery budget must be >= 1");
    if (!(gating.d_max >= 0)) throw DomainError("tracker: d_max must be >= 0");
}

Tracker::Tracker(TrackerConfig config) : config_(std::move(config)), filter_(config_.noise) { config_.validate(); }

std::size_t Tracker::igmm_observations(TrackId id) const {
    auto it = observe_calls_.find(id);
    return it == observe_calls_.end() ? 0 : it->second;
}

void Tracker::spawn(FrameIndex frame, const Detection& detection) {
    Track t;
    t.id = next_id_++;
    t.state = config_.n_init <= 1 ? TrackState::Confirmed : TrackState::Tentative;
    t.kalman = filter_.initiate(detection.box);
    t.gallery = FeatureGallery(config_.gallery_budget);
    t.gallery.push(frame, detection.feature);
    t.smoothed = detection.feature;
    t.igmm = IgmmModel(config_.igmm);
    t.hits = 1;
    t.time_since_update = 0;
    t.created_at = frame;
    t.last_update = frame;
    tracks_.push_back(std::move(t));
}

void Tracker::archive(const Track& track) {
    auto& h = archive_[track.id];
    h.id = track.id;
    h.created_at = track.created_at;
    h.model = track.igmm;
}

std::vector<ResultRow> Tracker::step(FrameIndex frame, std::span<const Detection> detections) {
    if (started_ && frame <= last_frame_)
        throw InputError("tracker: frame index " + std::to_string(frame) + " does not follow " +
                         std::to_string(last_frame_));
    started_ = true;
    last_frame_ = frame;

    for (auto& t : tracks_) t.kalman = filter_.predict(t.kalman);

    std::vector<const Track*> candidates;
    candidates.reserve(tracks_.size());
    for (const auto& t : tracks_) candidates.push_back(&t);
    const Assignment assignment =
        associate(detections, candidates, config_.strategy, config_.gating, filter_, config_.max_age);

    for (const Match& match : assignment.matches) {
        Track& t = tracks_[match.track];
        const Detection& det = detections[match.detection];
        t.kalman = filter_.update(t.kalman, det.box);
        t.gallery.push(frame, det.feature);
        t.smoothed = ema_update(t.smoothed, det.feature, config_.strategy.eta);
        record_assignment_distance(t, match.distance);
        ++observe_calls_[t.id];
        auto& h = archive_[t.id];
        h.frames.push_back(frame);
        h.records.push_back(t.records.back());
        t.hits += 1;
        t.time_since_update = 0;
        t.last_update = frame;
        if (t.tentative() && t.hits >= config_.n_init) t.state = TrackState::Confirmed;
    }

    for (std::size_t j : assignment.unmatched_tracks) {
        Track& t = tracks_[j];
        t.time_since_update += 1;
        if (t.tentative()) {
            t.state = TrackState::Deleted;
        } else if (t.time_since_update > config_.max_age) {
            t.state = TrackState::Deleted;
        }
    }

    for (std::size_t i : assignment.unmatched_detections)
        if (detections[i].box.confidence >= config_.score_threshold) spawn(frame, detections[i]);

    for (const auto& t : tracks_)
        if (t.state == TrackState::Deleted) archive(t);
    std::erase_if(tracks_, [](const Track& t) { return t.state == TrackState::Deleted; });

    std::vector<ResultRow> out;
    for (const auto& t : tracks_)
        if (t.confirmed() && t.time_since_update == 0) out.push_back({frame, t.id, KalmanFilter<double>::to_box(t.kalman)});
    std::sort(out.begin(), out.end(), [](const ResultRow& a, const ResultRow& b) { return a.id < b.id; });
    return out;
}

std::map<TrackId, TrackHistory> Tracker::history() const {
    std::map<TrackId, TrackHistory> out = archive_;
    for (const auto& t : tracks_) {
        auto& h = out[t.id];
        h.id = t.id;
        h.created_at = t.created_at;
        h.model = t.igmm;
    }
    return out;
}

std::vector<ResultRow> run_sequence(const DetectionStream& frames, const TrackerConfig& config,
                                    std::map<TrackId, TrackHistory>* history) {
    Tracker tracker(config);
    std::vector<ResultRow> rows;
    for (std::size_t t = 0; t < frames.size(); ++t) {
        auto out = tracker.step(static_cast<FrameIndex>(t + 1), frames[t]);
        rows.insert(rows.end(), out.begin(), out.end());
    }
    if (history) *history = tracker.history();
    return rows;
}

}  // namespace hta
