#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "hta/appearance.hpp"
#include "hta/igmm.hpp"
#include "hta/kalman.hpp"

namespace hta {

using TrackId = std::uint64_t;

enum class TrackState { Tentative, Confirmed, Deleted };

struct Detection {
    BoundingBox box;
    Feature feature;
    std::size_t index = 0;  // row index within its frame in the source det file
};

struct Track {
    TrackId id = 0;
    TrackState state = TrackState::Tentative;
    KalmanState<double> kalman;
    FeatureGallery gallery;
    std::optional<Feature> smoothed;
    std::vector<double> records;  // historical model-domain distances D
    IgmmModel igmm;
    std::size_t hits = 0;
    std::size_t time_since_update = 0;
    FrameIndex created_at = 0;
    FrameIndex last_update = 0;

    [[nodiscard]] bool confirmed() const noexcept { return state == TrackState::Confirmed; }
    [[nodiscard]] bool tentative() const noexcept { return state == TrackState::Tentative; }
    [[nodiscard]] std::size_t record_count() const noexcept { return records.size(); }
};

}  // namespace hta
