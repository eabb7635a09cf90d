#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "hta/io.hpp"

namespace hta::synthetic {

struct Waypoint {
    FrameIndex frame = 1;
    double x = 0;  // box center
    double y = 0;
};

// Piecewise-linear path; the target exists from the first to the last waypoint frame.
struct TargetPath {
    std::vector<Waypoint> waypoints;
    double width = 40;
    double height = 100;
};

// Frames [first, last] of `target` lose their detection. With `emit_occluder` a box
// is emitted near the target whose feature blends the target with the occluder.
struct OcclusionWindow {
    std::size_t target = 0;
    FrameIndex first = 1;
    FrameIndex last = 1;
    bool emit_occluder = true;
};

struct SyntheticSpec {
    std::string name = "synthetic";
    std::size_t frame_count = 100;
    double frame_rate = 30;
    std::vector<TargetPath> paths;
    Eigen::Index feature_dim = 32;
    // Per-identity mean features (columns). Empty: orthonormal means.
    Eigen::MatrixXd identity_means;
    double feature_noise = 0;          // sigma_f, per feature dimension
    std::vector<double> noise_scale;   // per-target multiplier of sigma_f (default 1)
    std::vector<OcclusionWindow> occlusions;
    double occluder_blend = 0.5;       // share of the occluder in an occluded feature
    double occluder_offset = 0.15;     // horizontal shift of the occluder box, in box widths
    // Targets hidden behind other targets (larger box bottom = closer to the camera):
    // the covered share c of the box mixes c * mutual_contamination of the front
    // target's mean into the feature; c >= full_occlusion drops the detection.
    double mutual_contamination = 0;
    double full_occlusion = 0.7;
    // The first entry_frames of every target multiply its noise by entry_noise_scale
    // (targets entering the view are partly cut off).
    FrameIndex entry_frames = 0;
    double entry_noise_scale = 1;
    double false_positive_rate = 0;    // expected false positives per frame
    double miss_rate = 0;              // per-target probability of a missed detection
    double box_jitter = 0;             // pixel standard deviation of box corners
    double image_width = 1920;
    double image_height = 1080;
    std::uint64_t seed = 0;

    void validate() const;
};

// Orthonormal columns drawn from a seeded Gaussian (requires dim >= count).
Eigen::MatrixXd orthonormal_means(Eigen::Index dim, Eigen::Index count, std::uint64_t seed);

io::SequenceBundle generate(const SyntheticSpec& spec);

// Suite of lookalike identity pairs walking side by side, with heterogeneous
// appearance noise and occlusion outliers, used for strategy comparisons.
struct AmbiguitySuiteParams {
    std::size_t targets = 10;
    std::size_t frame_count = 300;
    Eigen::Index feature_dim = 32;
    double pair_similarity = 0.98;   // cosine between the means of a lookalike pair
    double feature_noise = 0.02;
    double loose_scale = 4.0;       // noise multiplier of the looser member of each pair
    std::size_t occlusions_per_target = 2;
    FrameIndex occlusion_length = 10;
    double occluder_blend = 0.35;
    double mutual_contamination = 0;
    double full_occlusion = 0.3;
    FrameIndex entry_frames = 0;
    double entry_noise_scale = 1;
    double false_positive_rate = 0.5;
    double miss_rate = 0.05;
    double box_jitter = 1.0;
    // The back member of a pair sways around the front one: its center sits
    // width * (mean_offset + sway_amplitude * clamp(sway_sharpness * sin(...), -1, 1))
    // to the side. Sharpness above 1 shortens the time spent side by side.
    double mean_offset = 0;
    double sway_amplitude = 1.2;
    double sway_sharpness = 1;
    double sway_period = 80;
    double depth_offset = 8;        // back member is this many pixels higher
    bool loose_front = true;        // the noisier member walks in front
    bool occlude_front = false;     // occlusion windows also hit the front member
};

SyntheticSpec ambiguity_suite(std::uint64_t seed, const AmbiguitySuiteParams& params = {});

}  // namespace hta::synthetic
