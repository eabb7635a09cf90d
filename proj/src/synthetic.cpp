#include "hta/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/QR>

#include "hta/error.hpp"

namespace hta::synthetic {
namespace {

using Rng = std::mt19937_64;

Eigen::VectorXd gaussian_vector(Rng& rng, Eigen::Index dim, double sigma) {
    std::normal_distribution<double> normal(0.0, sigma);
    Eigen::VectorXd v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) v(k) = normal(rng);
    return v;
}

Eigen::VectorXd random_unit(Rng& rng, Eigen::Index dim) {
    Eigen::VectorXd v = gaussian_vector(rng, dim, 1.0);
    return v / v.norm();
}

// Box of a target at `frame`, or nothing when the target is not in the scene.
std::optional<BoundingBox> box_at(const TargetPath& path, FrameIndex frame) {
    const auto& w = path.waypoints;
    if (w.empty() || frame < w.front().frame || frame > w.back().frame) return std::nullopt;
    double x = w.front().x, y = w.front().y;
    for (std::size_t k = 1; k < w.size(); ++k) {
        if (frame > w[k].frame) continue;
        const double span = static_cast<double>(w[k].frame - w[k - 1].frame);
        const double s = span > 0 ? static_cast<double>(frame - w[k - 1].frame) / span : 1.0;
        x = w[k - 1].x + s * (w[k].x - w[k - 1].x);
        y = w[k - 1].y + s * (w[k].y - w[k - 1].y);
        break;
    }
    return BoundingBox{x - path.width / 2, y - path.height / 2, path.width, path.height, 1.0};
}

double covered_share(const BoundingBox& back, const BoundingBox& front) {
    const double ix = std::min(back.left + back.width, front.left + front.width) - std::max(back.left, front.left);
    const double iy = std::min(back.top + back.height, front.top + front.height) - std::max(back.top, front.top);
    if (ix <= 0 || iy <= 0) return 0.0;
    return ix * iy / back.area();
}

}  // namespace

void SyntheticSpec::validate() const {
    const auto prob = [](double p) { return p >= 0 && p <= 1; };
    if (!prob(miss_rate)) throw DomainError("synthetic: miss rate must lie in [0,1]");
    if (!(false_positive_rate >= 0)) throw DomainError("synthetic: false positive rate must be >= 0");
    if (!(feature_noise >= 0)) throw DomainError("synthetic: feature noise must be >= 0");
    if (!prob(occluder_blend)) throw DomainError("synthetic: occluder blend must lie in [0,1]");
    if (!prob(mutual_contamination)) throw DomainError("synthetic: mutual contamination must lie in [0,1]");
    if (entry_frames < 0 || !(entry_noise_scale >= 0)) throw DomainError("synthetic: invalid entry noise");
    if (!(full_occlusion > 0 && full_occlusion <= 1)) throw DomainError("synthetic: full occlusion must lie in (0,1]");
    if (feature_dim < 1) throw DomainError("synthetic: feature dimension must be >= 1");
    if (identity_means.size() != 0 &&
        (identity_means.rows() != feature_dim || identity_means.cols() != static_cast<Eigen::Index>(paths.size())))
        throw DomainError("synthetic: identity means must be feature_dim x target count");
    if (identity_means.size() == 0 && feature_dim < static_cast<Eigen::Index>(paths.size()))
        throw DomainError("synthetic: orthonormal identities need feature_dim >= target count");
    if (!noise_scale.empty() && noise_scale.size() != paths.size())
        throw DomainError("synthetic: noise scale needs one entry per target");
    for (const auto& o : occlusions)
        if (o.target >= paths.size() || o.first > o.last) throw DomainError("synthetic: invalid occlusion window");
    for (const auto& p : paths) {
        if (p.waypoints.empty() || !(p.width > 0) || !(p.height > 0)) throw DomainError("synthetic: invalid path");
        for (std::size_t k = 1; k < p.waypoints.size(); ++k)
            if (p.waypoints[k].frame < p.waypoints[k - 1].frame)
                throw DomainError("synthetic: waypoint frames must be nondecreasing");
    }
}

Eigen::MatrixXd orthonormal_means(Eigen::Index dim, Eigen::Index count, std::uint64_t seed) {
    if (count > dim) throw DomainError("orthonormal_means: need dim >= count");
    Rng rng(seed);
    Eigen::MatrixXd raw(dim, count);
    for (Eigen::Index j = 0; j < count; ++j) raw.col(j) = gaussian_vector(rng, dim, 1.0);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    return qr.householderQ() * Eigen::MatrixXd::Identity(dim, count);
}

io::SequenceBundle generate(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const auto targets = spec.paths.size();
    const Eigen::MatrixXd means = spec.identity_means.size() != 0
                                      ? spec.identity_means
                                      : orthonormal_means(spec.feature_dim, static_cast<Eigen::Index>(targets), spec.seed ^ 0x9e3779b97f4a7c15ULL);

    // One occluder appearance per window.
    std::vector<Eigen::VectorXd> occluder_look;
    for (std::size_t w = 0; w < spec.occlusions.size(); ++w) occluder_look.push_back(random_unit(rng, spec.feature_dim));

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 1.0);
    std::poisson_distribution<int> fp_count(spec.false_positive_rate > 0 ? spec.false_positive_rate : 1.0);

    io::SequenceBundle bundle;
    bundle.info.name = spec.name;
    bundle.info.frame_rate = spec.frame_rate;
    bundle.info.frame_count = spec.frame_count;
    bundle.info.feature_dim = spec.feature_dim;
    bundle.detections.assign(spec.frame_count, {});
    bundle.ground_truth = AnnotatedSequence(spec.frame_count);

    const auto make_feature = [&](const Eigen::VectorXd& mean, double sigma) {
        Eigen::VectorXd v = mean;
        if (sigma > 0) v += gaussian_vector(rng, spec.feature_dim, sigma);
        return Feature(std::move(v));
    };
    const auto jittered = [&](BoundingBox b) {
        if (spec.box_jitter > 0) {
            b.left += spec.box_jitter * jitter(rng);
            b.top += spec.box_jitter * jitter(rng);
            b.width = std::max(1.0, b.width + spec.box_jitter * jitter(rng));
            b.height = std::max(1.0, b.height + spec.box_jitter * jitter(rng));
        }
        return b;
    };

    for (std::size_t t = 0; t < spec.frame_count; ++t) {
        const auto frame = static_cast<FrameIndex>(t + 1);
        std::vector<std::optional<BoundingBox>> boxes(targets);
        for (std::size_t i = 0; i < targets; ++i) {
            boxes[i] = box_at(spec.paths[i], frame);
            if (boxes[i]) (*bundle.ground_truth)[t].push_back({static_cast<ObjectId>(i + 1), *boxes[i]});
        }

        std::vector<Detection> dets;
        for (std::size_t i = 0; i < targets; ++i) {
            if (!boxes[i]) continue;
            double sigma = spec.feature_noise * (spec.noise_scale.empty() ? 1.0 : spec.noise_scale[i]);
            if (frame < spec.paths[i].waypoints.front().frame + spec.entry_frames) sigma *= spec.entry_noise_scale;

            std::optional<std::size_t> window;
            for (std::size_t w = 0; w < spec.occlusions.size(); ++w) {
                const auto& o = spec.occlusions[w];
                if (o.target == i && frame >= o.first && frame <= o.last) window = w;
            }
            if (window) {
                if (spec.occlusions[*window].emit_occluder) {
                    BoundingBox b = *boxes[i];
                    b.left += spec.occluder_offset * b.width;
                    b.confidence = 0.9;
                    const Eigen::VectorXd look = (1.0 - spec.occluder_blend) * means.col(static_cast<Eigen::Index>(i)) +
                                                 spec.occluder_blend * occluder_look[*window];
                    dets.push_back({jittered(b), make_feature(look, sigma), 0});
                }
                continue;
            }

            // Share hidden by the nearest-to-camera overlapping target.
            double covered = 0;
            std::size_t occluder = i;
            const double bottom = boxes[i]->top + boxes[i]->height;
            for (std::size_t j = 0; j < targets; ++j) {
                if (j == i || !boxes[j] || boxes[j]->top + boxes[j]->height <= bottom) continue;
                const double c = covered_share(*boxes[i], *boxes[j]);
                if (c > covered) {
                    covered = c;
                    occluder = j;
                }
            }
            if (covered >= spec.full_occlusion) continue;
            if (unit(rng) < spec.miss_rate) continue;

            Eigen::VectorXd look = means.col(static_cast<Eigen::Index>(i));
            if (occluder != i && spec.mutual_contamination > 0) {
                const double w = spec.mutual_contamination * covered;
                look = (1.0 - w) * look + w * means.col(static_cast<Eigen::Index>(occluder));
            }
            dets.push_back({jittered(*boxes[i]), make_feature(look, sigma), 0});
        }

        if (spec.false_positive_rate > 0) {
            const int n = fp_count(rng);
            for (int k = 0; k < n; ++k) {
                BoundingBox b;
                b.height = 60 + 80 * unit(rng);
                b.width = b.height * 0.4;
                b.left = unit(rng) * (spec.image_width - b.width);
                b.top = unit(rng) * (spec.image_height - b.height);
                b.confidence = 0.3 + 0.7 * unit(rng);
                dets.push_back({b, Feature(random_unit(rng, spec.feature_dim)), 0});
            }
        }

        std::shuffle(dets.begin(), dets.end(), rng);
        for (std::size_t k = 0; k < dets.size(); ++k) dets[k].index = k;
        bundle.detections[t] = std::move(dets);
    }
    return bundle;
}

SyntheticSpec ambiguity_suite(std::uint64_t seed, const AmbiguitySuiteParams& params) {
    if (params.targets % 2 != 0) throw DomainError("ambiguity_suite: target count must be even");
    if (params.feature_dim < static_cast<Eigen::Index>(params.targets))
        throw DomainError("ambiguity_suite: feature dimension must be >= target count");
    Rng rng(seed * 0x2545F4914F6CDD1DULL + 7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    SyntheticSpec spec;
    spec.name = "ambiguity-" + std::to_string(seed);
    spec.frame_count = params.frame_count;
    spec.feature_dim = params.feature_dim;
    spec.feature_noise = params.feature_noise;
    spec.false_positive_rate = params.false_positive_rate;
    spec.miss_rate = params.miss_rate;
    spec.box_jitter = params.box_jitter;
    spec.mutual_contamination = params.mutual_contamination;
    spec.full_occlusion = params.full_occlusion;
    spec.entry_frames = params.entry_frames;
    spec.entry_noise_scale = params.entry_noise_scale;
    spec.occluder_blend = params.occluder_blend;
    spec.seed = seed;

    const auto pairs = static_cast<Eigen::Index>(params.targets / 2);
    const Eigen::MatrixXd basis = orthonormal_means(params.feature_dim, 2 * pairs, seed + 1000);
    spec.identity_means.resize(params.feature_dim, 2 * pairs);
    const double rho = params.pair_similarity;
    for (Eigen::Index p = 0; p < pairs; ++p) {
        spec.identity_means.col(2 * p) = basis.col(2 * p);
        spec.identity_means.col(2 * p + 1) = rho * basis.col(2 * p) + std::sqrt(1 - rho * rho) * basis.col(2 * p + 1);
    }

    const auto frames = static_cast<double>(params.frame_count);
    for (Eigen::Index p = 0; p < pairs; ++p) {
        const double height = 90 + 30 * unit(rng);
        const double width = 0.4 * height;
        const auto start = static_cast<FrameIndex>(1 + std::floor(unit(rng) * 0.15 * frames));
        const auto end = static_cast<FrameIndex>(std::min(frames, std::floor((0.8 + 0.2 * unit(rng)) * frames)));
        const double angle = 2 * std::numbers::pi * unit(rng);
        const double speed = 1.0 + 1.5 * unit(rng);
        const double vx = speed * std::cos(angle), vy = 0.5 * speed * std::sin(angle);
        // Start so that the straight walk stays inside the image.
        const double duration = static_cast<double>(end - start);
        const double margin = 2 * width + 40;
        const double x0 = std::clamp(960 - vx * duration / 2 + (unit(rng) - 0.5) * 600, margin, 1920 - margin);
        const double y0 = std::clamp(540 - vy * duration / 2 + (unit(rng) - 0.5) * 400, height, 1080 - height);
        const double period = params.sway_period * (0.8 + 0.4 * unit(rng));
        const double phase = 2 * std::numbers::pi * unit(rng);

        TargetPath front, back;
        front.width = back.width = width;
        front.height = back.height = height;
        for (FrameIndex f = start;; f = std::min<FrameIndex>(f + 5, end)) {
            const double s = static_cast<double>(f - start);
            const double x = x0 + vx * s, y = y0 + vy * s;
            const double wave = std::clamp(
                params.sway_sharpness * std::sin(2 * std::numbers::pi * s / period + phase), -1.0, 1.0);
            const double offset = width * (params.mean_offset + params.sway_amplitude * wave);
            front.waypoints.push_back({f, x, y});
            back.waypoints.push_back({f, x + offset, y - params.depth_offset});
            if (f == end) break;
        }
        spec.paths.push_back(front);
        spec.paths.push_back(back);
        spec.noise_scale.push_back(params.loose_front ? params.loose_scale : 1.0);
        spec.noise_scale.push_back(params.loose_front ? 1.0 : params.loose_scale);
    }

    for (std::size_t i = 0; i < spec.paths.size(); ++i) {
        if (!params.occlude_front && i % 2 == 0) continue;
        const auto first = spec.paths[i].waypoints.front().frame;
        const auto last = spec.paths[i].waypoints.back().frame;
        for (std::size_t k = 0; k < params.occlusions_per_target; ++k) {
            const auto span = static_cast<double>(last - first - params.occlusion_length - 20);
            if (span <= 0) break;
            const auto begin = first + 10 + static_cast<FrameIndex>(std::floor(unit(rng) * span));
            spec.occlusions.push_back({i, begin, begin + params.occlusion_length - 1, true});
        }
    }
    return spec;
}

}  // namespace hta::synthetic
