#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "hta/kalman.hpp"

namespace hta {

using ObjectId = std::int64_t;

struct Annotation {
    ObjectId id = 0;
    BoundingBox box;
};

using FrameAnnotations = std::vector<Annotation>;
// Index t holds frame t + 1.
using AnnotatedSequence = std::vector<FrameAnnotations>;

struct FramePair {
    std::size_t gt = 0;   // index into the gt frame
    std::size_t hyp = 0;  // index into the hypothesis frame
    double iou = 0;
};

struct FrameCorrespondence {
    std::vector<FramePair> pairs;
    std::vector<std::size_t> unmatched_gt;
    std::vector<std::size_t> unmatched_hyp;
};

// CLEAR-MOT frame matching. Pairs in `previous` (gt id -> hyp id of the last
// correspondence) are kept while their IoU stays above the threshold; the rest
// are matched by a minimum (1 - IoU) assignment over pairs with IoU >= threshold.
FrameCorrespondence match_frame(const FrameAnnotations& gt, const FrameAnnotations& hyp, double iou_threshold = 0.5,
                                const std::map<ObjectId, ObjectId>* previous = nullptr);

struct MetricsReport {
    double idf1 = 0;
    double idp = 0;
    double idr = 0;
    double mota = 0;
    double motp = 0;
    double mt = 0;  // percent of ground-truth targets
    double ml = 0;  // percent of ground-truth targets
    std::size_t mostly_tracked = 0;
    std::size_t mostly_lost = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t ids = 0;
    std::size_t frag = 0;
    std::size_t matches = 0;
    std::size_t gt_boxes = 0;
    std::size_t hyp_boxes = 0;
    std::size_t gt_targets = 0;
    std::size_t idtp = 0;
    std::size_t idfp = 0;
    std::size_t idfn = 0;
};

MetricsReport evaluate(const AnnotatedSequence& gt, const AnnotatedSequence& hyp, double iou_threshold = 0.5);

// Aggregates several sequences by summing counts before forming the ratios.
MetricsReport evaluate_many(const std::vector<std::pair<AnnotatedSequence, AnnotatedSequence>>& sequences,
                            double iou_threshold = 0.5);

}  // namespace hta
