#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hta/appearance.hpp"
#include "hta/metrics.hpp"
#include "hta/track.hpp"
#include "hta/tracker.hpp"

namespace hta::io {

namespace fs = std::filesystem;

struct DetectionRecord {
    FrameIndex frame = 0;
    std::size_t index = 0;  // position among the rows of its frame, in file order
    BoundingBox box;
};

// Index t holds frame t + 1.
using DetectionRecords = std::vector<std::vector<DetectionRecord>>;

// MOTChallenge det.txt: frame,id,left,top,width,height,conf[,x,y,z]. Rows below
// `score_threshold` are dropped after their per-frame index has been assigned.
DetectionRecords read_detections(const fs::path& path, double score_threshold = 0.0);
void write_detections(const DetectionRecords& detections, const fs::path& path);

struct FeatureTable {
    Eigen::Index dim = 0;
    std::map<std::pair<FrameIndex, std::size_t>, Feature> rows;
};

// Feature CSV: header "# dim=<l>", then frame,detection-index,v_1..v_l per row.
FeatureTable read_features(const fs::path& path);
void write_features(const FeatureTable& table, const fs::path& path);

// gt.txt: frame,id,left,top,width,height,flag[,class,visibility]. Rows with flag 0
// are ignored; when a class column is present only class 1 (or -1) is kept.
AnnotatedSequence read_ground_truth(const fs::path& path);
void write_ground_truth(const AnnotatedSequence& gt, const fs::path& path);

// Results: frame,id,left,top,width,height,1,-1,-1,-1 sorted by frame then id.
void write_results(std::vector<ResultRow> rows, const fs::path& path);
std::vector<ResultRow> read_results(const fs::path& path);
AnnotatedSequence to_annotations(const std::vector<ResultRow>& rows, std::size_t frame_count);

struct SequenceInfo {
    std::string name = "sequence";
    double frame_rate = 30;
    std::size_t frame_count = 0;
    Eigen::Index feature_dim = 0;
};

// Plain key=value file (seqinfo.ini compatible; [section] lines are skipped).
std::map<std::string, std::string> read_key_values(const fs::path& path);
SequenceInfo read_sequence_info(const fs::path& path);
void write_sequence_info(const SequenceInfo& info, const fs::path& path);

struct SequenceBundle {
    SequenceInfo info;
    DetectionStream detections;  // frames 1..frame_count
    std::optional<AnnotatedSequence> ground_truth;
};

// Directory layout: seqinfo.ini, det/det.txt, det/features.csv, gt/gt.txt (optional).
struct BundlePaths {
    fs::path info, detections, features, ground_truth;
    static BundlePaths in(const fs::path& dir);
};

SequenceBundle load_bundle(const fs::path& dir, double score_threshold);
void write_bundle(const SequenceBundle& bundle, const fs::path& dir);

// Shortest representation that parses back to the same double.
std::string format_number(double v);

}  // namespace hta::io
