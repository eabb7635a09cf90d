#include "hta/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hta/error.hpp"

namespace hta::io {
namespace {

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return in;
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw InputError("write failed for '" + path.string() + "'");
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

// Splits on commas (MOTChallenge) or, failing that, on whitespace.
std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    if (line.find(',') != std::string::npos) {
        std::string field;
        std::istringstream ss(line);
        while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    } else {
        std::istringstream ss(line);
        std::string field;
        while (ss >> field) fields.push_back(field);
    }
    return fields;
}

double to_double(const std::string& s, const fs::path& path, std::size_t line) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (s.empty() || end != begin + s.size() || !std::isfinite(v))
        throw ParseError(path.string(), line, "expected a number, got '" + s + "'");
    return v;
}

FrameIndex to_frame(const std::string& s, const fs::path& path, std::size_t line) {
    const double v = to_double(s, path, line);
    if (v < 1 || v != std::floor(v)) throw ParseError(path.string(), line, "frame must be a positive integer");
    return static_cast<FrameIndex>(v);
}

bool skippable(const std::string& line) {
    const std::string t = trim(line);
    return t.empty() || t.front() == '#';
}

template <typename T>
void ensure_frames(std::vector<std::vector<T>>& frames, FrameIndex frame) {
    if (static_cast<std::size_t>(frame) > frames.size()) frames.resize(static_cast<std::size_t>(frame));
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw DomainError("format_number: conversion failed");
    return std::string(buf, ptr);
}

DetectionRecords read_detections(const fs::path& path, double score_threshold) {
    auto in = open_input(path);
    DetectionRecords frames;
    std::vector<std::size_t> next_index;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        const auto f = split_fields(line);
        if (f.size() < 7) throw ParseError(path.string(), line_no, "expected at least 7 fields");
        DetectionRecord r;
        r.frame = to_frame(f[0], path, line_no);
        r.box.left = to_double(f[2], path, line_no);
        r.box.top = to_double(f[3], path, line_no);
        r.box.width = to_double(f[4], path, line_no);
        r.box.height = to_double(f[5], path, line_no);
        r.box.confidence = to_double(f[6], path, line_no);
        if (!r.box.valid()) throw ParseError(path.string(), line_no, "box width and height must be positive");
        ensure_frames(frames, r.frame);
        if (next_index.size() < frames.size()) next_index.resize(frames.size(), 0);
        r.index = next_index[static_cast<std::size_t>(r.frame - 1)]++;
        if (r.box.confidence < score_threshold) continue;
        frames[static_cast<std::size_t>(r.frame - 1)].push_back(r);
    }
    return frames;
}

void write_detections(const DetectionRecords& detections, const fs::path& path) {
    auto out = open_output(path);
    for (const auto& frame : detections)
        for (const auto& r : frame)
            out << r.frame << ",-1," << format_number(r.box.left) << ',' << format_number(r.box.top) << ','
                << format_number(r.box.width) << ',' << format_number(r.box.height) << ','
                << format_number(r.box.confidence) << ",-1,-1,-1\n";
    finish(out, path);
}

FeatureTable read_features(const fs::path& path) {
    auto in = open_input(path);
    FeatureTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '#') {
            const auto pos = t.find("dim=");
            if (pos != std::string::npos)
                table.dim = static_cast<Eigen::Index>(to_double(trim(t.substr(pos + 4)), path, line_no));
            continue;
        }
        const auto f = split_fields(t);
        if (f.size() < 3) throw ParseError(path.string(), line_no, "expected frame, index and feature values");
        const auto dim = static_cast<Eigen::Index>(f.size() - 2);
        if (table.dim == 0) table.dim = dim;
        if (dim != table.dim)
            throw ParseError(path.string(), line_no,
                             "feature has " + std::to_string(dim) + " values, expected " + std::to_string(table.dim));
        const FrameIndex frame = to_frame(f[0], path, line_no);
        const double idx = to_double(f[1], path, line_no);
        if (idx < 0 || idx != std::floor(idx)) throw ParseError(path.string(), line_no, "bad detection index");
        Eigen::VectorXd v(dim);
        for (Eigen::Index k = 0; k < dim; ++k) v(k) = to_double(f[static_cast<std::size_t>(k + 2)], path, line_no);
        try {
            table.rows.insert_or_assign({frame, static_cast<std::size_t>(idx)}, Feature(std::move(v)));
        } catch (const DomainError& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
    }
    return table;
}

void write_features(const FeatureTable& table, const fs::path& path) {
    auto out = open_output(path);
    out << "# dim=" << table.dim << '\n';
    for (const auto& [key, feature] : table.rows) {
        out << key.first << ',' << key.second;
        for (Eigen::Index k = 0; k < feature.dim(); ++k) out << ',' << format_number(feature.values()(k));
        out << '\n';
    }
    finish(out, path);
}

AnnotatedSequence read_ground_truth(const fs::path& path) {
    auto in = open_input(path);
    AnnotatedSequence seq;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        const auto f = split_fields(line);
        if (f.size() < 6) throw ParseError(path.string(), line_no, "expected at least 6 fields");
        const FrameIndex frame = to_frame(f[0], path, line_no);
        Annotation a;
        a.id = static_cast<ObjectId>(to_double(f[1], path, line_no));
        a.box.left = to_double(f[2], path, line_no);
        a.box.top = to_double(f[3], path, line_no);
        a.box.width = to_double(f[4], path, line_no);
        a.box.height = to_double(f[5], path, line_no);
        if (!a.box.valid()) throw ParseError(path.string(), line_no, "box width and height must be positive");
        ensure_frames(seq, frame);
        if (f.size() >= 7 && to_double(f[6], path, line_no) == 0.0) continue;
        if (f.size() >= 8) {
            const double cls = to_double(f[7], path, line_no);
            if (cls != 1.0 && cls != -1.0) continue;
        }
        seq[static_cast<std::size_t>(frame - 1)].push_back(a);
    }
    return seq;
}

void write_ground_truth(const AnnotatedSequence& gt, const fs::path& path) {
    auto out = open_output(path);
    for (std::size_t t = 0; t < gt.size(); ++t)
        for (const auto& a : gt[t])
            out << t + 1 << ',' << a.id << ',' << format_number(a.box.left) << ',' << format_number(a.box.top) << ','
                << format_number(a.box.width) << ',' << format_number(a.box.height) << ",1,1,1\n";
    finish(out, path);
}

void write_results(std::vector<ResultRow> rows, const fs::path& path) {
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
    });
    auto out = open_output(path);
    for (const auto& r : rows) {
        if (r.id == 0) throw DomainError("write_results: track ids must be positive");
        out << r.frame << ',' << r.id << ',' << format_number(r.box.left) << ',' << format_number(r.box.top) << ','
            << format_number(r.box.width) << ',' << format_number(r.box.height) << ",1,-1,-1,-1\n";
    }
    finish(out, path);
}

std::vector<ResultRow> read_results(const fs::path& path) {
    auto in = open_input(path);
    std::vector<ResultRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        const auto f = split_fields(line);
        if (f.size() < 6) throw ParseError(path.string(), line_no, "expected at least 6 fields");
        ResultRow r;
        r.frame = to_frame(f[0], path, line_no);
        const double id = to_double(f[1], path, line_no);
        if (id < 1 || id != std::floor(id)) throw ParseError(path.string(), line_no, "track id must be positive");
        r.id = static_cast<TrackId>(id);
        r.box.left = to_double(f[2], path, line_no);
        r.box.top = to_double(f[3], path, line_no);
        r.box.width = to_double(f[4], path, line_no);
        r.box.height = to_double(f[5], path, line_no);
        r.box.confidence = 1.0;
        rows.push_back(r);
    }
    return rows;
}

AnnotatedSequence to_annotations(const std::vector<ResultRow>& rows, std::size_t frame_count) {
    AnnotatedSequence seq(frame_count);
    for (const auto& r : rows) {
        ensure_frames(seq, r.frame);
        seq[static_cast<std::size_t>(r.frame - 1)].push_back({static_cast<ObjectId>(r.id), r.box});
    }
    return seq;
}

std::map<std::string, std::string> read_key_values(const fs::path& path) {
    auto in = open_input(path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#' || t.front() == ';' || t.front() == '[') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError(path.string(), line_no, "expected key=value");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) throw ParseError(path.string(), line_no, "empty key");
        kv[key] = trim(t.substr(eq + 1));
    }
    return kv;
}

SequenceInfo read_sequence_info(const fs::path& path) {
    const auto kv = read_key_values(path);
    SequenceInfo info;
    const auto get = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (auto v = get("name")) info.name = *v;
    if (auto v = get("frameRate")) info.frame_rate = to_double(*v, path, 0);
    if (auto v = get("seqLength")) info.frame_count = static_cast<std::size_t>(to_double(*v, path, 0));
    if (auto v = get("featureDim")) info.feature_dim = static_cast<Eigen::Index>(to_double(*v, path, 0));
    return info;
}

void write_sequence_info(const SequenceInfo& info, const fs::path& path) {
    auto out = open_output(path);
    out << "[Sequence]\n"
        << "name=" << info.name << '\n'
        << "frameRate=" << format_number(info.frame_rate) << '\n'
        << "seqLength=" << info.frame_count << '\n'
        << "featureDim=" << info.feature_dim << '\n';
    finish(out, path);
}

BundlePaths BundlePaths::in(const fs::path& dir) {
    return {dir / "seqinfo.ini", dir / "det" / "det.txt", dir / "det" / "features.csv", dir / "gt" / "gt.txt"};
}

SequenceBundle load_bundle(const fs::path& dir, double score_threshold) {
    const BundlePaths paths = BundlePaths::in(dir);
    SequenceBundle bundle;
    if (fs::exists(paths.info)) {
        bundle.info = read_sequence_info(paths.info);
    } else {
        bundle.info.name = dir.filename().string();
    }
    if (!fs::exists(paths.detections)) throw InputError("missing detection file '" + paths.detections.string() + "'");
    if (!fs::exists(paths.features)) throw InputError("missing feature file '" + paths.features.string() + "'");

    const DetectionRecords records = read_detections(paths.detections, score_threshold);
    const FeatureTable features = read_features(paths.features);
    if (bundle.info.feature_dim != 0 && features.dim != 0 && features.dim != bundle.info.feature_dim)
        throw InputError("feature file '" + paths.features.string() + "' declares dimension " +
                         std::to_string(features.dim) + ", sequence info says " +
                         std::to_string(bundle.info.feature_dim));
    bundle.info.feature_dim = features.dim;

    if (fs::exists(paths.ground_truth)) bundle.ground_truth = read_ground_truth(paths.ground_truth);
    std::size_t frames = bundle.info.frame_count;
    if (frames == 0) {
        frames = records.size();
        if (bundle.ground_truth) frames = std::max(frames, bundle.ground_truth->size());
        bundle.info.frame_count = frames;
    }
    if (records.size() > frames)
        throw InputError("detections reference frame " + std::to_string(records.size()) + " beyond seqLength " +
                         std::to_string(frames));
    if (bundle.ground_truth) {
        if (bundle.ground_truth->size() > frames)
            throw InputError("ground truth references frame " + std::to_string(bundle.ground_truth->size()) +
                             " beyond seqLength " + std::to_string(frames));
        bundle.ground_truth->resize(frames);
    }

    bundle.detections.assign(frames, {});
    for (std::size_t t = 0; t < records.size(); ++t)
        for (const auto& r : records[t]) {
            auto it = features.rows.find({r.frame, r.index});
            if (it == features.rows.end())
                throw InputError("no feature row for frame " + std::to_string(r.frame) + ", detection " +
                                 std::to_string(r.index) + " in '" + paths.features.string() + "'");
            bundle.detections[t].push_back({r.box, it->second, r.index});
        }
    return bundle;
}

void write_bundle(const SequenceBundle& bundle, const fs::path& dir) {
    const BundlePaths paths = BundlePaths::in(dir);
    SequenceInfo info = bundle.info;
    info.frame_count = bundle.detections.size();
    DetectionRecords records(bundle.detections.size());
    FeatureTable features;
    for (std::size_t t = 0; t < bundle.detections.size(); ++t) {
        for (std::size_t i = 0; i < bundle.detections[t].size(); ++i) {
            const Detection& d = bundle.detections[t][i];
            const auto frame = static_cast<FrameIndex>(t + 1);
            records[t].push_back({frame, i, d.box});
            features.dim = d.feature.dim();
            features.rows.insert_or_assign({frame, i}, d.feature);
        }
    }
    if (features.dim == 0) features.dim = info.feature_dim;
    info.feature_dim = features.dim;
    write_sequence_info(info, paths.info);
    write_detections(records, paths.detections);
    write_features(features, paths.features);
    if (bundle.ground_truth) write_ground_truth(*bundle.ground_truth, paths.ground_truth);
}

}  // namespace hta::io
