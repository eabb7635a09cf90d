#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "hta/error.hpp"
#include "hta/io.hpp"
#include "hta/metrics.hpp"
#include "hta/synthetic.hpp"

using namespace hta;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path(HTA_TEST_TMP) / "io" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream(path) << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(ReadDetections, MotChallengeRow) {
    const auto dir = scratch("det_row");
    write_text(dir / "det.txt", "1,-1,10,20,30,40,0.9,-1,-1,-1\n");
    const auto d = io::read_detections(dir / "det.txt");
    ASSERT_EQ(d.size(), 1u);
    ASSERT_EQ(d[0].size(), 1u);
    const auto& r = d[0][0];
    EXPECT_EQ(r.frame, 1);
    EXPECT_EQ(r.box.left, 10);
    EXPECT_EQ(r.box.top, 20);
    EXPECT_EQ(r.box.width, 30);
    EXPECT_EQ(r.box.height, 40);
    EXPECT_EQ(r.box.confidence, 0.9);
}

TEST(ReadDetections, ScoreThresholdKeepsIndices) {
    const auto dir = scratch("det_threshold");
    write_text(dir / "det.txt", "1,-1,0,0,10,10,0.2\n1,-1,5,5,10,10,0.8\n3,-1,5,5,10,10,0.4\n");
    const auto d = io::read_detections(dir / "det.txt", 0.3);
    ASSERT_EQ(d.size(), 3u);
    ASSERT_EQ(d[0].size(), 1u);
    EXPECT_EQ(d[0][0].index, 1u);
    EXPECT_TRUE(d[1].empty());
    EXPECT_EQ(d[2][0].frame, 3);
}

TEST(ReadDetections, EmptyFileAndErrors) {
    const auto dir = scratch("det_errors");
    write_text(dir / "empty.txt", "");
    EXPECT_TRUE(io::read_detections(dir / "empty.txt").empty());
    write_text(dir / "bad.txt", "1,-1,10,20,30,40,0.9\n2,-1,x,20,30,40,0.9\n");
    try {
        io::read_detections(dir / "bad.txt");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(std::string(e.what()).find("bad.txt"), std::string::npos);
    }
    write_text(dir / "short.txt", "1,-1,10,20\n");
    EXPECT_THROW(io::read_detections(dir / "short.txt"), ParseError);
    write_text(dir / "frame0.txt", "0,-1,10,20,30,40,0.9\n");
    EXPECT_THROW(io::read_detections(dir / "frame0.txt"), ParseError);
    EXPECT_THROW(io::read_detections(dir / "missing.txt"), InputError);
}

TEST(Results, RoundTripOnRandomRows) {
    const auto dir = scratch("results");
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.5, 900);
    std::uniform_int_distribution<int> id(1, 40), frame(1, 50);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<ResultRow> rows;
        std::set<std::pair<FrameIndex, TrackId>> used;
        for (int i = 0; i < 100; ++i) {
            ResultRow r;
            r.frame = frame(rng);
            r.id = static_cast<TrackId>(id(rng));
            if (!used.insert({r.frame, r.id}).second) continue;
            r.box.left = u(rng) - 100;
            r.box.top = u(rng);
            r.box.width = u(rng);
            r.box.height = u(rng);
            rows.push_back(r);
        }
        io::write_results(rows, dir / "r.txt");
        auto back = io::read_results(dir / "r.txt");
        std::sort(rows.begin(), rows.end(), [](auto& a, auto& b) { return std::pair(a.frame, a.id) < std::pair(b.frame, b.id); });
        EXPECT_EQ(back, rows);
    }
}

TEST(Results, EmptyAndOrdering) {
    const auto dir = scratch("results_order");
    io::write_results({}, dir / "empty.txt");
    EXPECT_EQ(read_text(dir / "empty.txt"), "");
    ResultRow a{3, 7, {}}, b{3, 2, {}};
    io::write_results({a, b}, dir / "two.txt");
    EXPECT_EQ(read_text(dir / "two.txt"), "3,2,0,0,1,1,1,-1,-1,-1\n3,7,0,0,1,1,1,-1,-1,-1\n");
}

TEST(GroundTruth, FlagsAndClasses) {
    const auto dir = scratch("gt");
    write_text(dir / "gt.txt",
               "1,1,0,0,10,10,1,1,1\n"
               "1,2,0,0,10,10,0,1,1\n"
               "2,3,0,0,10,10,1,7,1\n"
               "2,1,0,0,10,10,1,1,0.5\n");
    const auto gt = io::read_ground_truth(dir / "gt.txt");
    ASSERT_EQ(gt.size(), 2u);
    ASSERT_EQ(gt[0].size(), 1u);
    EXPECT_EQ(gt[0][0].id, 1);
    ASSERT_EQ(gt[1].size(), 1u);
    EXPECT_EQ(gt[1][0].id, 1);
}

TEST(Features, RoundTripAndDimensionCheck) {
    const auto dir = scratch("features");
    io::FeatureTable t;
    t.dim = 3;
    t.rows.insert_or_assign({1, 0}, Feature(Eigen::VectorXd{{0.1, 0.2, 0.3}}));
    t.rows.insert_or_assign({2, 1}, Feature(Eigen::VectorXd{{-1, 0, 0.5}}));
    io::write_features(t, dir / "f.csv");
    const auto back = io::read_features(dir / "f.csv");
    EXPECT_EQ(back.dim, 3);
    ASSERT_EQ(back.rows.size(), 2u);
    EXPECT_TRUE(back.rows.at({2, 1}).values().isApprox(t.rows.at({2, 1}).values(), 1e-15));
    write_text(dir / "bad.csv", "# dim=3\n1,0,1,2\n");
    EXPECT_THROW(io::read_features(dir / "bad.csv"), ParseError);
    write_text(dir / "zero.csv", "1,0,0,0,0\n");
    EXPECT_THROW(io::read_features(dir / "zero.csv"), ParseError);
}

TEST(Bundle, MissingFilesNamed) {
    const auto dir = scratch("bundle_missing");
    write_text(dir / "det" / "det.txt", "1,-1,10,20,30,40,0.9\n");
    try {
        io::load_bundle(dir, 0.3);
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("features.csv"), std::string::npos);
    }
    write_text(dir / "det" / "features.csv", "1,5,1,0\n");
    EXPECT_THROW(io::load_bundle(dir, 0.3), InputError);
}

TEST(Synthetic, DeterministicAndSeparable) {
    const auto spec = synthetic::ambiguity_suite(9);
    const auto a = synthetic::generate(spec), b = synthetic::generate(spec);
    ASSERT_EQ(a.detections.size(), b.detections.size());
    for (std::size_t t = 0; t < a.detections.size(); ++t) {
        ASSERT_EQ(a.detections[t].size(), b.detections[t].size());
        for (std::size_t i = 0; i < a.detections[t].size(); ++i) {
            EXPECT_EQ(a.detections[t][i].box, b.detections[t][i].box);
            EXPECT_EQ(a.detections[t][i].feature, b.detections[t][i].feature);
        }
    }
    EXPECT_EQ(spec.paths.size(), 10u);
    EXPECT_EQ(spec.feature_dim, 32);
}

TEST(Synthetic, NoiseFreeScenarioIsPerfectlyTracked) {
    synthetic::SyntheticSpec spec;
    spec.frame_count = 80;
    spec.feature_dim = 8;
    for (int i = 0; i < 4; ++i) {
        synthetic::TargetPath p;
        p.waypoints = {{1, 200.0 + 300 * i, 300}, {80, 260.0 + 300 * i, 340}};
        spec.paths.push_back(p);
    }
    const auto bundle = synthetic::generate(spec);
    for (const Strategy& s : {Strategy::cms(), Strategy::knn(), Strategy::ema(), Strategy::hta()}) {
        TrackerConfig c;
        c.strategy = s;
        c.n_init = 1;
        const auto rows = run_sequence(bundle.detections, c);
        const auto r = evaluate(*bundle.ground_truth, io::to_annotations(rows, bundle.info.frame_count));
        EXPECT_EQ(r.idf1, 1.0) << s.name();
        EXPECT_EQ(r.mota, 1.0) << s.name();
    }
}

TEST(Synthetic, OcclusionWindowRemovesDetectionsOnly) {
    synthetic::SyntheticSpec spec;
    spec.frame_count = 40;
    spec.feature_dim = 4;
    synthetic::TargetPath p;
    p.waypoints = {{1, 300, 300}, {40, 340, 300}};
    spec.paths = {p};
    spec.occlusions = {{0, 11, 20, false}};
    const auto bundle = synthetic::generate(spec);
    for (std::size_t t = 0; t < 40; ++t) {
        EXPECT_EQ((*bundle.ground_truth)[t].size(), 1u);
        const bool hidden = t + 1 >= 11 && t + 1 <= 20;
        EXPECT_EQ(bundle.detections[t].size(), hidden ? 0u : 1u) << t + 1;
    }
}

TEST(Bundle, WriteThenLoad) {
    const auto dir = scratch("bundle_roundtrip");
    const auto bundle = synthetic::generate(synthetic::ambiguity_suite(2));
    io::write_bundle(bundle, dir);
    const auto back = io::load_bundle(dir, 0.0);
    EXPECT_EQ(back.info.frame_count, bundle.info.frame_count);
    EXPECT_EQ(back.info.feature_dim, 32);
    ASSERT_TRUE(back.ground_truth);
    ASSERT_EQ(back.detections.size(), bundle.detections.size());
    for (std::size_t t = 0; t < back.detections.size(); ++t) {
        ASSERT_EQ(back.detections[t].size(), bundle.detections[t].size());
        for (std::size_t i = 0; i < back.detections[t].size(); ++i) {
            EXPECT_EQ(back.detections[t][i].box, bundle.detections[t][i].box);
            EXPECT_TRUE(back.detections[t][i].feature.values().isApprox(bundle.detections[t][i].feature.values(), 1e-15));
        }
    }
    EXPECT_EQ((*back.ground_truth).size(), (*bundle.ground_truth).size());
}

TEST(KeyValues, Parsing) {
    const auto dir = scratch("kv");
    write_text(dir / "a.ini", "[Sequence]\n# comment\nname = MOT-02\nframeRate=25\nseqLength=600\n");
    const auto info = io::read_sequence_info(dir / "a.ini");
    EXPECT_EQ(info.name, "MOT-02");
    EXPECT_EQ(info.frame_rate, 25);
    EXPECT_EQ(info.frame_count, 600u);
    write_text(dir / "b.ini", "novalue\n");
    EXPECT_THROW(io::read_key_values(dir / "b.ini"), ParseError);
}
