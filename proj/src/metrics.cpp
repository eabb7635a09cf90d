#include "hta/metrics.hpp"

#include <algorithm>
#include <set>
#include <string>

#include <Eigen/Core>

#include "hta/error.hpp"
#include "hta/hungarian.hpp"

namespace hta {
namespace {

void require_unique_ids(const FrameAnnotations& frame, std::size_t t, const char* what) {
    std::set<ObjectId> seen;
    for (const auto& a : frame)
        if (!seen.insert(a.id).second)
            throw InputError(std::string(what) + ": duplicate id " + std::to_string(a.id) + " in frame " +
                             std::to_string(t + 1));
}

// Raw counts of one or more sequences.
struct Tally {
    std::size_t fp = 0, fn = 0, ids = 0, frag = 0, matches = 0, gt_boxes = 0, hyp_boxes = 0;
    std::size_t targets = 0, mostly_tracked = 0, mostly_lost = 0;
    std::size_t idtp = 0;
    double iou_sum = 0;

    void add(const Tally& o) {
        fp += o.fp;
        fn += o.fn;
        ids += o.ids;
        frag += o.frag;
        matches += o.matches;
        gt_boxes += o.gt_boxes;
        hyp_boxes += o.hyp_boxes;
        targets += o.targets;
        mostly_tracked += o.mostly_tracked;
        mostly_lost += o.mostly_lost;
        idtp += o.idtp;
        iou_sum += o.iou_sum;
    }
};

std::size_t identity_true_positives(const AnnotatedSequence& gt, const AnnotatedSequence& hyp, double threshold) {
    std::map<ObjectId, Eigen::Index> gt_index, hyp_index;
    std::vector<std::size_t> gt_count, hyp_count;
    for (const auto& frame : gt)
        for (const auto& a : frame) {
            auto [it, fresh] = gt_index.try_emplace(a.id, static_cast<Eigen::Index>(gt_count.size()));
            if (fresh) gt_count.push_back(0);
            ++gt_count[static_cast<std::size_t>(it->second)];
        }
    for (const auto& frame : hyp)
        for (const auto& a : frame) {
            auto [it, fresh] = hyp_index.try_emplace(a.id, static_cast<Eigen::Index>(hyp_count.size()));
            if (fresh) hyp_count.push_back(0);
            ++hyp_count[static_cast<std::size_t>(it->second)];
        }
    if (gt_count.empty() || hyp_count.empty()) return 0;

    Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(gt_count.size()),
                                                    static_cast<Eigen::Index>(hyp_count.size()));
    const std::size_t frames = std::min(gt.size(), hyp.size());
    for (std::size_t t = 0; t < frames; ++t)
        for (const auto& g : gt[t])
            for (const auto& h : hyp[t])
                if (iou(g.box, h.box) >= threshold) overlap(gt_index[g.id], hyp_index[h.id]) += 1.0;

    // Maximum total overlap; every id on the smaller side gets a partner, zero-overlap partners add nothing.
    const Eigen::MatrixXd cost = overlap.maxCoeff() - overlap.array();
    const auto assignment = min_cost_assignment(cost);
    std::size_t idtp = 0;
    for (Eigen::Index g = 0; g < cost.rows(); ++g) {
        const Eigen::Index h = assignment[static_cast<std::size_t>(g)];
        if (h != kUnassigned) idtp += static_cast<std::size_t>(overlap(g, h));
    }
    return idtp;
}

Tally tally(const AnnotatedSequence& gt, const AnnotatedSequence& hyp, double threshold) {
    if (hyp.size() > gt.size()) {
        for (std::size_t t = gt.size(); t < hyp.size(); ++t)
            if (!hyp[t].empty())
                throw InputError("evaluate: hypothesis has boxes in frame " + std::to_string(t + 1) +
                                 " beyond the ground-truth length " + std::to_string(gt.size()));
    }
    Tally out;
    std::map<ObjectId, ObjectId> last_match;  // gt id -> hyp id
    struct TargetLife {
        std::size_t present = 0;
        std::size_t tracked = 0;
        std::vector<char> status;  // per present frame: tracked?
    };
    std::map<ObjectId, TargetLife> life;
    static const FrameAnnotations kEmpty;

    for (std::size_t t = 0; t < gt.size(); ++t) {
        const FrameAnnotations& g = gt[t];
        const FrameAnnotations& h = t < hyp.size() ? hyp[t] : kEmpty;
        require_unique_ids(g, t, "ground truth");
        require_unique_ids(h, t, "hypothesis");
        const FrameCorrespondence c = match_frame(g, h, threshold, &last_match);

        out.gt_boxes += g.size();
        out.hyp_boxes += h.size();
        out.matches += c.pairs.size();
        out.fn += c.unmatched_gt.size();
        out.fp += c.unmatched_hyp.size();

        std::vector<char> tracked(g.size(), 0);
        for (const auto& p : c.pairs) {
            out.iou_sum += p.iou;
            tracked[p.gt] = 1;
            const ObjectId gid = g[p.gt].id;
            const ObjectId hid = h[p.hyp].id;
            auto it = last_match.find(gid);
            if (it != last_match.end() && it->second != hid) ++out.ids;
            last_match[gid] = hid;
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto& l = life[g[i].id];
            ++l.present;
            l.tracked += static_cast<std::size_t>(tracked[i]);
            l.status.push_back(tracked[i]);
        }
    }

    for (const auto& [id, l] : life) {
        ++out.targets;
        const double ratio = l.present ? static_cast<double>(l.tracked) / static_cast<double>(l.present) : 0.0;
        if (ratio >= 0.8) ++out.mostly_tracked;
        if (ratio < 0.2) ++out.mostly_lost;
        // Interruptions between the first and last tracked frame.
        const auto first = std::find(l.status.begin(), l.status.end(), 1);
        if (first == l.status.end()) continue;
        const auto last = std::find(l.status.rbegin(), l.status.rend(), 1).base();
        for (auto it = first + 1; it < last; ++it)
            if (*(it - 1) == 1 && *it == 0) ++out.frag;
    }
    out.idtp = identity_true_positives(gt, hyp, threshold);
    return out;
}

MetricsReport finalize(const Tally& t) {
    MetricsReport r;
    r.fp = t.fp;
    r.fn = t.fn;
    r.ids = t.ids;
    r.frag = t.frag;
    r.matches = t.matches;
    r.gt_boxes = t.gt_boxes;
    r.hyp_boxes = t.hyp_boxes;
    r.gt_targets = t.targets;
    r.mostly_tracked = t.mostly_tracked;
    r.mostly_lost = t.mostly_lost;
    r.idtp = t.idtp;
    r.idfn = t.gt_boxes - t.idtp;
    r.idfp = t.hyp_boxes - t.idtp;
    const auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.0; };
    r.mota = t.gt_boxes ? 1.0 - static_cast<double>(t.fp + t.fn + t.ids) / static_cast<double>(t.gt_boxes)
                        : (t.hyp_boxes ? 0.0 : 1.0);
    r.motp = ratio(t.iou_sum, static_cast<double>(t.matches));
    r.idp = ratio(static_cast<double>(t.idtp), static_cast<double>(t.hyp_boxes));
    r.idr = ratio(static_cast<double>(t.idtp), static_cast<double>(t.gt_boxes));
    r.idf1 = ratio(2.0 * static_cast<double>(t.idtp), static_cast<double>(t.gt_boxes + t.hyp_boxes));
    r.mt = 100.0 * ratio(static_cast<double>(t.mostly_tracked), static_cast<double>(t.targets));
    r.ml = 100.0 * ratio(static_cast<double>(t.mostly_lost), static_cast<double>(t.targets));
    return r;
}

}  // namespace

FrameCorrespondence match_frame(const FrameAnnotations& gt, const FrameAnnotations& hyp, double iou_threshold,
                                const std::map<ObjectId, ObjectId>* previous) {
    FrameCorrespondence out;
    std::vector<char> gt_used(gt.size(), 0), hyp_used(hyp.size(), 0);

    if (previous) {
        for (std::size_t i = 0; i < gt.size(); ++i) {
            auto it = previous->find(gt[i].id);
            if (it == previous->end()) continue;
            for (std::size_t j = 0; j < hyp.size(); ++j) {
                if (hyp_used[j] || hyp[j].id != it->second) continue;
                const double o = iou(gt[i].box, hyp[j].box);
                if (o >= iou_threshold) {
                    out.pairs.push_back({i, j, o});
                    gt_used[i] = hyp_used[j] = 1;
                }
                break;
            }
        }
    }

    std::vector<std::size_t> rows, cols;
    for (std::size_t i = 0; i < gt.size(); ++i)
        if (!gt_used[i]) rows.push_back(i);
    for (std::size_t j = 0; j < hyp.size(); ++j)
        if (!hyp_used[j]) cols.push_back(j);

    if (!rows.empty() && !cols.empty()) {
        constexpr double kInfeasible = 1e6;
        Eigen::MatrixXd cost(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
        Eigen::MatrixXd overlap(cost.rows(), cost.cols());
        for (Eigen::Index r = 0; r < cost.rows(); ++r)
            for (Eigen::Index c = 0; c < cost.cols(); ++c) {
                const double o = iou(gt[rows[static_cast<std::size_t>(r)]].box, hyp[cols[static_cast<std::size_t>(c)]].box);
                overlap(r, c) = o;
                cost(r, c) = o >= iou_threshold ? 1.0 - o : kInfeasible;
            }
        const auto assignment = min_cost_assignment(cost);
        for (Eigen::Index r = 0; r < cost.rows(); ++r) {
            const Eigen::Index c = assignment[static_cast<std::size_t>(r)];
            if (c == kUnassigned || cost(r, c) >= kInfeasible) continue;
            const std::size_t i = rows[static_cast<std::size_t>(r)];
            const std::size_t j = cols[static_cast<std::size_t>(c)];
            out.pairs.push_back({i, j, overlap(r, c)});
            gt_used[i] = hyp_used[j] = 1;
        }
    }

    std::sort(out.pairs.begin(), out.pairs.end(), [](const FramePair& a, const FramePair& b) { return a.gt < b.gt; });
    for (std::size_t i = 0; i < gt.size(); ++i)
        if (!gt_used[i]) out.unmatched_gt.push_back(i);
    for (std::size_t j = 0; j < hyp.size(); ++j)
        if (!hyp_used[j]) out.unmatched_hyp.push_back(j);
    return out;
}

MetricsReport evaluate(const AnnotatedSequence& gt, const AnnotatedSequence& hyp, double iou_threshold) {
    return finalize(tally(gt, hyp, iou_threshold));
}

MetricsReport evaluate_many(const std::vector<std::pair<AnnotatedSequence, AnnotatedSequence>>& sequences,
                            double iou_threshold) {
    Tally total;
    for (const auto& [gt, hyp] : sequences) total.add(tally(gt, hyp, iou_threshold));
    return finalize(total);
}

}  // namespace hta
