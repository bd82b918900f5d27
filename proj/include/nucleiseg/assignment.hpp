#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nucleiseg/anchors.hpp"
#include "nucleiseg/box.hpp"

namespace nseg {

// Per-anchor training targets. cls is 0 (background) or 1 (nucleus);
// matched_gt is the ground-truth index for positives and -1 otherwise;
// positives lists the positive anchor indices in ascending order.
struct AnchorAssignment {
  std::vector<std::int8_t> cls;
  std::vector<std::int32_t> matched_gt;
  std::vector<int> positives;
};

// Threshold matching with forced best-anchor assignment: an anchor is
// positive when its best IoU over ground truths reaches pos_iou (matched to
// the argmax, ties to the lowest gt index), and additionally every ground
// truth claims its own best unclaimed anchor so no instance goes unmatched.
// Ties in the per-gt argmax break to the lowest anchor index.
template <class S>
AnchorAssignment match_anchors(const std::vector<Anchor<S>>& anchors,
                               const std::vector<Box<S>>& gt_boxes, S pos_iou) {
  if (anchors.empty()) throw std::invalid_argument("match_anchors: empty anchor set");
  if (!(pos_iou > S(0) && pos_iou < S(1)))
    throw std::invalid_argument("match_anchors: pos_iou must lie in (0,1)");
  const std::size_t n = anchors.size();
  AnchorAssignment a;
  a.cls.assign(n, 0);
  a.matched_gt.assign(n, -1);
  if (gt_boxes.empty()) return a;

  std::vector<int> best_anchor_for_gt(gt_boxes.size(), -1);
  std::vector<S> best_iou_for_gt(gt_boxes.size(), S(-1));
  for (std::size_t i = 0; i < n; ++i) {
    S best = S(0);
    int best_gt = -1;
    for (std::size_t g = 0; g < gt_boxes.size(); ++g) {
      const S v = iou(anchors[i].box, gt_boxes[g]);
      if (v > best) {
        best = v;
        best_gt = static_cast<int>(g);
      }
      if (v > best_iou_for_gt[g]) {
        best_iou_for_gt[g] = v;
        best_anchor_for_gt[g] = static_cast<int>(i);
      }
    }
    if (best_gt >= 0 && best >= pos_iou) {
      a.cls[i] = 1;
      a.matched_gt[i] = best_gt;
    }
  }

  // Force one positive per ground truth. If an earlier gt already claimed
  // this gt's best anchor, fall back to the best anchor not yet forced.
  std::vector<bool> forced(n, false);
  for (std::size_t g = 0; g < gt_boxes.size(); ++g) {
    int idx = best_anchor_for_gt[g];
    if (idx < 0) continue;  // degenerate gt with zero IoU everywhere
    if (forced[static_cast<std::size_t>(idx)]) {
      S best = S(-1);
      idx = -1;
      for (std::size_t i = 0; i < n; ++i) {
        if (forced[i]) continue;
        const S v = iou(anchors[i].box, gt_boxes[g]);
        if (v > best) {
          best = v;
          idx = static_cast<int>(i);
        }
      }
      if (idx < 0) break;  // more ground truths than anchors
    }
    forced[static_cast<std::size_t>(idx)] = true;
    a.cls[static_cast<std::size_t>(idx)] = 1;
    a.matched_gt[static_cast<std::size_t>(idx)] = static_cast<int>(g);
  }

  for (std::size_t i = 0; i < n; ++i)
    if (a.cls[i] == 1) a.positives.push_back(static_cast<int>(i));
  return a;
}

template <class S>
struct AnchorTargets {
  std::vector<std::int8_t> cls;                       // copy of the assignment classes
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> offsets;  // N x 4, rows valid for positives
};

// Regression targets: encode the matched ground truth against each positive
// anchor. Rows for negative anchors stay zero and never enter the loss.
template <class S>
AnchorTargets<S> build_targets(const AnchorAssignment& a, const std::vector<Anchor<S>>& anchors,
                               const std::vector<Box<S>>& gt_boxes) {
  if (a.cls.size() != anchors.size() || a.matched_gt.size() != anchors.size())
    throw std::invalid_argument("build_targets: assignment does not match anchor list");
  AnchorTargets<S> t;
  t.cls = a.cls;
  t.offsets = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>::Zero(
      static_cast<Eigen::Index>(anchors.size()), 4);
  for (int i : a.positives) {
    const auto g = a.matched_gt[static_cast<std::size_t>(i)];
    if (g < 0 || static_cast<std::size_t>(g) >= gt_boxes.size())
      throw std::out_of_range("build_targets: matched gt index out of range");
    const auto o = encode_offsets(gt_boxes[static_cast<std::size_t>(g)],
                                  anchors[static_cast<std::size_t>(i)].box);
    t.offsets(i, 0) = o.dx;
    t.offsets(i, 1) = o.dy;
    t.offsets(i, 2) = o.dw;
    t.offsets(i, 3) = o.dh;
  }
  return t;
}

}  // namespace nseg
