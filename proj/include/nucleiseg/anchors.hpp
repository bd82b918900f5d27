#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "nucleiseg/box.hpp"

namespace nseg {

// Default anchor grid: three feature maps (38/19/10 for a 300 input), four
// boxes per cell from two aspect ratios x two scales, 7620 anchors total.
struct AnchorConfig {
  int input_size = 300;
  std::vector<int> map_sizes = {38, 19, 10};
  // Per-level base side length; the detectable size band is 20..128 px and
  // the three bases interpolate it linearly.
  std::vector<double> base_sizes = {20.0, 74.0, 128.0};
  std::vector<double> aspect_ratios = {1.0, 0.75};  // w : h
  std::vector<double> scales = {0.8, 1.2};

  int variants_per_cell() const {
    return static_cast<int>(aspect_ratios.size() * scales.size());
  }

  int total_anchors() const {
    long long n = 0;
    for (int m : map_sizes) n += static_cast<long long>(m) * m;
    return static_cast<int>(n * variants_per_cell());
  }

  void validate() const {
    if (input_size <= 0) throw std::invalid_argument("anchor config: input_size must be positive");
    if (map_sizes.empty()) throw std::invalid_argument("anchor config: no feature maps");
    if (base_sizes.size() != map_sizes.size())
      throw std::invalid_argument("anchor config: base_sizes and map_sizes differ in length");
    if (aspect_ratios.empty() || scales.empty())
      throw std::invalid_argument("anchor config: aspect_ratios and scales must be non-empty");
    for (int m : map_sizes)
      if (m <= 0) throw std::invalid_argument("anchor config: map size must be positive");
    for (double b : base_sizes)
      if (b <= 0) throw std::invalid_argument("anchor config: base size must be positive");
  }
};

template <class S>
struct Anchor {
  Box<S> box;
  int level = 0;    // pyramid level (index into map_sizes)
  int row = 0;      // feature-map cell
  int col = 0;
  int variant = 0;  // index into ratio-major (ratio, scale) combinations
};

using AnchorD = Anchor<double>;

// Deterministic order: level-major, then row, col, variant. Variant index is
// ratio-major: variant = ratio_index * |scales| + scale_index. Anchor width
// is base*scale*sqrt(ratio) and height base*scale/sqrt(ratio) (area-preserving
// aspect convention). Anchors are not clipped to the image.
template <class S>
std::vector<Anchor<S>> generate_anchors(const AnchorConfig& cfg) {
  cfg.validate();
  std::vector<Anchor<S>> out;
  out.reserve(static_cast<std::size_t>(cfg.total_anchors()));
  for (std::size_t level = 0; level < cfg.map_sizes.size(); ++level) {
    const int m = cfg.map_sizes[level];
    const S stride = static_cast<S>(cfg.input_size) / static_cast<S>(m);
    const S base = static_cast<S>(cfg.base_sizes[level]);
    for (int row = 0; row < m; ++row) {
      for (int col = 0; col < m; ++col) {
        const S cx = (static_cast<S>(col) + S(0.5)) * stride;
        const S cy = (static_cast<S>(row) + S(0.5)) * stride;
        int variant = 0;
        for (double ratio : cfg.aspect_ratios) {
          const S root = static_cast<S>(std::sqrt(ratio));
          for (double scale : cfg.scales) {
            const S side = base * static_cast<S>(scale);
            out.push_back(Anchor<S>{Box<S>{cx, cy, side * root, side / root},
                                    static_cast<int>(level), row, col, variant});
            ++variant;
          }
        }
      }
    }
  }
  return out;
}

// SSD-style center-size offsets: center shift normalized by anchor size,
// log size ratios. decode(encode(g, a), a) == g to floating-point accuracy.
template <class S>
struct OffsetVector {
  S dx{}, dy{}, dw{}, dh{};
};

template <class S>
OffsetVector<S> encode_offsets(const Box<S>& gt, const Box<S>& anchor) {
  return OffsetVector<S>{(gt.cx - anchor.cx) / anchor.w, (gt.cy - anchor.cy) / anchor.h,
                         std::log(gt.w / anchor.w), std::log(gt.h / anchor.h)};
}

template <class S>
Box<S> decode_offsets(const OffsetVector<S>& o, const Box<S>& anchor) {
  Box<S> b{anchor.cx + o.dx * anchor.w, anchor.cy + o.dy * anchor.h,
           anchor.w * std::exp(o.dw), anchor.h * std::exp(o.dh)};
  if (!std::isfinite(b.w) || !std::isfinite(b.h) || !std::isfinite(b.cx) || !std::isfinite(b.cy))
    throw std::domain_error("decode_offsets: non-finite box");
  return b;
}

template <class S>
Box<S> decode_offsets(const OffsetVector<S>& o, const Box<S>& anchor, S extent_w, S extent_h) {
  return clip_to_extent(decode_offsets(o, anchor), extent_w, extent_h);
}

// Greedy non-maximum suppression, highest confidence first. Confidence ties
// keep input order; a candidate is suppressed when its IoU with an already
// kept detection exceeds the threshold. The result is confidence-descending.
template <class S>
std::vector<Detection<S>> nms(const std::vector<Detection<S>>& dets, S iou_threshold) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dets[static_cast<std::size_t>(a)].confidence > dets[static_cast<std::size_t>(b)].confidence;
  });
  std::vector<Detection<S>> kept;
  kept.reserve(dets.size());
  for (int idx : order) {
    const auto& cand = dets[static_cast<std::size_t>(idx)];
    bool suppressed = false;
    for (const auto& k : kept) {
      if (iou(cand.box, k.box) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(cand);
  }
  return kept;
}

}  // namespace nseg
