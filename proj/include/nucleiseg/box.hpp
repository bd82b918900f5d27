#pragma once

#include <algorithm>
#include <cmath>

namespace nseg {

// Axis-aligned box in center-size form, input-image pixel units.
// Corner form is (cx - w/2, cy - h/2) .. (cx + w/2, cy + h/2).
template <class S>
struct Box {
  S cx{}, cy{}, w{}, h{};

  S x0() const { return cx - w / S(2); }
  S y0() const { return cy - h / S(2); }
  S x1() const { return cx + w / S(2); }
  S y1() const { return cy + h / S(2); }
  S area() const { return w * h; }
  bool valid() const { return w > S(0) && h > S(0); }

  static Box from_corners(S x0, S y0, S x1, S y1) {
    return Box{(x0 + x1) / S(2), (y0 + y1) / S(2), x1 - x0, y1 - y0};
  }

  template <class T>
  Box<T> cast() const {
    return Box<T>{static_cast<T>(cx), static_cast<T>(cy), static_cast<T>(w), static_cast<T>(h)};
  }
};

using BoxD = Box<double>;

// Intersection over union; 0 for disjoint boxes.
template <class S>
S iou(const Box<S>& a, const Box<S>& b) {
  const S ix = std::max(S(0), std::min(a.x1(), b.x1()) - std::max(a.x0(), b.x0()));
  const S iy = std::max(S(0), std::min(a.y1(), b.y1()) - std::max(a.y0(), b.y0()));
  const S inter = ix * iy;
  if (inter <= S(0)) return S(0);
  return inter / (a.area() + b.area() - inter);
}

// Clamp the box to the [0,w]x[0,h] extent, preserving center-size form.
// A box entirely outside collapses to a zero-length side on the border.
template <class S>
Box<S> clip_to_extent(const Box<S>& b, S extent_w, S extent_h) {
  const S x0 = std::clamp(b.x0(), S(0), extent_w);
  const S y0 = std::clamp(b.y0(), S(0), extent_h);
  const S x1 = std::clamp(b.x1(), S(0), extent_w);
  const S y1 = std::clamp(b.y1(), S(0), extent_h);
  return Box<S>::from_corners(x0, y0, x1, y1);
}

template <class S>
struct Detection {
  Box<S> box;
  S confidence{};
};

using DetectionD = Detection<double>;

}  // namespace nseg
