#include "handik/hand.hpp"

#include <algorithm>

namespace handik {

const char* handedness_name(Handedness h) { return h == Handedness::Left ? "Left" : "Right"; }

Handedness parse_handedness(const std::string& s) {
  if (s == "Left" || s == "left") return Handedness::Left;
  if (s == "Right" || s == "right") return Handedness::Right;
  throw FormatError("unknown handedness: '" + s + "' (expected Left or Right)");
}

int LandmarkFrame::valid_count() const {
  return static_cast<int>(std::count(pixel_valid.begin(), pixel_valid.end(), true));
}

SmoothingState2D::SmoothingState2D(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("smoothing alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
}

LandmarkFrame SmoothingState2D::smooth(const LandmarkFrame& raw) {
  LandmarkFrame out = raw;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    if (!raw.pixel_valid[i]) {
      previous_[i].reset();
      continue;
    }
    if (previous_[i]) {
      out.pixels[i] = alpha_ * raw.pixels[i] + (1.0 - alpha_) * *previous_[i];
    }
    previous_[i] = out.pixels[i];
  }
  return out;
}

void SmoothingState2D::reset() { previous_.fill(std::nullopt); }

FrameAcceptance frame_acceptance(int valid_count) {
  // Strictly fewer than half of 21 (10.5) means rejection: 10 -> Reject,
  // 11 -> Accept.
  return valid_count < 11 ? FrameAcceptance::Reject : FrameAcceptance::Accept;
}

}  // namespace handik
