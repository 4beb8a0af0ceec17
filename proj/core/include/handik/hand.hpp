#pragma once

#include "handik/types.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

namespace handik {

inline constexpr std::size_t kLandmarkCount = 21;

/// Indices of the standard 21-keypoint hand topology.
enum class LandmarkId : std::uint8_t {
  Wrist = 0,
  ThumbCmc = 1,
  ThumbMcp = 2,
  ThumbIp = 3,
  ThumbTip = 4,
  IndexFingerMcp = 5,
  IndexFingerPip = 6,
  IndexFingerDip = 7,
  IndexFingerTip = 8,
  MiddleFingerMcp = 9,
  MiddleFingerPip = 10,
  MiddleFingerDip = 11,
  MiddleFingerTip = 12,
  RingFingerMcp = 13,
  RingFingerPip = 14,
  RingFingerDip = 15,
  RingFingerTip = 16,
  PinkyMcp = 17,
  PinkyPip = 18,
  PinkyDip = 19,
  PinkyTip = 20,
};

constexpr std::size_t index_of(LandmarkId id) { return static_cast<std::size_t>(id); }

enum class Handedness { Left, Right };

const char* handedness_name(Handedness h);
Handedness parse_handedness(const std::string& s);  // throws FormatError

/// One timestamped hand observation: 21 pixel-space landmarks plus validity
/// flags. Pixels of invalid landmarks are meaningless and must not be read.
struct LandmarkFrame {
  double timestamp_s = 0.0;
  Handedness handedness = Handedness::Right;
  std::array<Eigen::Vector2d, kLandmarkCount> pixels{};
  std::array<bool, kLandmarkCount> pixel_valid{};

  int valid_count() const;
};

/// Per-landmark first-order low-pass over pixel coordinates.
///
/// Each landmark keeps its own history; a dropout clears that landmark's
/// history so a stale estimate is never blended into a fresh re-detection.
class SmoothingState2D {
 public:
  explicit SmoothingState2D(double alpha = 0.8);

  double alpha() const { return alpha_; }

  /// Blends alpha*raw + (1-alpha)*previous per valid landmark and records
  /// the blended value as the new history. The first observation of a
  /// landmark passes through unchanged.
  LandmarkFrame smooth(const LandmarkFrame& raw);

  void reset();

 private:
  double alpha_;
  std::array<std::optional<Eigen::Vector2d>, kLandmarkCount> previous_{};
};

inline LandmarkFrame ema_smooth_2d(SmoothingState2D& state, const LandmarkFrame& raw) {
  return state.smooth(raw);
}

enum class FrameAcceptance { Accept, Reject };

/// A frame is usable iff at least half of its 21 landmarks are valid,
/// i.e. valid_count >= 11.
FrameAcceptance frame_acceptance(int valid_count);

}  // namespace handik
