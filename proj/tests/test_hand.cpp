#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "handik/hand.hpp"

#include <cmath>

using namespace handik;

namespace {

LandmarkFrame all_valid_frame(const Eigen::Vector2d& px) {
  LandmarkFrame f;
  f.pixels.fill(px);
  f.pixel_valid.fill(true);
  return f;
}

}  // namespace

TEST_CASE("2d smoothing blends toward the raw value") {
  SmoothingState2D state(0.8);
  (void)state.smooth(all_valid_frame({0.0, 0.0}));
  const LandmarkFrame out = state.smooth(all_valid_frame({10.0, 10.0}));
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    CHECK(out.pixels[i].x() == doctest::Approx(8.0));
    CHECK(out.pixels[i].y() == doctest::Approx(8.0));
  }
}

TEST_CASE("2d smoothing is the identity on a constant stream") {
  SmoothingState2D state(0.8);
  for (int k = 0; k < 8; ++k) {
    const LandmarkFrame out = state.smooth(all_valid_frame({5.0, 7.0}));
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      CHECK(out.pixels[i].x() == doctest::Approx(5.0).epsilon(1e-12));
      CHECK(out.pixels[i].y() == doctest::Approx(7.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("first frame passes through unchanged") {
  SmoothingState2D state(0.8);
  const LandmarkFrame out = state.smooth(all_valid_frame({3.0, 4.0}));
  CHECK(out.pixels[0].x() == 3.0);
  CHECK(out.pixels[0].y() == 4.0);
}

TEST_CASE("step response contracts by (1 - alpha) each frame") {
  const double alpha = 0.8;
  SmoothingState2D state(alpha);
  (void)state.smooth(all_valid_frame({0.0, 0.0}));
  double expected_gap = 10.0;
  for (int k = 1; k <= 10; ++k) {
    const LandmarkFrame out = state.smooth(all_valid_frame({10.0, 0.0}));
    expected_gap *= (1.0 - alpha);
    CHECK(std::abs(10.0 - out.pixels[0].x()) == doctest::Approx(expected_gap).epsilon(1e-9));
  }
}

TEST_CASE("alpha = 1 reduces smoothing to the identity") {
  SmoothingState2D state(1.0);
  (void)state.smooth(all_valid_frame({1.0, 2.0}));
  const LandmarkFrame out = state.smooth(all_valid_frame({42.5, -3.25}));
  CHECK(out.pixels[0].x() == 42.5);
  CHECK(out.pixels[0].y() == -3.25);
}

TEST_CASE("a dropout resets only that landmark's history") {
  SmoothingState2D state(0.5);
  (void)state.smooth(all_valid_frame({0.0, 0.0}));

  LandmarkFrame second = all_valid_frame({10.0, 10.0});
  second.pixel_valid[3] = false;
  (void)state.smooth(second);

  // Landmark 3 re-appears far away: it must pass through (fresh history)
  // while its neighbours keep blending.
  const LandmarkFrame third = state.smooth(all_valid_frame({100.0, 100.0}));
  CHECK(third.pixels[3].x() == 100.0);
  CHECK(third.pixels[2].x() == doctest::Approx(52.5));  // 0.5*100 + 0.5*5
}

TEST_CASE("invalid landmarks keep their flags and raw pixels") {
  SmoothingState2D state(0.8);
  LandmarkFrame f = all_valid_frame({1.0, 1.0});
  f.pixel_valid[7] = false;
  const LandmarkFrame out = state.smooth(f);
  CHECK_FALSE(out.pixel_valid[7]);
  CHECK(out.pixel_valid[6]);
}

TEST_CASE("smoothing alpha is validated") {
  CHECK_THROWS_AS(SmoothingState2D(0.0), ConfigError);
  CHECK_THROWS_AS(SmoothingState2D(1.5), ConfigError);
  CHECK_THROWS_AS(SmoothingState2D(-0.2), ConfigError);
}

TEST_CASE("frame acceptance threshold sits at half of 21") {
  CHECK(frame_acceptance(21) == FrameAcceptance::Accept);
  CHECK(frame_acceptance(11) == FrameAcceptance::Accept);
  CHECK(frame_acceptance(10) == FrameAcceptance::Reject);
  CHECK(frame_acceptance(0) == FrameAcceptance::Reject);
}

TEST_CASE("frame acceptance is monotone in the valid count") {
  bool accepted = false;
  for (int count = 0; count <= 21; ++count) {
    const bool now = frame_acceptance(count) == FrameAcceptance::Accept;
    if (accepted) CHECK(now);  // never flips back to Reject
    accepted = now;
  }
  CHECK(accepted);
}

TEST_CASE("landmark ids follow the standard 21-point layout") {
  CHECK(index_of(LandmarkId::Wrist) == 0);
  CHECK(index_of(LandmarkId::ThumbMcp) == 2);
  CHECK(index_of(LandmarkId::ThumbTip) == 4);
  CHECK(index_of(LandmarkId::IndexFingerMcp) == 5);
  CHECK(index_of(LandmarkId::IndexFingerDip) == 7);
  CHECK(index_of(LandmarkId::IndexFingerTip) == 8);
  CHECK(index_of(LandmarkId::PinkyTip) == 20);
}

TEST_CASE("handedness parsing round-trips and rejects junk") {
  CHECK(parse_handedness("Right") == Handedness::Right);
  CHECK(parse_handedness("left") == Handedness::Left);
  CHECK_THROWS_AS(parse_handedness("both"), FormatError);
}
