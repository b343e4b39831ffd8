#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "tactex/common/png_io.hpp"
#include "tactex/scene/camera.hpp"
#include "tactex/scene/render.hpp"
#include "tactex/scene/scene.hpp"

namespace sc = tactex::scene;

namespace {

sc::Scene single_object_scene(double x, double y, double r) {
  sc::Scene s;
  s.objects.push_back({0, "lime", {x, y, r}, r, {10, 200, 10}, 70.0});
  return s;
}

}  // namespace

TEST(Camera, PrincipalRayAndFocalOffset) {
  const sc::CameraIntrinsics k;
  const auto p0 = sc::project_pixel(k, 309.4, 213.83, 500.0);
  EXPECT_NEAR(p0.norm() - 500.0, 0.0, 1e-12);
  EXPECT_NEAR(p0.x(), 0.0, 1e-12);
  const auto p1 = sc::project_pixel(k, 309.4 + 608.5, 213.83, 500.0);
  EXPECT_NEAR(p1.x(), 500.0, 1e-9);
  EXPECT_NEAR(p1.y(), 0.0, 1e-12);
}

TEST(Camera, CornerPixelMatchesHandEvaluation) {
  const sc::CameraIntrinsics k;
  const auto p = sc::project_pixel(k, 0.0, 0.0, 400.0);
  EXPECT_NEAR(p.x(), -203.3854, 1e-3);
  EXPECT_NEAR(p.y(), -140.9327, 1e-3);
  EXPECT_DOUBLE_EQ(p.z(), 400.0);
}

TEST(Camera, RejectsBadInput) {
  const sc::CameraIntrinsics k;
  EXPECT_THROW(sc::project_pixel(k, 1, 1, 0.0), std::invalid_argument);
  sc::CameraIntrinsics bad = k;
  bad.cx = 700;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = k;
  bad.fy = -1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Camera, PoseRoundTripAndAxes) {
  const sc::CameraPose pose;
  const Eigen::Vector3d w(120, 310, 25);
  EXPECT_TRUE(pose.camera_to_world(pose.world_to_camera(w)).isApprox(w));
  const auto table_center = pose.world_to_camera({300, 200, 0});
  EXPECT_TRUE(table_center.isApprox(Eigen::Vector3d(0, 0, 600)));
  // front of the table maps to the bottom rows of the image
  const sc::CameraIntrinsics k;
  EXPECT_GT(sc::project_point(k, pose.world_to_camera({300, 20, 0})).y(), k.cy);
}

TEST(SceneGen, CardinalityAndDeterminism) {
  const auto one = sc::generate_scene(7, 1);
  ASSERT_EQ(one.objects.size(), 1u);
  EXPECT_TRUE(one.workspace.contains(one.objects[0].center.x(), one.objects[0].center.y()));
  EXPECT_EQ(sc::generate_scene(7, 3), sc::generate_scene(7, 3));
  EXPECT_NE(sc::generate_scene(7, 3), sc::generate_scene(8, 3));
}

TEST(SceneGen, SixObjectsNeverOverlap) {
  for (std::uint64_t seed = 11; seed < 61; ++seed) {
    const auto s = sc::generate_scene(seed, 6);
    ASSERT_EQ(s.objects.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
      const auto& a = s.objects[i];
      EXPECT_DOUBLE_EQ(a.center.z(), a.radius);
      EXPECT_GE(a.hardness, sc::default_class_priors().at(a.label).hardness_min);
      EXPECT_LE(a.hardness, sc::default_class_priors().at(a.label).hardness_max);
      for (std::size_t j = i + 1; j < 6; ++j) {
        EXPECT_GT((a.center - s.objects[j].center).norm(), a.radius + s.objects[j].radius);
      }
    }
  }
}

TEST(SceneGen, RandomCountInRangeAndBadCountRejected) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto n = sc::generate_scene(seed, std::nullopt).objects.size();
    EXPECT_GE(n, 1u);
    EXPECT_LE(n, 6u);
  }
  EXPECT_THROW(sc::generate_scene(1, 7), sc::SceneError);
  EXPECT_THROW(sc::generate_scene(1, 0), sc::SceneError);
}

TEST(SceneGen, CrowdedWorkspaceFailsExplicitly) {
  sc::SceneConfig cfg;
  cfg.workspace = {250, 350, 150, 250};
  cfg.max_attempts = 200;
  EXPECT_THROW(sc::generate_scene(3, 6, cfg), sc::SceneError);
}

TEST(SceneGen, JsonRoundTrip) {
  const auto s = sc::generate_scene(21, 4);
  const auto back = sc::scene_from_json(sc::to_json(s));
  EXPECT_EQ(back, s);
  EXPECT_EQ(sc::to_json(s)["objects"][0].count("class"), 1u);
}

TEST(Render, OpticalAxisDepthIsCameraHeightMinusObjectHeight) {
  const sc::CameraIntrinsics k;
  const double r = 30.0;
  const auto f = sc::render(single_object_scene(300.0, 200.0, r), k, 0.0);
  // pixel (309, 214) is 0.4 px from the principal point; the sphere cap is flat to 0.01 mm there
  EXPECT_NEAR(f.depth.at(309, 214), 600.0 - 2.0 * r, 0.01);
  EXPECT_DOUBLE_EQ(f.depth.at(5, 5), 600.0);
}

TEST(Render, NoiselessIsBitIdenticalAndDepthNonNegative) {
  const sc::CameraIntrinsics k;
  const auto s = sc::generate_scene(5, 4);
  const auto a = sc::render(s, k, 0.0, 1);
  const auto b = sc::render(s, k, 0.0, 2);
  EXPECT_EQ(a.color, b.color);
  EXPECT_EQ(a.depth, b.depth);
  const auto noisy = sc::render(s, k, 50.0, 9);
  for (double d : noisy.depth.data()) EXPECT_GE(d, 0.0);
}

TEST(Render, NoiseStdMatchesSigmaOnObjectPixels) {
  const sc::CameraIntrinsics k;
  const auto s = single_object_scene(300.0, 200.0, 35.0);
  const auto frames = sc::render_sequence(s, k, 2.0, 77, 10);
  const auto clean = sc::render(s, k, 0.0);
  const auto mask = sc::ground_truth_mask(s, 0, k);
  double sum_std = 0.0;
  int n = 0;
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      if (!mask.at(u, v)) continue;
      double m = 0, ss = 0;
      for (const auto& f : frames) m += f.depth.at(u, v);
      m /= 10.0;
      for (const auto& f : frames) ss += (f.depth.at(u, v) - m) * (f.depth.at(u, v) - m);
      sum_std += std::sqrt(ss / 9.0);
      ++n;
    }
  }
  ASSERT_GT(n, 1000);
  // mean sample std is biased low by c4(10) ~ 0.973; well inside the 30% band
  EXPECT_NEAR(sum_std / n, 2.0, 0.6);
  EXPECT_NEAR(sum_std / n, 2.0 * 0.9727, 0.05);
  (void)clean;
}

TEST(Render, MaskMatchesSoloColorFootprint) {
  const sc::CameraIntrinsics k;
  const auto s = sc::generate_scene(13, 5);
  for (const auto& o : s.objects) {
    const auto mask = sc::ground_truth_mask(s, o.id, k);
    sc::Scene solo;
    solo.objects.push_back(o);
    const auto f = sc::render(solo, k, 0.0);
    std::size_t mismatches = 0;
    for (int v = 0; v < k.height; ++v)
      for (int u = 0; u < k.width; ++u) {
        const bool table = f.color.at(u, v, 0) == sc::kTableColor.r && f.color.at(u, v, 1) == sc::kTableColor.g &&
                           f.color.at(u, v, 2) == sc::kTableColor.b;
        mismatches += (mask.at(u, v) != 0) == table;
      }
    EXPECT_EQ(mismatches, 0u);
    EXPECT_GT(tactex::mask_area(mask), 0u);
    // fully in view: nothing touches the border
    for (int u = 0; u < k.width; ++u) EXPECT_FALSE(mask.at(u, 0) || mask.at(u, k.height - 1));
  }
  EXPECT_THROW(sc::ground_truth_mask(s, 99, k), sc::SceneError);
}

TEST(Render, MasksOfDistinctObjectsAreDisjoint) {
  const sc::CameraIntrinsics k;
  const auto s = sc::generate_scene(17, 6);
  const auto a = sc::ground_truth_mask(s, 0, k);
  for (std::size_t j = 1; j < s.objects.size(); ++j) {
    const auto b = sc::ground_truth_mask(s, static_cast<int>(j), k);
    for (std::size_t i = 0; i < a.data().size(); ++i) EXPECT_FALSE(a.data()[i] && b.data()[i]);
  }
}

TEST(Render, TinyObjectRoundTripWithinOnePixelEquivalent) {
  const sc::CameraIntrinsics k;
  const sc::CameraPose pose;
  for (const auto& [x, y] : std::vector<std::pair<double, double>>{{300, 200}, {80, 60}, {510, 330}, {420, 120}}) {
    const double r = 0.6;
    const auto s = single_object_scene(x, y, r);
    const auto f = sc::render(s, k, 0.0);
    const auto mask = sc::ground_truth_mask(s, 0, k);
    ASSERT_GT(tactex::mask_area(mask), 0u);
    // nearest rendered pixel to the top of the point object
    double best = 1e9;
    Eigen::Vector3d best_p;
    for (int v = 0; v < k.height; ++v)
      for (int u = 0; u < k.width; ++u)
        if (mask.at(u, v)) {
          const auto p = pose.camera_to_world(sc::project_pixel(k, u, v, f.depth.at(u, v)));
          const double e = (p - Eigen::Vector3d(x, y, 2 * r)).norm();
          best = std::min(best, e);
        }
    EXPECT_LT(best, k.pixel_equivalent(600.0 - 2 * r));
  }
}

TEST(Render, PngExportRoundTrip) {
  const sc::CameraIntrinsics k;
  const auto f = sc::render(sc::generate_scene(2, 3), k, 1.0, 4);
  const auto dir = std::filesystem::temp_directory_path() / "tactex_scene_png";
  sc::export_frame(f, dir, "f0");
  EXPECT_EQ(tactex::png::read8(dir / "f0_color.png"), f.color);
  EXPECT_EQ(tactex::png::read16(dir / "f0_depth.png"), sc::depth_to_u16(f.depth));
  std::filesystem::remove_all(dir);
}
