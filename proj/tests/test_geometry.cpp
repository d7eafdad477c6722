#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "pinspect/geometry.hpp"
#include "pinspect/json_util.hpp"

using namespace pinspect;

namespace {

std::mt19937_64 rng(42);

RigidTransform random_transform() {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Vec3 axis = Vec3(u(rng), u(rng), u(rng)).normalized();
  const double angle = u(rng) * kPi;
  RigidTransform t = RigidTransform::axis_angle(axis, angle);
  t.translation = Vec3(u(rng), u(rng), u(rng)) * 0.5;
  return t;
}

double max_abs_diff(const RigidTransform& a, const RigidTransform& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("compose identity and inverse") {
  const RigidTransform t = random_transform();
  CHECK(max_abs_diff(compose(RigidTransform::identity(), t), t) < 1e-12);
  CHECK(max_abs_diff(compose(t, invert(t)), RigidTransform::identity()) < 1e-9);
}

TEST_CASE("rotation group closure") {
  const RigidTransform r90 = RigidTransform::rot_z(rad(90));
  const RigidTransform r180 = RigidTransform::rot_z(rad(180));
  CHECK(max_abs_diff(compose(r90, r90), r180) < 1e-12);
}

TEST_CASE("invert matches explicit formulas") {
  const RigidTransform i = invert(RigidTransform::identity());
  CHECK(max_abs_diff(i, RigidTransform::identity()) < 1e-15);

  const RigidTransform t = RigidTransform::translate(Vec3(1, 2, 3));
  CHECK((invert(t).translation - Vec3(-1, -2, -3)).norm() < 1e-15);

  for (int k = 0; k < 100; ++k) {
    const RigidTransform r = random_transform();
    CHECK(max_abs_diff(invert(invert(r)), r) < 1e-9);
    CHECK((invert(r).rotation - r.rotation.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("composition associativity") {
  for (int k = 0; k < 100; ++k) {
    const RigidTransform a = random_transform(), b = random_transform(), c = random_transform();
    CHECK(max_abs_diff(compose(compose(a, b), c), compose(a, compose(b, c))) < 1e-9);
  }
}

TEST_CASE("orthonormality drift over 1000 compositions") {
  RigidTransform acc;
  const RigidTransform step = random_transform();
  for (int k = 0; k < 1000; ++k) acc = compose(acc, step);
  CHECK(acc.orthonormality_error() < 1e-6);
  CHECK(acc.orthonormalized().orthonormality_error() < 1e-14);
}

TEST_CASE("projection formula and paper hole sizes") {
  PinholeCamera cam;  // f = 1733, 1024x1024, centered
  cam.validate();

  // (0,0,Z) lands on the principal point.
  CHECK((project(Vec3(0, 0, 0.15), cam) - cam.principal_point).norm() < 1e-12);

  // Hole diameters 0.9 / 1.2 / 1.1 mm at 0.15 m project near 10 / 14 / 13 px.
  const double spans[3] = {0.9e-3, 1.2e-3, 1.1e-3};
  const double rounded[3] = {10.0, 14.0, 13.0};
  const double exact[3] = {10.398, 13.864, 12.709};
  for (int i = 0; i < 3; ++i) {
    const Vec2 a = project(Vec3(0, 0, 0.15), cam);
    const Vec2 b = project(Vec3(spans[i], 0, 0.15), cam);
    const double px = (b - a).norm();
    CHECK(px == doctest::Approx(exact[i]).epsilon(1e-3));
    CHECK(std::abs(px - rounded[i]) < 0.5);
  }

  CHECK_THROWS_AS(project(Vec3(0, 0, 0), cam), NonPositiveDepth);
  CHECK_THROWS_AS(project(Vec3(0.1, 0, -0.2), cam), NonPositiveDepth);
}

TEST_CASE("projection is linear in inverse depth") {
  PinholeCamera cam;
  const Vec3 p(0.004, -0.002, 0.15);
  const Vec2 off1 = project(p, cam) - cam.principal_point;
  const Vec2 off2 = project(Vec3(p.x(), p.y(), 2 * p.z()), cam) - cam.principal_point;
  CHECK((off1 - 2.0 * off2).norm() < 1e-12);
}

TEST_CASE("unproject inverts project") {
  PinholeCamera cam;
  const Vec3 p(0.01, 0.005, 0.2);
  const Vec3 q = unproject(project(p, cam), p.z(), cam);
  CHECK((p - q).norm() < 1e-12);
}

TEST_CASE("pose2d theta normalization") {
  CHECK(Pose2D(0, 0, 3 * kPi).theta == doctest::Approx(kPi));
  CHECK(Pose2D(0, 0, -kPi).theta == doctest::Approx(kPi));
  CHECK(Pose2D(0, 0, rad(370)).theta == doctest::Approx(rad(10)));
}

TEST_CASE("transform file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "pinspect_t.json";
  const RigidTransform t = random_transform();
  save_transform(t, path);
  const RigidTransform r = load_transform(path);
  CHECK(max_abs_diff(t, r) < 1e-12);
  std::filesystem::remove(path);
}

TEST_CASE("camera validation") {
  PinholeCamera cam;
  cam.focal_length = -1;
  CHECK_THROWS_AS(cam.validate(), InvalidSpec);
  cam = PinholeCamera{};
  cam.principal_point = Vec2(-5, 0);
  CHECK_THROWS_AS(cam.validate(), InvalidSpec);
}
