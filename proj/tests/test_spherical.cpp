#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_support.hpp"
#include "wirerecon/spherical.hpp"

namespace wirerecon {
namespace {

using std::numbers::pi;
using testing::Rng;

double polyline_length(const Polyline<3>& pts) {
  double total = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) total += (pts[k] - pts[k - 1]).norm();
  return total;
}

Polyline<3> random_walk(Rng& rng, std::size_t n, double step) {
  Polyline<3> pts{testing::random_vec3(rng, 10.0)};
  Vec3 dir = testing::random_vec3(rng).normalized();
  for (std::size_t k = 1; k < n; ++k) {
    dir = (dir + 0.4 * testing::random_vec3(rng)).normalized();
    pts.push_back(pts.back() + step * testing::uniform(rng, 0.5, 1.5) * dir);
  }
  return pts;
}

TEST(SphToCart, Examples) {
  EXPECT_LT((sph_to_cart(1, pi / 2, 0) - Vec3(1, 0, 0)).norm(), 1e-15);
  EXPECT_LT((sph_to_cart(1, 0, 1.234) - Vec3(0, 0, 1)).norm(), 1e-15);
  const Vec3 expected(2 * std::sin(pi / 3) * std::cos(pi / 4), 2 * std::sin(pi / 3) * std::sin(pi / 4),
                      2 * std::cos(pi / 3));
  EXPECT_LT((sph_to_cart(2, pi / 3, pi / 4) - expected).norm(), 1e-15);
}

TEST(CartToSph, Examples) {
  const auto z = cart_to_sph(Vec3(0, 0, 1));
  EXPECT_EQ(z.r, 1.0);
  EXPECT_EQ(z.theta, 0.0);
  EXPECT_EQ(z.phi, 0.0);
  const auto d = cart_to_sph(Vec3(1, 1, 0));
  EXPECT_NEAR(d.r, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(d.theta, pi / 2, 1e-15);
  EXPECT_NEAR(d.phi, pi / 4, 1e-15);
  const auto o = cart_to_sph(Vec3::Zero());
  EXPECT_EQ(o.r, 0.0);
  EXPECT_EQ(o.theta, 0.0);
  EXPECT_EQ(o.phi, 0.0);
}

TEST(CartToSph, RoundTrip) {
  Rng rng(41);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 v = testing::random_vec3(rng, 100.0);
    const auto s = cart_to_sph(v);
    EXPECT_GE(s.theta, 0.0);
    EXPECT_LE(s.theta, pi);
    EXPECT_GT(s.phi, -pi);
    EXPECT_LE(s.phi, pi);
    EXPECT_LT((sph_to_cart(s.r, s.theta, s.phi) - v).norm(), 1e-12);
  }
}

TEST(CartToSph, NegativeXAxisHasPhiPi) {
  EXPECT_EQ(cart_to_sph(Vec3(-1, -0.0, 0)).phi, pi);
  EXPECT_EQ(wrap_angle(-pi), pi);
  EXPECT_NEAR(wrap_angle(3 * pi / 2), -pi / 2, 1e-15);
}

TEST(EncodeChain, StraightAlongZ) {
  Polyline<3> pts;
  for (int k = 0; k < 10; ++k) pts.emplace_back(1, 2, 2.0 * k);
  const auto chain = encode_chain(pts);
  EXPECT_EQ(chain.tip, pts.front());
  EXPECT_DOUBLE_EQ(chain.r, 2.0);
  ASSERT_EQ(chain.offsets.size(), 9u);
  for (const auto& o : chain.offsets) {
    EXPECT_EQ(o.theta, 0.0);
    EXPECT_EQ(o.phi, 0.0);
  }
}

TEST(EncodeChain, TwoPoints) {
  const Polyline<3> pts{Vec3(1, 0, 0), Vec3(2, 3, -1)};
  const auto chain = encode_chain(pts);
  const auto s = cart_to_sph(pts[1] - pts[0]);
  ASSERT_EQ(chain.offsets.size(), 1u);
  EXPECT_EQ(chain.offsets[0].theta, s.theta);
  EXPECT_EQ(chain.offsets[0].phi, s.phi);
  EXPECT_EQ(chain.r, s.r);
}

TEST(EncodeChain, ResampledHelixRoundTrip) {
  const auto dense = testing::helix(400, 20.0, 60.0, 1.0);
  auto pts = resample_polyline(dense, 2.0);
  ASSERT_GE(pts.size(), 50u);
  pts.resize(50);
  for (std::size_t k = 1; k < pts.size(); ++k) EXPECT_NEAR((pts[k] - pts[k - 1]).norm(), 2.0, 1e-12);
  const auto back = decode_chain(encode_chain(pts));
  ASSERT_EQ(back.size(), pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) EXPECT_LT((back[k] - pts[k]).norm(), 1e-9);
}

TEST(EncodeChain, RigidMotionEquivariance) {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = resample_polyline(random_walk(rng, 40, 3.0), 2.0);
    ASSERT_GE(pts.size(), 2u);
    const Mat3 R = testing::random_rotation(rng).toRotationMatrix();
    const Vec3 t = testing::random_vec3(rng, 50.0);
    Polyline<3> moved;
    for (const auto& p : pts) moved.push_back(R * p + t);
    const auto a = decode_chain(encode_chain(moved));
    const auto b = decode_chain(encode_chain(pts));
    for (std::size_t k = 0; k < pts.size(); ++k) EXPECT_LT((a[k] - (R * b[k] + t)).norm(), 1e-9);
  }
}

TEST(EncodeChain, NonUniformSpacing) {
  const Polyline<3> pts{Vec3(0, 0, 0), Vec3(0, 0, 1), Vec3(0, 0, 3)};
  try {
    encode_chain(pts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonUniformSpacing);
  }
  try {
    encode_chain(Polyline<3>{Vec3(0, 0, 0)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TooFewPoints);
  }
}

TEST(DecodeChain, Examples) {
  SphericalChain empty{Vec3(1, 2, 3), 1.0, {}};
  const auto one = decode_chain(empty);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], Vec3(1, 2, 3));

  SphericalChain step{Vec3::Zero(), 1.0, {{pi / 2, 0.0}}};
  const auto two = decode_chain(step);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_LT((two[1] - Vec3(1, 0, 0)).norm(), 1e-15);
}

TEST(DecodeChain, LengthConservation) {
  Rng rng(43);
  SphericalChain chain{testing::random_vec3(rng), 1.7, {}};
  for (int k = 0; k < 200; ++k) chain.offsets.push_back({testing::uniform(rng, 0, pi), testing::uniform(rng, -pi, pi)});
  const auto pts = decode_chain(chain);
  EXPECT_NEAR(polyline_length(pts), 1.7 * 200, 1e-9);
  for (std::size_t k = 1; k < pts.size(); ++k) EXPECT_NEAR((pts[k] - pts[k - 1]).norm(), 1.7, 1e-9);
}

TEST(ResamplePolyline, ExactChordsOnRandomCurves) {
  Rng rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pts = resample_polyline(random_walk(rng, 30, 4.0), 2.0);
    for (std::size_t k = 1; k < pts.size(); ++k) EXPECT_NEAR((pts[k] - pts[k - 1]).norm(), 2.0, 1e-9);
    const auto back = decode_chain(encode_chain(pts));
    for (std::size_t k = 0; k < pts.size(); ++k) EXPECT_LT((back[k] - pts[k]).norm(), 1e-9);
  }
}

}  // namespace
}  // namespace wirerecon
