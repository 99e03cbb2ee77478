#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dualgen/compose.hpp"
#include "dualgen/error.hpp"
#include "fixtures.hpp"

namespace dualgen::compose {
namespace {

using diffusion::make_schedule;
using diffusion::ScheduleKind;
using graph::Positions;

const chem::AtomTypeVocab kLig = chem::AtomTypeVocab::ligand_default();

egnn::NetworkConfig tiny_config() {
  egnn::NetworkConfig c;
  c.hidden = 8;
  c.layers = 2;
  c.rbf_count = 6;
  c.time_features = 4;
  return c;
}

Positions random_positions(Rng& rng, Eigen::Index n) {
  Positions x(n, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  return x;
}

Eigen::MatrixXd random_simplex(Rng& rng, Eigen::Index n, Eigen::Index k) {
  Eigen::MatrixXd p(n, k);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = rng.uniform() + 1e-3;
  for (Eigen::Index i = 0; i < n; ++i) p.row(i) /= p.row(i).sum();
  return p;
}

ProberPosePair make_prober(Rng& rng, const std::string& id, const geom::RigidTransform& pose2_from_pose1,
                           double noise, double s1, double s2) {
  ProberPosePair p;
  p.id = id;
  p.pose1 = testing::random_molecule(rng, 6, 2.0);
  p.pose2 = testing::transformed(p.pose1, pose2_from_pose1);
  for (auto& a : p.pose2.atoms) a.position += testing::random_point(rng, noise);
  p.score1 = s1;
  p.score2 = s2;
  return p;
}

TEST(TypeComposition, ThreeClassHandProduct) {
  Eigen::MatrixXd c1(1, 3), c2(1, 3);
  c1 << 0.5, 0.3, 0.2;
  c2 << 0.2, 0.3, 0.5;
  const Eigen::MatrixXd out = compose_type_posteriors(c1, c2, {});
  EXPECT_NEAR(out(0, 0), 0.1 / 0.29, 1e-15);
  EXPECT_NEAR(out(0, 1), 0.09 / 0.29, 1e-15);
  EXPECT_NEAR(out(0, 2), 0.1 / 0.29, 1e-15);
  EXPECT_NEAR(out(0, 0), 0.3448, 1e-4);
  EXPECT_NEAR(out(0, 1), 0.3103, 1e-4);
}

TEST(TypeComposition, MatchesElementwiseLoop) {
  Rng rng(70);
  for (const bool tempered : {false, true}) {
    for (const double eta : {0.5, 0.3, 1.0}) {
      CompositionMode mode;
      mode.eta = eta;
      mode.tempered_types = tempered;
      const auto c1 = random_simplex(rng, 4, 7);
      const auto c2 = random_simplex(rng, 4, 7);
      const Eigen::MatrixXd got = compose_type_posteriors(c1, c2, mode);
      for (Eigen::Index i = 0; i < 4; ++i) {
        double z = 0.0;
        std::vector<double> w(7);
        for (Eigen::Index k = 0; k < 7; ++k) {
          w[static_cast<std::size_t>(k)] = c1(i, k) * c2(i, k);
          if (tempered) w[static_cast<std::size_t>(k)] = std::pow(w[static_cast<std::size_t>(k)], eta);
          z += w[static_cast<std::size_t>(k)];
        }
        for (Eigen::Index k = 0; k < 7; ++k) EXPECT_NEAR(got(i, k), w[static_cast<std::size_t>(k)] / z, 1e-14);
      }
    }
  }
  EXPECT_THROW(compose_type_posteriors(random_simplex(rng, 2, 3), random_simplex(rng, 3, 3), {}), ShapeMismatch);
}

TEST(TypeComposition, TemperedHalfReducesOnIdenticalInputs) {
  Rng rng(71);
  const auto c = random_simplex(rng, 5, 7);
  CompositionMode mode;
  mode.tempered_types = true;
  EXPECT_LT((compose_type_posteriors(c, c, mode) - c).cwiseAbs().maxCoeff(), 1e-15);
  // The plain product sharpens instead: the largest class gains mass.
  const Eigen::MatrixXd sharp = compose_type_posteriors(c, c, {});
  for (Eigen::Index i = 0; i < 5; ++i) {
    Eigen::Index top = 0;
    c.row(i).maxCoeff(&top);
    EXPECT_GT(sharp(i, top), c(i, top));
  }
}

TEST(PositionComposition, WeightedPredictionThroughPosterior) {
  Rng rng(72);
  const auto s = make_schedule(ScheduleKind::Linear, 30, 1e-3, 0.1);
  const Positions xt = random_positions(rng, 5), a = random_positions(rng, 5), b = random_positions(rng, 5);
  for (const double eta : {0.25, 0.5, 1.0}) {
    CompositionMode mode;
    mode.eta = eta;
    for (int t : {1, 2, 17, 30}) {
      const Positions want = diffusion::posterior_pos(xt, eta * a + (1 - eta) * b, t, s).mean;
      EXPECT_LT((compose_position_mean(xt, a, b, t, s, mode) - want).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
  CompositionMode one;
  one.eta = 1.0;
  EXPECT_EQ(compose_position_mean(xt, a, b, 9, s, one), diffusion::posterior_pos(xt, a, 9, s).mean);
  for (const double bad : {0.0, -0.1, 1.5}) {
    CompositionMode m;
    m.eta = bad;
    EXPECT_THROW(compose_position_mean(xt, a, b, 3, s, m), BadRange);
  }
}

TEST(PositionComposition, DriftFormAgreesAtEqualWeights) {
  Rng rng(73);
  const auto s = make_schedule(ScheduleKind::Cosine, 30, 1e-3, 0.1);
  const Positions xt = random_positions(rng, 5), a = random_positions(rng, 5), b = random_positions(rng, 5);
  CompositionMode avg, drift;
  drift.epsilon_form = true;
  for (int t = 1; t <= 30; ++t) {
    EXPECT_LT((compose_position_mean(xt, a, b, t, s, avg) - compose_position_mean(xt, a, b, t, s, drift))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
  // x_t - η(d1 + d2) with d_v = x_t - μ̃(x̂0_v).
  drift.eta = 0.3;
  const Positions d1 = xt - diffusion::posterior_pos(xt, a, 12, s).mean;
  const Positions d2 = xt - diffusion::posterior_pos(xt, b, 12, s).mean;
  EXPECT_LT((compose_position_mean(xt, a, b, 12, s, drift) - (xt - 0.3 * (d1 + d2))).cwiseAbs().maxCoeff(), 1e-12);
  avg.eta = 0.3;
  EXPECT_GT((compose_position_mean(xt, a, b, 12, s, drift) - compose_position_mean(xt, a, b, 12, s, avg))
                .cwiseAbs()
                .maxCoeff(),
            1e-6);
}

TEST(Alignment, CenterCriterionMatchesCentroids) {
  Rng rng(74);
  const auto p1 = testing::random_pocket(rng, 10);
  auto p2 = testing::random_pocket(rng, 7);
  const auto t = align_center(p1, p2);
  EXPECT_EQ(t.rotation, Eigen::Matrix3d::Identity());
  EXPECT_LT((geom::centroid(transform_pocket(p2, t).positions()) - geom::centroid(p1.positions())).norm(), 1e-12);
  const auto r = align_pockets(p1, p2, {}, AlignmentCriterion::Center);
  EXPECT_TRUE(r.prober_id.empty());
  EXPECT_EQ(r.transform.translation, t.translation);
}

TEST(Alignment, ProberRecoversKnownTransform) {
  Rng rng(75);
  const auto t0 = testing::random_transform(rng);
  const std::vector<ProberPosePair> probers = {make_prober(rng, "only", t0, 0.0, -7, -8)};
  const auto r = align_prober(probers, AlignmentCriterion::MinRmsd);
  const auto inv = t0.inverse();
  EXPECT_LT((r.transform.rotation - inv.rotation).norm(), 1e-9);
  EXPECT_LT((r.transform.translation - inv.translation).norm(), 1e-9);
  EXPECT_EQ(r.prober_id, "only");
  EXPECT_LT(prober_rmsd(probers[0]), 1e-9);
}

TEST(Alignment, CriteriaPickTheirWinners) {
  Rng rng(76);
  const auto t0 = testing::random_transform(rng);
  const std::vector<ProberPosePair> probers = {
      make_prober(rng, "noisy_best_score", t0, 0.5, -10, -10),
      make_prober(rng, "clean", t0, 0.01, -5, -5),
      make_prober(rng, "mid", t0, 0.2, -6, -9),
  };
  EXPECT_EQ(align_prober(probers, AlignmentCriterion::MinRmsd).prober_id, "clean");
  EXPECT_EQ(align_prober(probers, AlignmentCriterion::MinScoreSum).prober_id, "noisy_best_score");
  // Brute force over the list.
  std::size_t best = 0;
  for (std::size_t i = 1; i < probers.size(); ++i) {
    if (prober_rmsd(probers[i]) < prober_rmsd(probers[best])) best = i;
  }
  EXPECT_EQ(align_prober(probers, AlignmentCriterion::MinRmsd).prober_id, probers[best].id);
}

TEST(Alignment, TiesDegenerateAndEmpty) {
  Rng rng(77);
  const auto t0 = testing::random_transform(rng);
  auto a = make_prober(rng, "a", t0, 0.1, -4, -4);
  auto b = make_prober(rng, "b", t0, 0.1, -5, -3);
  const std::vector<ProberPosePair> tie = {a, b};
  EXPECT_EQ(align_prober(tie, AlignmentCriterion::MinScoreSum).prober_id, "a");

  ProberPosePair line = a;
  line.id = "line";
  line.score1 = -100;
  for (std::size_t i = 0; i < line.pose1.atoms.size(); ++i) {
    line.pose1.atoms[i].position = geom::Point3(1.0 * i, 0, 0);
    line.pose2.atoms[i].position = geom::Point3(0, 1.0 * i, 0);
  }
  const std::vector<ProberPosePair> with_line = {line, b};
  EXPECT_EQ(align_prober(with_line, AlignmentCriterion::MinScoreSum).prober_id, "b");
  const std::vector<ProberPosePair> only_line = {line};
  EXPECT_THROW(align_prober(only_line, AlignmentCriterion::MinRmsd), DegenerateInput);
  EXPECT_THROW(align_prober({}, AlignmentCriterion::MinRmsd), EmptyProbers);
  EXPECT_THROW(align_prober(tie, AlignmentCriterion::Center), BadRange);
  EXPECT_THROW(parse_criterion("best"), BadRange);
  EXPECT_EQ(parse_criterion("score"), AlignmentCriterion::MinScoreSum);
  EXPECT_EQ(parse_composition_kind("compdiff"), CompositionKind::CompDiff);
  EXPECT_THROW(parse_composition_kind("both"), BadRange);
}

TEST(ProberIo, RoundTripIsExact) {
  Rng rng(78);
  const auto t0 = testing::random_transform(rng);
  const std::vector<ProberPosePair> probers = {make_prober(rng, "p1", t0, 0.1, -7.25, -8.5),
                                               make_prober(rng, "p2", t0, 0.3, -6.0, -6.1)};
  const auto back = parse_probers(serialize_probers(probers, kLig), kLig);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].id, probers[i].id);
    EXPECT_EQ(back[i].score1, probers[i].score1);
    EXPECT_EQ(back[i].score2, probers[i].score2);
    EXPECT_EQ(back[i].pose1, probers[i].pose1);
    EXPECT_EQ(back[i].pose2, probers[i].pose2);
  }
}

TEST(ProberIo, RejectsMalformedRecords) {
  const std::string pose_c = "1\nm\nC 0 0 0\n";
  const std::string pose_n = "1\nm\nN 0 0 0\n";
  const std::string pose_cc = "2\nm\nC 0 0 0\nC 1 0 0\n";
  EXPECT_THROW(parse_probers("PROBER x -1\n" + pose_c + pose_c, kLig), ParseError);
  EXPECT_THROW(parse_probers("PROBER x -1 abc\n" + pose_c + pose_c, kLig), ParseError);
  EXPECT_THROW(parse_probers("PROBER x -1 -2\n" + pose_c + pose_cc, kLig), ParseError);
  EXPECT_THROW(parse_probers("PROBER x -1 -2\n" + pose_c + pose_n, kLig), ParseError);
  EXPECT_EQ(parse_probers("PROBER x -1 -2\n" + pose_c + pose_c, kLig).size(), 1u);
}

TEST(ProberIo, TransformText) {
  geom::RigidTransform t;
  t.translation = Eigen::Vector3d(1.5, -2, 0.1);
  std::istringstream in(serialize_transform(t));
  std::string word;
  double v[3];
  for (int r = 0; r < 3; ++r) {
    in >> word >> v[0] >> v[1] >> v[2];
    EXPECT_EQ(word, "rotation");
    for (int c = 0; c < 3; ++c) EXPECT_EQ(v[c], r == c ? 1.0 : 0.0);
  }
  in >> word >> v[0] >> v[1] >> v[2];
  EXPECT_EQ(word, "translation");
  EXPECT_EQ(v[0], 1.5);
  EXPECT_EQ(v[2], 0.1);
}

struct DualFixture {
  egnn::NetworkParams params;
  chem::Pocket pocket;
  diffusion::NoiseSchedule schedule;
};

DualFixture dual_fixture(std::uint64_t seed) {
  Rng rng(seed);
  auto params = egnn::NetworkParams::random(tiny_config(), rng);
  auto pocket = testing::random_pocket(rng, 14);
  return {std::move(params), std::move(pocket), make_schedule(ScheduleKind::Linear, 10, 1e-3, 0.2)};
}

TEST(DualSampling, IdenticalPocketsReduceToSingleTarget) {
  const auto f = dual_fixture(79);
  diffusion::SamplingOptions opts;
  opts.k = 6;
  CompositionMode dual;
  CompositionMode comp;
  comp.kind = CompositionKind::CompDiff;
  comp.tempered_types = true;
  for (int seed = 0; seed < 5; ++seed) {
    Rng a(seed), b(seed), c(seed);
    const auto single = diffusion::sample_single(f.params, f.pocket, 6, f.schedule, a, opts);
    const auto d = sample_dual_aligned(f.params, f.pocket, f.pocket, 6, f.schedule, dual, b, opts);
    const auto m = sample_dual_aligned(f.params, f.pocket, f.pocket, 6, f.schedule, comp, c, opts);
    for (std::size_t i = 0; i < 6; ++i) {
      EXPECT_EQ(d.atoms[i].position, single.atoms[i].position);
      EXPECT_LT((m.atoms[i].position - single.atoms[i].position).norm(), 1e-9);
      EXPECT_EQ(d.atoms[i].type_index(), single.atoms[i].type_index());
      EXPECT_EQ(m.atoms[i].type_index(), single.atoms[i].type_index());
    }
  }
}

TEST(DualSampling, JointRigidMotion) {
  const auto f = dual_fixture(80);
  Rng rng(81);
  const auto p2 = testing::random_pocket(rng, 11);
  for (const auto kind : {CompositionKind::DualDiff, CompositionKind::CompDiff}) {
    CompositionMode mode;
    mode.kind = kind;
    for (int trial = 0; trial < 3; ++trial) {
      const auto t = testing::random_transform(rng);
      diffusion::SamplingOptions opts;
      opts.k = 6;
      Rng a(trial), b(trial);
      const auto m1 = sample_dual_aligned(f.params, f.pocket, p2, 5, f.schedule, mode, a, opts);
      opts.noise_frame = t.rotation;
      const auto m2 = sample_dual_aligned(f.params, testing::transformed(f.pocket, t), testing::transformed(p2, t), 5,
                                          f.schedule, mode, b, opts);
      const auto moved = testing::transformed(m1, t);
      for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_LT((moved.atoms[i].position - m2.atoms[i].position).norm(), 1e-6);
        EXPECT_EQ(m1.atoms[i].type_index(), m2.atoms[i].type_index());
      }
    }
  }
}

TEST(DualSampling, AlignmentAppliedBeforeSampling) {
  const auto f = dual_fixture(82);
  Rng rng(83);
  const auto p2 = testing::random_pocket(rng, 9);
  diffusion::SamplingOptions opts;
  opts.k = 6;
  Rng a(4), b(4);
  const auto out = sample_dual(f.params, f.pocket, p2, {}, AlignmentCriterion::Center, 4, f.schedule, {}, a, opts);
  const auto direct = sample_dual_aligned(f.params, f.pocket, transform_pocket(p2, align_center(f.pocket, p2)), 4,
                                          f.schedule, {}, b, opts);
  EXPECT_EQ(out.molecule, direct);
  EXPECT_TRUE(out.alignment.prober_id.empty());
}

}  // namespace
}  // namespace dualgen::compose
