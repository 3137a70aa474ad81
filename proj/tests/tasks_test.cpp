/*
 * Copyright 2026 The protkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "protkit/tasks.hpp"
#include "support.hpp"

namespace protkit {
namespace {

std::vector<int> random_tokens(std::size_t n, CounterRng& rng) {
  std::vector<int> t(n);
  for (auto& x : t) x = static_cast<int>(rng.uniform_index(kNumCanonical));
  return t;
}

ProteinGraph graph_of(std::size_t n, std::uint64_t seed, FeatureScheme scheme = FeatureScheme::CA_IDENT) {
  CounterRng rng(seed);
  return build_graph(testing::single_chain_structure(testing::random_chain(n, rng)), scheme, 8);
}

TEST(SequenceMutate, ExactCountAndExclusion) {
  CounterRng rng(51);
  for (std::size_t n : {1u, 7u, 8u, 100u, 333u}) {
    const auto tokens = random_tokens(n, rng);
    for (double nu : {0.0, 0.1, 0.25, 0.5, 1.0}) {
      const CorruptionResult r = corrupt_sequence_mutate(tokens, nu, rng);
      const std::size_t expect = static_cast<std::size_t>(std::floor(nu * n + 1e-9));
      EXPECT_EQ(r.mask_count(), expect);
      ASSERT_TRUE(r.targets.sequence);
      EXPECT_EQ(r.targets.sequence->positions.size(), expect);
      for (std::size_t k = 0; k < expect; ++k) {
        const std::size_t p = r.targets.sequence->positions[k];
        EXPECT_EQ(r.targets.sequence->original_tokens[k], tokens[p]);
        EXPECT_NE(r.tokens[p], tokens[p]);
        EXPECT_LT(r.tokens[p], kNumCanonical);
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (!r.mask[i]) { EXPECT_EQ(r.tokens[i], tokens[i]); }
      }
    }
  }
  const auto tokens = random_tokens(100, rng);
  EXPECT_EQ(corrupt_sequence_mutate(tokens, 0.25, rng).mask_count(), 25u);
  EXPECT_EQ(corrupt_sequence_mutate(tokens, 0.29, rng).mask_count(), 29u);
}

TEST(SequenceMutate, ReplacementUniformOverAlternatives) {
  CounterRng rng(52);
  const std::vector<int> tokens(1000, token_of(ResidueType::LEU));
  std::array<long, kNumCanonical> counts{};
  long total = 0;
  while (total < 100000) {
    const auto r = corrupt_sequence_mutate(tokens, 0.5, rng);
    for (auto p : r.targets.sequence->positions) {
      ++counts[static_cast<std::size_t>(r.tokens[p])];
      ++total;
    }
  }
  EXPECT_EQ(counts[static_cast<std::size_t>(token_of(ResidueType::LEU))], 0);
  const double expect = static_cast<double>(total) / 19.0;
  double chi2 = 0.0;
  for (int t = 0; t < kNumCanonical; ++t) {
    if (t == token_of(ResidueType::LEU)) continue;
    const double d = counts[static_cast<std::size_t>(t)] - expect;
    chi2 += d * d / expect;
  }
  // 18 degrees of freedom: the 0.999 quantile is 42.3.
  EXPECT_LT(chi2, 42.3);
}

TEST(SequenceMask, Rules) {
  CounterRng rng(53);
  const auto tokens = random_tokens(8, rng);
  EXPECT_EQ(corrupt_sequence_mask(tokens, 0.25, rng).mask_count(), 2u);
  const auto all = corrupt_sequence_mask(tokens, 1.0, rng);
  for (int t : all.tokens) EXPECT_EQ(t, kMaskToken);
  const Eigen::MatrixXd hot = all.one_hot();
  EXPECT_EQ(hot.cols(), 23);
  for (Eigen::Index r = 0; r < hot.rows(); ++r) {
    EXPECT_EQ(hot(r, kMaskToken), 1.0);
    EXPECT_EQ(hot.row(r).sum(), 1.0);
  }
  EXPECT_THROW(corrupt_sequence_mask(tokens, 1.5, rng), Error);
}

TEST(CoordGaussian, IdentityAtZeroAndInverse) {
  const ProteinGraph g = graph_of(40, 54);
  CounterRng rng(55);
  const auto zero = corrupt_coords_gaussian(g.coords, 0.0, rng);
  EXPECT_EQ(zero.coords, g.coords);
  EXPECT_EQ(zero.targets.coordinates->sigma, 0.0);
  EXPECT_GT(zero.targets.coordinates->noise.cwiseAbs().maxCoeff(), 0.0);

  const auto r = corrupt_coords_gaussian(g.coords, 0.1, rng);
  const Eigen::MatrixX3d recovered = r.coords - 0.1 * r.targets.coordinates->noise;
  EXPECT_LE((recovered - g.coords).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CoordGaussian, EmpiricalStd) {
  const Eigen::MatrixX3d x = Eigen::MatrixX3d::Zero(100000, 3);
  CounterRng rng(56);
  const auto r = corrupt_coords_gaussian(x, 0.1, rng);
  for (int c = 0; c < 3; ++c) {
    const Eigen::VectorXd col = r.coords.col(c);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / (col.size() - 1));
    EXPECT_NEAR(sd, 0.1, 0.005);
  }
}

TEST(CoordUniform, BoundedAndVariance) {
  const Eigen::MatrixX3d x = Eigen::MatrixX3d::Zero(100000, 3);
  CounterRng rng(57);
  const auto r = corrupt_coords_uniform(x, 0.2, rng);
  EXPECT_LE(r.coords.cwiseAbs().maxCoeff(), 0.2);
  for (int c = 0; c < 3; ++c) {
    const double var = r.coords.col(c).array().square().mean();
    EXPECT_NEAR(var, 0.04 / 3.0, 0.05 * 0.04 / 3.0);
  }
  CounterRng rng2(58);
  EXPECT_EQ(corrupt_coords_uniform(x.topRows(10), 0.0, rng2).coords, x.topRows(10));
}

TEST(Torsional, ZeroNoiseAndBuildMeasure) {
  CounterRng rng(59);
  const Chain c = testing::random_chain(60, rng);
  const auto zero = corrupt_torsions(c, 0.0, rng);
  EXPECT_LE(backbone_rmsd(c, *zero.rebuilt), 1e-6);

  const auto r = corrupt_torsions(c, 0.3, rng);
  const InternalCoords before = to_internal(c);
  const InternalCoords after = to_internal(*r.rebuilt);
  const auto& t = *r.targets.torsions;
  for (std::size_t i = 0; i < before.residues.size(); ++i) {
    const auto& a = before.residues[i];
    const auto& b = after.residues[i];
    const auto row = static_cast<Eigen::Index>(i);
    if (i > 0) { EXPECT_LE(oracle::angular_distance(b.phi, wrap_angle(a.phi + t.angular_noise(row, 0))), 1e-6); }
    if (i + 1 < before.residues.size()) {
      EXPECT_LE(oracle::angular_distance(b.psi, wrap_angle(a.psi + t.angular_noise(row, 1))), 1e-6);
      EXPECT_LE(oracle::angular_distance(b.omega, wrap_angle(a.omega + t.angular_noise(row, 2))), 1e-6);
      EXPECT_NEAR(a.theta_ca, b.theta_ca, 1e-6);
      EXPECT_NEAR(a.theta_c, b.theta_c, 1e-6);
      EXPECT_NEAR(t.original_dihedrals(row, 1), a.psi, 1e-12);
    }
    EXPECT_NEAR(a.theta_n, b.theta_n, 1e-6);
  }
  EXPECT_EQ(t.angular_noise(0, 0), 0.0);
  EXPECT_GT(backbone_rmsd(c, *r.rebuilt), 0.1);
}

TEST(CoDenoise, MatchesSingleModalityRuns) {
  const ProteinGraph g = graph_of(50, 60);
  CorruptionSpec seq;
  seq.kind = CorruptionKind::SEQ_MUTATE;
  seq.nu = 0.25;
  CorruptionSpec coord;
  coord.kind = CorruptionKind::COORD_GAUSS;
  coord.sigma = 0.1;
  const CounterRng root(61);
  const auto both = co_corrupt(g, seq, coord, root);

  CounterRng seq_rng = root.split(1);
  const auto seq_only = corrupt_sequence_mutate(g.tokens, 0.25, seq_rng);
  CounterRng coord_rng = root.split(2);
  const auto coord_only = corrupt_coords_gaussian(g.coords, 0.1, coord_rng);
  EXPECT_EQ(both.tokens, seq_only.tokens);
  EXPECT_EQ(both.targets.sequence->positions, seq_only.targets.sequence->positions);
  EXPECT_EQ(both.coords, coord_only.coords);
  EXPECT_EQ(both.targets.coordinates->noise, coord_only.targets.coordinates->noise);

  seq.nu = 0.0;
  coord.sigma = 0.0;
  const auto identity = co_corrupt(g, seq, coord, root);
  EXPECT_EQ(identity.tokens, g.tokens);
  EXPECT_EQ(identity.coords, g.coords);
}

TEST(Corrupt, ModalitiesStaySeparateAndDeterministic) {
  const ProteinGraph g = graph_of(64, 62);
  for (auto kind : {CorruptionKind::SEQ_MUTATE, CorruptionKind::SEQ_MASK, CorruptionKind::COORD_GAUSS,
                    CorruptionKind::COORD_UNIFORM, CorruptionKind::CO_DENOISE}) {
    CorruptionSpec spec;
    spec.kind = kind;
    spec.seed = 99;
    const auto a = corrupt(g, spec);
    const auto b = corrupt(g, spec);
    EXPECT_EQ(a.tokens, b.tokens);
    EXPECT_EQ(a.coords, b.coords);
    EXPECT_EQ(a.mask, b.mask);
    EXPECT_EQ(a.tokens.size(), g.tokens.size());
    EXPECT_EQ(a.coords.rows(), g.coords.rows());
    if (kind == CorruptionKind::SEQ_MUTATE || kind == CorruptionKind::SEQ_MASK) { EXPECT_EQ(a.coords, g.coords); }
    if (kind == CorruptionKind::COORD_GAUSS || kind == CorruptionKind::COORD_UNIFORM) { EXPECT_EQ(a.tokens, g.tokens); }
  }
  CorruptionSpec torsional;
  torsional.kind = CorruptionKind::TORSION_GAUSS;
  EXPECT_THROW(corrupt(g, torsional), Error);
  CorruptionSpec bad;
  bad.sigma = -1;
  EXPECT_THROW(corrupt(g, bad), Error);
}

TEST(MaskedAttributes, DistanceAngleDihedral) {
  const ProteinGraph g = graph_of(30, 63);
  CounterRng rng(64);
  const auto d = masked_attribute_targets(g, AttributeKind::DISTANCE, 0.2, rng);
  EXPECT_EQ(d.tuples.size(), static_cast<std::size_t>(std::floor(0.2 * g.topology.edges.size() + 1e-9)));
  for (std::size_t k = 0; k < d.tuples.size(); ++k) {
    EXPECT_DOUBLE_EQ(d.values[k], (g.position(d.tuples[k][0]) - g.position(d.tuples[k][1])).norm());
  }
  const auto a = masked_attribute_targets(g, AttributeKind::ANGLE, 0.5, rng);
  EXPECT_EQ(a.tuples.size(), 14u);  // 28 consecutive triplets
  for (std::size_t k = 0; k < a.tuples.size(); ++k) {
    const auto& t = a.tuples[k];
    EXPECT_EQ(t[1], t[0] + 1);
    EXPECT_NEAR(a.values[k], oracle::angle(g.position(t[0]), g.position(t[1]), g.position(t[2])), 1e-12);
  }
  const auto h = masked_attribute_targets(g, AttributeKind::DIHEDRAL, 1.0, rng);
  EXPECT_EQ(h.tuples.size(), 27u);
  for (std::size_t k = 0; k < h.tuples.size(); ++k) {
    const auto& t = h.tuples[k];
    EXPECT_EQ(h.values[k], dihedral(g.position(t[0]), g.position(t[1]), g.position(t[2]), g.position(t[3])));
  }
  EXPECT_TRUE(masked_attribute_targets(g, AttributeKind::DISTANCE, 0.0, rng).tuples.empty());
}

TEST(MaskedAttributes, ThreeFourFiveAndTooFew) {
  ProteinGraph g;
  g.coords.resize(2, 3);
  g.coords << 0, 0, 0, 3, 4, 0;
  g.topology = knn_graph(std::vector<Vec3>{{0, 0, 0}, {3, 4, 0}}, 1);
  g.chain_of = {0, 0};
  CounterRng rng(65);
  const auto d = masked_attribute_targets(g, AttributeKind::DISTANCE, 1.0, rng);
  ASSERT_EQ(d.values.size(), 2u);
  EXPECT_EQ(d.values[0], 5.0);
  try {
    masked_attribute_targets(g, AttributeKind::ANGLE, 1.0, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewNodes);
  }
}

TEST(Plddt, ScalingAndClamp) {
  Chain c = testing::helix_chain(3);
  const double bs[] = {100.0, 70.5, 120.0};
  for (int i = 0; i < 3; ++i) {
    for (auto& a : c.residues[static_cast<std::size_t>(i)].atoms) a.b_factor = bs[i];
  }
  const auto y = plddt_targets(testing::single_chain_structure(c));
  EXPECT_EQ(y, (std::vector<double>{1.0, 0.705, 1.0}));
  try {
    plddt_targets(testing::single_chain_structure(testing::helix_chain(3)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingConfidence);
  }
}

Structure single_ca(const Vec3& ca) {
  Chain c{'A', {}};
  Residue r;
  r.res_type = ResidueType::HIS;
  r.res_name = "HIS";
  r.seq_index = 1;
  Atom a;
  a.name = "CA";
  a.position = ca;
  r.atoms.push_back(a);
  c.residues.push_back(r);
  return testing::single_chain_structure(c);
}

TEST(MetalLabels, CutoffInclusive) {
  Structure near = single_ca(Vec3::Zero());
  near.hetero_atoms.push_back(testing::make_hetero("ZN", Vec3(3.4, 0, 0), 'A', 10));
  EXPECT_EQ(binding_site_labels(near, {"ZN"}).labels, std::vector<int>{1});
  Structure far = single_ca(Vec3::Zero());
  far.hetero_atoms.push_back(testing::make_hetero("ZN", Vec3(3.6, 0, 0), 'A', 10));
  EXPECT_EQ(binding_site_labels(far, {"ZN"}).labels, std::vector<int>{0});
  Structure exact = single_ca(Vec3::Zero());
  exact.hetero_atoms.push_back(testing::make_hetero("ZN", Vec3(3.5, 0, 0), 'A', 10));
  EXPECT_EQ(binding_site_labels(exact, {"ZN"}).labels, std::vector<int>{1});
  try {
    binding_site_labels(near, {"FE"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SelectorEmpty);
  }
}

TEST(InterfaceLabels, FarApartAndSingleChain) {
  Structure s;
  Chain a = testing::helix_chain(10);
  Chain b = testing::helix_chain(10, Vec3(60, 0, 0));
  b.id = 'B';
  s.chains = {a, b};
  for (int l : interface_labels(s).labels) EXPECT_EQ(l, 0);
  try {
    interface_labels(testing::single_chain_structure(a));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingleChain);
  }
}

TEST(Labels, MatchOraclesAndRigidMotion) {
  CounterRng rng(66);
  std::size_t positives = 0;
  for (int t = 0; t < 20; ++t) {
    const Structure s = testing::random_complex(rng, 2 + rng.uniform_index(2), 15, 6);
    const auto metal = binding_site_labels(s, {"ZN", "MG"});
    EXPECT_EQ(metal.labels, oracle::metal_labels(s, {"ZN", "MG"}, 3.5));
    const auto iface = interface_labels(s);
    EXPECT_EQ(iface.labels, oracle::interface_labels(s, 3.5));
    positives += static_cast<std::size_t>(std::accumulate(iface.labels.begin(), iface.labels.end(), 0));
    const Structure moved = testing::transform(s, testing::random_rotation(rng), testing::random_vec(rng, 25));
    EXPECT_EQ(binding_site_labels(moved, {"ZN", "MG"}).labels, metal.labels);
    EXPECT_EQ(interface_labels(moved).labels, iface.labels);
  }
  EXPECT_GT(positives, 0u);
}

}  // namespace
}  // namespace protkit
