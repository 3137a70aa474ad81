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

// Release checks. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails or runs over its time budget.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli_support.hpp"
#include "fuzz.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace protkit;
namespace t = protkit::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void check(Outcome& o, bool ok, const std::string& what) {
  if (!ok && o.pass) o.detail = what;
  o.pass = o.pass && ok;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

Eigen::Matrix3d random_motion(CounterRng& rng, bool allow_reflection) {
  return allow_reflection && rng.uniform01() < 0.5 ? t::random_reflection(rng) : t::random_rotation(rng);
}

Outcome codec_size() {
  Outcome o;
  CounterRng rng(1);
  for (std::size_t n : {3u, 10u, 100u, 1000u}) {
    const std::size_t size = encode(t::random_chain(n, rng)).bytes.size();
    check(o, size == 41 + 13 * n, "n=" + std::to_string(n) + " gave " + std::to_string(size) + " bytes");
  }
  if (o.pass) o.detail = "41 + 13n bytes for n in {3,10,100,1000}";
  return o;
}

Outcome codec_fidelity() {
  Outcome o;
  CounterRng rng(2);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Chain c = t::random_chain(50 + rng.uniform_index(151), rng);
    worst = std::max(worst, backbone_rmsd(c, decode(encode(c))));
  }
  check(o, worst <= 0.01, "rmsd " + fmt(worst));
  if (o.pass) o.detail = "max backbone rmsd " + fmt(worst) + " A";
  return o;
}

Outcome nerf_inverse() {
  Outcome o;
  CounterRng rng(3);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const InternalCoords ic = t::random_internal(3 + rng.uniform_index(200), rng);
    const InternalCoords back = to_internal(from_internal(ic));
    for (std::size_t i = 0; i < ic.residues.size(); ++i) {
      const auto& a = ic.residues[i];
      const auto& b = back.residues[i];
      worst = std::max({worst, oracle::angular_distance(a.phi, b.phi), oracle::angular_distance(a.psi, b.psi),
                        oracle::angular_distance(a.omega, b.omega), std::fabs(a.theta_n - b.theta_n),
                        std::fabs(a.theta_ca - b.theta_ca), std::fabs(a.theta_c - b.theta_c)});
    }
  }
  check(o, worst <= 1e-9, "drift " + fmt(worst));
  if (o.pass) o.detail = "max angle drift " + fmt(worst) + " rad";
  return o;
}

Outcome geometry_oracles() {
  Outcome o;
  CounterRng rng(4);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vec3 p0 = t::random_vec(rng, 5), p1 = t::random_vec(rng, 5), p2 = t::random_vec(rng, 5),
               p3 = t::random_vec(rng, 5);
    worst = std::max(worst, oracle::angular_distance(dihedral(p0, p1, p2, p3), oracle::dihedral(p0, p1, p2, p3)));
  }
  for (int k = 0; k < 1000; ++k) {
    std::vector<Vec3> trace(5);
    for (auto& p : trace) p = t::random_vec(rng, 5);
    const VirtualAngleSet v = virtual_angles(trace);
    worst = std::max(worst, std::fabs(*v.kappa[2] - oracle::angle(trace[1], trace[2], trace[3])));
    worst = std::max(worst, oracle::angular_distance(*v.alpha[1], oracle::dihedral(trace[0], trace[1], trace[2], trace[3])));
  }
  const char* lys[] = {"N", "CA", "CB", "CG", "CD", "CE", "NZ"};
  for (int k = 0; k < 1000; ++k) {
    Residue r;
    r.res_type = ResidueType::LYS;
    r.res_name = "LYS";
    std::vector<Vec3> p;
    for (const char* name : lys) {
      Atom a;
      a.name = name;
      a.position = t::random_vec(rng, 5);
      p.push_back(a.position);
      r.atoms.push_back(a);
    }
    const ChiSet chi = sidechain_torsions(r);
    for (std::size_t c = 0; c < 4; ++c) {
      worst = std::max(worst, oracle::angular_distance(*chi.chi[c], oracle::dihedral(p[c], p[c + 1], p[c + 2], p[c + 3])));
    }
  }
  check(o, worst <= 1e-12, "angle drift " + fmt(worst));
  std::size_t graphs = 0;
  for (int k = 0; k < 200; ++k) {
    std::vector<Vec3> pts(2 + rng.uniform_index(120));
    for (auto& p : pts) p = t::random_vec(rng, 20);
    for (std::size_t kk : {1u, 4u, 16u}) {
      const bool same = knn_graph(pts, kk).edges == oracle::knn_edges(pts, kk);
      check(o, same, "knn mismatch k=" + std::to_string(kk));
      graphs += same;
    }
  }
  if (o.pass) o.detail = "angle drift " + fmt(worst) + ", " + std::to_string(graphs) + " knn graphs exact";
  return o;
}

struct Scene {
  Eigen::MatrixXd S;
  Eigen::MatrixX3d X;
  GraphTopology g;
};

Scene random_scene(CounterRng& rng, int dim) {
  Scene s;
  const auto n = static_cast<Eigen::Index>(20 + rng.uniform_index(30));
  s.S.resize(n, dim);
  for (Eigen::Index i = 0; i < s.S.size(); ++i) s.S.data()[i] = rng.uniform_symmetric();
  s.X.resize(n, 3);
  std::vector<Vec3> pts;
  for (Eigen::Index i = 0; i < n; ++i) {
    pts.push_back(t::random_vec(rng, 10));
    s.X.row(i) = pts.back().transpose();
  }
  s.g = knn_graph(pts, 8);
  return s;
}

Outcome symmetry_suite() {
  Outcome o;
  CounterRng rng(5);
  double drift = 0.0, frame = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto seed = static_cast<std::uint64_t>(1000 + k);
    const int dim = 3 + static_cast<int>(rng.uniform_index(5));
    const Scene s = random_scene(rng, dim);
    const Vec3 shift = t::random_vec(rng, 50);

    SchNetParams sp;
    sp.rbf_centers = linear_centers(0.0, 20.0, 12);
    sp.filter_mlp = seeded_init({12, 16, dim}, Activation::SILU, seed);
    const Eigen::Matrix3d Q = random_motion(rng, true);
    drift = std::max(drift, t::rel_drift(schnet_layer(s.S, t::transform(s.X, Q, shift), s.g, sp),
                                         schnet_layer(s.S, s.X, s.g, sp)));

    EgnnParams ep;
    ep.message_mlp = seeded_init({2 * dim + 1, 16, 8}, Activation::SILU, seed + 1);
    ep.update_mlp = seeded_init({dim + 8, 16, dim}, Activation::SILU, seed + 2);
    ep.coord_mlp = seeded_init({2 * dim + 1, 16, 1}, Activation::SILU, seed + 3);
    const auto [S0, X0] = egnn_layer(s.S, s.X, s.g, ep);
    const auto [S1, X1] = egnn_layer(s.S, t::transform(s.X, Q, shift), s.g, ep);
    drift = std::max({drift, t::rel_drift(S1, S0), t::rel_drift(X1, t::transform(X0, Q, shift))});

    const NoisePredictorParams np = noise_predictor_init(dim, 16, seed + 4);
    const Eigen::MatrixX3d e0 = noise_predictor(s.S, s.X, s.g, np);
    const Eigen::MatrixX3d et = noise_predictor(s.S, t::transform(s.X, Eigen::Matrix3d::Identity(), shift), s.g, np);
    const Eigen::MatrixX3d er = noise_predictor(s.S, t::transform(s.X, Q, Vec3::Zero()), s.g, np);
    drift = std::max({drift, t::rel_drift(et, e0), t::rel_drift(er, e0 * Q.transpose())});

    const Eigen::Matrix3d R = t::random_rotation(rng);
    const Eigen::Matrix3d M = t::random_reflection(rng);
    const auto f0 = gcp_frames(s.X, s.g);
    const auto fr = gcp_frames(t::transform(s.X, R, Vec3::Zero()), s.g);
    const auto fm = gcp_frames(t::transform(s.X, M, Vec3::Zero()), s.g);
    for (std::size_t e = 0; e < f0.size(); ++e) {
      frame = std::max({frame, (fr[e].a - R * f0[e].a).norm(), (fr[e].b - R * f0[e].b).norm(),
                        (fr[e].c - R * f0[e].c).norm(), (fm[e].a - M * f0[e].a).norm(),
                        (fm[e].b + M * f0[e].b).norm(), (fm[e].c - M * f0[e].c).norm()});
    }
  }
  check(o, drift <= 1e-9, "layer drift " + fmt(drift));
  check(o, frame <= 1e-10, "frame drift " + fmt(frame));
  if (o.pass) o.detail = "layer drift " + fmt(drift) + ", frame drift " + fmt(frame);
  return o;
}

Outcome corruption_statistics() {
  Outcome o;
  CounterRng rng(6);
  for (std::size_t n : {4u, 17u, 100u, 257u, 1000u}) {
    std::vector<int> tokens(n);
    for (auto& x : tokens) x = static_cast<int>(rng.uniform_index(20));
    const std::size_t got = corrupt_sequence_mutate(tokens, 0.25, rng).mask_count();
    check(o, got == n / 4, "n=" + std::to_string(n) + " corrupted " + std::to_string(got));
  }
  const auto r = corrupt_coords_gaussian(Eigen::MatrixX3d::Zero(100000, 3), 0.1, rng);
  double worst_std = 0.0;
  for (int c = 0; c < 3; ++c) {
    const Eigen::ArrayXd col = r.coords.col(c).array();
    const double sd = std::sqrt((col - col.mean()).square().sum() / (col.size() - 1));
    worst_std = std::max(worst_std, std::fabs(sd - 0.1) / 0.1);
  }
  check(o, worst_std <= 0.05, "std off by " + fmt(100 * worst_std) + "%");
  double angle = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Chain c = t::random_chain(30 + rng.uniform_index(60), rng);
    const auto noisy = corrupt_torsions(c, 0.5, rng);
    const InternalCoords a = to_internal(c), b = to_internal(*noisy.rebuilt);
    for (std::size_t i = 0; i < a.residues.size(); ++i) {
      angle = std::max(angle, std::fabs(a.residues[i].theta_n - b.residues[i].theta_n));
      if (i + 1 < a.residues.size()) {
        angle = std::max({angle, std::fabs(a.residues[i].theta_ca - b.residues[i].theta_ca),
                          std::fabs(a.residues[i].theta_c - b.residues[i].theta_c)});
      }
    }
  }
  check(o, angle <= 1e-6, "bond angle drift " + fmt(angle));
  if (o.pass) o.detail = "std error " + fmt(100 * worst_std) + "%, bond angle drift " + fmt(angle);
  return o;
}

Outcome featurisation() {
  Outcome o;
  CounterRng rng(7);
  const FeatureScheme schemes[] = {FeatureScheme::CA_IDENT, FeatureScheme::CA_SEQ, FeatureScheme::CA_ANGLES,
                                   FeatureScheme::CA_BB, FeatureScheme::CA_SC};
  const int widths[] = {23, 39, 43, 49, 57};
  double drift = 0.0;
  for (int k = 0; k < 50; ++k) {
    Chain c = t::random_chain(20 + rng.uniform_index(40), rng);
    t::add_cb(c);
    const Structure s = t::single_chain_structure(c);
    const Eigen::Matrix3d R = t::random_rotation(rng);
    const Vec3 shift = t::random_vec(rng, 40);
    const Structure moved = t::transform(s, R, shift);
    for (int m = 0; m < 5; ++m) {
      const ProteinGraph a = build_graph(s, schemes[m], 16);
      const ProteinGraph b = build_graph(moved, schemes[m], 16);
      check(o, a.scalars.cols() == widths[m], std::string(scheme_name(schemes[m])) + " width");
      check(o, a.topology.edges == b.topology.edges, "topology changed under motion");
      drift = std::max(drift, t::rel_drift(b.scalars, a.scalars));
      for (std::size_t i = 0; i < a.num_nodes(); ++i) {
        for (int v = 0; v < 2; ++v) drift = std::max(drift, (b.vectors.node[i][v] - R * a.vectors.node[i][v]).norm());
      }
      for (std::size_t e = 0; e < a.vectors.edge.size(); ++e) {
        drift = std::max(drift, (b.vectors.edge[e] - R * a.vectors.edge[e]).norm());
      }
    }
  }
  check(o, drift <= 1e-9, "drift " + fmt(drift));
  if (o.pass) o.detail = "widths 23/39/43/49/57, drift " + fmt(drift);
  return o;
}

Outcome label_oracles() {
  Outcome o;
  CounterRng rng(8);
  std::size_t metal_pos = 0, iface_pos = 0;
  for (int k = 0; k < 50; ++k) {
    const Structure s = t::random_complex(rng, 2 + rng.uniform_index(3), 10 + rng.uniform_index(30), 2 + rng.uniform_index(6));
    const auto metal = binding_site_labels(s, {"ZN", "MG"}, 3.5).labels;
    const auto iface = interface_labels(s, 3.5).labels;
    check(o, metal == oracle::metal_labels(s, {"ZN", "MG"}, 3.5), "metal labels differ");
    check(o, iface == oracle::interface_labels(s, 3.5), "interface labels differ");
    for (int l : metal) metal_pos += static_cast<std::size_t>(l);
    for (int l : iface) iface_pos += static_cast<std::size_t>(l);
  }
  if (o.pass) {
    o.detail = std::to_string(metal_pos) + " metal and " + std::to_string(iface_pos) + " interface positives agree";
  }
  return o;
}

Outcome end_to_end() {
  Outcome o;
  const auto root = t::fresh_dir("acceptance_pipeline");
  const int a = t::run_pipeline(root / "a", 1);
  const int b = t::run_pipeline(root / "b", 1);
  const int c = t::run_pipeline(root / "c", 8);
  check(o, a == 0 && b == 0 && c == 0, "pipeline exit codes " + std::to_string(a) + "/" + std::to_string(b) + "/" +
                                           std::to_string(c));
  if (!o.pass) return o;
  const auto da = t::tree_digest(root / "a");
  check(o, da == t::tree_digest(root / "b"), "outputs differ between runs");
  check(o, da == t::tree_digest(root / "c"), "outputs differ between --jobs 1 and --jobs 8");
  if (o.pass) o.detail = std::to_string(da.size()) + " output files with stable SHA-256";
  return o;
}

Outcome robustness() {
  Outcome o;
  const t::FuzzTally pdb = t::fuzz_pdb(10000, 0xACCE);
  const t::FuzzTally fkc = t::fuzz_fkc(10000, 0x5EED);
  check(o, pdb.total() == 10000 && pdb.untyped == 0, std::to_string(pdb.untyped) + " untyped PDB failures");
  check(o, fkc.total() == 10000 && fkc.untyped == 0, std::to_string(fkc.untyped) + " untyped FKC1 failures");
  if (o.pass) {
    o.detail = "PDB " + std::to_string(pdb.typed) + " typed errors/" + std::to_string(pdb.ok) + " ok, FKC1 " +
               std::to_string(fkc.typed) + " typed errors/" + std::to_string(fkc.ok) + " ok";
  }
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    double budget;  // seconds
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, 1, codec_size},         {2, 5, codec_fidelity},         {3, 5, nerf_inverse},
      {4, 10, geometry_oracles},  {5, 30, symmetry_suite},        {6, 10, corruption_statistics},
      {7, 10, featurisation},     {8, 10, label_oracles},         {9, 30, end_to_end},
      {10, 60, robustness},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.pass && secs > c.budget) {
      o.pass = false;
      o.detail = "over time budget of " + fmt(c.budget) + " s";
    }
    failures += !o.pass;
    std::printf("criterion %d: %s (%.2f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
