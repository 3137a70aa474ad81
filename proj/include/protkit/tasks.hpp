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

#pragma once

// Corruption generators and supervision targets for denoising pretraining,
// plus proximity-based residue labels.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "protkit/codec.hpp"
#include "protkit/error.hpp"
#include "protkit/featurise.hpp"
#include "protkit/geometry.hpp"
#include "protkit/residue.hpp"
#include "protkit/rng.hpp"
#include "protkit/structure.hpp"

namespace protkit {

enum class CorruptionKind { SEQ_MUTATE, SEQ_MASK, COORD_GAUSS, COORD_UNIFORM, TORSION_GAUSS, CO_DENOISE };

inline constexpr std::string_view kind_name(CorruptionKind k) {
  switch (k) {
    case CorruptionKind::SEQ_MUTATE: return "seq_mutate";
    case CorruptionKind::SEQ_MASK: return "seq_mask";
    case CorruptionKind::COORD_GAUSS: return "coord_gauss";
    case CorruptionKind::COORD_UNIFORM: return "coord_uniform";
    case CorruptionKind::TORSION_GAUSS: return "torsion_gauss";
    case CorruptionKind::CO_DENOISE: return "co_denoise";
  }
  return "";
}

inline std::optional<CorruptionKind> kind_from_name(std::string_view name) {
  for (auto k : {CorruptionKind::SEQ_MUTATE, CorruptionKind::SEQ_MASK, CorruptionKind::COORD_GAUSS,
                 CorruptionKind::COORD_UNIFORM, CorruptionKind::TORSION_GAUSS, CorruptionKind::CO_DENOISE}) {
    if (kind_name(k) == name) return k;
  }
  return std::nullopt;
}

// Defaults are the benchmark's noising constants.
struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::SEQ_MUTATE;
  double nu = 0.25;
  double sigma = 0.1;
  double lambda_aux = 0.1;  // auxiliary loss weight; carried as metadata only
  std::uint64_t seed = 0;

  void validate() const {
    if (!(nu >= 0.0 && nu <= 1.0)) fail(ErrorKind::InvalidArgument, "nu must lie in [0, 1]");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail(ErrorKind::InvalidArgument, "sigma must be >= 0");
  }
};

struct SequenceTargets {
  std::vector<std::size_t> positions;  // ascending
  std::vector<int> original_tokens;    // aligned with positions
};

struct CoordinateTargets {
  Eigen::MatrixX3d noise;  // epsilon per node; corrupted = original + sigma * noise
  double sigma = 0.0;
};

struct TorsionTargets {
  Eigen::MatrixX3d angular_noise;       // (phi, psi, omega) increments per residue, 0 where undefined
  Eigen::MatrixX3d original_dihedrals;  // auxiliary; 0 where undefined
};

enum class AttributeKind { DISTANCE, ANGLE, DIHEDRAL };

struct AttributeTargets {
  AttributeKind kind = AttributeKind::DISTANCE;
  std::vector<std::array<std::size_t, 4>> tuples;  // first 2/3/4 entries used
  std::vector<double> values;
};

struct DenoisingTargets {
  std::optional<SequenceTargets> sequence;
  std::optional<CoordinateTargets> coordinates;
  std::optional<TorsionTargets> torsions;
  std::optional<AttributeTargets> attributes;
  std::optional<std::vector<double>> plddt;
};

struct CorruptionResult {
  std::vector<int> tokens;
  Eigen::MatrixX3d coords;
  std::vector<std::uint8_t> mask;  // 1 where the node was corrupted
  DenoisingTargets targets;
  std::optional<Chain> rebuilt;  // torsional corruption only

  std::size_t mask_count() const { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)); }

  Eigen::MatrixXd one_hot() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tokens.size()), kVocabularySize);
    for (std::size_t i = 0; i < tokens.size(); ++i) m(static_cast<Eigen::Index>(i), tokens[i]) = 1.0;
    return m;
  }
};

// floor(fraction * n); the epsilon keeps products like 0.29 * 100 at 29.
inline std::size_t corruption_count(double fraction, std::size_t n) {
  const double raw = std::floor(fraction * static_cast<double>(n) + 1e-9);
  return std::min(n, static_cast<std::size_t>(std::max(0.0, raw)));
}

// Uniform sample of `count` distinct indices from [0, n), returned ascending.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, CounterRng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace tasks_detail {

template <typename Replace>
CorruptionResult corrupt_sequence(std::span<const int> tokens, double nu, CounterRng& rng, Replace replace) {
  if (!(nu >= 0.0 && nu <= 1.0)) fail(ErrorKind::InvalidArgument, "nu must lie in [0, 1]");
  CorruptionResult out;
  out.tokens.assign(tokens.begin(), tokens.end());
  out.mask.assign(tokens.size(), 0);
  SequenceTargets t;
  t.positions = sample_without_replacement(tokens.size(), corruption_count(nu, tokens.size()), rng);
  for (std::size_t p : t.positions) {
    t.original_tokens.push_back(tokens[p]);
    out.tokens[p] = replace(tokens[p]);
    out.mask[p] = 1;
  }
  out.targets.sequence = std::move(t);
  return out;
}

}  // namespace tasks_detail

// Each chosen residue becomes a different canonical type, uniformly.
inline CorruptionResult corrupt_sequence_mutate(std::span<const int> tokens, double nu, CounterRng& rng) {
  return tasks_detail::corrupt_sequence(tokens, nu, rng, [&rng](int original) {
    if (original >= 0 && original < kNumCanonical) {
      const int r = static_cast<int>(rng.uniform_index(kNumCanonical - 1));
      return r >= original ? r + 1 : r;
    }
    return static_cast<int>(rng.uniform_index(kNumCanonical));
  });
}

inline CorruptionResult corrupt_sequence_mask(std::span<const int> tokens, double nu, CounterRng& rng) {
  return tasks_detail::corrupt_sequence(tokens, nu, rng, [](int) { return kMaskToken; });
}

namespace tasks_detail {

template <typename Draw>
CorruptionResult corrupt_coords(const Eigen::MatrixX3d& coords, double sigma, Draw draw) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail(ErrorKind::InvalidArgument, "sigma must be >= 0");
  CorruptionResult out;
  CoordinateTargets t;
  t.sigma = sigma;
  t.noise.resize(coords.rows(), 3);
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    for (Eigen::Index c = 0; c < 3; ++c) t.noise(i, c) = draw();
  }
  out.coords = coords + sigma * t.noise;
  out.mask.assign(static_cast<std::size_t>(coords.rows()), sigma > 0.0 ? 1 : 0);
  out.targets.coordinates = std::move(t);
  return out;
}

}  // namespace tasks_detail

inline CorruptionResult corrupt_coords_gaussian(const Eigen::MatrixX3d& coords, double sigma, CounterRng& rng) {
  return tasks_detail::corrupt_coords(coords, sigma, [&rng] { return rng.normal(); });
}

inline CorruptionResult corrupt_coords_uniform(const Eigen::MatrixX3d& coords, double sigma, CounterRng& rng) {
  return tasks_detail::corrupt_coords(coords, sigma, [&rng] { return rng.uniform_symmetric(); });
}

// Gaussian noise on phi/psi/omega, then a rebuild from the unchanged bond
// angles and the canonical bond lengths. Sidechains are not rebuilt.
inline CorruptionResult corrupt_torsions(const Chain& chain, double sigma, CounterRng& rng,
                                         const CanonicalGeometry& geom = {}) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail(ErrorKind::InvalidArgument, "sigma must be >= 0");
  InternalCoords ic = to_internal(chain, geom);
  const std::size_t n = ic.residues.size();
  TorsionTargets t;
  t.angular_noise = Eigen::MatrixX3d::Zero(static_cast<Eigen::Index>(n), 3);
  t.original_dihedrals = Eigen::MatrixX3d::Zero(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = ic.residues[i];
    const auto row = static_cast<Eigen::Index>(i);
    const std::array<bool, 3> defined = {i > 0, i + 1 < n, i + 1 < n};
    std::array<double*, 3> angles = {&r.phi, &r.psi, &r.omega};
    for (Eigen::Index c = 0; c < 3; ++c) {
      const double eps = sigma * rng.normal();  // drawn even when unused so streams stay aligned
      if (!defined[static_cast<std::size_t>(c)]) continue;
      double& a = *angles[static_cast<std::size_t>(c)];
      t.original_dihedrals(row, c) = a;
      t.angular_noise(row, c) = eps;
      a = wrap_angle(a + eps);
    }
  }
  CorruptionResult out;
  out.rebuilt = from_internal(ic, geom);
  out.rebuilt->id = chain.id;
  for (std::size_t i = 0; i < n; ++i) out.rebuilt->residues[i].seq_index = chain.residues[i].seq_index;
  out.coords.resize(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) {
    out.tokens.push_back(token_of(chain.residues[i].res_type));
    out.coords.row(static_cast<Eigen::Index>(i)) = out.rebuilt->residues[i].find("CA")->position.transpose();
  }
  out.mask.assign(n, sigma > 0.0 ? 1 : 0);
  out.targets.torsions = std::move(t);
  return out;
}

// Sequence corruption then coordinate corruption, each on its own child
// stream (split 1 and split 2 of rng), so either half can be reproduced alone.
inline CorruptionResult co_corrupt(const ProteinGraph& graph, const CorruptionSpec& seq_spec,
                                   const CorruptionSpec& struct_spec, const CounterRng& rng) {
  seq_spec.validate();
  struct_spec.validate();
  CounterRng seq_rng = rng.split(1);
  CounterRng struct_rng = rng.split(2);

  CorruptionResult seq;
  switch (seq_spec.kind) {
    case CorruptionKind::SEQ_MUTATE: seq = corrupt_sequence_mutate(graph.tokens, seq_spec.nu, seq_rng); break;
    case CorruptionKind::SEQ_MASK: seq = corrupt_sequence_mask(graph.tokens, seq_spec.nu, seq_rng); break;
    default: fail(ErrorKind::InvalidArgument, "co-denoising needs a sequence corruption kind");
  }
  CorruptionResult coord;
  switch (struct_spec.kind) {
    case CorruptionKind::COORD_GAUSS: coord = corrupt_coords_gaussian(graph.coords, struct_spec.sigma, struct_rng); break;
    case CorruptionKind::COORD_UNIFORM: coord = corrupt_coords_uniform(graph.coords, struct_spec.sigma, struct_rng); break;
    default: fail(ErrorKind::InvalidArgument, "co-denoising needs a coordinate corruption kind");
  }

  CorruptionResult out;
  out.tokens = std::move(seq.tokens);
  out.coords = std::move(coord.coords);
  out.mask = seq.mask;
  for (std::size_t i = 0; i < out.mask.size(); ++i) out.mask[i] |= coord.mask[i];
  out.targets.sequence = std::move(seq.targets.sequence);
  out.targets.coordinates = std::move(coord.targets.coordinates);
  return out;
}

// Graph-level entry point for every kind except TORSION_GAUSS, which needs the
// full backbone (use corrupt_torsions). Untouched modalities pass through.
inline CorruptionResult corrupt(const ProteinGraph& graph, const CorruptionSpec& spec) {
  spec.validate();
  CounterRng rng(spec.seed);
  CorruptionResult out;
  switch (spec.kind) {
    case CorruptionKind::SEQ_MUTATE:
      out = corrupt_sequence_mutate(graph.tokens, spec.nu, rng);
      out.coords = graph.coords;
      break;
    case CorruptionKind::SEQ_MASK:
      out = corrupt_sequence_mask(graph.tokens, spec.nu, rng);
      out.coords = graph.coords;
      break;
    case CorruptionKind::COORD_GAUSS:
      out = corrupt_coords_gaussian(graph.coords, spec.sigma, rng);
      out.tokens = graph.tokens;
      break;
    case CorruptionKind::COORD_UNIFORM:
      out = corrupt_coords_uniform(graph.coords, spec.sigma, rng);
      out.tokens = graph.tokens;
      break;
    case CorruptionKind::CO_DENOISE: {
      CorruptionSpec seq_spec = spec;
      seq_spec.kind = CorruptionKind::SEQ_MUTATE;
      CorruptionSpec struct_spec = spec;
      struct_spec.kind = CorruptionKind::COORD_GAUSS;
      out = co_corrupt(graph, seq_spec, struct_spec, rng);
      break;
    }
    case CorruptionKind::TORSION_GAUSS:
      fail(ErrorKind::InvalidArgument, "torsional corruption operates on chains, not graphs");
  }
  return out;
}

inline AttributeTargets masked_attribute_targets(const ProteinGraph& graph, AttributeKind kind, double fraction,
                                                 CounterRng& rng) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) fail(ErrorKind::InvalidArgument, "fraction must lie in [0, 1]");
  const std::size_t arity = kind == AttributeKind::DISTANCE ? 2 : kind == AttributeKind::ANGLE ? 3 : 4;
  const std::size_t n = graph.num_nodes();
  if (n < arity) fail(ErrorKind::TooFewNodes, "graph too small for the requested attribute");

  std::vector<std::array<std::size_t, 4>> candidates;
  if (kind == AttributeKind::DISTANCE) {
    for (const auto& [src, dst] : graph.topology.edges) candidates.push_back({src, dst, 0, 0});
  } else {
    // consecutive residues inside one chain
    for (std::size_t i = 0; i + arity <= n; ++i) {
      bool same_chain = true;
      for (std::size_t k = 1; k < arity; ++k) same_chain = same_chain && graph.chain_of[i + k] == graph.chain_of[i];
      if (!same_chain) continue;
      std::array<std::size_t, 4> t{i, i + 1, i + 2, arity == 4 ? i + 3 : 0};
      candidates.push_back(t);
    }
  }

  AttributeTargets out;
  out.kind = kind;
  for (std::size_t pick : sample_without_replacement(candidates.size(), corruption_count(fraction, candidates.size()), rng)) {
    const auto& t = candidates[pick];
    double value = 0.0;
    switch (kind) {
      case AttributeKind::DISTANCE: value = (graph.position(t[0]) - graph.position(t[1])).norm(); break;
      case AttributeKind::ANGLE: value = bond_angle(graph.position(t[0]), graph.position(t[1]), graph.position(t[2])); break;
      case AttributeKind::DIHEDRAL:
        value = dihedral(graph.position(t[0]), graph.position(t[1]), graph.position(t[2]), graph.position(t[3]));
        break;
    }
    out.tuples.push_back(t);
    out.values.push_back(value);
  }
  return out;
}

// Per-residue CA b-factor / 100, clamped to [0, 1]. Residues without CA use
// their first atom.
inline std::vector<double> plddt_targets(const Structure& s) {
  std::vector<double> y;
  bool any_confidence = false;
  for (const auto& chain : s.chains) {
    for (const auto& r : chain.residues) {
      const Atom* a = r.find("CA");
      if (a == nullptr && !r.atoms.empty()) a = &r.atoms.front();
      const double b = a ? a->b_factor : 0.0;
      any_confidence = any_confidence || b != 0.0;
      y.push_back(std::clamp(b / 100.0, 0.0, 1.0));
    }
  }
  if (!any_confidence) fail(ErrorKind::MissingConfidence, "no residue carries a b-factor/pLDDT value");
  return y;
}

struct LabelSet {
  std::vector<int> labels;                         // per residue, chains in order
  std::vector<std::pair<char, int>> residue_ids;   // (chain id, seq index)
  double cutoff = 3.5;
  std::string selector;
};

inline constexpr double kContactCutoff = 3.5;

namespace tasks_detail {

struct ResidueSphere {
  Vec3 center;
  double radius;
};

inline ResidueSphere bounding_sphere(const Residue& r) {
  Vec3 c = Vec3::Zero();
  for (const auto& a : r.atoms) c += a.position;
  if (!r.atoms.empty()) c /= static_cast<double>(r.atoms.size());
  double rad = 0.0;
  for (const auto& a : r.atoms) rad = std::max(rad, (a.position - c).norm());
  return {c, rad};
}

inline bool residue_within(const Residue& r, std::span<const Vec3> targets, double cutoff) {
  const double c2 = cutoff * cutoff;
  for (const auto& a : r.atoms) {
    for (const auto& t : targets) {
      if ((a.position - t).squaredNorm() <= c2) return true;
    }
  }
  return false;
}

}  // namespace tasks_detail

// Residue is positive iff any of its atoms lies within `cutoff` (inclusive) of
// a hetero atom whose residue code is in `selector`.
inline LabelSet binding_site_labels(const Structure& s, const std::set<std::string>& selector,
                                    double cutoff = kContactCutoff) {
  std::vector<Vec3> sites;
  for (const auto& h : s.hetero_atoms) {
    if (selector.contains(h.res_name)) sites.push_back(h.atom.position);
  }
  if (sites.empty()) fail(ErrorKind::SelectorEmpty, "no hetero atom matches the selector");

  LabelSet out;
  out.cutoff = cutoff;
  for (const auto& code : selector) out.selector += (out.selector.empty() ? "" : ",") + code;
  for (const auto& chain : s.chains) {
    for (const auto& r : chain.residues) {
      out.labels.push_back(tasks_detail::residue_within(r, sites, cutoff) ? 1 : 0);
      out.residue_ids.emplace_back(chain.id, r.seq_index);
    }
  }
  return out;
}

// Residue is positive iff any of its atoms lies within `cutoff` (inclusive) of
// any atom of another chain.
inline LabelSet interface_labels(const Structure& s, double cutoff = kContactCutoff) {
  if (s.chains.size() < 2) fail(ErrorKind::SingleChain, "interface labels need at least two chains");
  using tasks_detail::ResidueSphere;

  std::vector<std::vector<ResidueSphere>> spheres;
  std::vector<std::vector<std::vector<Vec3>>> positions;
  for (const auto& chain : s.chains) {
    auto& sp = spheres.emplace_back();
    auto& pos = positions.emplace_back();
    for (const auto& r : chain.residues) {
      sp.push_back(tasks_detail::bounding_sphere(r));
      auto& p = pos.emplace_back();
      for (const auto& a : r.atoms) p.push_back(a.position);
    }
  }

  LabelSet out;
  out.cutoff = cutoff;
  out.selector = "interface";
  for (std::size_t c = 0; c < s.chains.size(); ++c) {
    for (std::size_t i = 0; i < s.chains[c].residues.size(); ++i) {
      const Residue& r = s.chains[c].residues[i];
      bool hit = false;
      for (std::size_t d = 0; d < s.chains.size() && !hit; ++d) {
        if (d == c) continue;
        for (std::size_t j = 0; j < positions[d].size() && !hit; ++j) {
          const double reach = spheres[c][i].radius + spheres[d][j].radius + cutoff;
          if ((spheres[c][i].center - spheres[d][j].center).norm() > reach + 1e-9) continue;
          hit = tasks_detail::residue_within(r, positions[d][j], cutoff);
        }
      }
      out.labels.push_back(hit ? 1 : 0);
      out.residue_ids.emplace_back(s.chains[c].id, r.seq_index);
    }
  }
  return out;
}

}  // namespace protkit
