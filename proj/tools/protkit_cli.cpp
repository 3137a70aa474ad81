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

// protkit command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data error.
// INPUT may be a single file, a directory (files processed in lexicographic
// order), or a .lst manifest written by `protkit filter`.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "protkit/protkit.hpp"

namespace fs = std::filesystem;
using namespace protkit;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDataError = 2;

struct FileOutcome {
  int status = kOk;
  std::string log;
};

struct Inputs {
  std::vector<fs::path> files;
  bool batch = false;  // directory or manifest: outputs go into a directory
};

Inputs collect_inputs(const std::string& arg, std::string_view extension) {
  Inputs in;
  const fs::path p(arg);
  std::error_code ec;
  if (fs::is_directory(p, ec)) {
    in.batch = true;
    for (const auto& entry : fs::directory_iterator(p)) {
      if (entry.is_regular_file() && entry.path().extension() == extension) in.files.push_back(entry.path());
    }
    std::sort(in.files.begin(), in.files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  } else if (p.extension() == ".lst") {
    in.batch = true;
    std::istringstream list(read_file_text(arg));
    for (std::string line; std::getline(list, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) in.files.emplace_back(line);
    }
  } else {
    if (!fs::exists(p, ec)) fail(ErrorKind::Io, "no such input: " + arg);
    in.files.push_back(p);
  }
  return in;
}

std::uint64_t file_seed(const fs::path& path, std::uint64_t user_seed) {
  return CounterRng::mix(fnv1a64(path.filename().string()) ^ CounterRng::mix(user_seed));
}

std::string describe(const fs::path& path, const Error& e) {
  std::string where = path.string();
  if (e.line() != 0) where += ":" + std::to_string(e.line());
  return "error: " + where + ": " + e.what() + "\n";
}

// Runs `work` over every file on up to `jobs` threads. Logs are printed in
// input order so stderr is independent of scheduling.
int run_files(const std::vector<fs::path>& files, unsigned jobs,
              const std::function<void(const fs::path&, std::ostream&)>& work) {
  std::vector<FileOutcome> outcomes(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      std::ostringstream log;
      try {
        work(files[i], log);
      } catch (const Error& e) {
        outcomes[i].status = kDataError;
        log << describe(files[i], e);
      } catch (const std::exception& e) {
        outcomes[i].status = kDataError;
        log << "error: " << files[i].string() << ": " << e.what() << "\n";
      }
      outcomes[i].log = log.str();
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(files.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int status = kOk;
  for (const auto& o : outcomes) {
    std::cerr << o.log;
    status = std::max(status, o.status);
  }
  return status;
}

fs::path output_for(const Inputs& in, const fs::path& file, const std::string& out, const std::string& suffix) {
  if (!in.batch) return fs::path(out);
  return fs::path(out) / (file.stem().string() + suffix);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create directory " + dir.string());
}

Structure load_structure(const fs::path& path) {
  Structure s = parse_pdb(read_file_text(path.string()));
  if (s.id.empty()) s.id = path.stem().string();
  return s;
}

// First chain (or the named one) reduced to residues with a full backbone.
Chain codec_chain(const Structure& s, const std::string& chain_id) {
  const Structure bb = select_granularity(s, Granularity::BACKBONE).structure;
  for (const auto& c : bb.chains) {
    if (chain_id.empty() || c.id == chain_id.front()) return c;
  }
  fail(ErrorKind::InvalidArgument, "chain " + chain_id + " not present with a complete backbone");
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_file(path.string(), j.dump(2) + "\n"); }

Tensor column(const std::vector<double>& values) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(values.size()), 1};
  for (double v : values) t.data.push_back(static_cast<float>(v));
  return t;
}

template <typename T>
std::vector<double> as_doubles(const std::vector<T>& v) {
  return std::vector<double>(v.begin(), v.end());
}

// ---------------------------------------------------------------- subcommands

struct Common {
  std::string input;
  std::string output;
  unsigned jobs = 1;
  bool verbose = false;
};

int cmd_encode(const Common& c, const std::string& chain_id) {
  const Inputs in = collect_inputs(c.input, ".pdb");
  if (in.batch) ensure_dir(c.output);
  return run_files(in.files, c.jobs, [&](const fs::path& file, std::ostream& log) {
    const Chain chain = codec_chain(load_structure(file), chain_id);
    const EncodedProtein e = encode(chain);
    write_file(output_for(in, file, c.output, ".fkc").string(), std::span<const std::uint8_t>(e.bytes));
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu residues, %zu bytes, backbone rmsd %.4f A", chain.residues.size(),
                  e.bytes.size(), backbone_rmsd(chain, decode(e)));
    log << file.filename().string() << ": " << buf << "\n";
  });
}

int cmd_decode(const Common& c) {
  const Inputs in = collect_inputs(c.input, ".fkc");
  if (in.batch) ensure_dir(c.output);
  return run_files(in.files, c.jobs, [&](const fs::path& file, std::ostream& log) {
    const auto bytes = read_file_bytes(file.string());
    Structure s;
    s.id = file.stem().string();
    s.chains.push_back(decode(std::span<const std::uint8_t>(bytes)));
    write_file(output_for(in, file, c.output, ".pdb").string(), write_pdb(s));
    if (c.verbose) log << file.filename().string() << ": " << s.residue_count() << " residues\n";
  });
}

int cmd_featurise(const Common& c, FeatureScheme scheme, std::size_t k, bool global_positions) {
  const Inputs in = collect_inputs(c.input, ".pdb");
  ensure_dir(c.output);
  return run_files(in.files, c.jobs, [&](const fs::path& file, std::ostream& log) {
    FeatureOptions opts;
    opts.global_positions = global_positions;
    const ProteinGraph g = build_graph(load_structure(file), scheme, k, opts);
    const std::string stem = (fs::path(c.output) / file.stem()).string();

    Eigen::MatrixXd edges(static_cast<Eigen::Index>(g.topology.edges.size()), 2);
    Eigen::MatrixXd edge_vec(edges.rows(), 3);
    for (std::size_t e = 0; e < g.topology.edges.size(); ++e) {
      edges(static_cast<Eigen::Index>(e), 0) = static_cast<double>(g.topology.edges[e].first);
      edges(static_cast<Eigen::Index>(e), 1) = static_cast<double>(g.topology.edges[e].second);
      edge_vec.row(static_cast<Eigen::Index>(e)) = g.vectors.edge[e].transpose();
    }
    Eigen::MatrixXd node_vec(static_cast<Eigen::Index>(g.num_nodes()), 6);
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      node_vec.block(static_cast<Eigen::Index>(i), 0, 1, 3) = g.vectors.node[i][0].transpose();
      node_vec.block(static_cast<Eigen::Index>(i), 3, 1, 3) = g.vectors.node[i][1].transpose();
    }
    std::vector<std::uint8_t> bytes;
    append_tensor(bytes, Tensor::from_matrix(g.scalars));
    append_tensor(bytes, Tensor::from_matrix(g.coords));
    append_tensor(bytes, Tensor::from_matrix(edges));
    append_tensor(bytes, Tensor::from_matrix(node_vec));
    append_tensor(bytes, Tensor::from_matrix(edge_vec));
    write_file(stem + ".fkt", std::span<const std::uint8_t>(bytes));
    write_file(stem + ".edges.tsv", write_edge_list(g.topology));

    nlohmann::json residues = nlohmann::json::array();
    for (const auto& [chain, seq] : g.residue_ids) residues.push_back({std::string(1, chain), seq});
    write_json(stem + ".json", {{"source", file.filename().string()},
                                {"scheme", scheme_name(scheme)},
                                {"k", k},
                                {"global_positions", global_positions},
                                {"num_nodes", g.num_nodes()},
                                {"num_edges", g.topology.edges.size()},
                                {"scalar_dim", g.scalars.cols()},
                                {"vocabulary", vocabulary_fingerprint()},
                                {"tensors", {"S", "X", "edges", "node_vectors", "edge_vectors"}},
                                {"residues", residues}});
    if (c.verbose) log << file.filename().string() << ": " << g.num_nodes() << " nodes\n";
  });
}

// Copies graph-level corruption back onto the structure: new residue names for
// sequence corruption, moved CA atoms for coordinate corruption.
Structure apply_to_structure(Structure s, const CorruptionResult& r) {
  std::size_t node = 0;
  for (auto& chain : s.chains) {
    for (auto& res : chain.residues) {
      Atom* ca = nullptr;
      for (auto& a : res.atoms) {
        if (a.name == "CA") ca = &a;
      }
      if (ca == nullptr) continue;
      const int token = r.tokens[node];
      if (token != token_of(res.res_type)) {
        res.res_type = token < kNumCanonical ? static_cast<ResidueType>(token) : ResidueType::UNKNOWN;
        res.res_name = token < kNumCanonical ? std::string(residue_name(res.res_type)) : "UNK";
      }
      ca->position = r.coords.row(static_cast<Eigen::Index>(node)).transpose();
      ++node;
    }
  }
  return s;
}

int cmd_corrupt(const Common& c, const CorruptionSpec& base) {
  const Inputs in = collect_inputs(c.input, ".pdb");
  ensure_dir(c.output);
  const std::uint64_t user_seed = base.seed;
  return run_files(in.files, c.jobs, [&](const fs::path& file, std::ostream& log) {
    CorruptionSpec spec = base;
    spec.seed = file_seed(file, user_seed);
    const Structure s = load_structure(file);
    const std::string stem = (fs::path(c.output) / file.stem()).string();
    std::vector<std::uint8_t> bytes;
    std::vector<std::string> tensors;
    auto add = [&](const std::string& name, const Tensor& t) {
      append_tensor(bytes, t);
      tensors.push_back(name);
    };

    CorruptionResult r;
    if (spec.kind == CorruptionKind::TORSION_GAUSS) {
      CounterRng rng(spec.seed);
      r = corrupt_torsions(codec_chain(s, ""), spec.sigma, rng);
      Structure out;
      out.id = s.id;
      out.chains.push_back(*r.rebuilt);
      write_file(stem + ".pdb", write_pdb(out));
    } else {
      r = corrupt(build_graph(s, FeatureScheme::CA_IDENT), spec);
      write_file(stem + ".pdb", write_pdb(apply_to_structure(s, r)));
    }
    add("tokens", column(as_doubles(r.tokens)));
    add("coords", Tensor::from_matrix(r.coords));
    add("mask", column(as_doubles(r.mask)));
    const auto& t = r.targets;
    if (t.sequence) {
      add("positions", column(as_doubles(t.sequence->positions)));
      add("original_tokens", column(as_doubles(t.sequence->original_tokens)));
    }
    if (t.coordinates) add("noise", Tensor::from_matrix(t.coordinates->noise));
    if (t.torsions) {
      add("angular_noise", Tensor::from_matrix(t.torsions->angular_noise));
      add("original_dihedrals", Tensor::from_matrix(t.torsions->original_dihedrals));
    }
    write_file(stem + ".fkt", std::span<const std::uint8_t>(bytes));
    write_json(stem + ".json", {{"source", file.filename().string()},
                                {"kind", kind_name(spec.kind)},
                                {"nu", spec.nu},
                                {"sigma", spec.sigma},
                                {"lambda_aux", spec.lambda_aux},
                                {"seed", user_seed},
                                {"file_seed", spec.seed},
                                {"corrupted", r.mask_count()},
                                {"tensors", tensors}});
    if (c.verbose) log << file.filename().string() << ": " << r.mask_count() << " corrupted\n";
  });
}

const std::set<std::string> kDefaultMetals = {"CA", "CD", "CO", "CU", "FE", "FE2", "HG", "K",
                                              "MG", "MN", "NA", "NI", "ZN"};

int cmd_label(const Common& c, const std::string& mode, const std::set<std::string>& ligands, double cutoff) {
  const Inputs in = collect_inputs(c.input, ".pdb");
  if (in.batch) ensure_dir(c.output);
  return run_files(in.files, c.jobs, [&](const fs::path& file, std::ostream& log) {
    const Structure s = load_structure(file);
    const LabelSet labels = mode == "metal" ? binding_site_labels(s, ligands, cutoff) : interface_labels(s, cutoff);
    std::string csv = "chain,seq_index,label\n";
    std::size_t positives = 0;
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
      csv += std::string(1, labels.residue_ids[i].first) + "," + std::to_string(labels.residue_ids[i].second) + "," +
             std::to_string(labels.labels[i]) + "\n";
      positives += static_cast<std::size_t>(labels.labels[i]);
    }
    write_file(output_for(in, file, c.output, ".labels.csv").string(), csv);
    if (c.verbose) log << file.filename().string() << ": " << positives << " positive residues\n";
  });
}

int cmd_filter(const Common& c, const std::string& spec_path) {
  FilterSpec spec;
  try {
    spec = parse_filter_spec(read_file_text(spec_path));
  } catch (const Error& e) {
    std::cerr << describe(spec_path, e);
    return kDataError;
  }
  const Inputs in = collect_inputs(c.input, ".pdb");
  std::vector<char> accepted(in.files.size(), 0);
  std::map<fs::path, std::size_t> index;
  for (std::size_t i = 0; i < in.files.size(); ++i) index[in.files[i]] = i;
  const int status = run_files(in.files, c.jobs, [&](const fs::path& file, std::ostream& log) {
    const bool ok = accepts(spec, load_structure(file));
    accepted[index.at(file)] = ok ? 1 : 0;
    if (c.verbose) log << file.filename().string() << ": " << (ok ? "accepted" : "rejected") << "\n";
  });
  std::string manifest;
  for (std::size_t i = 0; i < in.files.size(); ++i) {
    if (accepted[i]) manifest += in.files[i].string() + "\n";
  }
  write_file(c.output, manifest);
  return status;
}

void add_common(CLI::App* sub, Common& c, const std::string& out_help) {
  sub->add_option("input", c.input, "input file, directory, or .lst manifest")->required();
  sub->add_option("output", c.output, out_help)->required();
  sub->add_option("-j,--jobs", c.jobs, "parallel files")->check(CLI::Range(1u, 256u));
  sub->add_flag("-v,--verbose", c.verbose, "per-file progress on stderr");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"protkit: protein structure toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "protkit 0.1.0");

  Common common;
  std::string chain_id;
  auto* enc = app.add_subcommand("encode", "PDB -> FKC1 backbone payload");
  add_common(enc, common, "output .fkc file (directory for batch input)");
  enc->add_option("--chain", chain_id, "chain identifier (default: first chain)");

  auto* dec = app.add_subcommand("decode", "FKC1 payload -> PDB backbone");
  add_common(dec, common, "output .pdb file (directory for batch input)");

  std::string scheme = "ca_ident";
  std::size_t k = 16;
  bool global_positions = false;
  auto* feat = app.add_subcommand("featurise", "PDB -> graph tensors");
  add_common(feat, common, "output directory");
  feat->add_option("--scheme", scheme, "feature scheme")
      ->check(CLI::IsMember({"ca_ident", "ca_seq", "ca_angles", "ca_bb", "ca_sc"}));
  feat->add_option("--k", k, "neighbours per node")->check(CLI::Range(std::size_t{1}, std::size_t{4096}));
  feat->add_flag("--global-positions", global_positions, "number residues across chains");

  CorruptionSpec spec;
  std::string kind = "seq_mutate";
  auto* cor = app.add_subcommand("corrupt", "denoising corruption + targets");
  add_common(cor, common, "output directory");
  cor->add_option("--kind", kind, "corruption kind")
      ->check(CLI::IsMember({"seq_mutate", "seq_mask", "coord_gauss", "coord_uniform", "torsion_gauss", "co_denoise"}));
  cor->add_option("--nu", spec.nu, "fraction of residues to corrupt")->check(CLI::Range(0.0, 1.0));
  cor->add_option("--sigma", spec.sigma, "noise scale")->check(CLI::NonNegativeNumber);
  cor->add_option("--seed", spec.seed, "user seed");

  std::string mode = "metal";
  std::vector<std::string> ligand_list;
  double cutoff = kContactCutoff;
  auto* lab = app.add_subcommand("label", "per-residue proximity labels (CSV)");
  add_common(lab, common, "output .csv file (directory for batch input)");
  lab->add_option("--mode", mode, "metal or interface")->check(CLI::IsMember({"metal", "interface"}));
  lab->add_option("--ligands", ligand_list, "hetero residue codes (metal mode)")->delimiter(',');
  lab->add_option("--cutoff", cutoff, "contact distance in Angstrom")->check(CLI::PositiveNumber);

  std::string spec_path;
  auto* fil = app.add_subcommand("filter", "write a manifest of structures passing a filter spec");
  add_common(fil, common, "output manifest (.lst)");
  fil->add_option("--spec", spec_path, "filter spec file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*enc) return cmd_encode(common, chain_id);
    if (*dec) return cmd_decode(common);
    if (*feat) return cmd_featurise(common, *scheme_from_name(scheme), k, global_positions);
    if (*cor) {
      spec.kind = *kind_from_name(kind);
      return cmd_corrupt(common, spec);
    }
    if (*lab) {
      std::set<std::string> ligands(ligand_list.begin(), ligand_list.end());
      if (ligands.empty()) ligands = kDefaultMetals;
      return cmd_label(common, mode, ligands, cutoff);
    }
    if (*fil) return cmd_filter(common, spec_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}
