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

// PDB v3.3 fixed-column reader and writer. Only the records needed for
// curation are interpreted: HEADER, EXPDTA, REMARK 2, MODEL/ENDMDL,
// ATOM and HETATM. Everything else is skipped.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "protkit/error.hpp"
#include "protkit/structure.hpp"

namespace protkit {

namespace pdb_detail {

inline std::string_view field(std::string_view line, std::size_t begin, std::size_t end) {
  if (begin >= line.size()) return {};
  return line.substr(begin, std::min(end, line.size()) - begin);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_int(std::string_view s, int& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline bool parse_real(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

inline constexpr std::array<std::string_view, 12> kMonths = {
    "JAN", "FEB", "MAR", "APR", "MAY", "JUN", "JUL", "AUG", "SEP", "OCT", "NOV", "DEC"};

// "DD-MMM-YY" -> "YYYY-MM-DD"; two-digit years >= 70 are 19xx.
inline std::optional<std::string> pdb_date_to_iso(std::string_view d) {
  d = trim(d);
  if (d.size() != 9 || d[2] != '-' || d[6] != '-') return std::nullopt;
  int day = 0, year = 0;
  if (!parse_int(d.substr(0, 2), day) || !parse_int(d.substr(7, 2), year)) return std::nullopt;
  auto it = std::find(kMonths.begin(), kMonths.end(), d.substr(3, 3));
  if (it == kMonths.end() || day < 1 || day > 31 || year < 0) return std::nullopt;
  const int month = static_cast<int>(it - kMonths.begin()) + 1;
  year += year >= 70 ? 1900 : 2000;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return std::string(buf);
}

inline std::string iso_to_pdb_date(const std::string& iso) {
  int y = 0, m = 0, d = 0;
  if (iso.size() != 10 || !parse_int(std::string_view(iso).substr(0, 4), y) ||
      !parse_int(std::string_view(iso).substr(5, 2), m) ||
      !parse_int(std::string_view(iso).substr(8, 2), d) || m < 1 || m > 12) {
    return "         ";
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "%02d-%s-%02d", d, std::string(kMonths[m - 1]).c_str(), y % 100);
  return buf;
}

inline Method method_from_expdta(std::string_view text) {
  auto has = [&](std::string_view needle) { return text.find(needle) != std::string_view::npos; };
  if (has("X-RAY")) return Method::XRAY;
  if (has("NMR")) return Method::NMR;
  if (has("ELECTRON MICROSCOPY") || has("CRYO")) return Method::EM;
  if (has("PREDICTED") || has("THEORETICAL")) return Method::PREDICTED;
  return Method::OTHER;
}

inline std::string_view method_to_expdta(Method m) {
  switch (m) {
    case Method::XRAY: return "X-RAY DIFFRACTION";
    case Method::NMR: return "SOLUTION NMR";
    case Method::EM: return "ELECTRON MICROSCOPY";
    case Method::PREDICTED: return "PREDICTED MODEL";
    case Method::OTHER: return "OTHER";
  }
  return "OTHER";
}

inline bool is_water(std::string_view res_name) {
  return res_name == "HOH" || res_name == "WAT" || res_name == "DOD" || res_name == "H2O";
}

inline std::string infer_element(std::string_view atom_name, std::string_view res_name, bool hetero) {
  // Monatomic ions: residue and atom share the name (ZN/ZN, MG/MG).
  if (hetero && atom_name == res_name && atom_name.size() <= 2) return std::string(atom_name);
  for (char c : atom_name) {
    if (c >= 'A' && c <= 'Z') return std::string(1, c);
  }
  return "X";
}

struct AtomRecord {
  Atom atom;
  char altloc = ' ';
  std::string res_name;
  char chain_id = ' ';
  int seq_index = 0;
  char insertion_code = ' ';
};

inline AtomRecord parse_atom_line(std::string_view line, bool hetero, std::size_t line_no) {
  auto bad = [&](const char* what) -> Error {
    return Error(ErrorKind::MalformedRecord,
                 "line " + std::to_string(line_no) + ": " + what, line_no);
  };
  if (line.size() < 54) throw bad("ATOM/HETATM record shorter than 54 columns");

  AtomRecord r;
  r.atom.is_hetero = hetero;
  if (!parse_int(field(line, 6, 11), r.atom.serial)) throw bad("bad serial number");
  r.atom.name = std::string(trim(field(line, 12, 16)));
  if (r.atom.name.empty()) throw bad("empty atom name");
  r.altloc = line[16];
  r.res_name = std::string(trim(field(line, 17, 20)));
  r.chain_id = line[21];
  if (!parse_int(field(line, 22, 26), r.seq_index)) throw bad("bad residue sequence number");
  r.insertion_code = line[26];

  double xyz[3];
  if (!parse_real(field(line, 30, 38), xyz[0]) || !parse_real(field(line, 38, 46), xyz[1]) ||
      !parse_real(field(line, 46, 54), xyz[2])) {
    throw bad("bad coordinate");
  }
  r.atom.position = Vec3(xyz[0], xyz[1], xyz[2]);

  auto occ = trim(field(line, 54, 60));
  if (!occ.empty() && !parse_real(occ, r.atom.occupancy)) throw bad("bad occupancy");
  if (r.atom.occupancy < 0.0 || r.atom.occupancy > 1.0) throw bad("occupancy outside [0, 1]");
  auto bfac = trim(field(line, 60, 66));
  if (!bfac.empty() && !parse_real(bfac, r.atom.b_factor)) throw bad("bad temperature factor");

  auto elem = trim(field(line, 76, 78));
  r.atom.element = elem.empty() ? infer_element(r.atom.name, r.res_name, hetero) : std::string(elem);
  return r;
}

}  // namespace pdb_detail

// Keeps MODEL 1 only, altloc ' ' or 'A', drops waters. HETATM records go to
// hetero_atoms regardless of residue name.
inline Structure parse_pdb(std::string_view text) {
  using namespace pdb_detail;
  if (text.empty()) fail(ErrorKind::EmptyStructure, "empty input");

  Structure s;
  std::map<char, std::size_t> chain_slot;
  bool first_model_done = false;
  bool inside_model = false;
  std::size_t line_no = 0;

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const std::string_view record = field(line, 0, 6);
    if (record.starts_with("MODEL")) {
      if (inside_model || s.residue_count() > 0) first_model_done = true;
      inside_model = true;
      continue;
    }
    if (record.starts_with("ENDMDL")) {
      first_model_done = true;
      inside_model = false;
      continue;
    }
    if (record == "HEADER") {
      if (auto d = pdb_date_to_iso(field(line, 50, 59))) s.deposition_date = *d;
      auto id = trim(field(line, 62, 66));
      if (!id.empty()) s.id = std::string(id);
      continue;
    }
    if (record == "EXPDTA") {
      s.method = method_from_expdta(field(line, 10, line.size()));
      continue;
    }
    if (record == "REMARK" && trim(field(line, 6, 10)) == "2") {
      auto rest = field(line, 10, line.size());
      auto at = rest.find("RESOLUTION.");
      if (at != std::string_view::npos) {
        auto tail = trim(rest.substr(at + 11));
        auto sp = tail.find(' ');
        double res = 0.0;
        if (parse_real(tail.substr(0, sp), res) && res > 0.0) s.resolution = res;
      }
      continue;
    }

    const bool is_atom = record == "ATOM  " || record == "ATOM";
    const bool is_het = record == "HETATM";
    if (!is_atom && !is_het) continue;
    if (first_model_done) continue;

    AtomRecord r = parse_atom_line(line, is_het, line_no);
    if (r.altloc != ' ' && r.altloc != 'A') continue;
    if (is_water(r.res_name)) continue;

    if (is_het) {
      s.hetero_atoms.push_back({std::move(r.atom), r.res_name, r.chain_id, r.seq_index, r.insertion_code});
      continue;
    }

    auto [it, inserted] = chain_slot.try_emplace(r.chain_id, s.chains.size());
    if (inserted) s.chains.push_back(Chain{r.chain_id, {}});
    Chain& chain = s.chains[it->second];

    Residue* res = nullptr;
    if (!chain.residues.empty()) {
      Residue& last = chain.residues.back();
      if (last.seq_index == r.seq_index && last.insertion_code == r.insertion_code &&
          last.res_name == r.res_name) {
        res = &last;
      }
    }
    if (res == nullptr) {
      Residue fresh;
      fresh.res_name = r.res_name;
      fresh.res_type = residue_type_from_name(r.res_name);
      fresh.seq_index = r.seq_index;
      fresh.insertion_code = r.insertion_code;
      chain.residues.push_back(std::move(fresh));
      res = &chain.residues.back();
    }
    if (!res->has(r.atom.name)) res->atoms.push_back(std::move(r.atom));
  }

  for (auto& chain : s.chains) {
    std::stable_sort(chain.residues.begin(), chain.residues.end(), [](const Residue& a, const Residue& b) {
      if (a.seq_index != b.seq_index) return a.seq_index < b.seq_index;
      return a.insertion_code < b.insertion_code;
    });
  }

  if (s.chains.empty() && s.hetero_atoms.empty()) {
    fail(ErrorKind::EmptyStructure, "no ATOM or HETATM records parsed");
  }
  return s;
}

namespace pdb_detail {

inline void check_coordinate(double v) {
  // %8.3f holds [-999.999, 9999.999].
  if (!std::isfinite(v) || v >= 9999.9995 || v <= -999.9995) {
    fail(ErrorKind::CoordinateOverflow, "coordinate " + std::to_string(v) + " does not fit the PDB column");
  }
}

inline std::string format_atom_name(const Atom& a) {
  if (a.name.size() > 4) fail(ErrorKind::FieldOverflow, "atom name longer than 4: " + a.name);
  std::string padded = (a.name.size() < 4 && a.element.size() == 1) ? " " + a.name : a.name;
  padded.resize(4, ' ');
  return padded;
}

inline void append_atom_line(std::string& out, const Atom& a, std::string_view res_name, char chain_id,
                             int seq_index, char icode) {
  for (int i = 0; i < 3; ++i) check_coordinate(a.position[i]);
  if (a.serial > 99999 || a.serial < -9999) fail(ErrorKind::FieldOverflow, "serial out of range");
  if (seq_index > 9999 || seq_index < -999) fail(ErrorKind::FieldOverflow, "residue number out of range");
  if (res_name.size() > 3) fail(ErrorKind::FieldOverflow, "residue name longer than 3");
  if (a.element.size() > 2) fail(ErrorKind::FieldOverflow, "element longer than 2");
  if (!std::isfinite(a.b_factor) || a.b_factor >= 999.995 || a.b_factor <= -99.995) {
    fail(ErrorKind::FieldOverflow, "temperature factor out of range");
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%-6s%5d %4s%c%3s %c%4d%c   %8.3f%8.3f%8.3f%6.2f%6.2f          %2s\n",
                a.is_hetero ? "HETATM" : "ATOM", a.serial, format_atom_name(a).c_str(), ' ',
                std::string(res_name).c_str(), chain_id, seq_index, icode, a.position.x(),
                a.position.y(), a.position.z(), a.occupancy, a.b_factor, a.element.c_str());
  out += buf;
}

inline std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace pdb_detail

inline std::string write_pdb(const Structure& s) {
  using namespace pdb_detail;
  std::string out;
  if (s.deposition_date || !s.id.empty()) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "HEADER    %-40s%9s   %-4s\n", "",
                  s.deposition_date ? iso_to_pdb_date(*s.deposition_date).c_str() : "",
                  s.id.substr(0, 4).c_str());
    out += buf;
  }
  if (s.method) {
    out += "EXPDTA    ";
    out += method_to_expdta(*s.method);
    out += '\n';
  }
  if (s.resolution) {
    out += "REMARK   2 RESOLUTION. " + shortest(*s.resolution) + " ANGSTROMS.\n";
  }
  for (const auto& chain : s.chains) {
    for (const auto& res : chain.residues) {
      for (const auto& atom : res.atoms) {
        append_atom_line(out, atom, res.res_name, chain.id, res.seq_index, res.insertion_code);
      }
    }
    out += "TER\n";
  }
  for (const auto& h : s.hetero_atoms) {
    append_atom_line(out, h.atom, h.res_name, h.chain_id, h.seq_index, h.insertion_code);
  }
  out += "END\n";
  return out;
}

}  // namespace protkit
