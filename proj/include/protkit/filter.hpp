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

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "protkit/error.hpp"
#include "protkit/pdb.hpp"
#include "protkit/structure.hpp"

namespace protkit {

struct FilterSpec {
  std::optional<std::size_t> min_length;
  std::optional<std::size_t> max_length;
  std::optional<std::size_t> max_chains;
  std::optional<double> max_resolution;
  std::optional<std::pair<std::string, std::string>> date_range;  // inclusive ISO dates
  std::set<std::string> required_ligands;
  std::set<std::string> excluded_ligands;
  std::optional<std::set<Method>> allowed_methods;

  void validate() const {
    if (min_length && max_length && *min_length > *max_length) {
      fail(ErrorKind::InvalidFilterSpec, "min_length > max_length");
    }
    if (date_range && date_range->first > date_range->second) {
      fail(ErrorKind::InvalidFilterSpec, "date_range start after end");
    }
    if (max_resolution && *max_resolution < 0.0) {
      fail(ErrorKind::InvalidFilterSpec, "negative max_resolution");
    }
  }
};

// Fields that are set but cannot be checked (e.g. no resolution recorded)
// reject the structure.
inline bool accepts(const FilterSpec& spec, const Structure& s) {
  const std::size_t length = s.residue_count();
  if (spec.min_length && length < *spec.min_length) return false;
  if (spec.max_length && length > *spec.max_length) return false;
  if (spec.max_chains && s.chains.size() > *spec.max_chains) return false;
  if (spec.max_resolution && (!s.resolution || *s.resolution > *spec.max_resolution)) return false;
  if (spec.date_range) {
    if (!s.deposition_date) return false;
    if (*s.deposition_date < spec.date_range->first || *s.deposition_date > spec.date_range->second) {
      return false;
    }
  }
  if (spec.allowed_methods && (!s.method || !spec.allowed_methods->contains(*s.method))) return false;

  if (!spec.required_ligands.empty() || !spec.excluded_ligands.empty()) {
    std::set<std::string> present;
    for (const auto& h : s.hetero_atoms) present.insert(h.res_name);
    for (const auto& code : spec.required_ligands) {
      if (!present.contains(code)) return false;
    }
    for (const auto& code : spec.excluded_ligands) {
      if (present.contains(code)) return false;
    }
  }
  return true;
}

inline std::vector<Structure> filter(std::vector<Structure> structures, const FilterSpec& spec) {
  std::vector<Structure> kept;
  for (auto& s : structures) {
    if (accepts(spec, s)) kept.push_back(std::move(s));
  }
  return kept;
}

namespace filter_detail {

inline std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= v.size()) {
    std::size_t comma = v.find(',', start);
    if (comma == std::string_view::npos) comma = v.size();
    auto item = pdb_detail::trim(v.substr(start, comma - start));
    if (!item.empty()) items.emplace_back(item);
    start = comma + 1;
  }
  return items;
}

inline bool is_iso_date(std::string_view d) {
  if (d.size() != 10 || d[4] != '-' || d[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (d[i] < '0' || d[i] > '9') return false;
  }
  return true;
}

}  // namespace filter_detail

// Flat key=value grammar, one entry per line, '#' starts a comment:
//   min_length=10
//   required_ligands=ZN,ADP
//   date_range=2000-01-01,2020-12-31
//   allowed_methods=XRAY,EM
inline FilterSpec parse_filter_spec(std::string_view text) {
  using filter_detail::split_list;
  FilterSpec spec;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = pdb_detail::trim(line);
    if (line.empty()) continue;

    auto bad = [&](const std::string& what) {
      return Error(ErrorKind::InvalidFilterSpec, "line " + std::to_string(line_no) + ": " + what, line_no);
    };
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw bad("expected key=value");
    const auto key = pdb_detail::trim(line.substr(0, eq));
    const auto value = pdb_detail::trim(line.substr(eq + 1));

    auto count = [&]() -> std::size_t {
      int v = 0;
      if (!pdb_detail::parse_int(value, v) || v < 0) throw bad("expected a non-negative integer");
      return static_cast<std::size_t>(v);
    };

    if (key == "min_length") {
      spec.min_length = count();
    } else if (key == "max_length") {
      spec.max_length = count();
    } else if (key == "max_chains") {
      spec.max_chains = count();
    } else if (key == "max_resolution") {
      double r = 0.0;
      if (!pdb_detail::parse_real(value, r)) throw bad("expected a number");
      spec.max_resolution = r;
    } else if (key == "date_range") {
      auto parts = split_list(value);
      if (parts.size() != 2 || !filter_detail::is_iso_date(parts[0]) || !filter_detail::is_iso_date(parts[1])) {
        throw bad("expected date_range=YYYY-MM-DD,YYYY-MM-DD");
      }
      spec.date_range = std::make_pair(parts[0], parts[1]);
    } else if (key == "required_ligands") {
      for (auto& code : split_list(value)) spec.required_ligands.insert(code);
    } else if (key == "excluded_ligands") {
      for (auto& code : split_list(value)) spec.excluded_ligands.insert(code);
    } else if (key == "allowed_methods") {
      std::set<Method> methods;
      for (auto& name : split_list(value)) {
        auto m = method_from_string(name);
        if (!m) throw bad("unknown method " + name);
        methods.insert(*m);
      }
      spec.allowed_methods = std::move(methods);
    } else {
      throw bad("unknown key '" + std::string(key) + "'");
    }
  }
  spec.validate();
  return spec;
}

}  // namespace protkit
