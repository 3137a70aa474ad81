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

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace protkit {

// Token order is frozen: serialised one-hot features depend on it.
enum class ResidueType : std::uint8_t {
  ALA = 0, ARG, ASN, ASP, CYS, GLN, GLU, GLY, HIS, ILE,
  LEU, LYS, MET, PHE, PRO, SER, THR, TRP, TYR, VAL,
  UNKNOWN = 20,
};

inline constexpr int kNumCanonical = 20;
inline constexpr int kUnknownToken = 20;
inline constexpr int kMaskToken = 21;
inline constexpr int kPadToken = 22;
inline constexpr int kVocabularySize = 23;

inline constexpr std::array<std::string_view, kVocabularySize> kVocabulary = {
    "ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU", "GLY",
    "HIS", "ILE", "LEU", "LYS", "MET", "PHE", "PRO", "SER",
    "THR", "TRP", "TYR", "VAL", "UNK", "<mask>", "<pad>"};

inline constexpr int token_of(ResidueType t) { return static_cast<int>(t); }

inline constexpr bool is_canonical(ResidueType t) {
  return static_cast<int>(t) < kNumCanonical;
}

inline ResidueType residue_type_from_name(std::string_view name) {
  for (int i = 0; i < kNumCanonical; ++i) {
    if (kVocabulary[static_cast<std::size_t>(i)] == name) {
      return static_cast<ResidueType>(i);
    }
  }
  return ResidueType::UNKNOWN;
}

inline std::string_view residue_name(ResidueType t) {
  return kVocabulary[static_cast<std::size_t>(t)];
}

inline std::string vocabulary_fingerprint() {
  std::string joined;
  for (auto sym : kVocabulary) {
    joined += sym;
    joined += ',';
  }
  return joined;
}

}  // namespace protkit
