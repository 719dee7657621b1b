// Copyright 2026 The VLScore Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vlscore/types.hpp"

namespace vlscore {

// JSON Lines, one StudyRecord per line. Blank lines are skipped. Errors carry
// the 1-based line number. `source` names the stream in error messages.
std::vector<StudyRecord> read_manifest(std::istream& in, const std::string& source = "<manifest>");
std::vector<StudyRecord> load_manifest(const std::filesystem::path& path);

// Writes records with a fixed key order so equal inputs give equal bytes.
void write_manifest(std::ostream& out, std::span<const StudyRecord> records);
void save_manifest(const std::filesystem::path& path, std::span<const StudyRecord> records);

}  // namespace vlscore
