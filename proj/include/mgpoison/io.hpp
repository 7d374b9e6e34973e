// Copyright 2026 The mgpoison Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MGPOISON_IO_HPP_
#define MGPOISON_IO_HPP_

#include <string>

#include "json.hpp"
#include "mgpoison/confidence.hpp"
#include "mgpoison/game.hpp"

namespace mgpoison {

using Json = nlohmann::json;

// "<prefix>.header.json" and "<prefix>.jsonl".
std::string header_path(const std::string& prefix);
std::string episodes_path(const std::string& prefix);

Json header_to_json(const GameShape& shape, double bound);
// Returns the shape; bound is written to *bound.
GameShape header_from_json(const Json& j, double* bound);

std::string episodes_to_jsonl(const OfflineDataset& dataset);
OfflineDataset dataset_from_text(const Json& header, const std::string& jsonl);

OfflineDataset read_dataset(const std::string& prefix);
void write_dataset(const OfflineDataset& dataset, const std::string& prefix);

std::string read_file(const std::string& path);
// Temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& content);

// b may be a number, "inf" or null (meaning +inf).
Json bound_to_json(double b);
double bound_from_json(const Json& j);

Json cell_table_json(const CellArray<double>& t);      // [h][s][a]
Json cell_table_json(const CellArray<int>& t);
Json player_table_json(const PlayerTable& t);          // [i][h][s][a]
Json transitions_json(const TransitionTable& t);       // [h][s][a][s']
Json policy_json(const JointPolicy& p, const GameShape& shape);  // [h][s][player]
JointPolicy policy_from_json(const Json& j, const GameShape& shape);
Json game_json(const MarkovGame& game);
Json widths_json(const ConfidenceWidths& w);

}  // namespace mgpoison

#endif  // MGPOISON_IO_HPP_
