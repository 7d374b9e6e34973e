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

#include "mgpoison/io.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mgpoison {

std::string header_path(const std::string& prefix) { return prefix + ".header.json"; }
std::string episodes_path(const std::string& prefix) { return prefix + ".jsonl"; }

Json bound_to_json(double b) {
  if (std::isinf(b)) return "inf";
  return b;
}

double bound_from_json(const Json& j) {
  if (j.is_null()) return kInf;
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInf;
    throw InvalidArgument("bound must be a number or \"inf\"");
  }
  if (!j.is_number()) throw InvalidArgument("bound must be a number or \"inf\"");
  const double b = j.get<double>();
  if (!(b > 0)) throw InvalidArgument("bound must be positive");
  return b;
}

Json header_to_json(const GameShape& g, double bound) {
  return Json{{"n", g.n_players()},
              {"n_states", g.n_states()},
              {"actions", g.action_counts()},
              {"H", g.horizon()},
              {"b", bound_to_json(bound)}};
}

GameShape header_from_json(const Json& j, double* bound) {
  try {
    GameShape g(j.at("n").get<int>(), j.at("n_states").get<int>(),
                j.at("actions").get<std::vector<int>>(), j.at("H").get<int>());
    if (bound) *bound = bound_from_json(j.contains("b") ? j.at("b") : Json());
    return g;
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed header: ") + e.what());
  }
}

std::string episodes_to_jsonl(const OfflineDataset& ds) {
  std::string out;
  for (const auto& ep : ds.episodes) {
    Json steps = Json::array();
    for (const auto& st : ep.steps) {
      steps.push_back(Json{{"s", st.s}, {"a", ds.shape.decode(st.joint)}, {"r", st.r}});
    }
    out += Json{{"steps", steps}}.dump();
    out += '\n';
  }
  return out;
}

OfflineDataset dataset_from_text(const Json& header, const std::string& jsonl) {
  OfflineDataset ds;
  ds.shape = header_from_json(header, &ds.bound);
  std::istringstream in(jsonl);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Json j = Json::parse(line);
      Episode ep;
      for (const auto& s : j.at("steps")) {
        Step st;
        st.s = s.at("s").get<int>();
        st.joint = ds.shape.joint_index(s.at("a").get<std::vector<int>>());
        st.r = s.at("r").get<std::vector<double>>();
        ep.steps.push_back(std::move(st));
      }
      ds.episodes.push_back(std::move(ep));
    } catch (const Json::exception& e) {
      throw InvalidArgument("episode line " + std::to_string(lineno) + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("episode line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  ds.validate();
  return ds;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw InvalidArgument("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw InvalidArgument("cannot rename onto " + path);
  }
}

OfflineDataset read_dataset(const std::string& prefix) {
  Json header;
  try {
    header = Json::parse(read_file(header_path(prefix)));
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed header: ") + e.what());
  }
  return dataset_from_text(header, read_file(episodes_path(prefix)));
}

void write_dataset(const OfflineDataset& ds, const std::string& prefix) {
  write_file_atomic(header_path(prefix), header_to_json(ds.shape, ds.bound).dump(2) + "\n");
  write_file_atomic(episodes_path(prefix), episodes_to_jsonl(ds));
}

template <typename T>
static Json cell_json_impl(const CellArray<T>& t) {
  Json out = Json::array();
  for (int h = 0; h < t.horizon(); ++h) {
    Json hs = Json::array();
    for (int s = 0; s < t.n_states(); ++s) {
      Json row = Json::array();
      for (int a = 0; a < t.n_joint(); ++a) row.push_back(t(h, s, a));
      hs.push_back(row);
    }
    out.push_back(hs);
  }
  return out;
}

Json cell_table_json(const CellArray<double>& t) { return cell_json_impl(t); }
Json cell_table_json(const CellArray<int>& t) { return cell_json_impl(t); }

Json player_table_json(const PlayerTable& t) {
  Json out = Json::array();
  for (int i = 0; i < t.n_players(); ++i) {
    Json hs = Json::array();
    for (int h = 0; h < t.horizon(); ++h) {
      Json ss = Json::array();
      for (int s = 0; s < t.n_states(); ++s) {
        Json row = Json::array();
        for (int a = 0; a < t.n_joint(); ++a) row.push_back(t(i, h, s, a));
        ss.push_back(row);
      }
      hs.push_back(ss);
    }
    out.push_back(hs);
  }
  return out;
}

Json transitions_json(const TransitionTable& t) {
  Json out = Json::array();
  for (int h = 0; h < t.n_periods(); ++h) {
    Json ss = Json::array();
    for (int s = 0; s < t.n_states(); ++s) {
      Json as = Json::array();
      for (int a = 0; a < t.n_joint(); ++a) {
        const double* p = t.row(h, s, a);
        as.push_back(std::vector<double>(p, p + t.n_states()));
      }
      ss.push_back(as);
    }
    out.push_back(ss);
  }
  return out;
}

Json policy_json(const JointPolicy& p, const GameShape& g) {
  Json out = Json::array();
  for (int h = 0; h < p.horizon(); ++h) {
    Json row = Json::array();
    for (int s = 0; s < p.n_states(); ++s) row.push_back(g.decode(p(h, s)));
    out.push_back(row);
  }
  return out;
}

JointPolicy policy_from_json(const Json& j, const GameShape& g) {
  if (j.is_string() && j.get<std::string>() == "all-zeros") return JointPolicy::all_zeros(g);
  try {
    if (!j.is_array() || static_cast<int>(j.size()) != g.horizon()) {
      throw InvalidArgument("target table must have H rows");
    }
    JointPolicy p(g.horizon(), g.n_states());
    for (int h = 0; h < g.horizon(); ++h) {
      if (static_cast<int>(j[h].size()) != g.n_states()) {
        throw InvalidArgument("target table row must have one entry per state");
      }
      for (int s = 0; s < g.n_states(); ++s) p(h, s) = g.joint_index(j[h][s].get<std::vector<int>>());
    }
    return p;
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed target: ") + e.what());
  }
}

Json game_json(const MarkovGame& game) {
  return Json{{"shape", header_to_json(game.shape, game.bound)},
              {"rewards", player_table_json(game.rewards)},
              {"transitions", transitions_json(game.transitions)},
              {"initial", game.initial}};
}

Json widths_json(const ConfidenceWidths& w) {
  return Json{{"mode", to_string(w.params.mode)},
              {"rho_r", cell_table_json(w.rho_r)},
              {"rho_p", cell_table_json(w.rho_p)}};
}

}  // namespace mgpoison
