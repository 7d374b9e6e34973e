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

#include <gtest/gtest.h>

#include <filesystem>

#include "test_util.hpp"

namespace mgpoison {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("mgpoison_io_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void expect_same(const OfflineDataset& a, const OfflineDataset& b) {
  EXPECT_EQ(a.shape.action_counts(), b.shape.action_counts());
  EXPECT_EQ(a.shape.n_states(), b.shape.n_states());
  EXPECT_EQ(a.shape.horizon(), b.shape.horizon());
  EXPECT_EQ(a.bound, b.bound);
  ASSERT_EQ(a.n_episodes(), b.n_episodes());
  for (int k = 0; k < a.n_episodes(); ++k)
    for (int h = 0; h < a.shape.horizon(); ++h) {
      const Step& x = a.episodes[k].steps[h];
      const Step& y = b.episodes[k].steps[h];
      EXPECT_EQ(x.s, y.s);
      EXPECT_EQ(x.joint, y.joint);
      EXPECT_EQ(x.r, y.r);  // bit-exact: JSON doubles round trip
    }
}

TEST(Io, DatasetRoundTripIsExact) {
  Rng rng(5);
  const OfflineDataset ds = testing::random_dataset(GameShape(3, 2, {2, 3, 2}, 3), 17, 0.7, rng);
  const fs::path d = scratch_dir("roundtrip");
  write_dataset(ds, (d / "data").string());
  expect_same(ds, read_dataset((d / "data").string()));
  EXPECT_TRUE(fs::exists(d / "data.header.json"));
  EXPECT_TRUE(fs::exists(d / "data.jsonl"));
}

TEST(Io, UnboundedRewardsRoundTrip) {
  Rng rng(6);
  OfflineDataset ds = testing::random_dataset(GameShape(2, 1, {2, 2}, 1), 3, 5.0, rng);
  ds.bound = kInf;
  const Json h = header_to_json(ds.shape, ds.bound);
  EXPECT_EQ(h.at("b"), "inf");
  expect_same(ds, dataset_from_text(h, episodes_to_jsonl(ds)));
  Json no_b = h;
  no_b.erase("b");
  EXPECT_EQ(dataset_from_text(no_b, episodes_to_jsonl(ds)).bound, kInf);
  Json null_b = h;
  null_b["b"] = nullptr;
  EXPECT_EQ(dataset_from_text(null_b, episodes_to_jsonl(ds)).bound, kInf);
}

TEST(Io, MalformedInputsAreRejected) {
  const OfflineDataset ds = testing::dominant_example_dataset();
  const Json h = header_to_json(ds.shape, ds.bound);
  EXPECT_THROW(dataset_from_text(h, "{\"steps\": [ \n"), InvalidArgument);
  EXPECT_THROW(dataset_from_text(h, R"({"steps":[{"s":0,"a":[0,2],"r":[0,0]}]})"), InvalidArgument);
  EXPECT_THROW(dataset_from_text(h, R"({"steps":[{"s":0,"a":[0,0],"r":[4,0]}]})"), InvalidArgument);
  EXPECT_THROW(dataset_from_text(h, R"({"steps":[{"s":1,"a":[0,0],"r":[0,0]}]})"), InvalidArgument);
  Json bad = h;
  bad["b"] = -1;
  EXPECT_THROW(dataset_from_text(bad, ""), InvalidArgument);
  bad.erase("b");
  bad.erase("H");
  EXPECT_THROW(dataset_from_text(bad, ""), InvalidArgument);
  EXPECT_THROW(read_dataset("/nonexistent/mgpoison/prefix"), InvalidArgument);
}

TEST(Io, BlankLinesAreSkipped) {
  const OfflineDataset ds = testing::dominant_example_dataset();
  const std::string text = "\n" + episodes_to_jsonl(ds) + "\n  \n";
  EXPECT_EQ(dataset_from_text(header_to_json(ds.shape, ds.bound), text).n_episodes(), 4);
}

TEST(Io, AtomicWriteLeavesNoTemporaries) {
  const fs::path d = scratch_dir("atomic");
  const std::string p = (d / "report.json").string();
  write_file_atomic(p, "first");
  write_file_atomic(p, "second");
  EXPECT_EQ(read_file(p), "second");
  int entries = 0;
  for (const auto& e : fs::directory_iterator(d)) {
    (void)e;
    ++entries;
  }
  EXPECT_EQ(entries, 1);
  EXPECT_THROW(write_file_atomic((d / "missing" / "x.json").string(), "x"), InvalidArgument);
}

TEST(Io, PolicyJsonRoundTrip) {
  Rng rng(8);
  const GameShape g(2, 3, {2, 3}, 2);
  const JointPolicy p = testing::random_policy(g, rng);
  const JointPolicy q = policy_from_json(policy_json(p, g), g);
  for (int h = 0; h < 2; ++h)
    for (int s = 0; s < 3; ++s) EXPECT_EQ(p(h, s), q(h, s));
  const JointPolicy z = policy_from_json(Json("all-zeros"), g);
  EXPECT_EQ(z(1, 2), 0);
  EXPECT_THROW(policy_from_json(Json::array({Json::array()}), g), InvalidArgument);
  EXPECT_THROW(policy_from_json(Json("ones"), g), InvalidArgument);
}

TEST(Io, BoundJson) {
  EXPECT_EQ(bound_from_json(bound_to_json(2.5)), 2.5);
  EXPECT_EQ(bound_from_json(bound_to_json(kInf)), kInf);
  EXPECT_THROW(bound_from_json(Json("big")), InvalidArgument);
  EXPECT_THROW(bound_from_json(Json(0.0)), InvalidArgument);
}

}  // namespace
}  // namespace mgpoison
