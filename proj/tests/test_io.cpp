#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "openxor/generator.hpp"
#include "openxor/instance_io.hpp"
#include "support.hpp"

using namespace openxor;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "openxor-test-io";
  fs::create_directories(dir);
  return dir / name;
}

void put(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("FNV-1a digests match the published test vectors") {
  CHECK(fingerprint("") == "cbf29ce484222325");
  CHECK(fingerprint("a") == "af63dc4c8601ec8c");
  CHECK(fingerprint("foobar") == "85944171f73967e8");
}

TEST_CASE("golden instance parses into the expected fields") {
  const auto instances = read_jsonl(testing::golden("worked_example.jsonl"));
  REQUIRE(instances.size() == 1);
  const Instance& inst = instances[0];
  CHECK(inst.id == "worked-example");
  CHECK(inst.bits == std::vector<Bit>{0, 1, 1, 1, 1, 0, 1});
  CHECK(inst.target == 1);
  CHECK(inst.checkpoints == std::vector<Checkpoint>{{4, 1}});
  REQUIRE(inst.few_shot.size() == 3);
  CHECK(inst.few_shot[1].id == "worked-example/ex2");
  CHECK(inst.few_shot[1].checkpoints == std::vector<Checkpoint>{{5, 1}});
}

TEST_CASE("serialization round-trips generated datasets byte for byte") {
  GenConfig config;
  config.n = 300;
  config.count = 12;
  config.seed = 5;
  const auto ds = generate_dataset(config);
  const auto path = scratch("roundtrip.jsonl");
  write_jsonl(path, ds.instances);
  const auto back = read_jsonl(path);
  CHECK(back == ds.instances);
  const auto again = scratch("roundtrip2.jsonl");
  write_jsonl(again, back);
  CHECK(read_file(path) == read_file(again));
}

TEST_CASE("key order is fixed") {
  const auto inst = read_jsonl(testing::golden("worked_example.jsonl")).at(0);
  const auto line = to_jsonl_line(inst.few_shot[0]);
  CHECK(line ==
        R"({"id":"worked-example/ex1","bits":[1,0,1,1,0,0,1,0],"target":1,"checkpoints":[[3,1]],)"
        R"("ground_truth":["XOR","NOP","NOP","XOR","NOP","NOP","XOR","NOP"],"few_shot":[]})");
}

TEST_CASE("missing ground truth serializes as null") {
  Instance inst;
  inst.id = "x";
  inst.bits = {1};
  inst.target = 1;
  const auto j = to_json(inst);
  CHECK(j["ground_truth"].is_null());
  CHECK(instance_from_json(nlohmann::json::parse(j.dump())) == inst);
}

TEST_CASE("malformed records are reported with their line number") {
  const auto path = scratch("bad.jsonl");
  put(path,
      R"({"id":"a","bits":[1],"target":1,"checkpoints":[],"ground_truth":null,"few_shot":[]})"
      "\n\n"
      R"({"id":"b","bits":[1,2],"target":1,"checkpoints":[],"ground_truth":null,"few_shot":[]})"
      "\n");
  try {
    read_jsonl(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }

  put(path, "{not json}\n");
  CHECK_THROWS_AS(read_jsonl(path), ParseError);
  put(path, R"({"id":"c","bits":[1,0],"target":1,"checkpoints":[[3,1]],"ground_truth":null,"few_shot":[]})");
  CHECK_THROWS_AS(read_jsonl(path), ParseError);
  put(path, R"({"id":"d","bits":[1,0],"target":1,"checkpoints":[],"ground_truth":["NOP","NOP"],"few_shot":[]})");
  CHECK_THROWS_AS(read_jsonl(path), ParseError);  // ground truth misses the target
}

TEST_CASE("missing files raise IoError") {
  CHECK_THROWS_AS(read_jsonl(scratch("does-not-exist.jsonl")), IoError);
}

TEST_CASE("atomic writes leave no temporary behind") {
  const auto path = scratch("atomic.txt");
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  CHECK(read_file(path) == "second");
  for (const auto& entry : fs::directory_iterator(path.parent_path())) {
    CHECK(entry.path().filename().string().find(".tmp") == std::string::npos);
  }
}
