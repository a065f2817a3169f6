/*
 * Copyright 2026 The MWE Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "commands.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mwe/embedding.h"
#include "mwe/features.h"
#include "support/synthetic_world.h"

namespace mwe {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult Run(std::vector<std::string> args) {
  args.insert(args.begin(), "mwe");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string ReadBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json ReadJson(const fs::path& path) { return json::parse(ReadBytes(path)); }

void WriteFile(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mwe_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Two general sentences and two music documents with hand-countable tokens.
fs::path TinyCorpus() {
  const fs::path dir = FreshDir("tiny");
  WriteFile(dir / "general.txt", "The cat sat\nthe dog\n");
  WriteFile(dir / "music.jsonl",
            R"({"track_id":"trk1","artist_id":"art1","tags":[{"name":"rock","category":"content"},)"
            R"({"name":"night","category":"context"}],"review_sentences":["Loud guitar riffs","the cat"]})"
            "\n"
            R"({"track_id":"trk2","artist_id":"art1","tags":[{"name":"rock","category":"content"}],)"
            R"("review_sentences":["soft guitar"]})"
            "\n");
  WriteFile(dir / "run.json", R"({"corpus": {"min_count": 1}})");
  return dir;
}

CliResult BuildTiny(const fs::path& dir, const fs::path& out) {
  return Run({"build-corpus", "--config", (dir / "run.json").string(), "--general-corpus",
              (dir / "general.txt").string(), "--music-corpus", (dir / "music.jsonl").string(),
              "--out", out.string()});
}

// Four tags whose content and context vectors line up pairwise, plus tracks
// placed at the sum of their tag vectors.
fs::path AlignedTagFiles(bool with_unseen) {
  const fs::path dir = FreshDir(with_unseen ? "aligned_zs" : "aligned");
  const std::map<std::string, std::pair<float, float>> tag_vectors = {
      {"c0", {1, 0}}, {"c1", {0, 1}}, {"x0", {1, 0.1f}}, {"x1", {0.1f, 1}}};
  const std::vector<std::pair<std::string, std::vector<std::string>>> tracks = {
      {"t1", {"c0", "x0"}}, {"t2", {"c0", "x0"}}, {"t3", {"c0", "x1"}}, {"t4", {"c1", "x1"}},
      {"t5", {"c1", "x1"}}, {"t6", {"c1", "x0"}}, {"t7", {"c0", "c1"}}, {"t8", {"x0", "x1"}}};
  Vocabulary vocab;
  std::vector<float> rows;
  for (const auto& [tag, v] : tag_vectors) {
    vocab.Add(tag, TokenKind::kTag, 1);
    rows.insert(rows.end(), {v.first, v.second});
  }
  vocab.Add("soft", TokenKind::kReviewWord, 1);
  rows.insert(rows.end(), {0.6f, 0.8f});
  std::string ann;
  for (const auto& [track, tags] : tracks) {
    vocab.Add(track, TokenKind::kTrackId, 1);
    float a = 0, b = 0;
    for (const auto& t : tags) {
      a += tag_vectors.at(t).first;
      b += tag_vectors.at(t).second;
    }
    rows.insert(rows.end(), {a, b});
    ann += json{{"track_id", track}, {"tags", tags}, {"split", "test"}}.dump() + "\n";
  }
  SaveEmbedding(WordEmbedding(vocab, 2, std::move(rows)), dir / "embedding.txt");
  WriteFile(dir / "annotations.jsonl", ann);
  const std::string last = with_unseen ? "unseen" : "seen";
  WriteFile(dir / "tag_metadata.tsv",
            "c0\tcontent\tseen\nc1\tcontent\tseen\nx0\tcontext\tseen\nx1\tcontext\t" + last + "\n");
  return dir;
}

std::vector<std::string> EvalArgs(const std::string& task, const fs::path& dir,
                                  const fs::path& out) {
  return {"eval", task, "--embedding", (dir / "embedding.txt").string(), "--annotations",
          (dir / "annotations.jsonl").string(), "--tag-metadata",
          (dir / "tag_metadata.tsv").string(), "--out", out.string()};
}

std::string FormatNeighbors(const std::vector<Neighbor>& ns) {
  std::string s;
  for (const auto& n : ns) {
    char score[32];
    std::snprintf(score, sizeof score, "%.6f", n.score);
    s += n.token + '\t' + std::string(TokenKindName(n.kind)) + '\t' + score + '\n';
  }
  return s;
}

// A small synthetic world pushed through build-corpus and train-word once.
struct JointFixture {
  fs::path root;
  fs::path config;
  fs::path embedding;
  fs::path features;
  fs::path supervision;
};

const JointFixture& Joint() {
  static const JointFixture fixture = [] {
    JointFixture f;
    f.root = FreshDir("joint");
    testing::SyntheticWorldConfig wc;
    wc.tracks_per_genre = 30;
    const testing::SyntheticWorld world = testing::MakeSyntheticWorld(wc);
    testing::WriteWorldFiles(world, f.root / "data");
    const auto clips = testing::CompositionFeatures(world, 12, 2, 0.3, 4);
    f.features = f.root / "data" / "features.jsonl";
    f.supervision = f.root / "data" / "supervision.jsonl";
    WriteFeatureFile(f.features, clips);
    testing::WriteSupervisionFile(f.supervision,
                                  testing::SupervisionFor(world, clips, {TrackSplit::kTrain}));
    f.config = f.root / "run.json";
    WriteFile(f.config, json{{"corpus", {{"min_count", 2}}},
                             {"sgns", {{"dim", 12}, {"epochs", 2}, {"negatives", 4}}},
                             {"joint",
                              {{"joint_dim", 6}, {"hidden", 8}, {"epochs", 4}, {"batch_size", 16}}}}
                            .dump());
    const std::string data = (f.root / "data").string();
    REQUIRE(Run({"build-corpus", "--config", f.config.string(), "--general-corpus",
                 data + "/general.txt", "--music-corpus", data + "/music.jsonl", "--out",
                 (f.root / "corpus").string()})
                .code == 0);
    REQUIRE(Run({"train-word", "--config", f.config.string(), "--corpus-dir",
                 (f.root / "corpus").string(), "--out", (f.root / "word").string()})
                .code == 0);
    f.embedding = f.root / "word" / "embedding.txt";
    return f;
  }();
  return fixture;
}

std::vector<std::string> JointArgs(const fs::path& out) {
  const JointFixture& f = Joint();
  return {"train-joint", "--config", f.config.string(), "--embedding", f.embedding.string(),
          "--features", f.features.string(), "--supervision", f.supervision.string(),
          "--out", out.string()};
}

TEST_CASE("missing inputs exit with status 2 and name the path") {
  const fs::path dir = FreshDir("missing");
  const std::string ghost = (dir / "no_such_music.jsonl").string();
  const CliResult r = Run({"build-corpus", "--music-corpus", ghost, "--out", dir.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find(ghost) != std::string::npos);

  const CliResult w = Run({"train-word", "--corpus-dir", (dir / "nowhere").string()});
  CHECK(w.code == 2);
  CHECK(w.err.find("nowhere") != std::string::npos);

  CHECK(Run({"no-such-command"}).code == 2);
  CHECK(Run({"eval"}).code == 2);
}

TEST_CASE("unknown config keys are rejected") {
  const fs::path dir = FreshDir("badkey");
  WriteFile(dir / "run.json", R"({"sgns": {"dimension": 8}})");
  const CliResult r = Run({"build-corpus", "--config", (dir / "run.json").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("dimension") != std::string::npos);

  WriteFile(dir / "seed.json", R"({"joint": {"seed": 4}})");
  CHECK(Run({"build-corpus", "--config", (dir / "seed.json").string()}).code == 2);
}

TEST_CASE("build-corpus counts match the input and reruns are identical") {
  const fs::path dir = TinyCorpus();
  REQUIRE(BuildTiny(dir, dir / "a").code == 0);
  const json m = ReadJson(dir / "a" / "manifest.json");
  const json& counts = m.at("counts");
  CHECK(counts.at("general_documents") == 2);
  CHECK(counts.at("music_documents") == 2);
  CHECK(counts.at("general_tokens") == 5);
  CHECK(counts.at("review_tokens") == 7);
  CHECK(counts.at("tag_tokens") == 3);
  CHECK(counts.at("artist_tokens") == 2);
  CHECK(counts.at("track_tokens") == 2);
  // the cat sat dog loud guitar riffs soft, rock night, art1, trk1 trk2
  CHECK(counts.at("vocab_size") == 13);
  CHECK(counts.at("vocab_total_count") == 19);
  const json& kinds = counts.at("vocab_by_kind");
  CHECK(kinds.value("general", 0) + kinds.value("review", 0) == 8);
  CHECK(kinds.at("tag") == 2);
  CHECK(kinds.at("artist") == 1);
  CHECK(kinds.at("track") == 2);
  CHECK(m.at("inputs").size() == 2);

  REQUIRE(BuildTiny(dir, dir / "b").code == 0);
  for (const char* shard : {"vocab.tsv", "general.txt", "music.jsonl", "paragraphs.txt"}) {
    CAPTURE(shard);
    CHECK(!ReadBytes(dir / "a" / shard).empty());
    CHECK(ReadBytes(dir / "a" / shard) == ReadBytes(dir / "b" / shard));
  }
}

TEST_CASE("train-word echoes default hyperparameters and is deterministic") {
  const fs::path dir = TinyCorpus();
  REQUIRE(BuildTiny(dir, dir / "corpus").code == 0);
  for (const char* run : {"a", "b"}) {
    REQUIRE(Run({"train-word", "--corpus-dir", (dir / "corpus").string(), "--seed", "9",
                 "--out", (dir / run).string()})
                .code == 0);
  }
  const json m = ReadJson(dir / "a" / "manifest.json");
  CHECK(m.at("hyperparameters") ==
        json{{"dim", 300}, {"window", 15}, {"epochs", 15}, {"negatives", 20}});
  CHECK(m.at("seed") == 9);
  CHECK(m.at("epoch_loss").size() == 15);
  CHECK(m.at("inputs").size() == 4);
  for (const char* file : {"embedding.txt", "embedding.txt.vocab.tsv", "loss.tsv"}) {
    CAPTURE(file);
    CHECK(!ReadBytes(dir / "a" / file).empty());
    CHECK(ReadBytes(dir / "a" / file) == ReadBytes(dir / "b" / file));
  }
  CHECK(ReadJson(dir / "b" / "manifest.json").at("embedding_checksum") ==
        m.at("embedding_checksum"));

  REQUIRE(Run({"train-word", "--corpus-dir", (dir / "corpus").string(), "--seed", "10",
               "--out", (dir / "c").string()})
              .code == 0);
  CHECK(ReadBytes(dir / "a" / "embedding.txt") != ReadBytes(dir / "c" / "embedding.txt"));
}

TEST_CASE("train-joint supervision weights and loss curve") {
  const fs::path out = FreshDir("joint_tag");
  auto args = JointArgs(out);
  for (const char* flag : {"--lambda-tag", "1", "--lambda-artist", "0", "--lambda-track", "0"}) {
    args.push_back(flag);
  }
  const CliResult r = Run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const json m = ReadJson(out / "manifest.json");
  CHECK(m.at("supervision") == json{"Tag"});

  std::ifstream curve(out / "curve.tsv");
  std::string line, last;
  int rows = 0;
  std::getline(curve, line);
  CHECK(line == "epoch\tloss");
  while (std::getline(curve, line)) {
    last = line;
    ++rows;
  }
  CHECK(rows == 4);
  REQUIRE(last.rfind("4\t", 0) == 0);
  CHECK(std::stod(last.substr(2)) == doctest::Approx(m.at("final_loss").get<double>()));
  CHECK(fs::exists(out / "checkpoint.json"));

  auto zero = JointArgs(FreshDir("joint_zero"));
  for (const char* flag : {"--lambda-tag", "0", "--lambda-artist", "0", "--lambda-track", "0"}) {
    zero.push_back(flag);
  }
  CHECK(Run(zero).code == 2);
}

TEST_CASE("joint-source eval reads the checkpoint") {
  const fs::path out = FreshDir("joint_eval");
  REQUIRE(Run(JointArgs(out / "model")).code == 0);
  const fs::path data = Joint().root / "data";
  const CliResult r =
      Run({"eval", "query-by-tag", "--source", "joint", "--checkpoint",
           (out / "model" / "checkpoint.json").string(), "--features", Joint().features.string(),
           "--annotations", (data / "annotations.jsonl").string(), "--tag-metadata",
           (data / "tag_metadata.tsv").string(), "--out", (out / "eval").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const json report = ReadJson(out / "eval" / "report.json");
  CHECK(report.at("source") == "joint");
  const double auc = report.at("results").at("aggregate").get<double>();
  CHECK(auc >= 0.0);
  CHECK(auc <= 1.0);
}

TEST_CASE("eval reports") {
  const fs::path dir = AlignedTagFiles(false);
  const CliResult r = Run(EvalArgs("tag-rank", dir, dir / "rank"));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const json report = ReadJson(dir / "rank" / "report.json");
  CHECK(report.at("task") == "tag-rank");
  CHECK(report.at("results").at("average").get<double>() == doctest::Approx(1.0));

  auto joint_rank = EvalArgs("tag-rank", dir, dir / "rank_joint");
  joint_rank.insert(joint_rank.end(), {"--source", "joint"});
  CHECK(Run(joint_rank).code == 2);

  // Every tag is seen, so there is nothing to evaluate zero-shot.
  const CliResult zs = Run(EvalArgs("zero-shot", dir, dir / "zs"));
  CHECK(zs.code == 2);
  CHECK(zs.err.find("unseen") != std::string::npos);

  for (const char* task : {"query-by-tag", "tagging", "query-by-track"}) {
    CAPTURE(task);
    REQUIRE(Run(EvalArgs(task, dir, dir / "first")).code == 0);
    REQUIRE(Run(EvalArgs(task, dir, dir / "second")).code == 0);
    const std::string first = ReadBytes(dir / "first" / "report.json");
    CHECK(!first.empty());
    CHECK(first == ReadBytes(dir / "second" / "report.json"));
  }

  const json by_track = ReadJson(dir / "first" / "report.json");
  CHECK(by_track.at("skipped").at("tracks").empty());

  const fs::path zdir = AlignedTagFiles(true);
  REQUIRE(Run(EvalArgs("zero-shot", zdir, zdir / "zs")).code == 0);
  CHECK(ReadJson(zdir / "zs" / "report.json").at("results").contains("retrieval"));
}

TEST_CASE("query matches nearest-neighbor search") {
  const fs::path dir = AlignedTagFiles(false);
  const std::string emb_path = (dir / "embedding.txt").string();
  const WordEmbedding emb = LoadEmbedding(emb_path);

  const CliResult one = Run({"query", "c0", "-k", "1", "--embedding", emb_path});
  REQUIRE(one.code == 0);
  const std::vector<std::string> c0 = {"c0"};
  CHECK(one.out == FormatNeighbors(Nearest(MakeQueryVector(c0, emb).vector, 1, std::nullopt, emb)));

  const CliResult all = Run({"query", "c0", "-k", "50", "--embedding", emb_path});
  REQUIRE(all.code == 0);
  CHECK(std::count(all.out.begin(), all.out.end(), '\n') == 13);

  const CliResult tags = Run({"query", "c0", "-k", "50", "--kind", "tag", "--embedding", emb_path});
  REQUIRE(tags.code == 0);
  CHECK(std::count(tags.out.begin(), tags.out.end(), '\n') == 4);
  CHECK(tags.out.find("soft") == std::string::npos);

  const CliResult pair = Run({"query", "c0", "c1", "zzz", "-k", "3", "--embedding", emb_path});
  REQUIRE(pair.code == 0);
  const std::vector<std::string> words = {"c0", "c1"};
  const QueryVector mean = MakeQueryVector(words, emb);
  CHECK(mean.vector[0] == doctest::Approx(0.5));
  CHECK(mean.vector[1] == doctest::Approx(0.5));
  CHECK(pair.out == FormatNeighbors(Nearest(mean.vector, 3, std::nullopt, emb)));
  CHECK(pair.err.find("zzz") != std::string::npos);

  const CliResult oov = Run({"query", "nothing", "here", "--embedding", emb_path});
  CHECK(oov.code == 2);
  CHECK(oov.err.find("out of vocabulary") != std::string::npos);

  CHECK(Run({"query", "c0", "--kind", "bogus", "--embedding", emb_path}).code == 2);
}

}  // namespace
}  // namespace mwe
